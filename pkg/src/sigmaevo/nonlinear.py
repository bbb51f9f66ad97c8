"""Hartree-type nonlinearities and exponential-Duhamel time stepping.

The state is advanced in frequency space.  Over a step of length dt the
linear flow is applied exactly through the propagator multipliers and the
nonlinearity is frozen at a predicted midpoint value:

    U_half  = E(dt/2) U_n + D(dt/2) N(u_n)
    U_{n+1} = E(dt) U_n   + D(dt) N(u_half)

where E holds (K0, K1; dK0, dK1) and D = (int_0^dt K1, K1(dt)) is the
Duhamel weight of a forcing that is constant in time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from . import kernels
from .params import Params
from .propagator import PROFILES, StateVector, energy_norm
from .spectral import (
    Grid,
    SpectralField,
    boundary_density,
    dealias_mask,
    hermitian_expand,
    l2_from_freq,
    lp_norm,
    riesz_symbol,
)

KINDS = ("modified", "hartree", "power")

# Halt once ||u||_2 exceeds this multiple of the data norm.
GROWTH_FACTOR = 1e6
BOUNDARY_WARN = 1e-8
DEALIAS_WARN = 1e-8
MIN_DT = 1e-7


@dataclass(frozen=True)
class NonlinearitySpec:
    """Which nonlinearity to evaluate and with which exponents.

    ``modified``  I_alpha(|u|^(p+q))
    ``hartree``   |u|^p I_alpha(|u|^q)
    ``power``     |u|^(p+q), the alpha -> 0 limit of both

    ``zero_mode`` controls the Riesz symbol at xi = 0 (``"project"`` or
    ``"retain"``).  For ``power`` with ``"project"`` the mean of |u|^(p+q) is
    removed as well, matching the alpha -> 0 limit of the projected symbol.
    """

    kind: str
    alpha: float = 0.0
    p: float = 1.0
    q: float = 1.0
    zero_mode: str = "project"
    dealias: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.p < 0 or self.q < 0 or self.p + self.q <= 0:
            raise ValueError(f"exponents must satisfy p, q >= 0 and p + q > 0, got p={self.p}, q={self.q}")
        if self.kind != "power" and not self.alpha > 0:
            raise ValueError(f"alpha must be positive for kind {self.kind!r}")
        if self.zero_mode not in ("project", "retain"):
            raise ValueError(f"zero_mode must be 'project' or 'retain', got {self.zero_mode!r}")

    @property
    def power(self) -> float:
        return self.p + self.q

    @classmethod
    def from_params(cls, params: Params, kind="modified", **kw) -> "NonlinearitySpec":
        return cls(kind=kind, alpha=params.alpha, p=params.p, q=params.q, **kw)


class NonlinearOperator:
    """Evaluates the nonlinearity on frequency arrays of one grid with cached symbols.

    Solutions of the equation are real, so the operator works on the
    half spectrum (last axis 0..N/2) with real transforms and returns the
    full Hermitian spectrum.  The imaginary part of a complex input is
    discarded.
    """

    def __init__(self, grid: Grid, spec: NonlinearitySpec):
        if spec.kind != "power" and not 0 < spec.alpha < grid.n:
            raise ValueError(f"alpha must lie in (0, n) = (0, {grid.n}), got {spec.alpha}")
        self.grid = grid
        self.spec = spec
        half = (Ellipsis, slice(0, grid.N // 2 + 1))
        self.mask = dealias_mask(grid)[half] if spec.dealias else None
        if spec.kind == "power":
            self.riesz = None
        else:
            self.riesz = riesz_symbol(grid, spec.alpha, spec.zero_mode)[half]
        self._half = half

    def _pow(self, u, s):
        return kernels.abs_pow(u.ravel(), s).reshape(u.shape)

    def _forward(self, values):
        out = sfft.rfftn(values)
        if self.mask is not None:
            out *= self.mask
        return out

    def physical_input(self, uh):
        """Real samples of u from its full spectrum (dealiased when enabled)."""
        h = uh[self._half]
        if self.mask is not None:
            h = h * self.mask
        return sfft.irfftn(h, s=self.grid.shape)

    def __call__(self, uh: np.ndarray) -> np.ndarray:
        """Frequency data of N(u) given the frequency data of u."""
        spec = self.spec
        u = np.ascontiguousarray(self.physical_input(uh))
        if spec.kind == "modified":
            out = sfft.rfftn(self._pow(u, spec.power)) * self.riesz
        elif spec.kind == "hartree":
            potential = sfft.irfftn(sfft.rfftn(self._pow(u, spec.q)) * self.riesz, s=self.grid.shape)
            out = sfft.rfftn(self._pow(u, spec.p) * potential)
        else:
            out = sfft.rfftn(self._pow(u, spec.power))
            if spec.zero_mode == "project":
                out.flat[0] = 0.0
        if self.mask is not None:
            out *= self.mask
        return hermitian_expand(out, self.grid.shape)


def evaluate_nonlinearity(u: SpectralField, spec: NonlinearitySpec) -> SpectralField:
    return SpectralField(u.grid, freq=NonlinearOperator(u.grid, spec)(u.freq))


def eval_modified(u: SpectralField, spec: NonlinearitySpec) -> SpectralField:
    """I_alpha(|u|^(p+q)) with the dealiasing and zero-mode policy of ``spec``."""
    if spec.kind != "modified":
        raise ValueError("eval_modified needs kind='modified'")
    return evaluate_nonlinearity(u, spec)


def eval_hartree(u: SpectralField, spec: NonlinearitySpec) -> SpectralField:
    """|u|^p I_alpha(|u|^q); with kind='power' returns |u|^(p+q)."""
    if spec.kind not in ("hartree", "power"):
        raise ValueError("eval_hartree needs kind='hartree' or 'power'")
    return evaluate_nonlinearity(u, spec)


def lebesgue_indices(params: Params):
    """(q1, q2): the L^q spaces in which u must lie for the HLS step into L^m and L^2."""
    n, a, s, m = params.n, params.alpha, params.power, params.m
    return m * n * s / (n + m * a), 2.0 * n * s / (n + 2.0 * a)


def lipschitz_probe(u: SpectralField, v: SpectralField, spec: NonlinearitySpec) -> float:
    """||N(u) - N(v)||_2 / (||u-v||_{L^{rs}} (||u||_{L^{rs}}^(s-1) + ||v||_{L^{rs}}^(s-1))).

    s = p+q and r = 2n / (n + 2 alpha).
    """
    n = u.grid.n
    s = spec.power
    r = 2.0 * n / (n + 2.0 * spec.alpha)
    op = NonlinearOperator(u.grid, spec)
    num = l2_from_freq(op(u.freq) - op(v.freq), u.grid)
    exponent = r * s
    diff = lp_norm(u - v, exponent)
    if diff == 0:
        raise ZeroDivisionError("lipschitz_probe needs u != v")
    den = diff * (lp_norm(u, exponent) ** (s - 1) + lp_norm(v, exponent) ** (s - 1))
    return num / den


class DuhamelStepper:
    """Second-order exponential midpoint stepper on one grid."""

    def __init__(self, grid: Grid, sigma: float, spec: NonlinearitySpec | None):
        self.grid = grid
        self.sigma = sigma
        self.a = np.ascontiguousarray((grid.kmag ** sigma).ravel())
        self.op = None if spec is None else NonlinearOperator(grid, spec)
        self._symbols = {}

    def symbols(self, dt):
        key = float(dt)
        if key not in self._symbols:
            if len(self._symbols) > 16:
                self._symbols.clear()
            self._symbols[key] = kernels.damped_symbols(self.a, key)
        return self._symbols[key]

    def forcing(self, uh):
        if self.op is None:
            return None
        return np.ascontiguousarray(self.op(uh.reshape(self.grid.shape))).ravel()

    def step(self, uh, vh, dt):
        """One step on flat frequency arrays; returns the new (uh, vh)."""
        n0 = self.forcing(uh)
        half = self.symbols(0.5 * dt)
        u_half, _ = kernels.duhamel_update(uh, vh, n0, *half)
        n_mid = self.forcing(u_half)
        return kernels.duhamel_update(uh, vh, n_mid, *self.symbols(dt))


def step(state: StateVector, dt: float, spec: NonlinearitySpec | None, sigma: float) -> StateVector:
    """Advance ``state`` by ``dt``.  ``spec=None`` gives pure linear propagation."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    grid = state.grid
    stepper = DuhamelStepper(grid, sigma, spec)
    uh = np.ascontiguousarray(state.u.freq).ravel()
    vh = np.ascontiguousarray(state.ut.freq).ravel()
    u_new, v_new = stepper.step(uh, vh, dt)
    return StateVector(
        SpectralField(grid, freq=u_new.reshape(grid.shape)),
        SpectralField(grid, freq=v_new.reshape(grid.shape)),
        state.time + dt,
    )


def integrate(state: StateVector, spec, sigma, horizon, dt) -> StateVector:
    """Fixed-step integration to ``state.time + horizon``."""
    steps = max(1, int(round(horizon / dt)))
    h = horizon / steps
    grid = state.grid
    stepper = DuhamelStepper(grid, sigma, spec)
    uh = np.ascontiguousarray(state.u.freq).ravel()
    vh = np.ascontiguousarray(state.ut.freq).ravel()
    for _ in range(steps):
        uh, vh = stepper.step(uh, vh, h)
    return StateVector(
        SpectralField(grid, freq=uh.reshape(grid.shape)),
        SpectralField(grid, freq=vh.reshape(grid.shape)),
        state.time + horizon,
    )


# --- simulation -----------------------------------------------------------------


def random_bandlimited(grid: Grid, seed: int, kcut: int = 4, mean_zero: bool = True) -> np.ndarray:
    """Real random trigonometric polynomial with integer wavenumbers |k| <= kcut.

    The coefficients depend only on ``seed`` and ``kcut``, so the same function
    is sampled on any grid with N > 2 kcut.
    """
    rng = np.random.default_rng(seed)
    ks = np.arange(-kcut, kcut + 1)
    shape = (ks.size,) * grid.n
    coeff = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    kk = np.meshgrid(*([ks] * grid.n), indexing="ij")
    kmag = np.sqrt(sum(k * k for k in kk))
    coeff[kmag > kcut] = 0.0
    if mean_zero:
        coeff[(kcut,) * grid.n] = 0.0
    # Hermitian symmetrise so the sampled function is real
    coeff = 0.5 * (coeff + np.conj(coeff[(slice(None, None, -1),) * grid.n]))
    freq = np.zeros(grid.shape, dtype=np.complex128)
    idx = np.ix_(*([ks % grid.N] * grid.n))
    freq[idx] = coeff * grid.N ** grid.n
    values = np.fft.ifftn(freq).real
    return values / np.sqrt(np.mean(values ** 2))


def smoothed_bump(*x):
    r2 = sum(c * c for c in x) / 4.0
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def initial_velocity(grid: Grid, profile: str, epsilon: float, seed: int = 0) -> np.ndarray:
    if profile in PROFILES:
        base = PROFILES[profile].physical(*grid.coords)
    elif profile == "bump":
        base = smoothed_bump(*grid.coords)
    elif profile == "random":
        base = random_bandlimited(grid, seed)
    else:
        raise ValueError(f"unknown data profile {profile!r}")
    return epsilon * np.asarray(base, dtype=float)


@dataclass
class SimulationConfig:
    params: Params
    grid: Grid
    kind: str = "modified"
    profile: str = "gaussian"
    epsilon: float = 1e-3
    horizon: float = 50.0
    dt: float = 0.05
    adaptive: bool = True
    tolerance: float = 1e-6
    zero_mode: str = "project"
    seed: int = 0
    split_time: float | None = None
    checkpoint_times: tuple = ()

    def spec(self) -> NonlinearitySpec:
        return NonlinearitySpec.from_params(self.params, kind=self.kind, zero_mode=self.zero_mode)


@dataclass
class WeightedNormTrace:
    """Time series of the solution norms and their X(T) weights."""

    gap: float
    times: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    weighted_l2: list = field(default_factory=list)
    weighted_energy: list = field(default_factory=list)
    x_norm: list = field(default_factory=list)

    def record(self, t, l2, energy):
        w1 = (1.0 + t) ** (self.gap - 1.0)
        w2 = (1.0 + t) ** self.gap
        self.times.append(float(t))
        self.l2.append(float(l2))
        self.energy.append(float(energy))
        self.weighted_l2.append(w1 * l2)
        self.weighted_energy.append(w2 * energy)
        value = w1 * l2 + w2 * energy
        self.x_norm.append(max(value, self.x_norm[-1]) if self.x_norm else value)

    def pointwise(self) -> np.ndarray:
        return np.asarray(self.weighted_l2) + np.asarray(self.weighted_energy)

    def sup_over(self, t0, t1) -> float:
        t = np.asarray(self.times)
        sel = (t >= t0) & (t <= t1)
        return float(self.pointwise()[sel].max()) if np.any(sel) else math.nan

    def rows(self):
        return zip(self.times, self.l2, self.energy, self.weighted_l2, self.weighted_energy)


@dataclass
class SimulationResult:
    config: SimulationConfig
    trace: WeightedNormTrace
    verdict: str
    final: StateVector
    checkpoints: list
    warnings: list
    boundedness_ratio: float
    steps: int
    rejected_steps: int

    @property
    def x_sup(self) -> float:
        return self.trace.x_norm[-1]

    @property
    def decay_ratio_l2(self) -> float:
        return max(self.trace.weighted_l2)

    @property
    def decay_ratio_energy(self) -> float:
        return max(self.trace.weighted_energy)


def _norms(uh, vh, grid, kmag_sigma2):
    l2 = l2_from_freq(uh, grid)
    en = math.hypot(l2_from_freq(uh, grid, kmag_sigma2), l2_from_freq(vh, grid))
    return l2, en


def simulate(config: SimulationConfig) -> SimulationResult:
    """Run u0 = 0, u1 = epsilon * profile to the horizon or a growth verdict.

    Verdicts: ``"bounded"`` when the pointwise X(T) weighted norm over
    [split, T] stays within twice its supremum over [0, split]; ``"growth"``
    when ||u||_2 exceeds 1e6 times the data norm or turns non-finite;
    ``"inconclusive"`` otherwise.  Growth is never reported as blow-up.
    """
    grid, params = config.grid, config.params
    sigma = params.sigma
    if grid.n != params.n:
        raise ValueError(f"grid dimension {grid.n} does not match n = {params.n}")
    spec = config.spec()
    stepper = DuhamelStepper(grid, sigma, spec)
    ksig2 = grid.kmag ** (2.0 * sigma)
    shape = grid.shape

    u1 = initial_velocity(grid, config.profile, config.epsilon, config.seed)
    uh = np.zeros(grid.N ** grid.n, dtype=np.complex128)
    vh = np.ascontiguousarray(np.fft.fftn(u1.astype(np.complex128))).ravel()
    data_norm = l2_from_freq(vh, grid)

    trace = WeightedNormTrace(gap=params.decay_gap)
    t = 0.0
    trace.record(t, *_norms(uh, vh, grid, ksig2.ravel()))
    warnings = []
    checkpoints = []
    pending = sorted(c for c in config.checkpoint_times if 0 < c <= config.horizon)
    dt_max = config.dt
    dt = dt_max
    verdict = None
    steps = rejected = 0
    max_boundary = max_alias = 0.0
    alias_mask = ~dealias_mask(grid) if spec.dealias else None

    def state_of(uh_, vh_, t_):
        return StateVector(
            SpectralField(grid, freq=uh_.reshape(shape).copy()),
            SpectralField(grid, freq=vh_.reshape(shape).copy()),
            t_,
        )

    def resolution_diagnostics(uh_):
        nonlocal max_boundary, max_alias
        f = SpectralField(grid, freq=uh_.reshape(shape))
        max_boundary = max(max_boundary, boundary_density(f))
        if alias_mask is not None:
            total = np.sum(np.abs(uh_) ** 2)
            if total > 0:
                max_alias = max(max_alias, float(np.sum(np.abs(uh_.reshape(shape)[alias_mask]) ** 2) / total))

    while t < config.horizon * (1 - 1e-14):
        h = min(dt, config.horizon - t)
        if pending and pending[0] < t + h:
            h = pending[0] - t
        with np.errstate(over="ignore", invalid="ignore"):
            if config.adaptive:
                u_a, v_a = stepper.step(uh, vh, h)
                u_b, v_b = stepper.step(uh, vh, 0.5 * h)
                u_b, v_b = stepper.step(u_b, v_b, 0.5 * h)
                scale = math.hypot(l2_from_freq(u_b, grid), l2_from_freq(v_b, grid))
                err = math.hypot(l2_from_freq(u_a - u_b, grid), l2_from_freq(v_a - v_b, grid))
                finite = math.isfinite(scale) and math.isfinite(err)
                if finite and scale > 0 and err > config.tolerance * scale:
                    rejected += 1
                    dt = 0.5 * h
                    if dt < MIN_DT:
                        verdict = "numeric-failure"
                        warnings.append(f"step size fell below {MIN_DT:g} at t={t:.17g}")
                        break
                    continue
                u_new, v_new = u_b, v_b
                if finite and err < config.tolerance * scale / 16:
                    dt = min(2.0 * dt, dt_max)
            else:
                u_new, v_new = stepper.step(uh, vh, h)
        t += h
        steps += 1
        uh, vh = u_new, v_new
        l2, en = _norms(uh, vh, grid, ksig2.ravel())
        if not (math.isfinite(l2) and math.isfinite(en)) or (data_norm > 0 and l2 > GROWTH_FACTOR * data_norm):
            verdict = "growth"
            if math.isfinite(l2) and math.isfinite(en):
                trace.record(t, l2, en)
            break
        trace.record(t, l2, en)
        if pending and abs(t - pending[0]) <= 1e-12 * max(1.0, t):
            checkpoints.append(state_of(uh, vh, pending.pop(0)))
            resolution_diagnostics(uh)

    final = state_of(uh, vh, t)
    if verdict is None or verdict == "growth":
        resolution_diagnostics(uh)

    split = config.split_time if config.split_time is not None else config.horizon / 5.0
    early = trace.sup_over(0.0, split)
    late = trace.sup_over(split, config.horizon)
    if math.isnan(late) or math.isnan(early):
        ratio = math.nan  # run stopped before the late window
    else:
        ratio = late / early if early > 0 else (0.0 if late == 0 else math.inf)
    if verdict is None:
        verdict = "bounded" if ratio <= 2.0 else "inconclusive"

    if max_boundary > BOUNDARY_WARN:
        warnings.append(f"boundary density {max_boundary:.3e} exceeds {BOUNDARY_WARN:g} of the maximum")
    if max_alias > DEALIAS_WARN:
        warnings.append(f"spectral energy fraction {max_alias:.3e} above the dealiasing cutoff exceeds {DEALIAS_WARN:g}")
    imag = final.u.imag_residue()
    if imag > 1e-9:
        warnings.append(f"imaginary residue {imag:.3e} exceeds 1e-9")

    return SimulationResult(
        config=config,
        trace=trace,
        verdict=verdict,
        final=final,
        checkpoints=checkpoints,
        warnings=warnings,
        boundedness_ratio=ratio,
        steps=steps,
        rejected_steps=rejected,
    )


def scan_epsilon(config: SimulationConfig, epsilons):
    """Largest tested epsilon with a bounded verdict (None if none) and all verdicts.

    An empirical stand-in for the smallness threshold of the data.
    """
    verdicts = {}
    best = None
    for eps in sorted(epsilons):
        cfg = SimulationConfig(**{**config.__dict__, "epsilon": eps})
        verdicts[eps] = simulate(cfg).verdict
        if verdicts[eps] == "bounded":
            best = eps
    return best, verdicts


__all__ = [
    "NonlinearitySpec",
    "NonlinearOperator",
    "StateVector",
    "SimulationConfig",
    "SimulationResult",
    "WeightedNormTrace",
    "DuhamelStepper",
    "energy_norm",
    "eval_hartree",
    "eval_modified",
    "evaluate_nonlinearity",
    "initial_velocity",
    "integrate",
    "lebesgue_indices",
    "lipschitz_probe",
    "random_bandlimited",
    "scan_epsilon",
    "simulate",
    "step",
]
