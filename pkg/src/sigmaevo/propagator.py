"""Exact Fourier-multiplier solution of the linear damped sigma-evolution equation.

Each Fourier mode of  u_tt + (-Delta)^sigma u + (-Delta)^(sigma/2) u_t = 0
obeys  v'' + a v' + a^2 v = 0  with  a = |xi|^sigma.  The characteristic
roots a(-1 +- i sqrt(3))/2 are complex for every a > 0, so a single closed
form covers all frequencies:

    K1(t) = e^(-a t/2) sin(w t) / w,             w = sqrt(3) a / 2
    K0(t) = e^(-a t/2) (cos(w t) + (a/2) sin(w t) / w)
    dK1   = e^(-a t/2) (cos(w t) - (a/2) sin(w t) / w)
    dK0   = -a^2 K1

with u_hat(t) = K0 u0_hat + K1 u1_hat and u_t_hat(t) = dK0 u0_hat + dK1 u1_hat.
At a = 0 this reduces to u_hat = u0_hat + t u1_hat.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import kernels
from .spectral import Grid, SpectralField, l2_from_freq


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class PropagatorSymbols:
    """Closed-form multipliers K0, K1, dK0, dK1 as functions of (t, r)."""

    sigma: float

    def evaluate(self, t, r):
        """Return (K0, K1, dK0, dK1) at time ``t`` for radii ``r`` (array-like)."""
        if t < 0:
            raise ValueError("time must be non-negative")
        r = np.atleast_1d(np.asarray(r, dtype=float))
        a = np.ascontiguousarray(r.ravel() ** self.sigma)
        K0, K1, dK0, dK1, _ = kernels.damped_symbols(a, float(t))
        return tuple(k.reshape(r.shape) for k in (K0, K1, dK0, dK1))

    def K0(self, t, r):
        return self.evaluate(t, r)[0]

    def K1(self, t, r):
        return self.evaluate(t, r)[1]

    def dK0(self, t, r):
        return self.evaluate(t, r)[2]

    def dK1(self, t, r):
        return self.evaluate(t, r)[3]


def propagator_symbols(sigma: float) -> PropagatorSymbols:
    if sigma < 1:
        raise ValueError(f"sigma must be >= 1, got {sigma}")
    return PropagatorSymbols(float(sigma))


@dataclass
class StateVector:
    """The pair (u, u_t) at one time instant, both on the same grid."""

    u: SpectralField
    ut: SpectralField
    time: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.ut.grid:
            raise ValueError("u and u_t must share one grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def from_data(cls, grid: Grid, u0=None, u1=None, time=0.0) -> "StateVector":
        zero = np.zeros(grid.shape, dtype=np.complex128)
        u = SpectralField(grid, values=zero if u0 is None else u0)
        ut = SpectralField(grid, values=zero if u1 is None else u1)
        return cls(u, ut, time)


def evolve_linear(state: StateVector, t: float, sigma: float) -> StateVector:
    """Propagate ``state`` by ``t`` exactly in time with the linear flow."""
    if t < 0:
        raise ValueError("duration must be non-negative")
    grid = state.grid
    a = np.ascontiguousarray((grid.kmag ** sigma).ravel())
    K0, K1, dK0, dK1, Phi1 = kernels.damped_symbols(a, float(t))
    uh = np.ascontiguousarray(state.u.freq).ravel()
    vh = np.ascontiguousarray(state.ut.freq).ravel()
    u_new, v_new = kernels.duhamel_update(uh, vh, None, K0, K1, dK0, dK1, Phi1)
    return StateVector(
        SpectralField(grid, freq=u_new.reshape(grid.shape)),
        SpectralField(grid, freq=v_new.reshape(grid.shape)),
        state.time + t,
    )


def energy_norm(state: StateVector, sigma: float) -> float:
    """||((-Delta)^(sigma/2) u, u_t)||_{L^2}."""
    grid = state.grid
    du = l2_from_freq(state.u.freq, grid, grid.kmag ** (2.0 * sigma))
    dv = l2_from_freq(state.ut.freq, grid)
    return math.hypot(du, dv)


# --- radial profiles with closed-form Fourier transforms -----------------------


@dataclass(frozen=True)
class RadialProfile:
    """u1(x) = f(|x|) on R^n with radial Fourier transform ``fourier(r, n)``."""

    name: str
    fourier: callable
    physical: callable
    lm_norm: callable  # (m, n) -> ||u1||_{L^m}
    r_max: float


def _gauss_fourier(r, n):
    return math.pi ** (n / 2) * np.exp(-0.25 * r * r)


def _gauss_lm(m, n):
    return (math.pi / m) ** (n / (2.0 * m))


def _lapgauss_fourier(r, n):
    return -(r * r) * math.pi ** (n / 2) * np.exp(-0.25 * r * r)


def _lapgauss_physical(*x):
    s = sum(c * c for c in x)
    return (4.0 * s - 2.0 * len(x)) * np.exp(-s)


PROFILES = {
    "gaussian": RadialProfile(
        "gaussian", _gauss_fourier, lambda *x: np.exp(-sum(c * c for c in x)), _gauss_lm, 12.0
    ),
    "laplacian_gaussian": RadialProfile(
        "laplacian_gaussian", _lapgauss_fourier, _lapgauss_physical, None, 14.0
    ),
}


# --- decay curves ---------------------------------------------------------------


@dataclass
class DecayRecord:
    times: np.ndarray
    l2: np.ndarray
    energy: np.ndarray
    predicted_l2_exp: float
    predicted_energy_exp: float
    metadata: dict = field(default_factory=dict)
    fit_residuals: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.l2 = np.asarray(self.l2, dtype=float)
        self.energy = np.asarray(self.energy, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def series(self, quantity: str) -> np.ndarray:
        if quantity in ("l2", "l2_norm"):
            return self.l2
        if quantity in ("energy", "energy_norm"):
            return self.energy
        raise KeyError(quantity)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", "l2_norm", "energy_norm", "predicted_l2_exp", "predicted_energy_exp"])
            for t, a, b in zip(self.times, self.l2, self.energy):
                w.writerow([_fmt(t), _fmt(a), _fmt(b), _fmt(self.predicted_l2_exp), _fmt(self.predicted_energy_exp)])

    @classmethod
    def from_csv(cls, path, metadata=None):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: no rows")
        return cls(
            times=[float(r["time"]) for r in rows],
            l2=[float(r["l2_norm"]) for r in rows],
            energy=[float(r["energy_norm"]) for r in rows],
            predicted_l2_exp=float(rows[0]["predicted_l2_exp"]),
            predicted_energy_exp=float(rows[0]["predicted_energy_exp"]),
            metadata=dict(metadata or {}),
        )


def _fmt(x) -> str:
    return format(float(x), ".17g")


def predicted_exponents(n, sigma, m):
    """(L^2 exponent, energy exponent) of the (L^m cap L^2)-L^2 estimates."""
    gap = n / sigma * (1.0 / m - 0.5)
    return 1.0 - gap, -gap


def _sphere_area(n):
    return 2.0 * math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n))


def _radial_quadrature(integrand, t, sigma, r_max, order):
    """Composite Gauss-Legendre over geometric panels adapted to the scale (1+t)^(-1/sigma)."""
    r_scale = (1.0 + t) ** (-1.0 / sigma)
    lo = min(r_scale, r_max) * 1e-8
    edges = [0.0]
    r = lo
    while r < r_max:
        edges.append(r)
        r *= 2.0
    edges.append(r_max)
    edges = np.asarray(edges)
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w[None, :]
    return float(np.sum(weights * integrand(nodes)))


def linear_decay_curve(profile, n, sigma, times, m=1.0, rtol=1e-10, max_order=1024) -> DecayRecord:
    """Grid-free decay curve of the linear solution with u0 = 0, u1 = ``profile``.

    ||u(t)||^2 = (2 pi)^(-n) |S^(n-1)| int_0^R |K1(t,r) u1_hat(r)|^2 r^(n-1) dr
    and the energy analogue with |r^sigma K1|^2 + |dK1|^2, evaluated by
    composite Gauss rules whose order is doubled until the relative change
    drops below ``rtol``.
    """
    prof = PROFILES[profile] if isinstance(profile, str) else profile
    times = np.asarray(times, dtype=float)
    const = _sphere_area(n) / (2.0 * math.pi) ** n
    syms = propagator_symbols(sigma)

    def curves(t):
        def l2_integrand(r):
            _, K1, _, _ = syms.evaluate(t, r)
            return (K1 * prof.fourier(r, n)) ** 2 * r ** (n - 1)

        def energy_integrand(r):
            _, K1, _, dK1 = syms.evaluate(t, r)
            return ((r ** sigma * K1) ** 2 + dK1 ** 2) * prof.fourier(r, n) ** 2 * r ** (n - 1)

        out = []
        for integrand in (l2_integrand, energy_integrand):
            order = 16
            prev = _radial_quadrature(integrand, t, sigma, prof.r_max, order)
            while True:
                order *= 2
                if order > max_order:
                    raise QuadratureError(f"radial quadrature did not converge at t={t:g}")
                cur = _radial_quadrature(integrand, t, sigma, prof.r_max, order)
                if abs(cur - prev) <= rtol * abs(cur):
                    break
                prev = cur
            out.append(math.sqrt(const * cur))
        return out

    vals = np.array([curves(t) for t in times])
    l2_exp, en_exp = predicted_exponents(n, sigma, m)
    return DecayRecord(
        times=times,
        l2=vals[:, 0],
        energy=vals[:, 1],
        predicted_l2_exp=l2_exp,
        predicted_energy_exp=en_exp,
        metadata={"n": n, "sigma": sigma, "m": m, "profile": prof.name},
    )


def fit_decay_exponent(record: DecayRecord, window=(1e2, 1e4), quantity="l2") -> float:
    """Least-squares slope of log(norm) against log(1+t) over ``window``.

    The residual (RMS of the log fit) is stored in ``record.fit_residuals``.
    """
    t = record.times
    y = record.series(quantity)
    sel = (t >= window[0]) & (t <= window[1])
    if np.count_nonzero(sel) < 8:
        raise ValueError(f"degenerate window {window}: need at least 8 samples, got {np.count_nonzero(sel)}")
    if np.any(y[sel] <= 0):
        raise ValueError("norms must be positive to fit a power law")
    lx, ly = np.log1p(t[sel]), np.log(y[sel])
    if np.ptp(lx) == 0:
        raise ValueError("degenerate window: all sample times coincide")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    record.fit_residuals[quantity] = float(np.sqrt(np.mean(resid ** 2)))
    return float(slope)
