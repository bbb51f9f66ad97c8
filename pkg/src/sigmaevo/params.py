"""Model parameters, critical exponents and the admissible range for p+q.

All functions here are pure.  Formula evaluators accept real ``n`` so that
threshold curves can be traced continuously; grid simulations require an
integer dimension and go through :func:`validate_params`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

# Relative band used when comparing n against the dimension cap.
DIMENSION_TOL = 1e-12

CONTEXTS = ("theorem", "linear", "formula", "exploratory")


class ParameterError(ValueError):
    """Raised with the complete list of violated constraints."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SubcriticalDimensionError(ValueError):
    """The exponent formula is only defined for n/m > sigma."""


@dataclass(frozen=True)
class Params:
    """The tuple (n, sigma, alpha, p, q, m) plus the context it was validated for."""

    n: float
    sigma: float
    alpha: float
    p: float
    q: float
    m: float
    context: str = "theorem"

    @property
    def power(self) -> float:
        return self.p + self.q

    @property
    def decay_gap(self) -> float:
        """(n/sigma)(1/m - 1/2), the L^m-L^2 decay gain."""
        return self.n / self.sigma * (1.0 / self.m - 0.5)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("n", "sigma", "alpha", "p", "q", "m", "context")}


def validate_params(n, sigma, alpha, p, q, m, context="theorem") -> Params:
    """Check every invariant and return :class:`Params`.

    ``context`` selects the admissible range for ``m``:

    * ``"theorem"``: m in (1, 2); L^1 data is excluded because the Riesz
      potential of an integrable function need not be integrable.
    * ``"linear"``: m in [1, 2).
    * ``"formula"``: as ``linear`` but real ``n`` is accepted.
    * ``"exploratory"``: as ``theorem`` but p, q only need to be positive,
      for probes below every threshold.

    Raises
    ------
    ParameterError
        Listing every violated constraint with the offending value.
    """
    errors = []
    if context not in CONTEXTS:
        raise ParameterError([f"context must be one of {CONTEXTS}, got {context!r}"])

    def number(name, value):
        try:
            v = float(value)
        except (TypeError, ValueError):
            errors.append(f"{name} must be a real number, got {value!r}")
            return None
        if not math.isfinite(v):
            errors.append(f"{name} must be finite, got {value!r}")
            return None
        return v

    n_v, sigma_v, alpha_v = number("n", n), number("sigma", sigma), number("alpha", alpha)
    p_v, q_v, m_v = number("p", p), number("q", q), number("m", m)

    if n_v is not None:
        if n_v <= 0:
            errors.append(f"n must be positive, got {n_v:g}")
        elif context != "formula" and n_v != int(n_v):
            errors.append(f"n must be an integer outside formula context, got {n_v:g}")
    if sigma_v is not None and sigma_v < 1:
        errors.append(f"sigma must be >= 1, got {sigma_v:g}")
    if alpha_v is not None and n_v is not None and not 0 < alpha_v < n_v:
        errors.append(f"alpha must lie in (0, n) = (0, {n_v:g}), got {alpha_v:g}")
    lower_pq = 0.0 if context == "exploratory" else 1.0
    for name, v in (("p", p_v), ("q", q_v)):
        if v is None:
            continue
        if context == "exploratory" and v <= 0:
            errors.append(f"{name} must be positive, got {v:g}")
        elif context != "exploratory" and v < lower_pq:
            errors.append(f"{name} must be >= 1, got {v:g}")
    if m_v is not None:
        if context in ("theorem", "exploratory"):
            if m_v == 1:
                errors.append(
                    "m = 1 excluded: L^1 data is not admissible for the modified "
                    "nonlinearity since the Riesz potential does not preserve L^1; need m in (1, 2)"
                )
            elif not 1 < m_v < 2:
                errors.append(f"m must lie in (1, 2), got {m_v:g}")
        elif not 1 <= m_v < 2:
            errors.append(f"m must lie in [1, 2), got {m_v:g}")

    if errors:
        raise ParameterError(errors)
    return Params(
        n=int(n_v) if context != "formula" else n_v,
        sigma=sigma_v, alpha=alpha_v, p=p_v, q=q_v, m=m_v, context=context,
    )


def _effective_dimension_gap(n, m, sigma):
    gap = n / m - sigma
    if gap <= 0:
        raise SubcriticalDimensionError(
            f"subcritical dimension: n/m - sigma = {gap:g} <= 0 for n={n:g}, m={m:g}, sigma={sigma:g}"
        )
    return gap


def p_crit(n, m, sigma):
    """Critical power exponent 1 + 2 sigma / (n/m - sigma)."""
    return 1.0 + 2.0 * sigma / _effective_dimension_gap(n, m, sigma)


def hartree_threshold(n, m, sigma, alpha):
    """Semi-critical threshold 1 + (2 sigma + alpha) / (n/m - sigma) for p+q."""
    if not 0 <= alpha < n:
        raise ValueError(f"alpha must lie in (0, n), got {alpha:g}")
    return 1.0 + (2.0 * sigma + alpha) / _effective_dimension_gap(n, m, sigma)


def semicritical_condition(n, m, sigma, alpha, nonlinearity="modified"):
    """Return ``(threshold, strict)`` for the global-existence condition on p+q.

    For the modified nonlinearity the inequality is strict (m in (1, 2)).
    For the classical Hartree nonlinearity it is non-strict when m > 1 and
    strict when m = 1.
    """
    value = hartree_threshold(n, m, sigma, alpha)
    if nonlinearity == "modified":
        return value, True
    if nonlinearity == "hartree":
        return value, m == 1
    raise ValueError(f"unknown nonlinearity {nonlinearity!r}")


def dimension_cap(sigma, m, alpha):
    """Largest n for which the integrability band for p+q is non-empty (when 2 sigma < n)."""
    return (2.0 * sigma + 2.0 * math.sqrt(sigma * (sigma + m * (2.0 - m) * alpha))) / (2.0 - m)


def integrability_band(n, sigma, alpha, m):
    """Lower and upper ends of the band required by the Gagliardo-Nirenberg and HLS steps.

    Both ends are non-strict; the upper end is ``inf`` when n <= 2 sigma.
    """
    lower = 2.0 / m + 2.0 * alpha / n
    upper = (n + 2.0 * alpha) / (n - 2.0 * sigma) if 2.0 * sigma < n else math.inf
    return lower, upper


@dataclass(frozen=True)
class RegionReport:
    lower: float
    lower_strict: bool
    upper: float
    upper_strict: bool
    dimension_ok: bool
    dimension_cap: float
    semicritical: float
    band_lower: float
    binding_constraints: list = field(default_factory=list)

    @property
    def empty(self) -> bool:
        if not self.dimension_ok:
            return True
        if self.lower < self.upper:
            return False
        return self.lower > self.upper or self.lower_strict or self.upper_strict

    def contains(self, power: float) -> bool:
        if self.empty:
            return False
        above = power > self.lower if self.lower_strict else power >= self.lower
        below = power < self.upper if self.upper_strict else power <= self.upper
        return above and below

    def interval(self) -> str:
        if self.empty:
            return "empty"
        left = "(" if self.lower_strict else "["
        right = ")" if self.upper_strict else "]"
        hi = "inf" if math.isinf(self.upper) else format(self.upper, ".17g")
        return f"{left}{format(self.lower, '.17g')}, {hi}{right}"

    def __str__(self) -> str:
        return f"p+q ∈ {self.interval()}"


def admissible_range(params: Params) -> RegionReport:
    """Intersect the integrability band with the strict semi-critical bound."""
    n, sigma, alpha, m = params.n, params.sigma, params.alpha, params.m
    band_lower, band_upper = integrability_band(n, sigma, alpha, m)
    cap = dimension_cap(sigma, m, alpha)
    binding = []

    if 2.0 * sigma < n:
        dimension_ok = n <= cap * (1.0 + DIMENSION_TOL)
        binding.append("sobolev-upper")
    else:
        dimension_ok = True
    if not dimension_ok:
        binding.append("dimension")

    try:
        semi = hartree_threshold(n, m, sigma, alpha)
    except SubcriticalDimensionError:
        # n/m <= sigma: decay is too weak for the argument, nothing is admissible
        semi = math.inf
    if semi >= band_lower:
        lower, lower_strict = semi, True
        binding.insert(0, "semi-critical")
    else:
        lower, lower_strict = band_lower, False
        binding.insert(0, "integrability-lower")

    return RegionReport(
        lower=lower,
        lower_strict=lower_strict,
        upper=band_upper,
        upper_strict=math.isinf(band_upper),
        dimension_ok=dimension_ok,
        dimension_cap=cap,
        semicritical=semi,
        band_lower=band_lower,
        binding_constraints=binding,
    )
