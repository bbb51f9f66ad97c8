"""Pure numpy implementations of the hot kernels.

Signatures match the compiled ``_kernels`` extension exactly; every array
argument is a flat, C-contiguous ``float64`` or ``complex128`` buffer.
"""
import numpy as np

# Below this value of a*t the closed form (1 - K0)/a**2 loses digits to
# cancellation, so the Taylor series is used instead.
PHI1_SERIES_CUTOFF = 0.1

# -d_k / k! for k = 2..10, where d_k = -d_{k-1} - d_{k-2}, d_0 = 1, d_1 = 0.
_PHI1_SERIES = np.array([1, -1, 0, 1, -1, 0, 1, -1, 0], dtype=float) / np.array(
    [2, 6, 24, 120, 720, 5040, 40320, 362880, 3628800], dtype=float
)


def abs_pow(u, s):
    return np.abs(u) ** s


def abs_pow_sum(u, s):
    return float(np.sum(np.abs(u) ** s))


def damped_symbols(a, t):
    """Return (K0, K1, dK0, dK1, Phi1) for damping rates ``a`` at time ``t``.

    ``a`` holds |xi|**sigma.  Each mode solves v'' + a v' + a**2 v = 0, whose
    characteristic roots a(-1 +- i sqrt(3))/2 are complex for every a > 0.
    ``Phi1`` is the time integral of K1 over [0, t].
    """
    a = np.asarray(a, dtype=float)
    x = a * t
    omega_t = 0.5 * np.sqrt(3.0) * x
    decay = np.exp(-0.5 * x)
    cos_w = np.cos(omega_t)
    sinc_w = np.sinc(omega_t / np.pi)  # sin(w t) / (w t), exact at 0
    K1 = t * decay * sinc_w
    K0 = decay * (cos_w + 0.5 * x * sinc_w)
    dK1 = decay * (cos_w - 0.5 * x * sinc_w)
    dK0 = -a * a * K1

    small = x < PHI1_SERIES_CUTOFF
    Phi1 = np.empty_like(x)
    xs = x[small]
    series = np.zeros_like(xs)
    for c in _PHI1_SERIES[::-1]:
        series = series * xs + c
    Phi1[small] = t * t * series
    big = ~small
    Phi1[big] = (1.0 - K0[big]) / (a[big] * a[big])
    return K0, K1, dK0, dK1, Phi1


def duhamel_update(uh, vh, nh, K0, K1, dK0, dK1, Phi1):
    """Advance (u, u_t) in frequency space with forcing ``nh`` frozen over the step."""
    u_new = K0 * uh + K1 * vh
    v_new = dK0 * uh + dK1 * vh
    if nh is not None:
        u_new += Phi1 * nh
        v_new += K1 * nh
    return u_new, v_new
