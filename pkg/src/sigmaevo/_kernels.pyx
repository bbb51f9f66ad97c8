# cython: language_level=3
"""Compiled hot kernels: pointwise powers, propagator symbols, Duhamel update.

Mirrors ``_kernels_py`` one-to-one; results agree to a few ulp.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, cos, sin, fabs

cnp.import_array()

cdef double PHI1_SERIES_CUTOFF = 0.1
cdef double SQRT3_HALF = 0.8660254037844386

# x**j coefficients of Phi1 / t**2 for j = 0..8 (period-3 pattern 1, -1, 0 over k!)
cdef double[9] PHI1_SERIES = [
    1.0 / 2.0, -1.0 / 6.0, 0.0,
    1.0 / 120.0, -1.0 / 720.0, 0.0,
    1.0 / 40320.0, -1.0 / 362880.0, 0.0,
]


cdef inline double _mod_pow(double re, double im, double s) noexcept nogil:
    # |z|^s = exp((s/2) log(re^2 + im^2)); glibc exp/log are much cheaper than pow
    cdef double r2 = re * re + im * im
    if r2 == 0.0:
        return 0.0 if s > 0.0 else 1.0
    return exp(0.5 * s * log(r2))


def abs_pow(u, double s):
    """|u|^s for a flat complex128 or float64 array."""
    cdef Py_ssize_t i, n
    cdef const double[::1] x
    if u.dtype == np.complex128:
        x = u.view(np.float64)
        n = u.shape[0]
        out = np.empty(n, dtype=np.float64)
        _abs_pow_complex(x, s, out)
        return out
    x = u
    n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _mod_pow(x[i], 0.0, s)
    return out


cdef void _abs_pow_complex(const double[::1] x, double s, double[::1] o) noexcept:
    cdef Py_ssize_t i, n = o.shape[0]
    with nogil:
        for i in range(n):
            o[i] = _mod_pow(x[2 * i], x[2 * i + 1], s)


def abs_pow_sum(u, double s):
    cdef Py_ssize_t i, n
    cdef double acc = 0.0
    cdef const double[::1] x
    if u.dtype == np.complex128:
        x = u.view(np.float64)
        n = u.shape[0]
        with nogil:
            for i in range(n):
                acc += _mod_pow(x[2 * i], x[2 * i + 1], s)
    else:
        x = u
        n = x.shape[0]
        with nogil:
            for i in range(n):
                acc += _mod_pow(x[i], 0.0, s)
    return acc


def damped_symbols(const double[::1] a, double t):
    cdef Py_ssize_t i, j, n = a.shape[0]
    K0_arr = np.empty(n, dtype=np.float64)
    K1_arr = np.empty(n, dtype=np.float64)
    dK0_arr = np.empty(n, dtype=np.float64)
    dK1_arr = np.empty(n, dtype=np.float64)
    Phi1_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] K0 = K0_arr, K1 = K1_arr, dK0 = dK0_arr, dK1 = dK1_arr, Phi1 = Phi1_arr
    cdef double ai, x, wt, decay, c, sc, k1, k0, ser
    with nogil:
        for i in range(n):
            ai = a[i]
            x = ai * t
            wt = SQRT3_HALF * x
            decay = exp(-0.5 * x)
            c = cos(wt)
            if wt == 0.0:
                sc = 1.0
            else:
                sc = sin(wt) / wt
            k1 = t * decay * sc
            k0 = decay * (c + 0.5 * x * sc)
            K1[i] = k1
            K0[i] = k0
            dK1[i] = decay * (c - 0.5 * x * sc)
            dK0[i] = -ai * ai * k1
            if x < PHI1_SERIES_CUTOFF:
                ser = 0.0
                for j in range(8, -1, -1):
                    ser = ser * x + PHI1_SERIES[j]
                Phi1[i] = t * t * ser
            else:
                Phi1[i] = (1.0 - k0) / (ai * ai)
    return K0_arr, K1_arr, dK0_arr, dK1_arr, Phi1_arr


def duhamel_update(uh, vh, nh, const double[::1] K0, const double[::1] K1,
                   const double[::1] dK0, const double[::1] dK1, const double[::1] Phi1):
    """Real-coefficient update on interleaved (re, im) storage."""
    cdef Py_ssize_t i, n = K0.shape[0]
    cdef const double[::1] u = uh.view(np.float64)
    cdef const double[::1] v = vh.view(np.float64)
    cdef const double[::1] f
    u_arr = np.empty(n, dtype=np.complex128)
    v_arr = np.empty(n, dtype=np.complex128)
    cdef double[::1] uo = u_arr.view(np.float64)
    cdef double[::1] vo = v_arr.view(np.float64)
    if u.shape[0] != 2 * n or v.shape[0] != 2 * n:
        raise ValueError("state and symbol lengths differ")
    if nh is None:
        with nogil:
            for i in range(2 * n):
                uo[i] = K0[i >> 1] * u[i] + K1[i >> 1] * v[i]
                vo[i] = dK0[i >> 1] * u[i] + dK1[i >> 1] * v[i]
    else:
        f = nh.view(np.float64)
        if f.shape[0] != 2 * n:
            raise ValueError("forcing and symbol lengths differ")
        with nogil:
            for i in range(2 * n):
                uo[i] = K0[i >> 1] * u[i] + K1[i >> 1] * v[i] + Phi1[i >> 1] * f[i]
                vo[i] = dK0[i >> 1] * u[i] + dK1[i >> 1] * v[i] + K1[i >> 1] * f[i]
    return u_arr, v_arr
