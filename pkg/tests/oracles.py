"""Independent reference computations used by several test modules.

None of these reuse the closed-form propagator or the exponential stepper:
they integrate the defining ODEs directly with a high-order adaptive solver.
"""
import numpy as np
from scipy.integrate import solve_ivp


def mode_ode(a, t, y0, rtol=1e-13, atol=1e-22):
    """(v(t), v'(t)) for v'' + a v' + a^2 v = 0 with (v, v')(0) = y0."""
    if t == 0:
        return np.array(y0, dtype=float)

    def rhs(_, y):
        return [y[1], -a * y[1] - a * a * y[0]]

    sol = solve_ivp(rhs, (0.0, t), y0, method="DOP853", rtol=rtol, atol=atol)
    return sol.y[:, -1]


def mode_symbols(r, t, sigma, atol=1e-22):
    """(K0, K1, dK0, dK1) at one (r, t) from the ODE."""
    a = r ** sigma
    K0, dK0 = mode_ode(a, t, [1.0, 0.0], atol=atol)
    K1, dK1 = mode_ode(a, t, [0.0, 1.0], atol=atol)
    return K0, K1, dK0, dK1


def method_of_lines(grid, sigma, apply_nonlinearity, u1, T, rtol=1e-12):
    """Brute-force solve of u_tt + A u + A^(1/2) u_t = N(u) on a small grid.

    A = (-Delta)^sigma is applied as a dense Fourier multiplier and the whole
    first-order system is handed to DOP853; ``apply_nonlinearity`` maps the
    physical samples of u to those of N(u).
    """
    a = (grid.kmag ** sigma).ravel()
    shape = grid.shape
    size = a.size

    def op(values, symbol):
        return np.fft.ifftn(np.fft.fftn(values.reshape(shape)) * symbol.reshape(shape)).real.ravel()

    def rhs(_, y):
        u, v = y[:size], y[size:]
        acc = -op(u, a * a) - op(v, a) + apply_nonlinearity(u.reshape(shape)).ravel()
        return np.concatenate([v, acc])

    y0 = np.concatenate([np.zeros(size), np.asarray(u1, dtype=float).ravel()])
    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=rtol, atol=1e-14)
    return sol.y[:size, -1].reshape(shape), sol.y[size:, -1].reshape(shape)
