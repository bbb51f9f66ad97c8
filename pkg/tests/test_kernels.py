import numpy as np
import pytest

from sigmaevo import kernels
from sigmaevo import _kernels_py

backends = kernels.available_backends()


def test_python_backend_always_available():
    assert "python" in backends
    assert kernels.BACKEND in backends


@pytest.mark.skipif("cython" not in backends, reason="compiled extension not built")
class TestBackendEquivalence:
    rng = np.random.default_rng(11)
    a = np.concatenate([[0.0, 1e-12, 1e-6, 0.05], rng.uniform(0, 50, 500)])
    u = rng.standard_normal(400) + 1j * rng.standard_normal(400)

    @pytest.mark.parametrize("t", [0.0, 1e-3, 0.05, 1.0, 37.0])
    def test_damped_symbols(self, t):
        cy = backends["cython"].damped_symbols(self.a, t)
        py = _kernels_py.damped_symbols(self.a, t)
        # libm and numpy may differ by a few ulp in sin(w t); judge relative to the
        # decay envelope so zero crossings of the oscillation do not dominate
        x = self.a * t
        scales = [1.0, max(t, 1.0), 1.0 + self.a ** 2 * max(t, 1.0), 1.0 + x, max(t, 1.0) ** 2]
        for c, p, scale in zip(cy, py, scales):
            envelope = np.exp(-0.5 * x) * scale * (1.0 + x)
            assert np.all(np.abs(c - p) <= 1e-13 * envelope + 1e-300)

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 1.95, 3.9])
    def test_abs_pow(self, s):
        cy = backends["cython"]
        np.testing.assert_allclose(cy.abs_pow(self.u, s), _kernels_py.abs_pow(self.u, s), rtol=1e-13)
        r = np.ascontiguousarray(self.u.real)
        np.testing.assert_allclose(cy.abs_pow(r, s), _kernels_py.abs_pow(r, s), rtol=1e-13)
        assert cy.abs_pow_sum(self.u, s) == pytest.approx(_kernels_py.abs_pow_sum(self.u, s), rel=1e-13)

    def test_abs_pow_zero(self):
        cy = backends["cython"]
        z = np.zeros(3, dtype=complex)
        assert np.array_equal(cy.abs_pow(z, 2.0), _kernels_py.abs_pow(z, 2.0))
        assert np.array_equal(cy.abs_pow(z, 0.0), _kernels_py.abs_pow(z, 0.0))

    def test_duhamel_update(self):
        cy = backends["cython"]
        a = self.a[:400]
        syms = _kernels_py.damped_symbols(a, 0.3)
        v = self.u[::-1].copy()
        f = (self.u * 1j).copy()
        for nh in (None, f):
            got = cy.duhamel_update(self.u, v, nh, *syms)
            want = _kernels_py.duhamel_update(self.u, v, nh, *syms)
            for g, w in zip(got, want):
                np.testing.assert_allclose(g, w, rtol=1e-14, atol=1e-15)

    def test_length_mismatch(self):
        cy = backends["cython"]
        syms = _kernels_py.damped_symbols(self.a[:10], 0.3)
        with pytest.raises(ValueError):
            cy.duhamel_update(self.u[:11], self.u[:11], None, *syms)


def test_phi1_is_integral_of_k1():
    from scipy import integrate

    for a in (0.0, 1e-3, 0.5, 3.0, 40.0):
        for t in (0.01, 0.7, 2.0):
            _, _, _, _, Phi1 = kernels.damped_symbols(np.array([a]), t)
            ref, _ = integrate.quad(lambda s: kernels.damped_symbols(np.array([a]), s)[1][0], 0, t, epsabs=0, epsrel=1e-13)
            assert Phi1[0] == pytest.approx(ref, rel=1e-11)


def test_phi1_series_matches_closed_form_at_cutoff():
    # just above and below the switch the two branches must agree
    t = 1.0
    a = np.array([0.1 * (1 - 1e-9), 0.1 * (1 + 1e-9)])
    Phi1 = kernels.damped_symbols(a, t)[4]
    assert Phi1[0] == pytest.approx(Phi1[1], rel=1e-8)
