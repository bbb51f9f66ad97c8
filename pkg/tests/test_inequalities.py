import math

import numpy as np
import pytest

from sigmaevo.inequalities import (
    CSV_HEADER,
    EXTENT_WAVELET,
    balanced_grid,
    duhamel_integral,
    duhamel_integral_check,
    gn_check,
    gn_exponent,
    hls_check,
    hls_target_exponent,
    make_family,
    write_reports_csv,
)
from sigmaevo.spectral import Grid

LATTICE = [0.25 * k for k in range(1, 13)]


def rep_times(rep):
    return np.array([s[1] for s in rep.samples])


def test_exponent_helpers():
    assert hls_target_exponent(2, 0.25, 1) == pytest.approx(4.0)
    assert gn_exponent(4, 2, 1) == pytest.approx(0.5)
    with pytest.raises(ValueError, match="r = inf"):
        hls_target_exponent(4, 0.25, 1)
    with pytest.raises(ValueError):
        hls_target_exponent(1, 0.25, 1)


def test_family_members():
    fam = make_family(seed=3)
    names = [f.name for f in fam]
    assert names[:4] == ["gaussian", "wavelet", "oscillatory", "bump"]
    assert names[4:] == ["random[3]", "random[4]", "random[5]"]
    g = Grid(2, 64, 12.0)
    for f in fam:
        v = f.sample(g).real
        assert np.all(np.isfinite(v)) and np.max(np.abs(v)) > 0
    # the wavelet is a Laplacian, so its integral vanishes
    w = fam[1].sample(Grid(1, 512, 40.0)).real
    assert abs(w.sum()) < 1e-10 * np.abs(w).sum()


def test_gn_at_q_two_is_identically_one():
    g = balanced_grid(1, 256)
    rep = gn_check(2, 1.0, make_family(("gaussian", "wavelet", "random")), g)
    np.testing.assert_allclose(rep.ratios(), 1.0, rtol=1e-13)
    assert rep.verdict == "scale-invariant"


def test_gn_rejects_theta_outside_unit_interval():
    with pytest.raises(ValueError):
        gn_check(1.5, 1.0, make_family(("gaussian",)), Grid(1, 64, 10.0))


@pytest.mark.parametrize("n,Ns", [(1, (512, 1024)), (2, (256, 512))])
def test_hls_dilation_invariance(n, Ns):
    alpha = n / 4
    res = []
    for N in Ns:
        rep = hls_check(2, alpha, make_family(("wavelet", "random")), balanced_grid(n, N, EXTENT_WAVELET))
        assert rep.verdict == "scale-invariant"
        res.append(rep.invariance_residual)
    assert res[0] <= 1e-3
    assert res[1] <= max(res[0] / 2, 1e-6)


@pytest.mark.parametrize("n,Ns", [(1, (512, 1024)), (2, (256, 512))])
def test_gn_dilation_invariance(n, Ns):
    res = []
    for N in Ns:
        rep = gn_check(4, 1.0, make_family(("gaussian", "random")), balanced_grid(n, N))
        assert rep.verdict == "scale-invariant"
        res.append(rep.invariance_residual)
    assert res[0] <= 1e-3
    assert res[1] <= max(res[0] / 2, 1e-6)


@pytest.mark.parametrize("n,N", [(1, 512), (2, 256)])
def test_negative_controls_drift(n, N):
    alpha = n / 4
    r_rel = hls_target_exponent(2, alpha, n)
    ctrl = hls_check(2, alpha, make_family(("wavelet",)), balanced_grid(n, N, EXTENT_WAVELET), r=2 * r_rel)
    assert ctrl.expected_drift == pytest.approx(n * (0.5 - 0.5 / r_rel - alpha / n))
    assert abs(ctrl.drift_exponent - ctrl.expected_drift) <= 0.05
    assert ctrl.verdict == "drift-as-predicted"
    theta = 0.5 * gn_exponent(4, n, 1.0)
    gctrl = gn_check(4, 1.0, make_family(("gaussian",)), balanced_grid(n, N), theta=theta)
    assert gctrl.expected_drift == pytest.approx(gn_exponent(4, n, 1.0) - theta)
    assert abs(gctrl.drift_exponent - gctrl.expected_drift) <= 0.05
    assert gctrl.verdict == "drift-as-predicted"


def test_random_gn_ratio_resolution_independent():
    fam = make_family(("random",), seed=7)
    coarse = gn_check(4, 1.0, fam, Grid(2, 64, 2 * np.pi)).ratios()
    fine = gn_check(4, 1.0, fam, Grid(2, 128, 2 * np.pi)).ratios()
    np.testing.assert_allclose(fine, coarse, rtol=1e-2)


def test_duhamel_integral_closed_forms():
    # a = b = 0: the integral is t; a = 0, b = 2: 1 - 1/(1+t)
    for t in (0.5, 3.0, 100.0):
        assert duhamel_integral(t, 0.0, 0.0) == pytest.approx(t, rel=1e-10)
        assert duhamel_integral(t, 0.0, 2.0) == pytest.approx(1 - 1 / (1 + t), rel=1e-10)
    # a = b = 1: 2 log(1+t) / (2+t)
    t = 50.0
    assert duhamel_integral(t, 1.0, 1.0) == pytest.approx(2 * math.log1p(t) / (2 + t), rel=1e-10)
    assert duhamel_integral(0.0, 2.0, 2.0) == 0.0


def test_duhamel_lattice_bounded():
    for a in LATTICE:
        for b in LATTICE:
            if max(a, b) <= 1:
                continue
            rep = duhamel_integral_check(a, b)
            assert rep.verdict == "bounded", (a, b)
            assert rep.invariance_residual <= 10
            t = rep_times(rep)
            R = np.array([s[2] for s in rep.samples])
            # the trend beyond t = 100 (log-log slope) is non-increasing within 0.05
            late = t >= 100
            slope = np.polyfit(np.log(t[late]), np.log(R[late]), 1)[0]
            assert slope <= 0.05, (a, b, slope)


def test_duhamel_rising_pairs_approach_limit_from_below():
    # for a < 1 < b the integral behaves like (1+t)^(-a) / (b-1), so R climbs to
    # 1/(b-1) with a t^(1-b) correction; it is bounded yet not eventually flat
    for a, b in ((0.25, 1.25), (0.5, 1.25), (0.25, 1.5)):
        rep = duhamel_integral_check(a, b, tgrid=np.geomspace(1e2, 1e6, 9))
        R = np.array([s[2] for s in rep.samples])
        limit = 1.0 / (b - 1.0)
        assert np.all(np.diff(R) > 0) and R[-1] < limit
        gap = limit - R
        rate = np.polyfit(np.log(rep_times(rep)[-4:]), np.log(gap[-4:]), 1)[0]
        assert rate == pytest.approx(1 - b, abs=0.05)


def test_duhamel_two_two_limit():
    rep = duhamel_integral_check(2.0, 2.0)
    assert rep.samples[-1][2] == pytest.approx(2.0, rel=0.05)


def test_duhamel_rejects_both_at_most_one():
    with pytest.raises(ValueError):
        duhamel_integral_check(1.0, 1.0)
    with pytest.raises(ValueError):
        duhamel_integral_check(0.5, 0.75)


def test_duhamel_edge_case_flagged():
    rep = duhamel_integral_check(1.0, 2.0)
    assert any("min(a, b) = 1" in note for note in rep.notes)


def test_reports_csv(tmp_path):
    reps = [duhamel_integral_check(2.0, 2.0, tgrid=[1.0, 10.0, 100.0])]
    path = tmp_path / "ineq.csv"
    write_reports_csv(path, reps)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + 3
    assert lines[1].startswith("duhamel-integral,a=2;b=2;t0=10,R,1,")
    assert "verdict = bounded" in reps[0].to_text()
