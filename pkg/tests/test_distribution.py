import numpy as np
import pytest

from chaos_market import (
    ModelParams,
    ShockSpec,
    exceeds_overlay_in_tails,
    excess_kurtosis,
    phase_portrait,
    return_histogram,
    returns,
    simulate,
)
from chaos_market.rng import run_normals


def test_phase_portrait_pairs():
    r = np.array([1.0, 2.0, 3.0, 4.0])
    pts = phase_portrait(r, burn_in=0)
    np.testing.assert_array_equal(pts, [[1, 2], [2, 3], [3, 4]])


def test_phase_portrait_constant_series():
    pts = phase_portrait(np.full(50, 0.02), burn_in=10)
    assert np.all(pts == 0.02)


def test_phase_portrait_burn_in_guard():
    with pytest.raises(ValueError):
        phase_portrait(np.ones(5), burn_in=4)


def test_oscillating_attractor_is_two_points():
    traj = simulate(ModelParams(m=1, n=5, w=0.01, a1=0.39),
                    ShockSpec(p_star=10.0, r0=0.01), 3000)
    pts = phase_portrait(returns(traj), burn_in=1000)
    v = round(0.2 * 0.39, 9)
    rounded = {(round(a, 9), round(b, 9)) for a, b in pts}
    assert rounded == {(v, -v), (-v, v)}


def test_chaotic_attractor_bounded_by_return_range():
    a1 = 0.14
    traj = simulate(ModelParams(m=1, n=5, w=0.01, a1=a1),
                    ShockSpec(p_star=10.0, r0=0.01), 20_000)
    pts = phase_portrait(returns(traj), burn_in=1000)
    assert np.abs(pts).max() <= 0.4 * a1 + 1e-15


def test_histogram_mass_is_one():
    r = run_normals(11, 0, 20_000)
    hist = return_histogram(r, bin_count=150)
    widths = np.diff(hist.bin_edges)
    assert np.sum(hist.densities * widths) == pytest.approx(1.0, abs=1e-6)


def test_histogram_matches_gaussian_overlay_for_normal_sample():
    r = 0.02 * run_normals(12, 0, 200_000)
    hist = return_histogram(r, bin_count=40)
    assert not hist.degenerate
    core = np.abs(hist.bin_centers) < 2 * np.sqrt(hist.sample_variance)
    np.testing.assert_allclose(hist.densities[core], hist.matched_gaussian[core],
                               rtol=0.12)


def test_histogram_degenerate_variance_flagged():
    hist = return_histogram(np.full(2000, 0.01), bin_count=20)
    assert hist.degenerate
    assert hist.matched_gaussian is None
    with pytest.raises(ValueError):
        exceeds_overlay_in_tails(hist)


def test_histogram_validation():
    with pytest.raises(ValueError):
        return_histogram(np.ones(100), bin_count=20)
    with pytest.raises(ValueError):
        return_histogram(run_normals(1, 0, 2000), bin_count=0)


def test_chaotic_shoulders_exceed_overlay():
    traj = simulate(ModelParams(m=1, n=5, w=0.01, a1=0.14),
                    ShockSpec(p_star=10.0, r0=0.01), 100_000)
    hist = return_histogram(returns(traj), bin_count=60, burn_in=1000)
    assert exceeds_overlay_in_tails(hist, threshold_sigmas=2.0)


def test_excess_kurtosis_gaussian_near_zero():
    r = run_normals(13, 0, 100_000)
    assert abs(excess_kurtosis(r)) < 0.1


def test_excess_kurtosis_two_point_law():
    r = np.tile([0.078, -0.078], 1000)
    assert excess_kurtosis(r) == pytest.approx(-2.0, abs=1e-12)


def test_excess_kurtosis_regression_anchor_chaotic():
    # frozen regression value for the deterministic a1 = 0.14 run; the
    # distribution is platykurtic (bounded support) despite the visual
    # shoulder over the Gaussian overlay
    traj = simulate(ModelParams(m=1, n=5, w=0.01, a1=0.14),
                    ShockSpec(p_star=10.0, r0=0.01), 100_000)
    value = excess_kurtosis(returns(traj), burn_in=1000)
    assert value == pytest.approx(-0.5103645435601023, abs=1e-9)


def test_chaotic_returns_are_symmetric_in_mean():
    # odd demand -> zero-mean returns: the sample mean stays inside 3 stderr
    for a1 in (0.14, 0.17):
        traj = simulate(ModelParams(m=1, n=5, w=0.01, a1=a1),
                        ShockSpec(p_star=10.0, r0=0.01), 100_000)
        r = returns(traj)[1000:]
        assert abs(r.mean()) < 3 * r.std() / np.sqrt(len(r))


def test_excess_kurtosis_validation():
    with pytest.raises(ValueError):
        excess_kurtosis(np.ones(100))
    with pytest.raises(ValueError):
        excess_kurtosis(np.full(5000, 0.01))
