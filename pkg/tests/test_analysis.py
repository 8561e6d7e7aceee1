import math
from fractions import Fraction

import numpy as np
import pytest

from mtreduce.analysis import (
    DELTA,
    P_CRITICAL,
    SIGMA,
    cluster_cutoff_rate,
    detect_knee,
    fit_exponential,
    fit_power_law,
    hopping_curve,
    hopping_estimate,
    min_cluster_size,
    reset_zone_probability,
    scaling_window,
    tau_sync,
)

from _oracles import coulomb_quadrature, overlap_quadrature, resonance_quadrature


class TestResetZoneProbability:
    def test_small_p0_limit(self):
        assert reset_zone_probability(1e-12) == pytest.approx(1.0, abs=1e-5)

    def test_threshold_crossing(self):
        assert reset_zone_probability(0.146) == pytest.approx(0.500, abs=0.001)

    def test_p0_03(self):
        assert reset_zone_probability(0.3) == pytest.approx(0.2620, abs=0.0005)

    def test_strictly_decreasing_and_identity(self):
        grid = np.linspace(0.01, 0.49, 25)
        values = [reset_zone_probability(p0) for p0 in grid]
        assert np.all(np.diff(values) < 0)
        for p0, p in zip(grid, values):
            assert p + (2 / math.pi) * math.acos(1 - 2 * p0) == pytest.approx(1.0)

    def test_domain(self):
        for bad in (0.0, 0.5, -0.1, 0.9):
            with pytest.raises(ValueError):
                reset_zone_probability(bad)


class TestTauSync:
    def test_reference_value(self):
        assert tau_sync(0.1, 0.3) == pytest.approx(5.796, abs=0.001)

    def test_small_p0_limit(self):
        assert tau_sync(0.1, 1e-12) == pytest.approx(0.0, abs=1e-5)

    def test_doubling_k_halves_exactly(self):
        assert tau_sync(0.2, 0.3) == tau_sync(0.1, 0.3) / 2

    def test_domain(self):
        with pytest.raises(ValueError):
            tau_sync(0.0, 0.3)
        with pytest.raises(ValueError):
            tau_sync(0.1, 0.5)


def test_percolation_constants():
    assert P_CRITICAL == 0.5
    assert DELTA == Fraction(187, 91)
    assert SIGMA == Fraction(36, 91)
    assert DELTA - 1 == Fraction(96, 91)


def test_scaling_window_and_cutoff():
    p = reset_zone_probability(0.3)
    win = scaling_window([10, 100], p)
    assert win[0] < win[1]
    assert win[0] == pytest.approx((0.5 - p) * 10 ** float(SIGMA))
    assert cluster_cutoff_rate(0.4) < cluster_cutoff_rate(0.3)
    assert cluster_cutoff_rate(0.5) == 0.0


class TestFits:
    def test_power_law_exact_recovery(self):
        pts = [(n, 2.0 * n ** 1.5) for n in (3, 10, 30, 100, 300)]
        fit = fit_power_law(pts)
        assert fit.amplitude == pytest.approx(2.0, abs=1e-10)
        assert fit.exponent == pytest.approx(1.5, abs=1e-10)
        assert fit.residual == pytest.approx(0.0, abs=1e-12)

    def test_exponential_exact_recovery(self):
        pts = [(n, 3.0 * math.exp(0.02 * n)) for n in (10, 50, 100, 200, 400)]
        fit = fit_exponential(pts)
        assert fit.amplitude == pytest.approx(3.0, abs=1e-10)
        assert fit.exponent == pytest.approx(0.02, abs=1e-12)

    def test_range_filter_and_censored_points(self):
        pts = [(10, 1.0), (20, None), (30, 3.0), (40, 4.0), (1000, 9e9)]
        fit = fit_power_law(pts, fit_range=(5, 100))
        assert fit.n_points == 3
        assert fit.fit_range == (5, 100)

    def test_insufficient_points(self):
        with pytest.raises(ValueError):
            fit_power_law([(10, 1.0), (20, 2.0)])
        with pytest.raises(ValueError):
            fit_power_law([(10, 1.0), (10, 2.0), (10, 3.0)])

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            fit_power_law([(10, 1.0), (20, -2.0), (30, 3.0)])

    def test_crossover_residuals(self):
        # small N follows a power law, large N an exponential; each model
        # wins (lower log residual) on its home window
        rng = np.random.default_rng(2)
        small = [(n, 0.05 * n ** 1.1 * math.exp(rng.normal(0, 0.02)))
                 for n in (5, 8, 13, 21, 34)]
        large = [(n, 0.5 * math.exp(0.03 * n) * math.exp(rng.normal(0, 0.02)))
                 for n in (120, 160, 210, 270, 350)]
        assert fit_power_law(small).residual < fit_exponential(small).residual
        assert fit_exponential(large).residual < fit_power_law(large).residual


class TestHopping:
    def test_fig_anchor_points(self):
        assert hopping_estimate(2.0, 4.0) == pytest.approx(0.10, rel=0.05)
        assert hopping_estimate(0.61, 4.0) == pytest.approx(0.01, rel=0.05)

    def test_vanishing_overlap_limit(self):
        assert hopping_estimate(0.05, 4.0) == pytest.approx(0.0, abs=1e-20)

    def test_monotone_curve(self):
        curve = hopping_curve(np.linspace(0.5, 3.0, 26))
        ks = [k for _, k in curve]
        assert np.all(np.diff(ks) > 0)

    @pytest.mark.parametrize("ell", [2.0, 0.61])
    def test_closed_forms_against_quadrature(self, ell):
        from mtreduce.analysis import (
            coulomb_integral,
            overlap_integral,
            resonance_integral,
        )

        d = 4.0
        assert overlap_integral(ell, d) == pytest.approx(
            overlap_quadrature(ell, d), rel=1e-4)
        assert resonance_integral(ell, d) == pytest.approx(
            resonance_quadrature(ell, d), rel=1e-4)
        assert coulomb_integral(ell, d) == pytest.approx(
            coulomb_quadrature(ell, d), rel=1e-4)

    def test_domain(self):
        with pytest.raises(ValueError):
            hopping_estimate(-1.0, 4.0)
        with pytest.raises(ValueError):
            hopping_estimate(2.0, 0.0)


class TestMinClusterSize:
    @pytest.mark.parametrize("tau,eps,expected", [
        (1e-2, 1.0, 1030),
        (1e-1, 1.0, 1115),
        (1e-2, 10.0, 945),
        (1e-1, 10.0, 1030),
        (1e-2, 100.0, 860),
        (1e-1, 100.0, 945),
    ])
    def test_published_table(self, tau, eps, expected):
        assert abs(min_cluster_size(tau, eps) - expected) <= 2

    def test_target_below_prefactor(self):
        assert min_cluster_size(1e-15, 1.0) == 0

    def test_domain(self):
        with pytest.raises(ValueError):
            min_cluster_size(-1.0, 1.0)
        with pytest.raises(ValueError):
            min_cluster_size(1e-2, 0.0)


class TestDetectKnee:
    def test_exact_series_has_no_knee(self):
        series = [(k, tau_sync(k, 0.3)) for k in (0.05, 0.1, 0.2, 0.5)]
        assert detect_knee(series, 0.3) is None

    def test_deviating_low_k(self):
        series = [(0.05, 100.0), (0.1, tau_sync(0.1, 0.3)),
                  (0.2, tau_sync(0.2, 0.3))]
        assert detect_knee(series, 0.3) == 0.05

    def test_censored_counts_as_deviating(self):
        series = [(0.05, None), (0.1, tau_sync(0.1, 0.3))]
        assert detect_knee(series, 0.3) == 0.05

    def test_threshold_configurable(self):
        series = [(0.1, tau_sync(0.1, 0.3) * 1.1)]
        assert detect_knee(series, 0.3) is None
        assert detect_knee(series, 0.3, deviation_threshold=0.05) == 0.1


def test_independent_oscillator_exponent_consistency(rng):
    """Per-step zone sampling of independent mean-field oscillators, fitted
    in the window where (p_c - p) N^sigma <= 1, against b = delta - 1.

    This is expected to FAIL at the 13-column geometry: the strip is only 13
    sites around, the window's cluster sizes (5-26) are far from the scaling
    regime, and p(0.3) = 0.262 sits deep below p_c, so the measured slope
    lands near 3 instead of 96/91.  The full dynamical simulation does land
    in the published band (see the power-law acceptance test); the static
    sampling argument itself does not transfer to this geometry.
    """
    from mtreduce.lattice import LatticeSpec, build_adjacency
    from mtreduce.reduction import label_clusters

    spec = LatticeSpec(length=100)
    nbr = build_adjacency(spec)
    p = reset_zone_probability(0.3)
    phases = rng.random(spec.n_sites) * 2 * np.pi
    thresholds = np.array([5, 7, 10, 14, 19, 26])
    assert np.all(scaling_window(thresholds, p) <= 1.0)
    counts = np.zeros(len(thresholds))
    steps = 3000
    for s in range(1, steps + 1):
        occ = np.cos(s * 0.7 + phases) ** 2  # k dt = 0.7: fast decorrelation
        mask = (occ >= 0.3) & (occ <= 0.7)
        sizes = label_clusters(mask, nbr).sizes
        for i, threshold in enumerate(thresholds):
            counts[i] += np.count_nonzero(sizes >= threshold)
    fit = fit_power_law(list(zip(thresholds.tolist(), steps / counts)))
    target = float(DELTA - 1)
    assert abs(fit.exponent - target) <= 2 * fit.exponent_err, (
        f"slope {fit.exponent:.3f} +- {fit.exponent_err:.3f} vs delta-1 = {target:.4f}")
