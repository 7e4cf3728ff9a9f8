import math

import pytest
from scipy.stats import norm

from seqinfo.bounds import mse_bound_report
from seqinfo.density import (
    continue_mle_density,
    continue_mle_interval_mass,
    log_likelihood,
    stop_mle_density,
    stop_mle_interval_mass,
)
from seqinfo.design import (
    always_continue_design,
    coinflip_design,
    gsd_design,
    stage1_mean_region,
)
from seqinfo.errors import InvalidDesign, InvalidOutcome
from seqinfo.information import decision_probability
from seqinfo.mathcore import Interval, integrate
from seqinfo.truncnorm import TruncatedNormal, mass

CANONICAL = gsd_design(n1=1, n2=1, sigma=1.0, c1=1.96)
WIDER = gsd_design(n1=4, n2=9, sigma=2.0, c1=0.8)


def stop_support(design, d=None):
    region = stage1_mean_region(design, 1 if d is None else d)
    lo = region.lo if math.isfinite(region.lo) else -math.inf
    hi = region.hi if math.isfinite(region.hi) else math.inf
    return Interval(lo, hi)


class TestStopBranch:
    @pytest.mark.parametrize("design,theta", [(CANONICAL, 0.0), (CANONICAL, 1.96), (WIDER, 0.5)])
    def test_density_integrates_to_one(self, design, theta):
        region = stage1_mean_region(design, 1)
        window = Interval(region.lo, min(region.hi, theta + 50.0))
        total = integrate(lambda t: stop_mle_density(design, theta, t), window).value
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_zero_off_support(self):
        assert stop_mle_density(CANONICAL, 0.0, 1.0) == 0.0
        assert stop_mle_density(CANONICAL, 0.0, 1.9599) == 0.0
        assert stop_mle_density(CANONICAL, 0.0, 1.96) > 0.0

    def test_peak_value_at_threshold(self):
        # At theta = c1 the density at the cell edge is phi(0)/(1/2).
        got = stop_mle_density(CANONICAL, 1.96, 1.96)
        assert got == pytest.approx(2.0 / math.sqrt(2.0 * math.pi), rel=1e-12)

    def test_interval_mass_matches_density_quadrature(self):
        for lo, hi in [(1.96, 2.5), (2.0, 4.0), (0.0, 3.0), (5.0, 9.0)]:
            direct = stop_mle_interval_mass(CANONICAL, 0.3, lo, hi)
            quad = integrate(
                lambda t: stop_mle_density(CANONICAL, 0.3, t), Interval(lo, hi)
            ).value
            assert direct == pytest.approx(quad, abs=1e-10)

    def test_interval_mass_of_support_is_one(self):
        assert stop_mle_interval_mass(CANONICAL, 0.7, -math.inf, math.inf) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_coinflip_stop_branch_is_untruncated(self):
        design = coinflip_design(n1=4, n2=9, sigma=2.0, p_stop=0.25)
        for t in (-3.0, 0.0, 2.5):
            expected = norm.pdf(t, loc=0.5, scale=1.0)
            assert stop_mle_density(design, 0.5, t) == pytest.approx(expected, rel=1e-12)


class TestContinueBranch:
    @pytest.mark.parametrize(
        "design,theta", [(CANONICAL, 0.0), (CANONICAL, 1.96), (WIDER, -0.3)]
    )
    def test_density_integrates_to_one(self, design, theta):
        total = integrate(
            lambda t: continue_mle_density(design, theta, t),
            Interval(theta - 12.0, theta + 12.0),
        ).value
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_interval_mass_matches_density_quadrature(self):
        # Two independent routes: pointwise convolution integrated in t
        # versus the single-quadrature mixture of normal cell masses.
        for lo, hi in [(-1.0, 0.5), (0.0, 2.0), (-4.0, -1.0)]:
            direct = continue_mle_interval_mass(CANONICAL, 0.3, lo, hi)
            quad = integrate(
                lambda t: continue_mle_density(CANONICAL, 0.3, t), Interval(lo, hi)
            ).value
            assert direct == pytest.approx(quad, abs=1e-9)

    def test_interval_mass_of_line_is_one(self):
        assert continue_mle_interval_mass(
            WIDER, 0.7, -math.inf, math.inf
        ) == pytest.approx(1.0, abs=1e-10)

    def test_moments_reproduce_branch_bias_and_bound(self):
        # The continue-branch density must carry exactly the bias and MSE the
        # bound report predicts, since the MLE attains the bound.
        theta = 0.0
        report = mse_bound_report(CANONICAL, theta)
        cont = report.per_decision[1]
        window = Interval(theta - 12.0, theta + 12.0)
        mean = integrate(
            lambda t: t * continue_mle_density(CANONICAL, theta, t), window
        ).value
        mse = integrate(
            lambda t: (t - theta) ** 2 * continue_mle_density(CANONICAL, theta, t),
            window,
        ).value
        assert mean - theta == pytest.approx(cont.bias, abs=1e-9)
        assert mse == pytest.approx(cont.bound, abs=1e-8)

    def test_stop_moments_reproduce_branch_bias_and_bound(self):
        theta = 0.0
        report = mse_bound_report(CANONICAL, theta)
        stop = report.per_decision[0]
        window = Interval(1.96, 40.0)
        mean = integrate(
            lambda t: t * stop_mle_density(CANONICAL, theta, t), window
        ).value
        mse = integrate(
            lambda t: (t - theta) ** 2 * stop_mle_density(CANONICAL, theta, t), window
        ).value
        assert mean - theta == pytest.approx(stop.bias, abs=1e-9)
        assert mse == pytest.approx(stop.bound, abs=1e-8)

    def test_coinflip_continue_branch_is_pooled_normal(self):
        design = coinflip_design(n1=1, n2=1, sigma=1.0, p_stop=0.5)
        # Pooled mean of two draws: N(theta, 1/2).
        for t in (-1.0, 0.2, 1.5):
            expected = norm.pdf(t, loc=0.2, scale=math.sqrt(0.5))
            assert continue_mle_density(design, 0.2, t) == pytest.approx(
                expected, rel=1e-9
            )


class TestBranchMasses:
    def test_branch_mass_equals_decision_probability(self):
        # The stage-1 mean's cell mass and the z-scale decision probability
        # are computed through different primitives; they must agree.
        for design in (CANONICAL, WIDER):
            for theta in (-0.5, 0.0, 1.96):
                for d in design.decision_indices():
                    region = stage1_mean_region(design, d)
                    scale = design.sigma / math.sqrt(design.n1)
                    cell = mass(TruncatedNormal(mu=theta, sigma=scale, region=region))
                    assert cell == pytest.approx(
                        decision_probability(design, theta, d), abs=1e-8
                    )


class TestDecisionResolution:
    def test_defaults_pick_first_matching_branch(self):
        assert stop_mle_density(CANONICAL, 0.0, 2.5) == stop_mle_density(
            CANONICAL, 0.0, 2.5, d=1
        )
        assert continue_mle_density(CANONICAL, 0.0, 0.5) == continue_mle_density(
            CANONICAL, 0.0, 0.5, d=2
        )

    def test_kind_mismatch_is_rejected(self):
        with pytest.raises(InvalidDesign):
            stop_mle_density(CANONICAL, 0.0, 2.5, d=2)
        with pytest.raises(InvalidDesign):
            continue_mle_density(CANONICAL, 0.0, 0.5, d=1)
        with pytest.raises(InvalidDesign):
            stop_mle_interval_mass(CANONICAL, 0.0, 2.0, 3.0, d=2)

    def test_missing_branch_kind_is_rejected(self):
        fixed = always_continue_design(n1=1, n2=1, sigma=1.0)
        with pytest.raises(InvalidDesign):
            stop_mle_density(fixed, 0.0, 0.5)


class TestLogLikelihood:
    def test_single_standard_point(self):
        assert log_likelihood([0.0], theta=0.0, sigma=1.0) == pytest.approx(
            -0.5 * math.log(2.0 * math.pi), rel=1e-15
        )

    def test_matches_reference_logpdf(self):
        sample = [0.3, -1.2, 2.4, 0.0]
        for theta, sigma in [(0.0, 1.0), (0.5, 2.0), (-1.0, 0.3)]:
            expected = float(sum(norm.logpdf(x, loc=theta, scale=sigma) for x in sample))
            assert log_likelihood(sample, theta=theta, sigma=sigma) == pytest.approx(
                expected, rel=1e-12
            )

    def test_grid_argmax_is_sample_mean(self):
        sample = [1.0, 2.0]
        grid = [i * 0.01 for i in range(-100, 301)]
        values = [log_likelihood(sample, theta=t, sigma=1.0) for t in grid]
        assert grid[values.index(max(values))] == pytest.approx(1.5, abs=0.01)

    def test_validates_inputs(self):
        with pytest.raises(InvalidOutcome):
            log_likelihood([], theta=0.0, sigma=1.0)
        with pytest.raises(InvalidOutcome):
            log_likelihood([0.0, math.nan], theta=0.0, sigma=1.0)
        with pytest.raises(ValueError):
            log_likelihood([0.0], theta=0.0, sigma=0.0)
        with pytest.raises(ValueError):
            log_likelihood([0.0], theta=math.inf, sigma=1.0)
