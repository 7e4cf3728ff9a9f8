import math

import pytest
from scipy.stats import norm

from seqinfo.errors import NonConvergence
from seqinfo.mathcore import (
    FULL_LINE,
    Interval,
    QuadratureSettings,
    central_diff,
    hazard_upper,
    integrate,
    std_normal_cdf,
    std_normal_interval_mass,
    std_normal_pdf,
    std_normal_sf,
)


class TestInterval:
    def test_orders_endpoints_strictly(self):
        with pytest.raises(ValueError):
            Interval(2.0, 2.0)
        with pytest.raises(ValueError):
            Interval(3.0, 1.0)

    def test_rejects_nan_endpoints(self):
        with pytest.raises(ValueError):
            Interval(math.nan, 1.0)
        with pytest.raises(ValueError):
            Interval(0.0, math.nan)

    def test_half_open_membership(self):
        cell = Interval(0.0, 1.0)
        assert cell.contains(0.0)
        assert not cell.contains(1.0)
        assert cell.contains(0.999999)
        assert not cell.contains(-1e-300)

    def test_full_line(self):
        assert FULL_LINE.is_full_line
        assert FULL_LINE.contains(1e300)
        assert not Interval(-math.inf, 0.0).is_full_line

    def test_scaled(self):
        assert Interval(-1.0, 2.0).scaled(0.5) == Interval(-0.5, 1.0)
        assert Interval(0.0, math.inf).scaled(3.0) == Interval(0.0, math.inf)
        with pytest.raises(ValueError):
            Interval(0.0, 1.0).scaled(0.0)


class TestNormalPrimitives:
    def test_pdf_matches_reference(self):
        for x in [-8.0, -1.3, 0.0, 0.5, 4.2]:
            assert std_normal_pdf(x) == pytest.approx(norm.pdf(x), rel=1e-14)

    def test_cdf_matches_reference(self):
        for x in [-37.0, -5.0, -0.3, 0.0, 1.96, 9.0]:
            assert std_normal_cdf(x) == pytest.approx(norm.cdf(x), rel=1e-13)

    def test_sf_keeps_tail_accuracy(self):
        # 1 - cdf would be exactly 0 past x ~ 8; sf must not be.
        assert std_normal_sf(10.0) == pytest.approx(norm.sf(10.0), rel=1e-13)
        assert std_normal_sf(38.0) > 0.0
        assert std_normal_sf(-math.inf) == 1.0
        assert std_normal_sf(math.inf) == 0.0

    def test_cdf_sf_complementarity(self):
        for x in [-6.0, -1.0, 0.0, 2.0, 6.0]:
            assert std_normal_cdf(x) == std_normal_sf(-x)

    def test_interval_mass_matches_cdf_difference(self):
        pairs = [(-1.0, 1.0), (0.5, 2.5), (-4.0, -2.0), (-math.inf, 0.0), (1.96, math.inf)]
        for lo, hi in pairs:
            expected = norm.cdf(hi) - norm.cdf(lo)
            assert std_normal_interval_mass(lo, hi) == pytest.approx(expected, rel=1e-13)

    def test_interval_mass_deep_upper_cell(self):
        # The cdf difference underflows to 0 here; the sf difference must not.
        got = std_normal_interval_mass(8.0, 9.0)
        assert got == pytest.approx(norm.sf(8.0) - norm.sf(9.0), rel=1e-13)
        assert got > 0.0

    def test_interval_mass_empty_when_unordered(self):
        assert std_normal_interval_mass(1.0, 1.0) == 0.0
        assert std_normal_interval_mass(2.0, 1.0) == 0.0

    def test_interval_mass_symmetry(self):
        assert std_normal_interval_mass(-9.0, -8.0) == pytest.approx(
            std_normal_interval_mass(8.0, 9.0), rel=1e-13
        )


class TestHazard:
    def test_identity_with_pdf_and_sf(self):
        for x in [-8.0, -2.0, 0.0, 1.5, 5.0, 8.0]:
            assert hazard_upper(x) * std_normal_sf(x) == pytest.approx(
                std_normal_pdf(x), rel=1e-13
            )

    def test_far_tail_bracket(self):
        # phi/sf lies strictly between x and x + 1/x for large x.
        for x in [10.0, 40.0, 100.0]:
            assert x < hazard_upper(x) < x + 1.0 / x

    def test_monotone_increasing(self):
        xs = [-6.0, -3.0, 0.0, 3.0, 6.0, 12.0]
        values = [hazard_upper(x) for x in xs]
        assert values == sorted(values)
        assert all(v > 0.0 for v in values)


class TestIntegrate:
    def test_polynomial(self):
        value, error = integrate(lambda x: 3.0 * x * x, Interval(0.0, 2.0))
        assert value == pytest.approx(8.0, abs=1e-12)
        assert error < 1e-10

    def test_semi_infinite_tail(self):
        value, _ = integrate(std_normal_pdf, Interval(2.0, math.inf))
        assert value == pytest.approx(std_normal_sf(2.0), abs=1e-12)

    def test_full_line(self):
        value, _ = integrate(std_normal_pdf, FULL_LINE)
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_reports_nonconvergence(self):
        # One subdivision cannot resolve a narrow spike far from the center.
        settings = QuadratureSettings(abs_tol=1e-12, rel_tol=1e-12, max_subdivisions=1)
        spike = lambda x: math.exp(-((x - 0.77) * 2000.0) ** 2)
        with pytest.raises(NonConvergence):
            integrate(spike, Interval(-60.0, 60.0), settings)

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            QuadratureSettings(abs_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSettings(max_subdivisions=0)


class TestCentralDiff:
    def test_exact_on_quadratics(self):
        assert central_diff(lambda x: x * x, 3.0) == pytest.approx(6.0, abs=1e-8)

    def test_exp_slope(self):
        assert central_diff(math.exp, 0.0) == pytest.approx(1.0, abs=1e-9)

    def test_explicit_step(self):
        assert central_diff(lambda x: 5.0 * x, 1.0, h=0.25) == pytest.approx(5.0, abs=1e-12)
