import math

import pytest

from seqinfo.design import (
    CoinFlipRule,
    DecisionCell,
    DecisionRule,
    TwoStageDesign,
    always_continue_design,
    coinflip_design,
    decide,
    format_design_config,
    gsd_design,
    is_stop_decision,
    max_stage2_n,
    n_total,
    parse_design_config,
    stage1_mean_region,
    stage2_n,
)
from seqinfo.errors import InvalidDesign
from seqinfo.mathcore import FULL_LINE, Interval


def three_cell_design(n1: int = 2, sigma: float = 1.5) -> TwoStageDesign:
    rule = DecisionRule(
        cells=(
            DecisionCell(Interval(-math.inf, -0.5), stop=False, n2=9),
            DecisionCell(Interval(-0.5, 1.5), stop=False, n2=4),
            DecisionCell(Interval(1.5, math.inf), stop=True),
        )
    )
    return TwoStageDesign(n1=n1, sigma=sigma, rule=rule)


class TestCellAndRuleValidation:
    def test_stop_cell_carries_no_stage2(self):
        with pytest.raises(InvalidDesign):
            DecisionCell(Interval(0.0, 1.0), stop=True, n2=3)

    def test_continue_cell_needs_positive_integer_n2(self):
        with pytest.raises(InvalidDesign):
            DecisionCell(Interval(0.0, 1.0), stop=False)
        with pytest.raises(InvalidDesign):
            DecisionCell(Interval(0.0, 1.0), stop=False, n2=0)
        with pytest.raises(InvalidDesign):
            DecisionCell(Interval(0.0, 1.0), stop=False, n2=2.0)

    def test_rule_rejects_gap(self):
        with pytest.raises(InvalidDesign):
            DecisionRule(
                cells=(
                    DecisionCell(Interval(-math.inf, 0.0), stop=False, n2=1),
                    DecisionCell(Interval(0.5, math.inf), stop=True),
                )
            )

    def test_rule_rejects_overlap(self):
        with pytest.raises(InvalidDesign):
            DecisionRule(
                cells=(
                    DecisionCell(Interval(-math.inf, 1.0), stop=False, n2=1),
                    DecisionCell(Interval(0.5, math.inf), stop=True),
                )
            )

    def test_rule_must_reach_both_infinities(self):
        with pytest.raises(InvalidDesign):
            DecisionRule(cells=(DecisionCell(Interval(0.0, math.inf), stop=True),))
        with pytest.raises(InvalidDesign):
            DecisionRule(cells=(DecisionCell(Interval(-math.inf, 0.0), stop=False, n2=1),))

    def test_rule_needs_cells(self):
        with pytest.raises(InvalidDesign):
            DecisionRule(cells=())

    def test_coinflip_probability_range(self):
        with pytest.raises(InvalidDesign):
            CoinFlipRule(p_stop=-0.1, n2=1)
        with pytest.raises(InvalidDesign):
            CoinFlipRule(p_stop=1.5, n2=1)
        CoinFlipRule(p_stop=0.0, n2=1)
        CoinFlipRule(p_stop=1.0, n2=1)

    def test_design_validates_sizes(self):
        rule = CoinFlipRule(p_stop=0.5, n2=1)
        with pytest.raises(InvalidDesign):
            TwoStageDesign(n1=0, sigma=1.0, rule=rule)
        with pytest.raises(InvalidDesign):
            TwoStageDesign(n1=2.5, sigma=1.0, rule=rule)
        with pytest.raises(InvalidDesign):
            TwoStageDesign(n1=1, sigma=0.0, rule=rule)
        with pytest.raises(InvalidDesign):
            TwoStageDesign(n1=1, sigma=math.inf, rule=rule)


class TestConstructors:
    def test_gsd_layout(self):
        design = gsd_design(n1=1, n2=1, sigma=1.0, c1=1.96)
        assert design.num_decisions == 2
        assert list(design.decision_indices()) == [1, 2]
        assert is_stop_decision(design, 1)
        assert not is_stop_decision(design, 2)
        assert design.rule.cells[0].z_region == Interval(1.96, math.inf)
        assert design.rule.cells[1].z_region == Interval(-math.inf, 1.96)

    def test_gsd_rejects_infinite_threshold(self):
        with pytest.raises(InvalidDesign):
            gsd_design(n1=1, n2=1, sigma=1.0, c1=math.inf)

    def test_coinflip_layout(self):
        design = coinflip_design(n1=2, n2=3, sigma=1.2, p_stop=0.25)
        assert design.num_decisions == 2
        assert is_stop_decision(design, 1)
        assert stage2_n(design, 1) == 0
        assert stage2_n(design, 2) == 3

    def test_always_continue_layout(self):
        design = always_continue_design(n1=2, n2=3, sigma=1.0)
        assert design.num_decisions == 1
        assert not is_stop_decision(design, 1)
        assert n_total(design, 1) == 5
        assert stage1_mean_region(design, 1).is_full_line


class TestDecide:
    def test_threshold_boundary_goes_to_stop(self):
        # Cells are half-open, so z1 == c1 lands in [c1, inf).
        design = gsd_design(n1=1, n2=1, sigma=1.0, c1=1.96)
        assert decide(design, 1.96) == 1
        assert decide(design, 1.9599999) == 2
        assert decide(design, -50.0) == 2
        assert decide(design, 50.0) == 1

    def test_three_cell_labels_follow_declaration_order(self):
        design = three_cell_design()
        assert decide(design, -5.0) == 1
        assert decide(design, 0.0) == 2
        assert decide(design, 2.0) == 3

    def test_rejects_nan_statistic(self):
        design = gsd_design(n1=1, n2=1, sigma=1.0, c1=0.0)
        with pytest.raises(ValueError):
            decide(design, math.nan)

    def test_coinflip_needs_coin(self):
        design = coinflip_design(n1=1, n2=1, sigma=1.0, p_stop=0.3)
        with pytest.raises(ValueError):
            decide(design, 0.0)
        assert decide(design, 0.0, coin=0.29) == 1
        assert decide(design, 0.0, coin=0.30) == 2

    def test_coinflip_ignores_statistic(self):
        design = coinflip_design(n1=1, n2=1, sigma=1.0, p_stop=0.3)
        assert decide(design, 100.0, coin=0.9) == decide(design, -100.0, coin=0.9)


class TestSizesAndRegions:
    def test_totals(self):
        design = three_cell_design(n1=2)
        assert [n_total(design, d) for d in design.decision_indices()] == [11, 6, 2]
        assert max_stage2_n(design) == 9

    def test_decision_index_bounds(self):
        design = gsd_design(n1=1, n2=1, sigma=1.0, c1=0.0)
        with pytest.raises(InvalidDesign):
            stage2_n(design, 0)
        with pytest.raises(InvalidDesign):
            stage2_n(design, 3)
        with pytest.raises(InvalidDesign):
            is_stop_decision(coinflip_design(1, 1, 1.0, 0.5), 3)

    def test_mean_region_scales_by_sigma_over_sqrt_n1(self):
        design = gsd_design(n1=4, n2=9, sigma=2.0, c1=0.8)
        region = stage1_mean_region(design, 1)
        assert region.lo == pytest.approx(0.8 * 2.0 / 2.0)
        assert math.isinf(region.hi)

    def test_coinflip_mean_region_is_unrestricted(self):
        design = coinflip_design(n1=4, n2=9, sigma=2.0, p_stop=0.5)
        assert stage1_mean_region(design, 1).is_full_line
        assert stage1_mean_region(design, 2).is_full_line


class TestConfigDialect:
    def test_round_trip_threshold_design(self):
        design = three_cell_design()
        assert parse_design_config(format_design_config(design)) == design

    def test_round_trip_gsd(self):
        design = gsd_design(n1=4, n2=9, sigma=2.0, c1=0.8)
        assert parse_design_config(format_design_config(design)) == design

    def test_round_trip_coinflip(self):
        design = coinflip_design(n1=2, n2=3, sigma=1.2, p_stop=0.25)
        assert parse_design_config(format_design_config(design)) == design

    def test_parses_comments_and_blank_lines(self):
        text = """
        # stage sizes
        n1 = 2          # two draws first
        sigma = 1.5

        cell = 1.5, inf, stop
        cell = -0.5, 1.5, continue: 4
        cell = -inf, -0.5, continue: 9
        """
        design = parse_design_config(text)
        assert design.n1 == 2
        assert design.sigma == 1.5
        assert design.num_decisions == 3

    def test_missing_header_fields(self):
        with pytest.raises(InvalidDesign, match="n1 and sigma"):
            parse_design_config("n1 = 2\ncell = -inf, inf, stop\n")

    def test_no_rule(self):
        with pytest.raises(InvalidDesign, match="no decision rule"):
            parse_design_config("n1 = 2\nsigma = 1.0\n")

    def test_mixing_flip_and_cells(self):
        text = "n1 = 1\nsigma = 1\nflip = 0.5, continue: 2\ncell = -inf, inf, stop\n"
        with pytest.raises(InvalidDesign, match="mixes"):
            parse_design_config(text)

    def test_duplicate_flip(self):
        text = "n1 = 1\nsigma = 1\nflip = 0.5, continue: 2\nflip = 0.4, continue: 2\n"
        with pytest.raises(InvalidDesign, match="line 4"):
            parse_design_config(text)

    def test_error_reports_line_number(self):
        with pytest.raises(InvalidDesign, match="line 3"):
            parse_design_config("n1 = 1\nsigma = 1\ncell = what\n")

    def test_bad_action(self):
        with pytest.raises(InvalidDesign, match="action"):
            parse_design_config("n1 = 1\nsigma = 1\ncell = -inf, inf, halt\n")

    def test_bad_numbers(self):
        with pytest.raises(InvalidDesign, match="n1"):
            parse_design_config("n1 = one\nsigma = 1\ncell = -inf, inf, stop\n")
        with pytest.raises(InvalidDesign, match="sigma"):
            parse_design_config("n1 = 1\nsigma = wide\ncell = -inf, inf, stop\n")

    def test_unknown_key(self):
        with pytest.raises(InvalidDesign, match="unknown key"):
            parse_design_config("n1 = 1\nsigma = 1\nn3 = 4\ncell = -inf, inf, stop\n")

    def test_line_without_equals(self):
        with pytest.raises(InvalidDesign, match="key = value"):
            parse_design_config("n1 = 1\nsigma = 1\njust words\n")
