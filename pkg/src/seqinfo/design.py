"""Two-stage adaptive designs with a data-dependent interim decision.

A design observes n1 draws from N(theta, sigma^2), forms the standardized
interim statistic z1 = sum(x) / (sqrt(n1) * sigma), and picks a decision d
from the rule. Threshold rules (DecisionRule) partition the z1 axis into
half-open cells [lo, hi), each either stopping or continuing with a fixed
second-stage size n2(d). A CoinFlipRule ignores z1 entirely and stops with a
fixed probability, which keeps the decision carrying no information about
theta; it exists as the control case next to informative threshold rules.

Decisions are numbered 1..K in the order the cells were given, which for the
classic one-threshold group-sequential design makes d=1 the early stop on
[c1, inf) and d=2 the continuation on (-inf, c1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidDesign
from .mathcore import FULL_LINE, Interval

__all__ = [
    "DecisionCell",
    "DecisionRule",
    "CoinFlipRule",
    "TwoStageDesign",
    "gsd_design",
    "coinflip_design",
    "always_continue_design",
    "decide",
    "is_stop_decision",
    "stage2_n",
    "n_total",
    "stage1_mean_region",
    "max_stage2_n",
    "parse_design_config",
    "format_design_config",
]


@dataclass(frozen=True)
class DecisionCell:
    """One half-open cell [lo, hi) of the z1 axis and its action."""

    z_region: Interval
    stop: bool
    n2: int = 0

    def __post_init__(self) -> None:
        if self.stop:
            if self.n2 != 0:
                raise InvalidDesign(f"stop cell must have n2 == 0, got {self.n2}")
        else:
            if not (isinstance(self.n2, int) and self.n2 >= 1):
                raise InvalidDesign(f"continue cell needs integer n2 >= 1, got {self.n2!r}")


@dataclass(frozen=True)
class DecisionRule:
    """Ordered decision cells; their regions must tile the whole z1 axis."""

    cells: tuple[DecisionCell, ...]

    def __post_init__(self) -> None:
        if not self.cells:
            raise InvalidDesign("rule needs at least one cell")
        ordered = sorted(self.cells, key=lambda c: c.z_region.lo)
        if not math.isinf(ordered[0].z_region.lo) or not math.isinf(ordered[-1].z_region.hi):
            raise InvalidDesign("cells must cover the line from -inf to +inf")
        for left, right in zip(ordered, ordered[1:]):
            if left.z_region.hi != right.z_region.lo:
                raise InvalidDesign(
                    f"cells leave a gap or overlap between {left.z_region.hi} "
                    f"and {right.z_region.lo}"
                )


@dataclass(frozen=True)
class CoinFlipRule:
    """Stop with probability p_stop regardless of z1, else add n2 draws."""

    p_stop: float
    n2: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_stop <= 1.0):
            raise InvalidDesign(f"p_stop must lie in [0, 1], got {self.p_stop}")
        if not (isinstance(self.n2, int) and self.n2 >= 1):
            raise InvalidDesign(f"coin-flip rule needs integer n2 >= 1, got {self.n2!r}")


@dataclass(frozen=True)
class TwoStageDesign:
    """Stage-1 size, known sigma, and the interim decision rule."""

    n1: int
    sigma: float
    rule: DecisionRule | CoinFlipRule

    def __post_init__(self) -> None:
        if not (isinstance(self.n1, int) and self.n1 >= 1):
            raise InvalidDesign(f"n1 must be an integer >= 1, got {self.n1!r}")
        if not (isinstance(self.sigma, (int, float)) and self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise InvalidDesign(f"sigma must be positive and finite, got {self.sigma!r}")

    @property
    def num_decisions(self) -> int:
        if isinstance(self.rule, CoinFlipRule):
            return 2
        return len(self.rule.cells)

    def decision_indices(self) -> range:
        """Valid decision labels, 1-based in rule order."""
        return range(1, self.num_decisions + 1)


def gsd_design(n1: int, n2: int, sigma: float, c1: float) -> TwoStageDesign:
    """One-threshold group-sequential design: stop iff z1 >= c1.

    Decision 1 is the early stop on [c1, inf); decision 2 continues with n2
    more observations on (-inf, c1).
    """
    if not math.isfinite(c1):
        raise InvalidDesign(f"threshold c1 must be finite, got {c1}")
    rule = DecisionRule(
        cells=(
            DecisionCell(Interval(c1, math.inf), stop=True),
            DecisionCell(Interval(-math.inf, c1), stop=False, n2=n2),
        )
    )
    return TwoStageDesign(n1=n1, sigma=sigma, rule=rule)


def coinflip_design(n1: int, n2: int, sigma: float, p_stop: float) -> TwoStageDesign:
    """Stop after stage 1 with probability p_stop, independent of the data."""
    return TwoStageDesign(n1=n1, sigma=sigma, rule=CoinFlipRule(p_stop=p_stop, n2=n2))


def always_continue_design(n1: int, n2: int, sigma: float) -> TwoStageDesign:
    """Fixed-sample design of n1 + n2 draws expressed as a single continue cell."""
    rule = DecisionRule(cells=(DecisionCell(FULL_LINE, stop=False, n2=n2),))
    return TwoStageDesign(n1=n1, sigma=sigma, rule=rule)


def decide(design: TwoStageDesign, z1: float, coin: float | None = None) -> int:
    """Decision label for an observed interim statistic.

    Threshold rules ignore coin. A coin-flip rule needs coin in [0, 1) and
    stops when coin < p_stop.
    """
    if isinstance(design.rule, CoinFlipRule):
        if coin is None:
            raise ValueError("coin-flip rule needs a uniform draw to decide")
        return 1 if coin < design.rule.p_stop else 2
    if math.isnan(z1):
        raise ValueError("z1 is NaN")
    for d, cell in enumerate(design.rule.cells, start=1):
        if cell.z_region.contains(z1):
            return d
    raise AssertionError("validated cells tile the line; unreachable")


def _cell_for(design: TwoStageDesign, d: int) -> DecisionCell:
    if d not in design.decision_indices():
        raise InvalidDesign(f"decision {d} outside 1..{design.num_decisions}")
    assert isinstance(design.rule, DecisionRule)
    return design.rule.cells[d - 1]


def is_stop_decision(design: TwoStageDesign, d: int) -> bool:
    """Whether decision d ends the experiment after stage 1."""
    if isinstance(design.rule, CoinFlipRule):
        if d not in (1, 2):
            raise InvalidDesign(f"decision {d} outside 1..2")
        return d == 1
    return _cell_for(design, d).stop


def stage2_n(design: TwoStageDesign, d: int) -> int:
    """Second-stage sample size under decision d (0 when stopping)."""
    if isinstance(design.rule, CoinFlipRule):
        if d not in (1, 2):
            raise InvalidDesign(f"decision {d} outside 1..2")
        return 0 if d == 1 else design.rule.n2
    cell = _cell_for(design, d)
    return 0 if cell.stop else cell.n2


def n_total(design: TwoStageDesign, d: int) -> int:
    """Total sample size realized under decision d."""
    return design.n1 + stage2_n(design, d)


def max_stage2_n(design: TwoStageDesign) -> int:
    """Largest second-stage size over all decisions."""
    return max(stage2_n(design, d) for d in design.decision_indices())


def stage1_mean_region(design: TwoStageDesign, d: int) -> Interval:
    """Decision-d cell mapped from the z1 scale to the stage-1 mean scale.

    The stage-1 sample mean equals z1 * sigma / sqrt(n1), so cell bounds
    scale by that positive factor. A coin-flip decision constrains nothing,
    giving the full line for every d.
    """
    if isinstance(design.rule, CoinFlipRule):
        if d not in (1, 2):
            raise InvalidDesign(f"decision {d} outside 1..2")
        return FULL_LINE
    factor = design.sigma / math.sqrt(design.n1)
    return _cell_for(design, d).z_region.scaled(factor)


def format_design_config(design: TwoStageDesign) -> str:
    """Render a design in the key = value config dialect parse accepts."""
    lines = [f"n1 = {design.n1}", f"sigma = {design.sigma!r}"]
    if isinstance(design.rule, CoinFlipRule):
        lines.append(f"flip = {design.rule.p_stop!r}, continue: {design.rule.n2}")
    else:
        for cell in design.rule.cells:
            action = "stop" if cell.stop else f"continue: {cell.n2}"
            lines.append(f"cell = {cell.z_region.lo!r}, {cell.z_region.hi!r}, {action}")
    return "\n".join(lines) + "\n"


def parse_design_config(text: str) -> TwoStageDesign:
    """Parse the design config dialect.

    Grammar, one statement per line, '#' starts a comment:

        n1 = <int>
        sigma = <float>
        cell = <lo>, <hi>, stop
        cell = <lo>, <hi>, continue: <int>
        flip = <p_stop>, continue: <int>

    Cell bounds admit inf/-inf. A design uses either cell lines or a single
    flip line, never both. Round-trips with format_design_config.
    """
    n1: int | None = None
    sigma: float | None = None
    cells: list[DecisionCell] = []
    flip: CoinFlipRule | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidDesign(f"line {lineno}: expected key = value, got {raw!r}")
        key = key.strip()
        value = value.strip()
        if key == "n1":
            n1 = _parse_int(value, lineno, "n1")
        elif key == "sigma":
            sigma = _parse_float(value, lineno, "sigma")
        elif key == "cell":
            cells.append(_parse_cell(value, lineno))
        elif key == "flip":
            if flip is not None:
                raise InvalidDesign(f"line {lineno}: more than one flip line")
            flip = _parse_flip(value, lineno)
        else:
            raise InvalidDesign(f"line {lineno}: unknown key {key!r}")

    if n1 is None or sigma is None:
        raise InvalidDesign("config must set both n1 and sigma")
    if flip is not None and cells:
        raise InvalidDesign("config mixes flip and cell lines")
    if flip is not None:
        return TwoStageDesign(n1=n1, sigma=sigma, rule=flip)
    if not cells:
        raise InvalidDesign("config defines no decision rule")
    return TwoStageDesign(n1=n1, sigma=sigma, rule=DecisionRule(cells=tuple(cells)))


def _parse_int(value: str, lineno: int, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise InvalidDesign(f"line {lineno}: {name} must be an integer, got {value!r}") from None


def _parse_float(value: str, lineno: int, name: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise InvalidDesign(f"line {lineno}: {name} must be a number, got {value!r}") from None


def _parse_action(value: str, lineno: int) -> tuple[bool, int]:
    if value == "stop":
        return True, 0
    head, sep, tail = value.partition(":")
    if head.strip() == "continue" and sep:
        return False, _parse_int(tail.strip(), lineno, "n2")
    raise InvalidDesign(f"line {lineno}: action must be 'stop' or 'continue: <n2>', got {value!r}")


def _parse_cell(value: str, lineno: int) -> DecisionCell:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 3:
        raise InvalidDesign(f"line {lineno}: cell needs 'lo, hi, action', got {value!r}")
    lo = _parse_float(parts[0], lineno, "cell lo")
    hi = _parse_float(parts[1], lineno, "cell hi")
    stop, n2 = _parse_action(parts[2], lineno)
    return DecisionCell(Interval(lo, hi), stop=stop, n2=n2)


def _parse_flip(value: str, lineno: int) -> CoinFlipRule:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 2:
        raise InvalidDesign(f"line {lineno}: flip needs 'p_stop, continue: <n2>', got {value!r}")
    p_stop = _parse_float(parts[0], lineno, "p_stop")
    stop, n2 = _parse_action(parts[1], lineno)
    if stop:
        raise InvalidDesign(f"line {lineno}: flip line must name the continue branch size")
    return CoinFlipRule(p_stop=p_stop, n2=n2)
