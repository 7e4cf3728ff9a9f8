"""Fisher information decomposition for two-stage adaptive designs.

Let D be the interim decision and X_T the pooled data from both stages. The
stage-1 information n1/sigma^2 splits exactly into the information carried by
the decision itself,

    I_D(theta) = sum_d P_d'(theta)^2 / P_d(theta),

and the average information left in the stage-1 data once the decision is
known, sum_d P_d * I_{X1|D=d}. Adding the second-stage contribution
n2(d)/sigma^2 of each continuation branch gives the total

    I_total(theta) = n1/sigma^2 + sum_d P_d(theta) * n2(d)/sigma^2
                   = I_D(theta) + I_{X_T|D}(theta).

Conditional on D=d the stage-1 sample mean is a normal truncated to the
decision cell, so each I_{X1|D=d} is a truncated-normal Fisher information.
Decisions with probability below NEGLIGIBLE_PROBABILITY are dropped from the
probability-weighted averages and reported as such; a dropped decision whose
probability derivative is not itself negligible would make I_D blow up, which
is refused loudly (DegenerateDecision) rather than silently truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .design import (
    CoinFlipRule,
    TwoStageDesign,
    is_stop_decision,
    n_total,
    stage1_mean_region,
    stage2_n,
)
from .errors import DegenerateDecision, DegenerateTruncation, InvalidDesign
from .mathcore import std_normal_interval_mass, std_normal_pdf
from .truncnorm import TruncatedNormal, trunc_fisher_info

__all__ = [
    "NEGLIGIBLE_PROBABILITY",
    "DecisionInformation",
    "InformationBreakdown",
    "decision_probability",
    "decision_probability_dtheta",
    "design_information",
    "conditional_stage1_information",
    "conditional_stage2_information",
    "conditional_total_information",
    "total_information",
    "information_breakdown",
]

NEGLIGIBLE_PROBABILITY = 1e-12


@dataclass(frozen=True)
class DecisionInformation:
    """Information ledger for one decision branch at a fixed theta."""

    d: int
    stop: bool
    n_total: int
    probability: float
    probability_dtheta: float
    stage1_information: float
    stage2_information: float
    total_information: float
    degenerate: bool


@dataclass(frozen=True)
class InformationBreakdown:
    """Everything the decomposition yields at one theta.

    conditional_stage1 and conditional_total are the probability-weighted
    averages over decisions, excluding degenerate (near-zero probability)
    branches, whose labels appear in dropped.
    """

    theta: float
    design_information: float
    conditional_stage1: float
    conditional_total: float
    total_information: float
    per_decision: tuple[DecisionInformation, ...]
    dropped: tuple[int, ...]


def _standardized_cell(design: TwoStageDesign, theta: float, d: int) -> tuple[float, float]:
    """Decision-d z-cell bounds shifted so z1 is standard normal."""
    assert not isinstance(design.rule, CoinFlipRule)
    cell = design.rule.cells[d - 1].z_region
    m = math.sqrt(design.n1) * theta / design.sigma
    return cell.lo - m, cell.hi - m


def decision_probability(design: TwoStageDesign, theta: float, d: int) -> float:
    """P_d(theta), the chance the interim rule picks decision d."""
    if isinstance(design.rule, CoinFlipRule):
        _check_decision(design, d)
        return design.rule.p_stop if d == 1 else 1.0 - design.rule.p_stop
    _check_decision(design, d)
    return std_normal_interval_mass(*_standardized_cell(design, theta, d))


def decision_probability_dtheta(design: TwoStageDesign, theta: float, d: int) -> float:
    """d P_d / d theta; identically zero for data-free coin-flip rules."""
    if isinstance(design.rule, CoinFlipRule):
        _check_decision(design, d)
        return 0.0
    _check_decision(design, d)
    alpha, beta = _standardized_cell(design, theta, d)
    pa = std_normal_pdf(alpha) if math.isfinite(alpha) else 0.0
    pb = std_normal_pdf(beta) if math.isfinite(beta) else 0.0
    return (math.sqrt(design.n1) / design.sigma) * (pa - pb)


def design_information(design: TwoStageDesign, theta: float) -> float:
    """I_D(theta) = sum_d P_d'^2 / P_d over non-negligible decisions."""
    total = 0.0
    for d, prob, dprob in _decision_stats(design, theta):
        if prob < NEGLIGIBLE_PROBABILITY:
            continue
        total += dprob * dprob / prob
    return total


def conditional_stage1_information(design: TwoStageDesign, theta: float, d: int) -> float:
    """I_{X1|D=d}(theta): stage-1 information left once decision d is known.

    The stage-1 sample mean given D=d is N(theta, sigma^2/n1) truncated to
    the decision cell mapped onto the mean scale, and the whole stage-1
    sample carries exactly the Fisher information of that truncated mean.
    """
    region = stage1_mean_region(design, d)
    base = design.n1 / (design.sigma * design.sigma)
    if region.is_full_line:
        return base
    scale = design.sigma / math.sqrt(design.n1)
    tn = TruncatedNormal(mu=theta, sigma=scale, region=region)
    return trunc_fisher_info(tn)


def conditional_stage2_information(design: TwoStageDesign, d: int) -> float:
    """n2(d)/sigma^2: second-stage information, the same at every theta."""
    return stage2_n(design, d) / (design.sigma * design.sigma)


def conditional_total_information(design: TwoStageDesign, theta: float, d: int) -> float:
    """I_{X_T|D=d}(theta) for the pooled sample under decision d."""
    return conditional_stage1_information(design, theta, d) + conditional_stage2_information(
        design, d
    )


def total_information(design: TwoStageDesign, theta: float) -> float:
    """I_total(theta) = n1/sigma^2 + sum_d P_d(theta) n2(d)/sigma^2."""
    s2 = design.sigma * design.sigma
    total = design.n1 / s2
    for d in design.decision_indices():
        n2 = stage2_n(design, d)
        if n2:
            total += decision_probability(design, theta, d) * n2 / s2
    return total


def information_breakdown(design: TwoStageDesign, theta: float) -> InformationBreakdown:
    """Full per-decision information table plus the aggregate quantities."""
    rows: list[DecisionInformation] = []
    dropped: list[int] = []
    i_design = 0.0
    cond_stage1 = 0.0
    cond_total = 0.0
    for d, prob, dprob in _decision_stats(design, theta):
        degenerate = prob < NEGLIGIBLE_PROBABILITY
        try:
            info1 = conditional_stage1_information(design, theta, d)
        except DegenerateTruncation:
            info1 = math.nan
        info2 = conditional_stage2_information(design, d)
        rows.append(
            DecisionInformation(
                d=d,
                stop=is_stop_decision(design, d),
                n_total=n_total(design, d),
                probability=prob,
                probability_dtheta=dprob,
                stage1_information=info1,
                stage2_information=info2,
                total_information=info1 + info2,
                degenerate=degenerate,
            )
        )
        if degenerate:
            dropped.append(d)
            continue
        i_design += dprob * dprob / prob
        cond_stage1 += prob * info1
        cond_total += prob * (info1 + info2)
    return InformationBreakdown(
        theta=theta,
        design_information=i_design,
        conditional_stage1=cond_stage1,
        conditional_total=cond_total,
        total_information=total_information(design, theta),
        per_decision=tuple(rows),
        dropped=tuple(dropped),
    )


def _check_decision(design: TwoStageDesign, d: int) -> None:
    if d not in design.decision_indices():
        raise InvalidDesign(f"decision {d} outside 1..{design.num_decisions}")


def _decision_stats(design: TwoStageDesign, theta: float) -> list[tuple[int, float, float]]:
    """(d, P_d, P_d') for every decision, enforcing the degeneracy contract."""
    stats = []
    for d in design.decision_indices():
        prob = decision_probability(design, theta, d)
        dprob = decision_probability_dtheta(design, theta, d)
        if prob < NEGLIGIBLE_PROBABILITY and abs(dprob) >= NEGLIGIBLE_PROBABILITY:
            raise DegenerateDecision(
                f"decision {d} has probability {prob:.3e} but derivative "
                f"{dprob:.3e}; its design-information share is unbounded"
            )
        stats.append((d, prob, dprob))
    return stats
