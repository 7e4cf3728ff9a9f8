"""Mean-squared-error lower bounds under a data-dependent stopping rule.

Conditioning on the interim decision changes both the information and the
bias of an estimator, so the fixed-sample Cramer-Rao bound applies branch by
branch. For an estimator with conditional bias b_d(theta) given decision d,

    MSE(theta | D=d) >= (1 + b_d'(theta))^2 / I_{X_T|D=d}(theta) + b_d(theta)^2

and the unconditional bound is the probability-weighted average of the
conditional ones. The default estimator is the maximum-likelihood estimator
of theta, the mean of all observations actually collected; its conditional
bias has a closed form through the truncated-normal mean, and it attains the
conditional bound exactly, because for a truncated location family
(1 + b')^2 equals conditional variance times conditional information.

Custom estimators enter through bias(design, theta, d) and optional
bias_dtheta callables; a missing derivative falls back to a central
difference in theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .design import TwoStageDesign, is_stop_decision, n_total, stage1_mean_region
from .errors import DegenerateTruncation, ZeroInformation
from .information import (
    NEGLIGIBLE_PROBABILITY,
    conditional_total_information,
    decision_probability,
)
from .mathcore import central_diff
from .truncnorm import TruncatedNormal, trunc_mean, trunc_mean_dmu

__all__ = [
    "BiasFn",
    "DecisionBound",
    "MseBoundReport",
    "classical_crlb",
    "mle_conditional_bias",
    "mle_conditional_bias_dtheta",
    "conditional_mse_bound",
    "unconditional_mse_bound",
    "mse_bound_report",
]

BiasFn = Callable[[TwoStageDesign, float, int], float]


@dataclass(frozen=True)
class DecisionBound:
    """Bound ingredients for one decision branch at a fixed theta."""

    d: int
    stop: bool
    n_total: int
    probability: float
    bias: float
    bias_dtheta: float
    information: float
    bound: float
    degenerate: bool


@dataclass(frozen=True)
class MseBoundReport:
    """Per-decision bounds plus their probability-weighted average.

    unconditional_bound covers only non-degenerate branches; decisions whose
    probability fell below the negligibility cutoff are listed in dropped.
    """

    design: TwoStageDesign
    theta: float
    per_decision: tuple[DecisionBound, ...]
    unconditional_bound: float
    dropped: tuple[int, ...]

    def __post_init__(self) -> None:
        acc = sum(
            row.probability * row.bound for row in self.per_decision if not row.degenerate
        )
        if not abs(acc - self.unconditional_bound) < 1e-12:
            raise AssertionError(
                f"unconditional bound {self.unconditional_bound!r} does not match "
                f"the weighted per-decision sum {acc!r}"
            )


def classical_crlb(
    n: int,
    sigma: float,
    theta: float | None = None,
    bias: Callable[[float], float] | None = None,
) -> float:
    """Fixed-sample-size Cramer-Rao bound for n draws of N(theta, sigma^2).

    Without a bias function this is sigma^2/n. With one, the biased-estimator
    form (1 + b'(theta))^2 sigma^2/n + b(theta)^2 is evaluated at theta, the
    derivative taken by central difference.
    """
    if not (isinstance(n, int) and n >= 1):
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive and finite, got {sigma!r}")
    base = sigma * sigma / n
    if bias is None:
        return base
    if theta is None:
        raise ValueError("theta is required when a bias function is given")
    b = bias(theta)
    db = central_diff(bias, theta)
    return (1.0 + db) ** 2 * base + b * b


def _mle_truncation(design: TwoStageDesign, theta: float, d: int) -> TruncatedNormal | None:
    """Truncated stage-1 mean behind the MLE bias, or None when untruncated."""
    region = stage1_mean_region(design, d)
    if region.is_full_line:
        return None
    return TruncatedNormal(mu=theta, sigma=design.sigma / math.sqrt(design.n1), region=region)


def _stage1_weight(design: TwoStageDesign, d: int) -> float:
    """Share of the pooled mean contributed by stage 1 under decision d."""
    return design.n1 / n_total(design, d)


def mle_conditional_bias(design: TwoStageDesign, theta: float, d: int) -> float:
    """E[theta_hat - theta | D=d] for the pooled-mean MLE.

    Only the stage-1 portion is biased by the conditioning, so the bias is
    the truncated-mean shift scaled by stage 1's weight n1/n_total(d) in the
    pooled mean (weight 1 when stopping).
    """
    tn = _mle_truncation(design, theta, d)
    if tn is None:
        return 0.0
    return _stage1_weight(design, d) * (trunc_mean(tn) - theta)


def mle_conditional_bias_dtheta(design: TwoStageDesign, theta: float, d: int) -> float:
    """Derivative in theta of the conditional MLE bias, in closed form."""
    tn = _mle_truncation(design, theta, d)
    if tn is None:
        return 0.0
    return _stage1_weight(design, d) * (trunc_mean_dmu(tn) - 1.0)


def _bias_pair(
    design: TwoStageDesign,
    theta: float,
    d: int,
    bias: BiasFn | None,
    bias_dtheta: BiasFn | None,
) -> tuple[float, float]:
    if bias is None:
        if bias_dtheta is not None:
            raise ValueError("bias_dtheta was given without its bias function")
        return (
            mle_conditional_bias(design, theta, d),
            mle_conditional_bias_dtheta(design, theta, d),
        )
    b = bias(design, theta, d)
    if bias_dtheta is not None:
        return b, bias_dtheta(design, theta, d)
    return b, central_diff(lambda t: bias(design, t, d), theta)


def conditional_mse_bound(
    design: TwoStageDesign,
    theta: float,
    d: int,
    bias: BiasFn | None = None,
    bias_dtheta: BiasFn | None = None,
) -> float:
    """Sequential Cramer-Rao bound on MSE(theta | D=d)."""
    info = conditional_total_information(design, theta, d)
    if not info > 0.0:
        raise ZeroInformation(
            f"conditional information {info!r} for decision {d} admits no finite bound"
        )
    b, db = _bias_pair(design, theta, d, bias, bias_dtheta)
    return (1.0 + db) ** 2 / info + b * b


def unconditional_mse_bound(
    design: TwoStageDesign,
    theta: float,
    bias: BiasFn | None = None,
    bias_dtheta: BiasFn | None = None,
) -> float:
    """Probability-weighted average of the conditional bounds."""
    return mse_bound_report(design, theta, bias=bias, bias_dtheta=bias_dtheta).unconditional_bound


def mse_bound_report(
    design: TwoStageDesign,
    theta: float,
    bias: BiasFn | None = None,
    bias_dtheta: BiasFn | None = None,
) -> MseBoundReport:
    """Per-decision bound table plus the unconditional average."""
    rows: list[DecisionBound] = []
    dropped: list[int] = []
    acc = 0.0
    for d in design.decision_indices():
        prob = decision_probability(design, theta, d)
        degenerate = prob < NEGLIGIBLE_PROBABILITY
        try:
            info = conditional_total_information(design, theta, d)
            b, db = _bias_pair(design, theta, d, bias, bias_dtheta)
            bound = (1.0 + db) ** 2 / info if info > 0.0 else math.inf
            bound += b * b
        except DegenerateTruncation:
            info, b, db, bound = math.nan, math.nan, math.nan, math.nan
        rows.append(
            DecisionBound(
                d=d,
                stop=is_stop_decision(design, d),
                n_total=n_total(design, d),
                probability=prob,
                bias=b,
                bias_dtheta=db,
                information=info,
                bound=bound,
                degenerate=degenerate,
            )
        )
        if degenerate:
            dropped.append(d)
        else:
            acc += prob * bound
    return MseBoundReport(
        design=design,
        theta=theta,
        per_decision=tuple(rows),
        unconditional_bound=acc,
        dropped=tuple(dropped),
    )
