"""Conditional sampling densities of the maximum-likelihood estimator.

Given the decision, the MLE of theta is the mean of whatever data was
collected: the stage-1 mean when stopping, the pooled mean of both stages
when continuing. Its conditional law differs sharply between branches.

Stopping branch: the stage-1 mean restricted to the decision cell, a
truncated normal, with density phi((t-theta)/s1)/s1 over the cell divided by
the cell's probability under the untruncated stage-1 law.

Continuation branch: the pooled mean is a smoothed version of the truncated
stage-1 mean, because the independent stage-2 mean is mixed in. Writing y for
the stage-1 mean, s1 = sigma/sqrt(n1), s2 = sigma/sqrt(n2), N = n1 + n2,

    f(t | D=d) = (N/n2) * integral over the cell of
                 phi_s1(y - theta) phi_s2((N t - n1 y)/n2 - theta) dy
                 / P(cell)

which is evaluated by adaptive quadrature. The y-integrand is a Gaussian
bump centered exactly at y = t with sd sigma*sqrt(n2/(n1 N)); integration is
restricted to 12 of those sds intersected with the cell, far below the
quadrature tolerance in discarded mass.

The normalizer is always the probability of the stage-1 mean falling in the
cell: for a data-free coin-flip rule that cell is the whole line, the
normalizer is 1, and the coin's own probability cancels from the conditional
law entirely.

log_likelihood evaluates the joint normal log density of a pooled sample.
It deliberately takes no design argument: adaptive stopping multiplies the
likelihood by a theta-free indicator, so two designs that happen to produce
the same data share one likelihood function of theta.
"""

from __future__ import annotations

import math
from typing import Iterable

from .design import TwoStageDesign, is_stop_decision, stage1_mean_region, stage2_n
from .errors import InvalidDesign, InvalidOutcome
from .mathcore import (
    DEFAULT_QUADRATURE,
    Interval,
    QuadratureSettings,
    integrate,
    std_normal_interval_mass,
    std_normal_pdf,
)
from .truncnorm import TruncatedNormal, mass

__all__ = [
    "stop_mle_density",
    "continue_mle_density",
    "stop_mle_interval_mass",
    "continue_mle_interval_mass",
    "log_likelihood",
]

_LOG_2PI = math.log(2.0 * math.pi)
_WINDOW_SDS = 12.0
_RANGE_SDS = 40.0


def _resolve_decision(design: TwoStageDesign, d: int | None, want_stop: bool) -> int:
    kind = "stopping" if want_stop else "continuation"
    if d is None:
        for cand in design.decision_indices():
            if is_stop_decision(design, cand) == want_stop:
                return cand
        raise InvalidDesign(f"design has no {kind} decision")
    if is_stop_decision(design, d) != want_stop:
        raise InvalidDesign(f"decision {d} is not a {kind} decision")
    return d


def _branch_mass(design: TwoStageDesign, theta: float, region: Interval) -> float:
    """Probability of the stage-1 mean landing in region (1 when unrestricted)."""
    if region.is_full_line:
        return 1.0
    scale = design.sigma / math.sqrt(design.n1)
    return mass(TruncatedNormal(mu=theta, sigma=scale, region=region))


def stop_mle_density(design: TwoStageDesign, theta: float, t: float, d: int | None = None) -> float:
    """Conditional density of the MLE at t given a stopping decision.

    d defaults to the design's first stopping decision.
    """
    d = _resolve_decision(design, d, want_stop=True)
    region = stage1_mean_region(design, d)
    if not region.contains(t):
        return 0.0
    s1 = design.sigma / math.sqrt(design.n1)
    return std_normal_pdf((t - theta) / s1) / s1 / _branch_mass(design, theta, region)


def continue_mle_density(
    design: TwoStageDesign,
    theta: float,
    t: float,
    d: int | None = None,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> float:
    """Conditional density of the MLE at t given a continuation decision.

    d defaults to the design's first continuation decision.
    """
    d = _resolve_decision(design, d, want_stop=False)
    region = stage1_mean_region(design, d)
    n1 = design.n1
    n2 = stage2_n(design, d)
    n_pooled = n1 + n2
    s1 = design.sigma / math.sqrt(n1)
    s2 = design.sigma / math.sqrt(n2)
    bump_sd = design.sigma * math.sqrt(n2 / (n1 * n_pooled))
    lo = max(region.lo, t - _WINDOW_SDS * bump_sd)
    hi = min(region.hi, t + _WINDOW_SDS * bump_sd)
    if not lo < hi:
        return 0.0

    def integrand(y: float) -> float:
        stage2_mean = (n_pooled * t - n1 * y) / n2
        return (
            std_normal_pdf((y - theta) / s1)
            / s1
            * std_normal_pdf((stage2_mean - theta) / s2)
            / s2
        )

    value = integrate(integrand, Interval(lo, hi), settings).value
    return (n_pooled / n2) * value / _branch_mass(design, theta, region)


def stop_mle_interval_mass(
    design: TwoStageDesign, theta: float, lo: float, hi: float, d: int | None = None
) -> float:
    """Conditional probability that the MLE lands in [lo, hi) when stopping."""
    d = _resolve_decision(design, d, want_stop=True)
    region = stage1_mean_region(design, d)
    a = max(lo, region.lo)
    b = min(hi, region.hi)
    if not a < b:
        return 0.0
    s1 = design.sigma / math.sqrt(design.n1)
    numer = std_normal_interval_mass((a - theta) / s1, (b - theta) / s1)
    return numer / _branch_mass(design, theta, region)


def continue_mle_interval_mass(
    design: TwoStageDesign,
    theta: float,
    lo: float,
    hi: float,
    d: int | None = None,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> float:
    """Conditional probability that the MLE lands in [lo, hi) when continuing.

    Integrates, over the stage-1 mean y in the decision cell, the normal
    probability that the pooled mean falls in [lo, hi) given y; this is a
    single smooth quadrature rather than a nested one.
    """
    if not lo < hi:
        return 0.0
    d = _resolve_decision(design, d, want_stop=False)
    region = stage1_mean_region(design, d)
    n1 = design.n1
    n2 = stage2_n(design, d)
    n_pooled = n1 + n2
    s1 = design.sigma / math.sqrt(n1)
    # pooled mean given y is N((n1 y + n2 theta)/N, n2 sigma^2 / N^2)
    st = math.sqrt(n2) * design.sigma / n_pooled
    ylo = max(region.lo, theta - _RANGE_SDS * s1)
    yhi = min(region.hi, theta + _RANGE_SDS * s1)
    if not ylo < yhi:
        return 0.0

    def integrand(y: float) -> float:
        mu_t = (n1 * y + n2 * theta) / n_pooled
        return (
            std_normal_pdf((y - theta) / s1)
            / s1
            * std_normal_interval_mass((lo - mu_t) / st, (hi - mu_t) / st)
        )

    value = integrate(integrand, Interval(ylo, yhi), settings).value
    return value / _branch_mass(design, theta, region)


def log_likelihood(sample: Iterable[float], theta: float, sigma: float) -> float:
    """Joint log density of a pooled sample under N(theta, sigma^2).

    Design-free on purpose: the stopping rule contributes only a theta-free
    factor to the likelihood, so this function is shared by every design
    that could have produced the sample.
    """
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive and finite, got {sigma!r}")
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta!r}")
    terms = []
    for value in sample:
        x = float(value)
        if not math.isfinite(x):
            raise InvalidOutcome(f"sample contains a non-finite value: {value!r}")
        z = (x - theta) / sigma
        terms.append(-0.5 * z * z)
    if not terms:
        raise InvalidOutcome("sample is empty")
    n = len(terms)
    return math.fsum(terms) - n * (math.log(sigma) + 0.5 * _LOG_2PI)
