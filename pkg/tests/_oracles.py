"""Quadrature oracles shared by the test modules.

These recompute truncated-normal quantities by numerical integration of the
conditional density, deliberately avoiding the closed forms under test. Deep
tail cells carry mass far below the quadrature's absolute tolerance, so the
raw density would integrate to a coarse estimate; normalizing by the
closed-form mass keeps the integrand O(1), and comparing the integral of the
normalized density against 1 still validates that mass independently.
"""

from __future__ import annotations

import math

from seqinfo.design import TwoStageDesign, stage1_mean_region
from seqinfo.mathcore import Interval, integrate, std_normal_pdf
from seqinfo.truncnorm import TruncatedNormal, mass


def conditional_window(mu: float, sigma: float, lo: float, hi: float) -> Interval:
    """Integration window covering all but ~e^-80 of the conditional mass."""
    lo = max(lo, mu - 40.0 * sigma)
    hi = min(hi, mu + 40.0 * sigma)
    alpha = (lo - mu) / sigma
    beta = (hi - mu) / sigma
    if alpha >= 1.0:
        hi = min(hi, lo + 80.0 * sigma / alpha)
    elif beta <= -1.0:
        lo = max(lo, hi - 80.0 * sigma / abs(beta))
    return Interval(lo, hi)


def conditional_moments(tn: TruncatedNormal) -> tuple[float, float, float]:
    """(integral of conditional density, mean, variance) by quadrature."""
    m = mass(tn)
    mu, sigma = tn.mu, tn.sigma

    def cond_pdf(x: float) -> float:
        return std_normal_pdf((x - mu) / sigma) / sigma / m

    window = conditional_window(mu, sigma, tn.region.lo, tn.region.hi)
    one = integrate(cond_pdf, window).value
    mean = integrate(lambda x: x * cond_pdf(x), window).value
    var = integrate(lambda x: (x - mean) ** 2 * cond_pdf(x), window).value
    return one, mean, var


def score_variance(design: TwoStageDesign, theta: float, d: int) -> float:
    """Var of the theta-score of the stage-1 mean's conditional density.

    The conditional law given decision d is a truncated normal with fixed
    absolute bounds, so this variance is the stage-1 information left after
    the decision is known. Self-normalizing: the score's mean is taken from
    the same quadrature rather than from any closed form.
    """
    region = stage1_mean_region(design, d)
    s1 = design.sigma / math.sqrt(design.n1)
    tn = TruncatedNormal(mu=theta, sigma=s1, region=region)
    m = mass(tn)

    def cond_pdf(y: float) -> float:
        return std_normal_pdf((y - theta) / s1) / s1 / m

    def score(y: float) -> float:
        return (y - theta) / (s1 * s1)

    window = conditional_window(theta, s1, region.lo, region.hi)
    norm = integrate(cond_pdf, window).value
    mean = integrate(lambda y: score(y) * cond_pdf(y), window).value / norm
    return integrate(lambda y: (score(y) - mean) ** 2 * cond_pdf(y), window).value / norm
