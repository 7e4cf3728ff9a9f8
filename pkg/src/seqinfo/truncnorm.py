"""Moments and Fisher information of an interval-truncated normal.

For X ~ N(mu, sigma^2) conditioned on X in [a, b], write alpha = (a-mu)/sigma,
beta = (b-mu)/sigma and A = Phi(beta) - Phi(alpha). The classical closed forms
are

    E[X]   = mu + sigma * (phi(alpha) - phi(beta)) / A
    Var[X] = sigma^2 * [1 - (beta phi(beta) - alpha phi(alpha))/A
                          - ((phi(alpha) - phi(beta))/A)^2]

and, because this is a location family in mu with fixed absolute bounds, the
Fisher information about mu in one truncated observation equals Var[X]/sigma^4
(the score is (X-mu)/sigma^2 shifted by a constant), and the derivative of the
truncated mean in mu equals Var[X]/sigma^2.

The formulas above are evaluated in tail-stable form. Cells sitting in the
lower tail are reflected into the upper tail first; one-sided upper cells use
the Mills ratio (hazard_upper); finite cells that start deep in the upper tail
(alpha >= 8) factor the common exp(-alpha^2/2) out of every term through the
scaled complementary error function, so the ratios phi/A never form an
underflowing numerator or denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erfcx as _erfcx

from .errors import DegenerateTruncation
from .mathcore import Interval, std_normal_pdf, std_normal_sf, hazard_upper

__all__ = [
    "TruncatedNormal",
    "mass",
    "trunc_mean",
    "trunc_var",
    "trunc_fisher_info",
    "trunc_mean_dmu",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)
_MIN_MASS = 1e-300
_DEEP_TAIL = 8.0


@dataclass(frozen=True)
class TruncatedNormal:
    """N(mu, sigma^2) truncated to region (absolute bounds)."""

    mu: float
    sigma: float
    region: Interval

    def __post_init__(self) -> None:
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")
        # Reject truncations whose probability mass underflows; conditional
        # moments are meaningless there.
        m, _, _ = _std_cell_moments(*self._standardized())
        if m < _MIN_MASS:
            raise DegenerateTruncation(
                f"truncation mass {m:.3e} below {_MIN_MASS:g} for "
                f"mu={self.mu}, sigma={self.sigma}, region=[{self.region.lo}, {self.region.hi})"
            )

    def _standardized(self) -> tuple[float, float]:
        alpha = (self.region.lo - self.mu) / self.sigma
        beta = (self.region.hi - self.mu) / self.sigma
        return alpha, beta


def _upper_cell_moments(alpha: float, beta: float) -> tuple[float, float, float]:
    """Moment ingredients for a standardized cell with alpha + beta >= 0.

    Returns (A, E, F) where A is the cell mass, E = (phi(alpha)-phi(beta))/A
    and F = (beta phi(beta) - alpha phi(alpha))/A.
    """
    if math.isinf(beta):
        h = hazard_upper(alpha)
        return std_normal_sf(alpha), h, -alpha * h
    if alpha >= _DEEP_TAIL:
        # Factor phi(alpha) out of A so no individual term underflows:
        # A = phi(alpha) * G with G = sqrt(pi/2) * (erfcx(a/s2) - q*erfcx(b/s2))
        # and q = phi(beta)/phi(alpha) <= 1 on this branch.
        expo = 0.5 * (beta - alpha) * (beta + alpha)
        q = math.exp(-expo) if expo < 745.0 else 0.0
        g = _SQRT_PI_OVER_2 * (float(_erfcx(alpha / _SQRT2)) - q * float(_erfcx(beta / _SQRT2)))
        return std_normal_pdf(alpha) * g, (1.0 - q) / g, (beta * q - alpha) / g
    a_mass = std_normal_sf(alpha) - std_normal_sf(beta)
    if a_mass <= 0.0:
        return 0.0, math.nan, math.nan
    pa = std_normal_pdf(alpha)
    pb = std_normal_pdf(beta)
    return a_mass, (pa - pb) / a_mass, (beta * pb - alpha * pa) / a_mass


def _std_cell_moments(alpha: float, beta: float) -> tuple[float, float, float]:
    """(mass, E, F) for any standardized cell; reflects lower-tail cells."""
    if math.isinf(alpha) and math.isinf(beta):
        return 1.0, 0.0, 0.0
    if alpha + beta >= 0.0:
        return _upper_cell_moments(alpha, beta)
    m, e, f = _upper_cell_moments(-beta, -alpha)
    return m, -e, f  # mean ingredient flips sign under reflection, F is invariant


def mass(tn: TruncatedNormal) -> float:
    """Probability that N(mu, sigma^2) lands in the truncation region."""
    m, _, _ = _std_cell_moments(*tn._standardized())
    if m < _MIN_MASS:
        raise DegenerateTruncation(f"truncation mass underflowed ({m:.3e})")
    return min(m, 1.0)


def trunc_mean(tn: TruncatedNormal) -> float:
    """Conditional mean; always strictly inside the truncation interval."""
    _, e, _ = _checked_moments(tn)
    return tn.mu + tn.sigma * e


def trunc_var(tn: TruncatedNormal) -> float:
    """Conditional variance; at most sigma^2 for one-sided truncation."""
    _, e, f = _checked_moments(tn)
    return tn.sigma * tn.sigma * (1.0 - f - e * e)


def trunc_fisher_info(tn: TruncatedNormal) -> float:
    """Fisher information about mu in one truncated observation.

    With fixed absolute bounds the truncated-normal score in mu is
    (x - mu)/sigma^2 minus its conditional mean, so the information equals
    the conditional variance divided by sigma^4. For sigma=1 this is
    numerically identical to trunc_var.
    """
    s2 = tn.sigma * tn.sigma
    return trunc_var(tn) / (s2 * s2)


def trunc_mean_dmu(tn: TruncatedNormal) -> float:
    """Derivative of trunc_mean with respect to mu, absolute bounds fixed.

    Equals trunc_var/sigma^2 exactly; kept as its own operation because bias
    derivatives downstream are phrased in terms of it.
    """
    return trunc_var(tn) / (tn.sigma * tn.sigma)


def _checked_moments(tn: TruncatedNormal) -> tuple[float, float, float]:
    m, e, f = _std_cell_moments(*tn._standardized())
    if m < _MIN_MASS or math.isnan(e) or math.isnan(f):
        raise DegenerateTruncation(f"truncation mass underflowed ({m:.3e})")
    return m, e, f
