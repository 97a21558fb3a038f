"""Sceptical priors, Box conflict tests and p-values for credibility.

Effects are assumed to point away from zero in one direction. Negative
estimates and intervals are reflected to the positive side on entry, so every
formula below only ever sees ``t > 0``.
"""

from dataclasses import asdict, dataclass
import math

import numpy as np

from .effects import ConfidenceInterval, EffectEstimate, estimate_to_ci, p_value
from .errors import DomainError, NoSolutionError, NotSignificantError
from .numerics import (
    DEFAULT_TOLERANCE,
    chi_sq1_tail,
    find_root_monotone,
    two_sided_p,
    z_half,
)

#: Largest credibility ratio U/L at which a result is still intrinsically credible.
CREDIBILITY_RATIO_BOUND = 3.0 + 2.0 * math.sqrt(2.0)

#: Multiplier of ``z_{alpha/2}`` in Matthews' intrinsic credibility rule.
MATTHEWS_FACTOR = 1.272


@dataclass(frozen=True)
class ScepticalPrior:
    """Zero-mean normal prior that makes the posterior just non-significant.

    ``[-sceptical_limit, sceptical_limit]`` is the equi-tailed prior credible
    interval at level ``1 - alpha``, the critical prior interval.
    """

    variance: float
    alpha: float
    sceptical_limit: float

    def __post_init__(self):
        if not self.variance > 0:
            raise DomainError("prior variance must be positive")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        expected = z_half(self.alpha) * math.sqrt(self.variance)
        if abs(expected - self.sceptical_limit) > 1e-10 * max(1.0, expected):
            raise DomainError("sceptical limit inconsistent with prior variance")

    @property
    def sd(self):
        return math.sqrt(self.variance)

    @property
    def critical_interval(self):
        return (-self.sceptical_limit, self.sceptical_limit)


def _positive_limits(ci):
    lo, hi = ci.lower, ci.upper
    if lo * hi <= 0:
        raise NotSignificantError(
            f"interval ({lo:g}, {hi:g}) includes zero; no sceptical prior exists"
        )
    if hi < 0:
        lo, hi = -hi, -lo
    return lo, hi


def sceptical_limit(ci):
    """Half-width ``S = (U - L)^2 / (4 sqrt(UL))`` of the critical prior interval."""
    lo, hi = _positive_limits(ci)
    return (hi - lo) ** 2 / (4.0 * math.sqrt(hi * lo))


def sceptical_variance(est, alpha):
    """Variance of the sceptical prior for ``est`` at significance level ``alpha``."""
    z = z_half(alpha)
    t = est.t
    ratio = (t / z) ** 2
    if ratio <= 1.0:
        raise NotSignificantError(f"t = {t:.4g} is not significant at alpha = {alpha:g}")
    return est.se ** 2 / (ratio - 1.0)


def sceptical_prior(est, alpha):
    tau2 = sceptical_variance(est, alpha)
    return ScepticalPrior(tau2, alpha, z_half(alpha) * math.sqrt(tau2))


def box_test(external, prior):
    """Box's prior-predictive check of ``external`` against a sceptical prior.

    Returns ``(t_box, p_box)``. A small ``p_box`` signals conflict between the
    prior and the external data, i.e. evidence for credibility.
    """
    stat = external.theta_hat / math.sqrt(prior.variance + external.se ** 2)
    return stat, chi_sq1_tail(stat * stat)


def compatibility_test(internal, external):
    """Ordinary test of agreement between two estimates; returns ``(statistic, tail)``."""
    stat = (external.theta_hat - internal.theta_hat) / math.sqrt(
        internal.se ** 2 + external.se ** 2
    )
    return stat, chi_sq1_tail(stat * stat)


def _extrinsic_gap(z, t2, t02, c):
    u = 1.0 / (z * z)
    return (t02 * u - 1.0) * (t2 * u - 1.0) - c


def extrinsic_p(t, t0, c, tol=DEFAULT_TOLERANCE):
    """p-value for extrinsic credibility.

    Solves ``(t0^2/z^2 - 1)(t^2/z^2 - 1) = c`` for the critical value ``z`` on
    ``(0, min(|t|, |t0|))`` and returns ``p_E = 2(1 - Phi(z))``. Works
    elementwise on arrays.

    Raises
    ------
    NoSolutionError
        If ``t`` or ``t0`` is zero: the equation then has no root below one.
    """
    scalar = all(np.ndim(v) == 0 for v in (t, t0, c))
    t, t0, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (t, t0, c)))
    if np.any(~np.isfinite(t) | ~np.isfinite(t0)):
        raise DomainError("test statistics must be finite")
    if np.any(~(c > 0)) or np.any(~np.isfinite(c)):
        raise DomainError("variance ratio c must be positive and finite")
    at, at0 = np.abs(t), np.abs(t0)
    if np.any(at == 0) or np.any(at0 == 0):
        raise NoSolutionError("p_E has no solution below 1 when t or t0 is zero")

    t2, t02 = at * at, at0 * at0
    hi = np.minimum(at, at0)
    lo = hi * 1e-12
    z = find_root_monotone(lambda x: _extrinsic_gap(x, t2, t02, c), lo, hi, tol)
    # the root sits strictly below min(|t|, |t0|); keep that visible after rounding
    floor = np.nextafter(two_sided_p(hi), 1.0)
    p_e = np.maximum(two_sided_p(np.asarray(z)), floor)
    return float(p_e) if scalar else p_e


def matthews_extrinsic_credible(t, t0, c, alpha):
    """Matthews' check that the external estimate lies outside the critical prior interval."""
    z2 = z_half(alpha) ** 2
    if t * t <= z2:
        raise NotSignificantError(f"t = {t:.4g} is not significant at alpha = {alpha:g}")
    return bool((t0 * t0 / z2) * (t * t / z2 - 1.0) >= c)


def intrinsic_threshold(alpha):
    """Largest ordinary p-value at which a result is intrinsically credible at ``alpha``."""
    return two_sided_p(math.sqrt(2.0) * np.asarray(z_half(alpha)))


def matthews_intrinsic_threshold(alpha):
    return two_sided_p(MATTHEWS_FACTOR * np.asarray(z_half(alpha)))


def intrinsic_p(p):
    """p-value for intrinsic credibility, ``2(1 - Phi(t/sqrt(2)))`` with ``t`` the z-value of ``p``."""
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0) & (arr <= 1)):
        raise DomainError("p must lie in (0, 1]")
    t = np.zeros_like(arr)
    inner = arr < 1
    t[inner] = z_half(arr[inner])
    p_i = two_sided_p(t / math.sqrt(2.0))
    return float(p_i) if np.ndim(p) == 0 else p_i


def credibility_ratio_credible(ci):
    """Return ``(U/L, U/L <= 3 + 2 sqrt(2))``, using ``L/U`` for negative intervals."""
    lo, hi = _positive_limits(ci)
    ratio = hi / lo
    return ratio, bool(ratio <= CREDIBILITY_RATIO_BOUND)


def intrinsically_credible_by_variance(est, alpha):
    """True when the sceptical prior is no wider than the likelihood (``tau^2 <= sigma^2``)."""
    try:
        tau2 = sceptical_variance(est, alpha)
    except NotSignificantError:
        return False
    return bool(tau2 <= est.se ** 2)


@dataclass(frozen=True)
class CredibilityReport:
    """Everything the analysis produces for one internal study and optional external evidence."""

    p: float
    p_intrinsic: float
    level: float
    intrinsically_credible_at: bool
    credibility_ratio: float | None
    ratio_credible: bool
    p_extrinsic: float | None = None
    p_box: float | None = None
    t_box: float | None = None
    p_external: float | None = None
    variance_ratio_c: float | None = None

    def to_dict(self):
        return asdict(self)


def credibility_report(internal, external=None, level=0.95):
    """Bundle the intrinsic analysis of ``internal`` and, if given, the extrinsic one."""
    alpha = 1.0 - level
    p = p_value(internal)
    ci = estimate_to_ci(internal, level)
    significant = ci.lower * ci.upper > 0
    ratio, ratio_ok = credibility_ratio_credible(ci) if significant else (None, False)
    fields = dict(
        p=p,
        p_intrinsic=intrinsic_p(p),
        level=level,
        intrinsically_credible_at=intrinsically_credible_by_variance(internal, alpha),
        credibility_ratio=ratio,
        ratio_credible=ratio_ok,
    )
    if external is not None:
        c = internal.se ** 2 / external.se ** 2
        fields.update(p_external=p_value(external), variance_ratio_c=c)
        try:
            fields["p_extrinsic"] = extrinsic_p(internal.t, external.t, c)
        except NoSolutionError:
            pass
        if significant:
            t_box, p_box = box_test(external, sceptical_prior(internal, alpha))
            fields.update(t_box=t_box, p_box=p_box)
    return CredibilityReport(**fields)


__all__ = [
    "CREDIBILITY_RATIO_BOUND",
    "MATTHEWS_FACTOR",
    "ScepticalPrior",
    "CredibilityReport",
    "sceptical_limit",
    "sceptical_variance",
    "sceptical_prior",
    "box_test",
    "compatibility_test",
    "extrinsic_p",
    "matthews_extrinsic_credible",
    "intrinsic_threshold",
    "matthews_intrinsic_threshold",
    "intrinsic_p",
    "credibility_ratio_credible",
    "intrinsically_credible_by_variance",
    "credibility_report",
    "ConfidenceInterval",
    "EffectEstimate",
]
