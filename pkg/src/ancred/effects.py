"""Study summaries on the additive (log) scale and conversions between them."""

from dataclasses import dataclass
import math

from .errors import DegenerateTableError, DomainError
from .numerics import two_sided_p, z_half


@dataclass(frozen=True)
class EffectEstimate:
    """Point estimate and standard error, e.g. of a log relative risk."""

    theta_hat: float
    se: float

    def __post_init__(self):
        if not (math.isfinite(self.theta_hat) and math.isfinite(self.se)):
            raise DomainError("estimate and standard error must be finite")
        if self.se <= 0:
            raise DomainError(f"standard error must be positive, got {self.se!r}")

    @property
    def t(self):
        return self.theta_hat / self.se


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float = 0.95

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise DomainError("interval limits must be finite")
        if not self.lower < self.upper:
            raise DomainError(f"lower limit {self.lower!r} must be below upper limit {self.upper!r}")
        if not 0 < self.level < 1:
            raise DomainError(f"level must lie in (0, 1), got {self.level!r}")

    @property
    def alpha(self):
        return 1.0 - self.level


@dataclass(frozen=True)
class TwoByTwoTable:
    """Event counts in a treated and a control group."""

    events_treat: int
    n_treat: int
    events_ctrl: int
    n_ctrl: int

    def __post_init__(self):
        for name in ("events_treat", "n_treat", "events_ctrl", "n_ctrl"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise DomainError(f"{name} must be a nonnegative integer, got {value!r}")
        if self.n_treat < 1 or self.n_ctrl < 1:
            raise DomainError("group sizes must be positive")
        if self.events_treat > self.n_treat or self.events_ctrl > self.n_ctrl:
            raise DomainError("events cannot exceed group size")

    def swapped(self):
        return TwoByTwoTable(self.events_ctrl, self.n_ctrl, self.events_treat, self.n_treat)


def from_two_by_two(table):
    """Wald estimate of the log relative risk. Zero cells are rejected, never corrected."""
    cells = {
        "events in treatment group": table.events_treat,
        "non-events in treatment group": table.n_treat - table.events_treat,
        "events in control group": table.events_ctrl,
        "non-events in control group": table.n_ctrl - table.events_ctrl,
    }
    for cell, count in cells.items():
        if count == 0:
            raise DegenerateTableError(f"degenerate table: zero {cell}", cell=cell)
    a, n1, b, n2 = table.events_treat, table.n_treat, table.events_ctrl, table.n_ctrl
    theta = math.log((a / n1) / (b / n2))
    se = math.sqrt(1 / a - 1 / n1 + 1 / b - 1 / n2)
    return EffectEstimate(theta, se)


def ci_to_estimate(ci):
    z = z_half(ci.alpha)
    return EffectEstimate((ci.lower + ci.upper) / 2, (ci.upper - ci.lower) / (2 * z))


def estimate_to_ci(est, level=0.95):
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    half = z_half(1.0 - level) * est.se
    return ConfidenceInterval(est.theta_hat - half, est.theta_hat + half, level)


def test_statistic(est):
    return est.theta_hat / est.se


def p_value(est):
    """Two-sided p-value of the Wald test of no effect."""
    return two_sided_p(test_statistic(est))


def p_to_statistic(p):
    """Absolute test statistic whose two-sided p-value is ``p``; ``p = 1`` maps to 0."""
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    if p == 1:
        return 0.0
    return z_half(p)


# keep pytest from collecting the library function when imported into tests
test_statistic.__test__ = False

__all__ = [
    "EffectEstimate",
    "ConfidenceInterval",
    "TwoByTwoTable",
    "from_two_by_two",
    "ci_to_estimate",
    "estimate_to_ci",
    "test_statistic",
    "p_value",
    "p_to_statistic",
]
