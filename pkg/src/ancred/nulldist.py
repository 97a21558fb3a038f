"""Behaviour of credibility p-values when there is no effect.

Random numbers come from numpy's PCG64 generator. A run is split into
``shards`` blocks, each seeded with ``SeedSequence(seed).spawn(shards)[i]``,
so the result depends only on ``(seed, shards)`` and never on how many
worker threads process the blocks.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .credibility import extrinsic_p, intrinsic_p
from .errors import DomainError
from .numerics import std_normal_pdf, std_normal_quantile, two_sided_p, z_half

#: c values used when reproducing the null histograms of p_E.
DEFAULT_C_GRID = (0.001, 0.5, 1.0, 2.0)
DEFAULT_BINS = 40
TAIL_ALPHAS = (0.01, 0.05, 0.1)

_UNIT = 2.0 ** -53


@dataclass(frozen=True)
class SimulationConfig:
    n_samples: int
    variance_ratio_c: float
    seed: int = 0
    shards: int = 1

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise DomainError(f"n_samples must be a positive integer, got {self.n_samples!r}")
        if not (math.isfinite(self.variance_ratio_c) and self.variance_ratio_c >= 0):
            raise DomainError(f"variance ratio c must be nonnegative, got {self.variance_ratio_c!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if int(self.shards) != self.shards or self.shards < 1:
            raise DomainError("shards must be a positive integer")


@dataclass
class SampleSet:
    """Simulated null pairs ``(t, t0)`` with their p-values and p_E."""

    config: SimulationConfig
    t: np.ndarray
    t0: np.ndarray
    p_e: np.ndarray
    p: np.ndarray = field(init=False)
    p0: np.ndarray = field(init=False)

    def __post_init__(self):
        self.p = two_sided_p(self.t)
        self.p0 = two_sided_p(self.t0)

    def __len__(self):
        return len(self.p_e)


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    total: int

    def __post_init__(self):
        edges = np.asarray(self.bin_edges)
        if len(edges) != len(self.counts) + 1 or np.any(np.diff(edges) <= 0):
            raise DomainError("bin edges must be strictly increasing, one more than counts")
        if edges[0] != 0.0 or edges[-1] != 1.0:
            raise DomainError("bin edges must span [0, 1]")
        if int(np.sum(self.counts)) != self.total:
            raise DomainError("counts must sum to total")

    @property
    def density(self):
        return self.counts / (self.total * np.diff(self.bin_edges))

    @property
    def midpoints(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def open_uniforms(rng, size):
    """Uniforms on the open interval (0, 1): midpoints of a 2^-53 grid."""
    k = rng.integers(0, 2 ** 53, size=size, dtype=np.int64)
    return (k + 0.5) * _UNIT


def _shard_sizes(n, shards):
    return [len(block) for block in np.array_split(np.arange(n), shards)]


def null_pairs(n, seed, shards=1):
    """Independent standard normal pairs ``(t, t0)`` via the inverse-CDF transform."""
    children = np.random.SeedSequence(seed).spawn(shards)
    blocks = []
    for child, size in zip(children, _shard_sizes(n, shards)):
        u = open_uniforms(np.random.Generator(np.random.PCG64(child)), (size, 2))
        blocks.append(std_normal_quantile(u))
    z = np.concatenate(blocks, axis=0)
    return z[:, 0], z[:, 1]


def simulate_p_e_null(config, workers=1):
    """Draw ``config.n_samples`` null p_E values for variance ratio ``config.variance_ratio_c``.

    The same ``(seed, shards)`` always yields the same pairs, so runs that
    differ only in ``c`` share their random inputs.
    """
    if config.variance_ratio_c <= 0:
        raise DomainError("simulation needs c > 0; use limiting_density_c0 for c = 0")
    t, t0 = null_pairs(config.n_samples, config.seed, config.shards)
    c = config.variance_ratio_c
    if workers > 1 and config.shards > 1:
        bounds = np.cumsum([0] + _shard_sizes(config.n_samples, config.shards))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                lambda ab: extrinsic_p(t[ab[0]:ab[1]], t0[ab[0]:ab[1]], c),
                zip(bounds[:-1], bounds[1:]),
            )
            p_e = np.concatenate(list(parts))
    else:
        p_e = extrinsic_p(t, t0, c)
    return SampleSet(config, t, t0, np.asarray(p_e, dtype=float))


def histogram(samples, bins=DEFAULT_BINS):
    """Equal-width histogram of values in [0, 1]."""
    if int(bins) != bins or bins < 1:
        raise DomainError("bins must be a positive integer")
    values = np.asarray(samples, dtype=float)
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    return Histogram(edges, counts.astype(np.int64), int(values.size))


def empirical_cdf(samples, x):
    values = np.sort(np.asarray(samples, dtype=float))
    return np.searchsorted(values, x, side="right") / values.size


def empirical_tail(samples, alphas=TAIL_ALPHAS):
    """``Pr(sample < alpha)`` for each threshold."""
    values = np.asarray(samples, dtype=float)
    return {float(a): float(np.mean(values < a)) for a in alphas}


def ks_distance(samples, cdf):
    """Sup-norm distance between the empirical CDF of ``samples`` and ``cdf``."""
    values = np.sort(np.asarray(samples, dtype=float))
    n = values.size
    f = np.asarray(cdf(values), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def p_i_null_density(p_i):
    """Null density of the intrinsic p-value, ``2 sqrt(pi) phi(t(p_i))``."""
    arr = np.asarray(p_i, dtype=float)
    if not np.all((arr > 0) & (arr < 1)):
        raise DomainError("p_i must lie strictly between 0 and 1")
    dens = 2.0 * math.sqrt(math.pi) * np.asarray(std_normal_pdf(np.asarray(z_half(arr))))
    return float(dens) if np.ndim(p_i) == 0 else dens


def p_i_null_cdf(x):
    """``Pr(p_I <= x)`` under no effect; the inverse image of a uniform p."""
    arr = np.asarray(x, dtype=float)
    if not np.all((arr >= 0) & (arr <= 1)):
        raise DomainError("x must lie in [0, 1]")
    out = np.where(arr >= 1, 1.0, 0.0)
    inner = (arr > 0) & (arr < 1)
    out[inner] = two_sided_p(math.sqrt(2.0) * np.asarray(z_half(arr[inner])))
    return float(out) if np.ndim(x) == 0 else out


def null_tail_p_i(alpha):
    """``Pr(p_I < alpha)`` when there is no effect."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return p_i_null_cdf(alpha)


def limiting_density_c0(x):
    """Be(2, 1) density ``2x``, the null law of p_E as c goes to 0."""
    arr = np.asarray(x, dtype=float)
    if not np.all((arr >= 0) & (arr <= 1)):
        raise DomainError("x must lie in [0, 1]")
    return float(2.0 * arr) if np.ndim(x) == 0 else 2.0 * arr


def limiting_cdf_c0(x):
    arr = np.asarray(x, dtype=float)
    return float(arr * arr) if np.ndim(x) == 0 else arr * arr


def tail_bound(alpha):
    """Upper bound ``alpha^2`` on ``Pr(p_E < alpha)`` under no effect, for any c."""
    return alpha * alpha


def simulate_p_i_null(n, seed):
    """Null draws of p_I obtained by pushing uniform p-values through ``intrinsic_p``."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return intrinsic_p(open_uniforms(rng, n))


def replication_probability_mc(est, n, seed):
    """Twice the simulated chance that an identical replication has the opposite sign.

    Replications are drawn from the predictive ``N(theta_hat, 2 se^2)``.
    """
    if est.theta_hat == 0:
        raise DomainError("direction of a zero estimate is undefined")
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    draws = est.theta_hat + math.sqrt(2.0) * est.se * std_normal_quantile(open_uniforms(rng, n))
    opposite = np.count_nonzero(draws * math.copysign(1.0, est.theta_hat) <= 0)
    return 2.0 * opposite / n
