"""Normal-distribution special functions and a bracketed monotone root finder.

Every function accepts either a Python scalar or a numpy array. Scalars come
back as ``float``; arrays come back as arrays of the same shape.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from .errors import BracketError, ConvergenceError, DomainError

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Tolerance:
    """Stopping rule for :func:`find_root_monotone`."""

    abs_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be a positive integer, got {self.max_iter!r}")


DEFAULT_TOLERANCE = Tolerance()


def _as_array(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _out(arr, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr


def std_normal_pdf(x):
    """Standard normal density."""
    arr = _as_array(x, "x")
    return _out(INV_SQRT_2PI * np.exp(-0.5 * arr * arr), x)


def std_normal_cdf(x):
    """Standard normal distribution function, evaluated through ``erfc`` for tail accuracy."""
    arr = _as_array(x, "x")
    return _out(0.5 * special.erfc(-arr / SQRT2), x)


def std_normal_sf(x):
    """Upper tail ``1 - Phi(x)`` without cancellation."""
    arr = _as_array(x, "x")
    return _out(0.5 * special.erfc(arr / SQRT2), x)


def two_sided_p(t):
    """Two-sided normal p-value ``2 * (1 - Phi(|t|))``."""
    arr = _as_array(t, "t")
    return _out(special.erfc(np.abs(arr) / SQRT2), t)


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open unit interval.

    A closed-form starting value is polished with one Newton step against
    :func:`std_normal_cdf`, so the pair round-trips to ~1e-16.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("p must lie strictly between 0 and 1")
    x = special.ndtri(arr)
    dens = INV_SQRT_2PI * np.exp(-0.5 * x * x)
    # residual taken on the smaller tail to avoid cancellation near 1
    lower = 0.5 * special.erfc(-x / SQRT2) - arr
    upper = (1.0 - arr) - 0.5 * special.erfc(x / SQRT2)
    resid = np.where(arr < 0.5, lower, upper)
    step = np.divide(resid, dens, out=np.zeros_like(x), where=dens > 0)
    return _out(x - step, p)


def std_normal_isf(p):
    """Upper-tail quantile: ``x`` with ``1 - Phi(x) = p``. Exact for tiny ``p``."""
    arr = np.asarray(p, dtype=float)
    return _out(-np.asarray(std_normal_quantile(arr)), p)


def z_half(alpha):
    """The ``1 - alpha/2`` normal quantile, computed from the small tail."""
    arr = np.asarray(alpha, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("alpha must lie strictly between 0 and 1")
    return _out(-np.asarray(std_normal_quantile(arr / 2.0)), alpha)


def chi_sq1_tail(q):
    """``Pr(chi^2_1 >= q)``, i.e. ``2 * (1 - Phi(sqrt(q)))``."""
    arr = _as_array(q, "q")
    if np.any(arr < 0):
        raise DomainError("q must be nonnegative")
    return _out(special.erfc(np.sqrt(arr) / SQRT2), q)


def find_root_monotone(f, lo, hi, tol=DEFAULT_TOLERANCE):
    """Bisection for a continuous, strictly monotone ``f`` on ``[lo, hi]``.

    ``lo`` and ``hi`` may be arrays, in which case ``f`` must be vectorised
    and every bracket is bisected in lockstep until all widths are at most
    ``tol.abs_tol``. Returns the midpoint of the final bracket, which always
    lies inside the initial one.

    Raises
    ------
    BracketError
        If ``f(lo)`` and ``f(hi)`` have the same strict sign.
    ConvergenceError
        If ``tol.max_iter`` halvings do not reach the tolerance.
    """
    scalar = np.ndim(lo) == 0 and np.ndim(hi) == 0
    a, b = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    a = a.astype(float)
    b = b.astype(float)
    fa = np.asarray(f(a), dtype=float)
    fb = np.asarray(f(b), dtype=float)
    if np.any(np.isnan(fa)) or np.any(np.isnan(fb)):
        raise BracketError("objective is undefined at a bracket endpoint")
    if np.any(np.sign(fa) * np.sign(fb) > 0):
        raise BracketError("no sign change on the bracket")

    hit_a = fa == 0
    hit_b = (fb == 0) & ~hit_a
    sign_a = np.sign(fa)
    done = hit_a | hit_b | (b - a <= tol.abs_tol)
    for _ in range(tol.max_iter):
        if np.all(done):
            break
        mid = 0.5 * (a + b)
        fm = np.asarray(f(mid), dtype=float)
        left = np.sign(fm) == sign_a
        a = np.where(done | ~left, a, mid)
        b = np.where(done | left, b, mid)
        exact = (fm == 0) & ~done
        a = np.where(exact, mid, a)
        b = np.where(exact, mid, b)
        done = done | exact | (b - a <= tol.abs_tol)
    else:
        if not np.all(done):
            raise ConvergenceError(f"bisection did not converge in {tol.max_iter} iterations")

    root = np.where(hit_a, a, np.where(hit_b, b, 0.5 * (a + b)))
    return float(root) if scalar else root
