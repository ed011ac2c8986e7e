"""Exact transition probabilities and log likelihood ratios near the unit root.

The transition probability out of state x is a finite convolution: with
death probability q = 1 - theta,

    P(x -> y) = sum_k Binomial(x, q).pmf(k) * g(y - x + k),   k = 0..x,

with g the innovation pmf and g(i) = 0 for i < 0. Near the unit root almost
all mass sits on the two smallest admissible death counts; the split into
that leading part and the remainder is what makes the local analysis
tractable, and both parts are exposed here.

Extended-real conventions: log 0 = -inf, log(0)*0 = 0, and a ratio whose
numerator and denominator are both zero raises UndefinedRatioError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .backend import kernels as _k
from .dist import InnovationSpec, moments, pmf
from .errors import ParameterError, UndefinedRatioError
from .process import Path, down_moves

_NEG_INF = float("-inf")


def binom_pmf(m: int, p: float, k: int) -> float:
    """Binomial(m, p) pmf at k, 0 outside [0, m]; evaluated in log space."""
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    m = int(m)
    k = int(k)
    if m < 0:
        raise ParameterError(f"m must be >= 0, got {m}")
    if k < 0 or k > m:
        return 0.0
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == m else 0.0
    logc = math.lgamma(m + 1.0) - math.lgamma(k + 1.0) - math.lgamma(m - k + 1.0)
    return math.exp(logc + k * math.log(p) + (m - k) * math.log1p(-p))


@dataclass(frozen=True)
class TailBound:
    """Exact upper binomial tail and its closed-form bound (exact <= bound)."""

    exact_tail: float
    bound: float


def binom_tail_bound(m: int, p: float, r: int) -> TailBound:
    """Bound sum_{k=r}^m Binomial(m, p).pmf(k) by pmf(r) * r(1-p)/(r - mp).

    Valid only for r > m*p; the exact tail is returned alongside so callers
    can verify the inequality.
    """
    m = int(m)
    r = int(r)
    if not (0.0 < p < 1.0):
        raise ParameterError(f"p must lie in (0, 1), got {p}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if not r > m * p:
        raise ParameterError(f"the tail bound needs r > m*p (r={r}, m*p={m * p})")
    exact = math.fsum(binom_pmf(m, p, k) for k in range(r, m + 1))
    # at r == m the factor r(1-p)/(r - mp) cancels to exactly 1
    factor = 1.0 if r == m else r * (1.0 - p) / (r - m * p)
    bound = binom_pmf(m, p, r) * factor
    return TailBound(exact_tail=exact, bound=bound)


def binom_tail_factor2(m: int, p: float, r: int) -> float:
    """The simplified bound 2 * pmf(r), valid for r in {2, 3} when m*p < 1."""
    if r not in (2, 3):
        raise ParameterError(f"the factor-2 bound holds for r in {{2, 3}}, got {r}")
    if not m * p < 1.0:
        raise ParameterError(f"the factor-2 bound needs m*p < 1, got {m * p}")
    return 2.0 * binom_pmf(m, p, r)


def _check_nonneg_state(x, name):
    x = int(x)
    if x < 0:
        raise ParameterError(f"{name} must be a non-negative integer, got {x}")
    return x


def transition_prob(spec: InnovationSpec, theta: float, x_prev: int, x_next: int) -> float:
    """Exact one-step transition probability P(x_prev -> x_next)."""
    return math.exp(transition_logprob(spec, theta, x_prev, x_next))


def transition_logprob(spec: InnovationSpec, theta: float, x_prev: int, x_next: int) -> float:
    """log P(x_prev -> x_next); -inf when the transition is impossible."""
    theta = float(theta)
    if not (0.0 <= theta <= 1.0) or math.isnan(theta):
        raise ParameterError(f"theta must lie in [0, 1], got {theta}")
    x_prev = _check_nonneg_state(x_prev, "x_prev")
    x_next = _check_nonneg_state(x_next, "x_next")
    kind, param, table = spec.kernel_args()
    return _k.transition_logprob(kind, param, table, theta, x_prev, x_next)


def transition_split(spec: InnovationSpec, h: float, n: int, x_prev: int, x_next: int):
    """(leading, remainder) of the transition probability at theta = 1 - h/n^2.

    Leading collects the two smallest admissible death counts (k in {0, 1}
    for upward jumps, k in {-dx, -dx+1} for downward ones); the remainder is
    everything above. The two always add up to transition_prob at the same
    theta.
    """
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    if not (0.0 <= h <= n * n) or math.isnan(h):
        raise ParameterError(f"need 0 <= h/n^2 <= 1, got h={h}, n={n}")
    x_prev = _check_nonneg_state(x_prev, "x_prev")
    x_next = _check_nonneg_state(x_next, "x_next")
    q = h / float(n * n)
    kind, param, table = spec.kernel_args()
    return _k.transition_split(kind, param, table, q, x_prev, x_next - x_prev)


def loglik(spec: InnovationSpec, theta: float, path: Path) -> float:
    """Path log likelihood: sum of transition log probabilities, -inf if any is zero."""
    total = 0.0
    values = path.values
    for t in range(1, len(values)):
        lp = transition_logprob(spec, theta, int(values[t - 1]), int(values[t]))
        if lp == _NEG_INF:
            return _NEG_INF
        total += lp
    return total


def _local_qs(path: Path, h: float, h0: float):
    n = path.n
    nn = float(n * n)
    for name, val in (("h", h), ("h0", h0)):
        if not (0.0 <= val <= nn) or math.isnan(val):
            raise ParameterError(f"need 0 <= {name}/n^2 <= 1, got {name}={val}, n={n}")


def _path_loglr(spec: InnovationSpec, path: Path, h: float, h0: float):
    _local_qs(path, h, h0)
    kind, param, table = spec.kernel_args()
    exact, leading = _k.path_loglr(kind, param, table, path.values, float(h), float(h0))
    return exact, leading


def loglr_exact(spec: InnovationSpec, path: Path, h: float, h0: float) -> float:
    """Exact log likelihood ratio of local parameter h against h0.

    Computed in one pass as a sum of per-transition log ratios. Returns
    -inf (+inf) when only the numerator (denominator) model assigns the
    path probability zero; raises UndefinedRatioError when both do.
    """
    exact, _ = _path_loglr(spec, path, h, h0)
    if math.isnan(exact):
        raise UndefinedRatioError(
            f"both local parameters (h={h}, h0={h0}) assign this path probability zero"
        )
    return exact


def loglr_leading(spec: InnovationSpec, path: Path, h: float, h0: float) -> float:
    """Log likelihood ratio keeping only the leading transition terms."""
    _, leading = _path_loglr(spec, path, h, h0)
    if math.isnan(leading):
        raise UndefinedRatioError(
            f"both leading-term models (h={h}, h0={h0}) assign this path probability zero"
        )
    return leading


@dataclass(frozen=True)
class LogLikelihoodReport:
    """Exact, leading-only, and approximate log likelihood ratios for one path.

    approx is the two-term statistic drift + log(h/h0) * down_count, where
    drift = -(h - h0) g(0) mu / 2; it depends on the path only through the
    number of downward moves.
    """

    exact: float
    leading_only: float
    approx: float
    drift_term: float
    down_count: int


def approx_loglr_statistic(spec: InnovationSpec, down_count: int, h: float, h0: float):
    """(drift_term, approx) of the two-term statistic for a given down-move count.

    Conventions: log 0 = -inf, log(0)*0 = 0, and the log(h/h0) term is
    dropped when h0 = 0 and down_count = 0. Raises UndefinedRatioError for
    h = h0 = 0 with down_count >= 1 (both measures assign probability zero).
    """
    for name, val in (("h", h), ("h0", h0)):
        if val < 0 or math.isnan(val):
            raise ParameterError(f"{name} must be >= 0, got {val}")
    if down_count < 0:
        raise ParameterError(f"down_count must be >= 0, got {down_count}")
    g0 = pmf(spec, 0)
    mu, _ = moments(spec)
    drift = -(h - h0) * g0 * mu / 2.0
    if down_count == 0:
        return drift, drift
    if h0 == 0.0 and h == 0.0:
        raise UndefinedRatioError("h = h0 = 0 with downward moves: both measures are zero")
    if h == 0.0:
        return drift, _NEG_INF
    if h0 == 0.0:
        return drift, float("inf")
    return drift, drift + math.log(h / h0) * down_count


def loglr_approx(spec: InnovationSpec, path: Path, h: float, h0: float) -> LogLikelihoodReport:
    """Full report: exact, leading-only and approximate log likelihood ratios."""
    exact = loglr_exact(spec, path, h, h0)
    leading = loglr_leading(spec, path, h, h0)
    d = down_moves(path)
    drift, approx = approx_loglr_statistic(spec, d, h, h0)
    return LogLikelihoodReport(
        exact=exact,
        leading_only=leading,
        approx=approx,
        drift_term=drift,
        down_count=d,
    )
