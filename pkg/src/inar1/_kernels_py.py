"""Pure-Python compute kernels (reference backend).

``inar1._kernels_cy`` is a compiled twin of this module with identical
algorithms and an identical random stream; ``inar1.backend`` selects one of
the two at import time. Integer draws agree bit for bit between the
backends, floating-point results to near machine precision.

Innovation distributions travel in the flattened form ``(kind, param,
table)`` produced by ``InnovationSpec.kernel_args()``: ``kind`` is one of
the ``KIND_*`` constants, ``param`` holds the Poisson rate or the geometric
success probability, and ``table`` is a normalized probability table
(empty for the parametric kinds).

Random stream: xoshiro256++ seeded through splitmix64. One ``uniform()``
consumes one 64-bit word; samplers consume a documented number of draws so
that seeded runs are reproducible across backends:

* innovation draws use one uniform (sequential CDF inversion),
* binomial thinning uses ``x`` uniforms when ``x <= 64`` (Bernoulli
  summation) and one uniform otherwise (CDF inversion on the smaller of
  success/failure counts),
* the degenerate cases ``x == 0``, ``theta == 0`` and ``theta == 1``
  consume none.
"""

from __future__ import annotations

import math

import numpy as np

KIND_POISSON = 0
KIND_GEOMETRIC = 1
KIND_TABLE = 2

_MASK64 = (1 << 64) - 1
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
_NEG_INF = float("-inf")
_NAN = float("nan")


def _splitmix64(x):
    """One splitmix64 output for a 64-bit input (also the seeding step)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK64


class RandomStream:
    """Deterministic xoshiro256++ stream; single-owner, never share across tasks."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed):
        state = int(seed) & _MASK64
        words = []
        for _ in range(4):
            state, word = _splitmix64(state)
            words.append(word)
        if not any(words):
            words[0] = 0x9E3779B97F4A7C15
        self._s0, self._s1, self._s2, self._s3 = words

    def next_u64(self):
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s0 + s3) & _MASK64, 23) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def uniform(self):
        """One double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV53


def innovation_draw(kind, param, table, rng):
    """One draw from the innovation distribution (one uniform consumed)."""
    u = rng.uniform()
    if kind == KIND_POISSON:
        term = math.exp(-param)
        c = term
        k = 0
        while u >= c:
            k += 1
            term *= param / k
            c += term
            if term == 0.0:
                break
        return k
    if kind == KIND_GEOMETRIC:
        term = param
        c = term
        k = 0
        omp = 1.0 - param
        while u >= c:
            k += 1
            term *= omp
            c += term
            if term == 0.0:
                break
        return k
    # table
    c = 0.0
    last = len(table) - 1
    for i in range(last + 1):
        c += table[i]
        if u < c:
            return i
    return last


def binomial_draw(m, theta, rng):
    """Exact draw from Binomial(m, theta).

    Bernoulli summation for m <= 64, otherwise CDF inversion on the smaller
    of the success/failure probabilities.
    """
    if m <= 0:
        return 0
    if theta <= 0.0:
        return 0
    if theta >= 1.0:
        return m
    if m <= 64:
        s = 0
        for _ in range(m):
            if rng.uniform() < theta:
                s += 1
        return s
    if theta <= 0.5:
        q = theta
        flip = False
    else:
        q = 1.0 - theta
        flip = True
    u = rng.uniform()
    term = math.pow(1.0 - q, m)
    c = term
    k = 0
    ratio = q / (1.0 - q)
    while u >= c and k < m:
        term = term * ((m - k) * ratio / (k + 1.0))
        k += 1
        c += term
        if term == 0.0:
            break
    return (m - k) if flip else k


def _g(kind, param, table, e):
    """Innovation pmf at integer e (0 off the support)."""
    if e < 0:
        return 0.0
    if kind == KIND_POISSON:
        return math.exp(-param + e * math.log(param) - math.lgamma(e + 1.0))
    if kind == KIND_GEOMETRIC:
        return param * math.pow(1.0 - param, e)
    if e >= len(table):
        return 0.0
    return table[e]


def _log_g(kind, param, table, e):
    if e < 0:
        return _NEG_INF
    if kind == KIND_POISSON:
        return -param + e * math.log(param) - math.lgamma(e + 1.0)
    if kind == KIND_GEOMETRIC:
        return math.log(param) + e * math.log1p(-param)
    if e >= len(table):
        return _NEG_INF
    return math.log(table[e])


def _logadd(a, b):
    if a == _NEG_INF:
        return b
    if b == _NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def _support_bounds(kind, table, m, dx):
    """Admissible death counts k for a jump dx out of state m.

    Requires dx + k inside the innovation support and 0 <= k <= m; returns
    (kmin, kmax) with kmin > kmax when the transition is impossible.
    """
    kmin = -dx if dx < 0 else 0
    kmax = m
    if kind == KIND_TABLE:
        top = len(table) - 1 - dx
        if top < kmax:
            kmax = top
    return kmin, kmax


def _advance_g(kind, param, table, e_next, ge):
    """g(e_next) from g(e_next - 1) by the pmf recurrence."""
    if kind == KIND_POISSON:
        return ge * (param / e_next)
    if kind == KIND_GEOMETRIC:
        return ge * (1.0 - param)
    if e_next >= len(table):
        return 0.0
    return table[e_next]


def _trans_sums_linear(kind, param, table, q, m, dx):
    """Transition probability split into (leading, remainder, ok).

    ``leading`` collects the two smallest admissible death counts,
    ``remainder`` everything above. ``ok`` is False when the value is
    positive in exact arithmetic but every double-precision term
    underflowed; callers then switch to the log-space path.
    """
    kmin, kmax = _support_bounds(kind, table, m, dx)
    if kmin > kmax:
        return 0.0, 0.0, True
    if q == 0.0:
        lead = _g(kind, param, table, dx) if kmin == 0 else 0.0
        return lead, 0.0, True
    if q == 1.0:
        val = _g(kind, param, table, dx + m) if kmin <= m <= kmax else 0.0
        if m <= kmin + 1:
            return val, 0.0, True
        return 0.0, val, True
    b = math.pow(1.0 - q, m)
    if b == 0.0:
        return 0.0, 0.0, False
    ratio = q / (1.0 - q)
    for k in range(kmin):
        b = b * ((m - k) * ratio / (k + 1.0))
    if b == 0.0:
        return 0.0, 0.0, False
    lead = 0.0
    rem = 0.0
    ge = _g(kind, param, table, dx + kmin)
    k = kmin
    while True:
        term = b * ge
        if k <= kmin + 1:
            lead += term
        else:
            rem += term
        if k == kmax or b == 0.0:
            break
        b = b * ((m - k) * ratio / (k + 1.0))
        ge = _advance_g(kind, param, table, dx + k + 1, ge)
        k += 1
    if lead + rem == 0.0:
        return 0.0, 0.0, False
    return lead, rem, True


def _trans_sums_log(kind, param, table, q, m, dx):
    """(log_full, log_leading, log_remainder) via streaming log-sum-exp.

    Only reached when the linear pass underflowed, so q is in (0, 1) and
    the admissible range is non-empty.
    """
    kmin, kmax = _support_bounds(kind, table, m, dx)
    if kmin > kmax:
        return _NEG_INF, _NEG_INF, _NEG_INF
    lq = math.log(q)
    l1q = math.log1p(-q)
    lgm = math.lgamma(m + 1.0)
    full = _NEG_INF
    lead = _NEG_INF
    rem = _NEG_INF
    for k in range(kmin, kmax + 1):
        lb = lgm - math.lgamma(k + 1.0) - math.lgamma(m - k + 1.0) + k * lq + (m - k) * l1q
        lt = lb + _log_g(kind, param, table, dx + k)
        if lt == _NEG_INF:
            continue
        full = _logadd(full, lt)
        if k <= kmin + 1:
            lead = _logadd(lead, lt)
        else:
            rem = _logadd(rem, lt)
    return full, lead, rem


def transition_logprob(kind, param, table, theta, x_prev, x_next):
    """log P(x_prev -> x_next) under thinning probability theta; -inf if zero."""
    q = 1.0 - theta
    dx = x_next - x_prev
    lead, rem, ok = _trans_sums_linear(kind, param, table, q, x_prev, dx)
    if ok:
        s = lead + rem
        return math.log(s) if s > 0.0 else _NEG_INF
    full, _, _ = _trans_sums_log(kind, param, table, q, x_prev, dx)
    return full


def transition_split(kind, param, table, q, m, dx):
    """(leading, remainder) of the transition probability at death rate q."""
    lead, rem, ok = _trans_sums_linear(kind, param, table, q, m, dx)
    if ok:
        return lead, rem
    _, llead, lrem = _trans_sums_log(kind, param, table, q, m, dx)
    return math.exp(llead), math.exp(lrem)


def _trans_pair_log(kind, param, table, q, m, dx):
    """(log_full, log_leading), robust against underflow."""
    lead, rem, ok = _trans_sums_linear(kind, param, table, q, m, dx)
    if ok:
        s = lead + rem
        lf = math.log(s) if s > 0.0 else _NEG_INF
        ll = math.log(lead) if lead > 0.0 else _NEG_INF
        return lf, ll
    full, llead, _ = _trans_sums_log(kind, param, table, q, m, dx)
    return full, llead


def _combine_ratio(num_zero, den_zero, total):
    if num_zero and den_zero:
        return _NAN
    if num_zero:
        return _NEG_INF
    if den_zero:
        return float("inf")
    return total


def path_loglr(kind, param, table, values, h, h0):
    """(exact, leading) log likelihood ratios of h against h0 for one path.

    Each is the sum over transitions of per-transition log ratios. NaN
    encodes the undefined case where both measures assign the path
    probability zero.
    """
    n = len(values) - 1
    q1 = h / float(n * n)
    q0 = h0 / float(n * n)
    ex_sum = 0.0
    ld_sum = 0.0
    ex_num0 = ex_den0 = False
    ld_num0 = ld_den0 = False
    for t in range(1, n + 1):
        m = int(values[t - 1])
        dx = int(values[t]) - m
        lf1, ll1 = _trans_pair_log(kind, param, table, q1, m, dx)
        lf0, ll0 = _trans_pair_log(kind, param, table, q0, m, dx)
        if lf1 == _NEG_INF or lf0 == _NEG_INF:
            ex_num0 = ex_num0 or lf1 == _NEG_INF
            ex_den0 = ex_den0 or lf0 == _NEG_INF
        else:
            ex_sum += lf1 - lf0
        if ll1 == _NEG_INF or ll0 == _NEG_INF:
            ld_num0 = ld_num0 or ll1 == _NEG_INF
            ld_den0 = ld_den0 or ll0 == _NEG_INF
        else:
            ld_sum += ll1 - ll0
    exact = _combine_ratio(ex_num0, ex_den0, ex_sum)
    leading = _combine_ratio(ld_num0, ld_den0, ld_sum)
    return exact, leading


def simulate_path(kind, param, table, theta, n, seed):
    """Simulate n thinning-plus-innovation steps from 0; int64 array, length n + 1."""
    rng = RandomStream(seed)
    out = np.zeros(n + 1, dtype=np.int64)
    x = 0
    for t in range(1, n + 1):
        x = binomial_draw(x, theta, rng) + innovation_draw(kind, param, table, rng)
        out[t] = x
    return out


def simulate_recorded(kind, param, table, theta, n, seed):
    """Like simulate_path but also returns the innovation and death draws."""
    rng = RandomStream(seed)
    path = np.zeros(n + 1, dtype=np.int64)
    innov = np.zeros(n, dtype=np.int64)
    deaths = np.zeros(n, dtype=np.int64)
    x = 0
    for t in range(1, n + 1):
        surv = binomial_draw(x, theta, rng)
        eps = innovation_draw(kind, param, table, rng)
        deaths[t - 1] = x - surv
        innov[t - 1] = eps
        x = surv + eps
        path[t] = x
    return path, innov, deaths


def batch_stats(kind, param, table, theta, n, seeds):
    """Per-replication path summaries for seeds; dict of aligned arrays.

    Replication i is simulated from seeds[i] exactly as simulate_path would.
    """
    reps = len(seeds)
    down = np.zeros(reps, dtype=np.int64)
    eq = np.zeros(reps, dtype=np.int64)
    x_n = np.zeros(reps, dtype=np.int64)
    sum_x = np.zeros(reps, dtype=np.int64)
    sum_prev = np.zeros(reps, dtype=np.int64)
    sum_prev_sq = np.zeros(reps, dtype=np.int64)
    sum_cross = np.zeros(reps, dtype=np.int64)
    multi_death = np.zeros(reps, dtype=np.int64)
    max_head = np.zeros(reps, dtype=np.int64)
    for i in range(reps):
        rng = RandomStream(int(seeds[i]))
        x = 0
        d = e = sx = sp = spsq = cross = multi = mh = 0
        for _ in range(n):
            prev = x
            surv = binomial_draw(prev, theta, rng)
            eps = innovation_draw(kind, param, table, rng)
            x = surv + eps
            if x < prev:
                d += 1
            elif x == prev:
                e += 1
            sx += x
            sp += prev
            spsq += prev * prev
            cross += prev * x
            if prev - surv >= 2:
                multi += 1
            if prev > mh:
                mh = prev
        down[i] = d
        eq[i] = e
        x_n[i] = x
        sum_x[i] = sx
        sum_prev[i] = sp
        sum_prev_sq[i] = spsq
        sum_cross[i] = cross
        multi_death[i] = multi
        max_head[i] = mh
    return {
        "down": down,
        "eq": eq,
        "x_n": x_n,
        "sum_x": sum_x,
        "sum_prev": sum_prev,
        "sum_prev_sq": sum_prev_sq,
        "sum_cross": sum_cross,
        "multi_death": multi_death,
        "max_head": max_head,
    }


def batch_loglr(kind, param, table, n, h_values, h0, seeds):
    """Simulate under theta = 1 - h0/n^2 and score each h in h_values.

    Returns (exact[r, j], leading[r, j], down[r]); replication r uses
    seeds[r] and reproduces simulate_path(..., seeds[r]) draw for draw.
    """
    reps = len(seeds)
    nh = len(h_values)
    theta0 = 1.0 - h0 / float(n * n)
    exact = np.zeros((reps, nh), dtype=np.float64)
    leading = np.zeros((reps, nh), dtype=np.float64)
    down = np.zeros(reps, dtype=np.int64)
    for i in range(reps):
        values = simulate_path(kind, param, table, theta0, n, int(seeds[i]))
        down[i] = int(np.count_nonzero(np.diff(values) < 0))
        for j, h in enumerate(h_values):
            exact[i, j], leading[i, j] = path_loglr(kind, param, table, values, float(h), h0)
    return exact, leading, down
