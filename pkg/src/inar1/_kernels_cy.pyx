# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled compute kernels.

Twin of inar1._kernels_py with identical algorithms and random streams;
see that module for the draw-consumption contract. Integer draws agree bit
for bit with the pure backend, floats to near machine precision.
"""

import numpy as np

from libc.math cimport exp, log, log1p, lgamma, pow, INFINITY, NAN

from libc.stdint cimport int64_t, uint64_t

KIND_POISSON = 0
KIND_GEOMETRIC = 1
KIND_TABLE = 2

cdef int K_POISSON = 0
cdef int K_GEOMETRIC = 1
cdef int K_TABLE = 2

cdef double INV53 = 1.0 / 9007199254740992.0


# -- random stream ------------------------------------------------------------

cdef struct XoState:
    uint64_t s0
    uint64_t s1
    uint64_t s2
    uint64_t s3


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _splitmix_out(uint64_t* state) noexcept:
    cdef uint64_t z
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline void _seed_state(XoState* st, uint64_t seed) noexcept:
    cdef uint64_t s = seed
    st.s0 = _splitmix_out(&s)
    st.s1 = _splitmix_out(&s)
    st.s2 = _splitmix_out(&s)
    st.s3 = _splitmix_out(&s)
    if st.s0 == 0 and st.s1 == 0 and st.s2 == 0 and st.s3 == 0:
        st.s0 = <uint64_t>0x9E3779B97F4A7C15


cdef inline uint64_t _next_u64(XoState* st) noexcept:
    cdef uint64_t result = _rotl(st.s0 + st.s3, 23) + st.s0
    cdef uint64_t t = st.s1 << 17
    st.s2 ^= st.s0
    st.s3 ^= st.s1
    st.s1 ^= st.s2
    st.s0 ^= st.s3
    st.s2 ^= t
    st.s3 = _rotl(st.s3, 45)
    return result


cdef inline double _uniform(XoState* st) noexcept:
    return <double>(_next_u64(st) >> 11) * INV53


cdef class RandomStream:
    """Deterministic xoshiro256++ stream; single-owner, never share across tasks."""

    cdef XoState st

    def __init__(self, seed):
        _seed_state(&self.st, <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))

    cpdef uint64_t next_u64(self):
        return _next_u64(&self.st)

    cpdef double uniform(self):
        """One double in [0, 1) with 53 random bits."""
        return _uniform(&self.st)


# -- samplers -------------------------------------------------------------------

cdef inline long _innovation_draw_c(int kind, double param, const double[::1] table,
                                    XoState* st) noexcept:
    cdef double u = _uniform(st)
    cdef double term, c, omp
    cdef long k, i, last
    if kind == K_POISSON:
        term = exp(-param)
        c = term
        k = 0
        while u >= c:
            k += 1
            term *= param / k
            c += term
            if term == 0.0:
                break
        return k
    if kind == K_GEOMETRIC:
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
    c = 0.0
    last = table.shape[0] - 1
    for i in range(last + 1):
        c += table[i]
        if u < c:
            return i
    return last


cdef inline long _binomial_draw_c(long m, double theta, XoState* st) noexcept:
    cdef double q, u, term, c, ratio
    cdef long k, j, s
    cdef bint flip
    if m <= 0:
        return 0
    if theta <= 0.0:
        return 0
    if theta >= 1.0:
        return m
    if m <= 64:
        s = 0
        for j in range(m):
            if _uniform(st) < theta:
                s += 1
        return s
    if theta <= 0.5:
        q = theta
        flip = False
    else:
        q = 1.0 - theta
        flip = True
    u = _uniform(st)
    term = pow(1.0 - q, <double>m)
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


def innovation_draw(int kind, double param, const double[::1] table, RandomStream rng):
    """One draw from the innovation distribution (one uniform consumed)."""
    return _innovation_draw_c(kind, param, table, &rng.st)


def binomial_draw(long m, double theta, RandomStream rng):
    """Exact draw from Binomial(m, theta); see the pure backend for the algorithm."""
    return _binomial_draw_c(m, theta, &rng.st)


# -- innovation pmf -------------------------------------------------------------

cdef inline double _g(int kind, double param, const double[::1] table, long e) noexcept:
    if e < 0:
        return 0.0
    if kind == K_POISSON:
        return exp(-param + e * log(param) - lgamma(e + 1.0))
    if kind == K_GEOMETRIC:
        return param * pow(1.0 - param, <double>e)
    if e >= table.shape[0]:
        return 0.0
    return table[e]


cdef inline double _log_g(int kind, double param, const double[::1] table, long e) noexcept:
    if e < 0:
        return -INFINITY
    if kind == K_POISSON:
        return -param + e * log(param) - lgamma(e + 1.0)
    if kind == K_GEOMETRIC:
        return log(param) + e * log1p(-param)
    if e >= table.shape[0]:
        return -INFINITY
    return log(table[e])


cdef inline double _advance_g(int kind, double param, const double[::1] table,
                              long e_next, double ge) noexcept:
    if kind == K_POISSON:
        return ge * (param / e_next)
    if kind == K_GEOMETRIC:
        return ge * (1.0 - param)
    if e_next >= table.shape[0]:
        return 0.0
    return table[e_next]


cdef inline double _logadd(double a, double b) noexcept:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a < b:
        a, b = b, a
    return a + log1p(exp(b - a))


# -- transition sums --------------------------------------------------------------

cdef struct TransSums:
    double lead
    double rem
    bint ok


cdef struct TransLogs:
    double full
    double lead
    double rem


cdef inline void _support_bounds(int kind, const double[::1] table, long m, long dx,
                                 long* kmin, long* kmax) noexcept:
    cdef long top
    kmin[0] = -dx if dx < 0 else 0
    kmax[0] = m
    if kind == K_TABLE:
        top = table.shape[0] - 1 - dx
        if top < kmax[0]:
            kmax[0] = top


cdef TransSums _trans_sums_linear(int kind, double param, const double[::1] table,
                                  double q, long m, long dx) noexcept:
    cdef TransSums out
    cdef long kmin, kmax, k
    cdef double b, ratio, ge, term, val
    out.lead = 0.0
    out.rem = 0.0
    out.ok = True
    _support_bounds(kind, table, m, dx, &kmin, &kmax)
    if kmin > kmax:
        return out
    if q == 0.0:
        if kmin == 0:
            out.lead = _g(kind, param, table, dx)
        return out
    if q == 1.0:
        val = _g(kind, param, table, dx + m) if (kmin <= m and m <= kmax) else 0.0
        if m <= kmin + 1:
            out.lead = val
        else:
            out.rem = val
        return out
    b = pow(1.0 - q, <double>m)
    if b == 0.0:
        out.ok = False
        return out
    ratio = q / (1.0 - q)
    for k in range(kmin):
        b = b * ((m - k) * ratio / (k + 1.0))
    if b == 0.0:
        out.ok = False
        return out
    ge = _g(kind, param, table, dx + kmin)
    k = kmin
    while True:
        term = b * ge
        if k <= kmin + 1:
            out.lead += term
        else:
            out.rem += term
        if k == kmax or b == 0.0:
            break
        b = b * ((m - k) * ratio / (k + 1.0))
        ge = _advance_g(kind, param, table, dx + k + 1, ge)
        k += 1
    if out.lead + out.rem == 0.0:
        out.lead = 0.0
        out.rem = 0.0
        out.ok = False
    return out


cdef TransLogs _trans_sums_log(int kind, double param, const double[::1] table,
                               double q, long m, long dx) noexcept:
    cdef TransLogs out
    cdef long kmin, kmax, k
    cdef double lq, l1q, lgm, lb, lt
    out.full = -INFINITY
    out.lead = -INFINITY
    out.rem = -INFINITY
    _support_bounds(kind, table, m, dx, &kmin, &kmax)
    if kmin > kmax:
        return out
    lq = log(q)
    l1q = log1p(-q)
    lgm = lgamma(m + 1.0)
    for k in range(kmin, kmax + 1):
        lb = lgm - lgamma(k + 1.0) - lgamma(m - k + 1.0) + k * lq + (m - k) * l1q
        lt = lb + _log_g(kind, param, table, dx + k)
        if lt == -INFINITY:
            continue
        out.full = _logadd(out.full, lt)
        if k <= kmin + 1:
            out.lead = _logadd(out.lead, lt)
        else:
            out.rem = _logadd(out.rem, lt)
    return out


cdef inline double _transition_logprob_c(int kind, double param, const double[::1] table,
                                         double q, long m, long dx) noexcept:
    cdef TransSums s = _trans_sums_linear(kind, param, table, q, m, dx)
    cdef TransLogs lg
    cdef double total
    if s.ok:
        total = s.lead + s.rem
        return log(total) if total > 0.0 else -INFINITY
    lg = _trans_sums_log(kind, param, table, q, m, dx)
    return lg.full


cdef inline void _trans_pair_log(int kind, double param, const double[::1] table,
                                 double q, long m, long dx,
                                 double* log_full, double* log_lead) noexcept:
    cdef TransSums s = _trans_sums_linear(kind, param, table, q, m, dx)
    cdef TransLogs lg
    cdef double total
    if s.ok:
        total = s.lead + s.rem
        log_full[0] = log(total) if total > 0.0 else -INFINITY
        log_lead[0] = log(s.lead) if s.lead > 0.0 else -INFINITY
        return
    lg = _trans_sums_log(kind, param, table, q, m, dx)
    log_full[0] = lg.full
    log_lead[0] = lg.lead


def transition_logprob(int kind, double param, const double[::1] table,
                       double theta, long x_prev, long x_next):
    """log P(x_prev -> x_next) under thinning probability theta; -inf if zero."""
    return _transition_logprob_c(kind, param, table, 1.0 - theta, x_prev, x_next - x_prev)


def transition_split(int kind, double param, const double[::1] table,
                     double q, long m, long dx):
    """(leading, remainder) of the transition probability at death rate q."""
    cdef TransSums s = _trans_sums_linear(kind, param, table, q, m, dx)
    cdef TransLogs lg
    if s.ok:
        return s.lead, s.rem
    lg = _trans_sums_log(kind, param, table, q, m, dx)
    return exp(lg.lead), exp(lg.rem)


cdef void _path_loglr_c(int kind, double param, const double[::1] table,
                        const int64_t[::1] values, double h, double h0,
                        double* exact_out, double* leading_out) noexcept:
    cdef long n = values.shape[0] - 1
    cdef double q1 = h / <double>(n * n)
    cdef double q0 = h0 / <double>(n * n)
    cdef double ex_sum = 0.0, ld_sum = 0.0
    cdef bint ex_num0 = False, ex_den0 = False, ld_num0 = False, ld_den0 = False
    cdef long t, m, dx
    cdef double lf1, ll1, lf0, ll0
    for t in range(1, n + 1):
        m = values[t - 1]
        dx = values[t] - m
        _trans_pair_log(kind, param, table, q1, m, dx, &lf1, &ll1)
        _trans_pair_log(kind, param, table, q0, m, dx, &lf0, &ll0)
        if lf1 == -INFINITY or lf0 == -INFINITY:
            if lf1 == -INFINITY:
                ex_num0 = True
            if lf0 == -INFINITY:
                ex_den0 = True
        else:
            ex_sum += lf1 - lf0
        if ll1 == -INFINITY or ll0 == -INFINITY:
            if ll1 == -INFINITY:
                ld_num0 = True
            if ll0 == -INFINITY:
                ld_den0 = True
        else:
            ld_sum += ll1 - ll0
    if ex_num0 and ex_den0:
        exact_out[0] = NAN
    elif ex_num0:
        exact_out[0] = -INFINITY
    elif ex_den0:
        exact_out[0] = INFINITY
    else:
        exact_out[0] = ex_sum
    if ld_num0 and ld_den0:
        leading_out[0] = NAN
    elif ld_num0:
        leading_out[0] = -INFINITY
    elif ld_den0:
        leading_out[0] = INFINITY
    else:
        leading_out[0] = ld_sum


def path_loglr(int kind, double param, const double[::1] table, values, double h, double h0):
    """(exact, leading) log likelihood ratios of h against h0 for one path."""
    arr = np.ascontiguousarray(values, dtype=np.int64)
    cdef const int64_t[::1] view = arr
    cdef double exact, leading
    _path_loglr_c(kind, param, table, view, h, h0, &exact, &leading)
    return exact, leading


# -- simulation --------------------------------------------------------------------

def simulate_path(int kind, double param, const double[::1] table,
                  double theta, long n, seed):
    """Simulate n thinning-plus-innovation steps from 0; int64 array, length n + 1."""
    cdef XoState st
    _seed_state(&st, <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    out = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] view = out
    cdef long x = 0, t
    for t in range(1, n + 1):
        x = _binomial_draw_c(x, theta, &st) + _innovation_draw_c(kind, param, table, &st)
        view[t] = x
    return out


def simulate_recorded(int kind, double param, const double[::1] table,
                      double theta, long n, seed):
    """Like simulate_path but also returns the innovation and death draws."""
    cdef XoState st
    _seed_state(&st, <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    path = np.zeros(n + 1, dtype=np.int64)
    innov = np.zeros(n, dtype=np.int64)
    deaths = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] pv = path
    cdef int64_t[::1] iv = innov
    cdef int64_t[::1] dv = deaths
    cdef long x = 0, t, surv, eps
    for t in range(1, n + 1):
        surv = _binomial_draw_c(x, theta, &st)
        eps = _innovation_draw_c(kind, param, table, &st)
        dv[t - 1] = x - surv
        iv[t - 1] = eps
        x = surv + eps
        pv[t] = x
    return path, innov, deaths


def batch_stats(int kind, double param, const double[::1] table,
                double theta, long n, seeds):
    """Per-replication path summaries for seeds; dict of aligned arrays."""
    cdef long reps = len(seeds)
    down = np.zeros(reps, dtype=np.int64)
    eq = np.zeros(reps, dtype=np.int64)
    x_n = np.zeros(reps, dtype=np.int64)
    sum_x = np.zeros(reps, dtype=np.int64)
    sum_prev = np.zeros(reps, dtype=np.int64)
    sum_prev_sq = np.zeros(reps, dtype=np.int64)
    sum_cross = np.zeros(reps, dtype=np.int64)
    multi_death = np.zeros(reps, dtype=np.int64)
    max_head = np.zeros(reps, dtype=np.int64)
    cdef int64_t[::1] down_v = down, eq_v = eq, xn_v = x_n, sx_v = sum_x
    cdef int64_t[::1] sp_v = sum_prev, spsq_v = sum_prev_sq, cr_v = sum_cross
    cdef int64_t[::1] md_v = multi_death, mh_v = max_head
    cdef XoState st
    cdef long i, t, x, prev, surv, eps
    cdef int64_t d, e, sx, sp, spsq, cross, multi, mh
    for i in range(reps):
        _seed_state(&st, <uint64_t>(int(seeds[i]) & 0xFFFFFFFFFFFFFFFF))
        x = 0
        d = e = sx = sp = spsq = cross = multi = mh = 0
        for t in range(n):
            prev = x
            surv = _binomial_draw_c(prev, theta, &st)
            eps = _innovation_draw_c(kind, param, table, &st)
            x = surv + eps
            if x < prev:
                d += 1
            elif x == prev:
                e += 1
            sx += x
            sp += prev
            spsq += <int64_t>prev * prev
            cross += <int64_t>prev * x
            if prev - surv >= 2:
                multi += 1
            if prev > mh:
                mh = prev
        down_v[i] = d
        eq_v[i] = e
        xn_v[i] = x
        sx_v[i] = sx
        sp_v[i] = sp
        spsq_v[i] = spsq
        cr_v[i] = cross
        md_v[i] = multi
        mh_v[i] = mh
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


def batch_loglr(int kind, double param, const double[::1] table,
                long n, h_values, double h0, seeds):
    """Simulate under theta = 1 - h0/n^2 and score each h in h_values."""
    cdef long reps = len(seeds)
    cdef long nh = len(h_values)
    cdef double theta0 = 1.0 - h0 / <double>(n * n)
    hs = np.ascontiguousarray(h_values, dtype=np.float64)
    cdef const double[::1] hv = hs
    exact = np.zeros((reps, nh), dtype=np.float64)
    leading = np.zeros((reps, nh), dtype=np.float64)
    down = np.zeros(reps, dtype=np.int64)
    cdef double[:, ::1] ex_v = exact
    cdef double[:, ::1] ld_v = leading
    cdef int64_t[::1] down_v = down
    buf = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] values = buf
    cdef XoState st
    cdef long i, j, t, x
    cdef int64_t d
    cdef double ex, ld
    for i in range(reps):
        _seed_state(&st, <uint64_t>(int(seeds[i]) & 0xFFFFFFFFFFFFFFFF))
        x = 0
        d = 0
        values[0] = 0
        for t in range(1, n + 1):
            x = _binomial_draw_c(x, theta0, &st) + _innovation_draw_c(kind, param, table, &st)
            if x < values[t - 1]:
                d += 1
            values[t] = x
        down_v[i] = d
        for j in range(nh):
            _path_loglr_c(kind, param, table, values, hv[j], h0, &ex, &ld)
            ex_v[i, j] = ex
            ld_v[i, j] = ld
    return exact, leading, down
