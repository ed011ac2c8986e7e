"""Equivalence of the compiled and pure-Python kernels.

Integer draws must agree bit for bit; floating-point results to near
machine precision. Skipped entirely when the extension is not built.
"""

import numpy as np
import pytest

import inar1._kernels_py as pyk

cyk = pytest.importorskip("inar1._kernels_cy")

EMPTY = np.empty(0, dtype=np.float64)
TABLE = np.array([0.25, 0.5, 0.25])
SPECS = [
    (pyk.KIND_POISSON, 1.0, EMPTY),
    (pyk.KIND_GEOMETRIC, 0.5, EMPTY),
    (pyk.KIND_TABLE, 0.0, TABLE),
]


class TestStreams:
    def test_u64_sequences(self):
        for seed in (0, 1, 12345, 2**64 - 1):
            rp, rc = pyk.RandomStream(seed), cyk.RandomStream(seed)
            assert [rp.next_u64() for _ in range(500)] == [rc.next_u64() for _ in range(500)]

    def test_uniform_sequences(self):
        rp, rc = pyk.RandomStream(99), cyk.RandomStream(99)
        assert [rp.uniform() for _ in range(500)] == [rc.uniform() for _ in range(500)]


class TestSamplers:
    def test_binomial_draws(self):
        for seed in range(10):
            rp, rc = pyk.RandomStream(seed), cyk.RandomStream(seed)
            for mm in (0, 1, 5, 63, 64, 65, 200, 1500):
                for theta in (0.0, 0.1, 0.5, 0.9, 0.9999, 1.0):
                    assert pyk.binomial_draw(mm, theta, rp) == cyk.binomial_draw(mm, theta, rc)

    def test_innovation_draws(self):
        for kind, param, table in SPECS:
            rp, rc = pyk.RandomStream(7), cyk.RandomStream(7)
            a = [pyk.innovation_draw(kind, param, table, rp) for _ in range(3000)]
            b = [cyk.innovation_draw(kind, param, table, rc) for _ in range(3000)]
            assert a == b


class TestSimulation:
    def test_paths_bit_identical(self):
        for kind, param, table in SPECS:
            for theta in (0.0, 0.5, 0.99, 1.0 - 2e-6, 1.0):
                a = pyk.simulate_path(kind, param, table, theta, 400, 271828)
                b = cyk.simulate_path(kind, param, table, theta, 400, 271828)
                assert np.array_equal(a, b)

    def test_recorded_bit_identical(self):
        for kind, param, table in SPECS:
            pa, ia, da = pyk.simulate_recorded(kind, param, table, 0.98, 200, 31)
            pb, ib, db = cyk.simulate_recorded(kind, param, table, 0.98, 200, 31)
            assert np.array_equal(pa, pb)
            assert np.array_equal(ia, ib)
            assert np.array_equal(da, db)

    def test_batch_stats_bit_identical(self):
        seeds = list(range(80))
        for kind, param, table in SPECS:
            sa = pyk.batch_stats(kind, param, table, 0.9995, 250, seeds)
            sb = cyk.batch_stats(kind, param, table, 0.9995, 250, seeds)
            assert set(sa) == set(sb)
            for key in sa:
                assert np.array_equal(sa[key], sb[key]), key


class TestLikelihoodKernels:
    def test_transition_logprob_close(self):
        for kind, param, table in SPECS:
            for theta in (0.0, 0.4, 0.99, 1.0):
                for x in (0, 1, 4, 40, 300):
                    for y in (0, 2, 5, 41, 310):
                        a = pyk.transition_logprob(kind, param, table, theta, x, y)
                        b = cyk.transition_logprob(kind, param, table, theta, x, y)
                        if a == float("-inf") or b == float("-inf"):
                            assert a == b
                        else:
                            assert a == pytest.approx(b, rel=1e-12, abs=1e-12)

    def test_transition_split_close(self):
        for kind, param, table in SPECS:
            for q in (0.0, 1e-6, 0.02, 0.5, 1.0):
                for mm in (0, 1, 7, 30):
                    for dx in (-3, -1, 0, 2, 6):
                        a = pyk.transition_split(kind, param, table, q, mm, dx)
                        b = cyk.transition_split(kind, param, table, q, mm, dx)
                        assert a[0] == pytest.approx(b[0], rel=1e-12, abs=1e-300)
                        assert a[1] == pytest.approx(b[1], rel=1e-12, abs=1e-300)

    def test_batch_loglr_close(self):
        seeds = list(range(40))
        for kind, param, table in SPECS:
            ea, la, da = pyk.batch_loglr(kind, param, table, 150, [2.0, 0.5], 1.0, seeds)
            eb, lb, db = cyk.batch_loglr(kind, param, table, 150, [2.0, 0.5], 1.0, seeds)
            assert np.array_equal(da, db)
            np.testing.assert_allclose(ea, eb, rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(la, lb, rtol=1e-10, atol=1e-12)
