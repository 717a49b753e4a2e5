import math

import numpy as np
import pytest

from pfrlab import (AbsoluteContinuityViolated, FinitePmf, Kernel, Seed,
                    arrival_stream, derive_subseed, dominance_parameter,
                    expected_log_k_bound, geometric_parameter_exact,
                    kl_divergence, mutual_information, pfr_select)
from conftest import binary_entropy

TARGET = FinitePmf(np.array([0.8, 0.2]))
UNIFORM = FinitePmf.uniform(2)
SEED = Seed.from_int(1234)


def select_once(trial, target=TARGET, proposal=UNIFORM, **kw):
    stream = arrival_stream(derive_subseed(SEED, trial, "codebook"), "codebook",
                            proposal)
    return pfr_select(target, proposal, stream, **kw)


def run_many(n, target=TARGET, proposal=UNIFORM):
    ks = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    for t in range(n):
        r = select_once(t, target, proposal)
        ks[t], ys[t] = r.k, r.y
    return ks, ys


class TestExactParameters:
    def test_geometric_identity_when_equal(self):
        for y in range(2):
            assert geometric_parameter_exact(UNIFORM, UNIFORM, y) == pytest.approx(1.0)

    def test_geometric_derived_values(self):
        # oracle: sum_y' q(y') max{f(y), f(y')} with f = (1.6, 0.4)
        assert geometric_parameter_exact(TARGET, UNIFORM, 0) == pytest.approx(0.625)
        assert geometric_parameter_exact(TARGET, UNIFORM, 1) == pytest.approx(1.0)

    def test_dominance_values(self):
        assert dominance_parameter(UNIFORM, UNIFORM, 0) == pytest.approx(0.5)
        assert dominance_parameter(TARGET, UNIFORM, 0) == pytest.approx(1 / 2.6)
        assert dominance_parameter(TARGET, UNIFORM, 1) == pytest.approx(1 / 1.4)

    def test_dominance_never_exceeds_exact(self):
        # J's survival dominates K's: geometric parameter of J is the smaller
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = rng.random(3) + 1e-2
            b = rng.random(3) + 1e-2
            p, q = FinitePmf(a / a.sum()), FinitePmf(b / b.sum())
            for y in range(3):
                assert (dominance_parameter(p, q, y)
                        <= geometric_parameter_exact(p, q, y) + 1e-12)


class TestSelection:
    def test_equal_laws_select_first_point(self):
        for t in range(200):
            r = select_once(t, UNIFORM, UNIFORM)
            assert r.k == 1
            assert r.k <= r.examined

    def test_point_mass_target(self):
        target = FinitePmf.point_mass(1, 4)
        proposal = FinitePmf.uniform(4)
        ks = []
        for t in range(4000):
            r = select_once(t, target, proposal)
            assert r.y == 1
            ks.append(r.k)
        # K is the index of the first point with the winning mark: Geom(1/4)
        ks = np.array(ks)
        for k in range(1, 8):
            emp = (ks > k).mean()
            se = math.sqrt(emp * (1 - emp) / ks.size) + 1e-9
            assert emp <= 0.75 ** k + 3 * se

    def test_absolute_continuity_enforced(self):
        bad_prop = FinitePmf(np.array([1.0, 0.0]))
        stream = arrival_stream(SEED, "cb", bad_prop)
        with pytest.raises(AbsoluteContinuityViolated):
            pfr_select(TARGET, bad_prop, stream)

    def test_mark_law_mismatch_rejected(self):
        stream = arrival_stream(SEED, "cb", FinitePmf(np.array([0.3, 0.7])))
        with pytest.raises(ValueError):
            pfr_select(TARGET, UNIFORM, stream)

    def test_determinism(self):
        assert select_once(77) == select_once(77)

    def test_score_definition(self):
        r = select_once(5)
        stream = arrival_stream(derive_subseed(SEED, 5, "codebook"), "codebook",
                                UNIFORM)
        pts = [stream.next_marked_point() for _ in range(r.examined)]
        f = TARGET.probs / UNIFORM.probs
        winner = pts[r.k - 1]
        assert winner.mark == r.y
        assert r.score == pytest.approx(winner.time / f[winner.mark], rel=1e-12)
        finite = [p.time / f[p.mark] for p in pts if f[p.mark] > 0]
        assert min(finite) == pytest.approx(r.score, rel=1e-12)


class TestLaws:
    def test_marginal_and_conditional(self):
        n = 20_000
        ks, ys = run_many(n)
        freq = np.bincount(ys, minlength=2) / n
        assert 0.5 * np.abs(freq - TARGET.probs).sum() <= 3 * math.sqrt(2 / n)
        # exact conditional geometric law given y, parameter from the oracle
        k1 = ks[ys == 1]
        assert (k1 == 1).all()
        k0 = ks[ys == 0]
        p = geometric_parameter_exact(TARGET, UNIFORM, 0)
        kmax = int(k0.max())
        emp = np.bincount(k0, minlength=kmax + 1)[1:] / k0.size
        pmf = p * (1 - p) ** (np.arange(1, kmax + 1) - 1)
        tv = 0.5 * (np.abs(emp - pmf).sum() + (1 - p) ** kmax)
        assert tv <= 0.02

    def test_stochastic_dominance(self):
        ks, ys = run_many(20_000)
        for y in range(2):
            ky = ks[ys == y]
            p_dom = dominance_parameter(TARGET, UNIFORM, y)
            for k in range(1, 51):
                surv = (ky > k).mean()
                se = math.sqrt(surv * (1 - surv) / ky.size)
                assert surv <= (1 - p_dom) ** k + 3 * se + 1e-12

    def test_expected_log_k_bound_holds(self):
        ks, _ = run_many(20_000)
        logk = np.log2(ks)
        bound = kl_divergence(TARGET, UNIFORM) + 1.0
        assert logk.mean() + 3 * logk.std(ddof=1) / math.sqrt(ks.size) <= bound

    def test_stopping_rule_exactness(self):
        for t in range(10_000):
            a = select_once(t)
            b = select_once(t, horizon_scale=2.0)
            assert (a.k, a.y) == (b.k, b.y)
            assert b.examined >= a.examined

    def test_blocked_path_equals_generic(self):
        class Opaque:
            def __init__(self, inner):
                self._inner = inner
                self.mark_law = inner.mark_law

            def next_marked_point(self):
                return self._inner.next_marked_point()

        for t in range(3000):
            sub = derive_subseed(SEED, t, "codebook")
            fast = pfr_select(TARGET, UNIFORM,
                              arrival_stream(sub, "codebook", UNIFORM))
            slow = pfr_select(TARGET, UNIFORM,
                              Opaque(arrival_stream(sub, "codebook", UNIFORM)))
            assert fast == slow


class TestExpectedLogKBound:
    def test_zero_divergence(self):
        k = Kernel(np.array([[0.5, 0.5], [0.5, 0.5]]))
        assert expected_log_k_bound(UNIFORM, k, UNIFORM) == pytest.approx(1.0)

    def test_output_marginal_gives_mi_plus_one(self):
        k = Kernel(np.array([[0.89, 0.11], [0.11, 0.89]]))
        q = k.output_marginal(UNIFORM)
        got = expected_log_k_bound(UNIFORM, k, q)
        assert got == pytest.approx(mutual_information(UNIFORM, k) + 1.0, abs=1e-12)
        assert got == pytest.approx(1.0 - binary_entropy(0.11) + 1.0, abs=1e-12)

    def test_absolute_continuity(self):
        k = Kernel(np.array([[0.5, 0.5], [0.5, 0.5]]))
        with pytest.raises(AbsoluteContinuityViolated):
            expected_log_k_bound(UNIFORM, k, FinitePmf(np.array([1.0, 0.0])))
