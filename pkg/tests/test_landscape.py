import itertools
import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment
from scipy.stats import spearmanr

from issp import subsetspace as ss
from issp.indicators import Indicator
from issp.landscape import Comparator, Landscape, hamming_distance, rank_correlation, spearman
from issp.landscape import wasserstein_distance
from issp.subsetspace import FitnessTable


def make_table(values, n, k):
    return FitnessTable(np.array(values, dtype=float), n, k, 3, Indicator.IGD, b"\0" * 32)


class Naive:
    """Materialized landscape: explicit neighbour lists, BFS, explicit local search."""

    def __init__(self, values, n, k, comp=Comparator()):
        self.f = list(map(float, values))
        self.n, self.k, self.c = n, k, comp
        N = len(self.f)
        self.sol = [ss.unrank(r, n, k) for r in range(N)]
        self.nb = [[ss.rank(y) for y in ss.neighbors(x, n)] for x in self.sol]

    def local(self):
        f, c = self.f, self.c
        return [x for x in range(len(f)) if not any(c.better(f[y], f[x]) for y in self.nb[x])]

    def global_(self):
        fmin = min(self.f)
        return [x for x in range(len(self.f)) if self.c.equal(self.f[x], fmin)]

    def components(self):
        comp = [-1] * len(self.f)
        cid = 0
        for s in range(len(self.f)):
            if comp[s] >= 0:
                continue
            comp[s] = cid
            q = deque([s])
            while q:
                x = q.popleft()
                for y in self.nb[x]:
                    if comp[y] < 0 and self.c.equal(self.f[x], self.f[y]):
                        comp[y] = cid
                        q.append(y)
            cid += 1
        return comp

    def attractor(self, x):
        f, c = self.f, self.c
        while True:
            better = [y for y in self.nb[x] if c.better(f[y], f[x])]
            if not better:
                return x
            best = min(f[y] for y in better)
            x = min(y for y in better if c.equal(f[y], best))

    def neutrality(self):
        deg = self.k * (self.n - self.k)
        return np.mean([sum(self.c.equal(self.f[x], self.f[y]) for y in self.nb[x]) / deg
                        for x in range(len(self.f))])

    def ruggedness(self):
        a = [self.f[x] for x in range(len(self.f)) for _ in self.nb[x]]
        b = [self.f[y] for x in range(len(self.f)) for y in self.nb[x]]
        return spearmanr(a, b).statistic

    def fdc(self, dist):
        G = self.global_()
        d = [min(dist(self.sol[x], self.sol[g]) for g in G) for x in range(len(self.f))]
        return spearmanr(d, self.f).statistic


def brute_wasserstein(A, B):
    k = len(A)
    return min(sum(np.linalg.norm(A[i] - B[p[i]]) for i in range(k))
               for p in itertools.permutations(range(k)))


def _close(a, b, tol=1e-12):
    # degenerate inputs give NaN on both sides
    return (math.isnan(a) and math.isnan(b)) or abs(a - b) <= tol


def _check_against_naive(values, n, k, points=None):
    land = Landscape(make_table(values, n, k))
    naive = Naive(values, n, k)
    opt = land.find_optima()
    assert sorted(opt.local_optima.tolist()) == naive.local()
    assert sorted(opt.global_optima.tolist()) == naive.global_()
    comp = naive.components()
    assert opt.global_plateaus == len({comp[g] for g in naive.global_()})
    assert opt.local_plateaus == len({comp[x] for x in naive.local()})
    # same partition of the solution space into plateaus
    pid = [opt.plateau_id(x) for x in range(len(values))]
    pairs = {(p, c) for p, c in zip(pid, comp)}
    assert len(pairs) == len(set(pid)) == len(set(comp))
    basins = land.compute_basins()
    assert basins.attractor.tolist() == [naive.attractor(x) for x in range(len(values))]
    assert sum(basins.basin_size.values()) == len(values)
    assert _close(land.neutrality(), naive.neutrality())
    assert _close(land.ruggedness(), naive.ruggedness())
    assert _close(land.fdc("hamming"), naive.fdc(hamming_distance))
    if points is not None:
        def wd(x, y):
            return brute_wasserstein(points[list(ss.members(x))], points[list(ss.members(y))])
        assert _close(land.fdc("wasserstein", points), naive.fdc(wd))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_naive_oracle_distinct_values(seed):
    rng = np.random.default_rng(seed)
    points = rng.random((8, 3))
    _check_against_naive(rng.random(56), 8, 3, points)


@pytest.mark.parametrize("seed", [3, 4, 5, 6])
def test_naive_oracle_with_plateaus(seed):
    rng = np.random.default_rng(seed)
    points = rng.random((8, 3))
    _check_against_naive(rng.integers(0, 6, 56).astype(float), 8, 3, points)


@pytest.mark.filterwarnings("ignore::scipy.stats.ConstantInputWarning")
@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=15, max_size=15))
def test_naive_oracle_property(vals):
    _check_against_naive(vals, 6, 2)


def test_distinct_increasing_table():
    # toy n=6, k=2 with all-distinct values
    vals = np.arange(15, dtype=float)
    land = Landscape(make_table(vals, 6, 2))
    assert land.find_optima().local_optima.tolist() == Naive(vals, 6, 2).local()
    assert land.neutrality() == 0.0


def test_constant_table():
    land = Landscape(make_table(np.full(56, 2.5), 8, 3))
    opt = land.find_optima()
    assert len(opt.local_optima) == 56 and len(opt.global_optima) == 56
    assert opt.global_plateaus == 1 and opt.local_plateaus == 1
    assert land.neutrality() == 1.0
    assert math.isnan(land.ruggedness())


def test_fdc_one_when_fitness_is_distance():
    n, k = 9, 3
    opt = ss.unrank(17, n, k)
    vals = [hamming_distance(ss.unrank(r, n, k), opt) for r in range(math.comb(n, k))]
    land = Landscape(make_table(vals, n, k))
    assert land.find_optima().global_optima.tolist() == [17]
    assert land.fdc("hamming") == pytest.approx(1.0, abs=1e-12)


def test_invariance_under_monotone_transform():
    rng = np.random.default_rng(9)
    vals = rng.normal(size=math.comb(10, 4))
    a = Landscape(make_table(vals, 10, 4))
    b = Landscape(make_table(np.exp(vals), 10, 4))
    assert a.ruggedness() == pytest.approx(b.ruggedness(), abs=1e-12)
    assert a.fdc() == pytest.approx(b.fdc(), abs=1e-12)


def test_neutrality_monotone_in_tolerance():
    rng = np.random.default_rng(4)
    vals = np.round(rng.random(math.comb(10, 3)), 3) + rng.random(math.comb(10, 3)) * 1e-7
    last_neut, last_plateaus = -1.0, math.inf
    for tol in (1e-9, 1e-6, 1e-3):
        land = Landscape(make_table(vals, 10, 3), Comparator(tol_rel=tol))
        neut = land.neutrality()
        plateaus = len(set(land.find_optima().plateau_id(x) for x in range(len(vals))))
        assert neut >= last_neut and plateaus <= last_plateaus
        last_neut, last_plateaus = neut, plateaus


def test_local_optima_verification_sampled():
    rng = np.random.default_rng(2)
    n, k = 12, 4
    vals = rng.random(math.comb(n, k))
    opt = Landscape(make_table(vals, n, k)).find_optima()
    loc = set(opt.local_optima.tolist())
    for r in rng.integers(0, len(vals), 200):
        nb = [vals[ss.rank(y)] for y in ss.neighbors(ss.unrank(int(r), n, k), n)]
        assert (min(nb) >= vals[r]) == (int(r) in loc)


def test_ruggedness_sampled_close_to_exact():
    rng = np.random.default_rng(0)
    n, k = 14, 4
    pts = rng.random((n, 3))
    vals = [np.sum(pts[list(ss.members(ss.unrank(r, n, k)))]) for r in range(math.comb(n, k))]
    land = Landscape(make_table(vals, n, k))
    assert land.ruggedness_sampled(50_000, 1) == pytest.approx(land.ruggedness(), abs=0.02)


def test_spearman_helpers():
    rng = np.random.default_rng(1)
    a, b = rng.random(500), rng.random(500)
    b[::7] = b[0]
    assert spearman(a, b) == pytest.approx(spearmanr(a, b).statistic, abs=1e-12)
    t = make_table(a[:56], 8, 3)
    assert rank_correlation(t, t) == pytest.approx(1.0)
    assert rank_correlation(a, -a) == pytest.approx(-1.0)
    assert math.isnan(rank_correlation(np.ones(5), a[:5]))


def test_hamming_example():
    assert hamming_distance(0b0101, 0b1001) == 2


def test_wasserstein_identical_is_zero():
    S = np.random.default_rng(0).random((5, 3))
    assert wasserstein_distance(S, S) == 0.0


def test_wasserstein_brute_force_pairs():
    rng = np.random.default_rng(11)
    for _ in range(100):
        A, B = rng.random((5, 3)), rng.random((5, 3))
        got = wasserstein_distance(A, B)
        assert got == pytest.approx(brute_wasserstein(A, B), abs=1e-12)
        cost = np.linalg.norm(A[:, None] - B[None], axis=2)
        r, c = linear_sum_assignment(cost)
        assert got == pytest.approx(cost[r, c].sum(), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2 ** 31))
def test_assignment_matches_scipy(k, seed):
    rng = np.random.default_rng(seed)
    cost = rng.random((k, k)) * rng.choice([1.0, 1e3])
    from issp.assignment import assignment_cost
    r, c = linear_sum_assignment(cost)
    assert assignment_cost(cost) == pytest.approx(cost[r, c].sum(), rel=1e-12, abs=1e-12)


def test_real_instance_partition_and_optima():
    from issp.indicators import IndicatorConfig
    from issp.pointset import generate
    inst = ss.Instance(generate("linear", 14, 3, 3), 4)
    table = ss.build_fitness_table(inst, IndicatorConfig.default("hv", inst.pointset))
    land = Landscape(table)
    basins = land.compute_basins()
    assert sum(basins.basin_size.values()) == math.comb(14, 4)
    for x in land.find_optima().local_optima:
        assert basins.attractor[x] == x
    assert set(basins.basin_size) == set(land.find_optima().local_optima.tolist())
