"""Exact landscape measures over a fully enumerated fitness table.

Everything here is a scan over ranks. One fused pass visits the k(n-k)
neighbours of every solution and records equal-neighbour counts,
local-optimum flags, the steepest-descent successor and the ruggedness
cross moments; plateaus, basins and correlations are derived from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange
from scipy.stats import rankdata

from .assignment import assignment_cost, min_cost_assignment
from .subsetspace import (FitnessTable, binomial_table, neighbor_ranks, next_combination,
                          unrank_into)

_CHUNK = 8192


@dataclass(frozen=True)
class Comparator:
    tol_rel: float = 1e-9
    tol_abs: float = 1e-12

    def equal(self, a: float, b: float) -> bool:
        return _equal(a, b, self.tol_rel, self.tol_abs)

    def better(self, a: float, b: float) -> bool:
        return a < b and not self.equal(a, b)


@njit(cache=True)
def _equal(a, b, tol_rel, tol_abs):
    if a == b:
        return True
    scale = max(abs(a), abs(b))
    return abs(a - b) <= max(tol_abs, tol_rel * scale)


@dataclass
class OptimaReport:
    global_optima: np.ndarray
    local_optima: np.ndarray
    global_plateaus: int
    local_plateaus: int
    # plateau id (root rank) per solution, -1 for solutions with no equal neighbour
    plateau_of: np.ndarray = field(repr=False)

    @property
    def plateau_membership(self) -> dict[int, int]:
        idx = np.nonzero(self.plateau_of >= 0)[0]
        return dict(zip(idx.tolist(), self.plateau_of[idx].tolist()))

    def plateau_id(self, x: int) -> int:
        p = int(self.plateau_of[x])
        return x if p < 0 else p


@dataclass
class BasinMap:
    attractor: np.ndarray
    basin_size: dict[int, int]


# -- kernels ----------------------------------------------------------------

@njit(cache=True, parallel=True)
def _scan_kernel(values, centered, n, k, binom, tol_rel, tol_abs,
                 eq_count, is_local, descent, cross):
    N = values.shape[0]
    deg = k * (n - k)
    nchunks = (N + _CHUNK - 1) // _CHUNK
    for ch in prange(nchunks):
        lo = ch * _CHUNK
        hi = min(N, lo + _CHUNK)
        comb = np.empty(k, dtype=np.int64)
        nb = np.empty(deg, dtype=np.int64)
        fv = np.empty(deg)
        pre = np.empty(k, dtype=np.int64)
        suf = np.empty(k, dtype=np.int64)
        rest = np.empty(k, dtype=np.int64)
        unrank_into(lo, n, k, binom, comb)
        for x in range(lo, hi):
            neighbor_ranks(comb, n, binom, nb, pre, suf, rest)
            fx = values[x]
            eq = 0
            best = np.inf
            improving = False
            s = 0.0
            for t in range(deg):
                y = nb[t]
                fy = values[y]
                fv[t] = fy
                s += centered[y]
                if _equal(fx, fy, tol_rel, tol_abs):
                    eq += 1
                elif fy < fx:
                    improving = True
                    if fy < best:
                        best = fy
            eq_count[x] = eq
            cross[x] = centered[x] * s
            if improving:
                is_local[x] = False
                pick = N
                for t in range(deg):
                    fy = fv[t]
                    if (fy < fx and not _equal(fx, fy, tol_rel, tol_abs)
                            and _equal(fy, best, tol_rel, tol_abs) and nb[t] < pick):
                        pick = nb[t]
                descent[x] = pick
            else:
                is_local[x] = True
                descent[x] = x
            if x + 1 < hi:
                next_combination(comb, n)


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _plateau_kernel(values, eq_count, n, k, binom, tol_rel, tol_abs):
    N = values.shape[0]
    deg = k * (n - k)
    parent = np.arange(N)
    comb = np.empty(k, dtype=np.int64)
    nb = np.empty(deg, dtype=np.int64)
    pre = np.empty(k, dtype=np.int64)
    suf = np.empty(k, dtype=np.int64)
    rest = np.empty(k, dtype=np.int64)
    for i in range(k):
        comb[i] = i
    for x in range(N):
        if eq_count[x] > 0:
            neighbor_ranks(comb, n, binom, nb, pre, suf, rest)
            fx = values[x]
            for t in range(deg):
                y = nb[t]
                if y > x and _equal(fx, values[y], tol_rel, tol_abs):
                    a = _find(parent, x)
                    b = _find(parent, y)
                    if a != b:
                        if a < b:
                            parent[b] = a
                        else:
                            parent[a] = b
        if x + 1 < N:
            next_combination(comb, n)
    out = np.full(N, -1, dtype=np.int64)
    for x in range(N):
        if eq_count[x] > 0:
            out[x] = _find(parent, x)
    return out


@njit(cache=True)
def _attractor_kernel(descent):
    N = descent.shape[0]
    att = np.full(N, -1, dtype=np.int64)
    path = np.empty(N, dtype=np.int64)
    for x in range(N):
        if att[x] >= 0:
            continue
        m = 0
        y = x
        while att[y] < 0 and descent[y] != y:
            path[m] = y
            m += 1
            y = descent[y]
        root = att[y] if att[y] >= 0 else y
        att[y] = root
        for i in range(m):
            att[path[i]] = root
    return att


@njit(cache=True, parallel=True)
def _hamming_to_nearest(n, k, binom, G, out):
    N = out.shape[0]
    g = G.shape[0]
    nchunks = (N + _CHUNK - 1) // _CHUNK
    for ch in prange(nchunks):
        lo = ch * _CHUNK
        hi = min(N, lo + _CHUNK)
        comb = np.empty(k, dtype=np.int64)
        unrank_into(lo, n, k, binom, comb)
        for x in range(lo, hi):
            best = 2 * k
            for j in range(g):
                a = 0
                b = 0
                common = 0
                while a < k and b < k:
                    if comb[a] == G[j, b]:
                        common += 1
                        a += 1
                        b += 1
                    elif comb[a] < G[j, b]:
                        a += 1
                    else:
                        b += 1
                h = 2 * (k - common)
                if h < best:
                    best = h
            out[x] = best
            if x + 1 < hi:
                next_combination(comb, n)


@njit(cache=True, parallel=True)
def _wasserstein_to_nearest(n, k, binom, G, D, out):
    N = out.shape[0]
    g = G.shape[0]
    nchunks = (N + _CHUNK - 1) // _CHUNK
    for ch in prange(nchunks):
        lo = ch * _CHUNK
        hi = min(N, lo + _CHUNK)
        comb = np.empty(k, dtype=np.int64)
        cost = np.empty((k, k))
        u = np.empty(k + 1)
        v = np.empty(k + 1)
        p = np.empty(k + 1, dtype=np.int64)
        way = np.empty(k + 1, dtype=np.int64)
        minv = np.empty(k + 1)
        used = np.empty(k + 1, dtype=np.bool_)
        unrank_into(lo, n, k, binom, comb)
        for x in range(lo, hi):
            best = np.inf
            for j in range(g):
                for a in range(k):
                    for b in range(k):
                        cost[a, b] = D[comb[a], G[j, b]]
                w = min_cost_assignment(cost, u, v, p, way, minv, used)
                if w < best:
                    best = w
            out[x] = best
            if x + 1 < hi:
                next_combination(comb, n)


# -- statistics -------------------------------------------------------------

def pearson(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a = a - np.mean(a)
    b = b - np.mean(b)
    den = math.sqrt(float(np.sum(a * a)) * float(np.sum(b * b)))
    if den == 0.0:
        return math.nan
    return float(np.sum(a * b)) / den


def spearman(a, b) -> float:
    """Spearman's rho as Pearson on average ranks; NaN for a constant input."""
    return pearson(rankdata(a), rankdata(b))


# -- analysis ---------------------------------------------------------------

class Landscape:
    """Lazily computed landscape measures for one fitness table."""

    def __init__(self, table: FitnessTable, comparator: Comparator | None = None):
        self.table = table
        self.values = np.ascontiguousarray(table.values, dtype=np.float64)
        self.comparator = comparator or Comparator()
        self.n, self.k = table.n, table.k
        self.binom = binomial_table(self.n, self.k)
        self._scan = None
        self._optima = None
        self._basins = None

    @property
    def degree(self) -> int:
        return self.k * (self.n - self.k)

    def scan(self):
        if self._scan is None:
            N = len(self.values)
            ranks = rankdata(self.values)
            centered = ranks - (N + 1) / 2.0
            eq = np.empty(N, dtype=np.int32)
            loc = np.empty(N, dtype=np.bool_)
            desc = np.empty(N, dtype=np.int64)
            cross = np.empty(N)
            c = self.comparator
            _scan_kernel(self.values, centered, self.n, self.k, self.binom, c.tol_rel, c.tol_abs,
                         eq, loc, desc, cross)
            self._scan = {"eq": eq, "local": loc, "descent": desc, "cross": cross,
                          "var": float(np.sum(centered * centered))}
        return self._scan

    def find_optima(self) -> OptimaReport:
        if self._optima is None:
            sc = self.scan()
            c = self.comparator
            local = np.nonzero(sc["local"])[0]
            fmin = float(np.min(self.values))
            glob = np.array([x for x in local if c.equal(self.values[x], fmin)], dtype=np.int64)
            plateau_of = _plateau_kernel(self.values, sc["eq"], self.n, self.k, self.binom,
                                         c.tol_rel, c.tol_abs)
            pid = np.where(plateau_of >= 0, plateau_of, np.arange(len(self.values)))
            self._optima = OptimaReport(glob, local, len(np.unique(pid[glob])),
                                        len(np.unique(pid[local])), plateau_of)
        return self._optima

    def compute_basins(self) -> BasinMap:
        if self._basins is None:
            att = _attractor_kernel(self.scan()["descent"])
            counts = np.bincount(att, minlength=len(att))
            idx = np.nonzero(counts)[0]
            self._basins = BasinMap(att, dict(zip(idx.tolist(), counts[idx].tolist())))
        return self._basins

    def neutrality(self) -> float:
        eq = self.scan()["eq"]
        return float(np.sum(eq.astype(np.float64) / self.degree)) / len(eq)

    def ruggedness(self) -> float:
        sc = self.scan()
        den = sc["var"] * self.degree
        if den == 0.0:
            return math.nan
        return float(np.sum(sc["cross"])) / den

    def distance_to_optima(self, metric: str = "hamming", points=None) -> np.ndarray:
        G = np.array([_members_of(g, self.n, self.k, self.binom)
                      for g in self.find_optima().global_optima], dtype=np.int64)
        out = np.empty(len(self.values))
        if metric == "hamming":
            tmp = np.empty(len(self.values), dtype=np.int64)
            _hamming_to_nearest(self.n, self.k, self.binom, G, tmp)
            out[:] = tmp
        elif metric == "wasserstein":
            if points is None:
                raise ValueError("wasserstein FDC needs the point coordinates")
            P = np.asarray(points, dtype=np.float64)
            D = np.sqrt(np.sum((P[:, None, :] - P[None, :, :]) ** 2, axis=2))
            _wasserstein_to_nearest(self.n, self.k, self.binom, G, D, out)
        else:
            raise ValueError(f"unknown metric {metric!r}")
        return out

    def fdc(self, metric: str = "hamming", points=None) -> float:
        if len(self.values) < 2:
            return math.nan
        return spearman(self.distance_to_optima(metric, points), self.values)

    def ruggedness_sampled(self, m: int, seed: int) -> float:
        """Spearman over ``m`` random neighbour pairs, both orientations."""
        rng = np.random.default_rng(seed)
        xs = rng.integers(0, len(self.values), size=m)
        picks = rng.integers(0, self.degree, size=m)
        nb = np.empty(self.degree, dtype=np.int64)
        work = [np.empty(self.k, dtype=np.int64) for _ in range(3)]
        ys = np.empty(m, dtype=np.int64)
        for i, (x, t) in enumerate(zip(xs, picks)):
            c = np.array(_members_of(int(x), self.n, self.k, self.binom), dtype=np.int64)
            neighbor_ranks(c, self.n, self.binom, nb, *work)
            ys[i] = nb[t]
        a = np.concatenate([self.values[xs], self.values[ys]])
        b = np.concatenate([self.values[ys], self.values[xs]])
        return spearman(a, b)


def _members_of(r, n, k, binom):
    out = np.empty(k, dtype=np.int64)
    unrank_into(int(r), n, k, binom, out)
    return out


# -- functional interface ---------------------------------------------------

def find_optima(table: FitnessTable, comparator: Comparator | None = None) -> OptimaReport:
    return Landscape(table, comparator).find_optima()


def compute_basins(table: FitnessTable, comparator: Comparator | None = None) -> BasinMap:
    return Landscape(table, comparator).compute_basins()


def neutrality(table: FitnessTable, comparator: Comparator | None = None) -> float:
    return Landscape(table, comparator).neutrality()


def ruggedness(table: FitnessTable) -> float:
    return Landscape(table).ruggedness()


def fdc(table: FitnessTable, metric: str = "hamming", points=None,
        comparator: Comparator | None = None) -> float:
    return Landscape(table, comparator).fdc(metric, points)


def rank_correlation(table_a, table_b) -> float:
    a = getattr(table_a, "values", table_a)
    b = getattr(table_b, "values", table_b)
    if len(a) != len(b):
        raise ValueError("tables cover different solution spaces")
    return spearman(a, b)


def hamming_distance(x: int, y: int) -> int:
    return bin(x ^ y).count("1")


def wasserstein_distance(S1, S2, solver=None) -> float:
    """1-Wasserstein distance between two equal-size point sets (Euclidean cost)."""
    S1 = np.asarray(S1, float)
    S2 = np.asarray(S2, float)
    if S1.shape != S2.shape:
        raise ValueError("point sets must have the same size and dimension")
    cost = np.sqrt(np.sum((S1[:, None, :] - S2[None, :, :]) ** 2, axis=2))
    return (solver or assignment_cost)(cost)


def value_distribution(values) -> dict:
    v = np.asarray(values, float)
    lo, hi = float(v.min()), float(v.max())
    norm = (v - lo) / (hi - lo) if hi > lo else np.zeros_like(v)
    q = np.quantile(norm, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"min": lo, "max": hi, "q0": q[0], "q1": q[1], "median": q[2], "q3": q[3], "q4": q[4],
            "mean": float(np.mean(norm))}


def normalized_histogram(values, bins: int = 50):
    v = np.asarray(values, float)
    lo, hi = float(v.min()), float(v.max())
    norm = (v - lo) / (hi - lo) if hi > lo else np.zeros_like(v)
    counts, edges = np.histogram(norm, bins=bins, range=(0.0, 1.0))
    return counts, edges
