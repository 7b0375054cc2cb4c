"""Baseline subset selection: forward greedy, backward greedy, local search.

Ties between equally good candidates are broken uniformly at random with
the run's own generator; tie detection is exact float equality.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .indicators import DistanceCache, IndicatorConfig, precompute_distance_cache, to_canonical
from .subsetspace import FitnessTable, Instance, from_members, rank


class Method(str, Enum):
    GSF = "gsf"
    GSB = "gsb"
    LS = "ls"


@dataclass
class RunResult:
    method: Method
    seed: int
    best_subset: int
    best_value: float
    evaluations: int
    normalized_value: float | None = None
    moves: int = 0
    picks: list[int] = field(default_factory=list)
    trajectory: list[tuple[int, float]] = field(default_factory=list)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.best_subset.bit_length()) if (self.best_subset >> i) & 1)


def _choose(vals: np.ndarray, rng) -> tuple[int, float]:
    best = vals.min()
    ties = np.flatnonzero(vals == best)
    pick = ties[0] if len(ties) == 1 else ties[rng.integers(len(ties))]
    return int(pick), float(best)


def _cache(instance, config, cache):
    return cache if cache is not None else precompute_distance_cache(instance.pointset, config)


def greedy_forward(instance: Instance, config: IndicatorConfig, rng,
                   cache: DistanceCache | None = None, seed: int = -1) -> RunResult:
    cache = _cache(instance, config, cache)
    n, k = instance.n, instance.k
    chosen: list[int] = []
    evals = 0
    traj = []
    value = np.inf
    for step in range(k):
        cand = [c for c in range(n) if c not in chosen]
        batch = np.array([sorted(chosen + [c]) for c in cand], dtype=np.int64)
        vals = cache.evaluate_batch(batch)
        evals += len(cand)
        j, value = _choose(vals, rng)
        chosen.append(cand[j])
        traj.append((step + 1, value))
    return RunResult(Method.GSF, seed, from_members(chosen), value, evals, picks=chosen,
                     trajectory=traj)


def greedy_backward(instance: Instance, config: IndicatorConfig, rng,
                    cache: DistanceCache | None = None, seed: int = -1) -> RunResult:
    cache = _cache(instance, config, cache)
    n, k = instance.n, instance.k
    kept = list(range(n))
    removed = []
    evals = 0
    traj = []
    value = np.inf
    while len(kept) > k:
        batch = np.array([kept[:i] + kept[i + 1:] for i in range(len(kept))], dtype=np.int64)
        vals = cache.evaluate_batch(batch)
        evals += len(kept)
        j, value = _choose(vals, rng)
        removed.append(kept.pop(j))
        traj.append((n - len(kept), value))
    return RunResult(Method.GSB, seed, from_members(kept), value, evals, picks=removed,
                     trajectory=traj)


def _neighbor_batch(sel: list[int], n: int) -> np.ndarray:
    out = []
    inside = set(sel)
    for a in sel:
        rest = [x for x in sel if x != a]
        for b in range(n):
            if b not in inside:
                out.append(sorted(rest + [b]))
    return np.array(out, dtype=np.int64)


def local_search(instance: Instance, config: IndicatorConfig, rng, x_init=None,
                 cache: DistanceCache | None = None, seed: int = -1) -> RunResult:
    """Best-improvement 2-bit-swap local search until no neighbour is strictly better."""
    cache = _cache(instance, config, cache)
    n, k = instance.n, instance.k
    if x_init is None:
        sel = sorted(int(i) for i in rng.choice(n, size=k, replace=False))
    elif isinstance(x_init, (int, np.integer)):
        sel = [i for i in range(n) if (int(x_init) >> i) & 1]
    else:
        sel = sorted(int(i) for i in x_init)
    if len(sel) != k:
        raise ValueError(f"initial subset has {len(sel)} points, expected {k}")
    value = cache.evaluate(sel)
    evals = 1
    moves = 0
    traj = [(0, value)]
    while True:
        batch = _neighbor_batch(sel, n)
        vals = cache.evaluate_batch(batch)
        evals += len(batch)
        if not vals.min() < value:
            break
        j, value = _choose(vals, rng)
        sel = [int(i) for i in batch[j]]
        moves += 1
        traj.append((moves, value))
    return RunResult(Method.LS, seed, from_members(sel), value, evals, moves=moves, trajectory=traj)


_SOLVERS = {Method.GSF: greedy_forward, Method.GSB: greedy_backward, Method.LS: local_search}


def run_experiment(instance: Instance, config: IndicatorConfig, method, runs: int = 101,
                   base_seed: int = 0, table: FitnessTable | None = None) -> list[RunResult]:
    """Run ``method`` with seeds base_seed, base_seed + 1, ...; normalizes against ``table``."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    method = Method(method)
    cache = precompute_distance_cache(instance.pointset, config)
    if table is not None:
        lo, hi = float(np.min(table.values)), float(np.max(table.values))
    results = []
    for i in range(runs):
        seed = base_seed + i
        res = _SOLVERS[method](instance, config, np.random.default_rng(seed), cache=cache, seed=seed)
        if table is not None:
            res.normalized_value = (res.best_value - lo) / (hi - lo) if hi > lo else 0.0
        results.append(res)
    return results


def results_csv(results: list[RunResult], kind) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "seed", "rank", "raw", "canonical", "normalized", "evaluations"])
    for r in results:
        raw = to_canonical(kind, r.best_value)
        norm = "" if r.normalized_value is None else repr(r.normalized_value)
        w.writerow([r.method.value, r.seed, rank(r.best_subset), repr(raw), repr(r.best_value),
                    norm, r.evaluations])
    return buf.getvalue()
