"""Local optima networks with escape edges.

Nodes are the local optima of a landscape. For each optimum every solution
within Hamming distance D is enumerated directly (clear t selected bits,
set t clear bits, 2t <= D) and its attractor under the deterministic
steepest-descent map is tallied; the tallies are the edge weights.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import quoteattr

import numpy as np
from numba import njit, prange

from .landscape import BasinMap, Landscape, OptimaReport
from .subsetspace import FitnessTable, binomial_table, rank_of, unrank_into


@dataclass
class LonNode:
    solution: int
    fitness: float
    normalized_fitness: float
    basin_size: int


@dataclass
class LonEdge:
    source: int
    target: int
    count: int
    weight: float


@dataclass
class LonGraph:
    nodes: list[LonNode]
    edges: list[LonEdge]
    params: dict = field(default_factory=dict)

    def out_weight_sums(self) -> np.ndarray:
        sums = np.zeros(len(self.nodes))
        for e in self.edges:
            sums[e.source] += e.weight
        return sums

    def to_dict(self) -> dict:
        return {"params": self.params,
                "nodes": [vars(v) for v in self.nodes],
                "edges": [vars(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, doc: dict) -> "LonGraph":
        return cls([LonNode(**v) for v in doc["nodes"]],
                   [LonEdge(**e) for e in doc["edges"]], dict(doc.get("params", {})))


def ball_size(n: int, k: int, D: int) -> int:
    return sum(math.comb(k, t) * math.comb(n - k, t) for t in range(D // 2 + 1))


@njit(cache=True)
def _first_combo(buf, t):
    for i in range(t):
        buf[i] = i


@njit(cache=True)
def _next_combo(buf, t, m):
    # lexicographic successor of a t-combination of range(m); False when exhausted
    i = t - 1
    while i >= 0 and buf[i] == m - t + i:
        i -= 1
    if i < 0:
        return False
    buf[i] += 1
    for j in range(i + 1, t):
        buf[j] = buf[j - 1] + 1
    return True


@njit(cache=True, parallel=True)
def _ball_attractors(optima, n, k, half, binom, attractor, out):
    """out[i, :] = attractor of every solution within distance 2*half of optima[i]."""
    for i in prange(optima.shape[0]):
        sel = np.empty(k, dtype=np.int64)
        unrank_into(optima[i], n, k, binom, sel)
        uns = np.empty(n - k, dtype=np.int64)
        j = 0
        s = 0
        for b in range(n):
            if s < k and sel[s] == b:
                s += 1
            else:
                uns[j] = b
                j += 1
        drop = np.empty(k, dtype=np.int64)
        add = np.empty(k, dtype=np.int64)
        flag = np.zeros(n, dtype=np.bool_)
        comb = np.empty(k, dtype=np.int64)
        pos = 0
        for t in range(half + 1):
            if t > k or t > n - k:
                break
            _first_combo(drop, t)
            while True:
                _first_combo(add, t)
                while True:
                    for a in range(k):
                        flag[sel[a]] = True
                    for a in range(t):
                        flag[sel[drop[a]]] = False
                        flag[uns[add[a]]] = True
                    m = 0
                    for b in range(n):
                        if flag[b]:
                            comb[m] = b
                            m += 1
                            flag[b] = False
                    out[i, pos] = attractor[rank_of(comb, binom)]
                    pos += 1
                    if not _next_combo(add, t, n - k):
                        break
                if not _next_combo(drop, t, k):
                    break


def build_lon(table: FitnessTable, optima: OptimaReport, basins: BasinMap, D: int = 4,
              max_block: int = 1 << 24) -> LonGraph:
    if D < 2 or D % 2:
        raise ValueError(f"escape distance D must be even and >= 2, got {D}")
    n, k = table.n, table.k
    binom = binomial_table(n, k)
    loc = np.asarray(optima.local_optima, dtype=np.int64)
    index = {int(x): i for i, x in enumerate(loc)}
    fit = np.asarray(table.values)[loc]
    lo, hi = float(fit.min()), float(fit.max())
    norm = (fit - lo) / (hi - lo) if hi > lo else np.zeros_like(fit)
    nodes = [LonNode(int(x), float(f), float(z), int(basins.basin_size.get(int(x), 0)))
             for x, f, z in zip(loc, fit, norm)]

    size = ball_size(n, k, D)
    block = max(1, max_block // size)
    attractor = np.ascontiguousarray(basins.attractor, dtype=np.int64)
    edges = []
    for start in range(0, len(loc), block):
        chunk = loc[start:start + block]
        out = np.empty((len(chunk), size), dtype=np.int64)
        _ball_attractors(chunk, n, k, D // 2, binom, attractor, out)
        for row, src in enumerate(range(start, start + len(chunk))):
            targets, counts = np.unique(out[row], return_counts=True)
            for tgt, cnt in zip(targets.tolist(), counts.tolist()):
                edges.append(LonEdge(src, index[tgt], int(cnt), cnt / size))
    params = {"D": D, "metric": "hamming", "ball_size": size, "n": n, "k": k,
              "indicator": table.kind.value}
    return LonGraph(nodes, edges, params)


def lon_from_landscape(land: Landscape, D: int = 4) -> LonGraph:
    return build_lon(land.table, land.find_optima(), land.compute_basins(), D)


# -- export -----------------------------------------------------------------

def _kept(lon: LonGraph, self_loops: bool):
    return [e for e in lon.edges if self_loops or e.source != e.target]


def export_json(lon: LonGraph, path) -> None:
    Path(path).write_text(json.dumps(lon.to_dict(), indent=1))


def import_json(path) -> LonGraph:
    return LonGraph.from_dict(json.loads(Path(path).read_text()))


def export_graphml(lon: LonGraph, path, self_loops: bool = True) -> None:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<graphml xmlns="http://graphml.graphdrawing.org/xmlns" '
             'xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" '
             'xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns '
             'http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">',
             '  <key id="solution" for="node" attr.name="solution" attr.type="long"/>',
             '  <key id="fitness" for="node" attr.name="fitness" attr.type="double"/>',
             '  <key id="normalized_fitness" for="node" attr.name="normalized_fitness" attr.type="double"/>',
             '  <key id="basin_size" for="node" attr.name="basin_size" attr.type="long"/>',
             '  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>',
             '  <key id="count" for="edge" attr.name="count" attr.type="long"/>',
             '  <graph id="lon" edgedefault="directed">']
    for i, v in enumerate(lon.nodes):
        lines.append(f'    <node id="n{i}">')
        lines.append(f'      <data key="solution">{v.solution}</data>')
        lines.append(f'      <data key="fitness">{v.fitness!r}</data>')
        lines.append(f'      <data key="normalized_fitness">{v.normalized_fitness!r}</data>')
        lines.append(f'      <data key="basin_size">{v.basin_size}</data>')
        lines.append('    </node>')
    for i, e in enumerate(_kept(lon, self_loops)):
        lines.append(f'    <edge id="e{i}" source="n{e.source}" target="n{e.target}">')
        lines.append(f'      <data key="weight">{e.weight!r}</data>')
        lines.append(f'      <data key="count">{e.count}</data>')
        lines.append('    </edge>')
    lines += ['  </graph>', '</graphml>']
    Path(path).write_text("\n".join(lines) + "\n")


def export_dot(lon: LonGraph, path, self_loops: bool = False) -> None:
    """Graphviz digraph; node width follows basin size, darker fill means better fitness."""
    sizes = np.array([v.basin_size for v in lon.nodes], dtype=float)
    top = sizes.max() if len(sizes) and sizes.max() > 0 else 1.0
    lines = ["digraph lon {", '  node [shape=circle, style=filled, fontsize=8];']
    for i, v in enumerate(lon.nodes):
        width = 0.2 + 1.0 * math.sqrt(v.basin_size / top)
        gray = int(round(15 + 80 * v.normalized_fitness))
        label = quoteattr(str(v.solution))
        lines.append(f'  n{i} [label={label}, width={width:.4f}, fillcolor="gray{gray}", '
                     f'fitness="{v.fitness!r}", basin_size={v.basin_size}];')
    for e in _kept(lon, self_loops):
        pen = 0.2 + 4.0 * e.weight
        lines.append(f'  n{e.source} -> n{e.target} [weight="{e.weight!r}", penwidth={pen:.4f}];')
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n")
