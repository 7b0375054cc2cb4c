"""Exact hypervolume kernels.

Two routes: inclusion-exclusion over all nonempty subsets (used for the
small subsets that fill a fitness table) and WFG-style exclusive
contributions for the large sets backward greedy search starts from.
"""
import numpy as np
from numba import njit

MAX_INCLUSION_EXCLUSION = 25
# above this size WFG is faster than enumerating 2^m terms
WFG_THRESHOLD = 12


@njit(cache=True)
def hv_inclusion_exclusion(points, ref, scratch):
    """Sum_{T != {}} (-1)^{|T|+1} prod_i max(0, r_i - max_{p in T} p_i).

    Subsets are visited in ascending bitmask order, bit j meaning row j
    of ``points``. ``scratch`` must hold at least 2**m rows of d values.
    """
    m, d = points.shape
    total = 0.0
    for i in range(d):
        scratch[0, i] = -np.inf
    for mask in range(1, 1 << m):
        low = mask & (-mask)
        j = 0
        while (1 << j) != low:
            j += 1
        prev = mask ^ low
        vol = 1.0
        for i in range(d):
            v = scratch[prev, i]
            if points[j, i] > v:
                v = points[j, i]
            scratch[mask, i] = v
            side = ref[i] - v
            if side < 0.0:
                side = 0.0
            vol *= side
        # parity of popcount
        bits = 0
        x = mask
        while x:
            x &= x - 1
            bits += 1
        if bits & 1:
            total += vol
        else:
            total -= vol
    return total


@njit(cache=True)
def _box(p, ref):
    vol = 1.0
    for i in range(p.shape[0]):
        side = ref[i] - p[i]
        if side < 0.0:
            side = 0.0
        vol *= side
    return vol


@njit(cache=True)
def _hv2d(points, ref):
    order = np.argsort(points[:, 0], kind="mergesort")
    total = 0.0
    best_y = ref[1]
    for t in range(order.shape[0]):
        p = points[order[t]]
        if p[0] >= ref[0]:
            break
        if p[1] < best_y:
            total += (ref[0] - p[0]) * (best_y - p[1])
            best_y = p[1]
    return total


@njit(cache=True)
def _nondominated_rows(points):
    m, d = points.shape
    keep = np.ones(m, dtype=np.bool_)
    for a in range(m):
        if not keep[a]:
            continue
        for b in range(m):
            if a == b or not keep[b]:
                continue
            le = True
            lt = False
            for i in range(d):
                if points[b, i] > points[a, i]:
                    le = False
                    break
                if points[b, i] < points[a, i]:
                    lt = True
            # b weakly dominates a; equal rows keep the lower index
            if le and (lt or b < a):
                keep[a] = False
                break
    return points[keep]


@njit(cache=True)
def hv_wfg(points, ref):
    m, d = points.shape
    if m == 0:
        return 0.0
    if m == 1:
        return _box(points[0], ref)
    if d == 2:
        return _hv2d(points, ref)
    order = np.argsort(-points[:, d - 1], kind="mergesort")
    pts = points[order]
    total = 0.0
    for i in range(m):
        total += _box(pts[i], ref)
        rest = m - i - 1
        if rest == 0:
            continue
        limited = np.empty((rest, d))
        for a in range(rest):
            for c in range(d):
                limited[a, c] = max(pts[i, c], pts[i + 1 + a, c])
        total -= hv_wfg(_nondominated_rows(limited), ref)
    return total
