"""Exact minimum-cost perfect matching (Hungarian method, O(k^3))."""
import numpy as np
from numba import njit


@njit(cache=True)
def min_cost_assignment(cost, u, v, p, way, minv, used):
    """Minimum of sum_i cost[i, sigma(i)] over permutations sigma.

    Shortest-augmenting-path form with dual potentials. The work arrays
    must have length k + 1 and are overwritten.
    """
    k = cost.shape[0]
    for j in range(k + 1):
        u[j] = 0.0
        v[j] = 0.0
        p[j] = 0
        way[j] = 0
    for i in range(1, k + 1):
        p[0] = i
        j0 = 0
        for j in range(k + 1):
            minv[j] = np.inf
            used[j] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = 0
            for j in range(1, k + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(k + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    # accumulate in row order so the sum matches sum(cost[i, sigma(i)] for i in range(k))
    for j in range(1, k + 1):
        way[p[j]] = j
    total = 0.0
    for i in range(1, k + 1):
        total += cost[i - 1, way[i] - 1]
    return total


def assignment_cost(cost) -> float:
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    k = cost.shape[0]
    if cost.shape != (k, k):
        raise ValueError("cost matrix must be square")
    if k == 0:
        return 0.0
    return min_cost_assignment(cost, np.empty(k + 1), np.empty(k + 1), np.empty(k + 1, np.int64),
                               np.empty(k + 1, np.int64), np.empty(k + 1),
                               np.empty(k + 1, np.bool_))
