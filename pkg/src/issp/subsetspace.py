"""k-of-n subset encoding, enumeration and the dense fitness table.

A subset is an integer bitmask (bit i set iff point i is selected); its
rank is the combinadic index sum_i C(c_i, i + 1) over the sorted members
c_0 < ... < c_{k-1}. Ranks follow the order in which Gosper's
next-bit-permutation enumerates masks, so the smallest combination
{0, ..., k-1} has rank 0.
"""
from __future__ import annotations

import hashlib
import math
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .indicators import Indicator, IndicatorConfig, precompute_distance_cache
from .pointset import InvalidParameter, PointSet

MAX_N = 512
DEFAULT_BUDGET = 1 << 28
MAGIC = b"ISSPFT1\0"
_HEADER = struct.Struct("<8sIIII32s")
_KIND_IDS = {kind: i for i, kind in enumerate(Indicator)}


class InvalidSolution(ValueError):
    pass


class BudgetExceeded(MemoryError):
    pass


def _check_nk(n, k):
    if not 0 < k < n:
        raise InvalidParameter(f"need 0 < k < n, got n={n}, k={k}")
    if n > MAX_N:
        raise InvalidParameter(f"n={n} exceeds the supported maximum {MAX_N}")


def binomial_table(n: int, k: int) -> np.ndarray:
    """C(a, b) for 0 <= a <= n, 0 <= b <= k + 1 as int64 (float overflow-free for n <= 512, k small)."""
    T = np.zeros((n + 2, k + 2), dtype=np.int64)
    for a in range(n + 2):
        for b in range(min(a, k + 1) + 1):
            T[a, b] = math.comb(a, b)
    return T


def members(bits: int) -> tuple[int, ...]:
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return tuple(out)


def from_members(idx) -> int:
    bits = 0
    for i in idx:
        bits |= 1 << int(i)
    return bits


def popcount(bits: int) -> int:
    return bin(bits).count("1")


def rank(bits: int, k: int | None = None) -> int:
    c = members(bits)
    if k is not None and len(c) != k:
        raise InvalidSolution(f"subset has {len(c)} members, expected {k}")
    return sum(math.comb(ci, i + 1) for i, ci in enumerate(c))


def unrank(r: int, n: int, k: int) -> int:
    total = math.comb(n, k)
    if not 0 <= r < total:
        raise InvalidSolution(f"rank {r} outside [0, {total})")
    bits = 0
    c = n - 1
    for i in range(k, 0, -1):
        while math.comb(c, i) > r:
            c -= 1
        bits |= 1 << c
        r -= math.comb(c, i)
        c -= 1
    return bits


def enumerate_subsets(n: int, k: int):
    """Yield every k-subset bitmask of n bits once, in ascending rank."""
    _check_nk(n, k)
    v = (1 << k) - 1
    limit = 1 << n
    while v < limit:
        yield v
        t = v | (v - 1)
        v = (t + 1) | (((~t & -~t) - 1) >> ((v & -v).bit_length()))


def neighbors(bits: int, n: int):
    """2-bit-swap neighbours: clear one set bit, set one clear bit.

    Order: cleared index ascending, then set index ascending.
    """
    sel = members(bits)
    for a in sel:
        base = bits & ~(1 << a)
        for b in range(n):
            if not (bits >> b) & 1:
                yield base | (1 << b)


def hamming(x: int, y: int) -> int:
    return popcount(x ^ y)


# -- array kernels ----------------------------------------------------------

@njit(cache=True)
def unrank_into(r, n, k, binom, out):
    c = n - 1
    for i in range(k, 0, -1):
        while binom[c, i] > r:
            c -= 1
        out[i - 1] = c
        r -= binom[c, i]
        c -= 1


@njit(cache=True)
def rank_of(c, binom):
    r = 0
    for i in range(c.shape[0]):
        r += binom[c[i], i + 1]
    return r


@njit(cache=True)
def next_combination(c, n):
    """Advance a sorted combination to its colex successor in place."""
    k = c.shape[0]
    j = 0
    while j < k - 1 and c[j] + 1 == c[j + 1]:
        j += 1
    c[j] += 1
    for i in range(j):
        c[i] = i
    return c[k - 1] < n


@njit(cache=True)
def combinations_range(n, k, start, count, binom):
    out = np.empty((count, k), dtype=np.int64)
    c = np.empty(k, dtype=np.int64)
    unrank_into(start, n, k, binom, c)
    for r in range(count):
        out[r] = c
        if r + 1 < count:
            next_combination(c, n)
    return out


def enumerate_array(n: int, k: int, start: int = 0, count: int | None = None) -> np.ndarray:
    """Sorted member indices of subsets ranked start..start+count-1, one per row."""
    _check_nk(n, k)
    total = math.comb(n, k)
    count = total - start if count is None else count
    return combinations_range(n, k, start, count, binomial_table(n, k))


@njit(cache=True)
def neighbor_ranks(c, n, binom, out, pre, suf, rest):
    """Ranks of all k(n-k) swap neighbours of the sorted combination ``c``."""
    k = c.shape[0]
    pos = 0
    for a in range(k):
        m = 0
        for i in range(k):
            if i != a:
                rest[m] = c[i]
                m += 1
        pre[0] = 0
        for q in range(k - 1):
            pre[q + 1] = pre[q] + binom[rest[q], q + 1]
        suf[k - 1] = 0
        for q in range(k - 2, -1, -1):
            suf[q] = suf[q + 1] + binom[rest[q], q + 2]
        q = 0
        j = 0
        for b in range(n):
            if j < k and c[j] == b:
                j += 1
                continue
            while q < k - 1 and rest[q] < b:
                q += 1
            out[pos] = pre[q] + binom[b, q + 1] + suf[q]
            pos += 1
    return pos


# -- instances and tables ---------------------------------------------------

@dataclass(eq=False)
class Instance:
    pointset: PointSet
    k: int

    def __post_init__(self):
        _check_nk(self.pointset.n, self.k)

    @property
    def n(self) -> int:
        return self.pointset.n

    @property
    def d(self) -> int:
        return self.pointset.d

    @property
    def size(self) -> int:
        return math.comb(self.n, self.k)

    def content_hash(self) -> bytes:
        return hashlib.sha256(self.pointset.content_hash() + struct.pack("<I", self.k)).digest()

    def subset_points(self, bits: int) -> np.ndarray:
        return self.pointset.points[list(members(bits))]


@dataclass(eq=False)
class FitnessTable:
    values: np.ndarray
    n: int
    k: int
    d: int
    kind: Indicator
    key: bytes
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values.setflags(write=False)

    def __len__(self):
        return len(self.values)

    def save(self, path) -> None:
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, self.n, self.k, self.d, _KIND_IDS[self.kind], self.key))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "FitnessTable":
        path = Path(path)
        with open(path, "rb") as fh:
            head = fh.read(_HEADER.size)
            if len(head) != _HEADER.size:
                raise ValueError(f"{path}: truncated header")
            magic, n, k, d, kind_id, key = _HEADER.unpack(head)
            if magic != MAGIC:
                raise ValueError(f"{path}: bad magic {magic!r}")
            values = np.frombuffer(fh.read(), dtype="<f8").astype(np.float64)
        if len(values) != math.comb(n, k):
            raise ValueError(f"{path}: expected {math.comb(n, k)} values, found {len(values)}")
        return cls(values, n, k, d, list(Indicator)[kind_id], key)


def table_key(instance: Instance, config: IndicatorConfig) -> bytes:
    return hashlib.sha256(instance.content_hash() + config.fingerprint()).digest()


def build_fitness_table(instance: Instance, config: IndicatorConfig, *,
                        budget: int = DEFAULT_BUDGET, chunk: int = 1 << 20,
                        cache_dir=None) -> FitnessTable:
    """Canonical indicator value of every subset, indexed by rank.

    With ``cache_dir`` the table is read from / written to
    ``<cache_dir>/<key>.isspft``.
    """
    total = instance.size
    if total > budget:
        raise BudgetExceeded(
            f"C({instance.n},{instance.k}) = {total} entries needs {total * 8 / 2**20:.1f} MiB; "
            f"budget is {budget} entries")
    key = table_key(instance, config)
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"{key.hex()}.isspft"
        if path.exists():
            table = FitnessTable.load(path)
            if table.key == key:
                table.meta["cached"] = True
                return table
    t0 = time.perf_counter()
    cache = precompute_distance_cache(instance.pointset, config)
    binom = binomial_table(instance.n, instance.k)
    values = np.empty(total)
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        combos = combinations_range(instance.n, instance.k, start, count, binom)
        values[start:start + count] = cache.evaluate_batch(combos)
    table = FitnessTable(values, instance.n, instance.k, instance.d, config.kind, key,
                         {"build_seconds": time.perf_counter() - t0})
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        table.save(path)
    return table
