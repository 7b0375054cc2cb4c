"""Quality indicators for point subsets.

The plain functions (``hv``, ``igd``, ...) take an (m, d) array of points
and are written for clarity. :class:`DistanceCache` precomputes the
per-(reference, point) quantities once per instance and evaluates subsets
given as index arrays with numba kernels; for every indicator except HV and
SE the two routes agree bitwise, and for HV and SE they agree bitwise once
members are visited in the same (lexicographic point) order.

All comparisons elsewhere in the package use the *canonical* value, which
is the raw value negated for the maximized indicators (HV and NR2).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit, prange

from .hypervolume import MAX_INCLUSION_EXCLUSION, WFG_THRESHOLD, hv_inclusion_exclusion, hv_wfg
from .pointset import PointSet, generate_simplex_points

WEIGHT_FLOOR = 1e-6
EMPTY = math.inf


class Indicator(str, Enum):
    HV = "hv"
    IGD = "igd"
    IGD_PLUS = "igd+"
    EPS = "eps"
    R2 = "r2"
    NR2 = "nr2"
    SE = "se"

    @property
    def maximize(self) -> bool:
        return self in (Indicator.HV, Indicator.NR2)

    @classmethod
    def parse(cls, text: str) -> "Indicator":
        aliases = {"igdplus": "igd+", "igd_plus": "igd+", "epsilon": "eps", "e": "eps"}
        key = text.strip().lower()
        return cls(aliases.get(key, key))


INDICATORS = tuple(Indicator)


class IndicatorError(ValueError):
    pass


@dataclass(frozen=True)
class IndicatorValue:
    raw: float
    canonical: float


@dataclass(eq=False)
class IndicatorConfig:
    kind: Indicator
    r: np.ndarray | None = None
    R: np.ndarray | None = None
    W: np.ndarray | None = None
    s: float | None = None
    utopian: np.ndarray | None = None

    def __post_init__(self):
        self.kind = Indicator(self.kind)
        for name in ("r", "R", "W", "utopian"):
            val = getattr(self, name)
            if val is not None:
                setattr(self, name, np.ascontiguousarray(val, dtype=np.float64))

    @property
    def sense(self) -> str:
        return "maximize" if self.kind.maximize else "minimize"

    @classmethod
    def default(cls, kind, ps: PointSet, *, ref_value: float = 1.1, s: float | None = None,
                weights: np.ndarray | None = None) -> "IndicatorConfig":
        """Experimental defaults: r = (1.1, ..., 1.1), R = P, |W| = n, s = d."""
        kind = Indicator(kind)
        d = ps.d
        cfg = cls(kind)
        if kind in (Indicator.HV, Indicator.NR2):
            cfg.r = np.full(d, ref_value)
        if kind in (Indicator.IGD, Indicator.IGD_PLUS, Indicator.EPS):
            cfg.R = ps.points.copy()
        if kind in (Indicator.R2, Indicator.NR2):
            cfg.W = (generate_simplex_points(ps.n, d, ps.seed).points
                     if weights is None else np.asarray(weights, float))
        if kind is Indicator.R2:
            cfg.utopian = np.zeros(d)
        if kind is Indicator.SE:
            cfg.s = float(d) if s is None else float(s)
        return cfg

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "sense": self.sense}
        for name in ("r", "utopian"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val.tolist()
        if self.R is not None:
            out["R_size"] = len(self.R)
        if self.W is not None:
            out["W_size"] = len(self.W)
        if self.s is not None:
            out["s"] = self.s
        return out

    def fingerprint(self) -> bytes:
        parts = [self.kind.value.encode()]
        for name in ("r", "R", "W", "utopian"):
            val = getattr(self, name)
            parts.append(name.encode() + (b"-" if val is None else val.astype("<f8").tobytes()))
        parts.append(repr(self.s).encode())
        return b"|".join(parts)


# -- elementwise helpers shared by both routes so values agree bitwise ------

def _euclid(a, b) -> float:
    acc = 0.0
    for i in range(len(a)):
        t = float(a[i]) - float(b[i])
        acc += t * t
    return math.sqrt(acc)


def _plus_dist(ref, p) -> float:
    acc = 0.0
    for i in range(len(p)):
        t = float(p[i]) - float(ref[i])
        if t > 0.0:
            acc += t * t
    return math.sqrt(acc)


def _eps_shift(ref, p) -> float:
    best = -math.inf
    for i in range(len(p)):
        t = float(p[i]) - float(ref[i])
        if t > best:
            best = t
    return best


def _clamped(w) -> np.ndarray:
    return np.maximum(np.asarray(w, float), WEIGHT_FLOOR)


def _tchebycheff(w, p, z) -> float:
    best = -math.inf
    for i in range(len(p)):
        t = float(w[i]) * abs(float(p[i]) - float(z[i]))
        if t > best:
            best = t
    return best


def _nr2_slack(w, p, r) -> float:
    best = math.inf
    for i in range(len(p)):
        t = (float(r[i]) - float(p[i])) / float(w[i])
        if t < best:
            best = t
    return best


def _int_power(x: float, d: int) -> float:
    acc = 1.0
    for _ in range(d):
        acc *= x
    return acc


def _energy_term(dist: float, s: float) -> float:
    # math.pow raises on overflow in Python but not in compiled code; treat both as inf
    if dist == 0.0 or -s * math.log(dist) > 709.0:
        return math.inf
    return math.pow(dist, -s)


def lex_order(points) -> np.ndarray:
    """Permutation sorting rows lexicographically (first coordinate major)."""
    P = np.asarray(points, float)
    return np.lexsort(P.T[::-1])


# -- direct formulas --------------------------------------------------------

def _canonical_rows(S) -> np.ndarray:
    S = np.asarray(S, dtype=np.float64)
    if S.ndim == 1:
        S = S[None, :]
    return np.ascontiguousarray(S[lex_order(S)])


def hv(S, r) -> float:
    """Hypervolume of the union of boxes [p, r]; exact.

    Up to 12 points uses inclusion-exclusion; larger sets use WFG.
    """
    S = _canonical_rows(S)
    r = np.ascontiguousarray(r, dtype=np.float64)
    if len(S) == 0:
        return 0.0
    if len(S) <= WFG_THRESHOLD:
        return hv_inclusion_exclusion(S, r, np.empty((1 << len(S), S.shape[1])))
    return hv_wfg(S, r)


def hv_exact_inclusion_exclusion(S, r) -> float:
    S = _canonical_rows(S)
    if len(S) > MAX_INCLUSION_EXCLUSION:
        raise IndicatorError(
            f"inclusion-exclusion over {len(S)} points needs 2^{len(S)} terms; "
            f"limit is {MAX_INCLUSION_EXCLUSION} (use hv_wfg)")
    return hv_inclusion_exclusion(S, np.ascontiguousarray(r, float), np.empty((1 << len(S), S.shape[1])))


def _mean_of_mins(S, R, dist) -> float:
    if len(S) == 0:
        return EMPTY
    acc = 0.0
    for ref in R:
        acc += min(dist(ref, p) for p in S)
    return acc / len(R)


def igd(S, R) -> float:
    return _mean_of_mins(np.asarray(S, float), np.asarray(R, float), _euclid)


def igd_plus(S, R) -> float:
    return _mean_of_mins(np.asarray(S, float), np.asarray(R, float), _plus_dist)


def epsilon(S, R) -> float:
    S = np.asarray(S, float)
    if len(S) == 0:
        return EMPTY
    return max(min(_eps_shift(ref, p) for p in S) for ref in np.asarray(R, float))


def r2(S, W, utopian=None) -> float:
    S = np.asarray(S, float)
    if len(S) == 0:
        return EMPTY
    W = _clamped(W)
    z = np.zeros(S.shape[1]) if utopian is None else np.asarray(utopian, float)
    acc = 0.0
    for w in W:
        acc += min(_tchebycheff(w, p, z) for p in S)
    return acc / len(W)


def nr2(S, W, r) -> float:
    """Mean over weights of (max_p min_i (r_i - p_i) / w_i)_+ ** d."""
    S = np.asarray(S, float)
    if len(S) == 0:
        return -EMPTY
    W = _clamped(W)
    d = S.shape[1]
    acc = 0.0
    for w in W:
        best = max(_nr2_slack(w, p, r) for p in S)
        if best < 0.0:
            best = 0.0
        acc += _int_power(best, d)
    return acc / len(W)


def se(S, s) -> float:
    S = _canonical_rows(S) if len(S) else np.empty((0, 0))
    acc = 0.0
    for a in range(len(S)):
        for b in range(a + 1, len(S)):
            term = _energy_term(_euclid(S[a], S[b]), s)
            if math.isinf(term):
                warnings.warn("coincident points in s-energy; returning +inf", RuntimeWarning)
            acc += term
    return acc


def raw_value(config: IndicatorConfig, S) -> float:
    S = np.asarray(S, float)
    kind = config.kind
    if kind is Indicator.HV:
        return hv(S, config.r) if len(S) else -EMPTY
    if kind is Indicator.IGD:
        return igd(S, config.R)
    if kind is Indicator.IGD_PLUS:
        return igd_plus(S, config.R)
    if kind is Indicator.EPS:
        return epsilon(S, config.R)
    if kind is Indicator.R2:
        return r2(S, config.W, config.utopian)
    if kind is Indicator.NR2:
        return nr2(S, config.W, config.r)
    if len(S) == 0:
        return EMPTY
    return se(S, config.s)


def to_canonical(kind: Indicator, raw: float) -> float:
    return -raw if Indicator(kind).maximize else raw


def evaluate(config: IndicatorConfig, S) -> IndicatorValue:
    raw = raw_value(config, S)
    return IndicatorValue(raw, to_canonical(config.kind, raw))


# -- cached evaluation ------------------------------------------------------

_KIND_CODE = {Indicator.HV: 0, Indicator.IGD: 1, Indicator.IGD_PLUS: 2, Indicator.EPS: 3,
              Indicator.R2: 4, Indicator.NR2: 5, Indicator.SE: 6}


class DistanceCache:
    """Per-instance lookup tables for fast subset evaluation.

    ``table`` holds, depending on the indicator, the (|R|, n) distance or
    shift matrix, the (|W|, n) scalarization matrix, or the symmetric (n, n)
    energy-term matrix. HV keeps the points themselves.
    """

    def __init__(self, points, config: IndicatorConfig):
        P = np.ascontiguousarray(points, dtype=np.float64)
        self.points = P
        self.config = config
        self.kind = config.kind
        self.code = _KIND_CODE[self.kind]
        n, d = P.shape
        self.n, self.d = n, d
        order = lex_order(P)
        # position of each point in lexicographic order; members are visited by it
        self.lexkey = np.empty(n, dtype=np.int64)
        self.lexkey[order] = np.arange(n)
        self.ref = np.zeros(d) if config.r is None else config.r
        kind = self.kind
        if kind is Indicator.HV:
            self._check_ref(P)
            self.table = P
        elif kind in (Indicator.IGD, Indicator.IGD_PLUS, Indicator.EPS):
            fn = {Indicator.IGD: _euclid, Indicator.IGD_PLUS: _plus_dist,
                  Indicator.EPS: _eps_shift}[kind]
            R = config.R
            self.table = np.array([[fn(ref, p) for p in P] for ref in R], dtype=np.float64)
        elif kind is Indicator.R2:
            W = _clamped(config.W)
            z = np.zeros(d) if config.utopian is None else config.utopian
            self.table = np.array([[_tchebycheff(w, p, z) for p in P] for w in W])
        elif kind is Indicator.NR2:
            self._check_ref(P)
            W = _clamped(config.W)
            self.table = np.array([[_nr2_slack(w, p, config.r) for p in P] for w in W])
        else:
            E = np.zeros((n, n))
            for a in range(n):
                for b in range(a + 1, n):
                    E[a, b] = E[b, a] = _energy_term(_euclid(P[a], P[b]), config.s)
            if np.isinf(E).any():
                warnings.warn("coincident points in s-energy table", RuntimeWarning)
            self.table = E
        self.table = np.ascontiguousarray(self.table)

    def _check_ref(self, P):
        if np.any(P >= self.config.r):
            warnings.warn("some points do not lie strictly below the reference point", RuntimeWarning)

    @property
    def size(self) -> int:
        return self.table.size

    def evaluate_batch(self, subsets) -> np.ndarray:
        """Canonical values for each row of an (M, m) array of point indices."""
        subsets = np.ascontiguousarray(subsets, dtype=np.int64)
        if subsets.ndim == 1:
            subsets = subsets[None, :]
        M, m = subsets.shape
        out = np.empty(M)
        if m == 0:
            out[:] = EMPTY
            return out
        if self.kind is Indicator.HV and m > WFG_THRESHOLD:
            for i in range(M):
                idx = subsets[i][np.argsort(self.lexkey[subsets[i]])]
                out[i] = -hv_wfg(np.ascontiguousarray(self.points[idx]), self.ref)
            return out
        _batch_kernel(self.code, self.table, self.lexkey, self.ref, self.d,
                      subsets, out)
        return out

    def evaluate(self, members) -> float:
        return float(self.evaluate_batch(np.asarray(members, dtype=np.int64)[None, :])[0])


@njit(cache=True)
def _sort_by_key(members, key, buf):
    m = members.shape[0]
    for a in range(m):
        buf[a] = members[a]
    for a in range(1, m):
        v = buf[a]
        b = a - 1
        while b >= 0 and key[buf[b]] > key[v]:
            buf[b + 1] = buf[b]
            b -= 1
        buf[b + 1] = v


@njit(cache=True)
def _eval_one(code, table, lexkey, ref, d, members, buf, scratch, pts):
    m = members.shape[0]
    if code == 0:
        _sort_by_key(members, lexkey, buf)
        for a in range(m):
            for i in range(d):
                pts[a, i] = table[buf[a], i]
        return -hv_inclusion_exclusion(pts[:m], ref, scratch)
    if code == 1 or code == 2 or code == 4:
        acc = 0.0
        for row in range(table.shape[0]):
            best = np.inf
            for a in range(m):
                v = table[row, members[a]]
                if v < best:
                    best = v
            acc += best
        return acc / table.shape[0]
    if code == 3:
        worst = -np.inf
        for row in range(table.shape[0]):
            best = np.inf
            for a in range(m):
                v = table[row, members[a]]
                if v < best:
                    best = v
            if best > worst:
                worst = best
        return worst
    if code == 5:
        acc = 0.0
        for row in range(table.shape[0]):
            best = -np.inf
            for a in range(m):
                v = table[row, members[a]]
                if v > best:
                    best = v
            if best < 0.0:
                best = 0.0
            p = 1.0
            for _ in range(d):
                p *= best
            acc += p
        return -(acc / table.shape[0])
    _sort_by_key(members, lexkey, buf)
    acc = 0.0
    for a in range(m):
        for b in range(a + 1, m):
            acc += table[buf[a], buf[b]]
    return acc


@njit(cache=True, parallel=True)
def _batch_kernel(code, table, lexkey, ref, d, subsets, out):
    M, m = subsets.shape
    chunk = 4096
    nchunks = (M + chunk - 1) // chunk
    for c in prange(nchunks):
        buf = np.empty(m, dtype=np.int64)
        pts = np.empty((m, d))
        scratch = np.empty((1 << m if code == 0 else 1, d))
        lo = c * chunk
        hi = min(M, lo + chunk)
        for i in range(lo, hi):
            out[i] = _eval_one(code, table, lexkey, ref, d, subsets[i], buf, scratch, pts)


def precompute_distance_cache(points, config: IndicatorConfig) -> DistanceCache:
    if isinstance(points, PointSet):
        points = points.points
    return DistanceCache(points, config)
