"""Non-dominated point sets on the seven Pareto-front shapes.

Every front is generated from a well-spaced set of points on the unit
simplex (the linear front) and mapped onto the other shapes, except the
discontinuous front, which is sampled directly from a grid.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

SCHEMA = "issp-pointset/1"
DUPLICATE_TOL = 1e-12


class Shape(str, Enum):
    LINEAR = "linear"
    CONVEX = "convex"
    NONCONVEX = "nonconvex"
    INV_LINEAR = "inv-linear"
    INV_CONVEX = "inv-convex"
    INV_NONCONVEX = "inv-nonconvex"
    DISCONTINUOUS = "discontinuous"

    @property
    def inverted(self) -> bool:
        return self.value.startswith("inv-")

    @property
    def conventional(self) -> "Shape":
        return Shape(self.value[4:]) if self.inverted else self


# order used by every figure-like output
SHAPES = tuple(Shape)


class InvalidParameter(ValueError):
    pass


class PointSetFormatError(ValueError):
    """Raised when an instance file cannot be parsed or fails the schema."""


@dataclass(eq=False)
class PointSet:
    points: np.ndarray
    shape: Shape
    seed: int
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        self.shape = Shape(self.shape)
        if self.points.ndim != 2 or self.points.shape[1] < 2:
            raise InvalidParameter("points must be an (n, d) array with d >= 2")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def content_hash(self) -> bytes:
        h = hashlib.sha256()
        h.update(f"{self.shape.value}|{self.n}|{self.d}|{self.seed}|".encode())
        h.update(self.points.astype("<f8").tobytes())
        return h.digest()

    def __len__(self):
        return self.n


def dominates(p, q) -> bool:
    p = np.asarray(p)
    q = np.asarray(q)
    return bool(np.all(p <= q) and np.any(p < q))


def weakly_dominates(p, q) -> bool:
    return bool(np.all(np.asarray(p) <= np.asarray(q)))


def find_duplicates(points, tol=DUPLICATE_TOL) -> list[tuple[int, int]]:
    P = np.asarray(points, dtype=float)
    gap = np.max(np.abs(P[:, None, :] - P[None, :, :]), axis=2)
    i, j = np.nonzero(np.triu(gap < tol, k=1))
    return list(zip(i.tolist(), j.tolist()))


def is_nondominated_set(points, *, raise_on_duplicates=False) -> bool:
    """True iff no point dominates another and no two points coincide.

    With ``raise_on_duplicates`` a duplicate pair raises instead of
    returning False.
    """
    P = points.points if isinstance(points, PointSet) else np.asarray(points, float)
    dups = find_duplicates(P)
    if dups:
        if raise_on_duplicates:
            raise InvalidParameter(f"duplicate points at indices {dups[0]}")
        return False
    le = np.all(P[:, None, :] <= P[None, :, :], axis=2)
    lt = np.any(P[:, None, :] < P[None, :, :], axis=2)
    return not np.any(le & lt)


def nondominated_mask(points) -> np.ndarray:
    P = np.asarray(points, float)
    le = np.all(P[:, None, :] <= P[None, :, :], axis=2)
    lt = np.any(P[:, None, :] < P[None, :, :], axis=2)
    dominated = np.any(le & lt, axis=0)
    return ~dominated


def minmax_normalize(points) -> np.ndarray:
    P = np.asarray(points, float)
    lo = P.min(axis=0)
    span = P.max(axis=0) - lo
    span[span == 0] = 1.0
    return (P - lo) / span


# -- linear front -----------------------------------------------------------

def das_dennis(h: int, d: int) -> np.ndarray:
    """All points of the simplex lattice with ``h`` divisions per axis."""
    pts = []
    for bars in itertools.combinations(range(h + d - 1), d - 1):
        parts = np.diff((-1,) + bars + (h + d - 1,)) - 1
        pts.append(parts / h)
    return np.array(pts, dtype=float)


def _largest_lattice(n: int, d: int) -> int:
    h = 1
    while math.comb(h + 1 + d - 1, d - 1) <= n:
        h += 1
    return h


def project_to_simplex(X: np.ndarray) -> np.ndarray:
    # Euclidean projection of each row onto {x >= 0, sum x = 1}
    d = X.shape[1]
    U = -np.sort(-X, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    idx = np.arange(1, d + 1)
    cond = U - css / idx > 0
    rho = d - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(len(X)), rho] / (rho + 1)
    return np.maximum(X - theta[:, None], 0.0)


def riesz_energy(X: np.ndarray, s: float) -> float:
    i, j = np.triu_indices(len(X), k=1)
    dist = np.sqrt(np.sum((X[i] - X[j]) ** 2, axis=1))
    return float(np.sum(dist ** -s))


def _riesz_gradient(X: np.ndarray, s: float) -> np.ndarray:
    diff = X[:, None, :] - X[None, :, :]
    dist2 = np.sum(diff ** 2, axis=2)
    np.fill_diagonal(dist2, np.inf)
    coef = -s * dist2 ** (-(s + 2) / 2)
    return np.einsum("ij,ijk->ik", coef, diff)


def generate_simplex_points(n: int, d: int, seed: int, *, s: float | None = None,
                            iterations: int = 1000) -> PointSet:
    """Well-spaced points on the unit simplex.

    A Das-Dennis lattice (the largest one with at most ``n`` points) is
    topped up with uniform random simplex points, then the Riesz
    s-energy is reduced by projected gradient descent for a fixed number of
    iterations. The ``d`` vertices stay fixed. A step that raises the energy
    is rejected and the step length halved; accepted steps grow it by 10%.
    """
    if d < 2:
        raise InvalidParameter(f"d must be >= 2, got {d}")
    if n < d:
        raise InvalidParameter(f"need n >= d, got n={n}, d={d}")
    s = 2.0 * d if s is None else float(s)
    rng = np.random.default_rng(seed)
    base = das_dennis(_largest_lattice(n, d), d)
    extra = rng.dirichlet(np.ones(d), size=n - len(base))
    X = np.vstack([base, extra])
    frozen = np.isclose(X.max(axis=1), 1.0, rtol=0, atol=0)
    X[frozen] = np.round(X[frozen])

    if n > d:
        energy = riesz_energy(X, s)
        step = 0.1 / n ** (1.0 / (d - 1))
        for _ in range(iterations):
            g = _riesz_gradient(X, s)
            g -= g.mean(axis=1, keepdims=True)
            g[frozen] = 0.0
            norm = np.sqrt(np.max(np.sum(g ** 2, axis=1)))
            if not np.isfinite(norm) or norm == 0:
                break
            trial = X - step * g / norm
            trial[~frozen] = project_to_simplex(trial[~frozen])
            e = riesz_energy(trial, s)
            if e < energy:
                X, energy = trial, e
                step *= 1.1
            else:
                step *= 0.5

    # exact simplex constraint after projection round-off
    X[~frozen] /= X[~frozen].sum(axis=1, keepdims=True)
    return PointSet(X, Shape.LINEAR, seed)


def transform(base: PointSet, shape: Shape | str) -> PointSet:
    """Map a linear-front set onto another continuous front shape.

    Point order is preserved, so bit ``i`` refers to the image of base
    point ``i`` on every front.
    """
    shape = Shape(shape)
    if shape is Shape.DISCONTINUOUS:
        raise InvalidParameter("discontinuous front is generated by generate_discontinuous")
    if base.shape is not Shape.LINEAR:
        raise InvalidParameter("transform expects a linear-front base set")
    P = base.points
    conv = shape.conventional
    if conv is Shape.LINEAR:
        Q = P.copy()
    elif conv is Shape.NONCONVEX:
        Q = minmax_normalize(sphere_points(P))
    else:
        Q = minmax_normalize(convex_points(sphere_points(P)))
    if shape.inverted:
        Q = minmax_normalize(1.0 - Q)
    return PointSet(Q, shape, base.seed)


def sphere_points(P: np.ndarray) -> np.ndarray:
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def convex_points(C: np.ndarray) -> np.ndarray:
    Q = C ** 4
    Q[:, -1] = C[:, -1] ** 2
    return Q


def dtlz7_front(grid_points: np.ndarray) -> np.ndarray:
    d = grid_points.shape[1] + 1
    h = d - np.sum(grid_points / 2 * (1 + np.sin(3 * np.pi * grid_points)), axis=1)
    return np.column_stack([grid_points, 2 * h])


def _dtlz7_candidates(d: int, grid: int) -> np.ndarray:
    axis = np.linspace(0.0, 1.0, grid)
    G = np.array(list(itertools.product(axis, repeat=d - 1)))
    F = dtlz7_front(G)
    return F[nondominated_mask(F)]


def generate_discontinuous(d: int = 3, grid: int = 13, seed: int = 0, n: int = 49) -> PointSet:
    """Non-dominated grid sample of the DTLZ7 front, normalized to [0,1]^d.

    If ``grid`` points per axis do not give exactly ``n`` survivors, the
    smallest resolution in 3..40 that does is used; failing that, the
    closest larger one is thinned by repeatedly dropping one point of the
    closest pair.
    """
    if d < 2:
        raise InvalidParameter(f"d must be >= 2, got {d}")
    F = _dtlz7_candidates(d, grid)
    if len(F) != n:
        best = None
        for g in range(3, 41):
            cand = _dtlz7_candidates(d, g)
            if len(cand) == n:
                best = cand
                break
            if len(cand) > n and (best is None or len(cand) < len(best)):
                best = cand
        if best is None:
            raise InvalidParameter(f"no grid resolution yields {n} points for d={d}")
        F = best
        while len(F) > n:
            gap = np.sqrt(np.sum((F[:, None] - F[None]) ** 2, axis=2))
            np.fill_diagonal(gap, np.inf)
            i, j = np.unravel_index(np.argmin(gap), gap.shape)
            F = np.delete(F, max(i, j), axis=0)
    return PointSet(minmax_normalize(F), Shape.DISCONTINUOUS, seed)


def generate(shape: Shape | str, n: int, d: int, seed: int) -> PointSet:
    shape = Shape(shape)
    if shape is Shape.DISCONTINUOUS:
        return generate_discontinuous(d=d, seed=seed, n=n)
    base = generate_simplex_points(n, d, seed)
    return base if shape is Shape.LINEAR else transform(base, shape)


def default_n(shape: Shape | str) -> int:
    return 49 if Shape(shape) is Shape.DISCONTINUOUS else 50


# -- persistence ------------------------------------------------------------

def to_json(ps: PointSet) -> str:
    doc = {
        "schema": SCHEMA,
        "shape": ps.shape.value,
        "d": ps.d,
        "n": ps.n,
        "seed": int(ps.seed),
        "points": [[float(x) for x in row] for row in ps.points],
    }
    return json.dumps(doc, indent=1)


def save(ps: PointSet, path) -> None:
    Path(path).write_text(to_json(ps))


def from_json(text: str, source: str = "<string>") -> PointSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PointSetFormatError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise PointSetFormatError(f"{source}: top level must be an object")
    for key in ("schema", "shape", "d", "n", "seed", "points"):
        if key not in doc:
            raise PointSetFormatError(f"{source}: missing field '{key}'")
    if doc["schema"] != SCHEMA:
        raise PointSetFormatError(f"{source}: field 'schema': expected {SCHEMA!r}, got {doc['schema']!r}")
    try:
        shape = Shape(doc["shape"])
    except ValueError:
        raise PointSetFormatError(f"{source}: field 'shape': unknown shape {doc['shape']!r}") from None
    d, n = doc["d"], doc["n"]
    if not isinstance(d, int) or d < 2:
        raise PointSetFormatError(f"{source}: field 'd': expected integer >= 2")
    pts = doc["points"]
    if not isinstance(pts, list) or len(pts) != n:
        raise PointSetFormatError(f"{source}: field 'points': expected {n} points")
    for i, row in enumerate(pts):
        if not isinstance(row, list) or len(row) != d:
            raise PointSetFormatError(f"{source}: field 'points[{i}]': expected {d} coordinates")
        if not all(isinstance(x, (int, float)) and math.isfinite(x) for x in row):
            raise PointSetFormatError(f"{source}: field 'points[{i}]': non-finite or non-numeric coordinate")
    ps = PointSet(np.array(pts, dtype=float), shape, int(doc["seed"]))
    if find_duplicates(ps.points):
        ps.warnings.append("duplicate points")
    elif not is_nondominated_set(ps.points):
        ps.warnings.append("dominated points")
    return ps


def load(path) -> PointSet:
    path = Path(path)
    return from_json(path.read_text(), source=str(path))
