import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from issp import pointset as ps
from issp.pointset import (InvalidParameter, PointSetFormatError, Shape, dominates,
                           generate, generate_discontinuous, generate_simplex_points,
                           is_nondominated_set, weakly_dominates)


@pytest.fixture(scope="module")
def base():
    return generate_simplex_points(50, 3, 1)


def test_dominance_predicates():
    assert dominates([0, 0], [1, 1])
    assert not dominates([0, 1], [1, 0])
    assert not dominates([0.5, 0.5], [0.5, 0.5])
    assert weakly_dominates([0.5, 0.5], [0.5, 0.5])
    assert not weakly_dominates([0.6, 0.5], [0.5, 0.5])


def test_is_nondominated_examples():
    assert is_nondominated_set(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not is_nondominated_set(np.array([[0.0, 0.0], [1.0, 1.0]]))
    dup = np.array([[0.2, 0.8], [0.2, 0.8]])
    assert not is_nondominated_set(dup)
    with pytest.raises(InvalidParameter):
        is_nondominated_set(dup, raise_on_duplicates=True)


def test_simplex_small_keeps_corners():
    P = generate_simplex_points(3, 3, 5).points
    assert sorted(map(tuple, P)) == [(0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0)]


def test_simplex_constraint_and_nondominance(base):
    P = base.points
    assert P.shape == (50, 3)
    assert np.all(np.abs(P.sum(axis=1) - 1.0) <= 1e-12)
    assert np.all(P >= 0)
    assert is_nondominated_set(P)
    for v in np.eye(3):
        assert np.any(np.all(P == v, axis=1))


def test_simplex_well_spaced(base):
    # a uniform-random draw of 50 points typically has min gaps ~0.01
    P = base.points
    gaps = np.linalg.norm(P[:, None] - P[None], axis=2) + np.eye(50) * 9
    assert gaps.min() > 0.1


def test_simplex_rejects_bad_sizes():
    with pytest.raises(InvalidParameter):
        generate_simplex_points(2, 3, 0)
    with pytest.raises(InvalidParameter):
        generate_simplex_points(5, 1, 0)


def test_transform_examples():
    lin = ps.PointSet(np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [1 / 3, 1 / 3, 1 / 3]]),
                      Shape.LINEAR, 0)
    sph = ps.sphere_points(lin.points)
    np.testing.assert_allclose(sph[0], [1, 0, 0])
    np.testing.assert_allclose(sph[3], [1 / math.sqrt(3)] * 3)
    inv = ps.transform(lin, Shape.INV_LINEAR).points
    np.testing.assert_allclose(inv[0], [0, 1, 1])


def test_sphere_points_unit_norm(base):
    S = ps.sphere_points(base.points)
    assert np.all(np.abs(np.linalg.norm(S, axis=1) - 1.0) <= 1e-12)


def test_convex_mapping():
    c = np.array([[0.6, 0.0, 0.8]])
    np.testing.assert_allclose(ps.convex_points(c), [[0.6 ** 4, 0.0, 0.64]])


@pytest.mark.parametrize("shape", list(Shape))
def test_every_shape_valid(shape):
    P = generate(shape, ps.default_n(shape), 3, 1)
    assert P.n == (49 if shape is Shape.DISCONTINUOUS else 50)
    assert is_nondominated_set(P.points)
    assert P.points.min() >= 0.0 and P.points.max() <= 1.0
    np.testing.assert_array_equal(P.points.min(axis=0), 0.0)
    np.testing.assert_array_equal(P.points.max(axis=0), 1.0)


@pytest.mark.parametrize("conv", [Shape.LINEAR, Shape.CONVEX, Shape.NONCONVEX])
def test_inversion_is_involution(base, conv):
    Q = ps.transform(base, conv).points
    inv = ps.transform(base, Shape(f"inv-{conv.value}")).points
    # Q already spans [0,1] on every axis, so min-max of 1 - Q is exactly 1 - Q
    np.testing.assert_allclose(1.0 - inv, Q, atol=1e-15, rtol=0)


def test_transform_preserves_order(base):
    nc = ps.transform(base, Shape.NONCONVEX).points
    for i in range(3):
        assert np.argmax(nc[:, i]) == np.argmax(base.points[:, i])


def test_transform_rejects_discontinuous(base):
    with pytest.raises(InvalidParameter):
        ps.transform(base, Shape.DISCONTINUOUS)


def test_discontinuous_49_points():
    P = generate_discontinuous(3)
    assert P.n == 49
    assert is_nondominated_set(P.points)
    assert 0.0 <= P.points.min() and P.points.max() <= 1.0


def test_discontinuous_other_sizes():
    P = generate_discontinuous(3, n=30)
    assert P.n == 30 and is_nondominated_set(P.points)
    P2 = generate_discontinuous(2, n=10)
    assert P2.n == 10 and is_nondominated_set(P2.points)


def test_generation_deterministic():
    a = generate("convex", 50, 3, 7)
    b = generate("convex", 50, 3, 7)
    assert a.points.tobytes() == b.points.tobytes()
    assert a.content_hash() == b.content_hash()
    c = generate("convex", 50, 3, 8)
    assert c.content_hash() != a.content_hash()


def test_json_roundtrip_bitwise(tmp_path, base):
    path = tmp_path / "pf.json"
    ps.save(base, path)
    back = ps.load(path)
    assert back.points.tobytes() == base.points.tobytes()
    assert back.shape is base.shape and back.seed == base.seed and back.warnings == []
    doc = json.loads(path.read_text())
    assert doc["schema"] == "issp-pointset/1" and doc["n"] == 50 and doc["d"] == 3


def _doc(points, **kw):
    doc = {"schema": "issp-pointset/1", "shape": "linear", "d": 2, "n": len(points),
           "seed": 0, "points": points}
    doc.update(kw)
    return json.dumps(doc)


def test_load_wrong_dimension_is_schema_error():
    with pytest.raises(PointSetFormatError, match=r"points\[1\]"):
        ps.from_json(_doc([[0.0, 1.0], [1.0, 0.0, 0.5]]))


def test_load_malformed_reports_line():
    with pytest.raises(PointSetFormatError, match="line 2"):
        ps.from_json('{"schema": "issp-pointset/1",\n "shape": }')


@pytest.mark.parametrize("field", ["schema", "shape", "points"])
def test_load_missing_or_bad_field(field):
    doc = json.loads(_doc([[0.0, 1.0], [1.0, 0.0]]))
    doc.pop(field)
    with pytest.raises(PointSetFormatError, match=field):
        ps.from_json(json.dumps(doc))


def test_load_dominated_sets_warning():
    back = ps.from_json(_doc([[0.0, 0.0], [1.0, 1.0]]))
    assert back.warnings == ["dominated points"]
    back = ps.from_json(_doc([[0.2, 0.8], [0.2, 0.8]]))
    assert back.warnings == ["duplicate points"]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e300, 1e300, allow_nan=False), min_size=4, max_size=4))
def test_json_float_roundtrip(vals):
    P = ps.PointSet(np.array(vals, dtype=float).reshape(2, 2), Shape.LINEAR, 3)
    back = ps.from_json(ps.to_json(P))
    assert back.points.tobytes() == P.points.tobytes()


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 12), st.integers(2, 4), st.integers(0, 10_000))
def test_simplex_property(n, d, seed):
    if n < d:
        return
    P = generate_simplex_points(n, d, seed, iterations=50).points
    assert P.shape == (n, d)
    assert np.all(np.abs(P.sum(axis=1) - 1.0) <= 1e-12)
    assert is_nondominated_set(P)
