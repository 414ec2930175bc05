import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from epsolve.hilbert import (Ball, Box, DimensionError, HalfSpace, as_vector, geometric_sequence,
                             inner, norm, project, set_from_json)


def test_inner_examples():
    assert inner([1, 0], [0, 1]) == 0
    assert inner([1, 2], [3, 4]) == 11
    assert inner([3, 4], [3, 4]) == 25


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner([1, 2], [1, 2, 3])


def test_norm_examples():
    assert norm([3, 4]) == 5
    assert norm(np.zeros(4)) == 0


def test_norm_of_truncated_geometric_sequence():
    # sum_k (1/4)(1/9)^k = 9/32, so the l2 norm is sqrt(9/32) = 0.5 sqrt(9/8)
    x = geometric_sequence(0.5, 1 / 3, 50)
    assert x[:3] == pytest.approx([1 / 2, 1 / 6, 1 / 18])
    assert norm(x) == pytest.approx(0.5 * np.sqrt(9 / 8), abs=1e-14)


def test_as_vector_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])


def test_project_examples():
    assert np.array_equal(project(Box.cube(2, -5, 5), np.array([7.0, -9.0])), [5, -5])
    assert project(Ball.unit(2), np.array([3.0, 4.0])) == pytest.approx([0.6, 0.8])


def test_project_halfspace_example():
    a, p, x = np.array([1.0, 0.0]), np.zeros(2), np.array([2.0, 3.0])
    r = project(HalfSpace(a, p), x)
    assert r == pytest.approx([0.0, 3.0])
    # on the boundary, and moved along the normal only
    assert inner(a, r - p) == pytest.approx(0.0)
    d = r - x
    assert d[0] * a[1] - d[1] * a[0] == pytest.approx(0.0)


def test_project_zero_normal_is_identity():
    x = np.array([1.0, -2.0])
    assert np.array_equal(project(HalfSpace(np.zeros(2), np.ones(2)), x), x)


def test_project_dimension_mismatch():
    with pytest.raises(DimensionError):
        project(Ball.unit(3), np.ones(2))


def test_box_requires_ordered_bounds():
    with pytest.raises(ValueError):
        Box([1.0], [0.0])


def test_set_json_round_trip():
    for s in (Box.cube(3, -1, 2), Ball(np.ones(2), 0.5), HalfSpace(np.ones(2), np.zeros(2))):
        t = set_from_json(s.to_json())
        assert type(t) is type(s)
        x = np.linspace(-3, 3, s.dim)
        assert np.array_equal(project(s, x), project(t, x))


DIM = 4
coords = arrays(np.float64, DIM, elements=st.floats(-20, 20))


def _sets(draw_normal, center, radius):
    return [
        Box(np.minimum(center, center + 1) - 1, center + 1),
        Ball(center, radius),
        HalfSpace(draw_normal, center),
    ]


@settings(max_examples=200, deadline=None)
@given(coords, coords, coords, coords, st.floats(0, 10))
def test_projection_properties(x, y, a, c, r):
    for S in _sets(a, c, r):
        px, py = project(S, x), project(S, y)
        # idempotence
        ppx = project(S, px)
        assert np.allclose(ppx, px, rtol=1e-12, atol=1e-12 * max(1.0, norm(px)))
        # membership
        assert S.contains(px)
        # firm nonexpansiveness
        d = px - py
        assert d @ d <= d @ (x - y) + 1e-10 * max(1.0, norm(x - y) ** 2)
