import pytest
from hypothesis import given, strategies as st

from tickjoin.errors import EmptyBatch
from tickjoin.geometry import (
    MovingObject,
    Point,
    Query,
    Rect,
    TickBatch,
    clip,
    compute_mbr,
    contains,
)

coord = st.floats(min_value=-1000.0, max_value=1000.0, allow_nan=False, allow_infinity=False)


@st.composite
def rects(draw):
    x1, x2 = sorted((draw(coord), draw(coord)))
    y1, y2 = sorted((draw(coord), draw(coord)))
    return Rect(x1, y1, x2, y2)


def test_contains_interior():
    assert contains(Rect(0, 0, 1, 1), Point(0.5, 0.5))


def test_contains_boundary_is_inclusive():
    assert contains(Rect(0, 0, 1, 1), Point(1.0, 1.0))
    assert contains(Rect(0, 0, 1, 1), Point(0.0, 0.5))


def test_contains_outside():
    assert not contains(Rect(0, 0, 1, 1), Point(1.0001, 0.5))


def test_invalid_rect_rejected():
    with pytest.raises(ValueError):
        Rect(1, 0, 0, 1)


def test_mbr_single_object_degenerates_to_point():
    batch = TickBatch(0, [MovingObject(0, Point(3, 4))], [])
    assert compute_mbr(batch) == Rect(3, 4, 3, 4)


def test_mbr_two_corners():
    batch = TickBatch(0, [MovingObject(0, Point(0, 0)), MovingObject(1, Point(2, 5))], [])
    assert compute_mbr(batch) == Rect(0, 0, 2, 5)


def test_mbr_empty_batch_raises():
    with pytest.raises(EmptyBatch):
        compute_mbr(TickBatch(0, [], []))


def test_clip_corner_overlap():
    assert clip(Rect(-1, -1, 2, 2), Rect(0, 0, 10, 10)) == Rect(0, 0, 2, 2)


def test_clip_fully_inside():
    assert clip(Rect(3, 3, 4, 4), Rect(0, 0, 10, 10)) == Rect(3, 3, 4, 4)


def test_clip_disjoint_is_none():
    assert clip(Rect(20, 20, 21, 21), Rect(0, 0, 10, 10)) is None


@given(rects(), rects(), coord, coord)
def test_clip_monotone_under_containment(q, mbr, x, y):
    p = Point(x, y)
    c = clip(q, mbr)
    if c is not None and contains(c, p):
        assert contains(q, p) and contains(mbr, p)


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=40))
def test_mbr_contains_every_object(points):
    batch = TickBatch(0, [MovingObject(i, Point(x, y)) for i, (x, y) in enumerate(points)], [])
    mbr = compute_mbr(batch)
    assert all(contains(mbr, o.position) for o in batch.objects)


@given(coord, coord, st.floats(min_value=0.1, max_value=50.0))
def test_query_centered_on_issuer_includes_it(x, y, half):
    q = Query(7, Rect(x - half, y - half, x + half, y + half))
    assert contains(q.rect, Point(x, y))
