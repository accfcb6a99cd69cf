"""Shared fixtures: hand-traceable object layouts and small workloads."""

import pytest

from tickjoin.geometry import MovingObject, Point, Query, Rect, TickBatch


def make_objects(points):
    return [MovingObject(i, Point(x, y)) for i, (x, y) in enumerate(points)]


@pytest.fixture
def seven_point_layout():
    """Seven objects in a 4x4-unit square whose occupancy pattern, with an
    occupancy threshold of 1 and two levels, yields ten leaves: the SW and NE
    level-1 quadrants stay whole, the SE and NW quadrants split fully.

    Deepest-level (4x4 cell) Morton codes per object, in id order:
    0, 4, 5, 6, 8, 11, 15.
    """
    points = [
        (0.5, 0.5),  # z=0   (SW quadrant, alone)
        (2.5, 0.5),  # z=4   (SE quadrant...)
        (3.5, 0.5),  # z=5
        (2.5, 1.5),  # z=6
        (0.5, 2.5),  # z=8   (NW quadrant...)
        (1.5, 3.5),  # z=11
        (3.5, 3.5),  # z=15  (NE quadrant, alone)
    ]
    return make_objects(points), Rect(0.0, 0.0, 4.0, 4.0)


@pytest.fixture
def mixed_depth_layout():
    """Seven objects over a 16x16-unit square producing a three-level tree
    (threshold 1): sixteen leaves, one at level 1 (NE), eleven at level 2,
    and four at level 3 where two objects share one level-2 quadrant.

    Object 1 sits at (5, 9); its leaf is the level-3 quadrant [4,6]x[8,10].
    """
    points = [
        (12.0, 12.0),  # NE quadrant, alone -> level-1 leaf
        (5.0, 9.0),    # NW, shares the level-2 quadrant [4,8]x[8,12]
        (7.0, 11.0),   # NW, same level-2 quadrant, different level-3 cell
        (1.0, 1.0),    # SW
        (5.0, 5.0),    # SW
        (9.0, 1.0),    # SE
        (13.0, 5.0),   # SE
    ]
    return make_objects(points), Rect(0.0, 0.0, 16.0, 16.0)


@pytest.fixture
def scenario_batch():
    """Three moving objects; object 3 issues a query centered on itself that
    also reaches object 2 but not the distant object 1."""
    objects = [
        MovingObject(1, Point(20.0, 20.0)),
        MovingObject(2, Point(4.0, 4.0)),
        MovingObject(3, Point(5.0, 5.0)),
    ]
    queries = [
        Query(1, Rect(18.0, 18.0, 19.0, 19.0)),
        Query(2, Rect(0.0, 0.0, 1.0, 1.0)),
        Query(3, Rect(3.0, 3.0, 7.0, 7.0)),
    ]
    return TickBatch(0, objects, queries)
