"""Z-order (Morton) codes over power-of-two grids.

Bit convention: bit k of the column index i occupies bit 2k of the code,
bit k of the row index j occupies bit 2k+1 (x bits at even positions).
All helpers accept plain ints or numpy integer arrays interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LevelOrder, OutOfBounds
from .geometry import Point, Rect

# Default deepest grid level: 2**12 x 2**12 cells.  Two coordinates of
# L_MAX bits interleave into a 24-bit code, leaving room in a 32-bit word
# for a 4-bit level tag and a covering flag.
L_MAX = 12


@dataclass(frozen=True)
class GridCoord:
    i: int
    j: int
    level: int

    def __post_init__(self) -> None:
        side = 1 << self.level
        if not (0 <= self.i < side and 0 <= self.j < side):
            raise ValueError(f"coordinates outside the level-{self.level} grid: {self}")


@dataclass(frozen=True)
class MortonCode:
    z: int
    level: int

    def __post_init__(self) -> None:
        if not 0 <= self.z < 4**self.level:
            raise ValueError(f"code does not fit level {self.level}: {self}")


def _spread(v):
    """Spread the low 16 bits of v onto the even bit positions."""
    v = (v | (v << 8)) & 0x00FF00FF
    v = (v | (v << 4)) & 0x0F0F0F0F
    v = (v | (v << 2)) & 0x33333333
    v = (v | (v << 1)) & 0x55555555
    return v


def _compact(v):
    """Inverse of _spread: collect the even bit positions into the low 16 bits."""
    v = v & 0x55555555
    v = (v | (v >> 1)) & 0x33333333
    v = (v | (v >> 2)) & 0x0F0F0F0F
    v = (v | (v >> 4)) & 0x00FF00FF
    v = (v | (v >> 8)) & 0x0000FFFF
    return v


def interleave_arrays(i, j):
    """Morton codes for arrays (or ints) of grid coordinates."""
    return _spread(i) | (_spread(j) << 1)


def deinterleave_arrays(z):
    """Grid coordinates (i, j) for an array (or int) of Morton codes."""
    return _compact(z), _compact(z >> 1)


def interleave(c: GridCoord) -> MortonCode:
    return MortonCode(int(interleave_arrays(c.i, c.j)), c.level)


def deinterleave(code: MortonCode) -> GridCoord:
    i, j = deinterleave_arrays(code.z)
    return GridCoord(int(i), int(j), code.level)


def truncate(code: MortonCode, l_to: int) -> MortonCode:
    """Code of the level-l_to quadrant containing a deeper-level code."""
    if l_to > code.level:
        raise LevelOrder(f"cannot truncate level {code.level} to deeper level {l_to}")
    return MortonCode(code.z >> (2 * (code.level - l_to)), l_to)


def coords_for_points(xs, ys, mbr: Rect, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Map point arrays to level-`level` grid coordinates over `mbr`.

    Points on the MBR's upper edges clamp into the last cell row/column.
    Raises OutOfBounds if any point lies outside the MBR.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if np.any(xs < mbr.xa) or np.any(xs > mbr.xb) or np.any(ys < mbr.ya) or np.any(ys > mbr.yb):
        raise OutOfBounds("point outside the MBR")
    side = 1 << level
    if mbr.width > 0:
        i = np.minimum((xs - mbr.xa) * (side / mbr.width), side - 1).astype(np.int64)
    else:
        i = np.zeros(xs.shape, dtype=np.int64)
    if mbr.height > 0:
        j = np.minimum((ys - mbr.ya) * (side / mbr.height), side - 1).astype(np.int64)
    else:
        j = np.zeros(ys.shape, dtype=np.int64)
    return i, j


def point_to_coord(p: Point, mbr: Rect, level: int) -> GridCoord:
    i, j = coords_for_points(np.array([p.x]), np.array([p.y]), mbr, level)
    return GridCoord(int(i[0]), int(j[0]), level)
