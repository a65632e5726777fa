"""Occupancy-grid world: ASCII map I/O and range casting.

World frame: x grows right, y grows up, the grid's lower-left corner is the
origin. Cell (ix, iy) spans [ix*res, (ix+1)*res) x [iy*res, (iy+1)*res).
The outermost ring of cells is always occupied so every inward ray terminates.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .types import Pose

OCCUPIED_CHAR = "#"
FREE_CHAR = "."

NO_RETURN = math.inf


class OccupancyGrid:
    """Binary occupancy grid. Cells are indexed [iy, ix] with iy from the bottom."""

    def __init__(self, width: int, height: int, resolution: float, cells: np.ndarray):
        if width < 3 or height < 3:
            raise ValueError("grid must be at least 3x3 so the interior is non-empty")
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        cells = np.asarray(cells, dtype=bool)
        if cells.shape != (height, width):
            raise ValueError(f"cells shape {cells.shape} != (height={height}, width={width})")
        cells = cells.copy()
        # boundary ring counts as occupied regardless of map content
        cells[0, :] = True
        cells[-1, :] = True
        cells[:, 0] = True
        cells[:, -1] = True
        self.width = width
        self.height = height
        self.resolution = resolution
        self.cells = cells
        self.cells.setflags(write=False)

    @classmethod
    def empty(cls, width: int, height: int, resolution: float) -> "OccupancyGrid":
        return cls(width, height, resolution, np.zeros((height, width), dtype=bool))

    # -- coordinates ---------------------------------------------------------

    @property
    def width_m(self) -> float:
        return self.width * self.resolution

    @property
    def height_m(self) -> float:
        return self.height * self.resolution

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        return int(math.floor(x / self.resolution)), int(math.floor(y / self.resolution))

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (ix + 0.5) * self.resolution, (iy + 0.5) * self.resolution

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def is_occupied_cell(self, ix: int, iy: int) -> bool:
        """Out-of-bounds indices count as occupied."""
        if not self.in_bounds(ix, iy):
            return True
        return bool(self.cells[iy, ix])

    def is_free_world(self, x: float, y: float) -> bool:
        ix, iy = self.world_to_cell(x, y)
        return not self.is_occupied_cell(ix, iy)

    # -- text format ---------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "OccupancyGrid":
        """Parse `width height resolution` then `height` rows, row 0 on top."""
        lines = text.splitlines()
        if not lines:
            raise ValueError("map line 1: empty map text")
        header = lines[0].split()
        if len(header) != 3:
            raise ValueError("map line 1: expected 'width height resolution'")
        try:
            width, height = int(header[0]), int(header[1])
            resolution = float(header[2])
        except ValueError as exc:
            raise ValueError(f"map line 1: bad header values: {exc}") from exc
        if len(lines) < 1 + height:
            raise ValueError(f"map: expected {height} rows, got {len(lines) - 1}")
        cells = np.zeros((height, width), dtype=bool)
        for r in range(height):
            row = lines[1 + r]
            if len(row) != width:
                raise ValueError(f"map line {r + 2}: row length {len(row)} != width {width}")
            for c, ch in enumerate(row):
                if ch == OCCUPIED_CHAR:
                    cells[height - 1 - r, c] = True
                elif ch != FREE_CHAR:
                    raise ValueError(f"map line {r + 2}: unknown cell character {ch!r}")
        return cls(width, height, resolution, cells)

    def to_text(self) -> str:
        rows = [f"{self.width} {self.height} {self.resolution!r}"]
        for r in range(self.height):
            iy = self.height - 1 - r
            rows.append(
                "".join(OCCUPIED_CHAR if self.cells[iy, ix] else FREE_CHAR for ix in range(self.width))
            )
        return "\n".join(rows) + "\n"

    @classmethod
    def load(cls, path) -> "OccupancyGrid":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_text(fh.read())

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_text())


def _occupancy_at(grid: OccupancyGrid, cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
    """Occupancy for arrays of cell indices; out-of-bounds counts as occupied."""
    inside = (cx >= 0) & (cx < grid.width) & (cy >= 0) & (cy < grid.height)
    occ = ~inside
    occ[inside] = grid.cells[cy[inside], cx[inside]]
    return occ


def _sample_times(resolution: float, max_range: float) -> np.ndarray:
    """Half-cell marching distances: 0, step, 2*step, ..., then max_range."""
    step = resolution / 2.0
    n_steps = int(math.floor(max_range / step + 1e-9))
    ts = step * np.arange(0, n_steps + 1)  # sample 0 is the origin
    if n_steps >= 1 and ts[-1] < max_range:  # cover the final partial segment
        ts = np.append(ts, max_range)
    return ts


def raycast_rays(
    grid: OccupancyGrid,
    xs: np.ndarray,
    ys: np.ndarray,
    bearings: np.ndarray,
    max_range: float,
) -> np.ndarray:
    """Cast one ray per (origin, bearing) triple.

    Marches each ray at half-cell steps. A half-cell step can still hop over a
    cell the ray only grazes at a corner, so whenever consecutive samples land
    in diagonally-adjacent cells the corner cell actually traversed is checked
    too. Returns the distance to the first occupied sample (or corner-cell
    entry), or +inf when nothing is hit within max_range. Origins are assumed
    to lie on free cells; rays from occupied cells report a hit immediately.

    Runs the jitted kernel when numba is present, the vectorized numpy
    traversal otherwise; both compute identical distances.
    """
    if max_range <= 0:
        raise ValueError("max_range must be positive")
    xs = np.ascontiguousarray(xs, dtype=float)
    ys = np.ascontiguousarray(ys, dtype=float)
    bearings = np.ascontiguousarray(bearings, dtype=float)
    ts = _sample_times(grid.resolution, max_range)
    if len(ts) < 2:
        return np.full(bearings.shape, NO_RETURN)
    cos_b = np.cos(bearings)
    sin_b = np.sin(bearings)
    if _kernels.HAVE_NUMBA:
        out = np.empty(len(bearings))
        _kernels.march_rays(grid.cells, grid.resolution, xs, ys, cos_b, sin_b, ts, out)
        return out
    return _raycast_numpy(grid, xs, ys, cos_b, sin_b, ts)


def _raycast_numpy(
    grid: OccupancyGrid,
    xs: np.ndarray,
    ys: np.ndarray,
    cos_b: np.ndarray,
    sin_b: np.ndarray,
    ts: np.ndarray,
) -> np.ndarray:
    xs = xs[:, None]
    ys = ys[:, None]
    cos_b = cos_b[:, None]
    sin_b = sin_b[:, None]
    px = xs + cos_b * ts[None, :]
    py = ys + sin_b * ts[None, :]
    cx = np.floor(px / grid.resolution).astype(np.int64)
    cy = np.floor(py / grid.resolution).astype(np.int64)
    occ = _occupancy_at(grid, cx, cy)

    # per segment k (sample k-1 -> k): a direct hit at the arriving sample
    seg_hit = occ[:, 1:].copy()
    seg_dist = np.broadcast_to(ts[1:], seg_hit.shape).copy()

    # diagonal hops: find the corner cell the ray actually passed through
    diag = (cx[:, 1:] != cx[:, :-1]) & (cy[:, 1:] != cy[:, :-1])
    if np.any(diag):
        bi, si = np.nonzero(diag)  # si indexes the segment = arriving sample - 1
        ax, ay = cx[bi, si], cy[bi, si]
        bx, by = cx[bi, si + 1], cy[bi, si + 1]
        bound_x = np.maximum(ax, bx) * grid.resolution
        bound_y = np.maximum(ay, by) * grid.resolution
        with np.errstate(divide="ignore"):
            t_x = (bound_x - xs[bi, 0]) / cos_b[bi, 0]
            t_y = (bound_y - ys[bi, 0]) / sin_b[bi, 0]
        x_first = t_x < t_y
        mid_cx = np.where(x_first, bx, ax)
        mid_cy = np.where(x_first, ay, by)
        mid_occ = _occupancy_at(grid, mid_cx, mid_cy)
        entry = np.minimum(t_x, t_y)
        corner = mid_occ & (entry > 0.0)
        seg_hit[bi[corner], si[corner]] = True
        seg_dist[bi[corner], si[corner]] = entry[corner]

    first = np.argmax(seg_hit, axis=1)
    rows = np.arange(seg_hit.shape[0])
    return np.where(seg_hit[rows, first], seg_dist[rows, first], NO_RETURN)


def raycast_bearings(
    grid: OccupancyGrid,
    x: float,
    y: float,
    bearings: np.ndarray,
    max_range: float,
) -> np.ndarray:
    """Cast many rays from one free point; vectorized over bearings."""
    oix, oiy = grid.world_to_cell(x, y)
    if grid.is_occupied_cell(oix, oiy):
        raise ValueError(f"ray origin ({x}, {y}) is outside the grid or on an occupied cell")
    bearings = np.asarray(bearings, dtype=float)
    ones = np.ones(bearings.shape[0])
    return raycast_rays(grid, x * ones, y * ones, bearings, max_range)


def grid_raycast(grid: OccupancyGrid, origin: Pose, bearing: float, max_range: float) -> float:
    """Distance from a free in-grid pose to the first occupied cell along a ray.

    Returns +inf when no occupied cell lies within max_range.
    """
    return float(raycast_bearings(grid, origin.x, origin.y, np.array([bearing]), max_range)[0])
