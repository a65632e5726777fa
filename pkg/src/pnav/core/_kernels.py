"""Jitted inner loop for ray marching.

Mirrors the numpy marching in grid.py step for step (same expressions, same
order) so both paths produce bit-identical distances; a test cross-checks
them. Falls back transparently when numba is unavailable.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=True)
def march_rays(cells, resolution, xs, ys, cos_bs, sin_bs, ts, out):  # pragma: no cover - jitted
    height, width = cells.shape
    n_rays = xs.shape[0]
    n_samples = ts.shape[0]
    for r in range(n_rays):
        x = xs[r]
        y = ys[r]
        cos_b = cos_bs[r]
        sin_b = sin_bs[r]
        cx_prev = int(math.floor(x / resolution))
        cy_prev = int(math.floor(y / resolution))
        result = math.inf
        for k in range(1, n_samples):
            t = ts[k]
            px = x + cos_b * t
            py = y + sin_b * t
            cx = int(math.floor(px / resolution))
            cy = int(math.floor(py / resolution))
            if cx != cx_prev and cy != cy_prev:
                # diagonal hop: check the corner cell the ray passed through
                bound_x = (cx if cx > cx_prev else cx_prev) * resolution
                bound_y = (cy if cy > cy_prev else cy_prev) * resolution
                t_x = (bound_x - x) / cos_b if cos_b != 0.0 else math.inf
                t_y = (bound_y - y) / sin_b if sin_b != 0.0 else math.inf
                if t_x < t_y:
                    mid_cx, mid_cy = cx, cy_prev
                else:
                    mid_cx, mid_cy = cx_prev, cy
                entry = t_x if t_x < t_y else t_y
                mid_occ = (
                    mid_cx < 0 or mid_cx >= width or mid_cy < 0 or mid_cy >= height
                    or cells[mid_cy, mid_cx]
                )
                if mid_occ and entry > 0.0:
                    result = entry
                    break
            if cx < 0 or cx >= width or cy < 0 or cy >= height or cells[cy, cx]:
                result = t
                break
            cx_prev = cx
            cy_prev = cy
        out[r] = result
    return out
