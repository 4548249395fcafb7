"""Built-in test objects."""
from __future__ import annotations

import math
import warnings

import numpy as np

from .analysis import ROI
from .spatial import GridSpec, ObjectField


def make_double_slit(grid: GridSpec, slit_width_um: float = 275.0, slit_height_um: float = 1275.0,
                     separation_um: float = 550.0) -> tuple[ObjectField, list[ROI]]:
    """Binary double slit centered on the grid, with one ROI per slit.

    ``separation_um`` is center to center. Sizes are rounded to whole
    pixels: at 25 um pitch the defaults give two 11 x 51 slits. The pair is
    mirror-symmetric about the vertical axis; the vertical placement is
    exactly centered only when n and the slit height in pixels share parity.
    """
    pitch_um = grid.pitch * 1000.0
    w = int(round(slit_width_um / pitch_um))
    h = int(round(slit_height_um / pitch_um))
    sep = int(round(separation_um / pitch_um))
    n = grid.n
    if w < 1 or h < 1:
        raise ValueError("slit is smaller than one pixel")
    if w > n or h > n:
        raise ValueError(f"slit ({w} x {h} px) is wider than the field ({n} px)")
    if sep + w > n:
        raise ValueError("double slit does not fit in the field")
    if sep < w:
        warnings.warn("slit separation below slit width: slits merge", stacklevel=2)

    left = math.floor((n - 1) / 2.0 - sep / 2.0 - (w - 1) / 2.0 + 0.5)
    right = n - w - left
    top = (n - h) // 2
    values = np.zeros((n, n))
    rois = []
    for x0 in (left, right):
        values[top:top + h, x0:x0 + w] = 1.0
        rois.append(ROI(x0, top, w, h))
    if left + w > right:
        merged_x0 = left
        rois = [ROI(merged_x0, top, right + w - merged_x0, h)]
    return ObjectField(grid, values), rois
