"""Figures of merit for the four Hardy ghost images."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .detection import GrayImage


class UndefinedMetricError(ValueError):
    """A figure of merit has no defined value for the given data."""


@dataclass(frozen=True)
class ROI:
    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("ROI must contain at least one pixel")
        if self.x0 < 0 or self.y0 < 0:
            raise ValueError("ROI origin must be inside the image")

    @property
    def size(self) -> int:
        return self.width * self.height

    def slices(self, shape: tuple[int, int]) -> tuple[slice, slice]:
        rows, cols = shape
        if self.y0 + self.height > rows or self.x0 + self.width > cols:
            raise ValueError(f"{self} exceeds image bounds {shape}")
        return slice(self.y0, self.y0 + self.height), slice(self.x0, self.x0 + self.width)

    def mask(self, shape: tuple[int, int]) -> np.ndarray:
        m = np.zeros(shape, dtype=bool)
        m[self.slices(shape)] = True
        return m


def _values(image) -> np.ndarray:
    return np.asarray(image.values if isinstance(image, GrayImage) else image, dtype=float)


def _rois(roi: ROI | Sequence[ROI]) -> list[ROI]:
    return [roi] if isinstance(roi, ROI) else list(roi)


def object_mask(values: np.ndarray) -> np.ndarray:
    """Transmissive pixels of a ground-truth object: |psi| > 0.5."""
    return np.abs(np.asarray(values)) > 0.5


def _class_stats(image, mask) -> tuple[float, float, float, float]:
    g = _values(image)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != g.shape:
        raise ValueError("mask and image shapes differ")
    inside, outside = g[mask], g[~mask]
    if inside.size < 2 or outside.size < 2:
        raise ValueError("each mask class needs at least two pixels")
    var_sum = inside.var() + outside.var()
    if var_sum == 0.0:
        raise UndefinedMetricError("both classes have zero variance")
    return inside.mean(), outside.mean(), var_sum, math.sqrt(var_sum)


def cnr(image, mask) -> float:
    """(<G_in> + <G_out>) / sqrt(var_in + var_out), with the plus-sign numerator."""
    g_in, g_out, _, noise = _class_stats(image, mask)
    return float((g_in + g_out) / noise)


def cnr_difference(image, mask) -> float:
    """Conventional contrast-to-noise ratio (<G_in> - <G_out>) / sqrt(var_in + var_out)."""
    g_in, g_out, _, noise = _class_stats(image, mask)
    return float((g_in - g_out) / noise)


def roi_sum(image, roi: ROI | Sequence[ROI]) -> float:
    g = _values(image)
    return float(sum(g[r.slices(g.shape)].sum() for r in _rois(roi)))


@dataclass
class HardyReport:
    p_00: float
    p_b01: float
    p_1b0: float
    p_11: float
    s_value: float
    pixels: np.ndarray          # (N, 2) row, col of every ROI pixel
    s_pixels: np.ndarray        # S_ij per ROI pixel, NaN where the HH+VV total is zero

    @property
    def included(self) -> np.ndarray:
        return ~np.isnan(self.s_pixels)

    @property
    def s_map(self) -> np.ndarray:
        """S_ij of pixels with nonzero per-pixel total."""
        return self.s_pixels[self.included]

    @property
    def s_map_all(self) -> np.ndarray:
        """S_ij of every ROI pixel, zero-total pixels counted as 0."""
        return np.nan_to_num(self.s_pixels, nan=0.0)

    @property
    def n_roi(self) -> int:
        return int(self.s_pixels.size)

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.s_map > 0))

    @property
    def positive_fraction(self) -> float:
        n = int(self.included.sum())
        return self.n_positive / n if n else float("nan")

    @property
    def positive_fraction_all(self) -> float:
        return self.n_positive / self.n_roi

    def band_fraction(self, lo: float = 0.0, hi: float = 0.09) -> float:
        """Fraction of ROI pixels with lo < S_ij <= hi."""
        s = self.s_map
        return float(np.sum((s > lo) & (s <= hi))) / self.n_roi


def hardy_from_images(channels: Sequence, hh, vv, roi: ROI | Sequence[ROI]) -> HardyReport:
    """Macroscopic and per-pixel Hardy probabilities from the four channel images.

    ``channels`` are the images of (A0,B0), (A0bar,B1), (A1,B0bar), (A1,B1).
    """
    if len(channels) != 4:
        raise ValueError("expected four channel images")
    imgs = [_values(c) for c in channels]
    g_hh, g_vv = _values(hh), _values(vv)
    shape = g_hh.shape
    if any(g.shape != shape for g in (*imgs, g_vv)):
        raise ValueError("all images must share one shape")
    rois = _rois(roi)
    n_total = roi_sum(g_hh, rois) + roi_sum(g_vv, rois)
    if not n_total > 0:
        raise UndefinedMetricError("N_total over the ROI is zero")
    p_00, p_b01, p_1b0, p_11 = (roi_sum(g, rois) / n_total for g in imgs)

    mask = np.zeros(shape, dtype=bool)
    for r in rois:
        mask |= r.mask(shape)
    pixels = np.argwhere(mask)
    total = (g_hh + g_vv)[mask]
    numer = (imgs[3] - imgs[0] - imgs[1] - imgs[2])[mask]
    with np.errstate(divide="ignore", invalid="ignore"):
        s_pixels = np.where(total > 0, numer / total, np.nan)
    return HardyReport(p_00, p_b01, p_1b0, p_11, p_11 - p_b01 - p_1b0 - p_00, pixels, s_pixels)


def s_histogram(report: HardyReport, bins: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of S_ij over included pixels: (edges, counts)."""
    if bins < 1:
        raise ValueError("bins must be positive")
    s = report.s_map
    if s.size == 0:
        raise UndefinedMetricError("no pixels with nonzero total in the ROI")
    lo, hi = float(s.min()), float(s.max())
    # values equal up to rounding (e.g. noise-free images) get a fixed-width range
    if hi - lo < 1e-9:
        mid = 0.5 * (lo + hi)
        lo, hi = mid - 0.5e-3, mid + 0.5e-3
    counts, edges = np.histogram(s, bins=bins, range=(lo, hi))
    return edges, counts
