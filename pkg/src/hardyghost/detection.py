"""Heralded ICCD acquisition: thresholded Poisson frames summed into gray images.

Each (stream, frame, row block) draws from its own Philox counter range, so
an acquisition is a pure function of (rate map, config, stream) regardless
of how blocks are scheduled across workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, special

KINDS = ("raw", "background", "subtracted", "ideal")
IDEAL_FLOOR = 1e-9


@dataclass(frozen=True)
class DetectorConfig:
    frames: int = 2500
    exposure_s: float = 5.0
    flux_scale: float = 0.1
    dark_rate: float = 0.0
    threshold: int = 1
    seed: int = 0
    block_rows: int = 32

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.exposure_s <= 0:
            raise ValueError("exposure_s must be positive")
        if not self.flux_scale > 0:
            raise ValueError("flux_scale must be positive")
        if self.dark_rate < 0:
            raise ValueError("dark_rate must be nonnegative")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1 event")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        if self.block_rows < 1:
            raise ValueError("block_rows must be >= 1")


@dataclass(frozen=True)
class GrayImage:
    values: np.ndarray
    kind: str = "raw"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown image kind {self.kind!r}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape


def detection_probability(mean: np.ndarray | float, threshold: int = 1) -> np.ndarray:
    """P(Poisson(mean) >= threshold): chance a pixel fires in one frame."""
    mean = np.asarray(mean, dtype=float)
    if threshold == 1:
        return -np.expm1(-mean)
    return special.gammainc(threshold, mean)


def expected_gray(mean: np.ndarray | float, frames: int, threshold: int = 1) -> np.ndarray:
    return frames * detection_probability(mean, threshold)


def event_means(rate_map: np.ndarray, config: DetectorConfig,
                reference_max: float | None = None) -> np.ndarray:
    """Per-frame mean events: rate scaled so ``reference_max`` maps to flux_scale, plus dark."""
    rate_map = np.asarray(rate_map, dtype=float)
    if np.any(rate_map < 0):
        raise ValueError("rate map must be nonnegative")
    peak = float(rate_map.max()) if reference_max is None else float(reference_max)
    if peak > 0:
        signal = rate_map * (config.flux_scale / peak)
    else:
        signal = np.zeros_like(rate_map)
    return signal + config.dark_rate


def _stream_key(seed: int, stream: int) -> np.ndarray:
    return np.random.SeedSequence(seed, spawn_key=(stream,)).generate_state(2, dtype=np.uint64)


def _simulate_block(key: np.ndarray, block: int, prob: np.ndarray, frames: int) -> np.ndarray:
    counts = np.zeros(prob.shape, dtype=np.int64)
    if not np.any(prob > 0):
        return counts
    for frame in range(frames):
        # high counter words address (block, frame); the low words advance per draw
        bitgen = np.random.Philox(key=key, counter=[0, 0, block, frame])
        counts += np.random.Generator(bitgen).random(prob.shape) < prob
    return counts


def simulate_acquisition(rate_map: np.ndarray, config: DetectorConfig, stream: int = 0,
                         reference_max: float | None = None, workers: int = 1) -> GrayImage:
    """Accumulate ``config.frames`` binary frames into a gray image.

    ``stream`` separates independent acquisitions that share a seed.
    ``workers`` only changes scheduling, never the result.
    """
    means = event_means(rate_map, config, reference_max)
    prob = detection_probability(means, config.threshold)
    key = _stream_key(config.seed, stream)
    rows = prob.shape[0]
    starts = list(range(0, rows, config.block_rows))
    jobs = [(b, prob[s:s + config.block_rows]) for b, s in enumerate(starts)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _simulate_block(key, j[0], j[1], config.frames), jobs))
    else:
        parts = [_simulate_block(key, b, p, config.frames) for b, p in jobs]
    counts = np.concatenate(parts, axis=0) if parts else np.zeros(prob.shape, dtype=np.int64)
    return GrayImage(counts.astype(float), "raw")


def background_image(config: DetectorConfig, shape: tuple[int, int], stream: int = 0,
                     workers: int = 1) -> GrayImage:
    """Acquisition with the gate delay off: dark events only."""
    img = simulate_acquisition(np.zeros(shape), config, stream=stream, workers=workers)
    return GrayImage(img.values, "background")


def ideal_acquisition(rate_map: np.ndarray, config: DetectorConfig,
                      reference_max: float | None = None) -> GrayImage:
    """Noise-free, unsaturated counts: frames times the mean signal events.

    Expected counts below ``IDEAL_FLOOR`` (rounding residue of analytically
    zero channels) are set to exactly zero.
    """
    counts = config.frames * (event_means(rate_map, config, reference_max) - config.dark_rate)
    return GrayImage(np.where(counts < IDEAL_FLOOR, 0.0, counts), "ideal")


def subtract_background(raw: GrayImage, bg: GrayImage,
                        saturation_quantile: float | None = 0.999) -> GrayImage:
    """raw - bg clamped at zero, with strong-exposure pixels set to their 3x3 median."""
    if raw.shape != bg.shape:
        raise ValueError(f"shape mismatch: raw {raw.shape} vs background {bg.shape}")
    diff = np.clip(raw.values - bg.values, 0.0, None)
    if saturation_quantile is not None and diff.size > 1:
        cut = np.quantile(diff, saturation_quantile)
        hot = diff > cut
        if np.any(hot):
            diff = np.where(hot, ndimage.median_filter(diff, size=3, mode="nearest"), diff)
    return GrayImage(diff, "subtracted")
