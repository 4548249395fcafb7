"""Laguerre-Gaussian mode basis, object decomposition and ghost-image synthesis.

Grids are square with the origin at the center; row 0 is the top
(largest y), column 0 the left edge (smallest x). Lengths are in mm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .polarization import HardyAngles, PolarizationState, channel_settings, joint_probability

SPILL_TOL = 0.01


@dataclass(frozen=True)
class LGIndex:
    ell: int
    p: int

    def __post_init__(self):
        if self.p < 0:
            raise ValueError(f"radial index must be nonnegative, got {self.p}")


@dataclass(frozen=True)
class GridSpec:
    n: int = 256
    half_extent: float = 0.9
    waist: float = 0.2

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("grid needs at least 8 pixels per side")
        if self.half_extent <= 0 or self.waist <= 0:
            raise ValueError("half_extent and waist must be positive")

    @property
    def pitch(self) -> float:
        return 2.0 * self.half_extent / self.n

    @property
    def pixel_area(self) -> float:
        return self.pitch ** 2

    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - (self.n - 1) / 2.0) * self.pitch

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center coordinates (x, y), each n x n."""
        c = self.axis()
        return np.meshgrid(c, c[::-1])

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.coords()
        return np.hypot(x, y), np.arctan2(y, x)


@dataclass(frozen=True)
class ModeField:
    values: np.ndarray
    norm: float

    @property
    def spills(self) -> bool:
        """True when more than 1% of the mode power falls outside the grid."""
        return 1.0 - self.norm ** 2 > SPILL_TOL


def _radial_profile(ell: int, p: int, r: np.ndarray, w: float) -> np.ndarray:
    m = abs(ell)
    x = 2.0 * (r / w) ** 2
    # factorial ratio via log-gamma keeps high orders finite
    c = math.sqrt(2.0 / math.pi * math.exp(special.gammaln(p + 1) - special.gammaln(p + m + 1))) / w
    return c * x ** (m / 2.0) * special.eval_genlaguerre(p, m, x) * np.exp(-x / 2.0)


def lg_mode_field(index: LGIndex, grid: GridSpec) -> ModeField:
    """Normalized LG mode at the waist plane, sampled on ``grid``."""
    r, phi = grid.polar()
    values = _radial_profile(index.ell, index.p, r, grid.waist) * np.exp(1j * index.ell * phi)
    norm = math.sqrt(float(np.sum(np.abs(values) ** 2)) * grid.pixel_area)
    return ModeField(values, norm)


@dataclass(frozen=True)
class ObjectField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"object shape {v.shape} does not match grid n={self.grid.n}")
        if np.any(np.abs(v) > 1.0 + 1e-12):
            raise ValueError("transmission magnitude exceeds 1")
        object.__setattr__(self, "values", v)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.pixel_area)


@dataclass
class ModeDecomposition:
    """Amplitudes indexed ``[ell + ell_max, p]``."""

    amplitudes: np.ndarray
    ell_max: int
    p_max: int
    object_energy: float = float("nan")

    def __post_init__(self):
        if self.amplitudes.shape != (2 * self.ell_max + 1, self.p_max + 1):
            raise ValueError("amplitude array does not match truncation")

    @property
    def truncation(self) -> tuple[int, int]:
        return self.ell_max, self.p_max

    def __getitem__(self, index: LGIndex | tuple[int, int]) -> complex:
        ell, p = (index.ell, index.p) if isinstance(index, LGIndex) else index
        if abs(ell) > self.ell_max or not 0 <= p <= self.p_max:
            return 0j
        return complex(self.amplitudes[ell + self.ell_max, p])

    def indices(self):
        for ell in range(-self.ell_max, self.ell_max + 1):
            for p in range(self.p_max + 1):
                yield LGIndex(ell, p)

    @property
    def captured_energy(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def zero_energy(self) -> bool:
        return self.object_energy == 0.0

    @property
    def parseval_ratio(self) -> float:
        """Fraction of the object energy captured by the truncated basis."""
        if not self.object_energy > 0:
            return float("nan")
        return self.captured_energy / self.object_energy

    @property
    def parseval_deficit(self) -> float:
        return self.object_energy - self.captured_energy


def decompose_object(obj: ObjectField, truncation: tuple[int, int] = (10, 6)) -> ModeDecomposition:
    """Overlap amplitudes <ell, p|psi> by midpoint quadrature."""
    ell_max, p_max = truncation
    amps = np.zeros((2 * ell_max + 1, p_max + 1), dtype=complex)
    energy = obj.energy
    if energy == 0.0:
        return ModeDecomposition(amps, ell_max, p_max, 0.0)
    r, phi = obj.grid.polar()
    da = obj.grid.pixel_area
    for ell in range(-ell_max, ell_max + 1):
        twisted = obj.values * np.exp(-1j * ell * phi)
        for p in range(p_max + 1):
            radial = _radial_profile(ell, p, r, obj.grid.waist)
            amps[ell + ell_max, p] = np.sum(radial * twisted) * da
    return ModeDecomposition(amps, ell_max, p_max, energy)


def reconstruct(decomp: ModeDecomposition, grid: GridSpec) -> np.ndarray:
    """Complex field sum_{ell,p} A_{ell,p} LG_{ell,p} on ``grid``."""
    r, phi = grid.polar()
    out = np.zeros((grid.n, grid.n), dtype=complex)
    for ell in range(-decomp.ell_max, decomp.ell_max + 1):
        row = decomp.amplitudes[ell + decomp.ell_max]
        if not np.any(row):
            continue
        radial = np.zeros_like(r)
        for p, a in enumerate(row):
            if a != 0:
                radial = radial + a * _radial_profile(ell, p, r, grid.waist)
        out += radial * np.exp(1j * ell * phi)
    return out


@dataclass
class SchmidtSpectrum:
    """Diagonal biphoton amplitudes lambda[ell + ell_max, p] >= 0.

    The spatial state is sum lambda_{l,p} |l, p>_s |-l, p>_i, indexed by
    the signal mode.
    """

    lam: np.ndarray
    ell_max: int
    p_max: int
    model: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (2 * self.ell_max + 1, self.p_max + 1):
            raise ValueError("spectrum array does not match truncation")
        if np.any(lam < 0):
            raise ValueError("Schmidt amplitudes must be nonnegative")
        total = math.sqrt(float(np.sum(lam ** 2)))
        if total == 0.0:
            raise ValueError("empty Schmidt spectrum")
        self.lam = lam / total

    @classmethod
    def flat(cls, ell_max: int, p_max: int) -> "SchmidtSpectrum":
        return cls(np.ones((2 * ell_max + 1, p_max + 1)), ell_max, p_max, "flat")

    @classmethod
    def gaussian(cls, ell_max: int, p_max: int, sigma_ell: float = 4.0,
                 radial_ratio: float = 0.8) -> "SchmidtSpectrum":
        """Gaussian in ell times a geometric sequence in p."""
        if sigma_ell <= 0 or not 0 < radial_ratio <= 1:
            raise ValueError("need sigma_ell > 0 and 0 < radial_ratio <= 1")
        ell = np.arange(-ell_max, ell_max + 1)[:, None]
        p = np.arange(p_max + 1)[None, :]
        lam = np.exp(-ell ** 2 / (4.0 * sigma_ell ** 2)) * radial_ratio ** p
        return cls(lam, ell_max, p_max, "gaussian",
                   {"sigma_ell": sigma_ell, "radial_ratio": radial_ratio})

    @classmethod
    def single(cls, index: LGIndex, ell_max: int, p_max: int) -> "SchmidtSpectrum":
        lam = np.zeros((2 * ell_max + 1, p_max + 1))
        lam[index.ell + ell_max, index.p] = 1.0
        return cls(lam, ell_max, p_max, "single")


def idler_state(decomp: ModeDecomposition, spectrum: SchmidtSpectrum) -> ModeDecomposition:
    """Idler amplitudes heralded by projecting the signal onto the object.

    The signal projection conjugates A and sends ell -> -ell, so the idler
    carries conj(A_{-ell,p}) lambda_{-ell,p}; this is the decomposition of
    conj(psi) weighted by the spectrum, and for a flat spectrum the image
    is |psi|^2 in the original orientation.
    """
    if (decomp.ell_max, decomp.p_max) != (spectrum.ell_max, spectrum.p_max):
        raise ValueError(f"truncation mismatch: decomposition {decomp.truncation} "
                         f"vs spectrum {(spectrum.ell_max, spectrum.p_max)}")
    amps = np.conj(decomp.amplitudes[::-1]) * spectrum.lam[::-1]
    return ModeDecomposition(amps, decomp.ell_max, decomp.p_max, decomp.object_energy)


def ghost_intensity(idler: ModeDecomposition, grid: GridSpec) -> np.ndarray:
    """|<r, phi|idler>|^2, scaled so that sum(image) * pixel_area = sum |amp|^2."""
    norm2 = idler.captured_energy
    if norm2 == 0.0:
        return np.zeros((grid.n, grid.n))
    image = np.abs(reconstruct(idler, grid)) ** 2
    return image * (norm2 / (np.sum(image) * grid.pixel_area))


def channel_image(m: int, pol: PolarizationState, angles: HardyAngles,
                  spatial_image: np.ndarray) -> np.ndarray:
    """Ghost image of Hardy channel ``m``: spatial image times its joint probability."""
    signal, idler = channel_settings(m, angles)
    return joint_probability(pol, signal, idler) * np.asarray(spatial_image, dtype=float)
