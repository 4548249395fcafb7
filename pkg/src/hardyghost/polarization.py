"""Two-qubit polarization states and Hardy-type measurement settings.

Angles are in radians and measured from H toward V. A setting with
``barred=True`` is the orthogonal partner of the unbarred setting at the
same ``theta`` (rotated by +90 degrees).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize

NORM_TOL = 1e-6
DEGENERATE_TOL = 1e-6
# closed-form Hardy probability accepts rounded lab values, e.g. (0.43, 0.9)
HARDY_NORM_TOL = 1e-2


class HardyDegenerateError(ValueError):
    """Raised when no Hardy measurement configuration exists for a state."""


@dataclass(frozen=True)
class PolarizationState:
    amp_hh: complex
    amp_hv: complex
    amp_vh: complex
    amp_vv: complex

    @classmethod
    def from_hardy(cls, alpha: float, beta: float, phi: float = math.pi) -> "PolarizationState":
        """``alpha|HH> + beta e^{i phi}|VV>``, rescaled to unit norm."""
        norm = math.hypot(alpha, beta)
        if norm == 0.0:
            raise ValueError("alpha and beta cannot both vanish")
        return cls(complex(alpha / norm), 0j, 0j, complex(beta / norm * np.exp(1j * phi)))

    @property
    def vector(self) -> np.ndarray:
        """Amplitudes ordered HH, HV, VH, VV."""
        return np.array([self.amp_hh, self.amp_hv, self.amp_vh, self.amp_vv], dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    @property
    def alpha(self) -> float:
        return abs(self.amp_hh)

    @property
    def beta(self) -> float:
        return abs(self.amp_vv)

    @property
    def phi(self) -> float:
        return float(np.angle(self.amp_vv) - np.angle(self.amp_hh)) % (2 * math.pi)


@dataclass(frozen=True)
class MeasurementSetting:
    theta: float
    barred: bool = False

    @property
    def vector(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        if self.barred:
            return np.array([-s, c])
        return np.array([c, s])

    @property
    def effective_angle(self) -> float:
        return self.theta + math.pi / 2 if self.barred else self.theta


@dataclass(frozen=True)
class HardyAngles:
    theta0: float
    theta1: float

    @property
    def theta0_bar(self) -> float:
        return self.theta0 + math.pi / 2

    @property
    def theta1_bar(self) -> float:
        return self.theta1 + math.pi / 2

    def degrees(self) -> dict[str, float]:
        return {
            "theta0": math.degrees(self.theta0),
            "theta1": math.degrees(self.theta1),
            "theta0_bar": math.degrees(self.theta0_bar),
            "theta1_bar": math.degrees(self.theta1_bar),
        }


# channel m -> ((signal k, barred), (idler k, barred))
CHANNELS = {
    1: ((0, False), (0, False)),
    2: ((0, True), (1, False)),
    3: ((1, False), (0, True)),
    4: ((1, False), (1, False)),
}


def channel_settings(m: int, angles: HardyAngles) -> tuple[MeasurementSetting, MeasurementSetting]:
    """Signal and idler settings of imaging channel ``m`` (1..4)."""
    if m not in CHANNELS:
        raise ValueError(f"channel must be one of 1..4, got {m!r}")
    theta = (angles.theta0, angles.theta1)
    (ks, bs), (ki, bi) = CHANNELS[m]
    return MeasurementSetting(theta[ks], bs), MeasurementSetting(theta[ki], bi)


def joint_probability(state: PolarizationState, signal: MeasurementSetting,
                      idler: MeasurementSetting) -> float:
    """|<signal, idler|state>|^2 for a normalized two-qubit state."""
    if abs(state.norm - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm={state.norm:.9f})")
    projector = np.kron(signal.vector, idler.vector)
    return float(abs(projector @ state.vector) ** 2)


def zero_conditions(state: PolarizationState, angles: HardyAngles) -> tuple[float, float, float]:
    """Probabilities of channels 1-3; all vanish for a valid Hardy configuration."""
    return tuple(joint_probability(state, *channel_settings(m, angles)) for m in (1, 2, 3))


def _hardy_magnitudes(alpha: float, beta: float) -> tuple[float, float]:
    a, b = abs(alpha), abs(beta)
    norm = math.hypot(a, b)
    if norm == 0.0 or min(a, b) / norm < DEGENERATE_TOL:
        raise HardyDegenerateError(
            f"product state (alpha={alpha!r}, beta={beta!r}) admits no Hardy angles")
    return a, b


def solve_hardy_angles(alpha: float, beta: float) -> HardyAngles:
    """Closed-form angles for ``alpha|HH> - beta|VV>``.

    Only the ratio alpha/beta matters, so rounded lab values are accepted
    without rescaling.
    """
    a, b = _hardy_magnitudes(alpha, beta)
    ratio = a / b
    return HardyAngles(theta0=math.atan(math.sqrt(ratio)), theta1=-math.atan(ratio ** 1.5))


def hardy_probability(alpha: float, beta: float) -> float:
    """P(A1, B1) = (|a|-|b|)^2 |ab|^2 / (1-|ab|)^2.

    The formula is evaluated on the magnitudes as given. It is exact on the
    normalized family; slightly off-normalized inputs (rounded lab values)
    are tolerated up to ``HARDY_NORM_TOL`` in a^2 + b^2.
    """
    a, b = _hardy_magnitudes(alpha, beta)
    if abs(a * a + b * b - 1.0) > HARDY_NORM_TOL:
        raise ValueError(f"alpha^2 + beta^2 = {a * a + b * b:.6f} is not close to 1")
    ab = a * b
    return (a - b) ** 2 * ab ** 2 / (1.0 - ab) ** 2


def fit_hardy_angles(state: PolarizationState, starts: int = 16) -> HardyAngles:
    """Numerically minimize the three zero-condition probabilities.

    Used for states outside the closed-form family (phase other than pi).
    Raises ``HardyDegenerateError`` if the residual cannot be pushed below
    1e-12.
    """
    if min(abs(state.amp_hh), abs(state.amp_vv)) < DEGENERATE_TOL:
        raise HardyDegenerateError("product state admits no Hardy angles")

    def residual(x):
        return sum(zero_conditions(state, HardyAngles(x[0], x[1])))

    best = None
    rng = np.random.default_rng(0)
    for x0 in rng.uniform(-math.pi / 2, math.pi / 2, size=(starts, 2)):
        res = optimize.minimize(residual, x0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
        # reject the trivial solution where channel 4 also vanishes
        angles = HardyAngles(*res.x)
        p4 = joint_probability(state, *channel_settings(4, angles))
        if res.fun < 1e-12 and p4 > 1e-9 and (best is None or p4 > best[1]):
            best = (angles, p4)
    if best is None:
        raise HardyDegenerateError("no Hardy configuration with real polarizer angles")
    return best[0]


class HardyOptimum(NamedTuple):
    alpha: float
    beta: float
    angles: HardyAngles
    probability: float


def _golden_section_max(f, lo: float, hi: float, tol: float) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def optimize_hardy(tol: float = 1e-10) -> HardyOptimum:
    """Maximize P(A1, B1) over ``alpha|HH> - sqrt(1-alpha^2)|VV>``.

    The objective is symmetric under alpha <-> beta and vanishes at
    alpha = 1/sqrt(2), so the search is confined to the alpha < beta branch
    where it is unimodal.
    """
    def objective(a):
        return hardy_probability(a, math.sqrt(1.0 - a * a))

    alpha = _golden_section_max(objective, 1e-3, math.sqrt(0.5), tol)
    beta = math.sqrt(1.0 - alpha * alpha)
    return HardyOptimum(alpha, beta, solve_hardy_angles(alpha, beta), objective(alpha))
