"""Experiment configuration and the calibrate -> image -> acquire -> analyze pipeline."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (ROI, HardyReport, UndefinedMetricError, cnr, cnr_difference,
                       hardy_from_images, object_mask, s_histogram)
from .detection import (DetectorConfig, GrayImage, background_image, ideal_acquisition,
                        simulate_acquisition, subtract_background)
from .io import (FormatError, format_keyvalue, load_gray, load_object, parse_keyvalue,
                 read_csv_array, save_gray, write_csv_array, write_csv_rows, write_keyvalue)
from .objects import make_double_slit
from .polarization import (HardyAngles, MeasurementSetting, PolarizationState,
                           channel_settings, joint_probability, solve_hardy_angles)
from .spatial import (GridSpec, ObjectField, SchmidtSpectrum, channel_image, decompose_object,
                      ghost_intensity, idler_state)

CHANNEL_NAMES = ("ch1", "ch2", "ch3", "ch4", "hh", "vv")
# H is theta = 0; V is its barred partner
H_SETTING = MeasurementSetting(0.0)
V_SETTING = MeasurementSetting(0.0, barred=True)


class PipelineError(Exception):
    """Carries a short machine-readable code for the CLI."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _key(name: str, default, kind=None):
    return field(default=default, metadata={"key": name, "kind": kind or type(default)})


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float = _key("state.alpha", 0.43)
    beta: float = _key("state.beta", 0.9)
    phi_deg: float = _key("state.phi_deg", 180.0)
    theta0_deg: float | None = _key("angles.theta0_deg", None, float)
    theta1_deg: float | None = _key("angles.theta1_deg", None, float)
    grid_n: int = _key("grid.n", 256)
    half_extent_mm: float = _key("grid.half_extent_mm", 3.2)
    waist_mm: float = _key("grid.waist_mm", 0.2)
    ell_max: int = _key("modes.ell_max", 10)
    p_max: int = _key("modes.p_max", 6)
    spectrum: str = _key("spectrum.model", "flat")
    sigma_ell: float = _key("spectrum.sigma_ell", 4.0)
    radial_ratio: float = _key("spectrum.radial_ratio", 0.8)
    detector_model: str = _key("detector.model", "montecarlo")
    frames: int = _key("detector.frames", 2500)
    exposure_s: float = _key("detector.exposure_s", 5.0)
    flux_scale: float = _key("detector.flux_scale", 0.1)
    dark_rate: float = _key("detector.dark_rate", 1e-6)
    threshold: int = _key("detector.threshold", 1)
    seed: int = _key("detector.seed", 0)
    saturation_quantile: float | None = _key("detector.saturation_quantile", 0.999, float)
    object_source: str = _key("object.source", "double_slit")
    object_path: str = _key("object.path", "")
    slit_width_um: float = _key("object.slit_width_um", 275.0)
    slit_height_um: float = _key("object.slit_height_um", 1275.0)
    separation_um: float = _key("object.separation_um", 550.0)
    rois: str = _key("roi.list", "auto")
    bins: int = _key("analysis.bins", 30)

    def __post_init__(self):
        if self.spectrum not in ("flat", "gaussian"):
            raise ValueError(f"spectrum.model must be flat or gaussian, got {self.spectrum!r}")
        if self.detector_model not in ("montecarlo", "ideal"):
            raise ValueError("detector.model must be montecarlo or ideal")
        if self.object_source not in ("double_slit", "file"):
            raise ValueError("object.source must be double_slit or file")
        if self.object_source == "file" and not self.object_path:
            raise ValueError("object.path is required when object.source = file")
        if (self.theta0_deg is None) != (self.theta1_deg is None):
            raise ValueError("angle overrides need both theta0_deg and theta1_deg")
        if self.ell_max < 0 or self.p_max < 0:
            raise ValueError("truncation must be nonnegative")
        if self.bins < 1:
            raise ValueError("analysis.bins must be positive")
        if self.saturation_quantile is not None and not 0 < self.saturation_quantile <= 1:
            raise ValueError("detector.saturation_quantile must lie in (0, 1]")
        self.grid_spec()
        self.detector()
        self.state()
        if self.rois != "auto":
            parse_rois(self.rois)

    def grid_spec(self) -> GridSpec:
        return GridSpec(self.grid_n, self.half_extent_mm, self.waist_mm)

    def detector(self) -> DetectorConfig:
        return DetectorConfig(frames=self.frames, exposure_s=self.exposure_s,
                              flux_scale=self.flux_scale, dark_rate=self.dark_rate,
                              threshold=self.threshold, seed=self.seed)

    def state(self) -> PolarizationState:
        return PolarizationState.from_hardy(self.alpha, self.beta, math.radians(self.phi_deg))

    def angles(self) -> HardyAngles:
        if self.theta0_deg is not None:
            return HardyAngles(math.radians(self.theta0_deg), math.radians(self.theta1_deg))
        return solve_hardy_angles(self.alpha, self.beta)

    def schmidt_spectrum(self) -> SchmidtSpectrum:
        if self.spectrum == "flat":
            return SchmidtSpectrum.flat(self.ell_max, self.p_max)
        return SchmidtSpectrum.gaussian(self.ell_max, self.p_max, self.sigma_ell, self.radial_ratio)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


PRESETS = {
    # analytic images without sampling or dark counts
    "noise-free": {"detector_model": "ideal", "dark_rate": 0.0},
    # shot noise on a prepared state drifted away from the one the nominal
    # polarizer angles (34.7, -18.3 deg) were calibrated for
    "paper-noisy": {"alpha": 0.40, "beta": math.sqrt(1 - 0.40 ** 2), "phi_deg": 180.0,
                    "theta0_deg": 34.7, "theta1_deg": -18.3,
                    "detector_model": "montecarlo", "flux_scale": 0.1, "dark_rate": 1e-6},
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig(**{**PRESETS[name], **overrides})


def _config_fields():
    return [(f.name, f.metadata["key"], f.metadata["kind"]) for f in dataclasses.fields(ExperimentConfig)]


def _convert(text: str, kind, key: str):
    if text in ("", "none") and key in _OPTIONAL_KEYS:
        return None
    try:
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise FormatError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None
    return text


_OPTIONAL_KEYS = {"angles.theta0_deg", "angles.theta1_deg", "detector.saturation_quantile"}


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {}
    for name, key, _ in _config_fields():
        value = getattr(cfg, name)
        out[key] = "none" if value is None else value
    return out


def format_config(cfg: ExperimentConfig) -> str:
    return format_keyvalue(config_to_dict(cfg))


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse key = value text; unknown keys are rejected, missing keys keep ``base``."""
    pairs = parse_keyvalue(text)
    by_key = {key: (name, kind) for name, key, kind in _config_fields()}
    unknown = sorted(set(pairs) - set(by_key))
    if unknown:
        raise FormatError(f"unknown config keys: {', '.join(unknown)}")
    changes = {by_key[k][0]: _convert(v, by_key[k][1], k) for k, v in pairs.items()}
    return dataclasses.replace(base or ExperimentConfig(), **changes)


def parse_rois(text: str) -> list[ROI]:
    """``x0,y0,w,h;x0,y0,w,h`` -> ROIs."""
    rois = []
    for part in text.split(";"):
        nums = part.split(",")
        if len(nums) != 4:
            raise FormatError(f"ROI needs x0,y0,width,height: {part!r}")
        rois.append(ROI(*(int(v) for v in nums)))
    return rois


def format_rois(rois) -> str:
    return ";".join(f"{r.x0},{r.y0},{r.width},{r.height}" for r in rois)


def build_object(cfg: ExperimentConfig) -> tuple[ObjectField, list[ROI]]:
    grid = cfg.grid_spec()
    if cfg.object_source == "double_slit":
        obj, rois = make_double_slit(grid, cfg.slit_width_um, cfg.slit_height_um, cfg.separation_um)
    else:
        obj = load_object(cfg.object_path, grid)
        rois = []
    if cfg.rois != "auto":
        rois = parse_rois(cfg.rois)
    if not rois:
        raise PipelineError("E_ROI", "no ROI: set roi.list for file objects")
    for r in rois:
        r.slices((grid.n, grid.n))
    return obj, rois


@dataclass
class NoiseFreeImages:
    spatial: np.ndarray
    rates: dict[str, np.ndarray]
    probabilities: dict[str, float]
    parseval_ratio: float
    reference_max: float


def noise_free_images(cfg: ExperimentConfig, obj: ObjectField) -> NoiseFreeImages:
    """Spatial ghost image and the six polarization-channel intensity maps."""
    decomp = decompose_object(obj, (cfg.ell_max, cfg.p_max))
    if decomp.zero_energy:
        raise PipelineError("E_OBJECT", "object has zero transmission everywhere")
    grid = obj.grid
    spatial = ghost_intensity(idler_state(decomp, cfg.schmidt_spectrum()), grid)
    state, angles = cfg.state(), cfg.angles()
    rates, probs = {}, {}
    for m in (1, 2, 3, 4):
        rates[f"ch{m}"] = channel_image(m, state, angles, spatial)
    for name, setting in (("hh", H_SETTING), ("vv", V_SETTING)):
        probs[name] = joint_probability(state, setting, setting)
        rates[name] = probs[name] * spatial
    for m in (1, 2, 3, 4):
        probs[f"ch{m}"] = joint_probability(state, *channel_settings(m, angles))
    reference_max = float((rates["hh"] + rates["vv"]).max())
    return NoiseFreeImages(spatial, rates, probs, decomp.parseval_ratio, reference_max)


@dataclass
class Acquisition:
    raw: dict[str, GrayImage]
    background: dict[str, GrayImage]
    images: dict[str, GrayImage]


def acquire(cfg: ExperimentConfig, nf: NoiseFreeImages, workers: int = 1) -> Acquisition:
    det = cfg.detector()
    raw, bg, final = {}, {}, {}
    for k, name in enumerate(CHANNEL_NAMES):
        rate = nf.rates[name]
        if cfg.detector_model == "ideal":
            raw[name] = ideal_acquisition(rate, det, nf.reference_max)
            bg[name] = GrayImage(np.zeros_like(rate), "background")
            final[name] = raw[name]
            continue
        raw[name] = simulate_acquisition(rate, det, stream=1 + k, reference_max=nf.reference_max,
                                         workers=workers)
        bg[name] = background_image(det, rate.shape, stream=101 + k, workers=workers)
        final[name] = subtract_background(raw[name], bg[name], cfg.saturation_quantile)
    return Acquisition(raw, bg, final)


def cnr_table(images: dict[str, GrayImage], mask: np.ndarray) -> dict[str, tuple[float, float]]:
    """Plus-sign and difference CNR per channel; NaN where undefined."""
    out = {}
    for name in CHANNEL_NAMES:
        try:
            out[name] = (cnr(images[name], mask), cnr_difference(images[name], mask))
        except UndefinedMetricError:
            out[name] = (float("nan"), float("nan"))
    return out


def analyze(images: dict[str, GrayImage], rois: list[ROI]) -> HardyReport:
    return hardy_from_images([images[f"ch{m}"] for m in (1, 2, 3, 4)], images["hh"],
                             images["vv"], rois)


@dataclass
class RunResult:
    config: ExperimentConfig
    angles: HardyAngles
    noise_free: NoiseFreeImages
    acquisition: Acquisition
    report: HardyReport
    cnr: dict[str, tuple[float, float]]
    histogram: tuple[np.ndarray, np.ndarray] | None
    rois: list[ROI]
    files: list[str] = field(default_factory=list)


def report_dict(report: HardyReport) -> dict:
    return {
        "p_00": report.p_00,
        "p_b01": report.p_b01,
        "p_1b0": report.p_1b0,
        "p_11": report.p_11,
        "s_value": report.s_value,
        "roi_pixels": report.n_roi,
        "included_pixels": int(report.included.sum()),
        "positive_pixels": report.n_positive,
        "positive_fraction": report.positive_fraction,
        "positive_fraction_all": report.positive_fraction_all,
        "band_fraction_0_0.09": report.band_fraction(),
    }


def manifest_dict(cfg: ExperimentConfig, angles: HardyAngles, nf: NoiseFreeImages,
                  rois: list[ROI]) -> dict:
    grid = cfg.grid_spec()
    out = {"package.version": __version__}
    out.update(config_to_dict(cfg))
    out.update({
        "resolved.roi.list": format_rois(rois),
        "resolved.grid.pitch_um": grid.pitch * 1000.0,
        "resolved.state.norm_alpha": cfg.state().alpha,
        "resolved.state.norm_beta": cfg.state().beta,
        "resolved.angles.theta0_deg": math.degrees(angles.theta0),
        "resolved.angles.theta1_deg": math.degrees(angles.theta1),
        "resolved.angles.theta0_bar_deg": math.degrees(angles.theta0_bar),
        "resolved.angles.theta1_bar_deg": math.degrees(angles.theta1_bar),
        "resolved.parseval_ratio": nf.parseval_ratio,
        "resolved.reference_max": nf.reference_max,
    })
    for name in CHANNEL_NAMES:
        out[f"resolved.probability.{name}"] = nf.probabilities[name]
    return out


def run_pipeline(cfg: ExperimentConfig, out_dir: str | Path | None = None,
                 workers: int = 1) -> RunResult:
    """Full pipeline; writes the artifact bundle when ``out_dir`` is given."""
    obj, rois = build_object(cfg)
    angles = cfg.angles()
    nf = noise_free_images(cfg, obj)
    acq = acquire(cfg, nf, workers)
    try:
        report = analyze(acq.images, rois)
    except UndefinedMetricError as exc:
        raise PipelineError("E_ANALYSIS", str(exc)) from None
    mask = object_mask(obj.values)
    table = cnr_table(acq.images, mask)
    try:
        hist = s_histogram(report, cfg.bins)
    except UndefinedMetricError:
        hist = None
    result = RunResult(cfg, angles, nf, acq, report, table, hist, rois)
    if out_dir is not None:
        result.files = write_bundle(result, Path(out_dir))
    return result


def write_images(out: Path, images: dict[str, GrayImage], prefix: str, csv: bool = False) -> list[str]:
    files = []
    for name in CHANNEL_NAMES:
        stem = f"{prefix}_{name}"
        save_gray(out / f"{stem}.pgm", images[name].values)
        files += [f"{stem}.pgm", f"{stem}.pgm.scale"]
        if csv:
            write_csv_array(out / f"{stem}.csv", images[name].values)
            files.append(f"{stem}.csv")
    return files


def write_bundle(result: RunResult, out: Path) -> list[str]:
    out.mkdir(parents=True, exist_ok=True)
    acq = result.acquisition
    files = write_images(out, acq.images, "image", csv=True)
    files += write_images(out, acq.raw, "raw")
    files += write_images(out, acq.background, "background")

    write_keyvalue(out / "report.txt", report_dict(result.report))
    rows = [(name, *result.cnr[name]) for name in CHANNEL_NAMES]
    write_csv_rows(out / "cnr.csv", ["channel", "cnr", "cnr_difference"], rows)
    rep = result.report
    write_csv_rows(out / "s_map.csv", ["row", "col", "s_ij"],
                   [(int(r), int(c), float(s)) for (r, c), s in zip(rep.pixels, rep.s_pixels)])
    hist_rows = []
    if result.histogram is not None:
        edges, counts = result.histogram
        hist_rows = [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))]
    write_csv_rows(out / "histogram.csv", ["lo", "hi", "count"], hist_rows)
    write_keyvalue(out / "manifest.txt",
                   manifest_dict(result.config, result.angles, result.noise_free, result.rois))
    files += ["report.txt", "cnr.csv", "s_map.csv", "histogram.csv", "manifest.txt"]
    return files


def load_images(directory: str | Path, prefix: str = "image") -> dict[str, GrayImage]:
    """Read the six channel images written by ``write_bundle``; CSV preferred over P2."""
    directory = Path(directory)
    images = {}
    for name in CHANNEL_NAMES:
        csv_path = directory / f"{prefix}_{name}.csv"
        pgm_path = directory / f"{prefix}_{name}.pgm"
        if csv_path.exists():
            values = read_csv_array(csv_path)
        elif pgm_path.exists():
            values = load_gray(pgm_path)
        else:
            raise PipelineError("E_IO", f"missing image for channel {name} in {directory}")
        images[name] = GrayImage(values, "subtracted")
    return images


def load_config(path: str | Path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), base)


__all__ = [
    "ExperimentConfig", "PRESETS", "preset", "parse_config", "format_config", "load_config",
    "run_pipeline", "RunResult", "PipelineError", "noise_free_images", "acquire", "analyze",
    "build_object", "cnr_table", "load_images", "parse_rois", "format_rois",
]
