"""Ghost-imaging simulator with a Hardy nonlocality test on polarization."""

__version__ = "0.1.0"

from .polarization import (HardyAngles, HardyDegenerateError, MeasurementSetting,
                           PolarizationState, channel_settings, hardy_probability,
                           joint_probability, optimize_hardy, solve_hardy_angles, zero_conditions)
from .spatial import (GridSpec, LGIndex, ModeDecomposition, ObjectField, SchmidtSpectrum,
                      channel_image, decompose_object, ghost_intensity, idler_state,
                      lg_mode_field, reconstruct)
from .detection import (DetectorConfig, GrayImage, background_image, simulate_acquisition,
                        subtract_background)
from .analysis import ROI, HardyReport, cnr, cnr_difference, hardy_from_images, roi_sum, s_histogram
from .objects import make_double_slit
from .io import load_object
from .pipeline import ExperimentConfig, PipelineError, preset, run_pipeline
