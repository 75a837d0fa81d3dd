"""Mixed-noise removal for hyperspectral cubes with a multi-modal,
double-weighted tensor nuclear norm."""

from .linalg import NumericalFailure, psvt, soft_threshold, svd_complex
from .metrics import QualityReport, evaluate, psnr, sam, ssim
from .noise import Fixed, NoiseSpec, PerBandUniform, apply_noise, case_spec
from .prox import ShrinkSpec, dw_svt, dwtnn, fwtnn, mdwtnn, tnn
from .solver import DenoiseResult, DivergenceError, SolverConfig, denoise
from .tensor_core import (
    SymmetryError,
    fft_mode3,
    frobenius_norm,
    ifft_mode3,
    inner_product,
    ipermute_mode,
    permute_mode,
)
from .weights import WeightPlan, build_weight_plan, frequency_weights, truncation_weights

__version__ = "0.1.0"
