"""RGBW color-filter-array imaging lab.

Simulates single-sensor RGBW acquisition (per-pixel filter masks plus
Gaussian sensor noise), reconstructs full-color images from the raw mosaic
with a primal-dual total-variation solver, and benchmarks the result
against a classical interpolate-and-fuse baseline.
"""

from .baseline import InterpolationKernel, baseline_demosaic, interpolate_sparse
from .cfa import (
    CfaMask,
    CfaPattern,
    NoiseSpec,
    add_noise,
    adjoint,
    builtin_pattern_names,
    expand_mask,
    forward,
    get_pattern,
)
from .formats import (
    load_dataset,
    load_image,
    load_pattern,
    parse_pattern,
    read_tensor,
    save_image,
    serialize_pattern,
    write_tensor,
)
from .image import (
    CHANNEL_NAMES,
    NUM_CHANNELS,
    RawImage,
    RgbImage,
    SpectralImage,
    attach_white,
    drop_white,
    synthesize_white,
)
from .metrics import EvalRecord, aggregate, mse, psnr, write_records
from .solver import (
    DivergenceError,
    SolveResult,
    SolverConfig,
    chambolle_pock,
    grid_search_lambda,
    objective,
)
from .tv import gradient, norm_221, operator_norm_estimate, transpose_gradient

__version__ = "0.1.0"

__all__ = [
    "CHANNEL_NAMES",
    "CfaMask",
    "CfaPattern",
    "DivergenceError",
    "EvalRecord",
    "InterpolationKernel",
    "NUM_CHANNELS",
    "NoiseSpec",
    "RawImage",
    "RgbImage",
    "SolveResult",
    "SolverConfig",
    "SpectralImage",
    "add_noise",
    "adjoint",
    "aggregate",
    "attach_white",
    "baseline_demosaic",
    "builtin_pattern_names",
    "chambolle_pock",
    "drop_white",
    "expand_mask",
    "forward",
    "get_pattern",
    "gradient",
    "grid_search_lambda",
    "interpolate_sparse",
    "load_dataset",
    "load_image",
    "load_pattern",
    "mse",
    "norm_221",
    "objective",
    "operator_norm_estimate",
    "parse_pattern",
    "psnr",
    "read_tensor",
    "save_image",
    "serialize_pattern",
    "synthesize_white",
    "transpose_gradient",
    "write_records",
    "write_tensor",
    "__version__",
]
