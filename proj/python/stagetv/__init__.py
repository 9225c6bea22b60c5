"""Stage-wise alternating first/higher-order total variation restoration.

Images are 2-D float64 arrays on the 0-255 scale with periodic boundaries.
Vector fields are stacked along the first axis.
"""

from ._stagetv import (
    FormatError,
    NumericalError,
    admm_llt,
    admm_rof,
    convolve,
    degrade,
    fom,
    gaussian_kernel,
    grad,
    grad_adjoint,
    hessian,
    hessian_adjoint,
    load_image,
    psnr,
    quantize_8bit,
    run_stagewise,
    save_image,
    ssim,
)

__all__ = [
    "FormatError",
    "NumericalError",
    "admm_llt",
    "admm_rof",
    "convolve",
    "degrade",
    "fom",
    "gaussian_kernel",
    "grad",
    "grad_adjoint",
    "hessian",
    "hessian_adjoint",
    "load_image",
    "psnr",
    "quantize_8bit",
    "run_stagewise",
    "save_image",
    "ssim",
]
