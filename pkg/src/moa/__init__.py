"""Mathematics of Arrays: shape algebra, psi-reduction, FFT and gate kernels."""

from .core import MoaArray, array, gamma, gamma_inverse, iota, psi, reshape, transpose
from .errors import DomainError, MoaError, MoaIndexError, NotReducible, RangeError
from .fft import fft_cache_optimized, stage_plan
from .qsim import DensityMatrix, GateSpec, apply_gate, gate_permutation
from .reduce import parse_sexpr, reduce_to_dnf, reduce_to_onf, render_onf

__all__ = [
    "MoaArray", "array", "gamma", "gamma_inverse", "iota", "psi", "reshape", "transpose",
    "DomainError", "MoaError", "MoaIndexError", "NotReducible", "RangeError",
    "fft_cache_optimized", "stage_plan",
    "DensityMatrix", "GateSpec", "apply_gate", "gate_permutation",
    "parse_sexpr", "reduce_to_dnf", "reduce_to_onf", "render_onf",
]
