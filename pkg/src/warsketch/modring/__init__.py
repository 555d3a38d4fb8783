from .linalg import nullspace_mod_p, solve_mod_p
from .matrix import (
    ModMatrix,
    bit_decompose,
    bit_decompose_array,
    centered,
    gadget_matrix,
    is_power_of_two,
    mat_mul,
    mat_mul_binary,
    modulus_bits,
)
from .poly import PolyField, poly_multipoint_eval, weighted_power_sums

__all__ = [
    "ModMatrix",
    "PolyField",
    "bit_decompose",
    "bit_decompose_array",
    "centered",
    "gadget_matrix",
    "is_power_of_two",
    "mat_mul",
    "mat_mul_binary",
    "modulus_bits",
    "nullspace_mod_p",
    "poly_multipoint_eval",
    "solve_mod_p",
    "weighted_power_sums",
]
