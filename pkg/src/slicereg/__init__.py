"""Slice-regular functions on the quaternionic unit ball: star algebra, Mobius-invariant
norms (Besov, Bloch, BMO) and diagnostics for composition operators."""
from .quaternion_core import (
    DomainError,
    ImaginaryUnit,
    Quaternion,
    UNIT_I,
    UNIT_J,
    UNIT_K,
    q_inv,
    q_mul,
    sample_sphere,
    slice_decompose,
)
from .slice_series import (
    PowerSeries,
    SliceRational,
    eval_series,
    extend,
    mobius,
    mobius_exact,
    regular_conjugate,
    restriction,
    slice_derivative,
    split,
    star_mul,
    star_reciprocal,
)
from .quadrature import DiskRule, build_rule, integrate_invariant
from .norms import besov_norm, bloch_norm, bmo_norm
from .operators import (
    SelfMap,
    compose,
    compose_derivative,
    essential_norm_bounds,
    self_map,
)

__version__ = "0.1.0"
