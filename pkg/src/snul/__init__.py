"""Exact arithmetic on quadratic non-uniform lattices: divided-difference
operators, orthogonal polynomial data and the Laguerre-Hahn equivalence."""

from .errors import (
    DegenerateLattice,
    DegreeBoundExceeded,
    DivisionNotExact,
    FieldTooSmall,
    FreeMoment,
    Inconsistent,
    InsufficientTruncation,
    InvalidConic,
    InvalidRecurrence,
    NotLaguerreHahn,
    NotQuasiDefinite,
    ProblemFileError,
    SnulError,
    Underdetermined,
    UnsupportedLatticeClass,
)
from .fieldext import QuadField, QuadNumber, Rational, format_rational, parse_rational
from .lattice import (
    Lattice,
    LatticeClass,
    apply_D,
    apply_D_series,
    apply_E_series,
    apply_M,
    apply_M_series,
    apply_shift,
    build_lattice,
    classify_lattice,
    lattice_points,
)
from .laguerre_hahn import (
    Certificate,
    MagnusRiccatiData,
    RiccatiData,
    StructureCoeffs,
    certify,
    corollary_coeffs,
    corollary_recursion,
    fit_riccati,
    gathered_relations,
    magnus_data_from_coeffs,
    magnus_step,
    reconstruct_riccati,
    riccati_nullspace,
    riccati_residual,
    solve_moments_from_riccati,
    structure_coeffs_direct,
    telescope_residuals,
    verify_second_kind_relations,
    verify_structure_relations,
)
from .orthopoly import (
    SMOPData,
    hankel_determinant,
    liouville_defect,
    moments_from_recurrence,
    recurrence_from_moments,
    second_kind_series,
    smop_from_recurrence,
)
from .poly import Poly
from .series import LaurentSeries, series_inverse, series_mul, sqrt_series
from .surd import SurdPoly, surd_exact_div, surd_mul

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
