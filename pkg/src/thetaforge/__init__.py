"""Exact-arithmetic theta functions for log Calabi-Yau surfaces.

Pipeline: toric J-function descendants -> g-series -> mirror map -> theta
function, cross-checked against local invariants of a rank-two bundle over the
P^1-bundle and against a relative WDVV recursion.
"""
__version__ = "0.1.0"

from .exactmath import Monomial, SeriesError, Truncation, TruncSeries, format_rational, parse_rational
from .cohomology import BundleRing, GradedRing, RingElement, collapse_h, identity_component, integrate
from .geometry import (
    BUILTIN_GEOMETRIES,
    BundleGeometry,
    CurveClass,
    ExperimentalWarning,
    GeometryError,
    TargetGeometry,
    build_p1_bundle,
    load_geometry,
    validate_fano_smallJ,
)
from .reports import CheckReport
from .givental import (
    i_function_E,
    mirror_map_correction,
    one_point_descendant,
    reduced_extraction_check,
    toric_J_coefficient,
)
from .mirror import (
    MirrorMap,
    OrderTooSmallError,
    PipelineError,
    ThetaPotential,
    build_mirror_map,
    compute_g,
    g_negated,
    round_trip_report,
    sign_convention_report,
    theta_potential,
    two_point_invariants,
)
from .localgw import LocalTable, local_one_point, verify_sign_correspondence, verify_wdvv_symmetry_route
from .wdvv import TwoPointTable, check_n2_symmetry, check_wdvv_identity, propagate_table

__all__ = [name for name in dir() if not name.startswith("_")]
