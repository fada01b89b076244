"""Measure-class-preserving maps of [0, 1], their derivative laws and double cosets."""

from .errors import (
    ConfigurationError,
    InvalidInvariantsError,
    NumericError,
    PreconditionError,
    QuasiInvError,
    UnsupportedClassError,
    ValidationError,
)
from .measure import (
    DEFAULT_GRID,
    RMeasure,
    StripGrid,
    ValueBinGrid,
    bin_discretize,
    char_fn,
    measure_distance,
)
from .transform import (
    IntervalSet,
    PwMap,
    compose,
    convex_section,
    distribution_matrix,
    evaluate,
    derivative,
    invert,
    is_measure_preserving,
    random_interval_exchange,
    rn_distribution,
)
from .cosets import (
    CanonicalLabel,
    RokhlinInvariants,
    canonical_form,
    label_from_invariants,
    invariants_from_label,
    rokhlin_invariants,
    same_double_coset,
)
from .topology import GmsMetricConfig, GridFunction, gms_distance, matrix_element, operator_apply
from .approx import (
    BlockMap,
    closure_composer,
    discretize_gms,
    find_Bk,
    split_points,
    splitting_theta,
    spreading_upsilon,
)

__version__ = "0.1.0"
