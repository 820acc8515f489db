"""Classification, gauge symmetries and reduced dynamics of affine Lagrangians."""

from .dynamics import (
    ConstrainedSODE,
    DynamicsVerdict,
    EtaField,
    Reducer,
    constrained_sode,
    eta_field,
    reduced_dynamics,
    verify_candidate_dynamics,
)
from .gauge import (
    GaugeSymmetry,
    GaugeVerdict,
    GaugeVerificationError,
    gauge_symmetry,
    noether_identity,
    symmetry_defect,
    verify_gauge,
)
from .poisson import SingularMatrixError, poisson_bracket, poisson_tensor
from .sector import (
    TYPE_I,
    TYPE_II1,
    TYPE_II2,
    TYPE_II3,
    Classification,
    HolonomicSector,
    classify,
    holonomic_sector,
    match_secondary,
)

__all__ = [name for name in dir() if not name.startswith("_")]
