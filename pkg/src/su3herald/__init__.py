"""Heralded non-Gaussian states from a coherent state in a three-beam-splitter interferometer."""

from .analytic import (
    HeraldedState,
    herald,
    moment,
    moment_table,
    success_probability_closed,
    success_probability_genfunc,
    wigner_grid,
    wigner_point,
)
from .exceptions import (
    ConsistencyError,
    CutoffError,
    GridTooCoarseError,
    ParameterDomainError,
    UndefinedStatisticError,
    ZeroProbabilityError,
)
from .metrics import QuadratureReport, WignerGrid, evaluate_point, g2, negativity_volume, quadratures
from .scattering import InterferometerParams, stage_matrix, total_matrix
from .sweep import SweepSpec, grid_sweep, maximize_squeezing, region_classify

__all__ = [
    "ConsistencyError",
    "CutoffError",
    "GridTooCoarseError",
    "HeraldedState",
    "InterferometerParams",
    "ParameterDomainError",
    "QuadratureReport",
    "SweepSpec",
    "UndefinedStatisticError",
    "WignerGrid",
    "ZeroProbabilityError",
    "evaluate_point",
    "g2",
    "grid_sweep",
    "herald",
    "maximize_squeezing",
    "moment",
    "moment_table",
    "negativity_volume",
    "quadratures",
    "region_classify",
    "stage_matrix",
    "success_probability_closed",
    "success_probability_genfunc",
    "total_matrix",
    "wigner_grid",
    "wigner_point",
]
