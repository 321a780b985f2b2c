"""Nonclassicality figures of merit for the heralded state.

Quadratures follow ``X = (a + a^dag)/sqrt(2)``, ``P = (a - a^dag)/(sqrt(2) i)``,
so vacuum variance is 1/2.  Wigner functions are normalized over the
complex ``beta`` plane, ``beta = (q + i p)/sqrt(2)``; the negativity volume
is reported in that measure unless ``measure="qp"`` is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytic
from .exceptions import GridTooCoarseError, UndefinedStatisticError
from .scattering import InterferometerParams

VACUUM_VARIANCE = 0.5
DEFAULT_POINTS = 201
MAX_POINTS = 801
GRID_MARGIN = 6.0
RICHARDSON_TOL = 1e-4

# d^2 beta = dq dp / 2
_MEASURE_SCALE = {"beta": 0.5, "qp": 1.0}
DELTA_MEASURE = "beta"


def g2(params) -> float:
    """Zero-delay second-order correlation from the generating-function moments."""
    m = analytic.moment_table(params, 2)
    n = m[1, 1].real
    if n <= 1e-12:
        raise UndefinedStatisticError(f"mean photon number {n:.3g} too small for g2")
    return float(m[2, 2].real / n**2)


def classify_bunching(g2_value: float) -> str:
    if g2_value < 1.0:
        return "antibunching"
    if g2_value <= 2.0:
        return "bunching"
    return "superbunching"


@dataclass(frozen=True)
class QuadratureReport:
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float

    @property
    def db_x(self) -> float:
        return 10.0 * math.log10(self.var_x / VACUUM_VARIANCE)

    @property
    def db_p(self) -> float:
        return 10.0 * math.log10(self.var_p / VACUUM_VARIANCE)

    @property
    def squeezed(self) -> bool:
        return self.var_x < VACUUM_VARIANCE or self.var_p < VACUUM_VARIANCE


def quadratures_from_moments(m: np.ndarray) -> QuadratureReport:
    """Means and variances of X and P from a moment table with ``k, l <= 2``."""
    a1 = m[0, 1]
    ad1 = m[1, 0]
    a2 = m[0, 2]
    ad2 = m[2, 0]
    n = m[1, 1].real
    var_x = (ad2 - ad1**2 + a2 - a1**2 + 1.0) / 2.0 + n - ad1 * a1
    var_p = (-ad2 + ad1**2 - a2 + a1**2 + 1.0) / 2.0 + n - ad1 * a1
    mean_x = (a1 + ad1) / math.sqrt(2.0)
    mean_p = (a1 - ad1) / (math.sqrt(2.0) * 1j)
    return QuadratureReport(
        mean_x=float(mean_x.real),
        mean_p=float(mean_p.real),
        var_x=float(var_x.real),
        var_p=float(var_p.real),
    )


def quadratures(params) -> QuadratureReport:
    return quadratures_from_moments(analytic.moment_table(params, 2))


@dataclass(frozen=True)
class WignerGrid:
    """Rectangular (q, p) sampling grid with trapezoidal weights."""

    q_min: float
    q_max: float
    p_min: float
    p_max: float
    n_q: int = DEFAULT_POINTS
    n_p: int = DEFAULT_POINTS

    def __post_init__(self):
        bounds = (self.q_min, self.q_max, self.p_min, self.p_max)
        if not all(math.isfinite(b) for b in bounds):
            raise ValueError("grid bounds must be finite")
        if self.q_max <= self.q_min or self.p_max <= self.p_min:
            raise ValueError("grid bounds must be increasing")
        if self.n_q < 2 or self.n_p < 2:
            raise ValueError("a grid needs at least two points per axis")

    @classmethod
    def around(cls, params, n: int = DEFAULT_POINTS) -> "WignerGrid":
        """Square grid covering the displaced core plus a fixed margin."""
        params = analytic._as_params(params)
        half = math.sqrt(2.0) * math.sqrt(params.eta2) * abs(params.alpha) + GRID_MARGIN
        return cls(-half, half, -half, half, n, n)

    @property
    def q(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    def mesh(self):
        return np.meshgrid(self.q, self.p, indexing="ij")

    @property
    def quadrature_weights(self) -> np.ndarray:
        """Outer product of 1D trapezoid weights in the (q, p) measure."""
        return np.outer(_trapezoid(self.q), _trapezoid(self.p))

    def coarsened(self) -> "WignerGrid | None":
        """Every other point, when the point counts allow it."""
        if self.n_q % 2 == 1 and self.n_p % 2 == 1 and min(self.n_q, self.n_p) >= 5:
            return WignerGrid(
                self.q_min, self.q_max, self.p_min, self.p_max,
                (self.n_q + 1) // 2, (self.n_p + 1) // 2,
            )
        return None


def _trapezoid(x: np.ndarray) -> np.ndarray:
    w = np.empty_like(x)
    h = np.diff(x)
    w[0] = h[0] / 2
    w[-1] = h[-1] / 2
    w[1:-1] = (h[:-1] + h[1:]) / 2
    return w


def wigner_values(params, grid: WignerGrid) -> np.ndarray:
    q, p = grid.mesh()
    return analytic.wigner_grid(params, q, p)


def integrate(values: np.ndarray, grid: WignerGrid, measure: str = DELTA_MEASURE) -> float:
    scale = _MEASURE_SCALE[measure]
    terms = (values * grid.quadrature_weights).ravel()
    # fsum is correctly rounded, so the result does not depend on summation order
    return float(scale * math.fsum(terms))


def _negative_part(values: np.ndarray) -> np.ndarray:
    return (np.abs(values) - values) / 2.0


def negativity_volume(
    params,
    grid: WignerGrid | None = None,
    *,
    measure: str = DELTA_MEASURE,
    check: bool = True,
) -> float:
    """Integrated magnitude of the negative part of the Wigner function.

    With ``check`` set, the integral is repeated on the grid with every
    other point dropped; a change above ``RICHARDSON_TOL`` raises
    ``GridTooCoarseError``.  Without an explicit grid the automatic grid
    is refined (201, 401, 801 points per axis) until the check passes.
    """
    params = analytic._as_params(params)
    delta, _, _ = _negativity_with_grid(params, grid, measure, check)
    return delta


def _negativity_with_grid(params, grid, measure, check):
    if grid is not None:
        values = wigner_values(params, grid)
        return negativity_from_values(values, grid, measure=measure, check=check), values, grid
    n = DEFAULT_POINTS
    while True:
        grid = WignerGrid.around(params, n)
        values = wigner_values(params, grid)
        try:
            delta = negativity_from_values(values, grid, measure=measure, check=check)
        except GridTooCoarseError:
            if 2 * n - 1 > MAX_POINTS:
                raise
            n = 2 * n - 1
            continue
        return delta, values, grid


def negativity_from_values(
    values: np.ndarray, grid: WignerGrid, *, measure: str = DELTA_MEASURE, check: bool = True
) -> float:
    if measure not in _MEASURE_SCALE:
        raise ValueError(f"measure must be one of {sorted(_MEASURE_SCALE)}")
    delta = integrate(_negative_part(values), grid, measure)
    coarse = grid.coarsened() if check else None
    if coarse is not None:
        coarse_delta = integrate(_negative_part(values[::2, ::2]), coarse, measure)
        if abs(coarse_delta - delta) > RICHARDSON_TOL:
            raise GridTooCoarseError(
                f"negativity changed by {abs(coarse_delta - delta):.2e} under step halving"
            )
    return delta


@dataclass(frozen=True)
class PointReport:
    """Everything reported for one parameter point."""

    params: InterferometerParams
    state: analytic.HeraldedState
    g2: float | None
    quadratures: QuadratureReport
    delta: float | None
    min_w: float

    @property
    def bunching(self) -> str | None:
        return None if self.g2 is None else classify_bunching(self.g2)


def evaluate_point(params, grid: WignerGrid | None = None) -> PointReport:
    params = analytic._as_params(params)
    state = analytic.herald(params)
    m = analytic.moment_table(params, 2)
    n = m[1, 1].real
    g2_value = float(m[2, 2].real / n**2) if n > 1e-12 else None
    delta, values, grid = _negativity_with_grid(params, grid, DELTA_MEASURE, True)
    return PointReport(
        params=params,
        state=state,
        g2=g2_value,
        quadratures=quadratures_from_moments(m),
        delta=delta,
        min_w=float(values.min()),
    )
