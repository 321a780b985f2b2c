"""Mode transformation of the three-beam-splitter interferometer.

Modes are indexed 0, 1, 2 for a, b, c. Entry ``S[i, j]`` of a returned
matrix is the element written ``S_{i+1, j+1}`` in 1-based notation, and
the matrix acts on creation operators as ``a_i^dag -> sum_j S[i, j] a_j^dag``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterDomainError


def _check_eta(eta: float, name: str = "eta") -> float:
    eta = float(eta)
    if not (0.0 <= eta <= 1.0):
        raise ParameterDomainError(f"{name} must lie in [0, 1], got {eta!r}")
    return eta


@dataclass(frozen=True)
class InterferometerParams:
    """Coherent amplitude ``alpha`` and the three beam-splitter reflectivities."""

    alpha: complex
    eta1: float
    eta2: float
    eta3: float

    def __post_init__(self):
        alpha = complex(self.alpha)
        if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
            raise ParameterDomainError(f"alpha must be finite, got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)
        for name in ("eta1", "eta2", "eta3"):
            object.__setattr__(self, name, _check_eta(getattr(self, name), name))

    @property
    def etas(self) -> tuple[float, float, float]:
        return (self.eta1, self.eta2, self.eta3)

    def with_alpha(self, alpha: complex) -> "InterferometerParams":
        return InterferometerParams(alpha, self.eta1, self.eta2, self.eta3)


def stage_matrix(stage: int, eta: float) -> np.ndarray:
    """Mode matrix of a single beam splitter.

    Stages 1 and 3 mix modes b and c, stage 2 mixes a and b.
    """
    eta = _check_eta(eta)
    r, t = math.sqrt(eta), math.sqrt(1.0 - eta)
    if stage in (1, 3):
        return np.array([[1.0, 0.0, 0.0], [0.0, r, t], [0.0, t, -r]])
    if stage == 2:
        return np.array([[-r, t, 0.0], [t, r, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"stage must be 1, 2 or 3, got {stage!r}")


def product_matrix(params: InterferometerParams) -> np.ndarray:
    """Total matrix built as the product ``S3 @ S2 @ S1``."""
    return (
        stage_matrix(3, params.eta3)
        @ stage_matrix(2, params.eta2)
        @ stage_matrix(1, params.eta1)
    )


def total_matrix(params: InterferometerParams) -> np.ndarray:
    """Total scattering matrix from the closed-form element list."""
    e1, e2, e3 = params.etas
    sq = math.sqrt
    f1, f2, f3 = 1.0 - e1, 1.0 - e2, 1.0 - e3
    return np.array(
        [
            [-sq(e2), sq(e1 * f2), sq(f1 * f2)],
            [sq(f2 * e3), sq(f1 * f3) + sq(e1 * e2 * e3), sq(f1 * e2 * e3) - sq(e1 * f3)],
            [sq(f2 * f3), sq(e1 * e2 * f3) - sq(f1 * e3), sq(e1 * e3) + sq(f1 * e2 * f3)],
        ]
    )
