"""Parameter scans over the two one-parameter families and squeezing search."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from . import analytic, metrics
from .scattering import InterferometerParams

MODES = ("diagonal", "eta2_only")
METRICS = ("p_d", "g2", "db_x", "db_p", "delta")
DEFAULT_STEP = 0.01


@dataclass(frozen=True)
class SweepSpec:
    """One scan family.

    ``diagonal`` sets all three reflectivities to the scanned value;
    ``eta2_only`` holds ``eta1 = eta3 = 1/2`` and scans ``eta2``.
    """

    mode: str = "diagonal"
    eta_start: float = 0.0
    eta_stop: float = 1.0
    eta_step: float = DEFAULT_STEP
    alphas: tuple[float, ...] = (1.0,)
    metrics: tuple[str, ...] = METRICS

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (0.0 <= self.eta_start <= self.eta_stop <= 1.0):
            raise ValueError("eta range must satisfy 0 <= start <= stop <= 1")
        if not self.eta_step > 0:
            raise ValueError("eta step must be positive")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.alphas:
            raise ValueError("at least one alpha is required")
        object.__setattr__(self, "metrics", tuple(self.metrics))
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")

    def etas(self) -> np.ndarray:
        count = int(math.floor((self.eta_stop - self.eta_start) / self.eta_step + 1e-9)) + 1
        values = np.round(self.eta_start + self.eta_step * np.arange(count), 12)
        return np.clip(values, 0.0, 1.0)

    def params_for(self, eta: float, alpha: float) -> InterferometerParams:
        if self.mode == "diagonal":
            return InterferometerParams(alpha, eta, eta, eta)
        return InterferometerParams(alpha, 0.5, eta, 0.5)

    def points(self) -> list[InterferometerParams]:
        return [self.params_for(eta, a) for eta in self.etas() for a in self.alphas]


@dataclass(frozen=True)
class SweepRecord:
    """Metrics at one scan point; failed metrics are ``None`` with the reason in ``errors``."""

    mode: str
    params: InterferometerParams
    values: dict = field(default_factory=dict)
    bunching: str | None = None
    squeezed: bool | None = None
    errors: dict = field(default_factory=dict)


def evaluate_record(mode: str, params: InterferometerParams, wanted: Sequence[str]) -> SweepRecord:
    values: dict[str, float | None] = {}
    errors: dict[str, str] = {}
    bunching = squeezed = None

    def attempt(name, fn):
        try:
            return fn()
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            errors[name] = f"{type(exc).__name__}: {exc}"
            return None

    needs_moments = {"g2", "db_x", "db_p"} & set(wanted)
    if "p_d" in wanted:
        values["p_d"] = attempt("p_d", lambda: analytic.success_probability_closed(params))
    table = attempt("moments", lambda: analytic.moment_table(params, 2)) if needs_moments else None
    if table is not None:
        n = table[1, 1].real
        quad = metrics.quadratures_from_moments(table)
        squeezed = quad.squeezed
        if "g2" in wanted:
            if n > 1e-12:
                values["g2"] = float(table[2, 2].real / n**2)
                bunching = metrics.classify_bunching(values["g2"])
            else:
                values["g2"] = None
                errors["g2"] = "UndefinedStatisticError: vanishing mean photon number"
        if "db_x" in wanted:
            values["db_x"] = quad.db_x
        if "db_p" in wanted:
            values["db_p"] = quad.db_p
    elif needs_moments:
        for name in needs_moments:
            values[name] = None
    if "delta" in wanted:
        values["delta"] = attempt("delta", lambda: metrics.negativity_volume(params))
    ordered = {name: values.get(name) for name in METRICS if name in wanted}
    return SweepRecord(mode, params, ordered, bunching, squeezed, errors)


def _evaluate_task(task):
    return evaluate_record(*task)


def grid_sweep(spec: SweepSpec, workers: int | None = None) -> list[SweepRecord]:
    """Evaluate every point of ``spec``; ``eta`` is the outer loop, ``alpha`` the inner.

    ``workers > 1`` spreads points over processes; output order is unaffected.
    """
    tasks = [(spec.mode, p, spec.metrics) for p in spec.points()]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_task, tasks, chunksize=8))
    return [_evaluate_task(t) for t in tasks]


@dataclass(frozen=True)
class RegionMap:
    """Per-cell bunching class and X-squeezing flag over (scanned eta, alpha)."""

    mode: str
    etas: np.ndarray
    alphas: np.ndarray
    bunching: np.ndarray
    squeezed: np.ndarray

    def rows(self) -> Iterable[tuple]:
        for i, eta in enumerate(self.etas):
            for j, alpha in enumerate(self.alphas):
                yield float(eta), float(alpha), self.bunching[i, j], bool(self.squeezed[i, j])


def region_classify(spec: SweepSpec, workers: int | None = None) -> RegionMap:
    """Bunching class and X-quadrature squeezing (``db_x < 0``) on the scan grid."""
    spec = SweepSpec(spec.mode, spec.eta_start, spec.eta_stop, spec.eta_step, spec.alphas, ("g2", "db_x"))
    records = grid_sweep(spec, workers)
    etas = spec.etas()
    shape = (len(etas), len(spec.alphas))
    bunching = np.empty(shape, dtype=object)
    squeezed = np.zeros(shape, dtype=bool)
    for idx, rec in enumerate(records):
        i, j = divmod(idx, len(spec.alphas))
        bunching[i, j] = rec.bunching if rec.bunching is not None else "undefined"
        db_x = rec.values.get("db_x")
        squeezed[i, j] = db_x is not None and db_x < 0.0
    return RegionMap(spec.mode, etas, np.array(spec.alphas), bunching, squeezed)


# -- squeezing optimisation ------------------------------------------------------


@dataclass(frozen=True)
class SqueezingResult:
    etas: tuple[float, float, float]
    variance: float
    db: float
    evaluations: int = 0


def _variance(alpha: float, etas, quadrature: str) -> float:
    try:
        report = metrics.quadratures(InterferometerParams(alpha, *etas))
    except ArithmeticError:
        return math.inf
    return report.var_x if quadrature == "x" else report.var_p


def _to_db(variance: float) -> float:
    return 10.0 * math.log10(variance / metrics.VACUUM_VARIANCE)


def maximize_squeezing(
    alpha: float,
    quadrature: str = "x",
    *,
    diagonal: bool = False,
    starts: int = 32,
    seed: int = 20240611,
    xatol: float = 1e-7,
) -> SqueezingResult:
    """Minimize a quadrature variance over the reflectivities.

    Nelder-Mead from Sobol-distributed starts in the unit box (or interval,
    with ``diagonal``); vertices are clipped to the box at every step.
    """
    quadrature = quadrature.lower()
    if quadrature not in ("x", "p"):
        raise ValueError("quadrature must be 'x' or 'p'")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    dim = 1 if diagonal else 3
    expand = (lambda x: (x[0], x[0], x[0])) if diagonal else (lambda x: tuple(x))
    evaluations = 0

    def objective(x):
        nonlocal evaluations
        evaluations += 1
        return _variance(alpha, expand(np.clip(x, 0.0, 1.0)), quadrature)

    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    x0s = sampler.random(starts)
    best_x, best_f = None, math.inf
    for x0 in x0s:
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=[(0.0, 1.0)] * dim,
            options={"xatol": xatol, "fatol": 1e-14, "maxiter": 4000},
        )
        if res.fun < best_f:
            best_x, best_f = np.clip(res.x, 0.0, 1.0), float(res.fun)
    etas = tuple(float(e) for e in expand(best_x))
    return SqueezingResult(etas, best_f, _to_db(best_f), evaluations)


def scan_squeezing(alpha: float, quadrature: str = "x", *, points: int = 21, diagonal: bool = False) -> SqueezingResult:
    """Brute-force grid minimum of the variance; the reference for the optimizer."""
    axis = np.linspace(0.0, 1.0, points)
    best = (math.inf, None)
    if diagonal:
        candidates = ((e, e, e) for e in axis)
    else:
        candidates = ((a, b, c) for a in axis for b in axis for c in axis)
    count = 0
    for etas in candidates:
        count += 1
        v = _variance(alpha, etas, quadrature)
        if v < best[0]:
            best = (v, etas)
    v, etas = best
    return SqueezingResult(tuple(float(e) for e in etas), v, _to_db(v), count)
