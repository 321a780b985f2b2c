"""Brute-force three-mode number-basis simulation of the heralding circuit.

Nothing here uses the closed forms; it exists to check them.  Each beam
splitter is applied block by block on the two-mode subspaces of fixed
total photon number, where it is an ``(n+1) x (n+1)`` unitary.  Unitaries
act on states as ``f(a^dag)|0> -> f(M a^dag)|0>`` for the 2x2 mode matrix
``M`` taken from the matching stage of the interferometer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm

from .exceptions import CutoffError, ZeroProbabilityError
from .scattering import InterferometerParams, stage_matrix

MODES = {"a": 0, "b": 1, "c": 2}
# pair -> stage whose 2x2 sub-block provides the mode matrix
_PAIR_STAGE = {("b", "c"): 1, ("a", "b"): 2}
_WIGNER_CHUNK = 1024


def cutoff_floor(alpha: complex) -> int:
    x = abs(alpha)
    return max(16, math.ceil(x * x + 6 * x + 10))


@dataclass(frozen=True)
class FockVector:
    """Single-mode number-basis amplitudes ``0..cutoff``."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitudes")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def cutoff(self) -> int:
        return len(self.amps) - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def fidelity(self, other) -> float:
        other = other.amps if isinstance(other, FockVector) else np.asarray(other)
        n = min(len(self.amps), len(other))
        return float(abs(np.vdot(self.amps[:n], other[:n])) ** 2)


@dataclass(frozen=True)
class ThreeModeState:
    """Amplitudes ``amps[n_a, n_b, n_c]`` with one shared per-mode cutoff.

    ``leakage`` accumulates the norm squared lost to truncation so far.
    """

    amps: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 3 or len(set(amps.shape)) != 1:
            raise ValueError("amplitudes must be a cubic three-mode array")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def cutoff(self) -> int:
        return self.amps.shape[0] - 1

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    logs = np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        out = np.zeros(cutoff + 1, dtype=complex)
        out[0] = 1.0
        return out
    mag = np.exp(-abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * logs)
    return mag * np.exp(1j * n * np.angle(alpha))


def prepare_input(alpha: complex, cutoff: int, *, enforce_floor: bool = True) -> ThreeModeState:
    """``|alpha>_a |1>_b |1>_c`` truncated at ``cutoff`` photons per mode."""
    if enforce_floor and cutoff < cutoff_floor(alpha):
        raise CutoffError(
            f"cutoff {cutoff} below the floor {cutoff_floor(alpha)} for |alpha| = {abs(alpha):.4g}"
        )
    if cutoff < 1:
        raise CutoffError("cutoff must admit the single-photon ancillas")
    amps = np.zeros((cutoff + 1,) * 3, dtype=complex)
    coh = coherent_amplitudes(complex(alpha), cutoff)
    amps[:, 1, 1] = coh
    return ThreeModeState(amps, leakage=max(0.0, 1.0 - float(np.sum(np.abs(coh) ** 2))))


def truncation_weight(state: ThreeModeState) -> float:
    return state.leakage


def _generator(n: int) -> np.ndarray:
    """``x^dag y - y^dag x`` on the block ``|k, n-k>``, ``k`` photons in the first mode."""
    g = np.zeros((n + 1, n + 1))
    for k in range(n):
        amp = math.sqrt((k + 1) * (n - k))
        g[k + 1, k] = amp
        g[k, k + 1] = -amp
    return g


@lru_cache(maxsize=4096)
def _block_unitary(m00: float, m01: float, m10: float, m11: float, n: int) -> np.ndarray:
    """Number-basis block of the two-mode map with real orthogonal matrix ``M``.

    ``M`` is factored as a rotation ``[[c, -s], [s, c]]`` optionally followed by
    ``diag(1, -1)``; the rotation is ``exp(theta (x^dag y - y^dag x))`` and the
    reflection is the photon-number parity of the second mode.  Column ``k`` holds
    the image of ``|k, n-k>``.
    """
    det = m00 * m11 - m01 * m10
    theta = math.atan2(m10, m00)
    u = expm(theta * _generator(n))
    if det < 0:
        parity = (-1.0) ** (n - np.arange(n + 1))
        u = parity[:, None] * u
    u.flags.writeable = False
    return u


def pair_matrix(pair: tuple[str, str], eta: float) -> np.ndarray:
    """2x2 mode matrix a beam splitter on ``pair`` applies, ordered as ``pair``."""
    try:
        stage = _PAIR_STAGE[tuple(pair)]
    except KeyError:
        raise ValueError(f"unsupported mode pair {pair!r}; use ('b', 'c') or ('a', 'b')") from None
    i, j = MODES[pair[0]], MODES[pair[1]]
    full = stage_matrix(stage, eta)
    return full[np.ix_([i, j], [i, j])]


def apply_bs(state: ThreeModeState, mode_pair, eta: float) -> ThreeModeState:
    """Apply one beam splitter; amplitude pushed above the cutoff is dropped and counted."""
    pair = tuple(mode_pair)
    m = pair_matrix(pair, eta)
    i, j = MODES[pair[0]], MODES[pair[1]]
    spectator = 3 - i - j
    # axes ordered (first, second, spectator)
    amps = np.moveaxis(state.amps, (i, j, spectator), (0, 1, 2))
    cut = state.cutoff
    out = np.zeros_like(amps)
    lost = 0.0
    for n in range(2 * cut + 1):
        k = np.arange(max(0, n - cut), min(n, cut) + 1)
        block_in = amps[k, n - k, :]
        if not np.any(block_in):
            continue
        u = _block_unitary(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]), n)
        # embed the stored slice into the full block, transform, keep representable part
        full = np.zeros((n + 1, block_in.shape[1]), dtype=complex)
        full[k] = block_in
        image = u @ full
        out[k, n - k, :] = image[k]
        mask = np.ones(n + 1, dtype=bool)
        mask[k] = False
        lost += float(np.sum(np.abs(image[mask]) ** 2))
    out = np.moveaxis(out, (0, 1, 2), (i, j, spectator))
    return ThreeModeState(out, leakage=state.leakage + lost)


def run_circuit(params: InterferometerParams, cutoff: int, *, enforce_floor: bool = True) -> ThreeModeState:
    state = prepare_input(params.alpha, cutoff, enforce_floor=enforce_floor)
    state = apply_bs(state, ("b", "c"), params.eta1)
    state = apply_bs(state, ("a", "b"), params.eta2)
    return apply_bs(state, ("b", "c"), params.eta3)


def herald_project(state: ThreeModeState) -> tuple[FockVector, float]:
    """Condition on one photon in each of modes b and c.

    Returns the normalized signal vector and the success probability.
    """
    slice_ = state.amps[:, 1, 1]
    p_d = float(np.sum(np.abs(slice_) ** 2))
    if not p_d > 1e-300:
        raise ZeroProbabilityError(
            f"heralding probability {p_d:.3g} vanishes (degenerate post-selection)"
        )
    return FockVector(slice_ / math.sqrt(p_d)), p_d


def simulate(params, cutoff: int | None = None, *, enforce_floor: bool = True):
    """Full pipeline: prepare, three beam splitters, herald.

    Returns ``(vector, p_d, leakage)``.
    """
    if not isinstance(params, InterferometerParams):
        params = InterferometerParams(*params)
    if cutoff is None:
        cutoff = cutoff_floor(params.alpha)
    state = run_circuit(params, cutoff, enforce_floor=enforce_floor)
    vec, p_d = herald_project(state)
    return vec, p_d, state.leakage


def oracle_moment(vec: FockVector, k: int, l: int) -> complex:
    """``<a^dag^k a^l>`` by direct ladder algebra on the amplitudes."""
    if k < 0 or l < 0:
        raise ValueError("moment orders must be non-negative")
    if 2 * (k + l) > vec.cutoff:
        raise CutoffError(f"k + l = {k + l} too large for cutoff {vec.cutoff}")
    amps = np.asarray(vec.amps)

    def lower(v, times):
        for _ in range(times):
            v = np.sqrt(np.arange(1, len(v))) * v[1:]
        return v

    left = lower(amps, k)
    right = lower(amps, l)
    n = min(len(left), len(right))
    return complex(np.vdot(left[:n], right[:n]))


def _displacement_eigensystem(dim: int):
    """Eigenpairs of the real tridiagonal ``a + a^dag`` truncated to ``dim`` levels."""
    return eigh_tridiagonal(np.zeros(dim), np.sqrt(np.arange(1, dim)))


def oracle_wigner(vec: FockVector, q, p, *, workdim: int | None = None) -> np.ndarray:
    """Wigner function from the displaced parity ``(2/pi) <psi|D(b) P D(-b)|psi>``.

    ``D(g) = exp(g a^dag - conj(g) a)`` is applied through the spectral
    decomposition of the truncated quadrature ``a + a^dag``, conjugated by
    phase rotations, so it stays exactly unitary on the working space.  The
    working dimension must hold the displaced state; the default leaves
    generous headroom beyond the grid's reach.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    shape = np.broadcast_shapes(q.shape, p.shape)
    beta = ((np.broadcast_to(q, shape) + 1j * np.broadcast_to(p, shape)) / math.sqrt(2.0)).ravel()
    gamma = -beta
    amps = np.asarray(vec.amps)
    cut = vec.cutoff
    if workdim is None:
        reach = math.sqrt(cut) + (float(np.max(np.abs(beta))) if beta.size else 0.0)
        workdim = int(cut + math.ceil((reach + 8.0) ** 2)) + 1
    workdim = max(workdim, cut + 1)
    evals, evecs = _displacement_eigensystem(workdim)
    n = np.arange(workdim)
    # g a^dag - g* a = e^{i phi n} |g| (a^dag - a) e^{-i phi n}
    # a^dag - a = -i J (a + a^dag) J^dag with J = diag(i^n)
    j_phase = np.array([1, 1j, -1, -1j])[n % 4]
    psi = np.zeros(workdim, dtype=complex)
    psi[: cut + 1] = amps
    psi = np.conj(j_phase) * psi
    parity = np.where(n % 2 == 0, 1.0, -1.0)
    w = np.empty(beta.size)
    for start in range(0, beta.size, _WIGNER_CHUNK):
        g = gamma[start : start + _WIGNER_CHUNK]
        rot = np.exp(1j * np.outer(np.angle(g), n))
        coeff = (np.conj(rot) * psi[None, :]) @ evecs
        coeff *= np.exp(-1j * np.outer(np.abs(g), evals))
        out = (coeff @ evecs.T) * j_phase[None, :] * rot
        w[start : start + _WIGNER_CHUNK] = (2.0 / math.pi) * (np.abs(out) ** 2 @ parity)
    return w.reshape(shape)
