"""Heralded signal state, success probability, moments and Wigner function.

The heralded state is ``(c0 + c1 a^dag + c2 a^dag^2) |beta0>`` with
``beta0 = S11 * alpha``.  Success probability comes either from a closed
polynomial in ``|alpha|^2`` or from the eight-fold generating-function
derivative; moments and the Wigner function only use the latter.

Auxiliary variables: ``s1..s4`` belong to the ket, ``h1..h4`` to the bra,
``mu``/``nu`` generate powers of ``a^dag``/``a``, and ``t``/``tb`` stand
for ``2*beta``/``2*conj(beta)`` in the phase-space polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import genfunc
from .exceptions import ConsistencyError, ParameterDomainError, ZeroProbabilityError
from .scattering import InterferometerParams, total_matrix

P_D_FLOOR = 1e-300
# p_d is treated as zero once it is this small relative to the sum of the
# magnitudes of the terms it is built from (cancellation to rounding noise)
CANCELLATION_RTOL = 1e-12
MAX_MOMENT_ORDER = 8

_KET = ("s1", "s2", "s3", "s4")
_BRA = ("h1", "h2", "h3", "h4")
_AUX = _KET + _BRA
_ALL_ONES = {v: 1 for v in _AUX}


def _elements(S):
    """1-based element accessor, so formulas read like the textbook ones."""
    return lambda i, j: float(S[i - 1, j - 1])


def _as_params(params) -> InterferometerParams:
    if isinstance(params, InterferometerParams):
        return params
    return InterferometerParams(*params)


def probability_coefficients(S) -> tuple[float, float, float, float, float]:
    """Coefficients ``g0..g4`` of ``p_d`` as a polynomial in ``|alpha|^2``."""
    s = _elements(S)
    h1 = s(1, 3) * s(2, 2) * s(3, 1) + s(1, 2) * s(2, 3) * s(3, 1) + s(1, 3) * s(2, 1) * s(3, 2)
    k1 = h1 + s(1, 2) * s(2, 1) * s(3, 3)
    g0 = (s(2, 3) * s(3, 2) + s(2, 2) * s(3, 3)) ** 2
    g1 = k1 * (
        h1
        + 2 * s(1, 1) * s(2, 3) * s(3, 2)
        + s(1, 2) * s(2, 1) * s(3, 3)
        + 2 * s(1, 1) * s(2, 2) * s(3, 3)
    )
    u = s(2, 2) * s(3, 1) + s(2, 1) * s(3, 2)
    w = s(2, 3) * s(3, 1) + s(2, 1) * s(3, 3)
    g2 = (
        s(1, 1) ** 2 * s(1, 3) ** 2 * u**2
        + 4 * s(1, 1) * s(1, 2) ** 2 * s(1, 3) * s(2, 1) * s(3, 1) * w
        + 2 * s(1, 2) ** 2 * s(1, 3) ** 2 * s(2, 1) ** 2 * s(3, 1) ** 2
        + s(1, 1) ** 2 * s(1, 2) ** 2 * w**2
        + 4 * s(1, 1) * s(1, 2) * s(1, 3) ** 2 * s(2, 1) * s(3, 1) * u
        + 2 * s(1, 1) ** 2 * s(1, 2) * s(1, 3) * s(2, 1) * s(3, 2)
        * (2 * s(2, 3) * s(3, 1) + s(2, 1) * s(3, 3))
        + 2 * s(1, 1) ** 2 * s(1, 2) * s(1, 3) * s(2, 2) * s(3, 1)
        * (s(2, 3) * s(3, 1) + 2 * s(2, 1) * s(3, 3))
    )
    g3 = (
        2 * s(1, 1) ** 3 * s(1, 2) * s(1, 3) ** 2 * s(2, 1) * s(3, 1) * u
        + 4 * s(1, 1) ** 2 * s(1, 2) ** 2 * s(1, 3) ** 2 * s(2, 1) ** 2 * s(3, 1) ** 2
        + 2 * s(1, 1) ** 3 * s(1, 2) ** 2 * s(1, 3) * s(2, 1) * s(3, 1) ** 2 * s(2, 3)
        + 2 * s(1, 1) ** 3 * s(1, 2) ** 2 * s(1, 3) * s(2, 1) ** 2 * s(3, 1) * s(3, 3)
    )
    g4 = s(1, 1) ** 4 * s(1, 2) ** 2 * s(1, 3) ** 2 * s(2, 1) ** 2 * s(3, 1) ** 2
    return g0, g1, g2, g3, g4


def success_probability_closed(params) -> float:
    params = _as_params(params)
    S = total_matrix(params)
    x = abs(params.alpha) ** 2
    g = probability_coefficients(S)
    poly = g[0] + x * (g[1] + x * (g[2] + x * (g[3] + x * g[4])))
    return float(poly * math.exp(-(1.0 - S[0, 0] ** 2) * x))


# -- generating-function route -------------------------------------------------


def _density_terms(S, alpha: complex, sign: float = 1.0):
    """Linear and quadratic exponent terms shared by the trace-type integrands.

    ``sign = -1`` flips the terms coming from the parity kernel of the
    Wigner transform.
    """
    s = _elements(S)
    ac = alpha.conjugate()
    linear = {
        "h1": sign * alpha * s(1, 1) * s(2, 1),
        "h2": sign * alpha * s(1, 1) * s(3, 1),
        "s3": alpha * s(1, 2),
        "s4": alpha * s(1, 3),
        "s1": sign * ac * s(1, 1) * s(2, 1),
        "s2": sign * ac * s(1, 1) * s(3, 1),
        "h3": ac * s(1, 2),
        "h4": ac * s(1, 3),
    }
    quadratic = {
        ("s1", "s3"): s(2, 2),
        ("h1", "h3"): s(2, 2),
        ("s1", "s4"): s(2, 3),
        ("h1", "h4"): s(2, 3),
        ("s2", "s3"): s(3, 2),
        ("h2", "h3"): s(3, 2),
        ("s2", "s4"): s(3, 3),
        ("h2", "h4"): s(3, 3),
        ("s1", "h1"): sign * s(2, 1) ** 2,
        ("s2", "h2"): sign * s(3, 1) ** 2,
        ("s2", "h1"): sign * s(2, 1) * s(3, 1),
        ("s1", "h2"): sign * s(2, 1) * s(3, 1),
    }
    return linear, quadratic


def _trace_prefactor(S, alpha: complex) -> float:
    return math.exp(-(1.0 - S[0, 0] ** 2) * abs(alpha) ** 2)


def success_probability_genfunc(params) -> float:
    """Success probability as the eight-fold derivative of the trace integrand."""
    params = _as_params(params)
    S = total_matrix(params)
    linear, quadratic = _density_terms(S, params.alpha)
    form = genfunc.BilinearForm(_AUX, linear, quadratic)
    poly = genfunc.poly_exp(form, {v: 1 for v in _AUX})
    value = _trace_prefactor(S, params.alpha) * genfunc.derivative_at_zero(poly, _ALL_ONES)
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise ConsistencyError(f"complex success probability {value}")
    return float(value.real)


def _magnitude_scale(params: InterferometerParams) -> float:
    """Success probability with every term replaced by its magnitude."""
    S = total_matrix(params)
    linear, quadratic = _density_terms(S, params.alpha)
    form = genfunc.BilinearForm(
        _AUX,
        {k: abs(v) for k, v in linear.items()},
        {k: abs(v) for k, v in quadratic.items()},
    )
    poly = genfunc.poly_exp(form, {v: 1 for v in _AUX})
    return _trace_prefactor(S, params.alpha) * genfunc.derivative_at_zero(poly, _ALL_ONES).real


def _check_probability(p_d: float, params: InterferometerParams) -> float:
    floor = max(P_D_FLOOR, CANCELLATION_RTOL * _magnitude_scale(params))
    if not p_d > floor:
        raise ZeroProbabilityError(
            f"heralding probability {p_d:.3g} vanishes (degenerate post-selection)"
        )
    return p_d


def _moment_poly(params: InterferometerParams, kmax: int, lmax: int) -> genfunc.TruncatedPoly:
    S = total_matrix(params)
    s = _elements(S)
    alpha = params.alpha
    linear, quadratic = _density_terms(S, alpha)
    linear["mu"] = s(1, 1) * alpha.conjugate()
    linear["nu"] = s(1, 1) * alpha
    quadratic.update(
        {
            ("mu", "h1"): s(2, 1),
            ("mu", "h2"): s(3, 1),
            ("nu", "s1"): s(2, 1),
            ("nu", "s2"): s(3, 1),
        }
    )
    variables = _AUX + ("mu", "nu")
    form = genfunc.BilinearForm(variables, linear, quadratic)
    caps = {v: 1 for v in _AUX} | {"mu": kmax, "nu": lmax}
    return genfunc.poly_exp(form, caps)


def moment_table(params, kmax: int = 2, lmax: int | None = None) -> np.ndarray:
    """All normally ordered moments ``<a^dag^k a^l>`` with ``k <= kmax, l <= lmax``.

    Entry ``[k, l]`` of the returned complex array holds the moment.
    """
    params = _as_params(params)
    lmax = kmax if lmax is None else lmax
    for order in (kmax, lmax):
        if not (0 <= order <= MAX_MOMENT_ORDER):
            raise ValueError(f"moment order must be in [0, {MAX_MOMENT_ORDER}], got {order}")
    poly = _moment_poly(params, kmax, lmax)
    # leaves a polynomial in (mu, nu); coefficient [k, l] is d^k d^l / (k! l!)
    rest = genfunc.derivative_poly(poly, _ALL_ONES).coeffs
    S = total_matrix(params)
    trace = (_trace_prefactor(S, params.alpha) * rest[0, 0]).real
    _check_probability(trace, params)
    k = np.arange(kmax + 1)
    l = np.arange(lmax + 1)
    factorials = np.array([math.factorial(i) for i in k])[:, None] * np.array(
        [math.factorial(j) for j in l]
    )[None, :]
    return rest * factorials / rest[0, 0]


def moment(params, k: int, l: int) -> complex:
    """Normally ordered moment ``<a^dag^k a^l>`` of the normalized heralded state."""
    return complex(moment_table(params, k, l)[k, l])


def _wigner_forms(params: InterferometerParams):
    S = total_matrix(params)
    s = _elements(S)
    linear, quadratic = _density_terms(S, params.alpha, sign=-1.0)
    coupling = {"h1": s(2, 1), "h2": s(3, 1), "s1": s(2, 1), "s2": s(3, 1)}
    return S, linear, quadratic, coupling


def _wigner_prefactor(S, alpha: complex, beta, p_d: float):
    beta0 = S[0, 0] * alpha
    return (2.0 / (math.pi * p_d)) * np.exp(
        -(1.0 - S[0, 0] ** 2) * abs(alpha) ** 2 - 2.0 * np.abs(beta - beta0) ** 2
    )


def _real_or_raise(values, scale):
    values = np.asarray(values)
    residue = np.max(np.abs(values.imag)) if values.size else 0.0
    if residue > 1e-8 * max(1.0, scale):
        raise ConsistencyError(f"Wigner function has imaginary residue {residue:.3g}")
    return values.real


def wigner_point(params, q: float, p: float) -> float:
    """Wigner function at ``beta = (q + i p) / sqrt(2)``, normalized to ``∫W d²beta = 1``."""
    params = _as_params(params)
    S, linear, quadratic, coupling = _wigner_forms(params)
    beta = complex(q, p) / math.sqrt(2.0)
    for var, value in coupling.items():
        shift = 2.0 * (beta if var.startswith("h") else beta.conjugate()) * value
        linear[var] = linear[var] + shift
    form = genfunc.BilinearForm(_AUX, linear, quadratic)
    poly = genfunc.poly_exp(form, {v: 1 for v in _AUX})
    p_d = _check_probability(success_probability_genfunc(params), params)
    value = _wigner_prefactor(S, params.alpha, beta, p_d) * genfunc.derivative_at_zero(
        poly, _ALL_ONES
    )
    return float(_real_or_raise(value, 1.0))


@lru_cache(maxsize=256)
def _wigner_poly_cached(params: InterferometerParams):
    S, linear, quadratic, coupling = _wigner_forms(params)
    for var, value in coupling.items():
        quadratic[("t" if var.startswith("h") else "tb", var)] = value
    variables = _AUX + ("t", "tb")
    form = genfunc.BilinearForm(variables, linear, quadratic)
    poly = genfunc.poly_exp(form, {v: 1 for v in _AUX} | {"t": 2, "tb": 2})
    return S, genfunc.derivative_poly(poly, _ALL_ONES)


def wigner_grid(params, q, p) -> np.ndarray:
    """Wigner function on broadcast arrays of ``q`` and ``p``.

    The eight-fold derivative is taken once with ``2*beta`` left symbolic,
    giving a polynomial of degree two in each of ``beta`` and ``conj(beta)``
    which is then evaluated on the whole grid.
    """
    params = _as_params(params)
    S, poly = _wigner_poly_cached(params)
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    beta = (q + 1j * p) / math.sqrt(2.0)
    p_d = _check_probability(success_probability_genfunc(params), params)
    values = _wigner_prefactor(S, params.alpha, beta, p_d) * genfunc.evaluate(
        poly, {"t": 2.0 * beta, "tb": 2.0 * np.conj(beta)}
    )
    return _real_or_raise(values, 1.0)


# -- explicit state -------------------------------------------------------------


def _coherent_amplitudes(beta: complex, cutoff: int) -> np.ndarray:
    amps = np.empty(cutoff + 1, dtype=complex)
    amps[0] = math.exp(-abs(beta) ** 2 / 2.0)
    for n in range(1, cutoff + 1):
        amps[n] = amps[n - 1] * beta / math.sqrt(n)
    return amps


@dataclass(frozen=True)
class HeraldedState:
    """Normalized ``(c0 + c1 a^dag + c2 a^dag^2)|beta0>`` and its herald probability."""

    c0: complex
    c1: complex
    c2: complex
    beta0: complex
    p_d: float

    @property
    def coefficients(self) -> tuple[complex, complex, complex]:
        return (self.c0, self.c1, self.c2)

    def norm_squared(self) -> float:
        """``<psi|psi>`` from coherent-state algebra, no truncation involved."""
        b = self.beta0
        c = self.coefficients
        total = 0.0
        for m in range(3):
            for n in range(3):
                # <b| a^m a^dag^n |b> after normal ordering
                elem = sum(
                    math.comb(m, j) * math.comb(n, j) * math.factorial(j)
                    * b.conjugate() ** (n - j) * b ** (m - j)
                    for j in range(min(m, n) + 1)
                )
                total += c[m].conjugate() * c[n] * elem
        return float(total.real)

    def fock_amplitudes(self, cutoff: int) -> np.ndarray:
        """Number-basis amplitudes ``<n|psi>`` for ``n = 0..cutoff``."""
        coh = _coherent_amplitudes(self.beta0, cutoff)
        n = np.arange(cutoff + 1)
        psi = self.c0 * coh
        psi[1:] += self.c1 * np.sqrt(n[1:]) * coh[:-1]
        psi[2:] += self.c2 * np.sqrt(n[2:] * (n[2:] - 1)) * coh[:-2]
        return psi


def herald(params) -> HeraldedState:
    """Heralded signal state produced at the given interaction parameters."""
    params = _as_params(params)
    S = total_matrix(params)
    s = _elements(S)
    alpha = params.alpha
    p_d = _check_probability(success_probability_closed(params), params)
    pi = math.exp(-(1.0 - s(1, 1) ** 2) * abs(alpha) ** 2 / 2.0) / math.sqrt(p_d)
    c0 = pi * (s(2, 2) * s(3, 3) + s(2, 3) * s(3, 2))
    c1 = alpha * pi * (
        s(1, 2) * s(2, 1) * s(3, 3)
        + s(1, 2) * s(3, 1) * s(2, 3)
        + s(2, 1) * s(1, 3) * s(3, 2)
        + s(1, 3) * s(2, 2) * s(3, 1)
    )
    c2 = alpha**2 * pi * s(1, 2) * s(2, 1) * s(1, 3) * s(3, 1)
    return HeraldedState(complex(c0), complex(c1), complex(c2), complex(s(1, 1) * alpha), p_d)


def unnormalized_heralded_vector(params, cutoff: int) -> np.ndarray:
    """Projected signal amplitudes before normalization, from the ket generating function.

    The squared norm of this vector is the success probability.
    """
    params = _as_params(params)
    if cutoff < 0:
        raise ParameterDomainError("cutoff must be non-negative")
    S = total_matrix(params)
    s = _elements(S)
    alpha = params.alpha
    variables = _KET + ("t",)
    form = genfunc.BilinearForm(
        variables,
        {"s3": alpha * s(1, 2), "s4": alpha * s(1, 3), "t": alpha * s(1, 1)},
        {
            ("s1", "s3"): s(2, 2),
            ("s1", "s4"): s(2, 3),
            ("s2", "s3"): s(3, 2),
            ("s2", "s4"): s(3, 3),
            ("t", "s1"): s(2, 1),
            ("t", "s2"): s(3, 1),
        },
    )
    poly = genfunc.poly_exp(form, {v: 1 for v in _KET} | {"t": cutoff})
    coef = genfunc.derivative_poly(poly, {v: 1 for v in _KET}).coeffs
    # coefficient of t^n is x^n / n!, and <n| x^n a^dag^n |0> / n! = x^n / sqrt(n!)
    n = np.arange(cutoff + 1)
    sqrt_fact = np.exp(0.5 * np.array([math.lgamma(k + 1) for k in n]))
    return math.exp(-abs(alpha) ** 2 / 2.0) * coef * sqrt_fact
