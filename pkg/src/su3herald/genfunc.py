"""Truncated multivariate polynomials and exponentials of bilinear forms.

Every quantity in this package that is written as a mixed partial
derivative at zero of ``exp(bilinear form)`` is evaluated here.  Each
variable carries a degree cap; any monomial exceeding a cap is discarded
as soon as it appears.  Because the caps equal the derivative orders that
are eventually taken, the truncated exponential is exact, not an
approximation.

Coefficients live in a dense complex tensor with one axis per variable
(axis length ``cap + 1``).  With cap-1 auxiliary variables this stays at
a few thousand entries and lets numpy slicing do the convolution work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "TruncatedPoly",
    "BilinearForm",
    "poly_mul",
    "poly_exp",
    "derivative_at_zero",
    "derivative_poly",
    "evaluate",
]


class TruncatedPoly:
    """Polynomial in named variables with a per-variable degree cap.

    Instances are immutable; arithmetic returns new objects.
    """

    __slots__ = ("variables", "caps", "coeffs")

    def __init__(self, variables: Sequence[str], caps: Sequence[int], coeffs=None):
        variables = tuple(variables)
        caps = tuple(int(c) for c in caps)
        if len(variables) != len(caps):
            raise ValueError("one cap per variable is required")
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables}")
        if any(c < 0 for c in caps):
            raise ValueError("caps must be non-negative")
        shape = tuple(c + 1 for c in caps)
        if coeffs is None:
            coeffs = np.zeros(shape, dtype=complex)
        else:
            coeffs = np.array(coeffs, dtype=complex)
            if coeffs.shape != shape:
                raise ValueError(f"coefficient shape {coeffs.shape} does not match caps {caps}")
        coeffs.flags.writeable = False
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "caps", caps)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedPoly is immutable")

    @classmethod
    def from_terms(cls, variables, caps, terms: Mapping[tuple, complex]) -> "TruncatedPoly":
        caps = tuple(int(c) for c in caps)
        coeffs = np.zeros(tuple(c + 1 for c in caps), dtype=complex)
        for exponent, value in terms.items():
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != len(caps):
                raise ValueError(f"exponent {exponent} has wrong length")
            if any(e < 0 or e > c for e, c in zip(exponent, caps)):
                raise ValueError(f"exponent {exponent} exceeds caps {caps}")
            coeffs[exponent] += value
        return cls(variables, caps, coeffs)

    @classmethod
    def one(cls, variables, caps) -> "TruncatedPoly":
        coeffs = np.zeros(tuple(int(c) + 1 for c in caps), dtype=complex)
        coeffs[(0,) * len(coeffs.shape)] = 1.0
        return cls(variables, caps, coeffs)

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        """Nonzero coefficients keyed by exponent vector."""
        idx = np.argwhere(self.coeffs != 0)
        return {tuple(int(i) for i in e): complex(self.coeffs[tuple(e)]) for e in idx}

    def __len__(self):
        return int(np.count_nonzero(self.coeffs))

    def __mul__(self, other):
        if isinstance(other, TruncatedPoly):
            return poly_mul(self, other)
        return TruncatedPoly(self.variables, self.caps, self.coeffs * complex(other))

    __rmul__ = __mul__

    def __add__(self, other: "TruncatedPoly") -> "TruncatedPoly":
        _check_compatible(self, other)
        return TruncatedPoly(self.variables, self.caps, self.coeffs + other.coeffs)

    def allclose(self, other: "TruncatedPoly", atol: float = 1e-12) -> bool:
        _check_compatible(self, other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))

    def __repr__(self):
        parts = []
        for exponent, value in sorted(self.terms.items()):
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, exponent) if e
            )
            parts.append(f"({value:.6g})" + (f"*{mono}" if mono else ""))
        return "TruncatedPoly(" + (" + ".join(parts) or "0") + ")"


def _check_compatible(a: TruncatedPoly, b: TruncatedPoly):
    if a.variables != b.variables or a.caps != b.caps:
        raise ValueError(
            f"incompatible polynomials: {a.variables}/{a.caps} vs {b.variables}/{b.caps}"
        )


def _shifted_add(out: np.ndarray, src: np.ndarray, shift: Sequence[int], scale: complex):
    """``out += scale * x^shift * src`` with truncation at the array bounds."""
    dst_idx = []
    src_idx = []
    for s, n in zip(shift, src.shape):
        if s >= n:
            return
        dst_idx.append(slice(s, n))
        src_idx.append(slice(0, n - s))
    out[tuple(dst_idx)] += scale * src[tuple(src_idx)]


def poly_mul(a: TruncatedPoly, b: TruncatedPoly) -> TruncatedPoly:
    """Product of two polynomials, discarding terms beyond the caps."""
    _check_compatible(a, b)
    # iterate over the sparser factor
    if np.count_nonzero(a.coeffs) < np.count_nonzero(b.coeffs):
        a, b = b, a
    out = np.zeros_like(a.coeffs)
    for exponent in np.argwhere(b.coeffs != 0):
        exponent = tuple(exponent)
        _shifted_add(out, a.coeffs, exponent, b.coeffs[exponent])
    return TruncatedPoly(a.variables, a.caps, out)


@dataclass(frozen=True)
class BilinearForm:
    """``constant + sum_i linear[i] x_i + sum_{i<=j} quadratic[i, j] x_i x_j``.

    ``quadratic`` keys are unordered pairs of variable names; a pair may
    repeat one name to express a square.
    """

    variables: tuple[str, ...]
    linear: Mapping[str, complex] = field(default_factory=dict)
    quadratic: Mapping[tuple[str, str], complex] = field(default_factory=dict)
    constant: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        known = set(self.variables)
        for name in self.linear:
            if name not in known:
                raise ValueError(f"unknown variable {name!r} in linear part")
        quad: dict[tuple[str, str], complex] = {}
        for pair, value in self.quadratic.items():
            if len(pair) != 2 or any(v not in known for v in pair):
                raise ValueError(f"bad quadratic key {pair!r}")
            key = tuple(sorted(pair, key=self.variables.index))
            quad[key] = quad.get(key, 0.0) + value
        object.__setattr__(self, "quadratic", quad)

    def __add__(self, other: "BilinearForm") -> "BilinearForm":
        if self.variables != other.variables:
            raise ValueError("bilinear forms over different variable sets")
        linear = dict(self.linear)
        for k, v in other.linear.items():
            linear[k] = linear.get(k, 0.0) + v
        quadratic = dict(self.quadratic)
        for k, v in other.quadratic.items():
            quadratic[k] = quadratic.get(k, 0.0) + v
        return BilinearForm(self.variables, linear, quadratic, self.constant + other.constant)

    def monomials(self):
        """Yield ``(exponent, coefficient)`` for each non-constant term."""
        index = {v: i for i, v in enumerate(self.variables)}
        n = len(self.variables)
        for name, value in self.linear.items():
            if value != 0:
                e = [0] * n
                e[index[name]] = 1
                yield tuple(e), complex(value)
        for (u, v), value in self.quadratic.items():
            if value != 0:
                e = [0] * n
                e[index[u]] += 1
                e[index[v]] += 1
                yield tuple(e), complex(value)


def _resolve_caps(variables, caps) -> tuple[int, ...]:
    if isinstance(caps, Mapping):
        missing = [v for v in variables if v not in caps]
        if missing:
            raise ValueError(f"no cap given for {missing}")
        return tuple(int(caps[v]) for v in variables)
    caps = tuple(int(c) for c in caps)
    if len(caps) != len(variables):
        raise ValueError("one cap per variable is required")
    return caps


def poly_exp(f: BilinearForm, caps) -> TruncatedPoly:
    """Truncated Taylor series of ``exp(f)``.

    The terms of ``f`` commute, so ``exp(f)`` is the product of the
    exponentials of its monomials; each of those is a finite sum once the
    caps are applied.
    """
    if f.constant != 0:
        raise ValueError("factor the constant term out before exponentiating")
    caps = _resolve_caps(f.variables, caps)
    coeffs = np.zeros(tuple(c + 1 for c in caps), dtype=complex)
    coeffs[(0,) * len(caps)] = 1.0
    for exponent, value in f.monomials():
        kmax = min(c // e for c, e in zip(caps, exponent) if e)
        if kmax == 0:
            continue
        out = coeffs.copy()
        term = coeffs
        for k in range(1, kmax + 1):
            shifted = np.zeros_like(coeffs)
            _shifted_add(shifted, term, exponent, value / k)
            out += shifted
            term = shifted
        coeffs = out
    return TruncatedPoly(f.variables, caps, coeffs)


def _resolve_order(p: TruncatedPoly, order) -> dict[str, int]:
    if isinstance(order, Mapping):
        unknown = [v for v in order if v not in p.variables]
        if unknown:
            raise ValueError(f"unknown variables {unknown}")
        return {v: int(k) for v, k in order.items()}
    order = tuple(int(k) for k in order)
    if len(order) != len(p.variables):
        raise ValueError("one derivative order per variable is required")
    return dict(zip(p.variables, order))


def derivative_poly(p: TruncatedPoly, order) -> TruncatedPoly:
    """Mixed partial derivative in the listed variables, taken at zero in them.

    The result is a polynomial in the variables not mentioned in ``order``.
    """
    order = _resolve_order(p, order)
    index = []
    scale = 1.0
    for var, cap in zip(p.variables, p.caps):
        k = order.get(var)
        if k is None:
            index.append(slice(None))
            continue
        if k < 0 or k > cap:
            raise ValueError(f"derivative order {k} in {var!r} exceeds cap {cap}")
        index.append(k)
        scale *= math.factorial(k)
    rest = [(v, c) for v, c in zip(p.variables, p.caps) if v not in order]
    return TruncatedPoly(
        [v for v, _ in rest], [c for _, c in rest], p.coeffs[tuple(index)] * scale
    )


def derivative_at_zero(p: TruncatedPoly, order) -> complex:
    """Mixed partial derivative ``prod_i d^{order_i}/dx_i^{order_i}`` at the origin.

    ``order`` is either a sequence aligned with ``p.variables`` or a mapping
    from variable name to multiplicity; omitted variables get order 0.
    """
    order = _resolve_order(p, order)
    full = {v: order.get(v, 0) for v in p.variables}
    return complex(derivative_poly(p, full).coeffs[()])


def evaluate(p: TruncatedPoly, values: Mapping[str, object]):
    """Evaluate ``p`` with numpy broadcasting over the supplied values."""
    xs = [np.asarray(values[v], dtype=complex) for v in p.variables]
    total = 0.0
    for exponent in np.argwhere(p.coeffs != 0):
        term = p.coeffs[tuple(exponent)]
        for x, e in zip(xs, exponent):
            if e:
                term = term * x**e
        total = total + term
    return np.broadcast_to(np.asarray(total, dtype=complex), np.broadcast_shapes(*(x.shape for x in xs))).copy()
