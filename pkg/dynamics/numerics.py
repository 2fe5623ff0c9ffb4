"""Riemann-sphere arithmetic, dense polynomials and rational maps.

Points of the extended plane are plain ``complex`` values or the singleton
``INFINITY``. Every map application normalises its result through
``to_sphere`` so that overflow never propagates as inf/nan components.
"""

from dataclasses import dataclass
import math
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from dynamics.errors import EvalIndeterminate

# Finite points beyond this modulus are treated as the point at infinity
INFINITY_THRESHOLD = 1e15

# Trailing coefficients below this fraction of the largest one are dropped
COEFF_RTOL = 1e-14


class _PointAtInfinity:
    """The point at infinity of the Riemann sphere (a singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Infinity"

    def __reduce__(self):
        return (_PointAtInfinity, ())


INFINITY = _PointAtInfinity()

SpherePoint = Union[complex, _PointAtInfinity]


def is_infinity(w) -> bool:
    return w is INFINITY


def to_sphere(z) -> SpherePoint:
    """Normalise a value to a sphere point: huge or non-finite becomes INFINITY."""
    if z is INFINITY:
        return INFINITY
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        return INFINITY
    if max(abs(z.real), abs(z.imag)) > INFINITY_THRESHOLD or abs(z) > INFINITY_THRESHOLD:
        return INFINITY
    return z


def sphere_error(x: SpherePoint, y: SpherePoint) -> float:
    """Relative distance on the sphere.

    Finite pairs use |x-y|/max(1,|x|,|y|); a pair involving INFINITY compares
    reciprocals (1/INFINITY = 0).
    """
    x, y = to_sphere(x), to_sphere(y)
    if x is INFINITY and y is INFINITY:
        return 0.0
    if x is INFINITY or y is INFINITY:
        finite = y if x is INFINITY else x
        if finite == 0:
            return math.inf
        return abs(1 / finite)
    return abs(x - y) / max(1.0, abs(x), abs(y))


def format_point(w: SpherePoint, digits: int = 10) -> str:
    if w is INFINITY:
        return "inf"
    w = complex(w)
    re, im = w.real + 0.0, w.imag + 0.0  # no "-0"
    return f"{re:.{digits}g}{im:+.{digits}g}i"


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

def _normalize(coeffs: Sequence[complex]) -> Tuple[complex, ...]:
    coeffs = [complex(c) for c in coeffs]
    scale = max((abs(c) for c in coeffs), default=0.0)
    while coeffs and (coeffs[-1] == 0 or abs(coeffs[-1]) < COEFF_RTOL * scale):
        coeffs.pop()
    return tuple(coeffs) if coeffs else (0j,)


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial, coefficients in ascending degree."""

    coeffs: Tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _normalize(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0j,)

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    def __call__(self, z):
        return poly_eval(self, z)


def poly_eval(p: Polynomial, z):
    """Horner evaluation; works for scalars and numpy arrays alike."""
    acc = 0j
    for c in reversed(p.coeffs):
        acc = acc * z + c
    return acc


def poly_derive(p: Polynomial) -> Polynomial:
    return Polynomial(tuple(k * c for k, c in enumerate(p.coeffs))[1:])


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    return Polynomial(P.polyadd(p.coeffs, q.coeffs))


def poly_sub(p: Polynomial, q: Polynomial) -> Polynomial:
    return Polynomial(P.polysub(p.coeffs, q.coeffs))


def poly_scale(p: Polynomial, factor: complex) -> Polynomial:
    return Polynomial(tuple(factor * c for c in p.coeffs))


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return Polynomial(P.polymul(p.coeffs, q.coeffs))


def poly_pow(p: Polynomial, power: int) -> Polynomial:
    return Polynomial(P.polypow(p.coeffs, power))


def poly_from_roots(roots: Iterable[Tuple[complex, int]]) -> Polynomial:
    """Monic polynomial prod (z - r)**mult."""
    result = Polynomial((1,))
    for root, mult in roots:
        result = poly_mul(result, poly_pow(Polynomial((-complex(root), 1)), mult))
    return result


def poly_compose_affine(p: Polynomial, alpha: complex, beta: complex) -> Polynomial:
    """The polynomial z -> p(alpha*z + beta)."""
    inner = Polynomial((beta, alpha))
    acc = Polynomial((0,))
    for c in reversed(p.coeffs):
        acc = poly_add(poly_mul(acc, inner), Polynomial((c,)))
    return acc


def poly_divide_linear(p: Polynomial, root: complex) -> Tuple[Polynomial, complex]:
    """Synthetic division by (z - root): returns (quotient, remainder)."""
    coeffs = p.coeffs
    if len(coeffs) == 1:
        return Polynomial((0,)), coeffs[0]
    quotient = [0j] * (len(coeffs) - 1)
    carry = 0j
    for k in range(len(coeffs) - 1, 0, -1):
        carry = coeffs[k] + root * carry
        quotient[k - 1] = carry
    remainder = coeffs[0] + root * carry
    return Polynomial(tuple(quotient)), remainder


def poly_roots(p: Polynomial) -> np.ndarray:
    """All complex roots via the companion matrix."""
    if p.degree < 1:
        return np.empty(0, dtype=complex)
    return P.polyroots(np.asarray(p.coeffs, dtype=complex)).astype(complex)


# ---------------------------------------------------------------------------
# Rational maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalMap:
    """num/den acting on the Riemann sphere."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero:
            raise ValueError("rational map denominator is the zero polynomial")

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    def value_at_infinity(self) -> SpherePoint:
        if self.num.is_zero:
            return 0j
        if self.num.degree > self.den.degree:
            return INFINITY
        if self.num.degree < self.den.degree:
            return 0j
        return to_sphere(self.num.leading / self.den.leading)

    def __call__(self, w: SpherePoint) -> SpherePoint:
        return rational_apply(self, w)


def rational_apply(R: RationalMap, w: SpherePoint) -> SpherePoint:
    """Evaluate R on the sphere.

    Raises EvalIndeterminate when numerator and denominator both vanish,
    which only happens for a map that was not reduced at construction.
    """
    if w is INFINITY:
        return R.value_at_infinity()
    z = complex(w)
    n = poly_eval(R.num, z)
    d = poly_eval(R.den, z)
    if d == 0:
        if n == 0:
            raise EvalIndeterminate(f"0/0 evaluating rational map at z={z}")
        return INFINITY
    return to_sphere(n / d)


def rational_quotient_derivative(R: RationalMap) -> RationalMap:
    """Quotient-rule derivative (num' den - num den') / den**2."""
    num = poly_sub(poly_mul(poly_derive(R.num), R.den), poly_mul(R.num, poly_derive(R.den)))
    return RationalMap(num, poly_pow(R.den, 2))


def coefficient_array(p: Polynomial, length: int) -> np.ndarray:
    """Coefficients zero-padded to a fixed length, for batch evaluation."""
    out = np.zeros(length, dtype=complex)
    out[: len(p.coeffs)] = p.coeffs
    return out


def _horner_batch(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(z) + coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def _value_at_infinity_batch(num: np.ndarray, den: np.ndarray):
    """Per-column value at infinity for coefficient arrays of shape (n, N)."""

    def degree_and_lead(coeffs):
        mag = np.abs(coeffs)
        keep = (mag > 0) & (mag >= COEFF_RTOL * mag.max(axis=0))
        deg = coeffs.shape[0] - 1 - np.argmax(keep[::-1], axis=0)
        deg = np.where(keep.any(axis=0), deg, 0)
        lead = np.take_along_axis(coeffs, deg[None, :], axis=0)[0]
        return deg, lead, keep.any(axis=0)

    dn, lead_n, num_nonzero = degree_and_lead(num)
    dd, lead_d, _ = degree_and_lead(den)
    with np.errstate(all="ignore"):
        ratio = np.where(dn == dd, lead_n / np.where(lead_d == 0, 1, lead_d), 0)
    is_inf = num_nonzero & (dn > dd)
    value = np.where(is_inf | ~num_nonzero | (dn < dd), 0, ratio)
    return value.astype(complex), is_inf


def rational_apply_batch(num, den, z: np.ndarray, z_inf: np.ndarray):
    """Vectorised rational_apply.

    ``num``/``den`` are coefficient arrays of shape (n,) shared by every
    element, or (n, N) with one column per element of the 1-D array ``z``.
    ``z_inf`` flags elements sitting at INFINITY (their ``z`` is ignored).
    Returns ``(w, w_inf, indeterminate)``; indeterminate elements (0/0) keep
    ``w = 0`` and are not flagged infinite.
    """
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    z = np.where(z_inf, 0, z).astype(complex)
    with np.errstate(all="ignore"):
        n = _horner_batch(num, z)
        d = _horner_batch(den, z)
        zero_den = d == 0
        indeterminate = zero_den & (n == 0) & ~z_inf
        w = np.where(zero_den, 0, n) / np.where(zero_den, 1, d)
        w_inf = zero_den & ~indeterminate

        if num.ndim == 1:
            at_inf = RationalMap(Polynomial(num), Polynomial(den)).value_at_infinity()
            inf_value = np.full(z.shape, 0j if at_inf is INFINITY else at_inf)
            inf_flag = np.full(z.shape, at_inf is INFINITY)
        else:
            inf_value, inf_flag = _value_at_infinity_batch(num, den)
        w = np.where(z_inf, inf_value, w)
        w_inf = np.where(z_inf, inf_flag, w_inf)

        overflow = ~np.isfinite(w) | (np.abs(w) > INFINITY_THRESHOLD)
        w_inf = w_inf | overflow
        w = np.where(w_inf, 0, w)
    return w, w_inf, indeterminate & ~z_inf
