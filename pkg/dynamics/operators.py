"""Iteration operators of the modified Chebyshev family.

Builds the one-step operator R_f for a polynomial, the conjugate family
S(z;K) obtained for p(z) = (z-a)^m (z-b)^n with m = K n, the two-root
operator G(z;K) for g(x) = (x-1)^m (x+1)^n, their derivative maps, and the
Moebius/affine changes of variable relating them.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from dynamics.errors import DegenerateParam, EvalIndeterminate
from dynamics.numerics import (
    INFINITY,
    Polynomial,
    RationalMap,
    SpherePoint,
    poly_derive,
    poly_divide_linear,
    poly_eval,
    poly_mul,
    poly_pow,
    poly_scale,
    rational_quotient_derivative,
    to_sphere,
)

# Ratios where some formula changes shape (pole, cancellation, degree drop)
SPECIAL_RATIOS = (0, -1, -2, -1.5, 1, 2, 3)
SNAP_RADIUS = 1e-9

# At these ratios numerator and denominator of S share the factor (z - 1)
REMOVABLE_RATIOS = (-1, -2)


def snap_ratio(K) -> complex:
    """Snap K onto a special ratio when it lies within SNAP_RADIUS of it."""
    K = complex(K)
    for special in SPECIAL_RATIOS:
        if abs(K - special) < SNAP_RADIUS:
            return complex(special)
    return K


@dataclass(frozen=True)
class RatioParam:
    """Multiplicity ratio K (m = K n); K = 0 collapses S to the identity."""

    K: complex

    def __post_init__(self):
        K = snap_ratio(self.K)
        if K == 0:
            raise DegenerateParam(K, "identity map")
        object.__setattr__(self, "K", K)


@dataclass(frozen=True)
class MultiplicityPair:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"multiplicities must be positive, got m={self.m}, n={self.n}")

    @property
    def ratio(self) -> RatioParam:
        return RatioParam(self.m / self.n)


def as_ratio(K) -> RatioParam:
    return K if isinstance(K, RatioParam) else RatioParam(K)


# ---------------------------------------------------------------------------
# Changes of variable
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MoebiusMap:
    """M(z) = (z - a)/(z - b): sends a to 0, b to infinity, infinity to 1."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        if self.a == self.b:
            raise ValueError("Moebius map needs two distinct roots")


def moebius_apply(M: MoebiusMap, w: SpherePoint) -> SpherePoint:
    if w is INFINITY:
        return 1 + 0j
    z = complex(w)
    if z == M.b:
        return INFINITY
    return to_sphere((z - M.a) / (z - M.b))


def moebius_inverse(M: MoebiusMap, u: SpherePoint) -> SpherePoint:
    if u is INFINITY:
        return M.b
    u = complex(u)
    if u == 1:
        return INFINITY
    return to_sphere((M.b * u - M.a) / (u - 1))


@dataclass(frozen=True)
class AffineMap:
    """T(z) = alpha z + beta."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.alpha == 0:
            raise ValueError("affine map needs a nonzero slope")


def affine_apply(T: AffineMap, z: SpherePoint) -> SpherePoint:
    if z is INFINITY:
        return INFINITY
    return to_sphere(T.alpha * complex(z) + T.beta)


def affine_inverse(T: AffineMap, z: SpherePoint) -> SpherePoint:
    if z is INFINITY:
        return INFINITY
    return to_sphere((complex(z) - T.beta) / T.alpha)


# ---------------------------------------------------------------------------
# One step of the method
# ---------------------------------------------------------------------------

def modified_chebyshev_step(f: Polynomial, m: int, z: complex) -> SpherePoint:
    """z - (m f / 2f') (3 - m + m L_f) with L_f = f f'' / f'^2."""
    if f.degree < 1:
        raise ValueError("modified Chebyshev step needs a nonconstant polynomial")
    z = complex(z)
    d1 = poly_derive(f)
    f0 = poly_eval(f, z)
    f1 = poly_eval(d1, z)
    if f1 == 0:
        if f0 == 0:
            raise EvalIndeterminate(f"f and f' both vanish at z={z}")
        return INFINITY
    f2 = poly_eval(poly_derive(d1), z)
    convexity = f0 * f2 / (f1 * f1)
    return to_sphere(z - (m * f0 / (2 * f1)) * (3 - m + m * convexity))


def chebyshev_step_from_roots(roots: Sequence[Tuple[complex, int]], m: int, z: complex) -> SpherePoint:
    """The same step for f given as prod (z - r)**k.

    Works with logarithmic derivatives, f'/f = sum k/(z-r) and
    f''/f = (f'/f)^2 - sum k/(z-r)^2, so accuracy survives near multiple roots.
    """
    z = complex(z)
    s1 = 0j
    s2 = 0j
    for root, mult in roots:
        if z == root:
            if mult >= 2:
                raise EvalIndeterminate(f"z={z} is a multiple root")
            return z
        inv = 1 / (z - root)
        s1 += mult * inv
        s2 += mult * inv * inv
    if s1 == 0:
        return INFINITY
    convexity = (s1 * s1 - s2) / (s1 * s1)
    return to_sphere(z - (m / (2 * s1)) * (3 - m + m * convexity))


# ---------------------------------------------------------------------------
# The conjugate family S(z;K)
# ---------------------------------------------------------------------------

def _s_numerator(K: complex) -> Polynomial:
    return Polynomial((0, 0, 0, K * (K + 3) / 2, 1))


def _s_denominator(K: complex) -> Polynomial:
    return Polynomial((K * K * K, K * K * (3 - K), 3 * K * (1 - K), (K - 1) * (K - 2) / 2))


def build_S(K) -> RationalMap:
    """S(z) = z^3 [2z + K(K+3)] / [(K-1)(K-2)z^3 + 6K(1-K)z^2 + 2K^2(3-K)z + 2K^3].

    Stored with both sides halved (monic numerator). At K in {-1, -2} the
    shared factor (z - 1) is divided out.
    """
    K = as_ratio(K).K
    num, den = _s_numerator(K), _s_denominator(K)
    if K in REMOVABLE_RATIOS:
        num, _ = poly_divide_linear(num, 1)
        den, _ = poly_divide_linear(den, 1)
    return RationalMap(num, den)


def s_coefficient_columns(K: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unreduced (halved) S coefficients for many ratios, one column per K.

    Same arithmetic as the scalar builders, so a column evaluates exactly like
    ``build_S`` at that K away from the removable ratios.
    """
    K = np.asarray(K, dtype=complex)
    zero = np.zeros_like(K)
    num = np.stack([zero, zero, zero, K * (K + 3) / 2, zero + 1])
    den = np.stack([K * K * K, K * K * (3 - K), 3 * K * (1 - K), (K - 1) * (K - 2) / 2])
    return num, den


def s_prime_quadratic(K: complex) -> Polynomial:
    """(K-1)(K-2)z^2 - 2K(K-1)(K+4)z + 3K^2(K+3), the non-trivial factor of S'."""
    return Polynomial((3 * K * K * (K + 3), -2 * K * (K - 1) * (K + 4), (K - 1) * (K - 2)))


def build_S_prime(K) -> RationalMap:
    """2z^2 (z+K)^2 q(z) / D(z)^2 with D the unhalved denominator of S."""
    K = as_ratio(K).K
    if K in REMOVABLE_RATIOS:
        return rational_quotient_derivative(build_S(K))
    factor = poly_mul(Polynomial((0, 0, 1)), poly_pow(Polynomial((K, 1)), 2))
    num = poly_mul(factor, s_prime_quadratic(K))
    # halved denominator: S' = z^2 (z+K)^2 q / (2 D_half^2)
    den = poly_scale(poly_pow(_s_denominator(K), 2), 2)
    return RationalMap(num, den)


# ---------------------------------------------------------------------------
# The two-root operator G(z;K) for g(x) = (x-1)^m (x+1)^n
# ---------------------------------------------------------------------------

def u_coefficients(K) -> Tuple[complex, complex, complex, complex, complex]:
    """Numerator coefficients (u1..u5) of G, highest degree first."""
    K = complex(K)
    return (
        K * K + 3 * K + 2,
        2 * K ** 3 + 4 * K * K - 6,
        6 * K ** 3 + 6 * K * K - 6 * K + 6,
        6 * K ** 3 - 4 * K * K - 2,
        2 * K ** 3 - 7 * K * K + 3 * K,
    )


def _g_denominator(K: complex, power: int) -> Polynomial:
    return poly_scale(poly_pow(Polynomial((K - 1, K + 1)), power), 2)


def build_G(K) -> RationalMap:
    """G(z) = (u1 z^4 + ... + u5) / (2 ((K+1) z + (K-1))^3), stored unreduced."""
    K = as_ratio(K).K
    u1, u2, u3, u4, u5 = u_coefficients(K)
    return RationalMap(Polynomial((u5, u4, u3, u2, u1)), _g_denominator(K, 3))


def g_prime_quadratic(K) -> Polynomial:
    """Bracket of G' expanded in z: A z^2 + B z + C."""
    K = complex(K)
    A = (K + 1) ** 2 * (K + 2)
    B = 6 * K ** 3 + 16 * K * K + 6 * K - 4
    C = 5 * K ** 3 + 16 * K * K - 11 * K + 2
    return Polynomial((C, B, A))


def build_G_prime(K) -> RationalMap:
    """(z-1)^2 [(z^2+6z+5)K^3 + 4(z+2)^2 K^2 + (5z^2+6z-11)K + 2(z-1)^2] / (2 [(K+1)z+(K-1)]^4)."""
    K = as_ratio(K).K
    num = poly_mul(poly_pow(Polynomial((-1, 1)), 2), g_prime_quadratic(K))
    return RationalMap(num, _g_denominator(K, 4))
