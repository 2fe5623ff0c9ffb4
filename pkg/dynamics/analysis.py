"""Fixed points, critical points and stability of S and G.

Multipliers are always obtained by evaluating the derivative maps; the
published closed forms are kept alongside as cross-checks and any
disagreement is surfaced through ``stability_discrepancies``.
"""

import cmath
from dataclasses import dataclass
from enum import Enum
import math
from typing import List, Optional, Tuple

from dynamics.errors import UNDEFINED, EvalIndeterminate, NotAFixedPoint, format_ratio, is_undefined
from dynamics.numerics import (
    INFINITY,
    Polynomial,
    RationalMap,
    SpherePoint,
    format_point,
    poly_derive,
    poly_eval,
    poly_mul,
    poly_roots,
    poly_sub,
    rational_apply,
    sphere_error,
    to_sphere,
)
from dynamics.operators import (
    REMOVABLE_RATIOS,
    as_ratio,
    build_G,
    build_G_prime,
    build_S,
    build_S_prime,
    g_prime_quadratic,
    s_prime_quadratic,
    snap_ratio,
)

SUPERATTRACTING_BELOW = 1e-12
NEUTRAL_BAND = 1e-9
FIXED_POINT_RESIDUAL = 1e-8
DISCREPANCY_THRESHOLD = 1e-6


class StabilityClass(str, Enum):
    SUPERATTRACTING = "superattracting"
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    NEUTRAL = "neutral"


class FixedPointKind(str, Enum):
    ROOT_IMAGE = "root"
    STRANGE = "strange"


def classify(rho: float) -> StabilityClass:
    if rho < SUPERATTRACTING_BELOW:
        return StabilityClass.SUPERATTRACTING
    if rho < 1 - NEUTRAL_BAND:
        return StabilityClass.ATTRACTING
    if rho > 1 + NEUTRAL_BAND:
        return StabilityClass.REPELLING
    return StabilityClass.NEUTRAL


@dataclass(frozen=True)
class FixedPointReport:
    location: SpherePoint
    multiplier_modulus: float
    stability: StabilityClass
    kind: FixedPointKind

    @property
    def is_attracting(self) -> bool:
        return self.stability in (StabilityClass.SUPERATTRACTING, StabilityClass.ATTRACTING)

    def as_record(self, K) -> str:
        return (
            f"{format_ratio(K)}, {format_point(self.location)}, "
            f"{self.multiplier_modulus:.10g}, {self.stability.value}"
        )


@dataclass(frozen=True)
class CriticalPointSet:
    points: Tuple[Tuple[SpherePoint, int], ...]


@dataclass(frozen=True)
class Discrepancy:
    """A closed form that disagrees with direct derivative evaluation."""

    name: str
    K: complex
    closed_form: float
    direct: float

    @property
    def delta(self) -> float:
        return abs(self.closed_form - self.direct)

    def as_record(self) -> str:
        return (
            f"{format_ratio(self.K)}, {self.name}, {self.closed_form:.10g}, "
            f"{self.direct:.10g}, {self.delta:.3g}"
        )


# ---------------------------------------------------------------------------
# Multipliers
# ---------------------------------------------------------------------------

def _magnitude(p: Polynomial, r: float) -> float:
    return sum(abs(c) * r ** k for k, c in enumerate(p.coeffs))


def fixed_point_residual(F: RationalMap, p: SpherePoint) -> float:
    """|num(p) - p den(p)| relative to the coefficient sizes at max(1, |p|).

    Never divides num by den, so it stays meaningful where both nearly
    vanish (ratios close to -1 and -2) or where p is large.
    """
    if p is INFINITY:
        return sphere_error(F.value_at_infinity(), INFINITY)
    z = complex(p)
    r = max(1.0, abs(z))
    scale = _magnitude(F.num, r) + r * _magnitude(F.den, r)
    if scale == 0:
        return 0.0
    return abs(poly_eval(F.num, z) - z * poly_eval(F.den, z)) / scale


def _derivative_at_fixed_point(F: RationalMap, z: complex) -> SpherePoint:
    """F'(z) = (num'(z) - z den'(z)) / den(z), valid where num(z) = z den(z)."""
    d = poly_eval(F.den, z)
    if d == 0:
        return INFINITY
    return to_sphere((poly_eval(poly_derive(F.num), z) - z * poly_eval(poly_derive(F.den), z)) / d)


def multiplier(D: RationalMap, F: RationalMap, p: SpherePoint) -> float:
    """|F'(p)| at a fixed point p, using the chart w = 1/z at infinity."""
    if fixed_point_residual(F, p) >= FIXED_POINT_RESIDUAL:
        raise NotAFixedPoint(f"{format_point(p)} is not fixed by the map")
    if p is INFINITY:
        if F.num.degree >= F.den.degree + 2:
            return 0.0
        return abs(F.den.leading / F.num.leading)
    try:
        value = rational_apply(D, p)
    except EvalIndeterminate:
        value = _derivative_at_fixed_point(F, complex(p))
    return math.inf if value is INFINITY else abs(value)


def _report(D: RationalMap, F: RationalMap, p: SpherePoint, kind: FixedPointKind) -> FixedPointReport:
    rho = multiplier(D, F, p)
    return FixedPointReport(p, rho, classify(rho), kind)


# ---------------------------------------------------------------------------
# Fixed points
# ---------------------------------------------------------------------------

def s_branch_points(K: complex) -> Tuple[complex, complex]:
    """z2,3 = (3 +- sqrt(2K+3)) K / (K - 3), principal root, + branch first.

    (3 - s)(3 + s) = -2(K - 3), so z3 is taken as -2K / (3 + s); the direct
    form cancels to nothing near K = 3. |3 + s| >= 3 since Re s >= 0.
    """
    s = cmath.sqrt(2 * K + 3)
    return (3 + s) * K / (K - 3), -2 * K / (3 + s)


def g_branch_points(K: complex) -> Tuple[complex, complex]:
    """z2,3 = -N+- / ((2K+3)(K+1)), N+- = (2K+3)(K-1) +- 2K sqrt(2K+3), + branch first.

    N+ N- = (2K+3)(K+1)(K-3)(2K-1), so the branch with the smaller |N| is
    taken as -(K-3)(2K-1) / N of the other one.
    """
    s = cmath.sqrt(2 * K + 3)
    plus = (2 * K + 3) * (K - 1) + 2 * K * s
    minus = (2 * K + 3) * (K - 1) - 2 * K * s
    den = (2 * K + 3) * (K + 1)
    if abs(plus) >= abs(minus):
        return -plus / den, -(K - 3) * (2 * K - 1) / plus
    return -(K - 3) * (2 * K - 1) / minus, -minus / den


def _strange_points_S(K: complex) -> List[complex]:
    if K == 3:
        return [1 + 0j, -1 + 0j]
    z2, z3 = s_branch_points(K)
    if K == -2:
        return [z2, z3]
    if K == -1:
        # z2 collapses onto z1 = 1, the merged superattracting point
        return [1 + 0j, z3]
    return [1 + 0j, z2, z3]


def fixed_points_S(K) -> List[FixedPointReport]:
    ratio = as_ratio(K)
    S, Sp = build_S(ratio), build_S_prime(ratio)
    reports = [
        _report(Sp, S, 0j, FixedPointKind.ROOT_IMAGE),
        _report(Sp, S, INFINITY, FixedPointKind.ROOT_IMAGE),
    ]
    reports += [_report(Sp, S, z, FixedPointKind.STRANGE) for z in _strange_points_S(ratio.K)]
    return reports


def _numeric_strange_points_G(G: RationalMap) -> List[SpherePoint]:
    """Roots of num(z) - z den(z) minus the root images 1 and -1, plus infinity."""
    fixed_poly = poly_sub(G.num, poly_mul(Polynomial((0, 1)), G.den))
    roots = [complex(r) for r in poly_roots(fixed_poly)]
    for target in (1, -1):
        if roots:
            roots.pop(min(range(len(roots)), key=lambda i: abs(roots[i] - target)))
    at_infinity = G.degree + 1 - fixed_poly.degree
    return roots + [INFINITY] * at_infinity


def _strange_points_G(K: complex, G: RationalMap) -> List[SpherePoint]:
    if K in (-1, -1.5):
        return _numeric_strange_points_G(G)
    branches = list(g_branch_points(K))
    if K == 3:
        # the + branch is the image of S's z2, which escapes onto the root image -1
        branches = [z for z in branches if abs(z + 1) > SUPERATTRACTING_BELOW]
    at_infinity = [] if K == -2 else [INFINITY]
    return at_infinity + branches


def fixed_points_G(K) -> List[FixedPointReport]:
    ratio = as_ratio(K)
    G, Gp = build_G(ratio), build_G_prime(ratio)
    reports = [
        _report(Gp, G, 1 + 0j, FixedPointKind.ROOT_IMAGE),
        _report(Gp, G, -1 + 0j, FixedPointKind.ROOT_IMAGE),
    ]
    reports += [_report(Gp, G, z, FixedPointKind.STRANGE) for z in _strange_points_G(ratio.K, G)]
    return reports


def attracting_strange_points(reports: List[FixedPointReport]) -> List[SpherePoint]:
    return [r.location for r in reports if r.kind is FixedPointKind.STRANGE and r.is_attracting]


# ---------------------------------------------------------------------------
# Stability functions
# ---------------------------------------------------------------------------

def stability_fn_z1(K) -> float:
    """2 |(K+1)^2 / (K+2)|; UNDEFINED at K = -2 where z1 is not fixed."""
    K = snap_ratio(K)
    if K == -2:
        return UNDEFINED
    return 2 * abs((K + 1) ** 2 / (K + 2))


def stability_fn_z23(K) -> Tuple[float, float]:
    """2 |(7K+11 -+ (2K+4) sqrt(3+2K)) / (sqrt(3+2K) -+ 1)^2|, z2 (upper sign) first."""
    K = snap_ratio(K)
    if K == 3:
        Sp = build_S_prime(3)
        return abs(rational_apply(Sp, 1)), abs(rational_apply(Sp, -1))
    s = cmath.sqrt(3 + 2 * K)
    values = []
    for sign in (1, -1):
        den = (s - sign) ** 2
        if den == 0:
            values.append(UNDEFINED)
        else:
            values.append(2 * abs((7 * K + 11 - sign * (2 * K + 4) * s) / den))
    return values[0], values[1]


def _clip(value: float) -> float:
    return UNDEFINED if is_undefined(value) else min(value, 1.0)


def stability_min_fns(K) -> Tuple[float, Tuple[float, float]]:
    z2, z3 = stability_fn_z23(K)
    return _clip(stability_fn_z1(K)), (_clip(z2), _clip(z3))


def multiplier_formula_G_z1(K) -> float:
    return 0.5 * abs((complex(K) - 1) * (complex(K) - 2))


def multiplier_formula_G_z23(K) -> Tuple[float, float]:
    """|(3K^2 + 11K +- (K^2+K-3) sqrt(2K+3) + 10) / (K+1)^2|, + sign first."""
    K = snap_ratio(K)
    if K == -1:
        return UNDEFINED, UNDEFINED
    s = cmath.sqrt(2 * K + 3)
    den = (K + 1) ** 2
    return tuple(
        abs((3 * K * K + 11 * K + sign * (K * K + K - 3) * s + 10) / den) for sign in (1, -1)
    )


def direct_multipliers_z23(K) -> Tuple[float, float]:
    """|S'(z2)|, |S'(z3)| by evaluating the derivative map."""
    ratio = as_ratio(K)
    if ratio.K == 3:
        return stability_fn_z23(3)
    S, Sp = build_S(ratio), build_S_prime(ratio)
    z2, z3 = s_branch_points(ratio.K)
    return multiplier(Sp, S, z2), multiplier(Sp, S, z3)


def direct_multipliers_G_z23(K) -> Tuple[float, float]:
    ratio = as_ratio(K)
    G, Gp = build_G(ratio), build_G_prime(ratio)
    z2, z3 = g_branch_points(ratio.K)
    return multiplier(Gp, G, z2), multiplier(Gp, G, z3)


def stability_discrepancies(K) -> List[Discrepancy]:
    """Closed forms that disagree with direct evaluation by more than 1e-6."""
    ratio = as_ratio(K)
    K = ratio.K
    checks = []

    if K != -2:
        S, Sp = build_S(ratio), build_S_prime(ratio)
        checks.append(("z1_closed_form", stability_fn_z1(K), multiplier(Sp, S, 1)))
    if K != 3:
        closed = stability_fn_z23(K)
        direct = direct_multipliers_z23(ratio)
        checks += [("z2_closed_form", closed[0], direct[0]), ("z3_closed_form", closed[1], direct[1])]

    G, Gp = build_G(ratio), build_G_prime(ratio)
    checks.append(("G_z1_closed_form", multiplier_formula_G_z1(K), multiplier(Gp, G, -1)))
    if K not in (-1, -1.5):
        closed = multiplier_formula_G_z23(K)
        direct = direct_multipliers_G_z23(ratio)
        checks += [("G_z2_closed_form", closed[0], direct[0]), ("G_z3_closed_form", closed[1], direct[1])]

    found = []
    for name, closed_form, direct in checks:
        if is_undefined(closed_form) or is_undefined(direct):
            continue
        record = Discrepancy(name, K, closed_form, direct)
        if record.delta > DISCREPANCY_THRESHOLD:
            found.append(record)
    return found


# ---------------------------------------------------------------------------
# Critical points
# ---------------------------------------------------------------------------

def _quadratic_roots(q: Polynomial) -> List[Tuple[complex, int]]:
    """Roots of a polynomial of degree <= 2 with multiplicities."""
    if q.degree == 0:
        return []
    if q.degree == 1:
        c, b = q.coeffs
        return [(-c / b, 1)]
    c, b, a = q.coeffs
    disc = b * b - 4 * a * c
    if disc == 0:
        return [(-b / (2 * a), 2)]
    root = cmath.sqrt(disc)
    if (b.conjugate() * root).real < 0:
        root = -root
    t = -(b + root) / 2
    return [(t / a, 1), (c / t, 1)]


def critical_point_branches(K: complex) -> Tuple[Optional[complex], Optional[complex]]:
    """C2, C3 of S; None where the point does not exist."""
    if K in REMOVABLE_RATIOS:
        return None, None
    A = (K - 1) * (K - 2)
    if A == 0:
        roots = _quadratic_roots(s_prime_quadratic(K))
        return (roots[0][0] if roots else None), None
    r = cmath.sqrt((K - 1) * (K + 2))
    base = (K - 1) * (K + 4)
    return (base + (K + 1) * r) * K / A, (base - (K + 1) * r) * K / A


def critical_point(K, which: str) -> Optional[complex]:
    """The critical point C1, C2 or C3 of S for parameter-space seeds."""
    K = as_ratio(K).K
    which = which.lower()
    if which == "c1":
        return -K
    c2, c3 = critical_point_branches(K)
    if which == "c2":
        return c2
    if which == "c3":
        return c3
    raise ValueError(f"unknown critical point {which!r}")


def critical_points_S(K) -> CriticalPointSet:
    K = as_ratio(K).K
    points = [(0j, 2), (-K, 2)]
    points += [(c, 1) for c in critical_point_branches(K) if c is not None]
    return CriticalPointSet(tuple(points))


def critical_points_G(K) -> CriticalPointSet:
    K = as_ratio(K).K
    points = [(1 + 0j, 2)] + _quadratic_roots(g_prime_quadratic(K))
    return CriticalPointSet(tuple(points))
