import numpy as np
import pytest

from dynamics.errors import DegenerateParam, EvalIndeterminate
from dynamics.numerics import INFINITY, Polynomial, poly_from_roots, rational_apply
from dynamics.operators import (
    AffineMap,
    MoebiusMap,
    MultiplicityPair,
    RatioParam,
    affine_apply,
    affine_inverse,
    build_G,
    build_G_prime,
    build_S,
    build_S_prime,
    chebyshev_step_from_roots,
    modified_chebyshev_step,
    moebius_apply,
    moebius_inverse,
    s_coefficient_columns,
    u_coefficients,
)

RATIOS = [2, 3, 0.5, -0.2j, 1.5 + 0.5j, -1, -2, 1, -1.5]


def central_difference(F, z, h=1e-6):
    return (rational_apply(F, z + h) - rational_apply(F, z - h)) / (2 * h)


class TestRatioParam:
    def test_zero_is_degenerate(self):
        with pytest.raises(DegenerateParam, match=r"degenerate parameter K=0 \(identity map\)"):
            RatioParam(0)

    def test_snaps_onto_special_ratios(self):
        assert RatioParam(2 + 1e-12).K == 2
        assert RatioParam(-1.5 - 1e-11j).K == -1.5
        assert RatioParam(0.6).K == 0.6

    def test_multiplicity_pair(self):
        assert MultiplicityPair(6, 2).ratio.K == 3
        with pytest.raises(ValueError):
            MultiplicityPair(0, 2)


class TestChangesOfVariable:
    def test_moebius_sends_roots_to_zero_and_infinity(self):
        M = MoebiusMap(2 + 1j, -0.5)
        assert moebius_apply(M, 2 + 1j) == 0
        assert moebius_apply(M, -0.5) is INFINITY
        assert moebius_apply(M, INFINITY) == 1
        assert moebius_inverse(M, 1) is INFINITY
        assert moebius_inverse(M, INFINITY) == -0.5

    def test_moebius_inverse_undoes_apply(self, rng):
        M = MoebiusMap(1, -1)
        for z in rng.normal(size=5) + 1j * rng.normal(size=5):
            assert moebius_inverse(M, moebius_apply(M, z)) == pytest.approx(z, rel=1e-12)

    def test_moebius_needs_distinct_roots(self):
        with pytest.raises(ValueError):
            MoebiusMap(1, 1)

    def test_affine_round_trip(self):
        T = AffineMap(1 + 1j, -3)
        assert affine_inverse(T, affine_apply(T, 2 - 1j)) == pytest.approx(2 - 1j)
        assert affine_apply(T, INFINITY) is INFINITY


class TestChebyshevStep:
    def test_pure_power_lands_on_root(self):
        f = poly_from_roots([(1, 3)])
        assert modified_chebyshev_step(f, 3, 2.5 - 1j) == pytest.approx(1)

    def test_factored_form_agrees_with_dense(self, rng):
        roots = [(1, 3), (-2, 1)]
        f = poly_from_roots(roots)
        for z in 3 * rng.normal(size=10) + 3j * rng.normal(size=10):
            assert chebyshev_step_from_roots(roots, 3, z) == pytest.approx(modified_chebyshev_step(f, 3, z), rel=1e-9)

    def test_multiple_root_is_indeterminate(self):
        with pytest.raises(EvalIndeterminate):
            modified_chebyshev_step(poly_from_roots([(1, 2)]), 2, 1)
        with pytest.raises(EvalIndeterminate):
            chebyshev_step_from_roots([(1, 2)], 2, 1)

    def test_simple_root_is_fixed(self):
        assert chebyshev_step_from_roots([(1, 2), (-1, 1)], 2, -1) == -1

    def test_critical_point_of_f_goes_to_infinity(self):
        # f = z^2 - 1 has f'(0) = 0
        assert modified_chebyshev_step(Polynomial((-1, 0, 1)), 1, 0) is INFINITY

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            modified_chebyshev_step(Polynomial((3,)), 1, 0)


class TestS:
    @pytest.mark.parametrize(
        "K, num, den",
        [
            (1, (0, 0, 0, 2, 1), (1, 2)),
            (3, (0, 0, 0, 9, 1), (27, 0, -18, 1)),
            (-2, (0, 0, 0, 1), (8, -12, 6)),
            (-1, (0, 0, 0, 1), (1, -3, 3)),
        ],
    )
    def test_coefficients(self, K, num, den):
        S = build_S(K)
        np.testing.assert_allclose(S.num.coeffs, num, atol=1e-12)
        np.testing.assert_allclose(S.den.coeffs, den, atol=1e-12)

    @pytest.mark.parametrize("K", RATIOS)
    def test_roots_are_fixed(self, K):
        S = build_S(K)
        assert rational_apply(S, 0) == 0
        assert rational_apply(S, INFINITY) is INFINITY

    @pytest.mark.parametrize("K", [2, 3, 0.5, -0.2j, 1, -1.5])
    def test_one_is_fixed(self, K):
        assert rational_apply(build_S(K), 1) == pytest.approx(1)

    def test_special_orbits(self):
        assert rational_apply(build_S(2), -2) == 1
        assert rational_apply(build_S(3), -3) == 1
        assert rational_apply(build_S(1), -2) == 0

    @pytest.mark.parametrize("K", RATIOS)
    def test_derivative_matches_central_difference(self, K):
        S, Sp = build_S(K), build_S_prime(K)
        for z in (0.3 + 0.4j, -1.7 + 0.2j, 2.2 - 1.1j):
            exact = rational_apply(Sp, z)
            assert central_difference(S, z) == pytest.approx(exact, rel=1e-5, abs=1e-8)

    def test_derivative_closed_form_at_one(self):
        z = 0.4 + 0.9j
        expected = 6 * z * z * (z + 1) ** 2 / (2 * z + 1) ** 2
        assert rational_apply(build_S_prime(1), z) == pytest.approx(expected, rel=1e-12)

    def test_coefficient_columns_match_scalar_builder(self):
        Ks = np.array([0.6, -0.2j, 1.5 + 0.5j])
        num, den = s_coefficient_columns(Ks)
        for column, K in enumerate(Ks):
            S = build_S(K)
            np.testing.assert_allclose(num[: len(S.num.coeffs), column], S.num.coeffs, rtol=1e-15)
            np.testing.assert_allclose(den[: len(S.den.coeffs), column], S.den.coeffs, rtol=1e-15)


class TestG:
    @pytest.mark.parametrize("K", RATIOS)
    def test_root_images_are_fixed(self, K):
        G = build_G(K)
        assert rational_apply(G, 1) == pytest.approx(1)
        assert rational_apply(G, -1) == pytest.approx(-1)

    @pytest.mark.parametrize("K", [1, 2, 3, 0.3 - 0.7j])
    def test_u_coefficients_sum(self, K):
        assert sum(u_coefficients(K)) == pytest.approx(16 * complex(K) ** 3)

    def test_reduces_to_cubic_at_minus_one(self):
        z = 2 - 0.5j
        expected = (z ** 3 - 3 * z ** 2 + 3 * z + 3) / 4
        assert rational_apply(build_G(-1), z) == pytest.approx(expected)

    @pytest.mark.parametrize("K", [1, 2, 3, 0.5, 0.3 - 0.7j])
    def test_conjugate_to_S(self, K):
        M = MoebiusMap(1, -1)
        S, G = build_S(K), build_G(K)
        for z in (0.3 + 0.2j, -2.5 + 1j, 4j):
            conjugated = moebius_inverse(M, rational_apply(S, moebius_apply(M, z)))
            assert conjugated == pytest.approx(rational_apply(G, z), rel=1e-10)

    @pytest.mark.parametrize("K", RATIOS)
    def test_derivative_matches_central_difference(self, K):
        G, Gp = build_G(K), build_G_prime(K)
        for z in (0.3 + 0.4j, -1.7 + 0.2j, 2.2 - 1.1j):
            exact = rational_apply(Gp, z)
            assert central_difference(G, z) == pytest.approx(exact, rel=1e-5, abs=1e-8)

    def test_derivative_values(self):
        assert rational_apply(build_G_prime(2), 0) == pytest.approx(42)
        assert rational_apply(build_G_prime(3), 0) == pytest.approx(7.75)
        for K in (0.5, 2.5, -0.2j):
            expected = (K - 1) * (K - 2) / 2
            assert rational_apply(build_G_prime(K), -1) == pytest.approx(expected)
