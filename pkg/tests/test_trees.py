import math
from fractions import Fraction
from unittest.mock import patch

import mpmath
import pytest

from app.combinatorics.bivariate import BivariateEGF, UPoly, b_add, b_exp, b_mul, substitute_u
from app.combinatorics.series import TruncatedEGF, exp_series, mul
from app.combinatorics.trees import (
    INV_E,
    build_tree_bundle,
    leaf_census_from_series,
    leaf_fraction_of_census,
    mean_leaf_fraction,
    rooted_trees_explicit,
    tree_function_eval,
    tree_series,
    tree_series_at,
    tree_singular_expansion_eval,
    unrooted_singular_expansion_eval,
)
from app.oracle.trees import tree_leaf_census
from app.utils.errors import ConsistencyError, DomainError, SeriesError


@pytest.fixture(scope="module")
def bundle():
    return build_tree_bundle(30)


class TestBivariate:
    """Tests for UPoly and the BivariateEGF operations"""

    def test_upoly_trims_trailing_zeros(self):
        assert UPoly.of(1, 2, 0, 0).degree == 1
        assert UPoly.of(0, 0).is_zero()

    def test_upoly_evaluate(self):
        """1 + 2u + 3u^2 at u = 1/2"""
        assert UPoly.of(1, 2, 3).evaluate(Fraction(1, 2)) == Fraction(11, 4)

    def test_mul_and_add(self):
        """(u z)(z) = u z^2, and adding z gives z + u z^2"""
        uz = BivariateEGF.from_polys([UPoly(), UPoly.of(0, 1), UPoly()])
        z = BivariateEGF.from_polys([UPoly(), UPoly.of(1), UPoly()])
        product = b_mul(uz, z)
        assert product[2] == UPoly.of(0, 1)
        assert b_add(product, z)[1] == UPoly.of(1)

    def test_exp_substitutes_like_univariate(self):
        """exp commutes with setting u = u0"""
        a = BivariateEGF.from_polys([UPoly(), UPoly.of(0, 1), UPoly.of(Fraction(1, 2), 0, 1), UPoly.of(0, 3)])
        u0 = Fraction(2, 3)
        assert substitute_u(b_exp(a), u0) == exp_series(substitute_u(a, u0))

    def test_exp_needs_zero_constant(self):
        with pytest.raises(SeriesError):
            b_exp(BivariateEGF.from_polys([UPoly.of(1), UPoly.of(0, 1)]))


class TestTreeBundle:
    """Tests for build_tree_bundle and the univariate tree series"""

    def test_rooted_and_unrooted_counts(self, bundle):
        """n^(n-1) rooted and n^(n-2) unrooted trees"""
        assert bundle.T[4] == Fraction(64, 24)
        assert bundle.T.counts()[1:] == [n ** (n - 1) for n in range(1, 31)]
        assert bundle.t.counts()[2:] == [n ** (n - 2) for n in range(2, 31)]

    def test_tree_equation_holds(self, bundle):
        """T = z exp(T)"""
        assert exp_series(bundle.T).shift(1) == bundle.T

    def test_unrooted_quadratic_route(self, bundle):
        """t = T - T^2 / 2"""
        assert bundle.t == bundle.T - mul(bundle.T, bundle.T).scale(Fraction(1, 2))

    def test_forests(self, bundle):
        """f = exp(t); 7 forests on 3 vertices and 38 on 4"""
        assert bundle.f.counts()[:5] == [1, 1, 2, 7, 38]

    def test_leaf_marked_small_coefficients(self, bundle):
        """[z^1]T(z,u) = u, [z^2]t(z,u) = u^2/2, [z^4]t(z,u) = (12u^2 + 4u^3)/24"""
        assert bundle.T_biv[1] == UPoly.of(0, 1)
        assert bundle.t_biv[2] == UPoly.of(0, 0, Fraction(1, 2))
        assert bundle.t_biv[4] == UPoly.of(0, 0, Fraction(12, 24), Fraction(4, 24))

    def test_u_equal_one_collapses(self, bundle):
        """substitute_u(., 1) gives the univariate series"""
        assert substitute_u(bundle.T_biv, 1) == bundle.T
        assert substitute_u(bundle.t_biv, 1) == bundle.t
        assert substitute_u(bundle.f_biv, 1) == bundle.f

    def test_no_tree_without_leaves(self, bundle):
        """u = 0 kills every tree with at least one vertex"""
        assert substitute_u(bundle.t_biv, 0)[2] == 0

    def test_explicit_route_matches(self, bundle):
        """T(z,u) = (u - 1) z + T(z e^{(u-1)z})"""
        assert rooted_trees_explicit(30) == bundle.T_biv

    def test_unrooted_bivariate_relation(self, bundle):
        """t(z,u) = T + (u - 1) z T - T^2/2 checked at u = 3/4"""
        u0 = Fraction(3, 4)
        T = substitute_u(bundle.T_biv, u0)
        expected = T + T.shift(1).scale(u0 - 1) - mul(T, T).scale(Fraction(1, 2))
        assert substitute_u(bundle.t_biv, u0) == expected

    def test_order_must_be_positive(self):
        with pytest.raises(DomainError):
            build_tree_bundle(0)

    def test_route_disagreement_raises(self):
        """A corrupted explicit route is reported as a consistency failure"""
        broken = rooted_trees_explicit(5)
        polys = list(broken.coeffs)
        polys[3] = polys[3] + UPoly.of(1)
        with patch("app.combinatorics.trees.rooted_trees_explicit", return_value=BivariateEGF.from_polys(polys)):
            with pytest.raises(ConsistencyError):
                build_tree_bundle(5)

    def test_high_order_univariate(self):
        """Closed-form checks run inside tree_series up to order 200"""
        T, t, f = tree_series(200)
        assert T.counts()[200] == 200**199
        assert t.counts()[200] == 200**198
        assert f.counts()[4] == 38

    def test_routes_agree_at_order_50(self, tree_bundle_50):
        assert rooted_trees_explicit(50) == tree_bundle_50.T_biv

    @pytest.mark.slow
    def test_u_equal_one_collapses_at_order_100(self):
        big = build_tree_bundle(100)
        assert substitute_u(big.f_biv, 1) == big.f
        assert big.T.counts()[100] == 100**99


class TestScaledSubstitution:
    """Tests for tree_series_at against the bivariate route"""

    @pytest.mark.parametrize("r", [1, 2, 3, 4])
    def test_scaled_route_matches_bivariate(self, bundle, r):
        """T(2^r z, 1 - 2^-r) from the count recursion equals the scaled bivariate substitution"""
        u0 = 1 - Fraction(1, 2**r)
        at = tree_series_at(u0, 20, 2**r)
        for name in ("T", "t", "f"):
            biv = getattr(bundle, f"{name}_biv").truncate(20).scale_argument(2**r)
            assert getattr(at, name) == substitute_u(biv, u0)

    def test_unit_scale_is_plain_substitution(self, bundle):
        at = tree_series_at(Fraction(1, 3), 12)
        assert at.t == substitute_u(bundle.t_biv.truncate(12), Fraction(1, 3))


class TestLeafStatistics:
    """Tests for the leaf census read off t(z,u)"""

    @pytest.mark.parametrize("n", range(1, 9))
    def test_series_census_matches_enumeration(self, bundle, n):
        """Coefficients of u^l in n![z^n]t(z,u) count trees with l leaves"""
        assert leaf_census_from_series(bundle, n) == tree_leaf_census(n)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_mean_leaf_fraction(self, n):
        """Mean share of leaves is (1 - 1/n)^(n-2)"""
        census = tree_leaf_census(n)
        assert leaf_fraction_of_census(census, n) == mean_leaf_fraction(n)

    def test_single_vertex_tree_is_a_leaf(self, bundle):
        assert leaf_census_from_series(bundle, 1) == {1: 1}

    def test_census_outside_order(self, bundle):
        with pytest.raises(DomainError):
            leaf_census_from_series(bundle, 31)


class TestTreeFunction:
    """Tests for the numerical tree function and its singular expansions"""

    def test_endpoints(self):
        assert tree_function_eval(0) == 0
        assert tree_function_eval(INV_E) == pytest.approx(1.0, abs=1e-7)

    @pytest.mark.parametrize("x", [0.01, 0.1, 0.2, 0.3, 0.36])
    def test_against_lambert_w(self, x):
        """T(x) = -W(-x) on the principal branch"""
        expected = float(-mpmath.lambertw(-x).real)
        assert tree_function_eval(x) == pytest.approx(expected, abs=1e-12)

    def test_value_at_one_fifth(self):
        """T(0.2) = 0.2591..."""
        assert tree_function_eval(0.2) == pytest.approx(0.2591711018190737, abs=1e-12)

    def test_eta_four(self):
        """T(1 / (16 e)) = 0.02354..."""
        assert tree_function_eval(1 / (16 * math.e)) == pytest.approx(0.02354, abs=5e-6)

    @pytest.mark.parametrize("x", [-0.1, 0.4])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            tree_function_eval(x)

    def test_expansions_at_branch_point(self):
        assert tree_singular_expansion_eval(INV_E) == pytest.approx(1.0)
        assert unrooted_singular_expansion_eval(INV_E) == pytest.approx(0.5)

    def test_expansion_error_is_quadratic(self):
        """At 1 - e x = 1e-4 the rooted expansion is within 1e-7 of the Newton value"""
        x = (1 - 1e-4) / math.e
        assert abs(tree_singular_expansion_eval(x) - tree_function_eval(x)) <= 1e-7

    def test_unrooted_expansion_linear_term(self):
        """The (1 - e x) coefficient of t near 1/e is -1"""
        d = 1e-6
        x = (1 - d) / math.e
        slope = (unrooted_singular_expansion_eval(x) - 0.5) / d
        assert slope == pytest.approx(-1.0, abs=1e-2)

    def test_unrooted_expansion_matches_newton(self):
        """t = T - T^2 / 2 near the branch point"""
        x = (1 - 1e-4) / math.e
        y = tree_function_eval(x)
        assert unrooted_singular_expansion_eval(x) == pytest.approx(y - y * y / 2, abs=1e-7)

    @pytest.mark.parametrize("x", [0.1, 0.5])
    def test_expansion_domain(self, x):
        """Too far from 1/e, or beyond it"""
        with pytest.raises(DomainError):
            tree_singular_expansion_eval(x)


def test_truncated_series_matches_numeric_below_radius(bundle):
    """The order-30 series of T agrees with Newton well inside the disc"""
    assert bundle.T.evaluate(0.1) == pytest.approx(tree_function_eval(0.1), abs=1e-12)


def test_upoly_is_hashable_value():
    """Equal polynomials compare equal regardless of trailing zeros"""
    assert UPoly.of(1, 0) == UPoly.of(1)
    assert TruncatedEGF.zero(2) == TruncatedEGF.from_coeffs([0], 2)
