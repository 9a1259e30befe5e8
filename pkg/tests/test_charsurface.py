import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tandemq import (
    DegenerateDiscriminantError,
    Rates,
    ZeroBetaError,
    char_poly,
    char_poly_boundary,
    conjugate_alpha,
    conjugate_roots,
    discriminant,
    hamiltonian,
    real_section,
    surface_intersections,
)
from conftest import random_stable_rates


class TestCharPoly:
    def test_unit_point(self, rates5):
        assert char_poly(rates5, 1.0, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_self_conjugate_point(self, rates5):
        rho1 = rates5.rho[0]
        assert char_poly(rates5, rho1, rho1) == pytest.approx(1.0, abs=1e-15)

    def test_pair_point(self, rates5):
        rho1, rho2 = rates5.rho
        assert char_poly(rates5, rho2, rho1) == pytest.approx(1.0, abs=1e-15)

    def test_zero_arguments_rejected(self, rates5):
        with pytest.raises(ZeroBetaError):
            char_poly(rates5, 0.0, 1.0)
        with pytest.raises(ZeroBetaError):
            char_poly(rates5, 1.0, 0.0)

    def test_boundary_poly_on_intersection(self, rates5):
        rho1 = rates5.rho[0]
        assert char_poly_boundary(rates5, rho1, rho1) == pytest.approx(1.0, abs=1e-15)
        assert char_poly_boundary(rates5, 1.0, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_boundary_poly_identity(self, rates5, rng):
        # p2 = p - mu2 (beta/alpha - 1), pointwise
        mu2 = rates5.normalized().mu[1]
        for _ in range(300):
            beta = complex(*rng.uniform(0.1, 1.5, 2))
            alpha = complex(*rng.uniform(0.1, 1.5, 2))
            lhs = char_poly_boundary(rates5, beta, alpha)
            rhs = char_poly(rates5, beta, alpha) - mu2 * (beta / alpha - 1.0)
            assert abs(lhs - rhs) <= 1e-14


class TestDiscriminant:
    def test_at_rho2_equals_square(self, rates5):
        r = rates5.normalized()
        assert discriminant(r, r.rho[1]) == pytest.approx((r.mu[0] - r.lam) ** 2, rel=1e-13)

    def test_at_rho2_random_rates(self, rng):
        for _ in range(100):
            r = random_stable_rates(rng).normalized()
            got = discriminant(r, r.rho[1])
            assert abs(got - (r.mu[0] - r.lam) ** 2) <= 1e-12

    def test_direct_formula(self):
        r = Rates(0.1, (0.5, 0.4))
        beta = 0.25
        want = (0.1 / beta - 1.0) ** 2 - 4 * 0.5 * 0.4 * beta
        assert discriminant(r, beta) == pytest.approx(want, rel=1e-15)


class TestConjugateRoots:
    def test_known_pair_at_rho2(self, rates5):
        r = rates5.normalized()
        pair = conjugate_roots(r, r.rho[1])
        assert pair.alpha1 == pytest.approx(1.0, abs=1e-13)
        assert pair.alpha2 == pytest.approx(r.rho[0], abs=1e-13)

    def test_roots_at_rho1(self, rates5):
        r = rates5.normalized()
        pair = conjugate_roots(r, r.rho[0])
        got = sorted([pair.alpha1.real, pair.alpha2.real])
        want = sorted([r.rho[0], r.mu[1] / r.mu[0]])
        assert got == pytest.approx(want, rel=1e-12)

    def test_residual_and_product_identity(self, rates5, rng):
        r = rates5.normalized()
        mu1, mu2 = r.mu
        checked = 0
        while checked < 1000:
            radius = math.sqrt(rng.uniform(0.1**2, 0.95**2))
            angle = rng.uniform(0, 2 * math.pi)
            beta = radius * cmath.exp(1j * angle)
            try:
                pair = conjugate_roots(r, beta)
            except DegenerateDiscriminantError:
                continue
            checked += 1
            assert abs(char_poly(r, beta, pair.alpha1) - 1.0) <= 1e-12
            assert abs(char_poly(r, beta, pair.alpha2) - 1.0) <= 1e-12
            assert abs(pair.alpha1 * pair.alpha2 - mu2 * beta / mu1) <= 1e-12

    def test_degenerate_discriminant_rejected(self, rates5):
        r = rates5.normalized()
        lam, mu1, mu2 = r.lam, r.mu[0], r.mu[1]
        # positive root of the discriminant: companion-matrix seed, Newton polish
        coeffs = np.polynomial.Polynomial([lam**2, -2 * lam, 1.0, -4 * mu1 * mu2])
        roots = [z for z in coeffs.roots() if abs(z.imag) < 1e-12 and z.real > 0]
        beta0 = float(roots[0].real)
        for _ in range(4):
            d = (lam / beta0 - 1.0) ** 2 - 4 * mu1 * mu2 * beta0
            dprime = 2 * (lam / beta0 - 1.0) * (-lam / beta0**2) - 4 * mu1 * mu2
            beta0 -= d / dprime
        assert abs(discriminant(r, beta0)) < 1e-13
        with pytest.raises(DegenerateDiscriminantError):
            conjugate_roots(r, beta0)

    def test_zero_beta_rejected(self, rates5):
        with pytest.raises(ZeroBetaError):
            conjugate_roots(rates5, 0.0)


class TestConjugateAlpha:
    def test_known_images(self, rates5):
        r = rates5.normalized()
        rho1, rho2 = r.rho
        assert conjugate_alpha(r, rho2, 1.0) == pytest.approx(rho1, rel=1e-14)
        assert conjugate_alpha(r, rho1, rho1) == pytest.approx(r.mu[1] / r.mu[0], rel=1e-14)

    @given(
        st.complex_numbers(min_magnitude=0.05, max_magnitude=2.0, allow_infinity=False, allow_nan=False),
        st.complex_numbers(min_magnitude=0.05, max_magnitude=2.0, allow_infinity=False, allow_nan=False),
    )
    def test_involution(self, beta, alpha):
        r = Rates(0.1, (0.4, 0.5))
        once = conjugate_alpha(r, beta, alpha)
        twice = conjugate_alpha(r, beta, once)
        assert cmath.isclose(twice, alpha, rel_tol=1e-12)


class TestIntersections:
    def test_listed_points(self):
        r = Rates(0.1, (0.5, 0.4))
        pts = surface_intersections(r)
        coords = {(p.beta, p.alpha) for p in pts}
        assert (0, 0) in coords
        assert (1, 1) in coords
        assert any(
            abs(b - 0.2) < 1e-15 and abs(a - 0.2) < 1e-15 for b, a in coords
        )

    def test_nonzero_points_on_both_surfaces(self, rng):
        for _ in range(20):
            r = random_stable_rates(rng)
            for p in surface_intersections(r):
                if p.beta == 0:
                    continue
                assert p.on_surface(r)
                assert p.on_boundary_surface(r)


class TestHamiltonian:
    def test_zero_at_origin(self, rates5):
        assert hamiltonian(rates5, (0.0, 0.0)) == pytest.approx(0.0, abs=1e-15)

    def test_matches_char_poly_substitution(self, rates5, rng):
        for _ in range(300):
            q = rng.uniform(-5, 5, 2)
            h = hamiltonian(rates5, q)
            p = char_poly(rates5, math.exp(q[0]), math.exp(q[0] - q[1]))
            assert abs(h + math.log(p.real)) <= 1e-12

    def test_frozen_increments_direct_sum(self, rates5):
        r = rates5.normalized()
        gamma = min(-math.log(x) for x in r.rho)
        q = (-gamma, 0.0)
        want = -math.log(
            r.lam * math.exp(gamma) + r.mu[0] * math.exp(-gamma) + r.mu[1]
        )
        assert hamiltonian(rates5, q) == pytest.approx(want, rel=1e-14)
        frozen_all = -math.log(r.lam * math.exp(gamma) + r.mu[0] + r.mu[1])
        assert hamiltonian(rates5, q, frozen={1, 2}) == pytest.approx(frozen_all, rel=1e-14)


class TestRealSection:
    def test_contains_self_conjugate_point(self):
        r = Rates(0.1, (0.5, 0.4))
        pts = real_section(r, [0.2])
        betas = [b for _, b in pts]
        assert any(abs(b - 0.2) < 1e-12 for b in betas)
        assert any(abs(b - 0.25) < 1e-12 for b in betas)

    def test_contains_unit_point(self, rates5):
        pts = real_section(rates5, [1.0])
        assert any(abs(b - 1.0) < 1e-12 for _, b in pts)

    def test_all_points_on_surface(self, rates5):
        grid = np.linspace(0.05, 1.3, 101)
        pts = real_section(rates5, [float(a) for a in grid])
        assert pts, "expected real points over the sampled range"
        for a, b in pts:
            assert abs(char_poly(rates5, b, a) - 1.0) <= 1e-10

    def test_grid_order_preserved(self, rates5):
        pts = real_section(rates5, [0.4, 0.3])
        alphas = [a for a, _ in pts]
        assert len(alphas) == 4
        assert alphas == sorted(alphas, reverse=True)

    def test_rejects_nonpositive_alpha(self, rates5):
        with pytest.raises(ValueError):
            real_section(rates5, [0.0])
