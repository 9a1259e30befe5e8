"""Characteristic surface of the corner-frame walk.

The generating identity of the two-station corner-frame walk assigns to a
point ``(beta, alpha)`` in C^2 the value

    p(beta, alpha) = lam/beta + mu1*alpha + mu2*beta/alpha.

Its 1-level set is the (interior) characteristic surface: every point on it
yields a log-linear function harmonic for the unconstrained walk.  Fixing
``beta`` makes ``p = 1`` a quadratic in ``alpha``, so surface points come in
conjugate pairs sharing ``beta`` with product ``alpha1*alpha2 = mu2*beta/mu1``.
A second surface, with the service-2 increment frozen, governs the boundary
equation on the axis ``y(2) = 0``:

    p2(beta, alpha) = lam/beta + mu1*alpha + mu2.

Everything here is a pure function of immutable inputs; rates are normalized
on entry so that the level-set value 1 is meaningful.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateDiscriminantError, ZeroBetaError
from .model import Rates

#: membership tolerance for the level sets
SURFACE_TOL = 1e-12


@dataclass(frozen=True)
class SurfacePoint:
    beta: complex
    alpha: complex

    def on_surface(self, rates: Rates, tol: float = SURFACE_TOL) -> bool:
        return abs(char_poly(rates, self.beta, self.alpha) - 1.0) <= tol

    def on_boundary_surface(self, rates: Rates, tol: float = SURFACE_TOL) -> bool:
        return abs(char_poly_boundary(rates, self.beta, self.alpha) - 1.0) <= tol


@dataclass(frozen=True)
class ConjugatePair:
    """Two surface points sharing ``beta``; alpha1 has the larger modulus."""

    beta: complex
    alpha1: complex
    alpha2: complex

    def points(self) -> tuple[SurfacePoint, SurfacePoint]:
        return SurfacePoint(self.beta, self.alpha1), SurfacePoint(self.beta, self.alpha2)


def _two_station(rates: Rates) -> Rates:
    if rates.stations != 2:
        raise ValueError("characteristic-surface operations are two-station")
    return rates.normalized()


def char_poly(rates: Rates, beta: complex, alpha: complex) -> complex:
    """Interior characteristic value lam/beta + mu1*alpha + mu2*beta/alpha.

    Rational in (beta, alpha); multiply by alpha*beta for the polynomial
    form when solving.  Undefined at beta = 0 or alpha = 0.
    """
    r = _two_station(rates)
    if beta == 0:
        raise ZeroBetaError("char_poly undefined at beta = 0")
    if alpha == 0:
        raise ZeroBetaError("char_poly undefined at alpha = 0")
    return r.lam / beta + r.mu[0] * alpha + r.mu[1] * beta / alpha


def char_poly_boundary(rates: Rates, beta: complex, alpha: complex) -> complex:
    """Boundary characteristic value lam/beta + mu1*alpha + mu2 (axis 2 frozen)."""
    r = _two_station(rates)
    if beta == 0:
        raise ZeroBetaError("char_poly_boundary undefined at beta = 0")
    return r.lam / beta + r.mu[0] * alpha + r.mu[1]


def discriminant(rates: Rates, beta: complex) -> complex:
    """Discriminant (lam/beta - 1)^2 - 4*mu1*mu2*beta of the alpha-quadratic."""
    r = _two_station(rates)
    if beta == 0:
        raise ZeroBetaError("discriminant undefined at beta = 0")
    return (r.lam / beta - 1.0) ** 2 - 4.0 * r.mu[0] * r.mu[1] * beta


def conjugate_roots(rates: Rates, beta: complex) -> ConjugatePair:
    """Solve mu1*a^2 + (lam/beta - 1)*a + mu2*beta = 0 for the conjugate pair.

    Uses the cancellation-safe form: the larger-magnitude root comes from the
    quadratic formula with the sign matched to the linear coefficient, the
    other from the root product.  Roots are returned ordered by descending
    modulus (ties by real, then imaginary part).
    """
    r = _two_station(rates)
    if beta == 0:
        raise ZeroBetaError("conjugate roots undefined at beta = 0")
    a = r.mu[0]
    b = r.lam / beta - 1.0
    c = r.mu[1] * beta
    disc = b * b - 4.0 * a * c
    if abs(disc) < SURFACE_TOL * (1.0 + abs(b) ** 2):
        raise DegenerateDiscriminantError(
            f"discriminant {disc!r} numerically zero at beta={beta!r}"
        )
    root = cmath.sqrt(disc)
    if (b.conjugate() * root).real < 0:
        root = -root
    q = -0.5 * (b + root)
    alphas = sorted(
        (q / a, c / q),
        key=lambda z: (-abs(z), -z.real, -z.imag),
    )
    return ConjugatePair(beta, alphas[0], alphas[1])


def conjugate_alpha(rates: Rates, beta: complex, alpha: complex) -> complex:
    """Partner root mu2*beta/(mu1*alpha); applying it twice returns alpha."""
    r = _two_station(rates)
    if beta == 0 or alpha == 0:
        raise ZeroBetaError("conjugate undefined at beta = 0 or alpha = 0")
    return r.mu[1] * beta / (r.mu[0] * alpha)


def surface_intersections(rates: Rates) -> tuple[SurfacePoint, ...]:
    """The three common points of the interior and boundary surfaces.

    These are (0,0), (1,1) and (rho1, rho1); the first lies on the projective
    closure only, so membership checks apply to the nonzero two.
    """
    r = _two_station(rates)
    rho1 = r.rho[0]
    return (
        SurfacePoint(0.0, 0.0),
        SurfacePoint(1.0, 1.0),
        SurfacePoint(rho1, rho1),
    )


def hamiltonian(rates: Rates, q: Sequence[float], frozen: Iterable[int] = ()) -> float:
    """Log-moment Hamiltonian of the queue-length walk with frozen increments.

    H_a(q) = -log( sum_{i not in a} p_i e^{-<v_i, q>} + sum_{i in a} p_i )
    over the increments v_0=(1,0), v_1=(-1,1), v_2=(0,-1) with weights
    lam, mu1, mu2.  ``frozen`` is a subset of {1, 2} naming service
    increments contributing without the exponential tilt.  With nothing
    frozen this equals -log p(e^{q1}, e^{q1-q2}).
    """
    r = _two_station(rates)
    frozen = frozenset(frozen)
    if not frozen <= {1, 2}:
        raise ValueError("frozen must be a subset of {1, 2}")
    vs = [(1.0, 0.0), (-1.0, 1.0), (0.0, -1.0)]
    ps = (r.lam,) + r.mu
    total = 0.0
    for i, (v, p) in enumerate(zip(vs, ps)):
        if i in frozen:
            total += p
        else:
            total += p * math.exp(-(v[0] * q[0] + v[1] * q[1]))
    return -math.log(total)


def real_section(
    rates: Rates, alpha_grid: Sequence[float], tol: float = 1e-10
) -> list[tuple[float, float]]:
    """Real points (alpha, beta) of the surface over a grid of alpha values.

    For each alpha the level-set equation is the exact quadratic
    mu2*beta^2 + (mu1*alpha^2 - alpha)*beta + lam*alpha = 0; both real roots
    are emitted (ascending), in grid order.  Grid values must be positive;
    alphas whose discriminant is negative contribute nothing.
    """
    r = _two_station(rates)
    lam, mu1, mu2 = r.lam, r.mu[0], r.mu[1]
    out: list[tuple[float, float]] = []
    for alpha in alpha_grid:
        if alpha <= 0:
            raise ValueError("alpha grid values must be positive")
        b = mu1 * alpha * alpha - alpha
        disc = b * b - 4.0 * mu2 * lam * alpha
        if disc < 0:
            continue
        root = math.sqrt(disc)
        qq = -0.5 * (b + math.copysign(root, b)) if b != 0 else 0.5 * root
        betas = sorted({qq / mu2, (lam * alpha) / qq}) if qq != 0 else [0.0]
        for beta in betas:
            if beta != 0 and abs(char_poly(r, beta, alpha) - 1.0) <= tol:
                out.append((float(alpha), float(beta)))
    return out
