"""Log-linear harmonic functions of the corner-frame walk.

A term ``coeff * beta^(y1 - y2 - ... - yd) * alpha_2^(y2) * ... * alpha_d^(yd)``
solves the interior balance equation whenever its base point lies on the
characteristic surface.  Combinations of such terms built from conjugate
root pairs also satisfy the frozen-step boundary equations, which makes them
harmonic for the constrained walk.  Superposing the right pair against the
single self-conjugate bracket yields the closed-form probability that the
transient corner-frame walk ever reaches the diagonal; that probability is
the large-buffer limit of the overflow probability of the queue.

The module also provides the equal-service-rate limit, the three-station
analogue, a residual checker that certifies harmonicity numerically, a
least-squares fit of boundary data onto admissible basis functions, and the
constrained-diffusion analogue of the closed form.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .charsurface import conjugate_roots
from .errors import (
    EqualRatesError,
    InadmissibleBasisElementError,
    RankDeficientBasisError,
    UnstableRatesError,
    ZeroBetaError,
)
from .model import Point, Rates, WalkKind, constrained_step, increments

#: relative bound on stray imaginary parts when extracting real values
IMAG_RTOL = 1e-12


@dataclass(frozen=True)
class LogLinearTerm:
    """One product term; ``alphas`` has one entry per constrained axis."""

    coeff: complex
    beta: complex
    alphas: tuple[complex, ...]

    @property
    def dim(self) -> int:
        return 1 + len(self.alphas)

    def evaluate(self, y: Sequence[int]) -> complex:
        e0 = y[0] - sum(y[1:])
        val = self.coeff * self.beta ** e0
        for a, e in zip(self.alphas, y[1:]):
            val *= a ** e
        return val

    def evaluate_many(self, ys: np.ndarray) -> np.ndarray:
        e0 = ys[:, 0] - ys[:, 1:].sum(axis=1)
        val = self.coeff * np.power(complex(self.beta), e0)
        for i, a in enumerate(self.alphas):
            val = val * np.power(complex(a), ys[:, 1 + i])
        return val


@dataclass(frozen=True)
class LogLinearCombination:
    """Finite sum of log-linear terms over a common lattice dimension."""

    terms: tuple[LogLinearTerm, ...]
    dim: int = field(default=2)

    def __post_init__(self):
        for t in self.terms:
            if t.dim != self.dim:
                raise ValueError("term dimension does not match combination")

    def __add__(self, other: "LogLinearCombination") -> "LogLinearCombination":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return LogLinearCombination(self.terms + other.terms, self.dim)

    def scaled(self, c: complex) -> "LogLinearCombination":
        return LogLinearCombination(
            tuple(LogLinearTerm(t.coeff * c, t.beta, t.alphas) for t in self.terms),
            self.dim,
        )

    def evaluate(self, y: Sequence[int]) -> complex:
        return sum((t.evaluate(y) for t in self.terms), complex(0.0))

    def evaluate_many(self, ys: np.ndarray) -> np.ndarray:
        out = np.zeros(ys.shape[0], dtype=complex)
        for t in self.terms:
            out += t.evaluate_many(ys)
        return out

    def value(self, y: Sequence[int]) -> float:
        """Real evaluation; combinations built from conjugate complex pairs
        must cancel imaginary parts to relative 1e-12, which is enforced."""
        z = self.evaluate(y)
        if abs(z.imag) > IMAG_RTOL * max(abs(z), 1e-300):
            raise ValueError(f"evaluation has a stray imaginary part: {z!r}")
        return z.real

    def values(self, ys: np.ndarray) -> np.ndarray:
        z = self.evaluate_many(ys)
        bad = np.abs(z.imag) > IMAG_RTOL * np.maximum(np.abs(z), 1e-300)
        if bad.any():
            raise ValueError("evaluation has a stray imaginary part")
        return z.real

    def to_json_dict(self) -> dict:
        return {
            "terms": [
                {
                    "coeff": [t.coeff.real, t.coeff.imag],
                    "beta": [t.beta.real, t.beta.imag],
                    "alphas": [[a.real, a.imag] for a in t.alphas],
                }
                for t in self.terms
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, obj: dict) -> "LogLinearCombination":
        terms = tuple(
            LogLinearTerm(
                complex(*t["coeff"]),
                complex(*t["beta"]),
                tuple(complex(*a) for a in t["alphas"]),
            )
            for t in obj["terms"]
        )
        if not terms:
            raise ValueError("combination needs at least one term")
        return cls(terms, terms[0].dim)

    @classmethod
    def from_json(cls, text: str) -> "LogLinearCombination":
        return cls.from_json_dict(json.loads(text))


def bracket(beta: complex, alphas: Sequence[complex], coeff: complex = 1.0) -> LogLinearCombination:
    """Single-term combination beta^(y1-y2-...)*prod alpha_i^(y_{i+1})."""
    t = LogLinearTerm(complex(coeff), complex(beta), tuple(complex(a) for a in alphas))
    return LogLinearCombination((t,), t.dim)


def boundary_coeff(rates: Rates, beta: complex, alpha: complex) -> complex:
    """Coefficient mu2*(1 - beta/alpha) of a bracket's boundary defect.

    A bracket on the interior surface deviates from the axis-2 boundary
    equation by exactly this multiple of ``beta^y1``; conjugate pairs are
    combined so these defects cancel.
    """
    r = rates.normalized()
    if alpha == 0:
        raise ZeroBetaError("boundary coefficient undefined at alpha = 0")
    return r.mu[1] * (1.0 - beta / alpha)


def pair_harmonic(rates: Rates, beta: complex) -> LogLinearCombination:
    """Harmonic combination of the two brackets sharing ``beta``.

    With roots a1, a2 of the alpha-quadratic, returns
    C(beta,a2)*[beta,a1] - C(beta,a1)*[beta,a2]; swapping the roots flips
    the sign only.
    """
    pair = conjugate_roots(rates, beta)
    c1 = boundary_coeff(rates, beta, pair.alpha1)
    c2 = boundary_coeff(rates, beta, pair.alpha2)
    return LogLinearCombination(
        (
            LogLinearTerm(c2, complex(beta), (pair.alpha1,)),
            LogLinearTerm(-c1, complex(beta), (pair.alpha2,)),
        ),
        2,
    )


def _require_stable(rates: Rates) -> Rates:
    r = rates.normalized()
    if not r.stable:
        raise UnstableRatesError(f"need lam < mu_i for all stations, got {rates}")
    return r


def _check_domain_2d(y: Sequence[int]):
    if len(y) != 2:
        raise ValueError("two-station point expected")
    if not (y[0] >= y[1] >= 0):
        raise ValueError(f"point {tuple(y)} outside the wedge y1 >= y2 >= 0")


def hit_prob_2d(rates: Rates, y: Sequence[int]) -> float:
    """Probability the two-station corner-frame walk ever reaches the diagonal.

    Closed form, for distinct service rates:

        rho2^(y1-y2) + (mu2-lam)/(mu1-mu2) * rho2^(y1-y2) * rho1^y2
                     + (mu2-lam)/(mu2-mu1) * rho1^(y1-y2) * rho1^y2

    Equals 1 on the diagonal and lies in [0, 1] on the wedge.
    """
    r = _require_stable(rates)
    if r.equal_service_rates():
        raise EqualRatesError("service rates equal; use hit_prob_equal")
    _check_domain_2d(y)
    rho1, rho2 = r.rho
    mu1, mu2 = r.mu
    k, j = y[0] - y[1], y[1]
    c = (mu2 - r.lam) / (mu2 - mu1)
    return rho2**k + c * (rho1**k - rho2**k) * rho1**j


def hit_prob_2d_log(rates: Rates, y: Sequence[int]) -> float:
    """Natural log of ``hit_prob_2d``, evaluated entirely in the log domain.

    Diagnostic path: combining the three terms through their logarithms and
    signs keeps the answer finite for exponents far beyond double range,
    where the linear form underflows.  Best-effort; the linear-domain
    function is the contract.
    """
    r = _require_stable(rates)
    if r.equal_service_rates():
        raise EqualRatesError("service rates equal; use hit_prob_equal")
    _check_domain_2d(y)
    rho1, rho2 = r.rho
    mu1, mu2 = r.mu
    k, j = y[0] - y[1], y[1]
    c = (mu2 - r.lam) / (mu2 - mu1)
    terms = [
        (1.0, k * math.log(rho2)),
        (c, (k + j) * math.log(rho1)),
        (-c, k * math.log(rho2) + j * math.log(rho1)),
    ]
    m = max(l for _, l in terms)
    acc = sum(s * math.exp(l - m) for s, l in terms)
    return m + math.log(acc)


def hit_prob_equal(rates: Rates, y: Sequence[int]) -> float:
    """Diagonal-hitting probability when both service rates coincide.

    Limit of the distinct-rate formula as mu2 -> mu1:
    rho^(y1-y2) + (mu-lam)/mu * rho^y1 * (y1-y2), with rho = lam/mu.
    """
    r = rates.normalized()
    if not r.equal_service_rates():
        raise EqualRatesError("service rates differ; use hit_prob_2d")
    mu = 0.5 * (r.mu[0] + r.mu[1])
    if r.lam >= mu:
        raise UnstableRatesError("need lam < mu")
    _check_domain_2d(y)
    rho = r.lam / mu
    k = y[0] - y[1]
    return rho**k + (mu - r.lam) / mu * rho ** y[0] * k


def _three_tandem_constants(rates: Rates) -> tuple[Rates, float, float, float]:
    r = _require_stable(rates)
    if r.stations != 3:
        raise ValueError("three-station rates expected")
    lam = r.lam
    mu1, mu2, mu3 = r.mu
    for a, b in ((0, 1), (1, 2), (0, 2)):
        if r.equal_service_rates(a, b):
            raise EqualRatesError(
                f"service rates {a + 1} and {b + 1} equal; the three-station "
                "closed form needs pairwise-distinct rates"
            )
    c1 = (mu3 - lam) / (mu3 - mu1)
    c2 = (mu2 - lam) / (mu2 - mu1)
    c3 = (mu3 - lam) / (mu3 - mu2)
    return r, c1, c2, c3


def three_tandem_combination(rates: Rates) -> LogLinearCombination:
    """Seven-term harmonic combination giving the three-station hit probability.

    The cascade of boundary-defect cancellations forces the coefficients:
    within each block the two brackets sharing (beta, alpha_j) cancel their
    frozen-axis defect, and the blocks are weighted so the boundary values
    telescope to 1 on the diagonal y1 = y2 + y3.
    """
    r, c1, c2, c3 = _three_tandem_constants(rates)
    rho1, rho2, rho3 = r.rho
    T = LogLinearTerm
    terms = (
        # block anchored at beta = rho3
        T(1.0, rho3, (1.0, 1.0)),
        T(-c3, rho3, (1.0, rho2)),
        T(-c1 * c2, rho3, (rho1, rho1)),
        T(c3 * c2, rho3, (rho1, rho2)),
        # block anchored at beta = rho2, weighted by c3
        T(c3, rho2, (1.0, rho2)),
        T(-c3 * c2, rho2, (rho1, rho2)),
        # self-conjugate bracket, weighted by c1*c2
        T(c1 * c2, rho1, (rho1, rho1)),
    )
    return LogLinearCombination(terms, 3)


def hit_prob_3d(rates: Rates, y: Sequence[int]) -> float:
    """Probability the three-station corner-frame walk reaches the diagonal.

    Evaluates the seven-term combination directly in real arithmetic.
    Requires stability, pairwise-distinct service rates, and
    y1 >= y2 + y3 with y2, y3 >= 0.
    """
    r, c1, c2, c3 = _three_tandem_constants(rates)
    if len(y) != 3:
        raise ValueError("three-station point expected")
    y1, y2, y3 = y
    if not (y2 >= 0 and y3 >= 0 and y1 >= y2 + y3):
        raise ValueError(f"point {tuple(y)} outside the wedge y1 >= y2 + y3 >= 0")
    rho1, rho2, rho3 = r.rho
    u = y1 - y2 - y3
    # telescoped grouping of the seven terms: every non-leading factor
    # vanishes identically on the diagonal u = 0, so the value there is 1
    return (
        rho3**u
        + c3 * rho2**y3 * (rho2**u - rho3**u)
        + c1 * c2 * rho1 ** (y2 + y3) * (rho1**u - rho3**u)
        + c3 * c2 * rho1**y2 * rho2**y3 * (rho3**u - rho2**u)
    )


def hit_prob(rates: Rates, y: Sequence[int]) -> float:
    """Dispatch to the closed form matching the dimension and rate pattern."""
    r = rates.normalized()
    if len(y) == 3:
        return hit_prob_3d(r, y)
    if r.equal_service_rates():
        return hit_prob_equal(r, y)
    return hit_prob_2d(r, y)


def hit_comb_2d(rates: Rates) -> LogLinearCombination:
    """The two-station closed form as a three-term combination."""
    r = _require_stable(rates)
    if r.equal_service_rates():
        raise EqualRatesError("service rates equal; no log-linear form")
    rho1, rho2 = r.rho
    mu1, mu2 = r.mu
    c = (mu2 - r.lam) / (mu2 - mu1)
    terms = (
        LogLinearTerm(1.0, rho2, (1.0,)),
        LogLinearTerm(-c, rho2, (rho1,)),
        LogLinearTerm(c, rho1, (rho1,)),
    )
    return LogLinearCombination(terms, 2)


# ---------------------------------------------------------------------------
# harmonicity residuals


@dataclass(frozen=True)
class HarmonicityReport:
    """Worst absolute balance-equation residuals, split by boundary stratum.

    ``max_boundary_residual`` is keyed by the sorted tuple of frozen axes
    (1-based), e.g. (2,) for the axis-2 face and (2, 3) for the corner.
    """

    max_interior_residual: float
    max_boundary_residual: dict[tuple[int, ...], float]
    points_checked: int

    @property
    def max_residual(self) -> float:
        vals = [self.max_interior_residual, *self.max_boundary_residual.values()]
        return max(vals)

    def is_harmonic(self, tol: float = 1e-12) -> bool:
        return self.max_residual <= tol


def default_sample_box(dim: int) -> list[Point]:
    """Exhaustive residual sample; log-linear forms decay along rays, so a
    modest box is as informative as a large one."""
    pts: list[Point] = []
    if dim == 2:
        for y2 in range(0, 31):
            for gap in range(0, 61):
                pts.append((y2 + gap, y2))
    elif dim == 3:
        for y2 in range(0, 13):
            for y3 in range(0, 13):
                for gap in range(0, 26):
                    pts.append((y2 + y3 + gap, y2, y3))
    else:
        raise ValueError("dim must be 2 or 3")
    return pts


def harmonicity_report(
    rates: Rates,
    f: Union[LogLinearCombination, Callable[[Point], float]],
    sample: Sequence[Point] | None = None,
    kind: WalkKind = WalkKind.LIMIT_Y,
) -> HarmonicityReport:
    """Residual |f(y) - sum_v p(v) f(step(y, v))| over a sample of points.

    Maxima are reported separately per boundary stratum (which axes freeze
    at the point).  A function passes as harmonic on the sample iff every
    stratum's maximum is at or below tolerance.
    """
    r = rates.normalized()
    if isinstance(f, LogLinearCombination):
        # residuals are checked in complex arithmetic; real extraction is a
        # concern of evaluation, not of harmonicity
        dim = f.dim
        evaluate = f.evaluate_many
    else:
        dim = r.stations
        evaluate = lambda ys: np.array([f(tuple(p)) for p in ys])  # noqa: E731
    if sample is None:
        sample = default_sample_box(dim)
    ys = np.asarray(list(sample), dtype=np.int64)
    if ys.ndim != 2 or ys.shape[1] != dim:
        raise ValueError("sample dimension mismatch")
    if r.stations != dim:
        raise ValueError(
            f"rates have {r.stations} stations, function/sample is {dim}-dimensional"
        )
    incs = increments(kind, r)

    resid = np.asarray(evaluate(ys), dtype=complex)
    lo = 0 if kind is WalkKind.CONSTRAINED_X else 1
    frozen_axes = [np.zeros(len(ys), dtype=bool) for _ in range(dim)]
    for v, p in incs:
        stepped = ys + np.asarray(v, dtype=np.int64)
        frozen = (stepped[:, lo:] < 0).any(axis=1)
        for ax in range(lo, dim):
            frozen_axes[ax] |= stepped[:, ax] < 0
        stepped[frozen] = ys[frozen]
        resid -= p * evaluate(stepped)

    resid = np.abs(resid)
    strata = {}
    interior = np.ones(len(ys), dtype=bool)
    for mask_id in range(1, 2**dim):
        axes = tuple(ax + 1 for ax in range(dim) if mask_id & (1 << ax))
        sel = np.ones(len(ys), dtype=bool)
        for ax in range(dim):
            want = bool(mask_id & (1 << ax))
            sel &= frozen_axes[ax] == want
        if sel.any():
            strata[axes] = float(resid[sel].max())
            interior &= ~sel
    max_int = float(resid[interior].max()) if interior.any() else 0.0
    return HarmonicityReport(max_int, strata, len(ys))


# ---------------------------------------------------------------------------
# boundary fit (superposition weights from least squares)


BasisElement = Union[complex, LogLinearCombination]


@dataclass(frozen=True)
class BoundaryFit:
    weights: tuple[complex, ...]
    max_boundary_error: float
    points_used: int


def _admissible(comb: LogLinearCombination, label: complex):
    for t in comb.terms:
        if abs(t.beta) >= 1.0:
            raise InadmissibleBasisElementError(label, f"|beta|={abs(t.beta):.6g} >= 1")
        if any(abs(a) > 1.0 + 1e-15 for a in t.alphas):
            worst = max(abs(a) for a in t.alphas)
            raise InadmissibleBasisElementError(label, f"|alpha|={worst:.6g} > 1")


def fit_boundary(
    rates: Rates,
    basis: Sequence[BasisElement],
    target: Callable[[Point], float] | Sequence[float],
    samples: Sequence[Point],
) -> BoundaryFit:
    """Least-squares weights matching boundary data with harmonic basis terms.

    Basis entries are either a complex ``beta`` (expanded through the
    conjugate-pair construction) or an explicit combination; each must pass
    the modulus conditions |beta| < 1 and |alpha_i| <= 1, which guarantee
    the fitted superposition reproduces its own boundary data everywhere in
    the wedge.  The returned maximum boundary deviation bounds the pointwise
    error made when the superposition stands in for the target's hitting
    expectation.

    Solved through an orthogonal decomposition (SVD-backed lstsq), not the
    normal equations, so nearly collinear bases degrade gracefully until the
    rank check trips.
    """
    if not basis:
        raise ValueError("empty basis")
    if not samples:
        raise ValueError("no boundary samples")
    combs: list[LogLinearCombination] = []
    for b in basis:
        if isinstance(b, LogLinearCombination):
            _admissible(b, complex(b.terms[0].beta))
            combs.append(b)
        else:
            comb = pair_harmonic(rates, complex(b))
            _admissible(comb, complex(b))
            combs.append(comb)

    ys = np.asarray(list(samples), dtype=np.int64)
    A = np.column_stack([c.evaluate_many(ys) for c in combs])
    if callable(target):
        t = np.array([target(tuple(p)) for p in ys], dtype=complex)
    else:
        t = np.asarray(target, dtype=complex)
        if t.shape[0] != len(ys):
            raise ValueError("target length does not match samples")
    # complex powers pick up O(eps) imaginary dust even for real bases; shed it
    scale = 1.0 + float(np.abs(A.real).max())
    if np.abs(A.imag).max() <= 1e-13 * scale and np.abs(t.imag).max() == 0.0:
        A = A.real
        t = t.real
    w, _, rank, _ = np.linalg.lstsq(A, t, rcond=None)
    if rank < len(combs):
        raise RankDeficientBasisError(
            f"basis matrix rank {rank} < {len(combs)} basis elements"
        )
    err = float(np.abs(A @ w - t).max())
    return BoundaryFit(tuple(complex(x) for x in np.atleast_1d(w)), err, len(ys))


# ---------------------------------------------------------------------------
# constrained-diffusion analogue


def diffusion_hit_prob(a: float, b: float, x: Sequence[float]) -> float:
    """Diagonal-hitting probability of the drifted constrained diffusion.

    Three-exponential analogue of the lattice closed form for the diffusion
    with drift ((2a+b), (a-b)) and covariance [[2,1],[1,2]]/3 on the upper
    half-plane, reflected at x2 = 0:

        e^{-3(a+2b)(x1-x2)} + (a+2b)/(a-b) e^{-3(a+2b)(x1-x2)} e^{-3(2a+b)x2}
                            - (a+2b)/(a-b) e^{-3(2a+b)x1}

    Annihilated by the generator, with vanishing normal derivative on the
    reflecting axis, and equal to 1 on the diagonal.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if abs(a - b) <= 1e-12 * (a + b):
        raise EqualRatesError("a = b is degenerate for this form")
    x1, x2 = x
    if not (x1 >= x2 >= 0):
        raise ValueError("need x1 >= x2 >= 0")
    c = (a + 2.0 * b) / (a - b)
    return (
        math.exp(-3.0 * (a + 2.0 * b) * (x1 - x2))
        + c * math.exp(-3.0 * (a + 2.0 * b) * (x1 - x2) - 3.0 * (2.0 * a + b) * x2)
        - c * math.exp(-3.0 * (2.0 * a + b) * x1)
    )


def diffusion_generator_residual(
    a: float, b: float, x: Sequence[float], h: float = 1e-4
) -> float:
    """Central finite-difference evaluation of the generator at ``x``.

    L f = <grad f, (2a+b, a-b)> + (1/6) (2 f_11 + 2 f_12 + 2 f_22);
    vanishes identically on the closed form, so the returned value is a
    pure discretization/roundoff residual.
    """
    def f(p1: float, p2: float) -> float:
        return diffusion_hit_prob(a, b, (p1, p2))

    x1, x2 = x
    fx = f(x1, x2)
    f1 = (f(x1 + h, x2) - f(x1 - h, x2)) / (2 * h)
    f2 = (f(x1, x2 + h) - f(x1, x2 - h)) / (2 * h)
    f11 = (f(x1 + h, x2) - 2 * fx + f(x1 - h, x2)) / (h * h)
    f22 = (f(x1, x2 + h) - 2 * fx + f(x1, x2 - h)) / (h * h)
    f12 = (
        f(x1 + h, x2 + h) - f(x1 + h, x2 - h) - f(x1 - h, x2 + h) + f(x1 - h, x2 - h)
    ) / (4 * h * h)
    return (2 * a + b) * f1 + (a - b) * f2 + (2 * f11 + 2 * f12 + 2 * f22) / 6.0


def diffusion_normal_derivative(
    a: float, b: float, x1: float, h: float = 1e-4
) -> float:
    """d/dx2 of the closed form across the reflecting axis at (x1, 0).

    The form extends smoothly to x2 < 0, so a central difference applies;
    the reflection condition makes this vanish.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if abs(a - b) <= 1e-12 * (a + b):
        raise EqualRatesError("a = b is degenerate for this form")
    c = (a + 2.0 * b) / (a - b)

    def f(p1: float, p2: float) -> float:
        return (
            math.exp(-3.0 * (a + 2.0 * b) * (p1 - p2))
            + c * math.exp(-3.0 * (a + 2.0 * b) * (p1 - p2) - 3.0 * (2.0 * a + b) * p2)
            - c * math.exp(-3.0 * (2.0 * a + b) * p1)
        )

    return (f(x1, h) - f(x1, -h)) / (2 * h)
