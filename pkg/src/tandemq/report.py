"""Sweeps, decay-rate reports, and the bundled verification suite.

These are the operations behind the CLI: compare the exact simplex field
against the closed-form limit over a grid, report the large-deviations
decay rate and its gradient data, and run the package's cross-checks as a
machine-readable pass/fail report.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import charsurface as cs
from . import harmonic as hm
from .errors import EqualRatesError, UnstableRatesError
from .exactsolve import hit_prob_within_curve, solve_overflow_grid
from .model import Point, Rates, Region, classify, to_corner_frame

FLOAT_FMT = "%.17g"
SWEEP_HEADER = ["x1", "x2", "n", "p_exact", "w_star", "v_n", "w_n", "rel_err"]


@dataclass(frozen=True)
class SweepRow:
    """One grid point of the exact-versus-approximation comparison.

    ``v_n`` and ``w_n`` are the -(1/n)log transforms of the exact and
    closed-form values; ``rel_err`` is the relative error on probabilities,
    (w_star - p_exact) / p_exact.
    """

    x1: int
    x2: int
    n: int
    p_exact: float
    w_star: float
    v_n: float
    w_n: float
    rel_err: float


def sweep(
    rates: Rates,
    n: int,
    stride: int = 1,
    tol: float = 1e-12,
    max_sweeps: int = 10**6,
) -> list[SweepRow]:
    """Rows for every interior grid point on the stride lattice, row-major.

    The exact field is solved once; the closed form is evaluated at the
    corner-frame image of each point.
    """
    r = rates.normalized()
    if not r.stable:
        raise UnstableRatesError("sweep needs stable rates")
    if r.equal_service_rates():
        raise EqualRatesError("sweep compares against the distinct-rate closed form")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    grid = solve_overflow_grid(rates, n, tol=tol, max_sweeps=max_sweeps)
    rows: list[SweepRow] = []
    for x1 in range(0, n + 1, stride):
        for x2 in range(0, n + 1 - x1, stride):
            if classify(n, (x1, x2)) is not Region.INTERIOR:
                continue
            p = grid.value((x1, x2))
            w = hm.hit_prob_2d(r, to_corner_frame(n, (x1, x2)))
            rows.append(
                SweepRow(
                    x1,
                    x2,
                    n,
                    p,
                    w,
                    -math.log(p) / n,
                    -math.log(w) / n,
                    (w - p) / p,
                )
            )
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow(
            [row.x1, row.x2, row.n]
            + [
                FLOAT_FMT % v
                for v in (row.p_exact, row.w_star, row.v_n, row.w_n, row.rel_err)
            ]
        )
    return buf.getvalue()


def sweep_to_json(rows: Sequence[SweepRow]) -> str:
    return json.dumps([row.__dict__ for row in rows])


@dataclass(frozen=True)
class LdRateReport:
    """Large-deviations data: decay exponent gamma, the position-dependent
    rate, and the two gradients defining its kink."""

    gamma: float
    v_of_x: float
    r1: tuple[float, float]
    r3: tuple[float, float]

    def to_json_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "v_of_x": self.v_of_x,
            "r1": list(self.r1),
            "r3": list(self.r3),
        }


def ld_rate(rates: Rates, x: Sequence[float]) -> LdRateReport:
    """Decay rate of the overflow probability from scaled start ``x``.

    gamma = min(-log rho1, -log rho2) is the from-the-origin exponent; the
    position-dependent rate is the min of two affine pieces with gradients
    r1 = -gamma (1,0) and r3 = log(rho2) (1,1), and never exceeds gamma on
    the open unit simplex.
    """
    r = rates.normalized()
    if not r.stable:
        raise UnstableRatesError("decay rates need stable rates")
    if not (0.0 < x[0] + x[1] < 1.0) or min(x) < 0:
        raise ValueError("x must lie in the open unit simplex")
    rho1, rho2 = r.rho
    gamma = min(-math.log(rho1), -math.log(rho2))
    r1 = (-gamma, 0.0)
    r3 = (math.log(rho2), math.log(rho2))
    v = min(
        -math.log(rho1) + r1[0] * x[0] + r1[1] * x[1],
        -math.log(rho2) + r3[0] * x[0] + r3[1] * x[1],
    )
    return LdRateReport(gamma, v, r1, r3)


# ---------------------------------------------------------------------------
# verification bundle


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    skipped: bool = False


@dataclass(frozen=True)
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed or c.skipped for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.__dict__ for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def verify(rates: Rates, seed: int = 0) -> VerificationReport:
    """Run the package's invariant suite against the given rates.

    Covers stability, surface/root identities, harmonicity residuals, the
    finite-horizon bracket, and the boundary-fit recovery.  Checks that do
    not apply (e.g. the distinct-rate closed form under equal rates) are
    reported as skipped with a notice.
    """
    checks: list[CheckResult] = []
    r = rates.normalized()
    rng = np.random.default_rng(seed)

    stable = r.stable
    checks.append(
        CheckResult(
            "stability",
            stable,
            f"lam={r.lam:.6g}, mu={tuple(round(m, 6) for m in r.mu)}",
        )
    )

    tot = r.total
    checks.append(CheckResult("normalization", abs(tot - 1.0) <= 4 * math.ulp(1.0), f"total={tot!r}"))

    if r.stations == 3:
        if stable:
            try:
                comb = hm.three_tandem_combination(r)
            except EqualRatesError as e:
                checks.append(
                    CheckResult("three_station_harmonic", True, f"skipped: {e}", skipped=True)
                )
            else:
                rep = hm.harmonicity_report(r, comb)
                checks.append(
                    CheckResult(
                        "three_station_harmonic",
                        rep.max_residual <= 1e-12,
                        f"max residual {rep.max_residual:.2e} over {rep.points_checked} points",
                    )
                )
        else:
            checks.append(
                CheckResult("three_station_harmonic", True, "skipped: unstable rates", skipped=True)
            )
        return VerificationReport(checks)

    # characteristic-surface identities on random samples
    ok = True
    detail = ""
    for _ in range(200):
        beta = complex(*rng.uniform(-1, 1, 2))
        alpha = complex(*rng.uniform(-1, 1, 2))
        if abs(beta) < 0.05 or abs(alpha) < 0.05:
            continue
        lhs = cs.char_poly_boundary(r, beta, alpha)
        rhs = cs.char_poly(r, beta, alpha) - r.mu[1] * (beta / alpha - 1.0)
        if abs(lhs - rhs) > 1e-13:
            ok = False
            detail = f"boundary-poly identity off by {abs(lhs - rhs):.2e}"
            break
    for _ in range(200):
        q = rng.uniform(-5, 5, 2)
        h = cs.hamiltonian(r, q)
        p = cs.char_poly(r, math.exp(q[0]), math.exp(q[0] - q[1]))
        if abs(h + math.log(abs(p))) > 1e-12:
            ok = False
            detail = f"hamiltonian correspondence off at q={q}"
            break
    checks.append(CheckResult("surface_identities", ok, detail))

    if stable:
        ok = True
        detail = ""
        for _ in range(200):
            radius = math.sqrt(rng.uniform(0.1**2, 0.95**2))
            angle = rng.uniform(0, 2 * math.pi)
            beta = radius * complex(math.cos(angle), math.sin(angle))
            try:
                pair = cs.conjugate_roots(r, beta)
            except Exception:
                continue
            res = max(
                abs(cs.char_poly(r, beta, pair.alpha1) - 1.0),
                abs(cs.char_poly(r, beta, pair.alpha2) - 1.0),
            )
            prod = abs(pair.alpha1 * pair.alpha2 - r.mu[1] * beta / r.mu[0])
            if res > 1e-12 or prod > 1e-12:
                ok = False
                detail = f"root residual {res:.2e}, product defect {prod:.2e} at beta={beta:.4f}"
                break
        checks.append(CheckResult("root_identities", ok, detail))
    else:
        checks.append(CheckResult("root_identities", True, "skipped: unstable rates", skipped=True))

    # harmonicity of the closed form (or its equal-rates limit)
    if stable and not r.equal_service_rates():
        rep = hm.harmonicity_report(r, hm.hit_comb_2d(r))
        checks.append(
            CheckResult(
                "closed_form_harmonic",
                rep.max_residual <= 1e-12,
                f"max residual {rep.max_residual:.2e} over {rep.points_checked} points",
            )
        )
        bracket_rep = hm.harmonicity_report(r, hm.bracket(r.rho[0], (r.rho[0],)))
        checks.append(
            CheckResult(
                "self_conjugate_bracket_harmonic",
                bracket_rep.max_residual <= 1e-12,
                f"max residual {bracket_rep.max_residual:.2e}",
            )
        )
        fit = hm.fit_boundary(
            r,
            [hm.pair_harmonic(r, r.rho[1]), hm.bracket(r.rho[0], (r.rho[0],))],
            lambda y: 1.0,
            [(k, k) for k in range(50)],
        )
        c_pair = hm.boundary_coeff(r, r.rho[1], r.rho[0])
        c_one = hm.boundary_coeff(r, r.rho[1], 1.0)
        want = (1.0 / c_pair, c_one / c_pair)
        fit_ok = (
            fit.max_boundary_error <= 1e-10
            and abs(fit.weights[0] - want[0]) <= 1e-8
            and abs(fit.weights[1] - want[1]) <= 1e-8
        )
        checks.append(
            CheckResult(
                "boundary_fit_recovery",
                fit_ok,
                f"weights {fit.weights}, boundary error {fit.max_boundary_error:.2e}",
            )
        )

        # finite-horizon values increase and stay under the closed form
        y0 = (3, 1)
        curve = hit_prob_within_curve(r, y0, [10, 20, 40, 80])
        w = hm.hit_prob_2d(r, y0)
        bracket_ok = all(a <= b + 1e-15 for a, b in zip(curve, curve[1:])) and all(
            v <= w + 1e-12 for v in curve
        )
        checks.append(
            CheckResult(
                "horizon_bracket",
                bracket_ok,
                f"K=80 gap {(w - curve[-1]):.2e} of {w:.6g}",
            )
        )
    elif stable:
        checks.append(
            CheckResult(
                "closed_form_harmonic",
                True,
                "skipped: equal service rates, limit formula branch exercised instead",
                skipped=True,
            )
        )
        y0 = (5, 2)
        v = hm.hit_prob_equal(r, y0)
        checks.append(
            CheckResult(
                "equal_rates_value",
                0.0 <= v <= 1.0,
                f"value {v:.6g} at {y0}",
            )
        )
    else:
        checks.append(
            CheckResult(
                "closed_form_harmonic", True, "skipped: unstable rates", skipped=True
            )
        )

    # small-grid fixed point of the exact solver
    grid = solve_overflow_grid(r, 8)
    resid = 0.0
    lam, mu1, mu2 = r.lam, r.mu[0], r.mu[1]
    for (x1, x2), v in grid.items():
        if classify(8, (x1, x2)) is not Region.INTERIOR:
            continue
        acc, keep = 0.0, 1.0
        for dv, p in (((1, 0), lam), ((-1, 1), mu1), ((0, -1), mu2)):
            nx = (x1 + dv[0], x2 + dv[1])
            if nx[0] < 0 or nx[1] < 0:
                keep -= p
            else:
                acc += p * grid.value(nx)
        resid = max(resid, abs(v - acc / keep) / max(abs(v), 1e-300))
    checks.append(
        CheckResult("grid_fixed_point", resid <= 1e-11, f"max relative defect {resid:.2e}")
    )

    # diffusion analogue residuals
    gen = max(
        abs(hm.diffusion_generator_residual(1.0, 2.0, (x1, x2)))
        for x1, x2 in ((2.0, 1.0), (3.5, 0.7), (5.0, 2.5))
    )
    neu = max(abs(hm.diffusion_normal_derivative(1.0, 2.0, x1)) for x1 in (1.0, 2.0, 3.0))
    checks.append(
        CheckResult(
            "diffusion_analogue",
            gen <= 1e-6 and neu <= 1e-6,
            f"generator {gen:.2e}, normal derivative {neu:.2e}",
        )
    )

    return VerificationReport(checks)
