"""Exact overflow probabilities on the simplex, and finite-horizon oracles.

``solve_overflow_grid`` computes, for every lattice point of the simplex
{x >= 0, x1 + x2 <= n}, the probability that the queue-length walk reaches
the face x1 + x2 = n before the origin.  The balance equations are solved
by Gauss-Seidel sweeps ordered by decreasing total population, so boundary
information flows inward one sweep at a time; frozen steps contribute a
self-loop that each local update divides out rather than iterates.  A dense
direct solve over the same equations is provided as a cross-check oracle
for small n.

``hit_prob_within`` is the complementary oracle for the corner-frame walk:
the exact K-step value P(diagonal hit within K steps), computed by value
iteration over a window large enough that edge effects cannot reach the
queried point.  It increases in K and is bounded above by the closed-form
limit, which brackets both computations.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NotConvergedError
from .harmonic import hit_prob
from .model import Point, Rates, to_corner_frame

DEFAULT_TOL = 1e-12
DEFAULT_MAX_SWEEPS = 10**6


@dataclass(frozen=True)
class GridField:
    """Solved field over the simplex: value 1 on the exit face, 0 at the origin."""

    n: int
    values: dict[Point, float]

    def value(self, x: Point) -> float:
        return self.values[tuple(x)]

    def items(self):
        return self.values.items()

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x1", "x2", "value"])
        for (x1, x2), v in self.values.items():
            w.writerow([x1, x2, f"{v:.17g}"])
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "values": [
                {"x": list(x), "value": v} for x, v in self.values.items()
            ],
        }


def _simplex_points(n: int) -> list[Point]:
    return [(x1, s - x1) for s in range(n + 1) for x1 in range(s + 1)]


def _unknowns(n: int, order: str) -> list[Point]:
    # decreasing: sweep from just inside the exit face toward the origin
    pts = [
        (x1, s - x1)
        for s in range(n - 1, 0, -1)
        for x1 in range(s, -1, -1)
    ]
    if order == "decreasing":
        return pts
    if order == "increasing":
        return pts[::-1]
    raise ValueError("order must be 'decreasing' or 'increasing'")


def solve_overflow_grid(
    rates: Rates,
    n: int,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    order: str = "decreasing",
) -> GridField:
    """Gauss-Seidel fixed point of the first-passage system on the simplex.

    Convergence is declared when the largest relative update in a sweep
    drops below ``tol``; magnitudes down to ~1e-300 are safe because the
    criterion is relative throughout.  Raises NotConvergedError with the
    last residual when the sweep budget runs out.  Stability of the rates
    is not required; the linear system is well-posed either way.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    r = rates.normalized()
    if r.stations != 2:
        raise ValueError("grid solve is two-station")
    lam, mu1, mu2 = r.lam, r.mu[0], r.mu[1]

    vals: dict[Point, float] = {}
    for p in _simplex_points(n):
        vals[p] = 1.0 if sum(p) == n else 0.0

    # per-unknown update plan: (neighbors with weights, 1 - self-loop mass)
    plan: list[tuple[Point, list[tuple[Point, float]], float]] = []
    for x in _unknowns(n, order):
        nbrs: list[tuple[Point, float]] = []
        self_mass = 0.0
        for v, p in (((1, 0), lam), ((-1, 1), mu1), ((0, -1), mu2)):
            nx = (x[0] + v[0], x[1] + v[1])
            if nx[0] < 0 or nx[1] < 0:
                self_mass += p
            else:
                nbrs.append((nx, p))
        plan.append((x, nbrs, 1.0 - self_mass))

    sweeps = 0
    max_rel = math.inf
    while sweeps < max_sweeps:
        sweeps += 1
        max_rel = 0.0
        for x, nbrs, keep in plan:
            acc = 0.0
            for nx, p in nbrs:
                acc += p * vals[nx]
            new = acc / keep
            old = vals[x]
            if new != old:
                rel = abs(new - old) / max(abs(new), 1e-300)
                if rel > max_rel:
                    max_rel = rel
            vals[x] = new
        if max_rel < tol:
            break
    else:
        raise NotConvergedError(sweeps, max_rel)

    ordered = {p: vals[p] for p in _simplex_points(n)}
    return GridField(n, ordered)


def dense_overflow_grid(rates: Rates, n: int) -> GridField:
    """Direct dense solve of the same system; cross-check oracle for n <= 40."""
    if n > 40:
        raise ValueError("dense solve is limited to n <= 40")
    r = rates.normalized()
    lam, mu1, mu2 = r.lam, r.mu[0], r.mu[1]
    unknowns = _unknowns(n, "decreasing")
    idx = {p: i for i, p in enumerate(unknowns)}
    m = len(unknowns)
    A = np.eye(m)
    b = np.zeros(m)
    for x, i in idx.items():
        for v, p in (((1, 0), lam), ((-1, 1), mu1), ((0, -1), mu2)):
            nx = (x[0] + v[0], x[1] + v[1])
            if nx[0] < 0 or nx[1] < 0:
                A[i, i] -= p  # frozen step: self-loop
            elif nx in idx:
                A[i, idx[nx]] -= p
            elif sum(nx) == n:
                b[i] += p  # exit face has value 1
            # the origin contributes value 0
    sol = np.linalg.solve(A, b)
    vals: dict[Point, float] = {}
    for p in _simplex_points(n):
        if sum(p) == n:
            vals[p] = 1.0
        elif sum(p) == 0:
            vals[p] = 0.0
        else:
            vals[p] = float(sol[idx[p]])
    return GridField(n, vals)


# ---------------------------------------------------------------------------
# finite-horizon dynamic programming on the corner-frame walk


def hit_prob_within(rates: Rates, y: Sequence[int], horizon: int) -> float:
    """Exact probability of reaching the diagonal within ``horizon`` steps."""
    return hit_prob_within_curve(rates, y, [horizon])[-1]


def hit_prob_within_curve(
    rates: Rates, y: Sequence[int], horizons: Iterable[int]
) -> list[float]:
    """Values of the K-step hit probability at each requested horizon.

    One value-iteration pass up to max(horizons); the window extends
    horizon+1 cells beyond the start in every free direction, so clamped
    edges cannot influence the reported values.
    """
    hs = sorted(set(int(k) for k in horizons))
    if not hs or hs[0] < 0:
        raise ValueError("horizons must be nonnegative")
    r = rates.normalized()
    if r.stations == 2:
        vals = _dp_curve_2d(r, tuple(y), hs)
    else:
        vals = _dp_curve_3d(r, tuple(y), hs)
    order = {k: v for k, v in zip(hs, vals)}
    return [order[int(k)] for k in horizons]


def _dp_curve_2d(r: Rates, y: Point, hs: list[int]) -> list[float]:
    y1, y2 = y
    if not (y1 >= y2 >= 0):
        raise ValueError("start must satisfy y1 >= y2 >= 0")
    K = hs[-1]
    lam, mu1, mu2 = r.lam, r.mu[0], r.mu[1]
    lo1 = y1 - K - 1
    i1 = np.arange(lo1, y1 + K + 2)[:, None]
    i2 = np.arange(0, y2 + K + 2)[None, :]
    absorb = i1 <= i2
    V = absorb.astype(float)
    out = []
    if hs[0] == 0:
        out.append(float(V[y1 - lo1, y2]))
    want = set(hs)
    for k in range(1, K + 1):
        Vl = np.empty_like(V)
        Vl[1:, :] = V[:-1, :]
        Vl[0, :] = V[0, :]
        Vu = np.empty_like(V)
        Vu[:-1, :] = V[1:, :]
        Vu[-1, :] = V[-1, :]
        Vuu = np.empty_like(V)
        Vuu[:, :-1] = Vu[:, 1:]
        Vuu[:, -1] = Vu[:, -1]
        Vd = np.empty_like(V)
        Vd[:, 1:] = V[:, :-1]
        Vd[:, 0] = V[:, 0]  # frozen on the axis
        V = lam * Vl + mu1 * Vuu + mu2 * Vd
        V[absorb] = 1.0
        if k in want:
            out.append(float(V[y1 - lo1, y2]))
    return out


def _dp_curve_3d(r: Rates, y: Point, hs: list[int]) -> list[float]:
    y1, y2, y3 = y
    if not (y2 >= 0 and y3 >= 0 and y1 >= y2 + y3):
        raise ValueError("start must satisfy y1 >= y2 + y3, y2, y3 >= 0")
    K = hs[-1]
    lam, mu1, mu2, mu3 = r.lam, r.mu[0], r.mu[1], r.mu[2]
    lo1 = y1 - K - 1
    i1 = np.arange(lo1, y1 + K + 2)[:, None, None]
    i2 = np.arange(0, y2 + K + 2)[None, :, None]
    i3 = np.arange(0, y3 + K + 2)[None, None, :]
    absorb = i1 <= i2 + i3
    V = absorb.astype(float)
    out = []
    if hs[0] == 0:
        out.append(float(V[y1 - lo1, y2, y3]))
    want = set(hs)
    for k in range(1, K + 1):
        Vl = np.empty_like(V)
        Vl[1:] = V[:-1]
        Vl[0] = V[0]
        Vu = np.empty_like(V)
        Vu[:-1] = V[1:]
        Vu[-1] = V[-1]
        Vuu = np.empty_like(V)
        Vuu[:, :-1] = Vu[:, 1:]
        Vuu[:, -1] = Vu[:, -1]
        Vm = np.empty_like(V)
        Vm[:, 1:, :] = V[:, :-1, :]
        Vm[:, 0, :] = V[:, 0, :]
        V23 = np.empty_like(V)
        V23[:, :, :-1] = Vm[:, :, 1:]
        V23[:, :, -1] = Vm[:, :, -1]
        V23[:, 0, :] = V[:, 0, :]  # frozen when the middle queue is empty
        Vd3 = np.empty_like(V)
        Vd3[:, :, 1:] = V[:, :, :-1]
        Vd3[:, :, 0] = V[:, :, 0]  # frozen when the last queue is empty
        V = lam * Vl + mu1 * Vuu + mu2 * V23 + mu3 * Vd3
        V[absorb] = 1.0
        if k in want:
            out.append(float(V[y1 - lo1, y2, y3]))
    return out


# ---------------------------------------------------------------------------
# convergence of the exact field to the corner-frame limit


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    exact: float
    limit: float

    @property
    def gap(self) -> float:
        return abs(self.exact - self.limit)


def limit_convergence(
    rates: Rates,
    y: Sequence[int],
    ns: Sequence[int],
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> list[ConvergenceRow]:
    """Exact overflow value at the frame-mapped point versus the limit formula.

    For each buffer size the solved field is evaluated at the point whose
    corner-frame image is ``y``; the gap to the closed form shrinks to zero
    as the buffer grows.
    """
    w = hit_prob(rates, y)
    rows = []
    for n in ns:
        if n <= y[0]:
            raise ValueError(f"buffer n={n} must exceed y1={y[0]}")
        x = to_corner_frame(n, tuple(y))
        field = solve_overflow_grid(rates, n, tol=tol, max_sweeps=max_sweeps)
        rows.append(ConvergenceRow(n, field.value(x), w))
    return rows
