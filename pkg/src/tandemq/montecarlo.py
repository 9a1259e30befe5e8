"""Seedable Monte Carlo estimators for both walks.

Randomness comes from a counter-based construction on the splitmix64
finalizer: path ``i`` owns the key ``mix(seed + (i+1)*PHI)`` and draws its
step-``t`` uniform as ``mix(key + (t+1)*PHI)``, i.e. an independent
splitmix64 stream per path.  splitmix64 is a standard, statistically solid
generator (it passes BigCrush and is the reference seeder for the xoshiro
family); the counter form means any partition of paths over workers
reproduces bit-identical estimates, because no draw depends on scheduling.

The queue-length estimator runs each path until it reaches the overflow
face or empties; both happen in finite time.  The corner-frame walk is
transient, so its estimator truncates at an escape face a fixed gap away
from the diagonal and reports a closed-form bound on the truncation bias
alongside the usual binomial standard error.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .harmonic import hit_prob
from .model import Point, Rates, WalkKind, classify, Region

_U = np.uint64
_PHI = _U(0x9E3779B97F4A7C15)
_M1 = _U(0xBF58476D1CE4E5B9)
_M2 = _U(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U(30))) * _M1
    z = (z ^ (z >> _U(27))) * _M2
    return z ^ (z >> _U(31))


def path_keys(seed: int, path_ids: np.ndarray) -> np.ndarray:
    """Per-path stream keys derived from (seed, path index)."""
    s = _U(seed & 0xFFFFFFFFFFFFFFFF)
    return _mix(s + _PHI * (path_ids.astype(np.uint64) + _U(1)))


def step_uniforms(keys: np.ndarray, t: int) -> np.ndarray:
    """Uniform [0,1) draw number ``t`` of every stream in ``keys``."""
    offset = _U((0x9E3779B97F4A7C15 * (t + 1)) & 0xFFFFFFFFFFFFFFFF)
    x = _mix(keys + offset)
    return (x >> _U(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class SimConfig:
    """Simulation request; ``buffer_n`` for the queue-length walk,
    ``escape_gap`` for the corner-frame walk."""

    rates: Rates
    kind: WalkKind
    start: Point
    paths: int
    seed: int
    escape_gap: int | None = None
    buffer_n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(int(c) for c in self.start))
        if len(self.start) != 2:
            raise ValueError("simulation supports two-station walks")
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.kind is WalkKind.CONSTRAINED_X:
            if self.buffer_n is None or self.buffer_n < 1:
                raise ValueError("queue-length walk needs buffer_n >= 1")
            if min(self.start) < 0 or sum(self.start) > self.buffer_n:
                raise ValueError("start must lie in the simplex")
        else:
            if self.escape_gap is None or self.escape_gap < 1:
                raise ValueError("corner-frame walk needs escape_gap >= 1")
            if not (self.start[0] >= self.start[1] >= 0):
                raise ValueError("start must satisfy y1 >= y2 >= 0")
            if self.start[0] - self.start[1] >= self.escape_gap:
                raise ValueError("escape_gap must exceed the starting gap")


@dataclass(frozen=True)
class Estimate:
    """Point estimate with binomial error and (for the transient walk) the
    escape-truncation bias bound: truth lies in
    [p_hat - 2 std_err, p_hat + 2 std_err + bias_bound] at ~95% confidence."""

    p_hat: float
    std_err: float
    hits: int
    escapes: int
    bias_bound: float

    def to_json_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "std_err": self.std_err,
            "hits": self.hits,
            "escapes": self.escapes,
            "bias_bound": self.bias_bound,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def _binomial_estimate(hits: int, paths: int, escapes: int, bias: float) -> Estimate:
    p = hits / paths
    se = float(np.sqrt(p * (1.0 - p) / paths))
    return Estimate(p, se, hits, escapes, bias)


def _warn_if_unstable(r: Rates):
    if not r.stable:
        warnings.warn("rates are unstable; simulation proceeds regardless", stacklevel=3)


def simulate_overflow(cfg: SimConfig) -> Estimate:
    """Fraction of paths hitting the overflow face before the origin.

    Paths are advanced in lock-step over the active set; absorbed paths
    stop consuming their stream, so estimates depend only on (seed, paths).
    """
    if cfg.kind is not WalkKind.CONSTRAINED_X:
        raise ValueError("simulate_overflow needs a queue-length configuration")
    r = cfg.rates.normalized()
    _warn_if_unstable(r)
    n = cfg.buffer_n
    region = classify(n, cfg.start)
    if region is Region.EXIT_BOUNDARY:
        return _binomial_estimate(cfg.paths, cfg.paths, 0, 0.0)
    if region is Region.ORIGIN:
        return _binomial_estimate(0, cfg.paths, 0, 0.0)

    lam, mu1 = r.lam, r.mu[0]
    keys = path_keys(cfg.seed, np.arange(cfg.paths, dtype=np.uint64))
    x1 = np.full(cfg.paths, cfg.start[0], dtype=np.int64)
    x2 = np.full(cfg.paths, cfg.start[1], dtype=np.int64)
    hits = 0
    t = 0
    while x1.size:
        u = step_uniforms(keys, t)
        t += 1
        arrive = u < lam
        serve1 = ~arrive & (u < lam + mu1)
        serve2 = ~(arrive | serve1)
        d1 = arrive.astype(np.int64) - serve1.astype(np.int64)
        d2 = serve1.astype(np.int64) - serve2.astype(np.int64)
        ok = (x1 + d1 >= 0) & (x2 + d2 >= 0)  # frozen step otherwise
        x1 += np.where(ok, d1, 0)
        x2 += np.where(ok, d2, 0)
        s = x1 + x2
        hit = s == n
        dead = s == 0
        hits += int(hit.sum())
        gone = hit | dead
        if gone.any():
            keep = ~gone
            x1, x2, keys = x1[keep], x2[keep], keys[keep]
    return _binomial_estimate(hits, cfg.paths, 0, 0.0)


def escape_bias_bound(rates: Rates, escape_gap: int) -> float:
    """Largest diagonal-hit probability anywhere on the escape face.

    On the face y1 - y2 = N the closed form is rho2^N plus a multiple of
    rho1^y2 with a sign that makes it monotone in y2, so the maximum sits
    at the axis corner (N, 0); the tail limit rho2^N is taken as well for
    safety.  Unstable rates get the trivial bound 1.
    """
    r = rates.normalized()
    if not r.stable:
        return 1.0
    corner = hit_prob(r, (escape_gap, 0))
    tail = r.rho[1] ** escape_gap
    return max(corner, tail)


def simulate_hit(cfg: SimConfig) -> Estimate:
    """Fraction of corner-frame paths reaching the diagonal before escaping.

    Every path terminates: it either hits the diagonal (counted) or the
    escape face y1 - y2 = escape_gap (counted separately, contributing the
    reported bias bound).
    """
    if cfg.kind is not WalkKind.LIMIT_Y:
        raise ValueError("simulate_hit needs a corner-frame configuration")
    r = cfg.rates.normalized()
    _warn_if_unstable(r)
    N = cfg.escape_gap
    bias = escape_bias_bound(r, N)
    if cfg.start[0] == cfg.start[1]:
        return _binomial_estimate(cfg.paths, cfg.paths, 0, bias)

    lam, mu1 = r.lam, r.mu[0]
    keys = path_keys(cfg.seed, np.arange(cfg.paths, dtype=np.uint64))
    gap = np.full(cfg.paths, cfg.start[0] - cfg.start[1], dtype=np.int64)
    y2 = np.full(cfg.paths, cfg.start[1], dtype=np.int64)
    hits = 0
    escapes = 0
    t = 0
    while gap.size:
        u = step_uniforms(keys, t)
        t += 1
        left = u < lam  # (-1, 0): gap shrinks
        up = ~left & (u < lam + mu1)  # (1, 1): gap unchanged, y2 grows
        down = ~(left | up)  # (0, -1): gap grows, frozen at y2 = 0
        dgap = down.astype(np.int64) - left.astype(np.int64)
        frozen = down & (y2 == 0)
        dgap[frozen] = 0
        gap += dgap
        y2 += up.astype(np.int64) - (down & ~frozen).astype(np.int64)
        hit = gap == 0
        esc = gap == N
        hits += int(hit.sum())
        escapes += int(esc.sum())
        gone = hit | esc
        if gone.any():
            keep = ~gone
            gap, y2, keys = gap[keep], y2[keep], keys[keep]
    return _binomial_estimate(hits, cfg.paths, escapes, bias)
