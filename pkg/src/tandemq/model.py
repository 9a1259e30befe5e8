"""Tandem-network model: rates, lattice geometry, constrained walks.

Two walks appear throughout the package. The queue-length walk lives on the
nonnegative orthant and freezes (stays put) whenever an increment would push
a coordinate negative.  The corner-frame walk is the same walk observed from
the corner ``(n, 0, ...)`` of the overflow boundary; its first coordinate is
unconstrained and only coordinates 2..d freeze.  The affine change of frame
``to_corner_frame`` maps between the two coordinate systems and is its own
inverse.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

Point = tuple[int, ...]

#: relative tolerance at which two service rates count as equal
EQUAL_RATES_RTOL = 1e-9


class WalkKind(Enum):
    """Which constraint set applies to the walk."""

    CONSTRAINED_X = "x"  # frozen on every axis (queue lengths)
    LIMIT_Y = "y"  # frozen on axes 2..d only (corner frame)


class Region(Enum):
    """Position of a lattice point relative to the overflow simplex."""

    INTERIOR = "interior"
    EXIT_BOUNDARY = "exit_boundary"
    ORIGIN = "origin"
    OUT_OF_DOMAIN = "out_of_domain"


@dataclass(frozen=True)
class Rates:
    """Arrival weight ``lam`` and per-station service weights ``mu``.

    Any positive weights are accepted; probabilities are obtained by
    normalizing with the total (uniformization).  All utilization ratios
    rho_i = lam/mu_i are invariant under that scaling.
    """

    lam: float
    mu: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "lam", float(self.lam))
        if len(self.mu) not in (2, 3):
            raise ValueError(f"need 2 or 3 service rates, got {len(self.mu)}")
        if self.lam <= 0 or any(m <= 0 for m in self.mu):
            raise ValueError("all rates must be strictly positive")

    @property
    def stations(self) -> int:
        return len(self.mu)

    @property
    def total(self) -> float:
        return self.lam + sum(self.mu)

    @property
    def rho(self) -> tuple[float, ...]:
        """Utilization per station, lam/mu_i."""
        return tuple(self.lam / m for m in self.mu)

    @property
    def stable(self) -> bool:
        return all(self.lam < m for m in self.mu)

    @property
    def is_normalized(self) -> bool:
        return abs(self.total - 1.0) <= 4 * math.ulp(1.0)

    def normalized(self) -> "Rates":
        """Scale so the weights form a probability vector (total exactly 1)."""
        if self.is_normalized and abs(self.total - 1.0) <= math.ulp(1.0):
            return self
        t = self.total
        lam = self.lam / t
        mu = [m / t for m in self.mu]
        # compensate rounding on the largest service weight so the total is exact
        k = max(range(len(mu)), key=lambda i: mu[i])
        mu[k] = 1.0 - lam - sum(m for i, m in enumerate(mu) if i != k)
        return Rates(lam, tuple(mu))

    def equal_service_rates(self, i: int = 0, j: int = 1) -> bool:
        a, b = self.mu[i], self.mu[j]
        return abs(a - b) / (a + b) <= EQUAL_RATES_RTOL

    @classmethod
    def from_dict(cls, obj: dict) -> "Rates":
        """Parse the JSON config shape {"lambda": r, "mu": [r, ...]}."""
        return cls(float(obj["lambda"]), tuple(float(m) for m in obj["mu"]))

    @classmethod
    def from_json(cls, text: str) -> "Rates":
        return cls.from_dict(json.loads(text))

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "mu": list(self.mu)}


def increments(kind: WalkKind, rates: Rates) -> list[tuple[Point, float]]:
    """Increment vectors with their normalized probabilities.

    Queue-length walk (d=2): (1,0) arrival, (-1,1) service 1, (0,-1) service 2.
    Corner frame flips the sign of the first coordinate of each increment.
    """
    r = rates.normalized()
    if r.stations == 2:
        vs: list[Point] = [(1, 0), (-1, 1), (0, -1)]
    else:
        vs = [(1, 0, 0), (-1, 1, 0), (0, -1, 1), (0, 0, -1)]
    if kind is WalkKind.LIMIT_Y:
        vs = [(-v[0],) + v[1:] for v in vs]
    probs = (r.lam,) + r.mu
    return list(zip(vs, probs))


def constrained_step(kind: WalkKind, y: Point, v: Point) -> Point:
    """One step of the walk: ``y + v`` if legal, else ``y`` (frozen step).

    Legality: every coordinate stays nonnegative for the queue-length walk;
    only coordinates 2..d are constrained in the corner frame.
    """
    if len(v) != len(y):
        raise ValueError("increment and point dimensions differ")
    new = tuple(a + b for a, b in zip(y, v))
    lo = 0 if kind is WalkKind.CONSTRAINED_X else 1
    if any(c < 0 for c in new[lo:]):
        return y
    return new


def to_corner_frame(n: int, x: Point) -> Point:
    """Affine frame change pinned at the exit corner: first coordinate
    becomes ``n - x(1)``, the rest are copied.  Involution."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return (n - x[0],) + tuple(x[1:])


def classify(n: int, p: Point) -> Region:
    """Locate ``p`` relative to the overflow simplex of size ``n``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if any(c < 0 for c in p):
        raise ValueError("point must be componentwise nonnegative")
    s = sum(p)
    if s > n:
        return Region.OUT_OF_DOMAIN
    if s == n:
        return Region.EXIT_BOUNDARY
    if s == 0:
        return Region.ORIGIN
    return Region.INTERIOR
