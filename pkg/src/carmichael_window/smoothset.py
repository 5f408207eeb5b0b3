"""Primes p in [y/log y, y] whose shift p - 1 is y^(1-E)-smooth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .ntcore import SIEVE_CEILING, primes_in_range, primes_up_to

# Relative guard on float comparisons against y/log y and y^(1-E). Ties that
# fall inside it are resolved in favour of membership.
GUARD = 1e-12


@dataclass
class SmoothPrimeSet:
    y: float
    E: float
    exclusions: frozenset[int] = field(default_factory=frozenset)
    primes: list[int] = field(default_factory=list)

    @property
    def eta_observed(self) -> float:
        return len(self.primes) * math.log(self.y) / self.y

    @property
    def smoothness_bound(self) -> float:
        return self.y ** (1 - self.E)

    def to_dict(self) -> dict:
        return {
            "y": self.y,
            "E": self.E,
            "exclusions": [str(p) for p in sorted(self.exclusions)],
            "primes": [str(p) for p in self.primes],
            "eta": self.eta_observed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SmoothPrimeSet":
        return cls(
            y=float(data["y"]),
            E=float(data["E"]),
            exclusions=frozenset(int(p) for p in data.get("exclusions", [])),
            primes=[int(p) for p in data["primes"]],
        )


def window_bounds(y: float) -> tuple[int, int]:
    """Integer range [lo, hi] of candidates p with y/log y <= p <= y."""
    lo = math.ceil(y / math.log(y) * (1 - GUARD))
    return max(lo, 2), math.floor(y * (1 + GUARD))


def largest_prime_factors(n: int) -> np.ndarray:
    """lpf[m] = largest prime factor of m for 2 <= m <= n (0 and 1 map to 1)."""
    lpf = np.ones(n + 1, dtype=np.int64)
    for p in primes_up_to(n):
        lpf[p::p] = p
    return lpf


def build_smooth_primes(y: float, E: float, exclusions=(),
                        ceiling: int = SIEVE_CEILING) -> SmoothPrimeSet:
    if y < 10:
        raise DomainError("build_smooth_primes needs y >= 10")
    if not 0 < E < 1:
        raise DomainError("E must lie strictly between 0 and 1")
    lo, hi = window_bounds(y)
    bound = y ** (1 - E) * (1 + GUARD)
    excluded = frozenset(int(p) for p in exclusions)
    candidates = primes_in_range(lo, hi, ceiling)
    lpf = largest_prime_factors(hi)
    primes = [p for p in candidates
              if p not in excluded and lpf[p - 1] <= bound and p - 1 >= 2]
    return SmoothPrimeSet(y=float(y), E=float(E), exclusions=excluded, primes=primes)


def density_report(s: SmoothPrimeSet) -> tuple[int, float]:
    return len(s.primes), s.eta_observed if s.primes else 0.0
