"""Squarefree divisor sets of the smooth primes and their spread partition."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .errors import BudgetError, DomainError
from .smoothset import SmoothPrimeSet

FULL_ENUMERATION_LIMIT = 24


@dataclass
class DivisorFamily:
    source: SmoothPrimeSet
    divisors: list[int]
    M: int
    subsets: list[list[int]] = field(default_factory=list)
    spread_ok: list[bool] = field(default_factory=list)
    truncated: bool = False

    @property
    def usable(self) -> list[int]:
        """Indices j of subsets whose spread guarantee actually holds."""
        return [j for j, ok in enumerate(self.spread_ok) if ok]

    def to_dict(self) -> dict:
        return {
            "source": self.source.to_dict(),
            "divisors": [str(d) for d in self.divisors],
            "truncated": self.truncated,
            "M": self.M,
            "subsets": [[str(d) for d in s] for s in self.subsets],
            "spread_ok": list(self.spread_ok),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DivisorFamily":
        return cls(
            source=SmoothPrimeSet.from_dict(data["source"]),
            divisors=[int(d) for d in data["divisors"]],
            M=int(data["M"]),
            subsets=[[int(d) for d in s] for s in data["subsets"]],
            spread_ok=[bool(b) for b in data["spread_ok"]],
            truncated=bool(data.get("truncated", False)),
        )


def enumerate_divisors(primes, cap: int | None = None,
                       limit: int = FULL_ENUMERATION_LIMIT) -> list[int]:
    """All products of subsets of ``primes`` (including 1), ascending.

    With ``cap``, returns exactly the ``cap`` smallest, found best-first so
    nothing above the cutoff is ever built.
    """
    ps = sorted(getattr(primes, "primes", primes))
    if cap is None:
        if len(ps) > limit:
            raise BudgetError(f"2^{len(ps)} divisors exceeds the enumeration limit; pass a cap")
        divs = [1]
        for p in ps:
            divs += [d * p for d in divs]
        return sorted(divs)
    if cap < 1:
        raise DomainError("cap must be positive")
    # Each subset is reached once: from (prod, i) either append p[i+1] or
    # swap p[i] for p[i+1]. Both moves never decrease the product.
    out = [1]
    heap = [(ps[0], 0)] if ps else []
    while heap and len(out) < cap:
        prod, i = heapq.heappop(heap)
        out.append(prod)
        if i + 1 < len(ps):
            heapq.heappush(heap, (prod * ps[i + 1], i + 1))
            heapq.heappush(heap, (prod // ps[i] * ps[i + 1], i + 1))
    return out


def _pairwise_gaps(S) -> list[float]:
    logs = sorted(math.log(s) for s in S)
    return [b - a for a, b in zip(logs, logs[1:])]


def log_spread(S) -> float:
    if len(S) < 2:
        raise DomainError("log_spread needs at least two elements")
    return min(_pairwise_gaps(S))


def log_diameter(S) -> float:
    if len(S) < 2:
        raise DomainError("log_diameter needs at least two elements")
    logs = [math.log(s) for s in S]
    return max(logs) - min(logs)


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and m & (m - 1) == 0


def segment_sizes(n: int, parts: int) -> list[int]:
    """Split n into ``parts`` sizes; the remainder goes one each to the trailing parts."""
    base, rem = divmod(n, parts)
    return [base] * (parts - rem) + [base + 1] * rem


def partition_divisors(divisors, M: int, source: SmoothPrimeSet | None = None) -> DivisorFamily:
    """Sort, cut into 2M contiguous segments, and let S_j collect the j-th
    element of every even-numbered segment."""
    if not _is_power_of_two(M):
        raise DomainError(f"M must be a power of two, got {M}")
    divs = sorted(divisors)
    if len(divs) < 2 * M * M:
        raise DomainError(f"need at least 2*M*M = {2 * M * M} divisors, have {len(divs)}")
    sizes = segment_sizes(len(divs), 2 * M)
    starts = [0]
    for s in sizes:
        starts.append(starts[-1] + s)
    even = [k for k in range(1, 2 * M, 2)]  # 0-based indices of D_2, D_4, ...
    count = min(sizes[k] for k in even)
    subsets = [[divs[starts[k] + j] for k in even] for j in range(count)]
    spread_ok = [M < 2 or log_spread(s) > 1 for s in subsets]
    if source is None:
        source = SmoothPrimeSet(y=0.0, E=0.0)
    return DivisorFamily(source=source, divisors=divs, M=M, subsets=subsets, spread_ok=spread_ok)


def build_family(s: SmoothPrimeSet, M: int, cap: int | None = None) -> DivisorFamily:
    divs = enumerate_divisors(s.primes, cap)
    fam = partition_divisors(divs, M, source=s)
    fam.truncated = cap is not None and len(divs) < 2 ** len(s.primes)
    return fam
