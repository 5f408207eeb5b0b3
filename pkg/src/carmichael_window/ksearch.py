"""Multipliers k with several primes among d*k + 1, the clustering filter,
and the pigeonhole choice of a common k0."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, ConsistencyError, DomainError, ValidationError
from .ntcore import factorize, is_prime, progression_prime_flags

K_RANGE_LIMIT = 10**7
# Outward guard on the omega-interval test; borderline cases count as in U.
U_GUARD = 1e-12


@dataclass(frozen=True)
class KWindow:
    Y: int
    L: int
    V: float = 1e3
    W: float = 1.0

    def __post_init__(self):
        if self.Y < 1:
            raise ValidationError("Y must be >= 1")
        if self.V <= 0:
            raise ValidationError("V must be positive")
        if self.W < 1:
            raise ValidationError("W must be >= 1")


# A hit: (k, [(d, d*k + 1), ...]) with every listed d*k + 1 prime.
Hit = tuple[int, list[tuple[int, int]]]


@dataclass
class KSearchResult:
    window: KWindow
    per_j_hits: dict[int, list[Hit]]
    k0: int
    Q: list[tuple[int, int, int]]  # (prime, d, j)
    j_count_at_k0: int
    in_U_counts: dict[int, int] = field(default_factory=dict)

    def report(self) -> dict[int, dict[str, int]]:
        """Per j: |T|, |T & U| and survivors after the filter."""
        out = {}
        for j, hits in self.per_j_hits.items():
            u = self.in_U_counts.get(j, 0)
            out[j] = {"T": len(hits), "T_and_U": u, "survivors": len(hits) - u}
        return out

    def to_dict(self) -> dict:
        w = self.window
        return {
            "window": {"Y": str(w.Y), "L": str(w.L), "V": w.V, "W": w.W},
            "per_j_hits": {
                str(j): [{"k": str(k), "witnesses": [[str(d), str(p)] for d, p in wit]}
                         for k, wit in hits]
                for j, hits in self.per_j_hits.items()
            },
            "report": {str(j): r for j, r in self.report().items()},
            "k0": str(self.k0),
            "j_count_at_k0": self.j_count_at_k0,
            "Q": [{"prime": str(p), "d": str(d), "j": j} for p, d, j in self.Q],
        }


def _check_range(window: KWindow, k_range) -> tuple[int, int]:
    lo, hi = (window.Y, 2 * window.Y) if k_range is None else k_range
    if lo < window.Y or hi > 2 * window.Y or lo > hi:
        raise DomainError(f"k range [{lo}, {hi}) must lie inside [Y, 2Y)")
    if hi - lo > K_RANGE_LIMIT:
        raise BudgetError(f"k range of {hi - lo} exceeds limit {K_RANGE_LIMIT}")
    return lo, hi


def coprime_mask(L: int, lo: int, hi: int) -> np.ndarray:
    """mask[i] = gcd(lo + i, L) == 1."""
    mask = np.ones(hi - lo, dtype=bool)
    if L > 1:
        for p, _ in factorize(L):
            mask[(-lo) % p::p] = False
    return mask


def find_T(window: KWindow, S_j, k_range: tuple[int, int] | None = None,
           threshold: int = 2) -> list[Hit]:
    """k in the range with gcd(k, L) = 1 and at least ``threshold`` primes
    among {d*k + 1 : d in S_j}, each with all its prime witnesses."""
    if len(S_j) < 2:
        raise DomainError("find_T needs |S_j| >= 2")
    lo, hi = _check_range(window, k_range)
    if hi <= lo:
        return []
    # Sieve survivors first; primality is only confirmed where enough survive.
    flags = [progression_prime_flags(d, 1, lo, hi, confirm=False) for d in S_j]
    count = np.sum(flags, axis=0) * coprime_mask(window.L, lo, hi)
    hits = []
    for i in np.flatnonzero(count >= threshold):
        k = lo + int(i)
        wit = [(d, d * k + 1) for d, f in zip(S_j, flags) if f[i] and is_prime(d * k + 1)]
        if len(wit) >= threshold:
            hits.append((k, wit))
    return hits


def _pair_resonates(a: float, b: float, V: float, W: float) -> bool:
    # Is there 0 < w < W with w*a and w*b both within 1/V of nonzero integers?
    tol = 1.0 / V
    g = U_GUARD
    m_max = int(W * a + tol) + 1
    for m in range(1, m_max + 1):
        w_lo = max((m - tol) / a, 0.0)
        w_hi = min((m + tol) / a, W)
        if w_lo > w_hi + g:
            continue
        j_lo, j_hi = w_lo * b - g, w_hi * b + g
        m2 = max(1, math.ceil(j_lo - tol))
        if m2 - tol <= j_hi:
            return True
    return False


def in_U(k: int, S_j, V: float, W: float) -> bool:
    """Whether k is 'clustered' for S_j: some distinct d, d' in S_j and
    0 < |omega| < W put omega*log(d*k+1) and omega*log(d'*k+1) both within
    1/V of nonzero integers. Sign symmetry lets us take omega > 0."""
    if V <= 0 or W < 1:
        raise DomainError("in_U needs V > 0 and W >= 1")
    if V <= 1:
        # |m| <= 1/V is satisfiable with m = +-1 for omega -> 0
        return len(S_j) >= 2
    logs = [math.log(d * k + 1) for d in S_j]
    for i, a in enumerate(logs):
        for b in logs[i + 1:]:
            if _pair_resonates(a, b, V, W):
                return True
    return False


def search_all(window: KWindow, subsets: dict[int, list[int]], k_range=None,
               threshold: int = 2, threads: int = 1) -> dict[int, list[Hit]]:
    """find_T for every j; results merged in j order regardless of threads."""
    js = sorted(subsets)

    def run(j):
        return find_T(window, subsets[j], k_range, threshold)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            found = list(pool.map(run, js))
    else:
        found = [run(j) for j in js]
    return dict(zip(js, found))


def pick_k0(results: dict[int, list[Hit]], window: KWindow, subsets: dict[int, list[int]] | None = None,
            filter: bool = True) -> KSearchResult:
    """The k hit by the most subsets j (smallest k on ties), after optionally
    dropping hits that are clustered for their j."""
    if filter and subsets is None:
        raise ValidationError("the clustering filter needs the subsets S_j")
    survivors: dict[int, list[Hit]] = {}
    u_counts: dict[int, int] = {}
    for j, hits in results.items():
        kept = []
        for hit in hits:
            if filter and in_U(hit[0], subsets[j], window.V, window.W):
                continue
            kept.append(hit)
        survivors[j] = kept
        u_counts[j] = len(hits) - len(kept)
    per_k: dict[int, list[int]] = {}
    for j, hits in survivors.items():
        for k, _ in hits:
            per_k.setdefault(k, []).append(j)
    if not per_k:
        raise ValidationError("no hits survive; nothing to pigeonhole")
    k0 = min(per_k, key=lambda k: (-len(per_k[k]), k))
    Q = {}
    for j in sorted(per_k[k0]):
        for k, wit in survivors[j]:
            if k == k0:
                for d, p in wit:
                    Q.setdefault(p, (p, d, j))
    result = KSearchResult(window, results, k0, sorted(Q.values()), len(per_k[k0]), u_counts)
    verify_result(result)
    return result


def verify_result(r: KSearchResult) -> None:
    w = r.window
    if math.gcd(r.k0, w.L) != 1 or not w.Y <= r.k0 < 2 * w.Y:
        raise ConsistencyError(f"k0={r.k0} violates gcd/range constraints")
    primes = [p for p, _, _ in r.Q]
    if len(set(primes)) != len(primes):
        raise ConsistencyError("duplicate primes in Q")
    for p, d, _ in r.Q:
        if p != d * r.k0 + 1 or not is_prime(p):
            raise ConsistencyError(f"Q entry {p} is not a prime of the form d*k0 + 1")
