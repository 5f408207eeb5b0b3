"""Exact prime counts in progressions and the error sums built from them.

All logarithms are natural. Counts are exact integers; theta/psi sums and
error values are doubles (relative error of a sum of k logs is about
k * 1e-16, negligible at the sizes a sieve can reach).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import DomainError
from .ntcore import SIEVE_CEILING, euler_phi, primes_up_to, progression_prime_flags

# zeta(2) zeta(3) / zeta(6)
C1 = 1.9435964368


@dataclass(frozen=True)
class APCounts:
    x: int
    q: int
    a: int
    pi_qa: int
    theta_qa: float
    psi_qa: float


@dataclass
class ErrorSumReport:
    x: int
    q_ceiling: int
    excluded_modulus: int | None
    total: float
    # rows of (q, max error, argmax z, argmax a)
    per_q_max: list[tuple[int, float, int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "x": str(self.x),
            "q_ceiling": str(self.q_ceiling),
            "excluded_modulus": None if self.excluded_modulus is None else str(self.excluded_modulus),
            "total": self.total,
            "rows": [{"q": q, "error": e, "argmax_z": z, "argmax_a": a}
                     for q, e, z, a in self.per_q_max],
        }

    def csv_lines(self) -> list[str]:
        lines = ["q,argmax_z,argmax_a,error"]
        lines += [f"{q},{z},{a},{e!r}" for q, e, z, a in self.per_q_max]
        return lines


def _primes(x: int, ceiling: int) -> np.ndarray:
    return primes_up_to(x, ceiling)


def prime_counts(x: int, q: int = 1, a: int = 0, ceiling: int = SIEVE_CEILING) -> APCounts:
    """pi, theta, psi restricted to n = a (mod q), for n <= x.

    psi uses the von Mangoldt weight: each prime power p^k <= x in the class
    contributes log p once.
    """
    if x < 2 or q < 1:
        raise DomainError("prime_counts needs x >= 2 and q >= 1")
    ps = _primes(x, ceiling)
    a %= q
    in_class = ps[ps % q == a]
    pi_qa = int(in_class.size)
    theta = float(np.log(in_class.astype(np.float64)).sum()) if pi_qa else 0.0
    psi = theta
    for p in ps:
        p = int(p)
        if p * p > x:
            break
        logp = math.log(p)
        pk = p * p
        while pk <= x:
            if pk % q == a:
                psi += logp
            pk *= p
    return APCounts(x, q, a, pi_qa, theta, psi)


def error_term(x: int, q: int, a: int, ceiling: int = SIEVE_CEILING) -> float:
    """|pi(x; q, a) - pi(x) / phi(q)| for gcd(a, q) = 1."""
    if gcd(a, q) != 1:
        raise DomainError(f"error_term needs gcd(a, q) = 1, got a={a}, q={q}")
    if x < 2 or q < 1:
        raise DomainError("error_term needs x >= 2 and q >= 1")
    ps = _primes(x, ceiling)
    in_class = int(np.count_nonzero(ps % q == a % q))
    return abs(in_class - ps.size / euler_phi(q))


def _max_error_for_modulus(ps: list[int], q: int) -> tuple[float, int, int]:
    # E(z; q, a) is a step function of z that only moves at primes, so it
    # suffices to evaluate right after each prime. Counts only grow, so the
    # max and min class counts are tracked incrementally; the min uses a
    # histogram of class sizes.
    phi_q = euler_phi(q)
    if q == 1:
        return 0.0, ps[0], 0
    counts = [0] * q
    coprime = [gcd(r, q) == 1 for r in range(q)]
    hist = {0: phi_q}
    cmax = cmin = 0
    best = -1.0
    best_step = 0
    best_side = 0
    for i, p in enumerate(ps):
        r = p % q
        if coprime[r]:
            c = counts[r]
            counts[r] = c + 1
            hist[c] -= 1
            hist[c + 1] = hist.get(c + 1, 0) + 1
            if c + 1 > cmax:
                cmax = c + 1
            if c == cmin and hist[c] == 0:
                cmin += 1
        mean = (i + 1) / phi_q
        hi_err = cmax - mean
        lo_err = mean - cmin
        if hi_err > best:
            best, best_step, best_side = hi_err, i, 1
        if lo_err > best:
            best, best_step, best_side = lo_err, i, -1
    # Second pass to name the residue attaining the max.
    counts = [0] * q
    for p in ps[: best_step + 1]:
        counts[p % q] += 1
    classes = [r for r in range(q) if coprime[r]]
    target = (max if best_side > 0 else min)(counts[r] for r in classes)
    arg_a = next(r for r in classes if counts[r] == target)
    return best, ps[best_step], arg_a


def bv_error_sum(x: int, exclude: int | None = None, ceiling: int = SIEVE_CEILING) -> ErrorSumReport:
    """Sum over q <= x^(2/5), exclude not dividing q, of max_{z<=x} max_a E(z; q, a).

    The max over 2 <= z <= x is taken over z in {primes <= x}: between
    consecutive primes neither pi(z; q, a) nor pi(z) moves, so every value
    of E on [2, x] is attained at some prime.
    """
    if x < 2:
        raise DomainError("bv_error_sum needs x >= 2")
    q_ceiling = _q_ceiling(x)
    ps = [int(p) for p in _primes(x, ceiling)]
    rows = []
    for q in range(1, q_ceiling + 1):
        if exclude is not None and q % exclude == 0:
            continue
        err, z, a = _max_error_for_modulus(ps, q)
        rows.append((q, err, z, a))
    total = math.fsum(r[1] for r in rows)
    return ErrorSumReport(x, q_ceiling, exclude, total, rows)


def _q_ceiling(x: int) -> int:
    qc = int(x ** 0.4)
    while (qc + 1) ** 5 <= x ** 2:
        qc += 1
    while qc ** 5 > x ** 2:
        qc -= 1
    return qc


def totients_up_to(x: int) -> np.ndarray:
    phi = np.arange(x + 1, dtype=np.int64)
    for p in primes_up_to(x):
        p = int(p)
        phi[p::p] -= phi[p::p] // p
    return phi


def sum_inv_totient(x: int) -> tuple[float, float]:
    """(sum_{k<=x} 1/phi(k), that sum minus C1 log x)."""
    if x < 1:
        raise DomainError("sum_inv_totient needs x >= 1")
    phi = totients_up_to(x)[1:]
    s = math.fsum((1.0 / phi.astype(np.float64)).tolist())
    return s, s - C1 * math.log(x)


def count_prime_tuples(forms, x: int, m: int, hi: int | None = None) -> int:
    """#{x <= n < hi : at least m of the forms d*n + c are prime}; hi defaults to 2x."""
    pairs = [(f[0], f[1]) for f in getattr(forms, "forms", forms)]
    if not pairs:
        raise DomainError("count_prime_tuples needs at least one form")
    if m < 1:
        raise DomainError("m must be positive")
    hi = 2 * x if hi is None else hi
    if hi <= x:
        return 0
    hits = np.zeros(hi - x, dtype=np.int32)
    for d, c in pairs:
        hits += progression_prime_flags(d, c, x, hi)
    return int(np.count_nonzero(hits >= m))
