"""Korselt certificates, Chernick numbers, assembly of constructed products
and exact enumeration of Carmichael numbers in short intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath

from .errors import BudgetError, ConsistencyError, DomainError
from .ntcore import factorize, is_prime, primality_mode, primes_up_to
from .subsetprod import SubsetSolution, WindowSpec

SCAN_BUDGET = 10**11


@dataclass
class CarmichaelCertificate:
    n: int
    factors: list[tuple[int, int]]
    squarefree: bool
    composite: bool
    korselt_ok: bool
    divisibility_transcript: list[tuple[int, int]]
    primality_mode: str = "deterministic"
    congruence_checks: dict | None = None
    window: dict | None = None

    def to_dict(self) -> dict:
        return {
            "n": str(self.n),
            "factors": [[str(p), e] for p, e in self.factors],
            "squarefree": self.squarefree,
            "composite": self.composite,
            "korselt_ok": self.korselt_ok,
            "divisibility_transcript": [[str(p), str(r)] for p, r in self.divisibility_transcript],
            "primality_mode": self.primality_mode,
            "congruence_checks": self.congruence_checks,
            "window": self.window,
        }


def korselt_check(n: int, factors: list[tuple[int, int]] | None = None) -> CarmichaelCertificate:
    """Korselt's criterion: n is Carmichael iff n is composite, squarefree
    and p - 1 | n - 1 for every prime p | n.

    A known factorization may be supplied for n too large to factor; it is
    checked (product and primality of every factor) rather than trusted.
    """
    if n < 2:
        raise DomainError("korselt_check needs n >= 2")
    if factors is None:
        factors = factorize(n)
    else:
        factors = sorted((int(p), int(e)) for p, e in factors)
        if math.prod(p ** e for p, e in factors) != n:
            raise ConsistencyError("supplied factors do not multiply to n")
        if not all(is_prime(p) for p, _ in factors):
            raise ConsistencyError("supplied factor list contains a composite")
    squarefree = all(e == 1 for _, e in factors)
    composite = sum(e for _, e in factors) > 1
    transcript = [(p, (n - 1) % (p - 1)) for p, _ in factors]
    ok = squarefree and composite and all(r == 0 for _, r in transcript)
    mode = "deterministic" if all(primality_mode(p) == "deterministic" for p, _ in factors) else "probable"
    return CarmichaelCertificate(n, factors, squarefree, composite, ok, transcript, mode)


def chernick(k: int) -> CarmichaelCertificate | None:
    """Certificate for (6k+1)(12k+1)(18k+1) when all three factors are prime."""
    if k < 1:
        raise DomainError("chernick needs k >= 1")
    ps = [6 * k + 1, 12 * k + 1, 18 * k + 1]
    if not all(is_prime(p) for p in ps):
        return None
    cert = korselt_check(math.prod(ps), [(p, 1) for p in ps])
    if not cert.korselt_ok:
        raise ConsistencyError(f"Chernick product for k={k} failed Korselt")
    return cert


def assemble_pi(solution: SubsetSolution, k0: int, L: int, window: WindowSpec | None = None,
                log_Q: float | None = None) -> CarmichaelCertificate:
    """Multiply out a subset solution and certify it.

    Every prime must be d*k0 + 1. The product must be 1 mod k0*L and pass
    Korselt; if it does not, something upstream is broken and
    ConsistencyError is raised.
    """
    primes = list(solution.primes)
    if len(primes) < 3:
        raise DomainError("a Carmichael number needs at least 3 prime factors")
    if len(set(primes)) != len(primes):
        raise DomainError("subset primes must be distinct")
    ds = []
    for p in primes:
        if (p - 1) % k0:
            raise DomainError(f"{p} is not 1 mod k0={k0}")
        ds.append((p - 1) // k0)
    Pi = math.prod(primes)
    if Pi != solution.d:
        raise ConsistencyError("solution product does not match its primes")
    residue = Pi % (k0 * L)
    if residue != 1 % (k0 * L):
        raise ConsistencyError(f"product is {residue} mod k0*L, expected 1")
    cert = korselt_check(Pi, [(p, 1) for p in primes])
    if not cert.korselt_ok:
        raise ConsistencyError(f"assembled product {Pi} fails Korselt")
    cert.congruence_checks = {
        "k0": str(k0), "L": str(L), "n_mod_k0L": str(residue),
        "d_divides_L": all(L % d == 0 for d in ds),
    }
    if window is not None and log_Q is not None:
        cert.window = window_residency(Pi, log_Q, window)
    return cert


def window_residency(n: int, log_Q: float, window: WindowSpec) -> dict:
    """Integer interval (z, z + width] equal to the log window, and whether n is in it."""
    h = window.half_width
    center = log_Q / 2 + window.B
    digits = len(str(n)) + 30
    with mpmath.workdps(digits):
        lo = mpmath.exp(mpmath.mpf(center) - mpmath.mpf(h))
        hi = mpmath.exp(mpmath.mpf(center) + mpmath.mpf(h))
        z = int(mpmath.floor(lo))
        top = int(mpmath.floor(hi))
        inside = bool(abs(mpmath.log(n) - mpmath.mpf(center)) < mpmath.mpf(h))
    return {"z": str(z), "width": str(top - z), "inside": inside,
            "log_center": center, "half_width": h}


def interval_width(z: int, delta: float) -> float:
    return z / math.log(z) ** (1.0 / (2.0 + delta))


def carmichael_numbers_between(lo: int, hi: int) -> list[int]:
    """All Carmichael numbers n with lo < n <= hi.

    Depth-first over products of distinct odd primes in increasing order,
    keeping gcd(P, lcm(q - 1)) = 1 along the way. The last prime p is not
    searched: it must satisfy p = P^-1 (mod lcm) and p - 1 | P - 1, so it is
    read off an arithmetic progression below P.
    """
    if hi > SCAN_BUDGET:
        raise BudgetError(f"scan top {hi} exceeds budget {SCAN_BUDGET}")
    if hi < 561:
        return []
    small = [int(p) for p in primes_up_to(math.isqrt(hi // 3) + 1)[1:]]
    found: list[int] = []

    def close(P: int, lam: int, last: int) -> None:
        a = max(last, lo // P)            # p > a
        b = min(hi // P, P)               # p <= b
        if b <= a:
            return
        u = pow(P, -1, lam)
        p = a + 1 + (u - (a + 1)) % lam
        while p <= b:
            if (P - 1) % (p - 1) == 0 and is_prime(p) and lo < P * p:
                found.append(P * p)
            p += lam

    def extend(P: int, lam: int, start: int, depth: int) -> None:
        if depth >= 2:
            close(P, lam, small[start - 1])
        power = 3 if depth == 0 else 2
        for i in range(start, len(small)):
            p = small[i]
            if P * p ** power > hi:
                break
            if lam % p == 0 or math.gcd(p - 1, P) != 1:
                continue
            extend(P * p, math.lcm(lam, p - 1), i + 1, depth + 1)

    extend(1, 1, 0, 0)
    found.sort()
    for n in found:
        if not korselt_check(n).korselt_ok:
            raise ConsistencyError(f"enumerated {n} fails Korselt")
    return found


def scan_interval(z: int, delta: float, budget: int = SCAN_BUDGET) -> tuple[int, list[int]]:
    """Carmichael numbers in (z, z + z / (log z)^(1/(2+delta))]."""
    if z < 2:
        raise DomainError("scan_interval needs z >= 2")
    top = math.floor(z + interval_width(z, delta))
    if top > budget:
        raise BudgetError(f"interval top {top} exceeds budget {budget}")
    found = carmichael_numbers_between(z, top)
    return len(found), found
