"""Integer primitives: primality, factoring, totients, sieving.

Python ints are already arbitrary precision, so every "Nat" in this package
is a plain ``int``. Sieves use numpy boolean arrays.
"""

from __future__ import annotations

import math
import random
from functools import lru_cache
from math import gcd, isqrt

import numpy as np

from .errors import BudgetError, DomainError

# Strong-probable-prime test to the first 13 prime bases is deterministic
# below this bound (Sorenson & Webster 2015). Above it we run the same
# battery plus a strong Lucas test (BPSW) and EXTRA_MR_ROUNDS seeded bases.
MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
DETERMINISTIC_LIMIT = 3317044064679887385961981
EXTRA_MR_ROUNDS = 4

SIEVE_CEILING = 10**10
SEGMENT_SIZE = 1 << 20
TRIAL_LIMIT = 10**7
RHO_ITERATIONS = 1 << 20

_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
    71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149,
    151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199,
)


def _strong_probable_prime(n: int, a: int) -> bool:
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def _jacobi(a: int, n: int) -> int:
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _strong_lucas_probable_prime(n: int) -> bool:
    # Selfridge method A parameters.
    if isqrt(n) ** 2 == n:
        return False
    D = 5
    while True:
        j = _jacobi(D, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -D - 2 if D > 0 else -D + 2
    P, Q = 1, (1 - D) // 4
    d = n + 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    inv2 = (n + 1) // 2
    U, V, Qk = 1, P, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = (P * U + V) * inv2 % n, (D * U + P * V) * inv2 % n
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if V == 0:
            return True
    return False


def is_prime(n: int, extra_rounds: int = EXTRA_MR_ROUNDS) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < 199 * 199:
        return True
    for a in MR_BASES:
        if not _strong_probable_prime(n, a):
            return False
    if n < DETERMINISTIC_LIMIT:
        return True
    if not _strong_lucas_probable_prime(n):
        return False
    rng = random.Random(n)
    return all(_strong_probable_prime(n, rng.randrange(2, n - 1))
               for _ in range(extra_rounds))


def primality_mode(n: int) -> str:
    """'deterministic' if is_prime(n) is a proof for this n, else 'probable'."""
    return "deterministic" if n < DETERMINISTIC_LIMIT else "probable"


@lru_cache(maxsize=8)
def _base_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p::2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def prime_flags(lo: int, hi: int, ceiling: int = SIEVE_CEILING) -> np.ndarray:
    """Boolean array ``f`` with ``f[i]`` true iff ``lo + i`` is prime, lo <= hi."""
    if hi > ceiling:
        raise BudgetError(f"sieve bound {hi} exceeds ceiling {ceiling}")
    if lo > hi:
        raise DomainError("empty range: lo > hi")
    lo = max(lo, 0)
    out = np.zeros(hi - lo + 1, dtype=bool)
    base = _base_primes(isqrt(hi))
    for seg_lo in range(lo, hi + 1, SEGMENT_SIZE):
        seg_hi = min(seg_lo + SEGMENT_SIZE - 1, hi)
        seg = np.ones(seg_hi - seg_lo + 1, dtype=bool)
        for p in base:
            p = int(p)
            if p * p > seg_hi:
                break
            start = max(p * p, (seg_lo + p - 1) // p * p)
            seg[start - seg_lo::p] = False
        if seg_lo < 2:
            seg[: 2 - seg_lo] = False
        out[seg_lo - lo: seg_hi - lo + 1] = seg
    return out


def primes_in_range(lo: int, hi: int, ceiling: int = SIEVE_CEILING) -> list[int]:
    """Primes p with lo <= p <= hi, ascending."""
    if lo > hi:
        raise DomainError("primes_in_range needs lo <= hi")
    return [int(i) + lo for i in np.flatnonzero(prime_flags(lo, hi, ceiling))]


def primes_up_to(n: int, ceiling: int = SIEVE_CEILING) -> np.ndarray:
    """All primes <= n as an int64 array."""
    if n > ceiling:
        raise BudgetError(f"sieve bound {n} exceeds ceiling {ceiling}")
    return _base_primes(n) if n >= 2 else np.zeros(0, dtype=np.int64)


def _brent_rho(n: int, max_iterations: int) -> int | None:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    spent = 0
    while spent < max_iterations:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g, r, q = 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
            spent += r
            r *= 2
            if spent >= max_iterations:
                break
        if g == n:
            while True:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
                if g > 1:
                    break
        if 1 < g < n:
            return g
    return None


def factorize(n: int, trial_limit: int = TRIAL_LIMIT,
              rho_iterations: int = RHO_ITERATIONS) -> list[tuple[int, int]]:
    """Complete factorization as ascending ``(prime, exponent)`` pairs.

    Small primes are divided out first, then composite cofactors are split
    with Brent's rho; if rho stalls, trial division continues up to
    ``trial_limit``. Failing all of that raises BudgetError.
    """
    if n < 1:
        raise DomainError("factorize needs n >= 1")
    found: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        while n % p == 0:
            found[p] = found.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        r = isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        f = _brent_rho(m, rho_iterations)
        if f is None:
            f = _trial_split(m, trial_limit)
        if f is None:
            raise BudgetError(f"could not factor {m} within the factoring budget")
        stack += [f, m // f]
    return sorted(found.items())


def _trial_split(m: int, limit: int) -> int | None:
    bound = min(limit, isqrt(m))
    for p in primes_up_to(bound):
        if m % int(p) == 0:
            return int(p)
    return None


def largest_prime_factor(n: int) -> int:
    if n < 2:
        raise DomainError("largest prime factor is undefined for n < 2")
    return factorize(n)[-1][0]


def euler_phi(n: int) -> int:
    if n < 1:
        raise DomainError("euler_phi needs n >= 1")
    result = n
    for p, _ in factorize(n):
        result = result // p * (p - 1)
    return result


def carmichael_lambda(n: int) -> int:
    """Exponent of the unit group mod n."""
    if n < 1:
        raise DomainError("carmichael_lambda needs n >= 1")
    result = 1
    for p, k in factorize(n):
        if p == 2:
            part = 1 if k == 1 else 2 if k == 2 else 2 ** (k - 2)
        else:
            part = p ** (k - 1) * (p - 1)
        result = math.lcm(result, part)
    return result


def is_squarefree_factorization(factors: list[tuple[int, int]]) -> bool:
    return all(e == 1 for _, e in factors)


AP_SIEVE_BOUND = 1 << 16


def progression_prime_flags(d: int, c: int, lo: int, hi: int,
                            sieve_bound: int = AP_SIEVE_BOUND, confirm: bool = True) -> np.ndarray:
    """Flags ``f[i]`` = is_prime(d*(lo+i) + c) for lo <= lo+i < hi.

    Sieves the progression by primes up to ``sieve_bound``; if that covers
    sqrt of the largest value the sieve is exact, otherwise survivors are
    confirmed with is_prime. With ``confirm=False`` the unconfirmed survivors
    (a superset of the primes) are returned. Works for values of any size
    since only the offsets are machine integers.
    """
    if d < 1:
        raise DomainError("progression coefficient must be positive")
    size = hi - lo
    if size <= 0:
        return np.zeros(0, dtype=bool)
    flags = np.ones(size, dtype=bool)
    top = d * (hi - 1) + c
    bound = min(sieve_bound, isqrt(max(top, 0)))
    for p in primes_up_to(bound):
        p = int(p)
        dp = d % p
        if dp == 0:
            if c % p == 0:
                flags[:] = False
            continue
        # d*n + c = 0 (mod p)  <=>  n = -c / d (mod p)
        root = (-c * pow(dp, -1, p)) % p
        start = (root - lo) % p
        flags[start::p] = False
        # a value equal to p itself is prime, not a multiple
        if (p - c) % d == 0 and lo <= (p - c) // d < hi:
            flags[(p - c) // d - lo] = True
    small = d * lo + c
    if small < 2:
        for i in range(size):
            v = d * (lo + i) + c
            if v >= 2:
                break
            flags[i] = False
    if confirm and bound < isqrt(max(top, 0)):
        for i in np.flatnonzero(flags):
            if not is_prime(d * (lo + int(i)) + c):
                flags[i] = False
    return flags
