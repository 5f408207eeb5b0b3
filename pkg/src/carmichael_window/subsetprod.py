"""Divisors d of Q = prod q_i with d = 1 (mod L) and log d in a short window.

The search is exact: meet-in-the-middle over the two halves of the prime
list, joined on the residue mod L and range-scanned on the log-sum.
Also here: the lower-bound report for the count, the non-clustering
diagnostic, and the calculator for the nominal construction parameters.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import BudgetError, ConsistencyError, DomainError, ValidationError

MITM_CEILING = 50
LOG_GUARD = 1e-9


@dataclass(frozen=True)
class WindowSpec:
    B: float
    A: float

    def __post_init__(self):
        # The construction uses A > 1; smaller A (wider windows) is allowed
        # for experiments.
        if not self.A > 0:
            raise ValidationError("window parameter A must be positive")

    @property
    def half_width(self) -> float:
        return 1.0 / (2.0 * self.A)


@dataclass
class SubsetSolution:
    chosen: tuple[int, ...]
    primes: tuple[int, ...]
    d: int
    group_residue: int
    log_offset: float

    def to_dict(self) -> dict:
        return {
            "indices": list(self.chosen),
            "primes": [str(p) for p in self.primes],
            "d": str(self.d),
            "group_residue": str(self.group_residue),
            "log_offset": self.log_offset,
        }


@dataclass
class SubsetSearch:
    count: int
    solutions: list[SubsetSolution] = field(default_factory=list)
    resolved_exactly: int = 0

    def to_dict(self) -> dict:
        return {"count": self.count, "resolved_exactly": self.resolved_exactly,
                "solutions": [s.to_dict() for s in self.solutions]}


def _half_subsets(primes, logs, L, offset):
    # (residue mod L, log-sum, bitmask over the full list)
    out = [(1 % L, 0.0, 0)]
    for i, (p, lg) in enumerate(zip(primes, logs)):
        bit = 1 << (offset + i)
        out += [(r * p % L, s + lg, m | bit) for r, s, m in out]
    return out


def _exact_offset(primes, mask, B: float) -> mpmath.mpf:
    with mpmath.workdps(60):
        total = mpmath.fsum(mpmath.log(p) for p in primes)
        chosen = mpmath.fsum(mpmath.log(p) for i, p in enumerate(primes) if mask >> i & 1)
        return chosen - total / 2 - mpmath.mpf(B)


class _MitmIndex:
    """Both half-enumerations of a prime list, built once and queried per window."""

    def __init__(self, primes, L: int, ceiling: int):
        primes = [int(p) for p in primes]
        N = len(primes)
        if N > ceiling:
            raise BudgetError(f"{N} primes exceeds the meet-in-the-middle ceiling {ceiling}")
        if len(set(primes)) != N:
            raise DomainError("primes must be distinct")
        if L < 1:
            raise DomainError("L must be positive")
        if any(L % p == 0 for p in primes):
            raise DomainError("no prime may divide L")
        self.primes, self.L = primes, L
        logs = [math.log(p) for p in primes]
        self.half_log_Q = math.fsum(logs) / 2
        self.guard = LOG_GUARD * max(N, 1)
        split = (N + 1) // 2
        left = _half_subsets(primes[:split], logs[:split], L, 0)
        right = _half_subsets(primes[split:], logs[split:], L, split)
        self.buckets: dict[int, tuple[list[float], list[int]]] = {}
        for r, s, m in sorted(right, key=lambda t: (t[0], t[1], t[2])):
            ls, ms = self.buckets.setdefault(r, ([], []))
            ls.append(s)
            ms.append(m)
        # left entries whose complementary residue exists, as (log-sum, mask, bucket)
        self.left = []
        for r, s, m in left:
            need = pow(r, -1, L) if L > 1 else 0
            if need in self.buckets:
                self.left.append((s, m, self.buckets[need]))

    def query(self, window: WindowSpec, limit: int | None) -> SubsetSearch:
        center = self.half_log_Q + window.B
        h, guard = window.half_width, self.guard
        count = exact = 0
        found: list[int] = []
        for s, m, (ls, ms) in self.left:
            i = bisect.bisect_left(ls, center - h - s - guard)
            j = bisect.bisect_right(ls, center + h - s + guard)
            for t in range(i, j):
                if abs(s + ls[t] - center) < h - guard:
                    inside = True
                else:
                    exact += 1
                    inside = abs(_exact_offset(self.primes, m | ms[t], window.B)) < h
                if inside:
                    count += 1
                    if limit is None or len(found) < limit:
                        found.append(m | ms[t])
        solutions = sorted((_solution(self.primes, mask, self.L, window) for mask in found),
                           key=lambda sol: sol.d)
        return SubsetSearch(count, solutions, exact)


def mitm_subset_products(primes, L: int, window: WindowSpec, limit: int | None = None,
                         ceiling: int = MITM_CEILING) -> SubsetSearch:
    """Count (exactly) the subsets whose product d has d = 1 (mod L) and
    |log d - log(Q)/2 - B| < 1/(2A); return up to ``limit`` of them."""
    return _MitmIndex(primes, L, ceiling).query(window, limit)


def mitm_windows(primes, L: int, windows, limit: int | None = None,
                 ceiling: int = MITM_CEILING) -> list[SubsetSearch]:
    """mitm_subset_products for several windows over the same primes."""
    index = _MitmIndex(primes, L, ceiling)
    return [index.query(w, limit) for w in windows]


def _solution(primes, mask: int, L: int, window: WindowSpec) -> SubsetSolution:
    idx = tuple(i for i in range(len(primes)) if mask >> i & 1)
    chosen = tuple(primes[i] for i in idx)
    d = math.prod(chosen)
    logs = [math.log(p) for p in primes]
    offset = math.fsum(logs[i] for i in idx) - math.fsum(logs) / 2 - window.B
    sol = SubsetSolution(idx, chosen, d, d % L, offset)
    if sol.group_residue != 1 % L:
        raise ConsistencyError(f"subset product {d} is not 1 mod {L}")
    if abs(float(_exact_offset(primes, mask, window.B)) - offset) > 1e-9:
        raise ConsistencyError("log offset disagrees with high-precision recomputation")
    return sol


@dataclass
class BoundReport:
    N: int
    A: float
    q0: int
    lower_bound: float
    count_exact: int
    hypotheses_met: bool
    hypothesis_rhs: float

    def to_dict(self) -> dict:
        return {"N": self.N, "A": self.A, "q0": str(self.q0), "lower_bound": self.lower_bound,
                "count_exact": self.count_exact, "hypotheses_met": self.hypotheses_met,
                "hypothesis_rhs": self.hypothesis_rhs}


def bound_report(N: int, A: float, q0: int, count_exact: int,
                 lambda_L: int = 1, phi_L: int = 1) -> BoundReport:
    """Compare an exact count with 2^(N - sqrt N) / (A^2 log^2 q0).

    hypotheses_met tests N > max(log q0, lambda(L) log phi(L))^5 only; it is
    informational and essentially never true at desk scale.
    """
    if N < 1:
        raise DomainError("bound_report needs N >= 1")
    lq = math.log(q0)
    bound = 2.0 ** (N - math.sqrt(N)) / (A * A * lq * lq)
    rhs = max(lq, lambda_L * math.log(phi_L)) ** 5
    return BoundReport(N, A, q0, bound, count_exact, N > rhs, rhs)


@dataclass
class NonClusterReport:
    max_fraction: float
    omega: float
    alpha: float
    threshold: float
    ok: bool

    def to_dict(self) -> dict:
        return {"max_fraction": self.max_fraction, "omega": self.omega, "alpha": self.alpha,
                "threshold": self.threshold, "ok": self.ok}


def noncluster_scan(logs, lambda_L: int, q0: int, A: float, Xi: float,
                    omega_samples: int = 2000, alpha_cap: int = 64) -> NonClusterReport:
    """Grid version of: for all omega and alpha, at most half of the values
    omega*log q_i lie within 8 sqrt(log Xi / N) of a multiple of alpha."""
    logs = np.asarray(logs, dtype=np.float64)
    if logs.size == 0:
        raise DomainError("need at least one prime")
    if not Xi > 1:
        raise DomainError("Xi must exceed 1")
    thr = 8.0 * math.sqrt(math.log(Xi) / logs.size)
    lo = 1.0 / (lambda_L * math.log(q0))
    hi = 4.0 * A * math.log(Xi)
    omegas = np.linspace(lo, hi, omega_samples)
    alphas = 2 * math.pi * np.arange(1, min(lambda_L, alpha_cap) + 1) / lambda_L
    best = (-1.0, 0.0, 0.0)
    for alpha in alphas:
        x = omegas[:, None] * logs[None, :]
        dist = np.abs(x - alpha * np.round(x / alpha))
        frac = (dist < thr).mean(axis=1)
        i = int(np.argmax(frac))
        if frac[i] > best[0]:
            best = (float(frac[i]), float(omegas[i]), float(alpha))
    return NonClusterReport(best[0], best[1], best[2], thr, best[0] <= 0.5)


def noncluster_check(primes, lambda_L: int, q0: int, A: float, Xi: float,
                     omega_samples: int = 2000, alpha_cap: int = 64) -> NonClusterReport:
    return noncluster_scan([math.log(p) for p in primes], lambda_L, q0, A, Xi,
                           omega_samples, alpha_cap)


def _exp_or_inf(v: float) -> float:
    return math.exp(v) if v < 700 else math.inf


@dataclass
class PipelineParams:
    y: float
    E: float
    eta: float
    delta: float
    M: int
    N: int
    Delta: float
    log_Upsilon: float
    log_V: float
    log_W: float
    log_A: float
    N_minus: int
    N_plus: int
    log_Z_minus: float
    log_Z_plus: float
    log_kappa: float
    log_Xi: float | None = None
    kappa_spec: str = "product of p^2 over primes y/log y <= p <= y with P+(p-1) <= y^(1-E)"

    @property
    def V(self) -> float:
        return _exp_or_inf(self.log_V)

    @property
    def W(self) -> float:
        return _exp_or_inf(self.log_W)

    @property
    def A(self) -> float:
        return _exp_or_inf(self.log_A)

    @property
    def n_range_valid(self) -> bool:
        return self.N_minus <= self.N_plus

    def to_dict(self) -> dict:
        return {
            "y": self.y, "E": self.E, "eta": self.eta, "delta": self.delta, "M": self.M,
            "N": self.N, "Delta": self.Delta, "log_Upsilon": self.log_Upsilon,
            "V": self.V, "W": self.W, "A": self.A,
            "log_V": self.log_V, "log_W": self.log_W, "log_A": self.log_A,
            "N_minus": str(self.N_minus), "N_plus": str(self.N_plus),
            "n_range_valid": self.n_range_valid,
            "log_Z_minus": self.log_Z_minus, "log_Z_plus": self.log_Z_plus,
            "log_kappa": self.log_kappa, "kappa_spec": self.kappa_spec, "log_Xi": self.log_Xi,
        }


def _growth(y: float, eta: float) -> float:
    # e^(eta y / (2 log y)), the scale of N in the construction
    return eta * y / (2 * math.log(y))


def n_bounds(y: float, eta: float) -> tuple[int, int]:
    X = math.exp(_growth(y, eta))
    n_minus = math.floor(X / 8) + 1
    n_minus += n_minus % 2
    n_plus = math.ceil(X) - 1
    n_plus -= n_plus % 2
    return n_minus, n_plus


def log_z_bounds(y: float, eta: float, Delta: float) -> tuple[float, float]:
    """(log Z_-(y), log Z_+(y)), using log ceil(e^u) = u."""
    log_ups = y ** (2 + 2 * Delta)
    g = math.exp(_growth(y, eta))
    return log_ups * g / 3, log_ups * g * 11 / 12


def compute_params(y: float, E: float, eta: float, delta: float, M: int, N: int,
                   phi_L: int | None = None, q0: int | None = None,
                   smooth_primes=None) -> PipelineParams:
    """Every nominal construction parameter as a float, big ones in log form."""
    if y < 10 or not 0 < E < 1 or delta <= 0:
        raise DomainError("compute_params needs y >= 10, 0 < E < 1, delta > 0")
    Delta = delta * delta / 24
    ly = math.log(y)
    if smooth_primes is None:
        from .smoothset import build_smooth_primes
        smooth_primes = build_smooth_primes(y, E).primes
    log_kappa = 2 * math.fsum(math.log(p) for p in smooth_primes)
    log_A = eta * y / ((4 + 6 * Delta) * ly)
    log_Xi = None
    if phi_L is not None and q0 is not None and N >= 1:
        log_Xi = 2 * (log_A + math.log(N) + math.log(phi_L) + math.log(math.log(q0)))
    n_minus, n_plus = n_bounds(y, eta)
    z_minus, z_plus = log_z_bounds(y, eta, Delta)
    return PipelineParams(
        y=y, E=E, eta=eta, delta=delta, M=M, N=N, Delta=Delta,
        log_Upsilon=y ** (2 + 2 * Delta),
        log_V=eta * y / ((4 + 2 * Delta) * ly),
        log_W=eta * y / ((4 + 4 * Delta) * ly),
        log_A=log_A,
        N_minus=n_minus, N_plus=n_plus,
        log_Z_minus=z_minus, log_Z_plus=z_plus,
        log_kappa=log_kappa, log_Xi=log_Xi,
    )


def z_overlap_start(eta: float, delta: float, y_lo: int = 10, y_hi: int = 10_000) -> int | None:
    """Smallest integer y0 in [y_lo, y_hi) with log Z_-(y+1) < log Z_+(y) for
    every y in [y0, y_hi); None if the last y in the scan fails."""
    Delta = delta * delta / 24
    start = None
    for y in range(y_lo, y_hi):
        ok = log_z_bounds(y + 1, eta, Delta)[0] < log_z_bounds(y, eta, Delta)[1]
        if ok and start is None:
            start = y
        elif not ok:
            start = None
    return start
