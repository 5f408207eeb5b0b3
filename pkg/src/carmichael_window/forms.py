"""Residue selections Omega_p and admissible tuples of linear forms d*n + c."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

from .errors import DomainError
from .ntcore import factorize, primes_up_to


@dataclass
class LinearFormTuple:
    forms: list[tuple[int, int]]
    provenance: dict | None = None

    def __post_init__(self):
        if any(d < 1 or c < 1 for d, c in self.forms):
            raise DomainError("linear forms need positive coefficient and constant")
        if len(set(self.forms)) != len(self.forms):
            raise DomainError("linear forms must be distinct")

    def __len__(self) -> int:
        return len(self.forms)

    def to_dict(self) -> dict:
        prov = None
        if self.provenance is not None:
            prov = {k: str(v) if isinstance(v, int) else v for k, v in self.provenance.items()}
        return {"forms": [[str(d), str(c)] for d, c in self.forms], "provenance": prov}

    @classmethod
    def from_dict(cls, data: dict) -> "LinearFormTuple":
        return cls([(int(d), int(c)) for d, c in data["forms"]], data.get("provenance"))


@dataclass
class ResidueSelection:
    L: int
    per_prime: dict[int, list[int]] = field(default_factory=dict)

    @property
    def size_ratio(self) -> float:
        return math.prod(len(v) / p for p, v in self.per_prime.items())

    @property
    def size(self) -> int:
        return math.prod(len(v) for v in self.per_prime.values())


def omega_p(p: int, ds) -> list[int]:
    """Units a mod p with d*a + 1 != 0 (mod p) for every d in ds."""
    ds = [d % p for d in ds]
    return [a for a in range(1, p) if all((d * a + 1) % p for d in ds)]


def residue_selection(L: int, ds) -> ResidueSelection:
    """Omega_p for every prime p | L (L squarefree)."""
    fac = factorize(L) if L > 1 else []
    if any(e > 1 for _, e in fac):
        raise DomainError("L must be squarefree")
    return ResidueSelection(L=L, per_prime={p: omega_p(p, ds) for p, _ in fac})


def lift_residue(sel: ResidueSelection, choice: dict[int, int]) -> int:
    """CRT lift of one residue per prime p | L to 1 <= a_L < L."""
    a, mod = 0, 1
    for p, allowed in sorted(sel.per_prime.items()):
        if p not in choice:
            raise DomainError(f"no residue chosen for p={p}")
        r = choice[p] % p
        if r not in allowed:
            raise DomainError(f"residue {r} is not in Omega_{p}")
        # solve a + mod*t = r (mod p)
        t = (r - a) * pow(mod, -1, p) % p
        a += mod * t
        mod *= p
    return a


def iter_lifts(sel: ResidueSelection) -> Iterator[int]:
    """All a_L in Omega, lexicographic in the per-prime choices (primes ascending)."""
    ps = sorted(sel.per_prime)
    for combo in itertools.product(*(sel.per_prime[p] for p in ps)):
        yield lift_residue(sel, dict(zip(ps, combo)))


def build_forms(S_j, L: int, a_L: int, provenance: dict | None = None) -> LinearFormTuple:
    return LinearFormTuple([(d * L, d * a_L + 1) for d in S_j], provenance)


def _covers_all_residues(forms, p: int) -> bool:
    for n in range(p):
        if all((d * n + c) % p for d, c in forms):
            return False
    return True


def is_admissible(t, prime_ceiling: int | None = None) -> bool:
    """No prime divides the product of the forms at every integer n.

    A prime p > N (number of forms) can only do so if it divides both
    coefficient and constant of a single form, since otherwise the forms
    have at most N < p roots mod p between them. So: scan primes p <= N
    (or ``prime_ceiling`` if larger) and check gcd(d_i, c_i) = 1.
    """
    forms = getattr(t, "forms", t)
    if not forms:
        raise DomainError("is_admissible needs at least one form")
    if any(math.gcd(d, c) > 1 for d, c in forms):
        return False
    top = max(len(forms), prime_ceiling or 0)
    return not any(_covers_all_residues(forms, int(p)) for p in primes_up_to(top))
