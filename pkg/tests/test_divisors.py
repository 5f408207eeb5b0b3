import itertools
import math

import pytest
from hypothesis import given, strategies as st

from carmichael_window.divisors import (
    DivisorFamily,
    build_family,
    enumerate_divisors,
    log_diameter,
    log_spread,
    partition_divisors,
    segment_sizes,
)
from carmichael_window.errors import BudgetError, DomainError
from carmichael_window.smoothset import build_smooth_primes
from oracles import trial_factor

SMALL_PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43]


def test_enumerate_examples():
    assert enumerate_divisors([7, 13]) == [1, 7, 13, 91]
    assert enumerate_divisors([]) == [1]
    divs = enumerate_divisors([7, 13, 17, 19])
    assert len(divs) == 16 and divs[-1] == 29393


@given(st.lists(st.sampled_from(SMALL_PRIMES), unique=True, max_size=9), st.integers(1, 600))
def test_capped_enumeration_keeps_smallest(ps, cap):
    full = enumerate_divisors(ps)
    assert enumerate_divisors(ps, cap) == full[:cap]
    assert full == sorted(math.prod(c) for r in range(len(ps) + 1)
                          for c in itertools.combinations(ps, r))


def test_enumeration_limit():
    with pytest.raises(BudgetError):
        enumerate_divisors(list(range(100)), limit=10)


def test_spread_and_diameter():
    assert log_spread([1, math.e]) == pytest.approx(1.0)
    assert log_diameter([1, math.e]) == pytest.approx(1.0)
    assert log_spread([7, 13, 91]) == pytest.approx(math.log(13 / 7))
    assert log_diameter([7, 13, 91]) == pytest.approx(math.log(13))
    assert log_spread([2, 4, 8]) == pytest.approx(math.log(2))
    assert log_diameter([2, 4, 8]) == pytest.approx(math.log(4))
    with pytest.raises(DomainError):
        log_spread([5])


def test_partition_index_arithmetic():
    fam = partition_divisors(list(range(1, 17)), 2)
    assert fam.subsets[:2] == [[5, 13], [6, 14]]
    assert len(fam.subsets) == 4


def test_partition_equal_logs_fail_spread():
    fam = partition_divisors([1, 2, 3, 4, 6, 6, 6, 6], 2)
    assert fam.subsets == [[3, 6], [4, 6]] and fam.spread_ok == [False, False]
    fam = partition_divisors([5] * 8, 2)
    assert not any(fam.spread_ok)


def test_partition_y20_frozen():
    fam = build_family(build_smooth_primes(20, 0.5), 2)
    assert fam.subsets == [[19, 1729], [91, 2261], [119, 4199], [133, 29393]]
    assert fam.spread_ok == [True] * 4
    for S, ok in zip(fam.subsets, fam.spread_ok):
        gaps = [abs(math.log(a) - math.log(b)) for a, b in itertools.combinations(S, 2)]
        assert ok == (min(gaps) > 1)


def test_partition_validation():
    with pytest.raises(DomainError):
        partition_divisors(list(range(1, 40)), 3)
    with pytest.raises(DomainError):
        partition_divisors(list(range(1, 8)), 2)


@pytest.mark.parametrize("n, parts", [(16, 4), (17, 4), (19, 4), (130, 8)])
def test_segment_sizes(n, parts):
    sizes = segment_sizes(n, parts)
    assert sum(sizes) == n and max(sizes) - min(sizes) <= 1
    assert sizes == sorted(sizes)


@given(st.lists(st.sampled_from(SMALL_PRIMES), unique=True, min_size=3, max_size=9),
       st.sampled_from([1, 2, 4, 8]))
def test_partition_invariants(ps, M):
    divs = enumerate_divisors(ps)
    if len(divs) < 2 * M * M:
        return
    fam = partition_divisors(divs, M)
    L = math.prod(ps)
    flat = [d for S in fam.subsets for d in S]
    assert len(flat) == len(set(flat))
    assert all(len(S) == M for S in fam.subsets)
    for d in flat:
        assert L % d == 0 and all(e == 1 for e in trial_factor(d).values())
    sizes = segment_sizes(len(divs), 2 * M)
    starts = [sum(sizes[:k]) for k in range(2 * M)]
    even_members = {divs[starts[k] + i] for k in range(1, 2 * M, 2) for i in range(sizes[k])}
    assert set(flat) <= even_members
    if len(divs) % (2 * M) == 0:
        assert len(flat) == M * len(divs) // (2 * M)
    for S, ok in zip(fam.subsets, fam.spread_ok):
        if M >= 2:
            assert ok == (log_spread(S) > 1)
    # the divisor list does not depend on the order primes are given in
    assert enumerate_divisors(list(reversed(ps))) == divs


def test_family_json_roundtrip():
    fam = build_family(build_smooth_primes(40, 0.3), 4)
    d = fam.to_dict()
    assert all(isinstance(x, str) for x in d["divisors"])
    back = DivisorFamily.from_dict(d)
    assert back.subsets == fam.subsets and back.spread_ok == fam.spread_ok
    assert back.source.primes == fam.source.primes


def test_truncated_family():
    s = build_smooth_primes(60, 0.2)
    fam = build_family(s, 2, cap=64)
    assert fam.truncated and len(fam.divisors) == 64
    assert fam.divisors == enumerate_divisors(s.primes)[:64]
