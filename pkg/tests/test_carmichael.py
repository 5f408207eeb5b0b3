import math
import random

import pytest
from hypothesis import given, strategies as st

from carmichael_window.carmichael import (
    assemble_pi,
    carmichael_numbers_between,
    chernick,
    interval_width,
    korselt_check,
    scan_interval,
    window_residency,
)
from carmichael_window.errors import BudgetError, ConsistencyError, DomainError
from carmichael_window.subsetprod import SubsetSolution, WindowSpec
from oracles import carmichael_naive, fermat_carmichael, korselt_naive, spf_table

GOLDEN_1E5 = [561, 1105, 1729, 2465, 2821, 6601, 8911, 10585, 15841, 29341,
              41041, 46657, 52633, 62745, 63973, 75361]


@pytest.fixture(scope="module")
def spf():
    return spf_table(2 * 10**5)


def test_korselt_examples():
    c = korselt_check(1729)
    assert c.korselt_ok and c.factors == [(7, 1), (13, 1), (19, 1)]
    assert c.divisibility_transcript == [(7, 0), (13, 0), (19, 0)]
    assert korselt_check(561).korselt_ok
    nine = korselt_check(9)
    assert not nine.korselt_ok and not nine.squarefree
    assert not korselt_check(7).korselt_ok
    assert not korselt_check(15).korselt_ok
    with pytest.raises(DomainError):
        korselt_check(1)


def test_supplied_factors_are_checked():
    assert korselt_check(1729, [(19, 1), (7, 1), (13, 1)]).korselt_ok
    with pytest.raises(ConsistencyError):
        korselt_check(1729, [(7, 1), (13, 1)])
    with pytest.raises(ConsistencyError):
        korselt_check(1729, [(7, 1), (247, 1)])


def test_chernick_examples():
    assert chernick(1).n == 1729
    assert chernick(6).n == 294409
    assert chernick(2) is None
    with pytest.raises(DomainError):
        chernick(0)


@given(st.integers(2, 2 * 10**5))
def test_korselt_matches_oracles(n):
    ok = korselt_check(n).korselt_ok
    assert ok == korselt_naive(n)
    if n < 10**5:
        assert ok == fermat_carmichael(n)


def test_assemble_pi_chernick_shape():
    sol = SubsetSolution((0, 1, 2), (7, 13, 19), 1729, 1, 0.0)
    cert = assemble_pi(sol, 6, 3)
    assert cert.n == 1729 and cert.korselt_ok
    assert cert.congruence_checks["n_mod_k0L"] == "1"
    assert cert.congruence_checks["d_divides_L"] is False
    cert = assemble_pi(sol, 6, 6)
    assert cert.congruence_checks["d_divides_L"] is True


def test_assemble_pi_errors():
    with pytest.raises(DomainError):
        assemble_pi(SubsetSolution((0, 1), (7, 13), 91, 1, 0.0), 6, 3)
    with pytest.raises(DomainError):
        assemble_pi(SubsetSolution((0, 1, 2), (7, 11, 19), 1463, 1, 0.0), 6, 1)
    with pytest.raises(ConsistencyError):
        assemble_pi(SubsetSolution((0, 1, 2), (7, 13, 19), 1730, 1, 0.0), 6, 3)
    # 7*13*31 = 2821 is Carmichael but not 1 mod 6*11
    with pytest.raises(ConsistencyError):
        assemble_pi(SubsetSolution((0, 1, 2), (7, 13, 31), 2821, 1, 0.0), 6, 11)


def test_window_residency():
    log_Q = 2 * math.log(1729)
    inside = window_residency(1729, log_Q, WindowSpec(0.0, 2.0))
    assert inside["inside"] and int(inside["z"]) < 1729 <= int(inside["z"]) + int(inside["width"])
    assert not window_residency(1729, log_Q, WindowSpec(1.0, 2.0))["inside"]


def test_golden_list(spf):
    assert carmichael_numbers_between(1, 10**5) == GOLDEN_1E5
    assert len(carmichael_numbers_between(1, 10**6)) == 43


def test_scan_examples():
    assert scan_interval(500, 1) == (1, [561])
    assert scan_interval(1000, 1) == (1, [1105])
    assert scan_interval(10, 1) == (0, [])
    with pytest.raises(DomainError):
        scan_interval(1, 1)
    with pytest.raises(BudgetError):
        scan_interval(10**12, 1)


def test_interval_width():
    assert interval_width(1000, 1) == pytest.approx(1000 / math.log(1000) ** (1 / 3))


def test_enumeration_matches_naive(spf):
    rng = random.Random(5)
    for _ in range(25):
        lo = rng.randint(0, 2 * 10**5 - 20000)
        hi = lo + rng.randint(1, 20000)
        assert carmichael_numbers_between(lo, hi) == carmichael_naive(lo, hi, spf)


def test_bounds_are_half_open(spf):
    assert carmichael_numbers_between(561, 1105) == [1105]
    assert carmichael_numbers_between(560, 561) == [561]
    assert carmichael_numbers_between(561, 1104) == []
