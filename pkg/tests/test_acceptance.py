"""One test per acceptance criterion. Each records a PASS/FAIL line that
conftest prints in the terminal summary."""

import json
import math
import random
import time
from pathlib import Path

import numpy as np
import pytest

from acceptance_log import record
from carmichael_window.bvstats import C1, sum_inv_totient
from carmichael_window.carmichael import assemble_pi, chernick, korselt_check, scan_interval
from carmichael_window.errors import ConsistencyError
from carmichael_window.forms import build_forms, is_admissible, iter_lifts, residue_selection
from carmichael_window.ksearch import KWindow, find_T
from carmichael_window.pipeline import RunConfig, load_config, replay, run_pipeline
from carmichael_window.subsetprod import SubsetSolution, WindowSpec, mitm_subset_products
from oracles import (
    admissible_naive,
    admissible_numpy,
    carmichael_naive,
    fermat_carmichael,
    sieve,
    spf_table,
    subset_count_naive,
)

FIXTURES = Path(__file__).parent / "fixtures"

# Frozen from fermat_carmichael over n <= 10^5 before the package existed.
GOLDEN = [561, 1105, 1729, 2465, 2821, 6601, 8911, 10585, 15841, 29341,
          41041, 46657, 52633, 62745, 63973, 75361]


def test_golden_list_is_the_oracle_list():
    assert [n for n in range(3, 10**5 + 1, 2) if fermat_carmichael(n)] == GOLDEN


def test_korselt_golden_list():
    t = time.perf_counter()
    found = [n for n in range(2, 10**5 + 1) if korselt_check(n).korselt_ok]
    dt = time.perf_counter() - t
    ok = found == GOLDEN and dt < 10
    record(ok, "Korselt golden list", f"{len(found)} found, exact match {found == GOLDEN}, {dt:.1f}s (< 10s)")
    assert ok


def test_chernick_concordance():
    t = time.perf_counter()
    table = sieve(18 * 10**4 + 1)
    mismatches = 0
    hits = 0
    for k in range(1, 10**4 + 1):
        expect = bool(table[6 * k + 1] and table[12 * k + 1] and table[18 * k + 1])
        cert = chernick(k)
        if (cert is not None) != expect:
            mismatches += 1
        if cert is not None:
            hits += 1
            if not korselt_check(cert.n).korselt_ok:
                mismatches += 1
    dt = time.perf_counter() - t
    ok = mismatches == 0 and dt < 10
    record(ok, "Chernick concordance", f"k <= 10^4: {hits} products, {mismatches} mismatches, {dt:.1f}s (< 10s)")
    assert ok


XS = [10**3, 10**4, 10**5, 10**6]


def test_inverse_totient_constant():
    t = time.perf_counter()
    devs = [sum_inv_totient(x)[1] for x in XS]
    dt = time.perf_counter() - t
    bounded = all(abs(d) < 2 for d in devs)
    stable = max(devs) - min(devs) < 0.5
    ok = bounded and stable and dt < 30
    shown = ", ".join(f"{d:+.4f}" for d in devs)
    record(ok, "Inverse-totient constant", f"C1={C1}, deviations [{shown}], "
           f"|dev| < 2 {bounded}, spread {max(devs) - min(devs):.4f} < 0.5, {dt:.1f}s (< 30s)")
    assert ok


def test_inverse_totient_upper_bound():
    rows = [(x, sum_inv_totient(x)[0], 2 * math.log(x)) for x in XS]
    ok = all(s < b for _, s, b in rows)
    record(ok, "Inverse-totient sum < 2 log x", ", ".join(f"x={x}: {s:.3f} < {b:.3f}" for x, s, b in rows))
    assert ok


def test_mitm_oracle():
    rng = random.Random(2024)
    pool = [int(p) for p in np.flatnonzero(sieve(2000)) if p > 2]
    t = time.perf_counter()
    bad = 0
    nonzero = 0
    for _ in range(200):
        L = rng.randint(1, 500)
        primes = rng.sample([p for p in pool if L % p], rng.randint(0, 20))
        B = rng.uniform(-3, 3)
        A = rng.choice([0.05, 0.2, 1.0, 4.0])
        w = WindowSpec(B, A)
        got = mitm_subset_products(primes, L, w).count
        want = subset_count_naive(primes, L, B, w.half_width)
        bad += got != want
        nonzero += want > 0
    dt = time.perf_counter() - t
    ok = bad == 0 and dt < 60
    record(ok, "MITM oracle", f"200 instances (N <= 20), {nonzero} with solutions, {bad} mismatches, {dt:.1f}s (< 60s)")
    assert ok


def test_admissibility_oracle():
    rng = random.Random(99)
    primes = np.flatnonzero(sieve(1100))
    bad = 0
    admissible = 0
    for _ in range(1000):
        n_forms = rng.randint(1, 8)
        forms = list({(rng.randint(1, 1000), rng.randint(0, 1000)) for _ in range(n_forms)})
        # beyond max(50, largest coefficient) no prime divides a coefficient and
        # each form kills one residue, so the scan there is complete
        limit = max(50, max(max(f) for f in forms))
        want = admissible_numpy(forms, limit, primes)
        bad += is_admissible(forms) != want
        admissible += want
    random_detail = f"1000 random tuples ({admissible} admissible)"

    emitted = 0
    for _ in range(150):
        L = math.prod(rng.sample([5, 7, 11, 13, 17, 19, 23], rng.randint(1, 4)))
        divisors = [d for d in range(1, L + 1) if L % d == 0]
        S = sorted(rng.sample(divisors, min(len(divisors), rng.randint(1, 4))))
        for a_L in list(iter_lifts(residue_selection(L, S)))[:10]:
            t = build_forms(S, L, a_L)
            # c coprime to d and fewer than 50 forms: primes above 50 cannot cover
            assert all(math.gcd(d, c) == 1 for d, c in t.forms) and len(t.forms) < 50
            bad += not (is_admissible(t) and admissible_naive(t.forms, 50))
            emitted += 1
    ok = bad == 0
    record(ok, "Admissibility oracle", f"{random_detail}, {emitted} emitted tuples, {bad} disagreements")
    assert ok


def test_ksearch_oracle():
    rng = random.Random(17)
    width = 10**5
    t = time.perf_counter()
    table = sieve(3 * 10**5 * 120 + 2)
    bad = 0
    hits = 0
    for _ in range(20):
        L = math.prod(rng.sample([3, 5, 7, 11, 13], rng.randint(1, 3)))
        divs = [d for d in range(1, min(L, 120) + 1) if L % d == 0]
        S = sorted(rng.sample(divs, min(len(divs), rng.randint(2, 3))))
        Y = rng.randint(width, 2 * width)
        k = np.arange(Y, Y + width, dtype=np.int64)
        prime_counts = sum(table[d * k + 1].astype(int) for d in S)
        coprime = np.gcd(k, L) == 1
        want = [int(x) for x in k[(prime_counts >= 2) & coprime]]
        got = [kk for kk, _ in find_T(KWindow(Y, L), S, (Y, Y + width))]
        bad += got != want
        hits += len(want)
    dt = time.perf_counter() - t
    ok = bad == 0
    record(ok, "ksearch oracle", f"20 instances x 10^5 consecutive k, {hits} hits, {bad} mismatches, {dt:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def flagship_run():
    t = time.perf_counter()
    rec = run_pipeline(load_config(FIXTURES / "flagship.ini"))
    return rec, time.perf_counter() - t


def test_pipeline_soundness(flagship_run):
    configs = [RunConfig(y=20, E=0.5, M=2), RunConfig(y=30, E=0.3, M=2, threshold=1, Y_override=500, A=0.1),
               RunConfig(y=40, E=0.2, M=2, threshold=1, Y_override=3000, k_span=1000, A=0.01,
                         N_min=30, N_max=34)]
    records = [flagship_run[0]] + [run_pipeline(c) for c in configs]
    checked = bad = 0
    for rec in records:
        k0 = int(rec.stages.get("ksearch", {}).get("k0", 1))
        L = int(rec.stages.get("forms", {}).get("L", 1))
        for c in rec.certificates:
            checked += 1
            bad += not (c["korselt_ok"] and int(c["n"]) % (k0 * L) == 1)
    # a broken congruence must surface as exit code 3
    try:
        assemble_pi(SubsetSolution((0, 1, 2), (7, 13, 31), 2821, 1, 0.0), 6, 11)
        guarded = False
    except ConsistencyError as exc:
        guarded = exc.exit_code == 3
    ok = bad == 0 and checked > 0 and guarded
    record(ok, "Pipeline soundness", f"{len(records)} runs, {checked} certificates, {bad} violations, "
           f"violation exit code 3: {guarded}")
    assert ok


def test_short_intervals():
    t = time.perf_counter()
    fixed = scan_interval(500, 1)[1] == [561] and scan_interval(1000, 1)[1] == [1105]
    spf = spf_table(10**6)
    rng = random.Random(8)
    bad = 0
    seen = 0
    for _ in range(10):
        z = rng.randint(2, 7 * 10**5)  # keeps the interval top below 10^6
        count, found = scan_interval(z, 1)
        top = math.floor(z + z / math.log(z) ** (1 / 3))
        bad += found != carmichael_naive(z, top, spf) or count != len(found)
        seen += count
    dt = time.perf_counter() - t
    ok = fixed and bad == 0 and dt < 60
    record(ok, "Short-interval spot checks", f"561 and 1105 {fixed}, 10 random intervals "
           f"({seen} Carmichael numbers), {bad} mismatches, {dt:.1f}s (< 60s)")
    assert ok


def test_flagship(flagship_run, tmp_path):
    rec, first = flagship_run
    t = time.perf_counter()
    path = tmp_path / "flagship.json"
    path.write_text(rec.to_json())
    again = replay(path)
    same = json.dumps(again.to_dict(with_timings=False), sort_keys=True, indent=2) == \
        json.dumps(rec.to_dict(with_timings=False), sort_keys=True, indent=2)
    committed = replay(FIXTURES / "flagship_record.json")
    same_committed = committed.to_dict(with_timings=False)["certificates"] == \
        json.loads((FIXTURES / "flagship_record.json").read_text())["certificates"]
    total = first + time.perf_counter() - t
    digits = [len(c["n"]) for c in rec.certificates]
    ok = len(rec.certificates) >= 1 and same and same_committed and total < 300
    record(ok, "Flagship fixture", f"{len(rec.certificates)} certificates ({digits} digits), "
           f"replay identical {same}, committed record reproduced {same_committed}, {total:.0f}s (< 300s)")
    assert ok
