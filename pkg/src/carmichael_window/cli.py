"""Command line interface: one subcommand per stage plus pipeline/replay."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .bvstats import bv_error_sum
from .carmichael import assemble_pi, korselt_check, scan_interval
from .divisors import DivisorFamily, build_family
from .errors import CarmichaelWindowError, ValidationError
from .forms import build_forms, is_admissible, iter_lifts, residue_selection
from .ksearch import KWindow, pick_k0, search_all
from .pipeline import RunConfig, _parse_value, load_config, replay, run_pipeline
from .smoothset import SmoothPrimeSet, build_smooth_primes
from .subsetprod import SubsetSolution, WindowSpec, mitm_subset_products

log = logging.getLogger("carmichael_window")


def _read_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_sieve(args):
    s = build_smooth_primes(args.y, args.E, args.exclude)
    _emit(s.to_dict(), args.output)


def cmd_partition(args):
    s = SmoothPrimeSet.from_dict(_read_json(args.input))
    _emit(build_family(s, args.M, args.cap).to_dict(), args.output)


def _family_subsets(fam: DivisorFamily) -> dict[int, list[int]]:
    return {j: fam.subsets[j] for j in fam.usable}


def cmd_forms(args):
    fam = DivisorFamily.from_dict(_read_json(args.input))
    L = 1
    for p in fam.source.primes:
        L *= p
    rows = []
    for j, S in _family_subsets(fam).items():
        if args.j is not None and j != args.j:
            continue
        sel = residue_selection(L, S)
        if sel.size == 0:
            rows.append({"j": j, "tuple": None, "admissible": None})
            continue
        a_L = next(iter_lifts(sel))
        t = build_forms(S, L, a_L, {"L": L, "a_L": a_L, "j": j})
        rows.append({"j": j, "tuple": t.to_dict(), "admissible": is_admissible(t),
                     "size_ratio": sel.size_ratio})
    _emit(rows, args.output)


def cmd_ksearch(args):
    fam = DivisorFamily.from_dict(_read_json(args.input))
    L = 1
    for p in fam.source.primes:
        L *= p
    window = KWindow(args.Y, L, args.V, args.W)
    k_range = None
    if args.k_lo is not None or args.k_hi is not None:
        k_range = (args.k_lo or args.Y, args.k_hi or 2 * args.Y)
    subsets = _family_subsets(fam)
    hits = search_all(window, subsets, k_range, args.threshold, args.threads)
    _emit(pick_k0(hits, window, subsets, not args.no_filter).to_dict(), args.output)


def _prime_list(data) -> list[int]:
    if isinstance(data, dict):
        if "Q" in data:
            return [int(q["prime"]) for q in data["Q"]]
        data = data["primes"]
    return [int(p) for p in data]


def cmd_subset(args):
    primes = _prime_list(_read_json(args.input))
    res = mitm_subset_products(primes, args.L, WindowSpec(args.B, args.A), args.limit)
    _emit(res.to_dict(), args.output)


def cmd_assemble(args):
    primes = _prime_list(_read_json(args.input))
    prod = 1
    for p in primes:
        prod *= p
    sol = SubsetSolution(tuple(range(len(primes))), tuple(primes), prod, prod % args.L, 0.0)
    _emit(assemble_pi(sol, args.k0, args.L).to_dict(), args.output)


def cmd_verify(args):
    _emit(korselt_check(args.n).to_dict(), args.output)


def cmd_scan(args):
    count, found = scan_interval(args.z, args.delta)
    _emit({"z": str(args.z), "delta": args.delta, "count": count, "carmichael": [str(n) for n in found]},
          args.output)


def cmd_bvstats(args):
    rep = bv_error_sum(args.x, args.exclude)
    if args.csv:
        Path(args.csv).write_text("\n".join(rep.csv_lines()) + "\n")
    _emit(rep.to_dict(), args.output)


def _config_from_args(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    for f in dataclasses.fields(RunConfig):
        raw = getattr(args, "set_" + f.name)
        if raw is not None:
            setattr(config, f.name, _parse_value(f.name, raw))
    return config


def cmd_pipeline(args):
    config = _config_from_args(args)
    record = run_pipeline(config)
    _log_parameters(record.parameters)
    log.info("outcome: %s (%d certificates)", record.outcome, len(record.certificates))
    text = record.to_json()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _log_parameters(params: dict) -> None:
    if not params:
        return
    nominal, used = params["nominal"], params["used"]
    log.info("%-8s %-24s %s", "param", "nominal", "used")
    for key in ("V", "W", "A", "M", "N"):
        nv = nominal.get(key, nominal.get("log_" + key, "-"))
        log.info("%-8s %-24s %s", key, nv, used.get(key))
    log.info("%-8s %-24s %s", "Upsilon", f"log={nominal.get('log_Upsilon')}", f"Y={used['Y']}")


def cmd_replay(args):
    record = replay(args.record, args.threads)
    log.info("replay matches: %s", record.outcome)
    if args.output:
        Path(args.output).write_text(record.to_json())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carmichael-window", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, with_input=False):
        p = sub.add_parser(name, help=help_text)
        if with_input:
            p.add_argument("input", help="JSON input file, or - for stdin")
        p.add_argument("-o", "--output", help="write JSON here instead of stdout")
        p.set_defaults(func=func)
        return p

    p = add("sieve", cmd_sieve, "smooth-shifted primes in [y/log y, y]")
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--E", type=float, required=True)
    p.add_argument("--exclude", type=int, nargs="*", default=[])

    p = add("partition", cmd_partition, "divisor family from a sieve JSON", True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--cap", type=int)

    p = add("forms", cmd_forms, "admissible linear forms per usable subset", True)
    p.add_argument("--j", type=int)

    p = add("ksearch", cmd_ksearch, "k-search and k0 selection from a family JSON", True)
    p.add_argument("--Y", type=int, required=True)
    p.add_argument("--V", type=float, default=1e3)
    p.add_argument("--W", type=float, default=1.0)
    p.add_argument("--no-filter", action="store_true")
    p.add_argument("--threshold", type=int, default=2)
    p.add_argument("--k-lo", type=int)
    p.add_argument("--k-hi", type=int)
    p.add_argument("--threads", type=int, default=1)

    p = add("subset", cmd_subset, "subset products = 1 mod L in a log window", True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--B", type=float, required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--limit", type=int)

    p = add("assemble", cmd_assemble, "multiply and certify a list of primes", True)
    p.add_argument("--k0", type=int, required=True)
    p.add_argument("--L", type=int, required=True)

    p = add("verify", cmd_verify, "Korselt certificate for n")
    p.add_argument("--n", type=int, required=True)

    p = add("scan", cmd_scan, "all Carmichael numbers in (z, z + z/(log z)^(1/(2+delta))]")
    p.add_argument("--z", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)

    p = add("bvstats", cmd_bvstats, "prime-counting error sums over moduli q <= x^(2/5)")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--exclude", type=int)
    p.add_argument("--csv")

    p = add("pipeline", cmd_pipeline, "full construction run")
    p.add_argument("--config", help="INI config; flags override it")
    for f in dataclasses.fields(RunConfig):
        p.add_argument("--" + f.name.replace("_", "-"), dest="set_" + f.name, metavar="VALUE")

    p = add("replay", cmd_replay, "re-run a stored record and compare")
    p.add_argument("record")
    p.add_argument("--threads", type=int)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except CarmichaelWindowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ValidationError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
