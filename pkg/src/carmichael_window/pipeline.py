"""End-to-end run: smooth primes -> divisor partition -> admissible forms ->
k-search -> subset products -> certified Carmichael numbers.

A run is a pure function of its RunConfig. The RunRecord it produces is
plain JSON; ``replay`` re-executes the embedded config and demands equality
of everything except timings.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .carmichael import assemble_pi
from .divisors import build_family
from .errors import BudgetError, ConsistencyError, DomainError, ReplayMismatch, ValidationError
from .forms import build_forms, is_admissible, iter_lifts, residue_selection
from .ksearch import KWindow, pick_k0, search_all
from .ntcore import carmichael_lambda, euler_phi
from .smoothset import build_smooth_primes, density_report
from .subsetprod import WindowSpec, bound_report, compute_params, mitm_windows, noncluster_check

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    y: float = 40.0
    E: float = 0.25
    delta: float = 1.0
    eta_override: float | None = None
    exclusions: list[int] = field(default_factory=list)
    M: int = 4
    divisor_cap: int | None = None
    Y_override: int | None = None
    k_span: int = 10_000
    threshold: int = 2
    V: float = 1e3
    W: float = 1.0
    filter_U: bool = True
    A: float = 2.0
    B_grid: list[float] = field(default_factory=lambda: [0.0])
    B_sweep: bool = False
    N_min: int = 4
    N_max: int | None = None
    subset_stage: bool = True
    solution_limit: int = 100
    mitm_ceiling: int = 50
    noncluster_samples: int = 400
    threads: int = 1

    def validate(self) -> None:
        if self.y < 10 or not 0 < self.E < 1 or self.delta <= 0:
            raise ValidationError("need y >= 10, 0 < E < 1, delta > 0")
        if self.M < 1 or self.M & (self.M - 1):
            raise ValidationError("M must be a power of two")
        if self.k_span < 1 or self.threshold < 1 or self.solution_limit < 1:
            raise ValidationError("k_span, threshold and solution_limit must be positive")
        if self.mitm_ceiling < 1 or self.threads < 1 or self.noncluster_samples < 1:
            raise ValidationError("budgets must be positive")
        if self.divisor_cap is not None and self.divisor_cap < 1:
            raise ValidationError("divisor_cap must be positive")
        if self.Y_override is not None and self.Y_override < 1:
            raise ValidationError("Y_override must be positive")
        if self.V <= 0 or self.W < 1 or self.A <= 0:
            raise ValidationError("need V > 0, W >= 1, A > 0")
        if self.subset_stage and not self.B_grid and not self.B_sweep:
            raise ValidationError("B_grid must be nonempty when the subset stage is enabled")
        if self.N_min < 1 or (self.N_max is not None and self.N_max < self.N_min):
            raise ValidationError("bad N range")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["exclusions"] = [str(p) for p in self.exclusions]
        d["Y_override"] = None if self.Y_override is None else str(self.Y_override)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        if "exclusions" in kw:
            kw["exclusions"] = [int(p) for p in kw["exclusions"]]
        if kw.get("Y_override") is not None:
            kw["Y_override"] = int(kw["Y_override"])
        return cls(**kw)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


_INI_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _parse_value(name: str, raw: str):
    kind = str(_INI_TYPES[name])
    raw = raw.strip()
    if raw.lower() in ("", "none") and "None" in kind:
        return None
    if kind.startswith("list"):
        items = [s for s in raw.replace(",", " ").split() if s]
        return [int(s) for s in items] if "int" in kind else [float(s) for s in items]
    if kind.startswith("bool"):
        return raw.lower() in ("1", "true", "yes", "on")
    if kind.startswith("int"):
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    return float(raw)


def load_config(path: str | Path) -> RunConfig:
    """Read an INI-style config; every section is flattened into one namespace."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    with open(path) as fh:
        parser.read_file(fh)
    values = {}
    for section in parser.sections():
        for key, raw in parser[section].items():
            if key not in _INI_TYPES:
                raise ValidationError(f"unknown config key {key!r} in [{section}]")
            values[key] = _parse_value(key, raw)
    return RunConfig(**values)


_SECTIONS = {
    "smoothset": ["y", "E", "delta", "eta_override", "exclusions"],
    "divisors": ["M", "divisor_cap"],
    "ksearch": ["Y_override", "k_span", "threshold", "V", "W", "filter_U"],
    "subset": ["A", "B_grid", "B_sweep", "N_min", "N_max", "subset_stage", "solution_limit",
               "mitm_ceiling", "noncluster_samples"],
    "run": ["threads"],
}


def dump_config(config: RunConfig) -> str:
    lines = []
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for k in keys:
            v = getattr(config, k)
            if isinstance(v, list):
                v = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{k} = {v}")
        lines.append("")
    return "\n".join(lines)


@dataclass
class RunRecord:
    config: RunConfig
    outcome: str
    stages: dict
    certificates: list[dict]
    parameters: dict
    timings: dict = field(default_factory=dict)

    def to_dict(self, with_timings: bool = True) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "config": self.config.to_dict(),
            "config_hash": self.config.digest(),
            "outcome": self.outcome,
            "stages": self.stages,
            "certificates": self.certificates,
            "parameters": self.parameters,
        }
        if with_timings:
            d["timings"] = self.timings
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


class _Stop(Exception):
    def __init__(self, stage: str, reason: str):
        self.stage, self.reason = stage, reason


def _order_for_nesting(Q):
    # Primes grouped by their subset j so that growing N adds whole pairs.
    return sorted(Q, key=lambda t: (t[2], t[1]))


def _b_values(config: RunConfig, N: int, q0: int) -> list[float]:
    if not config.B_sweep:
        return list(config.B_grid)
    # grid of step 1/A over |B| <= sqrt(N) log(q0) / 36
    step = 1.0 / config.A
    n = int(math.sqrt(N) * math.log(q0) / 36 / step)
    return [i * step for i in range(-n, n + 1)]


_NEXT_STAGE = {"sieve": "partition", "partition": "forms", "forms": "ksearch", "ksearch": "subset"}


def run_pipeline(config: RunConfig) -> RunRecord:
    config.validate()
    stages: dict = {}
    certs: dict[int, dict] = {}
    timings: dict[str, float] = {}
    params: dict = {}
    outcome = "certificates"
    clock = time.perf_counter()

    stage = "sieve"

    def tick(name):
        nonlocal clock, stage
        now = time.perf_counter()
        timings[name] = now - clock
        clock = now
        stage = _NEXT_STAGE.get(name, name)

    try:
        # sieve
        sps = build_smooth_primes(config.y, config.E, config.exclusions)
        count, eta = density_report(sps)
        stages["sieve"] = {"primes": [str(p) for p in sps.primes], "count": count, "eta": eta,
                           "smoothness_bound": sps.smoothness_bound}
        tick("sieve")
        eta_used = config.eta_override if config.eta_override is not None else eta
        if len(sps.primes) < 2:
            raise _Stop("sieve", "fewer than two smooth primes")

        # partition
        try:
            fam = build_family(sps, config.M, config.divisor_cap)
        except DomainError as exc:
            raise _Stop("partition", str(exc))
        usable = fam.usable
        stages["partition"] = {
            "divisors": len(fam.divisors), "truncated": fam.truncated, "M": fam.M,
            "subsets": len(fam.subsets), "spread_ok": len(usable),
            "discarded": len(fam.subsets) - len(usable),
        }
        tick("partition")
        if config.M < 2:
            raise _Stop("partition", "subsets of size 1 cannot carry a pair of primes")
        if not usable:
            raise _Stop("partition", "no subset with logarithmic spread > 1")

        # forms
        L = math.prod(sps.primes)
        subsets: dict[int, list[int]] = {}
        form_rows = []
        for j in usable:
            S = fam.subsets[j]
            sel = residue_selection(L, S)
            if sel.size == 0:
                form_rows.append({"j": j, "a_L": None, "admissible": None})
                continue
            a_L = next(iter_lifts(sel))
            t = build_forms(S, L, a_L, {"L": L, "a_L": a_L, "j": j})
            if not is_admissible(t):
                raise ConsistencyError(f"forms for S_{j} are not admissible")
            form_rows.append({"j": j, "a_L": str(a_L), "admissible": True,
                              "size_ratio": sel.size_ratio})
            subsets[j] = S
        stages["forms"] = {"L": str(L), "rows": form_rows}
        tick("forms")
        if not subsets:
            raise _Stop("forms", "every Omega is empty")

        # ksearch
        Y = config.Y_override if config.Y_override is not None else L * 1000
        window = KWindow(Y, L, config.V, config.W)
        k_range = (Y, Y + min(config.k_span, Y))
        hits = search_all(window, subsets, k_range, config.threshold, config.threads)
        stages["ksearch"] = {"Y": str(Y), "k_range": [str(k_range[0]), str(k_range[1])],
                             "T_total": sum(len(h) for h in hits.values())}
        if not any(hits.values()):
            tick("ksearch")
            raise _Stop("ksearch", "no k with enough primes in range")
        try:
            ks = pick_k0(hits, window, subsets, config.filter_U)
        except ValidationError as exc:
            tick("ksearch")
            raise _Stop("ksearch", str(exc))
        rep = ks.report()
        stages["ksearch"].update({
            "k0": str(ks.k0), "j_count_at_k0": ks.j_count_at_k0,
            "T_and_U_total": sum(r["T_and_U"] for r in rep.values()),
            "per_j": {str(j): r for j, r in rep.items() if r["T"]},
            "Q": [{"prime": str(p), "d": str(d), "j": j} for p, d, j in ks.Q],
        })
        tick("ksearch")

        Q = [t for t in _order_for_nesting(ks.Q) if L % t[0]]
        q_primes = [p for p, _, _ in Q]
        if not q_primes:
            raise _Stop("ksearch", "every prime of Q divides L")
        lam_L, phi_L = carmichael_lambda(L), euler_phi(L)
        q0 = max(q_primes)
        nominal = compute_params(config.y, config.E, eta_used if eta_used > 0 else 1e-9,
                                 config.delta, config.M, len(q_primes), phi_L=phi_L, q0=q0,
                                 smooth_primes=sps.primes)
        params = {
            "nominal": nominal.to_dict(),
            "used": {"Y": str(Y), "V": config.V, "W": config.W, "A": config.A, "M": config.M,
                     "N": len(q_primes), "eta": eta_used},
        }
        if not config.subset_stage:
            raise _Stop("subset", "subset stage disabled")

        # subset products
        n_hi = len(q_primes) if config.N_max is None else min(config.N_max, len(q_primes))
        n_values = [n for n in range(config.N_min, n_hi + 1) if n % 2 == 0]
        if n_hi >= config.N_min and n_hi % 2:
            n_values.append(n_hi)
        rows = []
        for N in n_values:
            QN = q_primes[:N]
            log_QN = math.fsum(math.log(p) for p in QN)
            bs = _b_values(config, N, max(QN))
            windows = [WindowSpec(B, config.A) for B in bs]
            results = mitm_windows(QN, L, windows, config.solution_limit, config.mitm_ceiling)
            total = 0
            for w, res in zip(windows, results):
                total += res.count
                if res.count:
                    rows.append({"N": N, "B": w.B, "count": res.count})
                for sol in res.solutions:
                    if len(sol.primes) < 3 or sol.d in certs:
                        continue
                    cert = assemble_pi(sol, ks.k0, L, w, log_QN)
                    certs[sol.d] = cert.to_dict()
            br = bound_report(N, config.A, max(QN), total, lam_L, phi_L)
            rows.append({"N": N, "B": None, "windows": len(windows), "count": total,
                         "bound": br.to_dict()})
        Xi = (config.A * len(q_primes) * phi_L * math.log(q0)) ** 2
        nc = noncluster_check(q_primes, lam_L, q0, config.A, Xi, config.noncluster_samples)
        stages["subset"] = {"N_values": n_values, "rows": rows,
                            "noncluster": nc.to_dict(),
                            "lambda_L": str(lam_L), "phi_L": str(phi_L)}
        tick("subset")
        if not certs:
            outcome = "no solutions at this scale"
            stages["stopped"] = {"stage": "subset", "reason": "no subset product qualified"}
    except BudgetError as exc:
        raise BudgetError(f"stage {stage}: {exc}") from exc
    except _Stop as stop:
        outcome = "no solutions at this scale"
        stages["stopped"] = {"stage": stop.stage, "reason": stop.reason}

    cert_list = [certs[n] for n in sorted(certs)]
    for c in cert_list:
        if not c["korselt_ok"]:
            raise ConsistencyError(f"certificate for {c['n']} failed Korselt")
    return RunRecord(config, outcome, stages, cert_list, params, timings)


def load_record(path: str | Path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {data.get('schema_version')}")
    return data


def first_divergence(a, b, path: str = "$") -> str | None:
    if type(a) is not type(b):
        return f"{path}: {type(a).__name__} != {type(b).__name__}"
    if isinstance(a, dict):
        for k in sorted(set(a) | set(b)):
            if k not in a or k not in b:
                return f"{path}.{k}: present on one side only"
            found = first_divergence(a[k], b[k], f"{path}.{k}")
            if found:
                return found
        return None
    if isinstance(a, list):
        for i, (x, y) in enumerate(zip(a, b)):
            found = first_divergence(x, y, f"{path}[{i}]")
            if found:
                return found
        if len(a) != len(b):
            return f"{path}: length {len(a)} != {len(b)}"
        return None
    return None if a == b else f"{path}: {a!r} != {b!r}"


def replay(record_path: str | Path, threads: int | None = None) -> RunRecord:
    """Re-run a stored record's config and require identical non-timing output."""
    stored = load_record(record_path)
    config = RunConfig.from_dict(stored["config"])
    if config.digest() != stored.get("config_hash"):
        raise ReplayMismatch("config hash does not match the embedded config")
    if threads is not None:
        # thread count is a resource knob; results must not depend on it
        config.threads = threads
    fresh = run_pipeline(config)
    a = {k: v for k, v in stored.items() if k not in ("timings", "config", "config_hash")}
    b = {k: v for k, v in fresh.to_dict(with_timings=False).items() if k not in ("config", "config_hash")}
    diff = first_divergence(a, b)
    if diff:
        raise ReplayMismatch(f"replay diverged at {diff}")
    return fresh
