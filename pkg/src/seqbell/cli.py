"""Command-line front end: bounds, closed-form and simulated values,
critical schedules, figure datasets and the verification battery.

Exit codes: 0 success, 1 verification failure, 2 invalid arguments,
3 capacity exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .bellcore import (
    SharpnessSchedule,
    critical_schedule_exact,
    local_bound,
    max_pair_values,
    optimal_quantum_value,
    pnc_bound,
    porac_classical_success,
    porac_quantum_success_from_bell,
    sequential_value_closed_form,
    violates,
)
from .oracle import (
    CHAIN_MAX_N,
    oracle_local_bound,
    oracle_pnc_bound,
    oracle_sequential_value,
)
from .quantum import (
    SIM_MAX_N,
    BellScenario,
    CapacityError,
    alice_observables,
    anticommutation_residual,
    anticommuting_observables,
    bell_expectation,
    maximally_entangled_state,
    parity_obliviousness_check,
    porac_success_simulated,
    sequential_state,
    simulated_sequential_value,
    unsharp_instrument,
    wing_average_channel,
)

log = logging.getLogger("seqbell")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3
DEFAULT_TOL = 1e-8

SWEEP_FIELDS = [
    "n", "k", "bound_local", "bound_pnc", "q_opt", "q_pair_k",
    "eta_crit_exact", "eta_crit_approx", "feasible",
]


@dataclass
class RunConfig:
    command: str
    n: Optional[int] = None
    n_min: int = 2
    n_max: int = 10
    k_max: int = 3
    alice: tuple = ()
    bob: tuple = ()
    target: str = "pnc"
    which: Optional[int] = None
    simulate: bool = False
    sim_n_max: int = 8
    fmt: str = "csv"
    out: Optional[str] = None
    tol: float = DEFAULT_TOL
    seed: int = 0
    schedules: int = 10

    def validate(self):
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"unknown format {self.fmt!r}")
        if self.tol <= 0:
            raise ValueError("--tol must be positive")
        if self.command == "bounds" and not (2 <= self.n_min <= self.n_max):
            raise ValueError("need 2 <= --n-min <= --n-max")
        if self.command in ("closed-form", "simulate"):
            # SharpnessSchedule re-checks the range
            SharpnessSchedule(self.alice, self.bob)
        if self.command in ("simulate", "verify") and self.n is not None and self.n > SIM_MAX_N:
            raise CapacityError(f"simulation capped at n={SIM_MAX_N}")


@dataclass
class SweepRecord:
    n: int
    k: int
    bound_local: int
    bound_pnc: int
    q_opt: float
    q_pair_k: Optional[float]
    eta_crit_exact: Optional[float]
    eta_crit_approx: Optional[float]
    feasible: Optional[bool]

    def as_row(self) -> dict:
        return {f: getattr(self, f) for f in SWEEP_FIELDS}


@dataclass
class Output:
    fields: list
    rows: list
    metadata: dict = field(default_factory=dict)


def fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, float):
        return float(f"{v:.6g}")
    return v


def render(output: Output, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(output.fields)
        for row in output.rows:
            writer.writerow([fmt_value(row.get(f)) for f in output.fields])
        return buf.getvalue()
    records = [{f: json_value(row.get(f)) for f in output.fields} for row in output.rows]
    meta = {"tool": "seqbell", "version": __version__}
    meta.update(output.metadata)
    return json.dumps({"metadata": meta, "records": records}, indent=2, sort_keys=False) + "\n"


def _pair_records(n: int, pairs: int, target: str) -> list:
    sched = critical_schedule_exact(n, pairs, target)
    values = max_pair_values(n, pairs, target)
    out = []
    for k in range(1, pairs + 1):
        out.append(SweepRecord(
            n=n,
            k=k,
            bound_local=local_bound(n),
            bound_pnc=pnc_bound(n),
            q_opt=optimal_quantum_value(n),
            q_pair_k=values[k - 1],
            eta_crit_exact=sched.exact[k - 1],
            eta_crit_approx=sched.approx[k - 1],
            feasible=sched.feasible[k - 1],
        ))
    return out


def cmd_bounds(config: RunConfig) -> Output:
    fields = ["n", "bound_local", "bound_pnc", "q_opt", "p_classical", "p_quantum_opt"]
    rows = []
    for n in range(config.n_min, config.n_max + 1):
        q = optimal_quantum_value(n)
        rows.append({
            "n": n,
            "bound_local": local_bound(n),
            "bound_pnc": pnc_bound(n),
            "q_opt": q,
            "p_classical": porac_classical_success(n),
            "p_quantum_opt": porac_quantum_success_from_bell(n, q),
        })
    return Output(fields, rows)


_VALUE_FIELDS = [
    "n", "k", "l", "value", "bound_local", "bound_pnc",
    "violates_local", "violates_pnc", "porac_success",
]


def _value_row(n: int, sched: SharpnessSchedule, value: float) -> dict:
    return {
        "n": n,
        "k": sched.k,
        "l": sched.l,
        "value": value,
        "bound_local": local_bound(n),
        "bound_pnc": pnc_bound(n),
        "violates_local": violates(value, local_bound(n)),
        "violates_pnc": violates(value, pnc_bound(n)),
        "porac_success": porac_quantum_success_from_bell(n, value),
    }


def cmd_closed_form(config: RunConfig) -> Output:
    sched = SharpnessSchedule(config.alice, config.bob)
    value = sequential_value_closed_form(config.n, sched)
    return Output(list(_VALUE_FIELDS), [_value_row(config.n, sched, value)])


def cmd_simulate(config: RunConfig) -> Output:
    sched = SharpnessSchedule(config.alice, config.bob)
    value = simulated_sequential_value(config.n, sched)
    closed = sequential_value_closed_form(config.n, sched)
    row = _value_row(config.n, sched, value)
    row["porac_success"] = porac_success_simulated(config.n, sched)
    row["closed_form"] = closed
    row["residual"] = abs(value - closed)
    fields = list(_VALUE_FIELDS) + ["closed_form", "residual"]
    return Output(fields, [row], {"tolerance": config.tol})


def cmd_critical(config: RunConfig) -> Output:
    records = _pair_records(config.n, config.k_max, config.target)
    sched = critical_schedule_exact(config.n, config.k_max, config.target)
    meta = {
        "target": config.target,
        "max_pairs_exact_within_k_max": sched.max_pairs_exact,
        "max_pairs_approx": sched.max_pairs_approx,
    }
    return Output(list(SWEEP_FIELDS), [r.as_row() for r in records], meta)


def figure_records(which: int, n_max: int = 10) -> list:
    if which == 1:
        return [r for n in range(2, n_max + 1) for r in _pair_records(n, 2, "local")]
    if which == 2:
        return [r for n in range(2, n_max + 1) for r in _pair_records(n, 3, "pnc")]
    if which == 3:
        return _pair_records(100, 10, "pnc")
    raise ValueError(f"--which must be 1, 2 or 3, got {which}")


def cmd_figure(config: RunConfig) -> Output:
    target = "local" if config.which == 1 else "pnc"
    records = figure_records(config.which)
    meta = {"figure": config.which, "target": target}
    if config.simulate:
        worst = 0.0
        checked = 0
        for rec in records:
            if rec.q_pair_k is None or rec.n > min(config.sim_n_max, SIM_MAX_N):
                continue
            sched = critical_schedule_exact(rec.n, max(rec.k - 1, 1), target)
            etas = tuple(sched.exact[: rec.k - 1]) + (1.0,)
            sim = simulated_sequential_value(rec.n, SharpnessSchedule.symmetric(etas))
            worst = max(worst, abs(sim - rec.q_pair_k))
            checked += 1
        meta.update({"simulated_cells": checked, "max_residual": worst, "tolerance": config.tol})
    return Output(list(SWEEP_FIELDS), [r.as_row() for r in records], meta)


def _random_schedule(rng: random.Random, max_prior: int = 3) -> SharpnessSchedule:
    while True:
        k, l = rng.randint(1, max_prior + 1), rng.randint(1, max_prior + 1)
        if (k - 1) + (l - 1) <= max_prior:
            break
    return SharpnessSchedule(
        tuple(rng.random() for _ in range(k)),
        tuple(rng.random() for _ in range(l)),
    )


def verify_checks(n: int, tol: float = DEFAULT_TOL, seed: int = 0, schedules: int = 10) -> list:
    """Run every check for one n. Each entry is a dict with name/status/residual/tolerance."""
    checks = []

    def add(name, residual, limit, detail=""):
        checks.append({
            "check": name,
            "status": "pass" if residual < limit else "fail",
            "residual": float(residual),
            "tolerance": limit,
            "detail": detail,
        })

    def skip(name, reason):
        checks.append({"check": name, "status": "skipped", "residual": None, "tolerance": None, "detail": reason})

    for name, oracle, formula in (
        ("oracle_local_bound", oracle_local_bound, local_bound),
        ("oracle_pnc_bound", oracle_pnc_bound, pnc_bound),
    ):
        try:
            found = oracle(n)
            add(name, abs(found - formula(n)), 0.5, f"oracle={found} formula={formula(n)}")
        except CapacityError as exc:
            skip(name, f"capacity: {exc}")

    add("anticommutation", anticommutation_residual(anticommuting_observables(n)), 1e-12)
    alices = alice_observables(n)
    eye = np.eye(alices[0].dim)
    add("alice_involution", max(np.linalg.norm(a.matrix @ a.matrix - eye, ord=2) for a in alices), 1e-12)

    scen = BellScenario(n)
    fresh = maximally_entangled_state(scen.qubits_per_wing)
    add("optimal_value", abs(bell_expectation(fresh, n, 1.0, 1.0) - optimal_quantum_value(n)), 1e-10)

    rng = random.Random(seed)
    completeness = max(
        unsharp_instrument(o, rng.random()).completeness_residual()
        for o in alices + anticommuting_observables(n)
    )
    add("instrument_completeness", completeness, 1e-12)
    state = wing_average_channel(fresh, alices, rng.random(), "A")
    state = wing_average_channel(state, anticommuting_observables(n), rng.random(), "B")
    res = state.validity_residuals()
    add("channel_trace_hermiticity", max(res["trace"], res["hermiticity"]), 1e-12)
    add("channel_positivity", max(0.0, -res["min_eigenvalue"]), 1e-10)

    report = parity_obliviousness_check(n)
    add("parity_operator", report.max_operator_norm, 1e-10, f"{report.parity_set_size} parity strings")
    add("parity_states", report.max_trace_distance, 1e-10)

    worst_sim, worst_oracle, worst_porac = 0.0, 0.0, 0.0
    for _ in range(schedules):
        sched = _random_schedule(rng)
        closed = sequential_value_closed_form(n, sched)
        sim = bell_expectation(sequential_state(n, sched), n, sched.alice[-1], sched.bob[-1])
        worst_sim = max(worst_sim, abs(sim - closed))
        worst_porac = max(
            worst_porac,
            abs(porac_success_simulated(n, sched) - porac_quantum_success_from_bell(n, sim)),
        )
        if n <= CHAIN_MAX_N:
            worst_oracle = max(worst_oracle, abs(oracle_sequential_value(n, sched) - closed))
    add("closed_form_vs_simulation", worst_sim, tol, f"{schedules} schedules")
    add("porac_born_rule_vs_bell", worst_porac, 1e-10)
    if n <= CHAIN_MAX_N:
        add("closed_form_vs_chain_oracle", worst_oracle, tol, f"{schedules} schedules")
    else:
        skip("closed_form_vs_chain_oracle", f"capacity: chain oracle capped at n={CHAIN_MAX_N}")
    return checks


def cmd_verify(config: RunConfig) -> tuple[Output, int]:
    checks = verify_checks(config.n, config.tol, config.seed, config.schedules)
    fields = ["check", "status", "residual", "tolerance", "detail"]
    statuses = {c["status"] for c in checks}
    if "fail" in statuses:
        code = EXIT_FAIL
    elif "skipped" in statuses:
        code = EXIT_CAPACITY
    else:
        code = EXIT_OK
    meta = {"n": config.n, "passed": code == EXIT_OK}
    for c in checks:
        if c["residual"] is not None:
            c["residual"] = float(f"{c['residual']:.3e}")
    return Output(fields, checks, meta), code


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqbell", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"seqbell {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("bounds", parents=[common], help="local/pnc/quantum bounds per n")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=10)

    for name, help_ in (("closed-form", "closed-form sequential Bell value"),
                        ("simulate", "density-matrix simulation of the sequential value")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--alice", type=_floats, required=True, help="η1,η2,... (last is the measured pair)")
        p.add_argument("--bob", type=_floats, required=True, help="χ1,χ2,...")

    p = sub.add_parser("critical", parents=[common], help="critical sharpness schedule")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--target", choices=["pnc", "local"], default="pnc")

    p = sub.add_parser("figure", parents=[common], help="dataset behind figure 1, 2 or 3")
    p.add_argument("--which", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--simulate", action="store_true", help="cross-check cells by simulation")
    p.add_argument("--sim-n-max", type=int, default=8)

    p = sub.add_parser("verify", parents=[common], help="oracle and invariant checks for one n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedules", type=int, default=10)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command, fmt=args.fmt, out=args.out, tol=args.tol)
    for name in ("n", "n_min", "n_max", "k_max", "alice", "bob", "target", "which",
                 "simulate", "sim_n_max", "seed", "schedules"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    return cfg


def run(config: RunConfig) -> tuple[Output, int]:
    config.validate()
    if config.command == "bounds":
        return cmd_bounds(config), EXIT_OK
    if config.command == "closed-form":
        return cmd_closed_form(config), EXIT_OK
    if config.command == "simulate":
        out = cmd_simulate(config)
        return out, EXIT_OK if out.rows[0]["residual"] < config.tol else EXIT_FAIL
    if config.command == "critical":
        return cmd_critical(config), EXIT_OK
    if config.command == "figure":
        out = cmd_figure(config)
        ok = out.metadata.get("max_residual", 0.0) < config.tol
        return out, EXIT_OK if ok else EXIT_FAIL
    if config.command == "verify":
        return cmd_verify(config)
    raise ValueError(f"unknown command {config.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    config = config_from_args(args)
    try:
        output, code = run(config)
    except CapacityError as exc:
        print(f"seqbell: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, TypeError) as exc:
        print(f"seqbell: invalid arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = render(output, config.fmt)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        log.info("wrote %d rows to %s", len(output.rows), config.out)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
