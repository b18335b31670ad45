"""Command-line entry point: ``awqae <command> [options]``.

Exit codes: 0 success, 1 usage or validation error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from typing import Sequence

import numpy as np

from .engine import EXACT, SAMPLED, BitAllocation, BlockConfig, grover_cost
from .errors import AWQAEError, CapacityError, EmptyConditioningError, ValidationError
from .fullqae import run_full_qae
from .grover import AmplitudeProblem
from .harness import compare_random_phases, sweep_exact_grid
from .parallel import ParallelPlan, default_workers, run_blocks_parallel
from .postprocess import AWQAEResult, awqae, perturbed_confidence_report, resolve
from .records import TABLE_HEADER, RunRecord, make_run_record, rows_to_csv

# reference benchmark: (true amplitude, expected estimate), both to four decimals
TABLE1 = [
    (0.9233, 0.9239), (0.1542, 0.1528), (0.7460, 0.7451), (0.9524, 0.9524),
    (0.4708, 0.4714), (0.8168, 0.8176), (0.1815, 0.1800), (0.4081, 0.4080),
    (0.7939, 0.7940), (0.4243, 0.4248),
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def _common(p: argparse.ArgumentParser, mode: str, allocation: str = "3,3,4") -> None:
    p.add_argument("--allocation", default=allocation, help="bits per block, e.g. 3,3,4")
    p.add_argument("--shots", type=int, default=1024)
    p.add_argument("--epsilon", type=float, default=0.9)
    p.add_argument("--mstart", type=int, default=2)
    p.add_argument("--ba", type=int, default=0, choices=(0, 1))
    p.add_argument("--mode", choices=(EXACT, SAMPLED), default=mode)
    p.add_argument("--backend", choices=("auto", "analytic", "statevector"), default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallel", type=int, default=None,
                   help="worker threads (default: $AWQAE_WORKERS or 1)")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out", default=None, help="also write the document to this path")


def _problem_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=float, help="success probability")
    g.add_argument("--a", type=float, help="amplitude (squared internally)")
    g.add_argument("--phi", type=_fraction, help="eigenphase as a rational, e.g. 411/1024")
    g.add_argument("--marked", type=_int_list, help="marked items (with --ntarget)")
    p.add_argument("--ntarget", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="awqae", description="Windowed quantum amplitude estimation simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="single windowed estimate")
    _problem_args(p)
    _common(p, SAMPLED)
    p.add_argument("--delta-phi", type=_fraction, default=None,
                   help="also rerun with the phase-perturbed operator")

    p = sub.add_parser("compare", help="windowed estimate vs full QAE")
    _problem_args(p)
    _common(p, EXACT)
    p.add_argument("--m", type=int, default=None, help="full-QAE counting qubits")

    p = sub.add_parser("table", help="reproduce the amplitude comparison table")
    _common(p, EXACT)
    p.add_argument("--trials", type=int, default=None, help="random table of this many rows")

    p = sub.add_parser("count", help="quantum counting of marked items")
    _common(p, EXACT)
    p.add_argument("--ntarget", type=int, required=True, help="N = 2**ntarget")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--marked", type=_int_list)
    g.add_argument("--nmarked", type=int, help="mark items 0..M-1")

    p = sub.add_parser("cost", help="Grover-application accounting")
    p.add_argument("--allocation", default="3,3,4")
    p.add_argument("--mstart", type=int, default=2)
    p.add_argument("--ntarget", type=int, default=1)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None)

    p = sub.add_parser("sweep", help="exact-grid or random-phase sweep")
    _common(p, EXACT)
    p.add_argument("--ntotal", type=int, default=None)
    p.add_argument("--allocations", default=None,
                   help="semicolon-separated allocations, e.g. '4,4;2,2,2,2'")
    p.add_argument("--trials", type=int, default=None, help="random phases instead of the grid")
    return parser


def _config(args) -> BlockConfig:
    return BlockConfig(
        m_start=args.mstart, epsilon=args.epsilon, n_shots=args.shots, b_a=args.ba,
        mode=args.mode, rng_seed=args.seed, backend=args.backend,
    )


def _problem(args) -> AmplitudeProblem:
    if args.marked is not None:
        if args.ntarget is None:
            raise UsageError("--marked needs --ntarget")
        return AmplitudeProblem.counting(args.ntarget, args.marked)
    if args.phi is not None:
        return AmplitudeProblem.from_phase(args.phi)
    if args.a is not None:
        return AmplitudeProblem.from_amplitude(args.a)
    if args.p is not None:
        return AmplitudeProblem.rotation(args.p)
    raise UsageError("one of --p, --a, --phi, --marked is required")


def _run(problem, allocation, config, workers: int) -> AWQAEResult:
    if workers > 1:
        plan = ParallelPlan(workers, config.rng_seed)
        raw = run_blocks_parallel(problem, allocation, config, plan)
        return AWQAEResult(raw, resolve(raw.phi_raw, allocation, raw.amb_flags))
    return awqae(problem, allocation, config)


def _workers(args) -> int:
    return args.parallel if args.parallel is not None else default_workers()


def _emit(text: str, args) -> None:
    print(text)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def cmd_estimate(args) -> RunRecord:
    problem = _problem(args)
    allocation = BitAllocation.parse(args.allocation)
    config = _config(args)
    t0 = time.perf_counter()
    result = _run(problem, allocation, config, _workers(args))
    total_ms = (time.perf_counter() - t0) * 1e3
    cost = grover_cost(allocation, config.m_start, problem.n_target)
    record = make_run_record(problem, allocation, config, result, cost, total_ms)
    if args.delta_phi is not None:
        chk = perturbed_confidence_report(problem, allocation, config, args.delta_phi)
        record.outputs["confidence_check"] = {
            "passed": chk.passed,
            "delta_phi": str(chk.delta_phi),
            "phi_est_perturbed": str(chk.phi_est_perturbed),
            "special_flag_perturbed": chk.special_flag_perturbed,
        }
    o = record.outputs
    if args.format == "json":
        _emit(record.to_json(indent=2), args)
    elif args.format == "csv":
        keys = ["phi_raw", "phi_est_bits", "special_flag", "last_idx", "theta", "p_tilde", "a_tilde"]
        _emit(rows_to_csv([{k: o[k] for k in keys}], keys).rstrip("\n"), args)
    else:
        lines = [
            f"phi_raw      {o['phi_raw']}   amb_flags {o['amb_flags']}",
            f"phi_est      {o['phi_est_bits']} = {o['phi_est']}"
            + (f"   special chunk {o['last_idx']}" if o["special_flag"] else ""),
            f"p_tilde      {o['p_tilde']!r}",
            f"a_tilde      {o['a_tilde']!r}",
        ]
        if "confidence_check" in o:
            lines.append(f"confidence   {'pass' if o['confidence_check']['passed'] else 'FAIL'}")
        _emit("\n".join(lines), args)
    return record


def cmd_compare(args) -> dict:
    problem = _problem(args)
    allocation = BitAllocation.parse(args.allocation)
    m = args.m if args.m is not None else allocation.n_total
    if m != allocation.n_total:
        raise UsageError(
            f"bit budgets differ: allocation {allocation} has {allocation.n_total} bits, full QAE has {m}"
        )
    config = _config(args)
    res = _run(problem, allocation, config, _workers(args))
    full = run_full_qae(problem, m, config)
    err = 100 * abs(res.a_tilde - full.a_tilde) / full.a_tilde if full.a_tilde else 0.0
    doc = {
        "awqae": {"phi_raw": res.raw.phi_raw, "amb_flags": res.raw.amb_flags, **res.resolved.to_dict()},
        "full_qae": full.to_dict(),
        "error_pct": err,
    }
    if args.format == "json":
        _emit(json.dumps(doc, indent=2), args)
    elif args.format == "csv":
        row = {"awqae_estimate": res.a_tilde, "fullqae_estimate": full.a_tilde,
               "error_pct": err, "special_flag": res.resolved.special_flag}
        _emit(rows_to_csv([row], list(row)).rstrip("\n"), args)
    else:
        _emit(
            f"AWQAE    a_tilde {res.a_tilde!r}  ({res.resolved.phi_est_bits})"
            + ("  [special chunk]" if res.resolved.special_flag else "")
            + f"\nfull QAE a_tilde {full.a_tilde!r}  (y = {full.y})"
            + f"\nerror    {err:.2f}%",
            args,
        )
    return doc


def table_rows(amplitudes, allocation, config, workers=1) -> list[dict]:
    rows = []
    for a_true in amplitudes:
        problem = AmplitudeProblem.from_amplitude(a_true)
        res = _run(problem, allocation, config, workers)
        full = run_full_qae(problem, allocation.n_total, config)
        rows.append({
            "trial": len(rows) + 1,
            "true_amplitude": a_true,
            "awqae_estimate": res.a_tilde,
            "fullqae_estimate": full.a_tilde,
            "error_pct": 100 * abs(res.a_tilde - full.a_tilde) / full.a_tilde if full.a_tilde else 0.0,
            "special_flag": res.resolved.special_flag,
        })
    return rows


def cmd_table(args) -> dict:
    allocation = BitAllocation.parse(args.allocation)
    config = _config(args)
    excluded = 0
    if args.trials is None:
        rows = table_rows([a for a, _ in TABLE1], allocation, config, _workers(args))
    else:
        # random rows drop special-flag trials, matching how the table was built
        rng = np.random.default_rng(args.seed)
        rows = []
        while len(rows) < args.trials:
            a = math.sin(math.pi * rng.uniform(0, 0.5))
            (row,) = table_rows([a], allocation, config, _workers(args))
            if row["special_flag"]:
                excluded += 1
                continue
            row["trial"] = len(rows) + 1
            rows.append(row)
    doc = {"rows": rows, "excluded_special": excluded, "allocation": list(allocation.m_list)}
    if args.format == "json":
        _emit(json.dumps(doc, indent=2), args)
    elif args.format == "csv":
        _emit(rows_to_csv(rows, TABLE_HEADER).rstrip("\n"), args)
    else:
        lines = [f"{'trial':>5}  {'true':>8}  {'AWQAE':>8}  {'full QAE':>8}  {'error %':>7}"]
        for r in rows:
            lines.append(
                f"{r['trial']:>5}  {r['true_amplitude']:>8.4f}  {r['awqae_estimate']:>8.4f}  "
                f"{r['fullqae_estimate']:>8.4f}  {r['error_pct']:>7.2f}"
                + ("  *" if r["special_flag"] else "")
            )
        if any(r["special_flag"] for r in rows):
            lines.append("* special chunk flagged")
        if excluded:
            lines.append(f"{excluded} special-flag trials excluded")
        _emit("\n".join(lines), args)
    return doc


def cmd_count(args) -> dict:
    n = args.ntarget
    if not 1 <= n <= 6:
        raise UsageError("--ntarget must be in 1..6")
    marked = args.marked if args.marked is not None else list(range(args.nmarked))
    if args.nmarked is not None and not 0 <= args.nmarked <= (1 << n):
        raise UsageError(f"--nmarked must be in 0..{1 << n}")
    if len(set(marked)) != len(marked):
        raise UsageError("marked items must be distinct")
    problem = AmplitudeProblem.counting(n, marked)
    allocation = BitAllocation.parse(args.allocation)
    res = _run(problem, allocation, _config(args), _workers(args))
    big_n = 1 << n
    asin = math.asin(min(1.0, res.a_tilde))
    doc = {
        "N": big_n,
        "M_true": len(marked),
        "M_hat": round(big_n * res.p_tilde),
        "p_tilde": res.p_tilde,
        "a_tilde": res.a_tilde,
        "phi_est_bits": res.resolved.phi_est_bits,
        "special_flag": res.resolved.special_flag,
        # standard iteration count floor(pi / (4 arcsin a)); undefined when nothing is marked
        "grover_iterations": math.floor(math.pi / (4 * asin)) if asin > 0 else None,
    }
    if args.format == "json":
        _emit(json.dumps(doc, indent=2), args)
    elif args.format == "csv":
        _emit(rows_to_csv([doc], list(doc)).rstrip("\n"), args)
    else:
        _emit(
            f"N = {big_n}  M_hat = {doc['M_hat']}  (a_tilde {res.a_tilde:.6f})\n"
            f"recommended Grover iterations: {doc['grover_iterations']}",
            args,
        )
    return doc


def cmd_cost(args) -> dict:
    allocation = BitAllocation.parse(args.allocation)
    report = grover_cost(allocation, args.mstart, args.ntarget)
    doc = report.to_dict()
    if args.format == "json":
        _emit(json.dumps(doc, indent=2), args)
    else:
        lines = [f"{'block':>5} {'k':>3} {'m':>3} {'qubits':>6} {'counting Q':>10} {'resol. Q':>8} {'max power':>9}"]
        for b in doc["blocks"]:
            lines.append(
                f"{b['block']:>5} {b['k_offset']:>3} {b['m']:>3} {b['qubits']:>6} "
                f"{b['counting_applications']:>10} {b['resolution_applications']:>8} {b['max_power']:>9}"
            )
        f = doc["full_qae"]
        lines.append(
            f"total counting {doc['total_counting_applications']}, resolution "
            f"{doc['total_resolution_applications']}, max qubits/block {doc['max_qubits_per_block']}"
        )
        lines.append(
            f"full QAE: {f['applications']} applications in one block of {f['qubits']} qubits, "
            f"max power {f['max_power']}"
        )
        _emit("\n".join(lines), args)
    return doc


def cmd_sweep(args) -> dict:
    config = _config(args)
    if args.allocations:
        allocs = [BitAllocation.parse(s) for s in args.allocations.split(";") if s.strip()]
    else:
        allocs = [BitAllocation.parse(args.allocation)]
    n_total = args.ntotal or allocs[0].n_total
    if any(a.n_total != n_total for a in allocs):
        raise UsageError(f"every allocation must sum to {n_total}")
    if args.trials:
        report = compare_random_phases(args.trials, n_total, allocs[0], args.seed, config)
    else:
        report = sweep_exact_grid(n_total, allocs, config)
    doc = report.to_dict()
    if args.format == "json":
        _emit(json.dumps(doc, indent=2), args)
    else:
        _emit(
            f"cases {report.cases_run}  agreements {report.agreements}  "
            f"special {report.special_flag_count}  failures {len(report.failures)}",
            args,
        )
    return doc


COMMANDS = {
    "estimate": cmd_estimate,
    "compare": cmd_compare,
    "table": cmd_table,
    "count": cmd_count,
    "cost": cmd_cost,
    "sweep": cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (UsageError, ValidationError) as exc:
        print(f"awqae: error: {exc}", file=sys.stderr)
        return 1
    except (EmptyConditioningError, CapacityError, AWQAEError) as exc:
        print(f"awqae: runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
