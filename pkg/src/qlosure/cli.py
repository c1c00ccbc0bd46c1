"""``qlosure`` command line: route, bench, ablate, generate.

Exit codes: 0 ok, 1 run failure (error JSON on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import harness
from .benchgen import DEFAULT_DENSITY, make_suite
from .qasm import QasmError, emit_qasm, load_qasm
from .router import VARIANTS, RouterConfig, route_circuit
from .topology import TopologyError, get_backend
from .verify import depth, depth_factor, verify_routed

DEFAULT_TIMEOUT = 30 * 60.0


def _fail(kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return 1


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _router_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window-constant", type=int, default=None, dest="c",
                   help="look-ahead constant c (default: max degree + 1)")
    p.add_argument("--decay-increment", type=float, default=0.001)
    p.add_argument("--swap-depth-model", choices=["unit", "three_cx"], default="unit")
    p.add_argument("--stall-limit", type=int, default=None)
    p.add_argument("--raw-omega", action="store_true",
                   help="use transitive successor counts without the +1 smoothing")


def _overrides(args) -> dict:
    return {"c": args.c, "decay_increment": args.decay_increment,
            "swap_depth_model": args.swap_depth_model, "stall_limit": args.stall_limit,
            "omega_smoothing": not args.raw_omega}


def cmd_route(args) -> int:
    try:
        t0 = time.perf_counter()
        circuit = load_qasm(args.input)
        t_parse = time.perf_counter() - t0
        graph = get_backend(args.coupling)
        cfg = RouterConfig(variant=args.variant, seed=args.seed, **_overrides(args))
        result = route_circuit(circuit, graph, cfg, passes=args.passes)
    except QasmError as exc:
        return _fail("parse", str(exc))
    except (TopologyError, ValueError) as exc:
        return _fail("validation", str(exc))
    t0 = time.perf_counter()
    check = verify_routed(circuit, result.routed, result.initial_layout, graph)
    t_verify = time.perf_counter() - t0
    d_pre = depth(circuit, cfg.swap_depth_model)
    report = harness.RunReport(
        circuit.name, graph.name, args.variant, args.seed,
        status="ok" if check.ok else "error", verified=check.ok,
        qops=len(circuit.gates), two_qubit_gates=len(circuit.two_qubit_gates),
        swaps=result.swap_count, depth_pre=d_pre, depth_post=result.depth,
        reference_depth=d_pre,
        depth_factor=depth_factor(result.depth, d_pre) if d_pre else 0.0,
    )
    report.elapsed_ms = {"parse": t_parse * 1000, "verify": t_verify * 1000,
                         **{k: v * 1000 for k, v in result.elapsed.items()}}
    header = "\n".join([
        f"routed by qlosure: backend={graph.name} variant={args.variant} seed={args.seed}",
        "initial_layout: " + " ".join(map(str, result.initial_layout)),
        "final_layout: " + " ".join(map(str, result.final_layout)),
        f"swaps: {result.swap_count} depth: {result.depth} ({cfg.swap_depth_model})",
    ])
    if args.out:
        Path(args.out).write_text(emit_qasm(result.routed, header), encoding="utf-8")
    payload = {"schema": harness.SCHEMA, **report.__dict__,
               "initial_layout": result.initial_layout, "final_layout": result.final_layout,
               "violations": [v.__dict__ for v in check.violations]}
    text = json.dumps(payload, indent=1)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if not check.ok:
        return _fail("verification", check.violations[0].detail)
    return 0


def _sweep(args, runs) -> tuple[list[harness.RunReport], object] | int:
    try:
        entries = harness.load_suite(args.suite)
        graph = get_backend(args.backend)
    except FileNotFoundError as exc:
        return _fail("suite", str(exc))
    except TopologyError as exc:
        return _fail("validation", str(exc))
    reports = harness.run_sweep(entries, graph, runs, args.seed, args.jobs,
                                args.timeout, _overrides(args))
    return reports, graph


def cmd_bench(args) -> int:
    unknown = [v for v in args.variants if v not in VARIANTS]
    if unknown:
        return _fail("usage", f"unknown variants {unknown}")
    runs = [(v, v, args.passes) for v in args.variants]
    out = _sweep(args, runs)
    if isinstance(out, int):
        return out
    reports, _ = out
    summary = harness.summarize(reports, reference=args.variants[-1])
    harness.write_outputs(Path(args.out), reports,
                          {"summary.csv": harness.to_csv(summary, harness.SUMMARY_FIELDS)})
    return 0


def cmd_ablate(args) -> int:
    unknown = [v for v in args.variants if v not in harness.ABLATION_RUNS]
    if unknown:
        return _fail("usage", f"unknown ablation variants {unknown}")
    runs = [(v, *harness.ABLATION_RUNS[v]) for v in args.variants]
    out = _sweep(args, runs)
    if isinstance(out, int):
        return out
    reports, _ = out
    table = harness.ablation_table(reports)
    harness.write_outputs(Path(args.out), reports,
                          {"ablation.csv": harness.to_csv(table, harness.ABLATION_FIELDS)})
    return 0


def cmd_generate(args) -> int:
    try:
        graph = get_backend(args.graph)
        suite = make_suite(graph, args.depths, args.per_depth, args.seed,
                           (args.p1q, args.p2q))
    except (TopologyError, ValueError) as exc:
        return _fail("validation", str(exc))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for bc in suite:
        fname = f"{bc.circuit.name}.qasm"
        header = f"optimal_depth: {bc.optimal_depth}\nscramble: " + " ".join(map(str, bc.scramble))
        (out / fname).write_text(emit_qasm(bc.circuit, header), encoding="utf-8")
        entries.append({**bc.metadata, "file": fname})
    manifest = {"schema": "qlosure.suite_manifest.v1", "graph": graph.name, "seed": args.seed,
                "depths": args.depths, "per_depth": args.per_depth,
                "densities": [args.p1q, args.p2q], "circuits": entries}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlosure", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("route", help="route one QASM circuit")
    p.add_argument("--input", required=True)
    p.add_argument("--coupling", required=True, help="backend name, line:N, grid8:RxC or JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=VARIANTS, default="full")
    p.add_argument("--passes", type=int, default=0, help="bidirectional round trips")
    p.add_argument("--out")
    p.add_argument("--report")
    _router_args(p)
    p.set_defaults(func=cmd_route)

    for name, func, default, help_text in (
        ("bench", cmd_bench, ["distance_only", "full"], "sweep a suite over router variants"),
        ("ablate", cmd_ablate, list(harness.ABLATION_RUNS), "cost-function ablation study"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--suite", required=True, help="directory or manifest.json")
        p.add_argument("--backend", required=True)
        p.add_argument("--variants", type=lambda s: [x for x in s.split(",") if x], default=default)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds per run")
        p.add_argument("--out", required=True, help="output directory")
        if name == "bench":
            p.add_argument("--passes", type=int, default=0)
        _router_args(p)
        p.set_defaults(func=func)

    p = sub.add_parser("generate", help="generate a known-optimal-depth suite")
    p.add_argument("--graph", required=True)
    p.add_argument("--depths", type=_int_list, required=True)
    p.add_argument("--per-depth", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p1q", type=float, default=DEFAULT_DENSITY[0])
    p.add_argument("--p2q", type=float, default=DEFAULT_DENSITY[1])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
