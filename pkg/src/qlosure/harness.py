"""Experiment harness: single runs, benchmark sweeps and ablations.

Everything written by :func:`write_bench` except ``timings.csv`` is a pure
function of (inputs, seed, config), so repeated sweeps are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import mean

from .affine import lift
from .circuit import Circuit
from .qasm import load_qasm
from .router import RouteTimeout, RouterConfig, route_circuit
from .topology import CouplingGraph, apsp, get_backend
from .verify import depth, depth_factor, verify_routed

SCHEMA = "qlosure.run_report.v1"
REPORT_FIELDS = ["circuit", "backend", "variant", "seed", "status", "verified", "qops",
                 "two_qubit_gates", "swaps", "depth_pre", "depth_post", "reference_depth",
                 "depth_factor"]
PHASES = ["parse", "lift", "depgraph", "closure", "initial_mapping", "route", "verify"]
ABLATION_RUNS = {
    "distance_only": ("distance_only", 0),
    "layer_adjusted": ("layer_adjusted", 0),
    "dependency_weighted": ("dependency_weighted", 0),
    "bidirectional": ("dependency_weighted", 1),
}


@dataclass
class RunReport:
    circuit: str
    backend: str
    variant: str
    seed: int
    status: str = "ok"  # ok | timeout | error
    verified: bool = False
    qops: int = 0
    two_qubit_gates: int = 0
    swaps: int = 0
    depth_pre: int = 0
    depth_post: int = 0
    reference_depth: int = 0
    depth_factor: float = 0.0
    error: str = ""
    elapsed_ms: dict[str, float] = field(default_factory=dict)

    def row(self) -> dict:
        out = {k: getattr(self, k) for k in REPORT_FIELDS}
        out["depth_factor"] = f"{self.depth_factor:.6f}"
        return out


def job_seed(seed: int, name: str) -> int:
    """Per-circuit RNG seed derived from the sweep seed and the circuit name."""
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


@dataclass
class SuiteEntry:
    name: str
    path: str | None = None
    circuit: Circuit | None = None
    optimal_depth: int | None = None


def load_suite(source) -> list[SuiteEntry]:
    """A directory of ``.qasm`` files (``manifest.json`` optional) or a manifest path."""
    path = Path(source)
    manifest = path / "manifest.json" if path.is_dir() else path
    if manifest.is_file():
        data = json.loads(manifest.read_text(encoding="utf-8"))
        base = manifest.parent
        return [SuiteEntry(e["name"], str(base / e["file"]), None, e.get("optimal_depth"))
                for e in data["circuits"]]
    if path.is_dir():
        return [SuiteEntry(p.stem, str(p)) for p in sorted(path.glob("*.qasm"))]
    raise FileNotFoundError(f"suite {source} not found")


def run_one(entry: SuiteEntry, graph: CouplingGraph, variant: str, seed: int,
            passes: int = 0, config_overrides: dict | None = None,
            timeout: float | None = None, dist=None, label: str | None = None) -> RunReport:
    rep = RunReport(entry.name, graph.name, label or variant, seed)
    elapsed: dict[str, float] = {}
    try:
        t0 = time.perf_counter()
        circuit = entry.circuit if entry.circuit is not None else load_qasm(entry.path)
        elapsed["parse"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        lift(circuit)
        elapsed["lift"] = time.perf_counter() - t0
        rep.qops = len(circuit.gates)
        rep.two_qubit_gates = len(circuit.two_qubit_gates)
        cfg = RouterConfig(variant=variant, seed=job_seed(seed, entry.name),
                           **(config_overrides or {}))
        deadline = time.monotonic() + timeout if timeout else None
        result = route_circuit(circuit, graph, cfg, passes=passes, dist=dist, deadline=deadline)
        for key in ("depgraph", "closure", "initial_mapping", "route"):
            if key in result.elapsed:
                elapsed[key] = result.elapsed[key]
        t0 = time.perf_counter()
        check = verify_routed(circuit, result.routed, result.initial_layout, graph)
        elapsed["verify"] = time.perf_counter() - t0
        rep.verified = check.ok
        rep.swaps = result.swap_count
        rep.depth_pre = depth(circuit, cfg.swap_depth_model)
        rep.depth_post = result.depth
        rep.reference_depth = entry.optimal_depth or rep.depth_pre
        if rep.reference_depth >= 1:
            rep.depth_factor = depth_factor(rep.depth_post, rep.reference_depth)
        if not check.ok:
            rep.status = "error"
            rep.error = f"verification failed: {check.violations[0].detail}"
    except RouteTimeout as exc:
        rep.status, rep.error = "timeout", str(exc)
    except Exception as exc:  # noqa: BLE001 - a sweep records per-circuit failures and continues
        rep.status, rep.error = "error", f"{type(exc).__name__}: {exc}"
    rep.elapsed_ms = {k: round(v * 1000.0, 3) for k, v in elapsed.items()}
    return rep


def _run_job(args) -> RunReport:
    return run_one(*args)


def run_sweep(entries: list[SuiteEntry], graph: CouplingGraph, runs: list[tuple[str, str, int]],
              seed: int, jobs: int = 1, timeout: float | None = None,
              config_overrides: dict | None = None) -> list[RunReport]:
    """``runs`` holds ``(label, variant, passes)``; reports come back in input order."""
    dist = apsp(graph)
    tasks = [(e, graph, variant, seed, passes, config_overrides, timeout, dist, label)
             for e in entries for label, variant, passes in runs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_job, tasks))
    return [_run_job(t) for t in tasks]


def bucket(depth_pre: int) -> str:
    if depth_pre <= 500:
        return "Medium"
    if depth_pre >= 600:
        return "Large"
    return "Other"


def summarize(reports: list[RunReport], reference: str | None = None) -> list[dict]:
    """Per (variant, bucket) means over verified runs, plus SWAP ratios vs ``reference``.

    ``swap_ratio`` is the mean per-circuit ratio ``swaps(variant) / swaps(reference)``
    over circuits where the reference inserted at least one SWAP.
    """
    good = [r for r in reports if r.status == "ok" and r.verified]
    variants = list(dict.fromkeys(r.variant for r in reports))
    reference = reference or (variants[-1] if variants else None)
    ref_swaps = {r.circuit: r.swaps for r in good if r.variant == reference}
    rows = []
    for v in variants:
        for b in ("Medium", "Large", "Other", "All"):
            sel = [r for r in good if r.variant == v and (b == "All" or bucket(r.depth_pre) == b)]
            if not sel:
                continue
            ratios = [r.swaps / ref_swaps[r.circuit] for r in sel if ref_swaps.get(r.circuit)]
            rows.append({
                "variant": v, "bucket": b, "n": len(sel),
                "mean_swaps": f"{mean(r.swaps for r in sel):.4f}",
                "mean_depth_post": f"{mean(r.depth_post for r in sel):.4f}",
                "mean_depth_factor": f"{mean(r.depth_factor for r in sel):.6f}",
                "reference": reference,
                "swap_ratio": f"{mean(ratios):.6f}" if ratios else "",
            })
    return rows


SUMMARY_FIELDS = ["variant", "bucket", "n", "mean_swaps", "mean_depth_post",
                  "mean_depth_factor", "reference", "swap_ratio"]


def ablation_table(reports: list[RunReport]) -> list[dict]:
    good = [r for r in reports if r.status == "ok" and r.verified]
    variants = list(dict.fromkeys(r.variant for r in reports))
    means = {}
    for v in variants:
        sel = [r for r in good if r.variant == v]
        if sel:
            means[v] = (mean(r.swaps for r in sel), mean(r.depth_post for r in sel), len(sel))
    base = means.get("distance_only")
    rows = []
    for v, (s, d, n) in means.items():
        row = {"variant": v, "n": n, "mean_swaps": f"{s:.4f}", "mean_depth": f"{d:.4f}",
               "swap_reduction_pct": "", "depth_reduction_pct": ""}
        if base and base[0]:
            row["swap_reduction_pct"] = f"{100.0 * (base[0] - s) / base[0]:.4f}"
        if base and base[1]:
            row["depth_reduction_pct"] = f"{100.0 * (base[1] - d) / base[1]:.4f}"
        rows.append(row)
    return rows


ABLATION_FIELDS = ["variant", "n", "mean_swaps", "mean_depth", "swap_reduction_pct",
                   "depth_reduction_pct"]


def to_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\r\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def reports_json(reports: list[RunReport]) -> str:
    body = []
    for r in reports:
        d = asdict(r)
        d.pop("elapsed_ms")
        body.append(d)
    return json.dumps({"schema": SCHEMA, "runs": body}, indent=1, sort_keys=True) + "\n"


def timings_csv(reports: list[RunReport]) -> str:
    rows = []
    for r in reports:
        row = {"circuit": r.circuit, "variant": r.variant, "qops": r.qops}
        row.update({p: r.elapsed_ms.get(p, "") for p in PHASES})
        rows.append(row)
    return to_csv(rows, ["circuit", "variant", "qops"] + PHASES)


def write_outputs(out_dir: Path, reports: list[RunReport], extra: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "reports.csv").write_text(to_csv([r.row() for r in reports], REPORT_FIELDS),
                                         encoding="utf-8", newline="")
    (out_dir / "reports.json").write_text(reports_json(reports), encoding="utf-8")
    (out_dir / "timings.csv").write_text(timings_csv(reports), encoding="utf-8", newline="")
    for name, text in extra.items():
        (out_dir / name).write_text(text, encoding="utf-8", newline="")
