"""Dependence-weighted SWAP routing.

The routing loop executes every front-layer gate whose operands are adjacent.
When none is, it scores candidate SWAPs around the front layer with::

    M(s) = max(decay[q1], decay[q2]) * sum_l (1/|G_l|) * sum_{g in G_l} w_g * D[g] / l

where ``G_l`` are dependence-distance layers of the look-ahead window,
``w_g`` the number of transitive successors of ``g`` and ``D[g]`` the
physical distance of ``g``'s operands after the tentative SWAP.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate
from .depgraph import DepGraph, build_depgraph, lookahead_window, transitive_weights
from .topology import CouplingGraph, apsp, shortest_path
from .verify import depth

VARIANTS = ("distance_only", "layer_adjusted", "dependency_weighted", "full")
TIE_RTOL = 1e-9


class RoutingError(ValueError):
    pass


class RouteTimeout(RuntimeError):
    pass


@dataclass
class Mapping:
    """Bijection between logical and physical qubits.

    Both arrays span every physical qubit; logical indices beyond the
    circuit's width are idle placeholders so SWAPs with empty sites work.
    """

    log2phys: list[int]
    phys2log: list[int]

    @classmethod
    def identity(cls, n: int) -> "Mapping":
        return cls(list(range(n)), list(range(n)))

    @classmethod
    def from_layout(cls, layout: Sequence[int], num_physical: int) -> "Mapping":
        """Place logical ``q`` on ``layout[q]``; the remaining slots fill free sites in order."""
        layout = [int(p) for p in layout]
        if len(set(layout)) != len(layout) or any(not 0 <= p < num_physical for p in layout):
            raise RoutingError(f"layout is not injective into {num_physical} qubits: {layout}")
        taken = set(layout)
        log2phys = layout + [p for p in range(num_physical) if p not in taken]
        phys2log = [0] * num_physical
        for q, p in enumerate(log2phys):
            phys2log[p] = q
        return cls(log2phys, phys2log)

    def swap(self, p1: int, p2: int) -> None:
        q1, q2 = self.phys2log[p1], self.phys2log[p2]
        self.phys2log[p1], self.phys2log[p2] = q2, q1
        self.log2phys[q1], self.log2phys[q2] = p2, p1

    def copy(self) -> "Mapping":
        return Mapping(list(self.log2phys), list(self.phys2log))

    def is_bijection(self) -> bool:
        n = len(self.log2phys)
        return (sorted(self.log2phys) == list(range(n))
                and all(self.phys2log[p] == q for q, p in enumerate(self.log2phys)))


@dataclass
class RouterConfig:
    c: int | None = None  # window constant; None -> max degree + 1
    decay_increment: float = 0.001
    seed: int = 0
    variant: str = "full"
    omega_smoothing: bool = True  # weight gates by successors + 1 so terminal gates still count
    stall_limit: int | None = None  # None -> 3 * |Q_phys|
    swap_depth_model: str = "unit"
    window_affinity: bool = False
    decay_by_physical: bool = False  # index decay by physical slot instead of logical qubit

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.swap_depth_model not in ("unit", "three_cx"):
            raise ValueError(f"unknown swap depth model {self.swap_depth_model!r}")
        if self.stall_limit is not None and self.stall_limit < 1:
            raise ValueError("stall_limit must be >= 1")

    def window_constant(self, graph: CouplingGraph) -> int:
        c = graph.max_degree + 1 if self.c is None else self.c
        if self.variant != "distance_only" and c <= graph.max_degree:
            raise ValueError(f"window constant {c} must exceed the max degree {graph.max_degree}")
        return c


@dataclass
class RouteResult:
    routed: Circuit
    initial_mapping: Mapping
    final_mapping: Mapping
    swap_count: int
    depth: int
    num_logical: int
    forced_swaps: int = 0
    elapsed: dict[str, float] = field(default_factory=dict)

    @property
    def initial_layout(self) -> list[int]:
        return self.initial_mapping.log2phys[: self.num_logical]

    @property
    def final_layout(self) -> list[int]:
        return self.final_mapping.log2phys[: self.num_logical]


# ---------------------------------------------------------------------------
# scoring


@dataclass
class ScoreState:
    """Everything the M-score reads; ``layers[0]`` is the front layer."""

    mapping: Mapping
    decay: Sequence[float]
    layers: Sequence[Sequence[int]]
    operands: Sequence[tuple[int, int]]
    omega: Sequence[float]
    dist: np.ndarray | Sequence[Sequence[int]]
    variant: str = "full"
    omega_smoothing: bool = False


def _gate_weight(v: int, state_omega, variant: str, smoothing: bool) -> float:
    if variant in ("distance_only", "layer_adjusted"):
        return 1.0
    return state_omega[v] + 1.0 if smoothing else float(state_omega[v])


def m_score(swap: tuple[int, int], state: ScoreState) -> float:
    """Evaluate one candidate SWAP directly, without committing it."""
    p1, p2 = swap
    l2p, p2l = state.mapping.log2phys, state.mapping.phys2log
    q1, q2 = p2l[p1], p2l[p2]

    def where(q: int) -> int:
        if q == q1:
            return p2
        if q == q2:
            return p1
        return l2p[q]

    D = state.dist
    if state.variant == "distance_only":
        return float(sum(D[where(a)][where(b)] for a, b in (state.operands[v] for v in state.layers[0])))
    total = 0.0
    for ell, layer in enumerate(state.layers, start=1):
        gamma = 0.0
        for v in layer:
            a, b = state.operands[v]
            w = _gate_weight(v, state.omega, state.variant, state.omega_smoothing)
            gamma += w * D[where(a)][where(b)] / ell
        total += gamma / len(layer)
    factor = max(state.decay[q1], state.decay[q2]) if state.variant == "full" else 1.0
    return factor * total


class _WindowScorer:
    """Incremental form of :func:`m_score` for one fixed window.

    A SWAP only moves two logical qubits, so only window gates on those
    qubits change distance; each candidate costs O(gates on two qubits).
    """

    def __init__(self, layers, operands, omega, variant, smoothing, dist, l2p):
        self.dist = dist
        self.by_qubit: dict[int, list[tuple[int, float]]] = {}
        self.terms: list[tuple[int, int, float]] = []
        if variant == "distance_only":
            layers = layers[:1]
        for ell, layer in enumerate(layers, start=1):
            norm = 1.0 if variant == "distance_only" else 1.0 / (ell * len(layer))
            for v in layer:
                a, b = operands[v]
                coef = _gate_weight(v, omega, variant, smoothing) * norm
                if coef == 0.0:
                    continue
                self.terms.append((a, b, coef))
                self.by_qubit.setdefault(a, []).append((b, coef))
                self.by_qubit.setdefault(b, []).append((a, coef))
        self.refresh(l2p)

    def refresh(self, l2p) -> None:
        D = self.dist
        self.base = sum(cf * D[l2p[a]][l2p[b]] for a, b, cf in self.terms)

    def score(self, p1: int, p2: int, l2p, p2l) -> float:
        D = self.dist
        q1, q2 = p2l[p1], p2l[p2]
        delta = 0.0
        d1, d2 = D[p1], D[p2]
        for o, cf in self.by_qubit.get(q1, ()):
            if o != q2:
                po = l2p[o]
                delta += cf * (d2[po] - d1[po])
        for o, cf in self.by_qubit.get(q2, ()):
            if o != q1:
                po = l2p[o]
                delta += cf * (d1[po] - d2[po])
        return self.base + delta


def candidate_swaps(front: Sequence[tuple[int, int]], mapping: Mapping,
                    graph: CouplingGraph) -> list[tuple[int, int]]:
    """Every coupling edge touching a physical qubit used by the front layer.

    ``front`` holds the logical operand pairs of the front-layer gates.
    """
    l2p = mapping.log2phys
    out = set()
    for a, b in front:
        for p1 in (l2p[a], l2p[b]):
            for p2 in graph.neighbors(p1):
                out.add((p1, p2) if p1 < p2 else (p2, p1))
    return sorted(out)


def select_swap(candidates: Sequence[tuple[int, int]], scores: Sequence[float],
                rng: random.Random) -> tuple[int, int]:
    """Lowest score wins; near-equal scores (relative 1e-9) are tied and drawn uniformly."""
    best = min(scores)
    tol = TIE_RTOL * max(1.0, abs(best))
    tied = [s for s, m in zip(candidates, scores) if m <= best + tol]
    return tied[0] if len(tied) == 1 else rng.choice(tied)


def update_decay(decay: list[float], q1: int, q2: int, increment: float) -> None:
    decay[q1] += increment
    decay[q2] += increment


# ---------------------------------------------------------------------------
# routing loop


def _as_mapping(initial, n_phys: int, n_log: int) -> Mapping:
    if initial is None:
        return Mapping.identity(n_phys)
    if isinstance(initial, Mapping):
        if len(initial.log2phys) != n_phys:
            raise RoutingError("initial mapping size differs from the coupling graph")
        return initial.copy()
    return Mapping.from_layout(list(initial)[:n_log], n_phys)


def route(circuit: Circuit, graph: CouplingGraph, config: RouterConfig | None = None,
          initial_mapping: Mapping | Sequence[int] | None = None, *,
          dist: np.ndarray | None = None, depgraph: DepGraph | None = None,
          deadline: float | None = None) -> RouteResult:
    """Route ``circuit`` onto ``graph``; the output uses physical qubit indices.

    ``deadline`` is a :func:`time.monotonic` timestamp after which
    :class:`RouteTimeout` is raised.
    """
    config = config or RouterConfig()
    n_phys, n_log = graph.num_qubits, circuit.num_qubits
    if n_log > n_phys:
        raise RoutingError(f"circuit needs {n_log} qubits, device has {n_phys}")
    c = config.window_constant(graph)
    stall_limit = config.stall_limit or 3 * n_phys
    variant = config.variant
    elapsed: dict[str, float] = {}

    t0 = time.perf_counter()
    if dist is None:
        dist = apsp(graph)
    D = dist.tolist() if isinstance(dist, np.ndarray) else dist
    elapsed["distance"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    dg = depgraph if depgraph is not None else build_depgraph(circuit, with_weights=False)
    elapsed["depgraph"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    if not dg.omega:
        dg.omega = transitive_weights(dg)
    elapsed["closure"] = time.perf_counter() - t0

    t_route = time.perf_counter()
    mapping = _as_mapping(initial_mapping, n_phys, n_log)
    start_mapping = mapping.copy()
    l2p, p2l = mapping.log2phys, mapping.phys2log
    rng = random.Random(config.seed)
    decay = [1.0] * n_phys
    use_decay = variant == "full"

    gates = circuit.gates
    node_of = {g: v for v, g in enumerate(dg.gate_ids)}
    operands = dg.operands
    remaining = [len(p) for p in dg.pred]
    front = {v for v, r in enumerate(remaining) if r == 0}

    # per-qubit program-order queues drive emission of non-routed gates
    queues: list[list[int]] = [[] for _ in range(n_log)]
    for g in gates:
        for q in g.qubits:
            queues[q].append(g.id)
    head = [0] * n_log
    out: list[Gate] = []

    def at_head(g: Gate) -> bool:
        return all(head[q] < len(queues[q]) and queues[q][head[q]] == g.id for q in g.qubits)

    def emit(g: Gate) -> None:
        out.append(Gate(len(out), g.name, tuple(l2p[q] for q in g.qubits), g.params, g.cbits))
        for q in g.qubits:
            head[q] += 1

    def flush(qubits) -> None:
        todo = list(qubits)
        while todo:
            q = todo.pop()
            if head[q] >= len(queues[q]):
                continue
            g = gates[queues[q][head[q]]]
            if not g.is_two_qubit and at_head(g):
                emit(g)
                todo.extend(g.qubits)

    def apply_swap(p1: int, p2: int) -> None:
        q1, q2 = p2l[p1], p2l[p2]
        mapping.swap(p1, p2)
        out.append(Gate(len(out), "swap", (p1, p2), inserted=True))
        if use_decay:
            if config.decay_by_physical:
                q1, q2 = p1, p2
            update_decay(decay, q1, q2, config.decay_increment)

    flush(range(n_log))
    swaps = forced = stall = 0
    scorer: _WindowScorer | None = None
    while front:
        if deadline is not None and time.monotonic() > deadline:
            raise RouteTimeout(f"routing {circuit.name} exceeded its time budget")
        ready = [v for v in front if D[l2p[operands[v][0]]][l2p[operands[v][1]]] == 1]
        if ready:
            for v in sorted(ready):
                g = gates[dg.gate_ids[v]]
                emit(g)
                front.discard(v)
                for w in dg.succ[v]:
                    remaining[w] -= 1
                    if remaining[w] == 0:
                        front.add(w)
                flush(g.qubits)
            if use_decay:
                decay = [1.0] * n_phys
            stall = 0
            scorer = None
            continue

        if stall >= stall_limit:
            # livelock guard: walk the oldest front gate's first operand to its partner
            a, b = operands[min(front)]
            path = shortest_path(graph, dist, l2p[a], l2p[b])
            for p_next in path[1:-1]:
                apply_swap(l2p[a], p_next)
                swaps += 1
                forced += 1
            stall = 0
            continue

        if scorer is None:
            if variant == "distance_only":
                layers = [sorted(front)]
            else:
                layers = lookahead_window(dg, front, l2p, c, config.window_affinity).layers
            scorer = _WindowScorer(layers, operands, dg.omega, variant,
                                   config.omega_smoothing, D, l2p)
        else:
            scorer.refresh(l2p)
        cands = candidate_swaps([operands[v] for v in front], mapping, graph)
        scores = [scorer.score(p1, p2, l2p, p2l) for p1, p2 in cands]
        if use_decay:
            key = (lambda p: p) if config.decay_by_physical else p2l.__getitem__
            scores = [m * max(decay[key(p1)], decay[key(p2)]) for m, (p1, p2) in zip(scores, cands)]
        p1, p2 = select_swap(cands, scores, rng)
        apply_swap(p1, p2)
        swaps += 1
        stall += 1

    if len(out) - swaps != len(gates):
        raise RoutingError("routing finished with unexecuted gates")
    elapsed["route"] = time.perf_counter() - t_route
    routed = Circuit(n_phys, out, circuit.name, circuit.num_clbits)
    return RouteResult(routed, start_mapping, mapping, swaps,
                       depth(routed, config.swap_depth_model), n_log, forced, elapsed)


def bidirectional_initial_mapping(circuit: Circuit, graph: CouplingGraph,
                                  config: RouterConfig | None = None, passes: int = 1,
                                  dist: np.ndarray | None = None) -> Mapping:
    """Refine the identity layout with ``passes`` forward/backward round trips.

    Each round trip routes the circuit forward, then routes the reversed
    circuit starting from the forward pass's final layout; the backward
    pass's final layout seeds the next round (or the caller's final route).
    """
    mapping = Mapping.identity(graph.num_qubits)
    if passes <= 0:
        return mapping
    dist = apsp(graph) if dist is None else dist
    rev = circuit.reversed()
    dg_fwd = build_depgraph(circuit)
    dg_rev = build_depgraph(rev)
    for _ in range(passes):
        fwd = route(circuit, graph, config, mapping, dist=dist, depgraph=dg_fwd)
        bwd = route(rev, graph, config, fwd.final_mapping, dist=dist, depgraph=dg_rev)
        mapping = bwd.final_mapping
    return mapping


def route_circuit(circuit: Circuit, graph: CouplingGraph, config: RouterConfig | None = None,
                  passes: int = 0, dist: np.ndarray | None = None,
                  deadline: float | None = None) -> RouteResult:
    """:func:`route`, optionally starting from a bidirectional initial mapping."""
    dist = apsp(graph) if dist is None else dist
    t0 = time.perf_counter()
    init = bidirectional_initial_mapping(circuit, graph, config, passes, dist) if passes else None
    t_init = time.perf_counter() - t0
    result = route(circuit, graph, config, init, dist=dist, deadline=deadline)
    if passes:
        result.elapsed["initial_mapping"] = t_init
    return result
