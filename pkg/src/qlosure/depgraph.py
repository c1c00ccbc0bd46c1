"""Two-qubit-gate dependence DAG, transitive-successor weights and look-ahead layers."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .circuit import Circuit

# targets processed per pass of the blocked closure
CLOSURE_BLOCK = 1 << 16


class CycleError(ValueError):
    pass


@dataclass
class DepGraph:
    """Dependence DAG over the two-qubit gates of a circuit.

    Nodes are numbered ``0..m-1`` in program order; ``gate_ids[v]`` is the id
    of the gate behind node ``v`` and ``operands[v]`` its logical qubit pair.
    Only immediate edges (next reuse of a qubit) are stored; their transitive
    reachability equals that of the full shared-qubit relation.
    """

    gate_ids: list[int]
    operands: list[tuple[int, int]]
    succ: list[list[int]]
    pred: list[list[int]]
    omega: list[int] = field(default_factory=list)

    @property
    def num_nodes(self) -> int:
        return len(self.gate_ids)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, vs in enumerate(self.succ) for v in vs]

    def indegree(self) -> list[int]:
        return [len(p) for p in self.pred]

    def node_of(self) -> dict[int, int]:
        return {g: v for v, g in enumerate(self.gate_ids)}

    def to_dot(self) -> str:
        lines = ["digraph dep {"]
        for v, (a, b) in enumerate(self.operands):
            w = self.omega[v] if self.omega else "?"
            lines.append(f'  n{v} [label="g{self.gate_ids[v]} (q{a},q{b})\\nw={w}"];')
        for u, v in self.edges():
            lines.append(f"  n{u} -> n{v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_depgraph(circuit: Circuit, with_weights: bool = True) -> DepGraph:
    """Chain each two-qubit gate to the previous users of its qubits.

    Barriers act as fences: every gate after a barrier depends on the last
    two-qubit users (before the barrier) of all the barrier's qubits.
    """
    last: list[tuple[int, ...]] = [() for _ in range(circuit.num_qubits)]
    gate_ids: list[int] = []
    operands: list[tuple[int, int]] = []
    pred: list[list[int]] = []
    for g in circuit.gates:
        if g.name == "barrier":
            fence = tuple(sorted({v for q in g.qubits for v in last[q]}))
            for q in g.qubits:
                last[q] = fence
            continue
        if not g.is_two_qubit:
            continue
        a, b = g.qubits
        v = len(gate_ids)
        gate_ids.append(g.id)
        operands.append((a, b))
        pred.append(sorted(set(last[a]) | set(last[b])))
        last[a] = last[b] = (v,)
    succ: list[list[int]] = [[] for _ in gate_ids]
    for v, ps in enumerate(pred):
        for u in ps:
            succ[u].append(v)
    dg = DepGraph(gate_ids, operands, succ, pred)
    if with_weights:
        dg.omega = transitive_weights(dg)
    return dg


def topological_order(succ: Sequence[Sequence[int]]) -> list[int]:
    """Kahn's algorithm; raises :class:`CycleError` if ``succ`` is cyclic."""
    indeg = [0] * len(succ)
    for vs in succ:
        for v in vs:
            indeg[v] += 1
    ready = [v for v, d in enumerate(indeg) if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) != len(succ):
        raise CycleError("dependence graph contains a cycle")
    return order


def transitive_weights(dg: DepGraph, block: int = CLOSURE_BLOCK) -> list[int]:
    """Number of distinct transitive successors of every node.

    Reachability sets are Python-int bitsets unioned in reverse topological
    order. Targets are processed ``block`` positions at a time so memory
    stays bounded at O(m * block) bits.
    """
    m = dg.num_nodes
    order = topological_order(dg.succ)
    pos = [0] * m
    for i, v in enumerate(order):
        pos[v] = i
    succ_pos = [[pos[w] for w in dg.succ[v]] for v in order]
    counts = [0] * m
    for lo in range(0, m, block):
        hi = min(m, lo + block)
        # positions >= hi only reach positions > themselves, never [lo, hi)
        reach = [0] * hi
        for i in range(hi - 1, -1, -1):
            r = 0
            for j in succ_pos[i]:
                if j < hi:
                    r |= reach[j]
                    if j >= lo:
                        r |= 1 << (j - lo)
            reach[i] = r
            counts[i] += r.bit_count()
    return [counts[pos[v]] for v in range(m)]


def front_layer(dg: DepGraph, executed: Iterable[int] | Sequence[bool]) -> set[int]:
    """Unexecuted nodes whose predecessors have all executed."""
    if isinstance(executed, (list, tuple)) and (not executed or isinstance(executed[0], bool)):
        done = {v for v, flag in enumerate(executed) if flag}
    else:
        done = set(executed)
    return {v for v in range(dg.num_nodes)
            if v not in done and all(u in done for u in dg.pred[v])}


@dataclass
class LayeredWindow:
    front: list[int]
    window: list[int]
    layers: list[list[int]]
    k: int
    n_front_qubits: int

    def layer_of(self) -> dict[int, int]:
        """Node -> 1-based layer index."""
        return {v: i + 1 for i, layer in enumerate(self.layers) for v in layer}


def default_window_constant(max_degree: int) -> int:
    return max_degree + 1


def lookahead_window(dg: DepGraph, front: Iterable[int], mapping: Sequence[int], c: int,
                     affinity: bool = False) -> LayeredWindow:
    """Front layer plus the topologically earliest upcoming gates, layered.

    ``k = c * n_f`` with ``n_f`` the number of distinct physical qubits used by
    the front layer. Gates are taken in program order by a heap walk from the
    front, which keeps the window closed under unexecuted predecessors. A
    gate's layer is one more than the deepest of its window predecessors.
    With ``affinity`` only gates touching a front-layer qubit are kept.
    """
    front = sorted(front)
    front_set = set(front)
    phys = {mapping[q] for v in front for q in dg.operands[v]}
    n_f = len(phys)
    k = c * n_f
    heap = list(front)
    heapq.heapify(heap)
    seen = set(front)
    window: list[int] = []
    while heap and len(window) < max(k, len(front)):
        u = heapq.heappop(heap)
        window.append(u)
        for v in dg.succ[u]:
            if v not in seen:
                seen.add(v)
                heapq.heappush(heap, v)
    if affinity:
        logical = {q for v in front for q in dg.operands[v]}
        window = [v for v in window
                  if v in front_set or logical.intersection(dg.operands[v])]
    member = set(window)
    level: dict[int, int] = {}
    for v in window:  # ascending node index is a topological order
        if v in front_set:
            level[v] = 1
        else:
            level[v] = 1 + max((level[u] for u in dg.pred[v] if u in member), default=1)
    depth = max(level.values(), default=0)
    layers: list[list[int]] = [[] for _ in range(depth)]
    for v in window:
        layers[level[v] - 1].append(v)
    layers = [layer for layer in layers if layer]
    return LayeredWindow(front, window, layers, k, n_f)
