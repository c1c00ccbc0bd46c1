"""Depth/SWAP metrics and permutation-level verification of routed circuits."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .circuit import Circuit
from .topology import CouplingGraph

SWAP_DEPTH = {"unit": 1, "three_cx": 3}


def depth(circuit: Circuit, swap_depth_model: str = "unit") -> int:
    """Critical-path length: every gate takes one step on each of its qubits.

    Barriers synchronise their qubits without adding a step. Under the
    ``three_cx`` model an (inserted or original) SWAP takes three steps.
    """
    swap_cost = SWAP_DEPTH[swap_depth_model]
    level = [0] * circuit.num_qubits
    for g in circuit.gates:
        if not g.qubits:
            continue
        start = max(level[q] for q in g.qubits)
        if g.name == "barrier":
            end = start
        elif g.name == "swap":
            end = start + swap_cost
        else:
            end = start + 1
        for q in g.qubits:
            level[q] = end
    return max(level, default=0)


def depth_factor(routed_depth: int, reference_depth: int) -> float:
    if reference_depth < 1:
        raise ValueError("reference depth must be >= 1")
    return routed_depth / reference_depth


@dataclass
class Violation:
    gate_id: int
    kind: str  # nonadjacent | missing_gate | reordered | wrong_operands
    detail: str


@dataclass
class VerificationReport:
    ok: bool
    violations: list[Violation] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)


def verify_routed(original: Circuit, routed: Circuit, initial_mapping: Sequence[int],
                  graph: CouplingGraph) -> VerificationReport:
    """Replay ``routed`` while tracking where every logical qubit lives.

    ``initial_mapping[q]`` is the physical home of logical ``q`` before the
    first routed gate. Gates flagged ``inserted`` move qubits; every other
    gate must be the next pending original gate on each of its logical
    qubits, which accepts any order consistent with per-qubit (and barrier)
    ordering.
    """
    violations: list[Violation] = []
    n_log = original.num_qubits
    phys2log: dict[int, int] = {}
    for q, p in enumerate(initial_mapping[:n_log]):
        if p in phys2log:
            violations.append(Violation(-1, "wrong_operands", f"physical {p} hosts two qubits"))
        phys2log[p] = q

    queues: list[deque[int]] = [deque() for _ in range(n_log)]
    for g in original.gates:
        for q in g.qubits:
            queues[q].append(g.id)
    consumed = [False] * len(original.gates)

    for g in routed.gates:
        if g.is_two_qubit and not graph.has_edge(*g.qubits):
            violations.append(Violation(g.id, "nonadjacent",
                                        f"{g.name} on non-adjacent physical pair {g.qubits}"))
        if g.inserted:
            a, b = g.qubits
            la, lb = phys2log.pop(a, None), phys2log.pop(b, None)
            if la is not None:
                phys2log[b] = la
            if lb is not None:
                phys2log[a] = lb
            continue
        logical = tuple(phys2log.get(p, -1) for p in g.qubits)
        if -1 in logical:
            violations.append(Violation(g.id, "wrong_operands",
                                        f"{g.name} touches unassigned physical qubit(s) {g.qubits}"))
            continue
        head = queues[logical[0]][0] if queues[logical[0]] else None
        cand = original.gates[head] if head is not None else None
        if (cand is not None and cand.name == g.name and cand.qubits == logical
                and cand.cbits == g.cbits and cand.params == g.params
                and all(queues[q] and queues[q][0] == head for q in logical)):
            for q in logical:
                queues[q].popleft()
            consumed[head] = True
            continue
        pending = [i for i in queues[logical[0]]
                   if original.gates[i].name == g.name and original.gates[i].qubits == logical]
        if pending:
            violations.append(Violation(g.id, "reordered",
                                        f"{g.name}{logical} executed before its predecessors"))
        else:
            violations.append(Violation(g.id, "wrong_operands",
                                        f"{g.name} on logical {logical} matches no pending gate"))
    for gid, done in enumerate(consumed):
        if not done:
            violations.append(Violation(gid, "missing_gate",
                                        f"{original.gates[gid].name} never executed"))
    return VerificationReport(not violations, violations)
