"""Lift gate traces into 1-D macro-gates with affine qubit accesses.

A macro-gate stands for ``n`` consecutive instances of one gate whose
operands are affine in the iterator ``i``::

    >>> from qlosure.qasm import parse_qasm
    >>> c = parse_qasm("qreg q[8]; CX q[0],q[1]; CX q[1],q[3]; CX q[2],q[5]; CX q[3],q[7];")
    >>> [m.to_dict() for m in lift(c)]
    [{'name': 'cx', 'n': 4, 'q1': [1, 0], 'q2': [2, 1], 'sched': [1, 0]}]
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .circuit import Circuit, Gate

Affine = tuple[int, int]  # (a, b) means a*i + b


@dataclass(frozen=True)
class MacroGate:
    gate_name: str
    domain_size: int
    qubit_forms: tuple[Affine, ...]
    schedule: Affine
    params: tuple[float, ...] = ()
    cbit_forms: tuple[Affine, ...] = field(default=())

    @property
    def q1_affine(self) -> Affine:
        return self.qubit_forms[0]

    @property
    def q2_affine(self) -> Affine | None:
        return self.qubit_forms[1] if len(self.qubit_forms) > 1 else None

    def instance(self, i: int) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
        """Return ``(time, qubits, cbits)`` of iteration ``i``."""
        s, t0 = self.schedule
        return (
            s * i + t0,
            tuple(a * i + b for a, b in self.qubit_forms),
            tuple(a * i + b for a, b in self.cbit_forms),
        )

    def to_dict(self) -> dict:
        out = {"name": self.gate_name, "n": self.domain_size,
               "q1": list(self.qubit_forms[0]) if self.qubit_forms else None}
        if self.q2_affine is not None:
            out["q2"] = list(self.q2_affine)
        if len(self.qubit_forms) > 2:
            out["qn"] = [list(f) for f in self.qubit_forms[2:]]
        out["sched"] = list(self.schedule)
        if self.params:
            out["params"] = list(self.params)
        if self.cbit_forms:
            out["cbits"] = [list(f) for f in self.cbit_forms]
        return out


def _signature(g: Gate) -> tuple:
    return (g.name, g.params, len(g.qubits), len(g.cbits))


def _fits(forms: list[Affine], values: tuple[int, ...], i: int) -> bool:
    return all(a * i + b == v for (a, b), v in zip(forms, values))


def lift(circuit: Circuit) -> list[MacroGate]:
    """Greedily group maximal runs of consecutive, affinely-indexed gates."""
    macros: list[MacroGate] = []
    gates = circuit.gates
    j = 0
    while j < len(gates):
        first = gates[j]
        sig = _signature(first)
        qforms = [(0, q) for q in first.qubits]
        cforms = [(0, c) for c in first.cbits]
        n = 1
        while j + n < len(gates):
            g = gates[j + n]
            if _signature(g) != sig:
                break
            if n == 1:
                # two points fix the line
                qforms = [(q - b, b) for q, (_, b) in zip(g.qubits, qforms)]
                cforms = [(c - b, b) for c, (_, b) in zip(g.cbits, cforms)]
            elif not (_fits(qforms, g.qubits, n) and _fits(cforms, g.cbits, n)):
                break
            n += 1
        macros.append(MacroGate(first.name, n, tuple(qforms), (1, first.id),
                                first.params, tuple(cforms)))
        j += n
    return macros


def expand(macros: list[MacroGate], num_qubits: int | None = None,
           name: str = "circuit", num_clbits: int = 0) -> Circuit:
    """Inverse of :func:`lift`. Raises ``ValueError`` on out-of-range indices."""
    timed = []
    for m in macros:
        if m.domain_size < 1:
            raise ValueError(f"empty iteration domain for {m.gate_name}")
        for i in range(m.domain_size):
            t, qubits, cbits = m.instance(i)
            if any(q < 0 for q in qubits) or any(c < 0 for c in cbits):
                raise ValueError(f"negative index at {m.gate_name}[{i}]: {qubits}")
            if num_qubits is not None and any(q >= num_qubits for q in qubits):
                raise ValueError(f"index out of range at {m.gate_name}[{i}]: {qubits}")
            timed.append((t, m.gate_name, qubits, m.params, cbits))
    timed.sort(key=lambda x: x[0])
    if num_qubits is None:
        num_qubits = 1 + max((q for x in timed for q in x[2]), default=-1)
    gates = [Gate(i, gname, q, p, c) for i, (_, gname, q, p, c) in enumerate(timed)]
    return Circuit(num_qubits, gates, name, num_clbits)


def compression_stats(macros: list[MacroGate]) -> dict:
    num_gates = sum(m.domain_size for m in macros)
    ratio = num_gates / len(macros) if macros else 1.0
    return {"num_macros": len(macros), "num_gates": num_gates, "ratio": ratio}


def dump_macros(macros: list[MacroGate]) -> str:
    return json.dumps([m.to_dict() for m in macros], indent=1)
