"""Gate and circuit containers shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

ONE_QUBIT = "one_qubit"
TWO_QUBIT = "two_qubit"
SWAP = "swap"
BARRIER = "barrier"
MEASURE = "measure"


@dataclass(frozen=True)
class Gate:
    """A single operation in program order.

    ``id`` doubles as the logical time step of the gate. ``inserted`` marks
    SWAPs added by the router (they permute the layout, original SWAPs don't).
    """

    id: int
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    cbits: tuple[int, ...] = ()
    inserted: bool = False

    @property
    def kind(self) -> str:
        if self.name == "barrier":
            return BARRIER
        if self.name == "measure":
            return MEASURE
        if self.name == "swap":
            return SWAP
        return TWO_QUBIT if len(self.qubits) == 2 else ONE_QUBIT

    @property
    def is_two_qubit(self) -> bool:
        """True for gates that need adjacent operands (includes SWAP)."""
        return len(self.qubits) == 2 and self.name not in ("barrier", "measure")


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    name: str = "circuit"
    num_clbits: int = 0

    def __post_init__(self) -> None:
        for pos, g in enumerate(self.gates):
            if g.id != pos:
                raise ValueError(f"gate ids must be 0..n-1, got id {g.id} at position {pos}")
            if len(set(g.qubits)) != len(g.qubits):
                raise ValueError(f"gate {g.id} ({g.name}) has repeated operands {g.qubits}")
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"gate {g.id} operand {q} out of range [0, {self.num_qubits})")

    def __len__(self) -> int:
        return len(self.gates)

    @classmethod
    def from_ops(
        cls,
        num_qubits: int,
        ops: Iterable[tuple],
        name: str = "circuit",
        num_clbits: int = 0,
    ) -> "Circuit":
        """Build from ``(name, qubits[, params[, cbits]])`` tuples; ids are assigned."""
        gates = []
        for i, op in enumerate(ops):
            gname, qubits = op[0], tuple(op[1])
            params = tuple(op[2]) if len(op) > 2 else ()
            cbits = tuple(op[3]) if len(op) > 3 else ()
            gates.append(Gate(i, gname, qubits, params, cbits))
        return cls(num_qubits, gates, name, num_clbits)

    @property
    def two_qubit_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.is_two_qubit]

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)

    def reversed(self) -> "Circuit":
        gates = [replace(g, id=i) for i, g in enumerate(reversed(self.gates))]
        return Circuit(self.num_qubits, gates, self.name + "_rev", self.num_clbits)

    def relabel(self, perm: Sequence[int], num_qubits: int | None = None) -> "Circuit":
        """Rename qubit ``q`` to ``perm[q]`` in every gate."""
        n = self.num_qubits if num_qubits is None else num_qubits
        gates = [replace(g, qubits=tuple(perm[q] for q in g.qubits)) for g in self.gates]
        return Circuit(n, gates, self.name, self.num_clbits)


def renumber(gates: Iterable[Gate]) -> list[Gate]:
    return [replace(g, id=i) for i, g in enumerate(gates)]


def structurally_equal(a: Circuit, b: Circuit, tol: float = 1e-12) -> bool:
    """Compare ids, names, operands, classical bits and params (within ``tol``)."""
    if a.num_qubits != b.num_qubits or len(a.gates) != len(b.gates):
        return False
    for ga, gb in zip(a.gates, b.gates):
        if (ga.id, ga.name, ga.qubits, ga.cbits) != (gb.id, gb.name, gb.qubits, gb.cbits):
            return False
        if len(ga.params) != len(gb.params):
            return False
        if any(abs(x - y) > tol for x, y in zip(ga.params, gb.params)):
            return False
    return True
