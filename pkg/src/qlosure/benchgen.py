"""QUEKO-style circuits whose optimal depth on a given coupling graph is known.

The generator lays out ``T`` cycles of operand-disjoint gates directly on the
physical qubits (two-qubit gates only on coupling edges), threads a witness
chain through consecutive cycles so the depth is exactly ``T``, then hides
the layout behind a random qubit permutation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .circuit import Circuit, Gate
from .topology import CouplingGraph

ONE_QUBIT_NAMES = ("x", "y", "z", "h", "s", "t", "sdg", "tdg")
DEFAULT_DENSITY = (0.1, 0.6)


class DensityError(ValueError):
    pass


@dataclass
class BenchSpec:
    graph: CouplingGraph
    target_depth: int
    density: tuple[float, float] = DEFAULT_DENSITY  # (1q, 2q) fraction of qubits busy per cycle
    seed: int = 0

    def validate(self) -> None:
        p1, p2 = self.density
        if self.target_depth < 1:
            raise ValueError("target depth must be >= 1")
        if p1 < 0 or p2 < 0 or p1 + p2 > 1:
            raise DensityError(f"densities {self.density} must be >= 0 and sum to at most 1")
        if p2 > 0 and not self.graph.edges:
            raise DensityError("two-qubit density requested on a graph without edges")


@dataclass
class BenchCircuit:
    circuit: Circuit  # scrambled, what a mapper sees
    optimal_depth: int
    scramble: list[int]  # physical qubit p became logical scramble[p]
    unscrambled: Circuit  # executable on the graph with zero swaps under identity
    metadata: dict = field(default_factory=dict)


def _cycle(graph: CouplingGraph, rng: random.Random, n2: int, n1: int,
           chain_from: tuple[int, ...] | None, p1: float, p2: float):
    busy: set[int] = set()
    ops: list[tuple[str, tuple[int, ...]]] = []
    # witness gate first so it always finds room
    if chain_from is None:
        anchor = rng.randrange(graph.num_qubits)
    else:
        anchor = rng.choice(chain_from)
    free_nb = list(graph.neighbors(anchor))
    want_2q = free_nb and (p1 + p2 == 0 or rng.random() < p2 / (p1 + p2))
    if want_2q:
        other = rng.choice(free_nb)
        ops.append(("cx", (anchor, other) if rng.random() < 0.5 else (other, anchor)))
        busy.update((anchor, other))
    else:
        ops.append((rng.choice(ONE_QUBIT_NAMES), (anchor,)))
        busy.add(anchor)
    witness = ops[0][1]

    edges = sorted(graph.edges)
    rng.shuffle(edges)
    count2 = 1 if want_2q else 0
    for a, b in edges:
        if count2 >= n2:
            break
        if a in busy or b in busy:
            continue
        ops.append(("cx", (a, b) if rng.random() < 0.5 else (b, a)))
        busy.update((a, b))
        count2 += 1
    idle = [p for p in range(graph.num_qubits) if p not in busy]
    count1 = 0 if want_2q else 1
    for p in rng.sample(idle, min(len(idle), max(0, n1 - count1))):
        ops.append((rng.choice(ONE_QUBIT_NAMES), (p,)))
    rng.shuffle(ops)
    return ops, witness


def generate(spec: BenchSpec, name: str | None = None) -> BenchCircuit:
    spec.validate()
    g = spec.graph
    n = g.num_qubits
    rng = random.Random(spec.seed)
    p1, p2 = spec.density
    n2 = round(p2 * n / 2)
    n1 = round(p1 * n)
    ops: list[tuple[str, tuple[int, ...]]] = []
    witness = None
    for _ in range(spec.target_depth):
        cyc, witness = _cycle(g, rng, n2, n1, witness, p1, p2)
        ops.extend(cyc)
    name = name or f"queko_{n}q_d{spec.target_depth}_s{spec.seed}"
    unscrambled = Circuit(n, [Gate(i, op, q) for i, (op, q) in enumerate(ops)], name)
    scramble = list(range(n))
    rng.shuffle(scramble)
    scrambled = unscrambled.relabel(scramble)
    meta = {"name": name, "qubits": n, "optimal_depth": spec.target_depth, "seed": spec.seed,
            "densities": list(spec.density), "graph": g.name}
    return BenchCircuit(scrambled, spec.target_depth, scramble, unscrambled, meta)


def unscramble(circuit: Circuit, scramble: list[int]) -> Circuit:
    inverse = [0] * len(scramble)
    for p, q in enumerate(scramble):
        inverse[q] = p
    return circuit.relabel(inverse)


def make_suite(graph: CouplingGraph, depths: list[int], per_depth: int, seed: int = 0,
               density: tuple[float, float] = DEFAULT_DENSITY) -> list[BenchCircuit]:
    """``per_depth`` circuits for every target depth, deterministic in ``seed``."""
    suite = []
    for depth in depths:
        for i in range(per_depth):
            sub_seed = random.Random(f"{seed}:{graph.num_qubits}:{depth}:{i}").getrandbits(63)
            name = f"queko_{graph.num_qubits}q_d{depth}_{i:02d}"
            suite.append(generate(BenchSpec(graph, depth, density, sub_seed), name))
    return suite
