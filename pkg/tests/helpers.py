"""Random corpora and brute-force reference implementations for the tests."""

from __future__ import annotations

import random

import numpy as np

from qlosure.circuit import Circuit
from qlosure.topology import CouplingGraph

TRACE_QASM = """OPENQASM 2.0;
include "qelib1.inc";
qreg q[8];
CX q[0],q[1];
CX q[1],q[3];
CX q[2],q[5];
CX q[3],q[7];
"""

ONE_Q = ("h", "x", "t", "s", "z")


def random_circuit(rng: random.Random, num_qubits: int, num_gates: int, p_two: float = 0.7,
                   extras: bool = False) -> Circuit:
    """Random gate list; with ``extras`` also barriers, measures and parametrised gates."""
    ops = []
    for _ in range(num_gates):
        r = rng.random()
        if num_qubits >= 2 and r < p_two:
            a, b = rng.sample(range(num_qubits), 2)
            ops.append(("cx", (a, b)))
        elif extras and r < p_two + 0.05:
            k = rng.randint(1, num_qubits)
            ops.append(("barrier", tuple(sorted(rng.sample(range(num_qubits), k)))))
        elif extras and r < p_two + 0.1:
            q = rng.randrange(num_qubits)
            ops.append(("measure", (q,), (), (q,)))
        elif extras and r < p_two + 0.15:
            ops.append(("rz", (rng.randrange(num_qubits),), (rng.uniform(-3.0, 3.0),)))
        else:
            ops.append((rng.choice(ONE_Q), (rng.randrange(num_qubits),)))
    return Circuit.from_ops(num_qubits, ops, num_clbits=num_qubits if extras else 0)


def random_connected_graph(rng: random.Random, n: int, extra_edge_prob: float) -> CouplingGraph:
    """Random spanning tree plus independent extra edges."""
    edges = set()
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        edges.add((min(a, b), max(a, b)))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < extra_edge_prob:
                edges.add((a, b))
    return CouplingGraph.from_edges(n, sorted(edges), name=f"rand{n}")


def floyd_warshall(n: int, edges) -> np.ndarray:
    inf = n + 1
    d = np.full((n, n), inf, dtype=np.int64)
    np.fill_diagonal(d, 0)
    for a, b in edges:
        d[a, b] = d[b, a] = 1
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


def shared_qubit_relation(circuit: Circuit) -> list[list[int]]:
    """All pairs (i, j), i < j among two-qubit gates that share a qubit (quadratic)."""
    gates = circuit.two_qubit_gates
    succ = [[] for _ in gates]
    for i, g in enumerate(gates):
        for j in range(i + 1, len(gates)):
            if set(g.qubits) & set(gates[j].qubits):
                succ[i].append(j)
    return succ


def dfs_reach_counts(succ: list[list[int]]) -> list[int]:
    counts = []
    for s in range(len(succ)):
        seen = set()
        stack = list(succ[s])
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(succ[v])
        counts.append(len(seen))
    return counts


def brute_m_score(swap, log2phys, decay, layers, operands, omega, dist) -> float:
    """Composite score evaluated literally: copy the layout, apply the SWAP, sum per layer."""
    p1, p2 = swap
    phys2log = {p: q for q, p in enumerate(log2phys)}
    q1, q2 = phys2log[p1], phys2log[p2]
    trial = list(log2phys)
    trial[q1], trial[q2] = p2, p1
    total = 0.0
    for ell in range(1, len(layers) + 1):
        layer = layers[ell - 1]
        gamma = sum(omega[g] * dist[trial[operands[g][0]]][trial[operands[g][1]]] / ell
                    for g in layer)
        total += gamma / len(layer)
    return max(decay[q1], decay[q2]) * total
