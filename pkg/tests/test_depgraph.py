import random

import pytest

from helpers import TRACE_QASM, dfs_reach_counts, random_circuit, shared_qubit_relation
from qlosure.circuit import Circuit
from qlosure.depgraph import (
    CycleError,
    DepGraph,
    build_depgraph,
    default_window_constant,
    front_layer,
    lookahead_window,
    topological_order,
    transitive_weights,
)
from qlosure.qasm import parse_qasm


def reach_sets(succ):
    out = []
    for s in range(len(succ)):
        seen, stack = set(), list(succ[s])
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(succ[v])
        out.append(seen)
    return out


def test_trace_edges_and_weights():
    dg = build_depgraph(parse_qasm(TRACE_QASM))
    assert sorted(dg.edges()) == [(0, 1), (1, 3)]
    assert dg.omega == [2, 1, 0, 0]
    assert dg.indegree() == [0, 1, 0, 1]
    assert "n0 -> n1" in dg.to_dot()


def test_single_gate_and_chain_closed_form():
    one = build_depgraph(Circuit.from_ops(2, [("cx", (0, 1))]))
    assert one.edges() == [] and one.omega == [0]
    n = 50
    chain = build_depgraph(Circuit.from_ops(2, [("cx", (i % 2, 1 - i % 2)) for i in range(n)]))
    assert chain.omega == [n - 1 - i for i in range(n)]


def test_one_qubit_gates_are_not_nodes():
    c = Circuit.from_ops(3, [("h", (0,)), ("cx", (0, 1)), ("x", (1,)), ("cx", (1, 2))])
    dg = build_depgraph(c)
    assert dg.gate_ids == [1, 3] and dg.edges() == [(0, 1)]


def test_barrier_fences_its_qubits():
    c = Circuit.from_ops(4, [("cx", (0, 1)), ("barrier", (0, 1, 2, 3)), ("cx", (2, 3))])
    assert build_depgraph(c).edges() == [(0, 1)]
    partial = Circuit.from_ops(4, [("cx", (0, 1)), ("barrier", (1, 2)), ("cx", (2, 3))])
    assert build_depgraph(partial).edges() == [(0, 1)]
    unrelated = Circuit.from_ops(4, [("cx", (0, 1)), ("barrier", (2, 3)), ("cx", (2, 3))])
    assert build_depgraph(unrelated).edges() == []


def test_reachability_matches_explicit_relation():
    rng = random.Random(1)
    for _ in range(200):
        c = random_circuit(rng, rng.randint(2, 8), rng.randint(1, 64))
        dg = build_depgraph(c)
        full = shared_qubit_relation(c)
        assert reach_sets(dg.succ) == reach_sets(full)
        assert dg.omega == dfs_reach_counts(full)


def test_monotonicity_and_blocked_closure():
    rng = random.Random(2)
    for _ in range(50):
        dg = build_depgraph(random_circuit(rng, rng.randint(2, 10), rng.randint(1, 200), p_two=1.0))
        for u, v in dg.edges():
            assert dg.omega[u] >= dg.omega[v] + 1
        # tiny blocks exercise the bounded-memory path
        assert transitive_weights(dg, block=7) == dg.omega


def test_cycle_is_a_hard_error():
    dg = DepGraph([0, 1], [(0, 1), (0, 1)], [[1], [0]], [[1], [0]])
    with pytest.raises(CycleError):
        transitive_weights(dg)
    with pytest.raises(CycleError):
        topological_order([[1], [2], [0]])


def test_front_layer():
    dg = build_depgraph(parse_qasm(TRACE_QASM))
    assert front_layer(dg, set()) == {0, 2}
    assert front_layer(dg, {0}) == {1, 2}
    assert front_layer(dg, [True, False, False, False]) == {1, 2}
    assert front_layer(build_depgraph(Circuit(3)), set()) == set()


def test_front_layer_is_an_antichain():
    rng = random.Random(4)
    for _ in range(50):
        dg = build_depgraph(random_circuit(rng, 6, 40))
        reach = reach_sets(dg.succ)
        done = set(range(rng.randint(0, dg.num_nodes)))
        done = {v for v in done if all(u in done for u in dg.pred[v])}
        front = front_layer(dg, done)
        assert not any(b in reach[a] for a in front for b in front)


def test_window_on_three_chain():
    c = Circuit.from_ops(4, [("cx", (0, 3)), ("cx", (3, 1)), ("cx", (1, 2))])
    w = lookahead_window(build_depgraph(c), {0}, [0, 1, 2, 3], c=3)
    assert (w.n_front_qubits, w.k) == (2, 6)
    assert w.window == [0, 1, 2]
    assert w.layers == [[0], [1], [2]]


def test_window_truncation_and_independent_front():
    chain = build_depgraph(Circuit.from_ops(2, [("cx", (0, 1))] * 100))
    assert len(lookahead_window(chain, {0}, [0, 1], c=3).window) == 6
    flat = build_depgraph(Circuit.from_ops(8, [("cx", (2 * i, 2 * i + 1)) for i in range(4)]))
    w = lookahead_window(flat, {0, 1, 2, 3}, list(range(8)), c=3)
    assert w.layers == [[0, 1, 2, 3]]


def test_window_layers_use_longest_path():
    # g2 depends on g0 directly and on g1 (which depends on g0): longest path puts it in layer 3
    c = Circuit.from_ops(4, [("cx", (0, 1)), ("cx", (1, 2)), ("cx", (0, 2)), ("cx", (3, 2))])
    dg = build_depgraph(c)
    w = lookahead_window(dg, front_layer(dg, set()), list(range(4)), c=5)
    assert w.layer_of() == {0: 1, 1: 2, 2: 3, 3: 4}


def test_window_invariants_random():
    rng = random.Random(8)
    for _ in range(100):
        dg = build_depgraph(random_circuit(rng, 8, 60, p_two=1.0))
        front = front_layer(dg, set())
        mapping = list(range(8))
        rng.shuffle(mapping)
        w = lookahead_window(dg, front, mapping, c=rng.randint(2, 5))
        flat = [v for layer in w.layers for v in layer]
        assert sorted(flat) == sorted(w.window) and len(set(flat)) == len(flat)
        assert w.layers[0] == sorted(front)
        assert len(w.window) <= max(w.k, len(front))
        member, level = set(w.window), w.layer_of()
        for v in w.window:
            # closed under predecessors that are not yet executed
            assert all(u in member for u in dg.pred[v])
            if level[v] > 1:
                assert max(level[u] for u in dg.pred[v]) == level[v] - 1


def test_affinity_filter_keeps_front_qubit_gates():
    c = Circuit.from_ops(6, [("cx", (0, 1)), ("cx", (2, 3)), ("cx", (4, 5)), ("cx", (1, 2))])
    dg = build_depgraph(c)
    w = lookahead_window(dg, {0}, list(range(6)), c=10, affinity=True)
    assert 2 not in w.window and 0 in w.window


def test_default_window_constant():
    assert default_window_constant(3) == 4
