import random

import numpy as np
import pytest

from helpers import brute_m_score, random_circuit
from qlosure.circuit import Circuit
from qlosure.depgraph import build_depgraph
from qlosure.router import (
    Mapping,
    RouterConfig,
    RoutingError,
    RouteTimeout,
    ScoreState,
    _WindowScorer,
    bidirectional_initial_mapping,
    candidate_swaps,
    m_score,
    route,
    route_circuit,
    select_swap,
    update_decay,
)
from qlosure.topology import apsp, gen_grid8, gen_line, get_backend
from qlosure.verify import depth, verify_routed

CHAIN = Circuit.from_ops(4, [("cx", (0, 3)), ("cx", (3, 1)), ("cx", (1, 2))])
LAYERS = [[0], [1], [2]]
OPERANDS = [(0, 3), (3, 1), (1, 2)]
OMEGA = [2, 1, 0]


def fixture_state(variant="full", smoothing=False, decay=None):
    return ScoreState(Mapping.identity(4), decay or [1.0] * 4, LAYERS, OPERANDS, OMEGA,
                      apsp(gen_line(4)), variant, smoothing)


def test_mapping_swap_and_layout():
    m = Mapping.from_layout([3, 0], 5)
    assert m.log2phys == [3, 0, 1, 2, 4] and m.is_bijection()
    m.swap(3, 4)
    assert m.log2phys[0] == 4 and m.phys2log[3] == 4 and m.is_bijection()
    with pytest.raises(RoutingError):
        Mapping.from_layout([1, 1], 3)


def test_candidate_sets():
    line4 = gen_line(4)
    assert candidate_swaps([(0, 3)], Mapping.identity(4), line4) == [(0, 1), (2, 3)]
    assert candidate_swaps([(1, 1)], Mapping.identity(3), gen_line(3)) == [(0, 1), (1, 2)]


def test_fixture_scores():
    state = fixture_state()
    assert m_score((0, 1), state) == pytest.approx(5.5, abs=1e-12)
    assert m_score((2, 3), state) == pytest.approx(4.5, abs=1e-12)
    dg = build_depgraph(CHAIN)
    assert dg.omega == OMEGA
    scorer = _WindowScorer(LAYERS, OPERANDS, OMEGA, "full", False, apsp(gen_line(4)).tolist(),
                           list(range(4)))
    p2l = list(range(4))
    assert scorer.score(0, 1, list(range(4)), p2l) == pytest.approx(5.5, abs=1e-12)
    assert scorer.score(2, 3, list(range(4)), p2l) == pytest.approx(4.5, abs=1e-12)


def test_fixture_selection_and_decay():
    state = fixture_state()
    cands = [(0, 1), (2, 3)]
    choice = select_swap(cands, [m_score(s, state) for s in cands], random.Random(0))
    assert choice == (2, 3)
    decay = [1.0] * 4
    update_decay(decay, 2, 3, 0.001)
    assert decay == [1.0, 1.0, 1.001, 1.001]


def test_router_takes_the_fixture_swap_first():
    cfg = RouterConfig(omega_smoothing=False)
    res = route(CHAIN, gen_line(4), cfg)
    first = res.routed.gates[0]
    assert first.inserted and first.qubits == (2, 3)


def test_decay_resets_after_execution():
    # after the first swap the decay of q2/q3 is raised, then g0 runs and all decay returns to 1
    state = fixture_state(decay=[1.0, 1.0, 1.001, 1.001])
    assert m_score((2, 3), state) == pytest.approx(1.001 * 4.5)
    assert m_score((2, 3), fixture_state(variant="dependency_weighted",
                                         decay=[1.0, 1.0, 1.001, 1.001])) == pytest.approx(4.5)


def test_variant_scores():
    assert m_score((0, 1), fixture_state("distance_only")) == 2.0
    assert m_score((2, 3), fixture_state("distance_only")) == 2.0
    # omega == 1 with layers: 2 + 3/2 + 2/3 versus 2 + 1/2 + 2/3
    assert m_score((0, 1), fixture_state("layer_adjusted")) == pytest.approx(2 + 1.5 + 2 / 3)
    assert m_score((2, 3), fixture_state("layer_adjusted")) == pytest.approx(2 + 0.5 + 2 / 3)
    assert m_score((0, 1), fixture_state(smoothing=True)) == pytest.approx(3 * 2 + 2 * 3 / 2 + 2 / 3)


def test_zero_weight_front_ties():
    state = ScoreState(Mapping.identity(4), [1.0] * 4, [[0]], [(0, 3)], [0], apsp(gen_line(4)))
    assert m_score((0, 1), state) == m_score((2, 3), state) == 0.0
    picks = {select_swap([(0, 1), (2, 3)], [0.0, 0.0], random.Random(s)) for s in range(20)}
    assert picks == {(0, 1), (2, 3)}
    assert select_swap([(0, 1), (2, 3)], [0.0, 0.0], random.Random(5)) == \
        select_swap([(0, 1), (2, 3)], [0.0, 0.0], random.Random(5))


def test_homogeneity_in_distance():
    rng = random.Random(9)
    g = gen_grid8(3, 4)
    d = apsp(g)
    for _ in range(50):
        perm = list(range(12))
        rng.shuffle(perm)
        mapping = Mapping.from_layout(perm, 12)
        ops = [tuple(rng.sample(range(12), 2)) for _ in range(6)]
        layers = [[0, 1], [2, 3], [4, 5]]
        omega = [rng.randint(0, 9) for _ in ops]
        decay = [1 + 0.001 * rng.randint(0, 3) for _ in range(12)]
        cands = candidate_swaps([ops[0], ops[1]], mapping, g)
        base = [m_score(s, ScoreState(mapping, decay, layers, ops, omega, d)) for s in cands]
        scaled = [m_score(s, ScoreState(mapping, decay, layers, ops, omega, 3.5 * d)) for s in cands]
        assert np.allclose(np.array(scaled), 3.5 * np.array(base), rtol=1e-12)
        best = {s for s, m in zip(cands, base) if m == min(base)}
        assert best == {s for s, m in zip(cands, scaled) if m == min(scaled)}


def test_incremental_scorer_matches_direct_scorer():
    rng = random.Random(10)
    g = get_backend("sherbrooke")
    d = apsp(g)
    for _ in range(30):
        perm = list(range(g.num_qubits))
        rng.shuffle(perm)
        mapping = Mapping(perm, [0] * len(perm))
        for q, p in enumerate(perm):
            mapping.phys2log[p] = q
        ops = [tuple(rng.sample(range(40), 2)) for _ in range(12)]
        layers = [[0, 1, 2], [3, 4], [5, 6, 7, 8], [9, 10, 11]]
        omega = [rng.randint(0, 20) for _ in ops]
        for variant in ("layer_adjusted", "dependency_weighted", "distance_only"):
            scorer = _WindowScorer(layers, ops, omega, variant, True, d.tolist(), mapping.log2phys)
            state = ScoreState(mapping, [1.0] * len(perm), layers, ops, omega, d, variant, True)
            for s in candidate_swaps([ops[v] for v in layers[0]], mapping, g):
                direct = m_score(s, state)
                fast = scorer.score(*s, mapping.log2phys, mapping.phys2log)
                assert fast == pytest.approx(direct, rel=1e-12, abs=1e-12)
                raw = ScoreState(mapping, [1.0] * len(perm), layers, ops, omega, d, variant)
                if variant == "dependency_weighted":
                    assert m_score(s, raw) == pytest.approx(
                        brute_m_score(s, mapping.log2phys, [1.0] * len(perm), layers, ops, omega, d),
                        abs=1e-12)


def test_three_line_needs_one_swap():
    c = Circuit.from_ops(3, [("cx", (0, 2))])
    res = route(c, gen_line(3))
    assert res.swap_count == 1
    assert verify_routed(c, res.routed, res.initial_layout, gen_line(3)).ok


def test_hardware_compliant_circuit_needs_no_swaps():
    c = Circuit.from_ops(5, [("cx", (i, i + 1)) for i in range(4)] + [("h", (0,)), ("cx", (3, 4))])
    for variant in ("distance_only", "layer_adjusted", "dependency_weighted", "full"):
        res = route(c, gen_line(5), RouterConfig(variant=variant))
        assert res.swap_count == 0 and res.depth == depth(c)


def test_route_is_deterministic_for_a_seed():
    rng = random.Random(12)
    c = random_circuit(rng, 20, 200)
    g = get_backend("sherbrooke")
    a = route(c, g, RouterConfig(seed=99))
    b = route(c, g, RouterConfig(seed=99))
    assert [(x.name, x.qubits) for x in a.routed.gates] == [(x.name, x.qubits) for x in b.routed.gates]
    assert a.final_layout == b.final_layout


def test_route_outputs_verify_and_mappings_stay_bijective():
    rng = random.Random(13)
    for variant in ("distance_only", "layer_adjusted", "dependency_weighted", "full"):
        for _ in range(10):
            n = rng.randint(3, 16)
            c = random_circuit(rng, n, rng.randint(1, 80), extras=True)
            g = gen_line(n + rng.randint(0, 3))
            res = route(c, g, RouterConfig(variant=variant, seed=rng.randrange(100)))
            assert res.final_mapping.is_bijection()
            assert res.swap_count == sum(1 for x in res.routed.gates if x.inserted)
            report = verify_routed(c, res.routed, res.initial_layout, g)
            assert report.ok, report.violations[:3]


def test_stall_fallback_guarantees_progress():
    rng = random.Random(14)
    c = random_circuit(rng, 12, 100, p_two=1.0)
    g = gen_line(12)
    res = route(c, g, RouterConfig(stall_limit=1, omega_smoothing=False))
    assert res.forced_swaps > 0
    assert verify_routed(c, res.routed, res.initial_layout, g).ok


def test_route_errors():
    with pytest.raises(RoutingError, match="qubits"):
        route(Circuit.from_ops(5, [("cx", (0, 4))]), gen_line(3))
    with pytest.raises(ValueError, match="exceed"):
        route(CHAIN, gen_line(4), RouterConfig(c=2))
    with pytest.raises(ValueError):
        RouterConfig(variant="nonesuch")
    with pytest.raises(ValueError):
        RouterConfig(stall_limit=0)
    with pytest.raises(RouteTimeout):
        route(random_circuit(random.Random(1), 10, 100), gen_line(10), deadline=0.0)


def test_bidirectional_mapping():
    rng = random.Random(15)
    c = random_circuit(rng, 10, 60)
    g = gen_grid8(3, 4)
    assert bidirectional_initial_mapping(c, g, RouterConfig(), passes=0).log2phys == list(range(12))
    m = bidirectional_initial_mapping(c, g, RouterConfig(), passes=2)
    assert m.is_bijection()
    res = route_circuit(c, g, RouterConfig(), passes=1)
    assert res.initial_layout != list(range(10)) or res.swap_count == 0
    assert verify_routed(c, res.routed, res.initial_layout, g).ok


def test_physical_decay_flag_routes_soundly():
    rng = random.Random(16)
    c = random_circuit(rng, 12, 80, p_two=1.0)
    g = gen_line(12)
    res = route(c, g, RouterConfig(decay_by_physical=True))
    assert verify_routed(c, res.routed, res.initial_layout, g).ok
