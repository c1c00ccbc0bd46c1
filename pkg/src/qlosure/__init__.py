"""Qubit routing that weights SWAP choices by transitive gate dependences."""

from .affine import MacroGate, compression_stats, expand, lift
from .benchgen import BenchSpec, generate, make_suite
from .circuit import Circuit, Gate
from .depgraph import DepGraph, build_depgraph, front_layer, lookahead_window, transitive_weights
from .qasm import QasmError, emit_qasm, load_qasm, parse_qasm
from .router import (
    Mapping,
    RouteResult,
    RouterConfig,
    bidirectional_initial_mapping,
    candidate_swaps,
    m_score,
    route,
    route_circuit,
)
from .topology import CouplingGraph, apsp, gen_concat2x, gen_grid8, gen_line, get_backend, load_coupling
from .verify import depth, depth_factor, verify_routed

__version__ = "0.1.0"
