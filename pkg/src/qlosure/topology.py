"""Physical coupling graphs and all-pairs SWAP distances."""

from __future__ import annotations

import json
import os
import re
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

BUILTIN_FILES = {
    "sherbrooke": "sherbrooke_127.json",
    "ankaa3": "ankaa3_82.json",
}
BACKEND_DIR_ENV = "QLOSURE_BACKEND_DIR"


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class CouplingGraph:
    num_qubits: int
    edges: frozenset[tuple[int, int]]
    name: str = "coupling"
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise TopologyError("coupling graph needs at least one qubit")
        for a, b in self.edges:
            if a == b:
                raise TopologyError(f"self-loop on qubit {a}")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise TopologyError(f"edge ({a}, {b}) out of range for {self.num_qubits} qubits")
            if a > b:
                raise TopologyError("edges must be stored as (low, high) pairs")
        adj: list[list[int]] = [[] for _ in range(self.num_qubits)]
        for a, b in sorted(self.edges):
            adj[a].append(b)
            adj[b].append(a)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(n)) for n in adj))
        if not self._connected():
            raise TopologyError(f"coupling graph {self.name!r} is disconnected")

    @classmethod
    def from_edges(cls, num_qubits: int, edges: Iterable[Sequence[int]],
                   name: str = "coupling", metadata: dict | None = None) -> "CouplingGraph":
        pairs = set()
        for e in edges:
            a, b = int(e[0]), int(e[1])
            if a == b:
                raise TopologyError(f"self-loop on qubit {a}")
            pairs.add((min(a, b), max(a, b)))
        return cls(num_qubits, frozenset(pairs), name, dict(metadata or {}))

    def neighbors(self, p: int) -> tuple[int, ...]:
        return self._adj[p]

    def degree(self, p: int) -> int:
        return len(self._adj[p])

    @property
    def max_degree(self) -> int:
        return max(len(n) for n in self._adj)

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def _connected(self) -> bool:
        seen = {0}
        todo = [0]
        while todo:
            for n in self._adj[todo.pop()]:
                if n not in seen:
                    seen.add(n)
                    todo.append(n)
        return len(seen) == self.num_qubits

    def to_dict(self) -> dict:
        out = {"num_qubits": self.num_qubits, "edges": [list(e) for e in sorted(self.edges)]}
        if self.metadata:
            out["metadata"] = self.metadata
        return out


def load_coupling(source, name: str | None = None) -> CouplingGraph:
    """Load ``{"num_qubits": N, "edges": [[a, b], ...]}`` from a path or dict."""
    if isinstance(source, dict):
        data = source
        name = name or "coupling"
    else:
        path = Path(source)
        data = json.loads(path.read_text(encoding="utf-8"))
        name = name or path.stem
    try:
        n = int(data["num_qubits"])
        edges = data["edges"]
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"malformed coupling description: {exc}") from exc
    return CouplingGraph.from_edges(n, edges, name, data.get("metadata"))


def gen_line(n: int) -> CouplingGraph:
    if n < 1:
        raise TopologyError("line needs n >= 1")
    return CouplingGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)], f"line{n}")


def gen_grid(rows: int, cols: int) -> CouplingGraph:
    """4-neighbour square lattice."""
    if rows < 1 or cols < 1:
        raise TopologyError("grid needs rows, cols >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            p = r * cols + c
            if c + 1 < cols:
                edges.append((p, p + 1))
            if r + 1 < rows:
                edges.append((p, p + cols))
    return CouplingGraph.from_edges(rows * cols, edges, f"grid{rows}x{cols}")


def gen_grid8(rows: int, cols: int) -> CouplingGraph:
    """Grid where each cell couples to its 8 surrounding cells (diagonals included)."""
    if rows < 1 or cols < 1:
        raise TopologyError("grid8 needs rows, cols >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            p = r * cols + c
            for dr, dc in ((0, 1), (1, -1), (1, 0), (1, 1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    edges.append((p, rr * cols + cc))
    return CouplingGraph.from_edges(rows * cols, edges, f"grid8_{rows}x{cols}")


def default_bridges(g: CouplingGraph) -> list[tuple[int, int]]:
    low = [p for p in range(g.num_qubits) if g.degree(p) <= 2][:2]
    if len(low) < 2:
        raise TopologyError("need two qubits of degree <= 2 to place default bridges")
    return [(low[0], low[0]), (low[1], low[1])]


def gen_concat2x(g: CouplingGraph, bridges: Sequence[tuple[int, int]] | None = None) -> CouplingGraph:
    """Two copies of ``g`` joined by two new bridge qubits.

    Bridge ``k`` is qubit ``2n + k``; it couples ``bridges[k][0]`` of copy 0
    with ``bridges[k][1]`` of copy 1 (indices local to each copy).
    """
    n = g.num_qubits
    if bridges is None:
        bridges = default_bridges(g)
    bridges = [tuple(b) for b in bridges]
    if len(bridges) != 2:
        raise TopologyError("exactly two bridges are required")
    edges = list(g.edges) + [(a + n, b + n) for a, b in g.edges]
    for k, (a, b) in enumerate(bridges):
        if not (0 <= a < n and 0 <= b < n):
            raise TopologyError(f"bridge endpoint out of range: {(a, b)}")
        bq = 2 * n + k
        edges += [(a, bq), (b + n, bq)]
    meta = {"base": g.name, "bridges": [list(b) for b in bridges]}
    return CouplingGraph.from_edges(2 * n + 2, edges, f"{g.name}_2x", meta)


def heavy_hex_eagle() -> CouplingGraph:
    """127-qubit heavy-hex lattice in the IBM Eagle numbering.

    Seven rows (14, 15, 15, 15, 15, 15, 14 qubits) joined by groups of four
    connector qubits; every qubit has degree at most 3.
    """
    row_len = [14, 15, 15, 15, 15, 15, 14]
    rows: list[list[int]] = []
    connectors: list[list[int]] = []
    nxt = 0
    for r, length in enumerate(row_len):
        rows.append(list(range(nxt, nxt + length)))
        nxt += length
        if r < len(row_len) - 1:
            connectors.append(list(range(nxt, nxt + 4)))
            nxt += 4
    edges = []
    for row in rows:
        edges += list(zip(row, row[1:]))
    for r, group in enumerate(connectors):
        # rows alternate between column offsets 0 and 2 for their connector taps
        top_cols = [0, 4, 8, 12] if r % 2 == 0 else [2, 6, 10, 14]
        # the last row is one qubit shorter and starts one column in
        shift = 1 if r == len(connectors) - 1 else 0
        for k, cq in enumerate(group):
            edges.append((rows[r][top_cols[k]], cq))
            edges.append((cq, rows[r + 1][top_cols[k] - shift]))
    return CouplingGraph.from_edges(nxt, edges, "sherbrooke")


def ankaa3_like() -> CouplingGraph:
    """82-qubit square lattice: a 7x12 grid with two corner sites removed."""
    rows, cols = 7, 12
    dead = {0, rows * cols - 1}
    alive = [p for p in range(rows * cols) if p not in dead]
    index = {p: i for i, p in enumerate(alive)}
    full = gen_grid(rows, cols)
    edges = [(index[a], index[b]) for a, b in full.edges if a in index and b in index]
    return CouplingGraph.from_edges(len(alive), edges, "ankaa3")


def _builtin_file(filename: str) -> Path | None:
    env = os.environ.get(BACKEND_DIR_ENV)
    if env and (Path(env) / filename).exists():
        return Path(env) / filename
    ref = resources.files("qlosure") / "data" / filename
    return Path(str(ref)) if ref.is_file() else None


def get_backend(spec: str) -> CouplingGraph:
    """Resolve a backend name, ``line:N``, ``grid:RxC``, ``grid8:RxC`` or a JSON path."""
    key = spec.lower()
    if key in BUILTIN_FILES:
        path = _builtin_file(BUILTIN_FILES[key])
        if path is None:
            raise TopologyError(f"backend file {BUILTIN_FILES[key]} not found")
        return load_coupling(path, name=key)
    if key in ("sherbrooke2x", "sherbrooke-2x"):
        return gen_concat2x(get_backend("sherbrooke"))
    m = re.fullmatch(r"line:(\d+)", key)
    if m:
        return gen_line(int(m.group(1)))
    m = re.fullmatch(r"(grid8?):(\d+)x(\d+)", key)
    if m:
        gen = gen_grid8 if m.group(1) == "grid8" else gen_grid
        return gen(int(m.group(2)), int(m.group(3)))
    env = os.environ.get(BACKEND_DIR_ENV)
    for candidate in (Path(spec), Path(env or ".") / spec, Path(env or ".") / f"{spec}.json"):
        if candidate.is_file():
            return load_coupling(candidate)
    raise TopologyError(f"unknown backend {spec!r}")


def apsp(g: CouplingGraph) -> np.ndarray:
    """Unweighted shortest-path lengths via one BFS per source."""
    n = g.num_qubits
    dist = np.full((n, n), -1, dtype=np.int64)
    for src in range(n):
        row = dist[src]
        row[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = row[u] + 1
            for v in g.neighbors(u):
                if row[v] < 0:
                    row[v] = du
                    queue.append(v)
    return dist


def shortest_path(g: CouplingGraph, dist: np.ndarray, a: int, b: int) -> list[int]:
    """One shortest path ``a .. b`` (lowest-index neighbour at each step)."""
    path = [a]
    while path[-1] != b:
        here = path[-1]
        path.append(next(n for n in g.neighbors(here) if dist[n, b] == dist[here, b] - 1))
    return path


def distance_csv(dist: np.ndarray) -> str:
    return "\n".join(",".join(str(int(x)) for x in row) for row in dist) + "\n"
