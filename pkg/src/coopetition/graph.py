"""Directed influence graphs and their Laplacians.

An edge ``(a, b, w)`` means node ``a`` is influenced by node ``b`` with
weight ``w``, so the Laplacian carries ``L[a, b] = -w`` and the consensus
flow is ``dx/dt = -L x``. Node indices are 1-based at every public
interface.

Graph files are JSON objects::

    {"n_nodes": 5, "edges": [[1, 5, 1.0], [2, 1, 1.0], ...]}
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError

# The repeated 5-node block of the cascading benchmark.
CASCADE_BLOCK_EDGES = ((1, 5), (2, 1), (2, 3), (3, 1), (3, 5), (4, 1), (5, 1), (5, 2))
CASCADE_FORWARD_WEIGHT = 1.0
CASCADE_BACKWARD_WEIGHT = 4.0

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class GraphSpec:
    n_nodes: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if isinstance(self.n_nodes, bool) or not isinstance(self.n_nodes, (int, np.integer)):
            raise ParameterError(f"n_nodes must be an integer, got {self.n_nodes!r}")
        if self.n_nodes < 1:
            raise ParameterError(f"n_nodes must be positive, got {self.n_nodes}")
        cleaned = []
        seen = set()
        for edge in self.edges:
            try:
                src, dst, weight = edge
            except (TypeError, ValueError):
                raise ParameterError(f"edge {edge!r} is not a (source, target, weight) triple") from None
            if int(src) != src or int(dst) != dst:
                raise ParameterError(f"edge {edge!r}: node indices must be integers")
            src, dst, weight = int(src), int(dst), float(weight)
            if not (1 <= src <= self.n_nodes and 1 <= dst <= self.n_nodes):
                raise ParameterError(f"edge {edge!r}: node index outside 1..{self.n_nodes}")
            if src == dst:
                raise ParameterError(f"edge {edge!r}: self-loops are not allowed")
            if not (math.isfinite(weight) and weight > 0):
                raise ParameterError(f"edge {edge!r}: weight must be a positive finite number")
            if (src, dst) in seen:
                raise ParameterError(f"edge {edge!r}: duplicate (source, target) pair")
            seen.add((src, dst))
            cleaned.append((src, dst, weight))
        object.__setattr__(self, "n_nodes", int(self.n_nodes))
        object.__setattr__(self, "edges", tuple(cleaned))

    def to_dict(self) -> dict:
        return {"n_nodes": self.n_nodes, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> "GraphSpec":
        if "n_nodes" not in data:
            raise ParameterError("graph data is missing 'n_nodes'")
        return cls(data["n_nodes"], tuple(tuple(e) for e in data.get("edges", ())))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GraphSpec":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "GraphSpec":
        return cls.from_json(Path(path).read_text())


def build_laplacian(spec: GraphSpec) -> np.ndarray:
    """Assemble the Laplacian of ``spec`` as a read-only dense array.

    Diagonal entries hold each node's total in-weight, off-diagonal entries
    the negated edge weights, so every row sums to zero.
    """
    n = spec.n_nodes
    L = np.zeros((n, n))
    for src, dst, weight in spec.edges:
        L[src - 1, dst - 1] = -weight
    # correctly rounded in-weight sums; row sums then vanish up to one rounding
    L[np.diag_indices(n)] = [math.fsum(-row) + 0.0 for row in L]
    L.setflags(write=False)
    return L


def cascading_benchmark(n_nodes: int) -> GraphSpec:
    """Chain of 5-node blocks where earlier blocks dominate later ones.

    Every block repeats the same 8 unit-weight edges. Node ``n`` and node
    ``n + 5`` are linked for all ``n <= n_nodes - 5`` so that
    ``L[n, n+5] = -1`` and ``L[n+5, n] = -4``.
    """
    if isinstance(n_nodes, bool) or int(n_nodes) != n_nodes or n_nodes < 5 or n_nodes % 5:
        raise ParameterError(f"cascading benchmark needs a positive multiple of 5 nodes, got {n_nodes}")
    n_nodes = int(n_nodes)
    edges: list[Edge] = []
    for offset in range(0, n_nodes, 5):
        edges.extend((offset + a, offset + b, 1.0) for a, b in CASCADE_BLOCK_EDGES)
    for n in range(1, n_nodes - 4):
        edges.append((n, n + 5, CASCADE_FORWARD_WEIGHT))
        edges.append((n + 5, n, CASCADE_BACKWARD_WEIGHT))
    return GraphSpec(n_nodes, tuple(edges))


def _reachable(n: int, adjacency: Sequence[Iterable[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in adjacency[node]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def is_strongly_connected(spec: GraphSpec) -> bool:
    """True iff every node reaches every other node along directed edges.

    The answer does not depend on which end of an edge is read as the
    influencer, since reversing every edge preserves strong connectivity.
    """
    n = spec.n_nodes
    forward = [[] for _ in range(n)]
    backward = [[] for _ in range(n)]
    for src, dst, _ in spec.edges:
        forward[src - 1].append(dst - 1)
        backward[dst - 1].append(src - 1)
    return len(_reachable(n, forward, 0)) == n and len(_reachable(n, backward, 0)) == n


def root_nodes(spec: GraphSpec) -> list[int]:
    """Nodes whose opinion eventually reaches every other node (1-based).

    Non-empty iff the graph has a directed spanning tree in the influence
    direction, which is what the consensus flow needs to agree on a single
    value. For a strongly connected graph every node is a root.
    """
    n = spec.n_nodes
    influences = [[] for _ in range(n)]
    for src, dst, _ in spec.edges:
        influences[dst - 1].append(src - 1)
    return [m + 1 for m in range(n) if len(_reachable(n, influences, m)) == n]
