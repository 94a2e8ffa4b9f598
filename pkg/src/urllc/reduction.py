"""
Independent set to URLLC scheduling.

Vertices become users, edges become resource blocks, a block is active for
exactly the two endpoints of its edge and each user needs as many blocks
as its degree. A user set is then schedulable iff it is independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .instance import BinaryInstance

BRUTE_FORCE_CAP = 20


@dataclass(frozen=True)
class UndirectedGraph:
    vertices: tuple
    edges: tuple

    def __post_init__(self):
        vertices = tuple(self.vertices)
        if len(set(vertices)) != len(vertices):
            raise ValueError("duplicate vertices")
        vset = set(vertices)
        edges = []
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u!r}, {v!r}) references an unknown vertex")
            key = frozenset((u, v))
            if key in seen:
                continue
            seen.add(key)
            edges.append((u, v))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", tuple(edges))

    def degree(self, v) -> int:
        return sum(v in e for e in self.edges)

    def is_independent(self, subset) -> bool:
        s = set(subset)
        return not any(u in s and v in s for u, v in self.edges)

    @classmethod
    def from_edge_list(cls, text: str, vertices=None) -> "UndirectedGraph":
        """Parse one ``u v`` pair per line; ``#`` starts a comment."""
        edges = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
            edges.append(tuple(int(p) if p.lstrip("-").isdigit() else p for p in parts))
        if vertices is None:
            vertices = sorted({v for e in edges for v in e}, key=str)
        return cls(tuple(vertices), tuple(edges))

    @classmethod
    def read(cls, path, vertices=None) -> "UndirectedGraph":
        return cls.from_edge_list(Path(path).read_text(encoding="utf-8"), vertices)

    def to_edge_list(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges)


def graph_to_urllc(graph: UndirectedGraph) -> BinaryInstance:
    """Users in ``graph.vertices`` order, blocks in ``graph.edges`` order, unit utilities.

    Isolated vertices get demand 0 and are trivially admissible.
    """
    index = {v: i for i, v in enumerate(graph.vertices)}
    delta = np.zeros((len(graph.vertices), len(graph.edges)), dtype=np.int8)
    for r, (u, v) in enumerate(graph.edges):
        delta[index[u], r] = 1
        delta[index[v], r] = 1
    return BinaryInstance(
        delta=delta,
        demands=delta.sum(axis=1),
        utilities=np.ones(len(graph.vertices)),
    )


def independent_set_brute_force(graph: UndirectedGraph, cap: int = BRUTE_FORCE_CAP) -> int:
    n = len(graph.vertices)
    if n > cap:
        raise ValueError(f"brute force limited to {cap} vertices, got {n}")
    for size in range(n, 0, -1):
        for subset in combinations(graph.vertices, size):
            if graph.is_independent(subset):
                return size
    return 0


def random_graph(n: int, p: float, rng: np.random.Generator) -> UndirectedGraph:
    """Erdos-Renyi G(n, p) on vertices 0..n-1."""
    edges = [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p]
    return UndirectedGraph(tuple(range(n)), tuple(edges))
