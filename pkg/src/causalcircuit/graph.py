"""Quantum labeled graphs, neighborhoods and gate scheduling by coloring."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import LayoutError
from .tensor import SpaceLayout, Support, canonical_support


@dataclass(frozen=True)
class Node:
    dim: int
    quiescent: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise LayoutError("node dimension must be positive")
        if not 0 <= self.quiescent < self.dim:
            raise LayoutError(f"quiescent index {self.quiescent} out of range for dimension {self.dim}")


@dataclass(frozen=True)
class QuantumLabeledGraph:
    """Directed graph with a finite-dimensional system on every node.

    ``edges`` holds ordered pairs ``(x, y)`` meaning ``y`` is in the
    neighborhood of ``x``.  Self-loops are never implied.
    """

    nodes: tuple[Node, ...]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        nodes = tuple(n if isinstance(n, Node) else Node(*n) for n in self.nodes)
        edges = frozenset((int(x), int(y)) for x, y in self.edges)
        for x, y in edges:
            if not (0 <= x < len(nodes) and 0 <= y < len(nodes)):
                raise LayoutError(f"edge ({x}, {y}) has an invalid endpoint")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def uniform(cls, n: int, dim: int = 2, edges: Iterable[tuple[int, int]] = (), quiescent: int = 0):
        return cls(tuple(Node(dim, quiescent) for _ in range(n)), frozenset(edges))

    def __len__(self):
        return len(self.nodes)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(n.dim for n in self.nodes)

    @property
    def quiescent(self) -> tuple[int, ...]:
        return tuple(n.quiescent for n in self.nodes)

    def layout(self, tape: int = 0) -> SpaceLayout:
        return SpaceLayout.from_dims(self.dims, tape=tape)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def _check(self, x: int):
        if not 0 <= x < len(self.nodes):
            raise LayoutError(f"invalid node id {x}")


def neighborhood(g: QuantumLabeledGraph, x: int) -> tuple[int, ...]:
    """Out-neighbors of ``x``, ascending."""
    g._check(x)
    return tuple(sorted(y for (a, y) in g.edges if a == x))


def in_neighborhood(g: QuantumLabeledGraph, x: int) -> tuple[int, ...]:
    g._check(x)
    return tuple(sorted(a for (a, y) in g.edges if y == x))


def transpose(g: QuantumLabeledGraph) -> QuantumLabeledGraph:
    return QuantumLabeledGraph(g.nodes, frozenset((y, x) for x, y in g.edges))


def compose(first: QuantumLabeledGraph, second: QuantumLabeledGraph) -> QuantumLabeledGraph:
    """Two-step graph: ``x -> z`` when ``x -> y`` in ``first`` and ``y -> z`` in ``second``.

    If ``U`` is causal for ``first`` and ``V`` for ``second``, then ``U @ V``
    is causal for ``compose(first, second)``.
    """
    if first.nodes != second.nodes:
        raise LayoutError("graphs have different nodes")
    out = {x: set() for x in range(len(first))}
    succ = {x: neighborhood(second, x) for x in range(len(second))}
    for x, y in first.edges:
        out[x].update(succ[y])
    return QuantumLabeledGraph(first.nodes, frozenset((x, z) for x, zs in out.items() for z in zs))


@dataclass(frozen=True)
class Coloring:
    assignment: tuple[int, ...]
    num_colors: int

    def classes(self) -> list[list[int]]:
        out = [[] for _ in range(self.num_colors)]
        for i, c in enumerate(self.assignment):
            out[c].append(i)
        return out


def conflict_graph(supports: Sequence[Iterable]) -> list[set[int]]:
    sets = [set(s) for s in supports]
    adj = [set() for _ in sets]
    for i, j in itertools.combinations(range(len(sets)), 2):
        if sets[i] & sets[j]:
            adj[i].add(j)
            adj[j].add(i)
    return adj


def conflict_coloring(supports: Sequence[Iterable]) -> Coloring:
    """Greedy coloring: supports sharing a slot get different colors.

    Supports are visited in list order and each takes the lowest color not
    used by an already-colored conflicting support.
    """
    if not supports:
        raise ValueError("need at least one support")
    adj = conflict_graph(supports)
    colors: list[int] = []
    for i in range(len(supports)):
        taken = {colors[j] for j in adj[i] if j < i}
        c = 0
        while c in taken:
            c += 1
        colors.append(c)
    return Coloring(tuple(colors), max(colors) + 1)


def is_proper(coloring: Coloring, supports: Sequence[Iterable]) -> bool:
    adj = conflict_graph(supports)
    return all(coloring.assignment[i] != coloring.assignment[j] for i in range(len(adj)) for j in adj[i])


def degree_stats(g: QuantumLabeledGraph) -> tuple[int, int, int]:
    """``(max |N_x|, max |N^T_x|, max |N^T_x ∪ {x}|)``."""
    n = len(g)
    if n == 0:
        return (0, 0, 0)
    out = max(len(neighborhood(g, x)) for x in range(n))
    inn = max(len(in_neighborhood(g, x)) for x in range(n))
    closed = max(len(set(in_neighborhood(g, x)) | {x}) for x in range(n))
    return (out, inn, closed)


# ---------------------------------------------------------------------------
# torus helpers; nodes are numbered row-major, first axis most significant


def torus_coords(shape: Sequence[int], x: int) -> tuple[int, ...]:
    coords = []
    for L in reversed(shape):
        coords.append(x % L)
        x //= L
    return tuple(reversed(coords))


def torus_node(shape: Sequence[int], coords: Sequence[int]) -> int:
    x = 0
    for L, c in zip(shape, coords):
        x = x * L + (c % L)
    return x


def torus_offset_coloring(shape: Sequence[int]) -> Coloring:
    """Color each torus node by the parity pattern of its coordinates.

    Yields exactly ``2**n`` colors; with the first axis most significant, the
    all-even class is color 0.  Every axis length must be even so parity is
    well defined around the wrap.
    """
    if any(L % 2 for L in shape):
        raise ValueError("offset schedule needs even axis lengths")
    n_nodes = 1
    for L in shape:
        n_nodes *= L
    colors = []
    for x in range(n_nodes):
        c = 0
        for coord in torus_coords(shape, x):
            c = 2 * c + coord % 2
        colors.append(c)
    return Coloring(tuple(colors), 2 ** len(shape))


def support_nodes(support: Support) -> set[int]:
    return {n for _, n in canonical_support(support)}
