"""Named test instances: causal unitaries with their graphs, plus non-causal controls."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import QuantumLabeledGraph
from .qca import (
    TorusSpec,
    make_partitioned_qca,
    make_shift_qca,
    make_torus_graph,
    shift_graph,
    symmetric_block,
    translation_matrix,
)
from .tensor import DenseOperator, apply_local, random_unitary_matrix

CZ = np.diag([1, 1, 1, -1]).astype(complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class Instance:
    name: str
    U: DenseOperator
    graph: QuantumLabeledGraph
    causal: bool
    torus: TorusSpec | None = None
    schedule: str = "greedy"


def self_loops(n: int, dim: int = 2, extra=()) -> QuantumLabeledGraph:
    return QuantumLabeledGraph.uniform(n, dim, {(x, x) for x in range(n)} | set(extra))


def path_graph(n: int, dim: int = 2) -> QuantumLabeledGraph:
    """Self-loops plus both directions of every nearest-neighbor edge."""
    edges = {(x, x) for x in range(n)}
    edges |= {(x, x + 1) for x in range(n - 1)} | {(x + 1, x) for x in range(n - 1)}
    return QuantumLabeledGraph.uniform(n, dim, edges)


def _two_qubit_on(n: int, gate: np.ndarray, a: int, b: int) -> np.ndarray:
    """``gate`` on qubits ``(a, b)`` (factor order as given) of an ``n``-qubit register."""
    return apply_local(np.eye(2**n, dtype=complex), (2,) * n, gate, [a, b])


def identity(n: int = 3) -> Instance:
    g = self_loops(n)
    return Instance("identity", DenseOperator(g.layout(), np.eye(2**n)), g, True)


def local_unitaries(dims=(2, 3, 2), seed: int = 5) -> Instance:
    g = QuantumLabeledGraph(tuple((d, 0) for d in dims), frozenset((x, x) for x in range(len(dims))))
    U = np.array([[1.0 + 0j]])
    for x, d in enumerate(dims):
        U = np.kron(U, random_unitary_matrix(d, (seed, x)))
    return Instance("local-unitary", DenseOperator(g.layout(), U), g, True)


def shift(L: int = 4) -> Instance:
    spec = TorusSpec((L,))
    return Instance(f"shift-z{L}", make_shift_qca(spec), shift_graph(spec), True)


def partitioned_1d(L: int = 4, seed: int = 11) -> Instance:
    spec = TorusSpec((L,))
    U, g = make_partitioned_qca(spec, random_unitary_matrix(4, (seed, 0)), [(0,), (1,)])
    return Instance("partitioned-1d", U, g, True)


def controlled_phase(L: int = 4) -> Instance:
    spec = TorusSpec((L,))
    U, g = make_partitioned_qca(spec, CZ, [(0,)])
    return Instance("controlled-phase", U, g, True)


def partitioned_2d(seed: int = 3) -> Instance:
    spec = TorusSpec((2, 2))
    U, _ = make_partitioned_qca(spec, symmetric_block(2, 2, seed), [(0, 0)])
    return Instance("partitioned-2d", U, make_torus_graph(spec), True, spec, "torus-offsets")


def qca_1d(L: int = 4, seed: int = 9) -> Instance:
    """Left shift after the same phase gate on every cell; fixes ``|0...0>``."""
    spec = TorusSpec((L,))
    alpha = np.random.default_rng(seed).uniform(0, 2 * np.pi)
    u = np.diag([1.0, np.exp(1j * alpha)])
    local = np.array([[1.0 + 0j]])
    for _ in range(L):
        local = np.kron(local, u)
    U = translation_matrix(spec, 0, -1) @ local
    return Instance("qca-1d", DenseOperator(spec.layout, U), make_torus_graph(spec), True, spec, "torus-offsets")


def distant_swap() -> Instance:
    g = path_graph(3)
    return Instance("distant-swap", DenseOperator(g.layout(), _two_qubit_on(3, SWAP, 0, 2)), g, False)


def shift_against_orientation(L: int = 4) -> Instance:
    spec = TorusSpec((L,))
    g = QuantumLabeledGraph.uniform(L, 2, {(x, (x + 1) % L) for x in range(L)})
    return Instance("shift-reversed", make_shift_qca(spec), g, False)


def one_sided_cnot() -> Instance:
    """CNOT from node 0 to node 2; only the edge (2, 0) joins them."""
    g = self_loops(3, extra={(2, 0)})
    return Instance("one-sided-cnot", DenseOperator(g.layout(), _two_qubit_on(3, CNOT, 0, 2)), g, False)


CAUSAL: dict[str, Callable[[], Instance]] = {
    "identity": identity,
    "local-unitary": local_unitaries,
    "shift-z3": lambda: shift(3),
    "shift-z4": lambda: shift(4),
    "partitioned-1d": partitioned_1d,
    "controlled-phase": controlled_phase,
    "partitioned-2d": partitioned_2d,
    "qca-1d": qca_1d,
}

NON_CAUSAL: dict[str, Callable[[], Instance]] = {
    "distant-swap": distant_swap,
    "shift-reversed": shift_against_orientation,
    "one-sided-cnot": one_sided_cnot,
}


def causal_zoo() -> list[Instance]:
    return [make() for make in CAUSAL.values()]


def non_causal_zoo() -> list[Instance]:
    return [make() for make in NON_CAUSAL.values()]


def get(name: str) -> Instance:
    if name in CAUSAL:
        return CAUSAL[name]()
    if name in NON_CAUSAL:
        return NON_CAUSAL[name]()
    raise KeyError(name)
