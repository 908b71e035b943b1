"""Quantum cellular automata on finite tori.

The torus stands in for the infinite grid.  Cells are numbered row-major
with the first axis most significant; the radius-half graph links every cell
``x`` to ``x + z`` for ``z`` in ``{0, 1}^n`` (self-loop included).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LayoutError, ShiftInvarianceViolation
from .graph import QuantumLabeledGraph, torus_coords, torus_node
from .localizer import (
    COMPUTED,
    Circuit,
    VerificationReport,
    assemble,
    leftover_state,
    swap_matrix,
    verify_representation,
)
from .tensor import DenseOperator, SpaceLayout, apply_local, check_unitary, max_norm, permute_factors


@dataclass(frozen=True)
class TorusSpec:
    shape: tuple[int, ...]
    cell_dim: int = 2
    quiescent: int = 0

    def __post_init__(self):
        shape = tuple(int(L) for L in self.shape)
        object.__setattr__(self, "shape", shape)
        if not shape:
            raise ValueError("torus needs at least one axis")
        if any(L < 2 for L in shape):
            raise ValueError("every torus axis needs length >= 2")
        if self.cell_dim < 1 or not 0 <= self.quiescent < self.cell_dim:
            raise ValueError("invalid cell dimension or quiescent index")

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout.from_dims([self.cell_dim] * self.num_cells)

    def coords(self, x: int) -> tuple[int, ...]:
        return torus_coords(self.shape, x)

    def node(self, coords: Sequence[int]) -> int:
        return torus_node(self.shape, coords)

    def translate(self, x: int, offset: Sequence[int]) -> int:
        return self.node([c + o for c, o in zip(self.coords(x), offset)])


def hypercube_offsets(n: int) -> list[tuple[int, ...]]:
    """``{0,1}^n`` in lexicographic order (first axis most significant)."""
    return list(itertools.product((0, 1), repeat=n))


def make_torus_graph(spec: TorusSpec) -> QuantumLabeledGraph:
    edges = {(x, spec.translate(x, z)) for x in range(spec.num_cells) for z in hypercube_offsets(spec.ndim)}
    return QuantumLabeledGraph.uniform(spec.num_cells, spec.cell_dim, edges, spec.quiescent)


def translation_matrix(spec: TorusSpec, axis: int, step: int = 1) -> np.ndarray:
    """Permutation moving the content of every cell ``y`` to ``y + step e_axis``."""
    offset = [0] * spec.ndim
    offset[axis] = -step
    # new tensor axis z takes old axis z - step e_axis
    perm = [spec.translate(z, offset) for z in range(spec.num_cells)]
    D = spec.layout.total_dim
    eye = np.eye(D, dtype=complex).reshape((spec.cell_dim,) * spec.num_cells + (D,))
    return eye.transpose(perm + [spec.num_cells]).reshape(D, D)


def make_shift_qca(spec: TorusSpec) -> DenseOperator:
    """Shift on a ring: ``c'_x = c_{x-1}``."""
    if spec.ndim != 1:
        raise ValueError("the shift automaton is defined on a ring (n = 1)")
    return DenseOperator(spec.layout, translation_matrix(spec, 0, 1))


def shift_graph(spec: TorusSpec) -> QuantumLabeledGraph:
    """Ring with edges ``(x, x-1)``: the graph the right shift is causal for."""
    edges = {(x, spec.translate(x, [-1])) for x in range(spec.num_cells)}
    return QuantumLabeledGraph.uniform(spec.num_cells, spec.cell_dim, edges, spec.quiescent)


def _stage_blocks(spec: TorusSpec, offset: Sequence[int]) -> list[list[int]]:
    cubes = []
    for corner in itertools.product(*[range(o % 2, L, 2) for o, L in zip(offset, spec.shape)]):
        cubes.append([spec.node([c + z for c, z in zip(corner, zz)]) for zz in hypercube_offsets(spec.ndim)])
    return cubes


def make_partitioned_qca(
    spec: TorusSpec, block_unitary, offset_schedule: Sequence[Sequence[int]] | None = None, tol: float = 1e-9
) -> tuple[DenseOperator, QuantumLabeledGraph]:
    """Tile a block unitary on ``2 x ... x 2`` cubes, one stage per offset.

    ``block_unitary`` acts on ``cell_dim ** (2**n)``, its factors ordered by
    the cube offsets ``{0,1}^n`` lexicographically.  Stages are applied in
    the order given (default: the all-even offset only).  Returns the global
    unitary and the lightcone graph it is causal for.
    """
    n = spec.ndim
    if any(L % 2 for L in spec.shape):
        raise ValueError("partitioned automata need even axis lengths")
    B = block_unitary.matrix if isinstance(block_unitary, DenseOperator) else np.asarray(block_unitary, dtype=complex)
    if B.shape != (spec.cell_dim ** (2**n),) * 2:
        raise LayoutError("block does not act on a 2^n-cell cube")
    ok, residual = check_unitary(B, tol)
    if not ok:
        raise ValueError(f"block is not unitary (residual {residual:.3e})")
    if offset_schedule is None:
        offset_schedule = [(0,) * n]
    stages = [_stage_blocks(spec, off) for off in offset_schedule]
    dims = (spec.cell_dim,) * spec.num_cells
    U = np.eye(spec.layout.total_dim, dtype=complex)
    for cubes in stages:
        for cells in cubes:
            U = apply_local(U, dims, B, cells)
    # Heisenberg lightcone: the last stage acts first on an observable
    edges = set()
    for x in range(spec.num_cells):
        cone = {x}
        for cubes in reversed(stages):
            for cells in cubes:
                if cone & set(cells):
                    cone |= set(cells)
        edges.update((x, y) for y in cone)
    graph = QuantumLabeledGraph.uniform(spec.num_cells, spec.cell_dim, edges, spec.quiescent)
    return DenseOperator(spec.layout, U), graph


def symmetric_block(n: int, cell_dim: int, seed, quiescent: int = 0) -> np.ndarray:
    """Random cube unitary that commutes with the cube's own translations
    and fixes the all-quiescent state.

    Tiled on a torus whose axes all have length 2, it gives a fully
    shift-invariant automaton.
    """
    cells = 2**n
    D = cell_dim**cells
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    h = (h + h.conj().T) / 2
    offsets = hypercube_offsets(n)
    sym = np.zeros_like(h)
    for t in offsets:
        # cube translation: cell z -> z xor t
        perm = [offsets.index(tuple(a ^ b for a, b in zip(z, t))) for z in offsets]
        sym += permute_factors(h, [cell_dim] * cells, perm)
    q = np.zeros(D)
    q[int(np.ravel_multi_index((quiescent,) * cells, (cell_dim,) * cells))] = 1.0
    P = np.eye(D) - np.outer(q, q)
    sym = P @ sym @ P / len(offsets)
    w, V = np.linalg.eigh(sym)
    return (V * np.exp(1j * w)) @ V.conj().T


def verify_shift_invariance(G, spec: TorusSpec, tol: float = 1e-9, step: int = 1) -> tuple[bool, float]:
    """``max |G T - T G|`` over unit (or ``step``) translations along each axis."""
    M = G.matrix if isinstance(G, DenseOperator) else np.asarray(G)
    if M.shape != (spec.layout.total_dim,) * 2:
        raise LayoutError("operator does not act on the torus space")
    worst = 0.0
    for axis in range(spec.ndim):
        T = translation_matrix(spec, axis, step)
        worst = max(worst, max_norm(M @ T - T @ M))
    return worst <= tol, worst


@dataclass(frozen=True)
class BlockRepresentation:
    spec: TorusSpec
    circuit: Circuit
    K_block: DenseOperator
    layers: tuple[tuple[int, ...], ...]
    S_block: np.ndarray
    translation_deviation: float
    verification: VerificationReport

    @property
    def doubled_alphabet_dim(self) -> int:
        return self.spec.cell_dim**2

    @property
    def doubled_spec(self) -> TorusSpec:
        return TorusSpec(self.spec.shape, self.spec.cell_dim**2, self.spec.quiescent * (self.spec.cell_dim + 1))

    def h_matrix(self) -> DenseOperator:
        """``H = (⊗S)(∏K_x)`` as a matrix on the doubled-alphabet torus.

        Each cell's pair (computed, uncomputed) is one letter
        ``c * d + u``, which coincides with the doubled layout's index order.
        """
        c = self.circuit
        D = c.doubled.layout.total_dim
        v = np.eye(D, dtype=complex)
        for layer in c.layers:
            for gate in layer:
                v = apply_local(v, c.doubled.dims, gate.block.matrix, c.doubled.layout.axes(gate.support))
        v = c.decoding.apply(c.doubled, v)
        return DenseOperator(self.doubled_spec.layout, v)


def _translated_block(K: DenseOperator, support, spec: TorusSpec, offset, target_support) -> np.ndarray:
    moved = [(t, spec.translate(x, offset)) for t, x in support]
    if set(moved) != set(target_support):
        raise ShiftInvarianceViolation(float("inf"))
    perm = [moved.index(s) for s in target_support]
    return permute_factors(K.matrix, K.layout.dims, perm)


def translation_deviation(circuit: Circuit, spec: TorusSpec) -> tuple[float, int | None]:
    """Largest difference between each ``K_x`` and ``K_0`` translated to ``x``."""
    gates = {g.origin_node: g for g in circuit.gates}
    ref = gates[0]
    worst, where = 0.0, None
    for x, gate in gates.items():
        moved = _translated_block(ref.block, ref.support, spec, spec.coords(x), gate.support)
        d = max_norm(moved - gate.block.matrix)
        if d > worst:
            worst, where = d, x
    return worst, where


def block_representation(
    G: DenseOperator,
    spec: TorusSpec,
    tol: float = 1e-9,
    verify_tol: float = 1e-8,
    num_random_states: int = 20,
    seed: int = 0,
) -> BlockRepresentation:
    """Doubled-alphabet automaton ``H = (⊗S)(∏K_x)`` with ``H E = E G``.

    ``G`` must be shift-invariant, causal for the radius-half torus, and fix
    the all-quiescent configuration (otherwise ``H E = E G`` cannot hold:
    the leftover computed tape would not be quiescent).
    """
    ok, dev = verify_shift_invariance(G, spec, tol)
    if not ok:
        raise ShiftInvarianceViolation(dev)
    graph = make_torus_graph(spec)
    phi = leftover_state(G, graph)
    q = np.zeros_like(phi)
    q[graph.layout().basis_index(graph.quiescent)] = 1.0
    if max_norm(phi - q) > tol:
        raise ValueError("automaton does not fix the all-quiescent configuration")
    circuit = assemble(G, graph, tol, "torus-offsets", spec.shape, uncompute=False)
    if len(circuit.layers) != 2**spec.ndim:
        raise AssertionError("offset schedule did not produce 2^n layers")
    deviation, where = translation_deviation(circuit, spec)
    if deviation > tol:
        raise ShiftInvarianceViolation(deviation, where)
    report = verify_representation(circuit, G, num_random_states, seed, verify_tol)
    layers = tuple(tuple(g.origin_node for g in layer) for layer in circuit.layers)
    K0 = next(g for g in circuit.gates if g.origin_node == 0).block
    return BlockRepresentation(spec, circuit, K0, layers, swap_matrix(spec.cell_dim), deviation, report)


def s_stage_is_swap(rep: BlockRepresentation, tol: float = 0.0) -> bool:
    d = rep.spec.cell_dim
    return all(
        max_norm(b.matrix - swap_matrix(d)) <= tol and b.layout.slots[0] == (COMPUTED, x)
        for x, b in enumerate(rep.circuit.decoding.blocks)
    )
