"""Compile a causal unitary into a local circuit on a doubled (two-tape) space.

Every node ``x`` gets two slots: tape 0 ("computed") and tape 1
("uncomputed").  The circuit is

* encode: computed tape set to the quiescent product state, input on the
  uncomputed tape;
* layers of commuting gates ``K_x = U Swap_x U†`` (``U`` on the computed
  tape), each supported on ``N^T_x`` of the computed tape plus ``x`` of the
  uncomputed tape;
* decode: per-node tape swap, optionally followed by a per-node unitary that
  returns the leftover ``U†(⊗|q>)`` to ``⊗|q>`` when that state is a product.

Afterwards the computed tape holds the leftover state and the uncomputed tape
holds ``U|ψ>``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LayoutError, LocalizationViolation, NonUnitaryBlock, NonUnitaryError, VerificationFailure
from .graph import (
    Coloring,
    QuantumLabeledGraph,
    conflict_coloring,
    degree_stats,
    in_neighborhood,
    is_proper,
    torus_offset_coloring,
)
from .tensor import (
    DenseOperator,
    SpaceLayout,
    Support,
    apply_local,
    canonical_support,
    check_unitary,
    embed_matrix,
    max_norm,
)

log = logging.getLogger(__name__)

COMPUTED = 0
UNCOMPUTED = 1

SCHEDULES = ("greedy", "torus-offsets")


@dataclass(frozen=True)
class DoubledLayout:
    base_graph: QuantumLabeledGraph
    layout: SpaceLayout

    @classmethod
    def of(cls, g: QuantumLabeledGraph) -> DoubledLayout:
        entries = []
        for x, node in enumerate(g.nodes):
            entries.append((COMPUTED, x, node.dim))
            entries.append((UNCOMPUTED, x, node.dim))
        return cls(g, SpaceLayout(tuple(entries)))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    def tape_axes(self, tape: int) -> list[int]:
        return [2 * x + tape for x in range(len(self.base_graph))]

    @property
    def fill(self) -> list[int]:
        return [q for q in self.base_graph.quiescent for _ in (COMPUTED, UNCOMPUTED)]


def swap_matrix(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            s[b * d + a, a * d + b] = 1.0
    return s


@dataclass(frozen=True)
class LocalGate:
    block: DenseOperator
    support: Support
    origin_node: int
    residual: float = 0.0

    def __post_init__(self):
        support = canonical_support(self.support)
        if self.block.layout.slots != support:
            raise LayoutError("gate block layout does not match its support")
        object.__setattr__(self, "support", support)


@dataclass(frozen=True)
class Encoding:
    """Per node: put ``|q>`` on the computed tape, keep the input on the other."""

    quiescent: tuple[int, ...]

    def apply(self, doubled: DoubledLayout, states: np.ndarray) -> np.ndarray:
        base_dims = doubled.base_graph.dims
        batch = states.shape[1:]
        out = np.zeros(doubled.dims + batch, dtype=complex)
        index = tuple(item for q in self.quiescent for item in (q, slice(None)))
        out[index] = states.reshape(base_dims + batch)
        return out.reshape((doubled.layout.total_dim,) + batch)


@dataclass(frozen=True)
class Decoding:
    """Per-node decoding blocks on ``[(computed, x), (uncomputed, x)]``.

    Each block is the tape swap, followed (when ``uncompute``) by a unitary on
    the computed tape sending the leftover factor back to ``|q>``.
    """

    blocks: tuple[DenseOperator, ...]
    uncompute: bool = False

    def apply(self, doubled: DoubledLayout, states: np.ndarray) -> np.ndarray:
        for x, block in enumerate(self.blocks):
            states = apply_local(states, doubled.dims, block.matrix, [2 * x, 2 * x + 1])
        return states


@dataclass(frozen=True)
class Circuit:
    doubled: DoubledLayout
    encoding: Encoding
    layers: tuple[tuple[LocalGate, ...], ...]
    decoding: Decoding
    schedule: str = "greedy"

    @property
    def depth(self) -> int:
        return len(self.layers) + 2

    @property
    def gates(self) -> list[LocalGate]:
        return sorted((g for layer in self.layers for g in layer), key=lambda g: g.origin_node)

    def layer_assignment(self) -> dict[int, int]:
        return {g.origin_node: i for i, layer in enumerate(self.layers) for g in layer}

    def run(self, states: np.ndarray) -> np.ndarray:
        """Apply encode, all layers, decode to base-space column vectors."""
        dims = self.doubled.dims
        layout = self.doubled.layout
        v = self.encoding.apply(self.doubled, np.asarray(states, dtype=complex))
        for layer in self.layers:
            for gate in layer:
                v = apply_local(v, dims, gate.block.matrix, layout.axes(gate.support))
        return self.decoding.apply(self.doubled, v)


# ---------------------------------------------------------------------------


def build_encoding(g: QuantumLabeledGraph) -> tuple[DoubledLayout, Encoding]:
    return DoubledLayout.of(g), Encoding(g.quiescent)


def build_swap_x(doubled: DoubledLayout, x: int) -> LocalGate:
    support = ((COMPUTED, x), (UNCOMPUTED, x))
    layout = doubled.layout.restrict(support)
    return LocalGate(DenseOperator(layout, swap_matrix(doubled.base_graph.nodes[x].dim)), support, x)


def apply_on_tape(doubled: DoubledLayout, U: np.ndarray, states: np.ndarray, tape: int = COMPUTED) -> np.ndarray:
    return apply_local(states, doubled.dims, U, doubled.tape_axes(tape))


def gate_support(g: QuantumLabeledGraph, x: int) -> Support:
    return canonical_support([(COMPUTED, y) for y in in_neighborhood(g, x)] + [(UNCOMPUTED, x)])


def _k_oracle(doubled: DoubledLayout, U: np.ndarray, x: int):
    Udag = U.conj().T
    swap = swap_matrix(doubled.base_graph.nodes[x].dim)
    dims = doubled.dims

    def apply(v):
        v = apply_on_tape(doubled, Udag, v)
        v = apply_local(v, dims, swap, [2 * x, 2 * x + 1])
        return apply_on_tape(doubled, U, v)

    return apply


def _extract_with_fill(apply, doubled: DoubledLayout, support: Support) -> tuple[np.ndarray, float]:
    """Columns of the local block from quiescent-filled basis inputs.

    Returns ``(block, off_support_weight)`` where the weight is the largest
    norm found on basis states that leave the quiescent fill off-support.
    """
    layout = doubled.layout
    dims = layout.dims
    axes = layout.axes(support)
    rest = [a for a in range(len(dims)) if a not in axes]
    sub_dims = tuple(dims[a] for a in axes)
    n = int(np.prod(sub_dims))
    fill = doubled.fill
    inputs = np.zeros((layout.total_dim, n), dtype=complex)
    for col in range(n):
        digits = list(fill)
        for a, v in zip(axes, np.unravel_index(col, sub_dims)):
            digits[a] = int(v)
        inputs[layout.basis_index(digits), col] = 1.0
    out = apply(inputs).reshape(dims + (n,)).transpose(axes + rest + [len(dims)])
    out = out.reshape((n,) + tuple(dims[a] for a in rest) + (n,))
    rest_fill = tuple(fill[a] for a in rest)
    block = out[(slice(None),) + rest_fill].copy()
    out[(slice(None),) + rest_fill] = 0.0
    weights = np.linalg.norm(out.reshape(-1, n), axis=0)
    return block, float(weights.max(initial=0.0))


def _probe_residual(apply, doubled: DoubledLayout, support: Support, block: np.ndarray, probes: int, seed) -> float:
    """Compare the oracle with ``block ⊗ I`` on random off-support fills."""
    layout = doubled.layout
    dims = layout.dims
    axes = layout.axes(support)
    rest = [a for a in range(len(dims)) if a not in axes]
    n = block.shape[0]
    rd = layout.total_dim // n
    rng = np.random.default_rng(seed)
    worst = 0.0
    perm = axes + rest
    inv = list(np.argsort(perm))
    for _ in range(probes):
        r = rng.standard_normal(rd) + 1j * rng.standard_normal(rd)
        r /= np.linalg.norm(r)
        # columns: e_b ⊗ r in (support, rest) order, then back to canonical axis order
        inputs = np.einsum("bc,r->brc", np.eye(n), r).reshape(tuple(dims[a] for a in perm) + (n,))
        inputs = inputs.transpose(inv + [len(dims)]).reshape(layout.total_dim, n)
        expected = np.einsum("bc,r->brc", block, r).reshape(tuple(dims[a] for a in perm) + (n,))
        expected = expected.transpose(inv + [len(dims)]).reshape(layout.total_dim, n)
        worst = max(worst, max_norm(apply(inputs) - expected))
    return worst


def synthesize_K(
    U: DenseOperator,
    g: QuantumLabeledGraph,
    x: int,
    tol: float = 1e-9,
    doubled: DoubledLayout | None = None,
    probes: int = 2,
) -> LocalGate:
    """Local block of ``U Swap_x U†`` on ``(N^T_x, computed) ∪ (x, uncomputed)``.

    The block is read off column by column from the action on
    quiescent-filled basis states.  Weight leaking outside the support, or a
    mismatch against ``block ⊗ I`` on ``probes`` random off-support fills,
    raises :class:`LocalizationViolation`; for a unitary ``U`` this means
    ``U`` is not causal for ``g``.
    """
    if doubled is None:
        doubled = DoubledLayout.of(g)
    if U.layout.dims != g.dims:
        raise LayoutError("operator does not act on the graph's space")
    support = gate_support(g, x)
    apply = _k_oracle(doubled, U.matrix, x)
    block, leak = _extract_with_fill(apply, doubled, support)
    if leak > tol:
        raise LocalizationViolation(leak, node=x)
    residual = leak
    if probes:
        residual = max(residual, _probe_residual(apply, doubled, support, block, probes, (x, 7)))
        if residual > tol:
            raise LocalizationViolation(residual, node=x)
    ok, ures = check_unitary(block, tol)
    if not ok:
        raise NonUnitaryBlock(ures, f"gate at node {x} is not unitary (residual {ures:.3e})")
    return LocalGate(DenseOperator(doubled.layout.restrict(support), block), support, x, residual)


def check_commutation(gates: Sequence[LocalGate], tol: float | None = None) -> float:
    """Largest max-entry commutator over pairs of gates with overlapping supports."""
    worst = 0.0
    for a, b in itertools.combinations(gates, 2):
        if not set(a.support) & set(b.support):
            continue
        layout = SpaceLayout.build(
            [(s, a.block.layout.dim_of(s)) for s in a.support]
            + [(s, b.block.layout.dim_of(s)) for s in b.support if s not in a.support]
        )
        A = embed_matrix(a.block.matrix, layout.dims, layout.axes(a.support))
        B = embed_matrix(b.block.matrix, layout.dims, layout.axes(b.support))
        worst = max(worst, max_norm(A @ B - B @ A))
    if tol is not None and worst > tol:
        log.warning("gates fail to commute: %.3e > %.3e", worst, tol)
    return worst


def _unit_to(vec: np.ndarray, q: int) -> np.ndarray:
    """A unitary ``W`` with ``W vec = |q>`` for a unit vector ``vec``."""
    d = vec.shape[0]
    e = np.zeros(d, dtype=complex)
    e[q] = 1.0
    if np.allclose(vec, e, atol=1e-14, rtol=0):
        return np.eye(d, dtype=complex)
    m = np.column_stack([vec] + [np.eye(d)[:, k] for k in range(d)])
    Q, R = np.linalg.qr(m)
    Q = Q[:, :d] * (R[0, 0] / abs(R[0, 0]))
    # Q e_0 = vec; move column 0 to position q
    perm = list(range(d))
    perm[0], perm[q] = perm[q], perm[0]
    Qp = Q[:, perm]
    return Qp.conj().T


def product_factors(state: np.ndarray, dims: Sequence[int], tol: float) -> list[np.ndarray] | None:
    """Factor ``state`` as ``⊗ v_x`` (global phase on the first factor), or None."""
    dims = tuple(dims)
    t = state.reshape(dims)
    factors = []
    for x in range(len(dims)):
        m = np.moveaxis(t, x, 0).reshape(dims[x], -1)
        u, _, _ = np.linalg.svd(m, full_matrices=False)
        v = u[:, 0]
        # deterministic gauge: largest component real positive
        k = int(np.argmax(np.abs(v)))
        factors.append(v * (abs(v[k]) / v[k]))
    prod = factors[0]
    for v in factors[1:]:
        prod = np.kron(prod, v)
    overlap = np.vdot(prod, state)
    if abs(1 - abs(overlap)) > tol:
        return None
    factors[0] = factors[0] * (overlap / abs(overlap))
    return factors


def leftover_state(U: DenseOperator, g: QuantumLabeledGraph) -> np.ndarray:
    """``U†(⊗|q>)``, the state left on the computed tape after decoding."""
    q = np.zeros(U.dim, dtype=complex)
    q[g.layout().basis_index(g.quiescent)] = 1.0
    return U.matrix.conj().T @ q


def build_decoding(U: DenseOperator, g: QuantumLabeledGraph, doubled: DoubledLayout, tol: float, uncompute: bool = True) -> Decoding:
    phi = leftover_state(U, g)
    factors = product_factors(phi, g.dims, tol) if uncompute else None
    blocks = []
    for x, node in enumerate(g.nodes):
        s = swap_matrix(node.dim)
        if factors is not None:
            W = _unit_to(factors[x], node.quiescent)
            s = np.kron(W, np.eye(node.dim)) @ s
        blocks.append(DenseOperator(doubled.layout.restrict([(COMPUTED, x), (UNCOMPUTED, x)]), s))
    return Decoding(tuple(blocks), uncompute=factors is not None)


def schedule(gates: Sequence[LocalGate], method: str = "greedy", torus_shape: Sequence[int] | None = None) -> Coloring:
    if method == "greedy":
        return conflict_coloring([gt.support for gt in gates])
    if method == "torus-offsets":
        if torus_shape is None:
            raise ValueError("torus-offsets schedule needs the torus shape")
        coloring = torus_offset_coloring(torus_shape)
        if len(coloring.assignment) != len(gates):
            raise ValueError("torus shape does not match the number of gates")
        if not is_proper(coloring, [gt.support for gt in gates]):
            raise ValueError("offset schedule puts overlapping gates in one layer")
        return coloring
    raise ValueError(f"unknown schedule {method!r}; expected one of {SCHEDULES}")


def assemble(
    U: DenseOperator,
    g: QuantumLabeledGraph,
    tol: float = 1e-9,
    schedule_method: str = "greedy",
    torus_shape: Sequence[int] | None = None,
    uncompute: bool = True,
) -> Circuit:
    """Synthesize every ``K_x``, schedule them into layers and add encode/decode."""
    if U.layout.dims != g.dims:
        raise LayoutError("operator does not act on the graph's space")
    ok, residual = check_unitary(U, tol)
    if not ok:
        raise NonUnitaryError(residual)
    doubled, encoding = build_encoding(g)
    gates = [synthesize_K(U, g, x, tol, doubled) for x in range(len(g))]
    coloring = schedule(gates, schedule_method, torus_shape)
    layers = tuple(tuple(gates[i] for i in cls) for cls in coloring.classes() if cls)
    decoding = build_decoding(U, g, doubled, tol, uncompute)
    return Circuit(doubled, encoding, layers, decoding, schedule_method)


@dataclass(frozen=True)
class VerificationReport:
    max_deviation: float
    worst_input: str
    num_inputs: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol


def verification_inputs(dim: int, num_random_states: int, seed: int) -> tuple[np.ndarray, list[str]]:
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((dim, num_random_states)) + 1j * rng.standard_normal((dim, num_random_states))
    r /= np.linalg.norm(r, axis=0, keepdims=True) if num_random_states else 1
    labels = [f"basis:{i}" for i in range(dim)] + [f"random:{k}" for k in range(num_random_states)]
    return np.hstack([np.eye(dim, dtype=complex), r]), labels


def expected_output(circuit: Circuit, U: DenseOperator, states: np.ndarray) -> np.ndarray:
    """Computed tape ``|φ>`` (or ``⊗|q>`` after uncompute), uncomputed tape ``U|ψ>``."""
    g = circuit.doubled.base_graph
    if circuit.decoding.uncompute:
        left = np.zeros(U.dim, dtype=complex)
        left[g.layout().basis_index(g.quiescent)] = 1.0
    else:
        left = leftover_state(U, g)
    right = U.matrix @ states
    n = len(g)
    base = g.dims
    batch = states.shape[1]
    t = np.einsum("a,bk->abk", left, right).reshape(base + base + (batch,))
    order = [ax for x in range(n) for ax in (x, n + x)] + [2 * n]
    return t.transpose(order).reshape(-1, batch)


def verify_representation(
    circuit: Circuit, U: DenseOperator, num_random_states: int = 20, seed: int = 0, tol: float = 1e-8, raise_on_failure: bool = True
) -> VerificationReport:
    """Run the circuit on all basis states plus random states and compare exactly.

    No global phase is quotiented out.
    """
    g = circuit.doubled.base_graph
    if U.layout.dims != g.dims:
        raise LayoutError("operator does not act on the circuit's base space")
    states, labels = verification_inputs(U.dim, num_random_states, seed)
    got = circuit.run(states)
    want = expected_output(circuit, U, states)
    dev = np.linalg.norm(got - want, axis=0)
    k = int(np.argmax(dev))
    report = VerificationReport(float(dev[k]), labels[k], len(labels), tol)
    if raise_on_failure and not report.passed:
        raise VerificationFailure(report.max_deviation, report.worst_input)
    return report


def depth_bound(g: QuantumLabeledGraph) -> int:
    """Bound on the number of gate layers: ``(max |N^T_x ∪ {x}|)**2``."""
    return degree_stats(g)[2] ** 2
