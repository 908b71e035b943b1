"""Dense linear algebra on tensor products of (tape, node) slots.

Every space in this package is a finite tensor product of slots.  A slot is a
``(tape, node)`` pair; slots are always kept in canonical order, ascending by
``(node, tape)``, and basis indices are composed mixed-radix with the first
slot most significant (so a two-qubit index is ``2 * c_0 + c_1``).

Internally the heavy lifting is done on plain numpy arrays reshaped into one
axis per slot; the dataclasses below are thin immutable wrappers that carry the
layout alongside the numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import LayoutError, LocalizationViolation

Slot = tuple[int, int]  # (tape, node)
Support = tuple[Slot, ...]


def slot_key(slot: Slot) -> tuple[int, int]:
    tape, node = slot
    return (node, tape)


def canonical_support(slots: Iterable[Slot]) -> Support:
    """Sort slots canonically; raise on duplicates."""
    slots = [(int(t), int(n)) for t, n in slots]
    out = tuple(sorted(slots, key=slot_key))
    if len(set(out)) != len(out):
        raise LayoutError(f"duplicate slots in support {out}")
    return out


def node_support(nodes: Iterable[int], tape: int = 0) -> Support:
    return canonical_support((tape, x) for x in nodes)


def _frozen(array) -> np.ndarray:
    a = np.array(array, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered ``(tape, node, dim)`` slots of a tensor-product space."""

    entries: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        entries = tuple((int(t), int(n), int(d)) for t, n, d in self.entries)
        object.__setattr__(self, "entries", entries)
        slots = [(t, n) for t, n, _ in entries]
        if slots != sorted(slots, key=slot_key):
            raise LayoutError("layout slots must be in ascending (node, tape) order")
        if len(set(slots)) != len(slots):
            raise LayoutError("duplicate slot in layout")
        if any(d < 1 for *_, d in entries):
            raise LayoutError("slot dimensions must be positive")

    @classmethod
    def from_dims(cls, dims: Sequence[int], tape: int = 0) -> SpaceLayout:
        return cls(tuple((tape, n, d) for n, d in enumerate(dims)))

    @classmethod
    def build(cls, slot_dims: Iterable[tuple[Slot, int]]) -> SpaceLayout:
        """Layout from unordered ``((tape, node), dim)`` pairs."""
        items = sorted(((int(t), int(n)), int(d)) for (t, n), d in slot_dims)
        items.sort(key=lambda item: slot_key(item[0]))
        return cls(tuple((t, n, d) for (t, n), d in items))

    @property
    def slots(self) -> Support:
        return tuple((t, n) for t, n, _ in self.entries)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for *_, d in self.entries)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.entries else 1

    def __len__(self):
        return len(self.entries)

    def axis(self, slot: Slot) -> int:
        try:
            return self.slots.index(tuple(slot))
        except ValueError:
            raise LayoutError(f"slot {slot} not in layout") from None

    def axes(self, support: Iterable[Slot]) -> list[int]:
        return [self.axis(s) for s in support]

    def dim_of(self, slot: Slot) -> int:
        return self.dims[self.axis(slot)]

    def restrict(self, support: Iterable[Slot]) -> SpaceLayout:
        support = canonical_support(support)
        return SpaceLayout(tuple((t, n, self.dim_of((t, n))) for t, n in support))

    def complement(self, support: Iterable[Slot]) -> Support:
        keep = set(canonical_support(support))
        for s in keep:
            self.axis(s)
        return tuple(s for s in self.slots if s not in keep)

    def basis_index(self, digits: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(digits), self.dims)) if self.entries else 0

    def basis_digits(self, index: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(index, self.dims)) if self.entries else ()


@dataclass(frozen=True)
class DenseOperator:
    """Square complex matrix acting on ``layout``."""

    layout: SpaceLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        n = self.layout.total_dim
        if m.shape != (n, n):
            raise LayoutError(f"operator shape {m.shape} does not match layout dimension {n}")
        if not np.all(np.isfinite(m)):
            raise LayoutError("operator has non-finite entries")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def adjoint(self) -> DenseOperator:
        return DenseOperator(self.layout, self.matrix.conj().T)

    def __matmul__(self, other: DenseOperator) -> DenseOperator:
        if other.layout != self.layout:
            raise LayoutError("layouts differ")
        return DenseOperator(self.layout, self.matrix @ other.matrix)

    def __eq__(self, other):
        if not isinstance(other, DenseOperator):
            return NotImplemented
        return self.layout == other.layout and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


@dataclass(frozen=True)
class StateVector:
    layout: SpaceLayout
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        a = _frozen(self.amplitudes).reshape(-1)
        if a.shape != (self.layout.total_dim,):
            raise LayoutError(f"state length {a.shape[0]} does not match layout dimension {self.layout.total_dim}")
        if not np.all(np.isfinite(a)):
            raise LayoutError("state has non-finite entries")
        if self.normalized and abs(np.linalg.norm(a) - 1.0) > 1e-9:
            raise LayoutError("state vector is not normalized")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis(cls, layout: SpaceLayout, digits: Sequence[int]) -> StateVector:
        v = np.zeros(layout.total_dim, dtype=complex)
        v[layout.basis_index(digits)] = 1.0
        return cls(layout, v)

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.layout == other.layout and np.array_equal(self.amplitudes, other.amplitudes)

    __hash__ = None


@dataclass(frozen=True)
class DensityMatrix:
    layout: SpaceLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        n = self.layout.total_dim
        if m.shape != (n, n):
            raise LayoutError("density matrix shape does not match layout")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-9:
            raise LayoutError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > 1e-9:
            raise LayoutError("density matrix trace is not 1")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise LayoutError("density matrix is not positive")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, state: StateVector) -> DensityMatrix:
        a = state.amplitudes
        return cls(state.layout, np.outer(a, a.conj()))

    __hash__ = None


def max_norm(a) -> float:
    return float(np.max(np.abs(a), initial=0.0))


# ---------------------------------------------------------------------------
# raw-array kernels


def _local_matrix(local, support_layout: SpaceLayout) -> np.ndarray:
    if isinstance(local, DenseOperator):
        if local.layout.dims != support_layout.dims:
            raise LayoutError(f"operator dims {local.layout.dims} do not match support dims {support_layout.dims}")
        return local.matrix
    m = np.asarray(local, dtype=complex)
    n = support_layout.total_dim
    if m.shape != (n, n):
        raise LayoutError(f"operator shape {m.shape} does not match support dimension {n}")
    return m


def apply_local(vec: np.ndarray, dims: Sequence[int], matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply ``matrix`` on tensor ``axes`` of a flat vector over ``dims``.

    ``matrix`` factors follow the order of ``axes``.  Also accepts a 2-d
    ``vec`` whose columns are independent vectors.
    """
    dims = tuple(dims)
    axes = list(axes)
    batch = vec.shape[1:] if vec.ndim > 1 else ()
    t = vec.reshape(dims + batch)
    k = len(axes)
    g = matrix.reshape(tuple(dims[a] for a in axes) * 2)
    out = np.tensordot(g, t, axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the gate output axes first; move them back in place
    rest = [a for a in range(len(dims)) if a not in axes]
    order = axes + rest + list(range(len(dims), len(dims) + len(batch)))
    out = np.moveaxis(out, list(range(len(order))), order)
    return out.reshape(vec.shape)


def permute_factors(matrix: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor ``i`` is old factor ``perm[i]``."""
    dims = tuple(dims)
    n = len(dims)
    t = np.asarray(matrix).reshape(dims * 2)
    perm = list(perm)
    t = t.transpose(perm + [n + p for p in perm])
    d = int(np.prod(dims, dtype=np.int64))
    return t.reshape(d, d)


def embed_matrix(matrix: np.ndarray, dims: Sequence[int], axes: Sequence[int]) -> np.ndarray:
    dims = tuple(dims)
    axes = list(axes)
    rest = [a for a in range(len(dims)) if a not in axes]
    d_rest = int(np.prod([dims[a] for a in rest], dtype=np.int64))
    big = np.kron(matrix, np.eye(d_rest, dtype=complex))
    order = axes + rest
    inverse = list(np.argsort(order))
    return permute_factors(big, [dims[a] for a in order], inverse)


def localization_residual(matrix: np.ndarray, dims: Sequence[int], region_axes: Iterable[int]) -> float:
    """Max-entry commutator of ``matrix`` with matrix units outside the region.

    For an axis ``s`` with the operator written as ``T[a, r, b, r']`` (``a, b``
    on ``s``), the commutator with the unit ``E_ij`` on ``s`` has entries
    ``T[a, r, i, r'] δ_bj - δ_ai T[j, r, b, r']``, so no matrix products are
    needed.
    """
    dims = tuple(dims)
    region = set(region_axes)
    n = len(dims)
    worst = 0.0
    t = np.asarray(matrix).reshape(dims * 2)
    for s in range(n):
        if s in region:
            continue
        d = dims[s]
        rest = [a for a in range(n) if a != s]
        rd = int(np.prod([dims[a] for a in rest], dtype=np.int64))
        ts = t.transpose([s] + rest + [n + s] + [n + a for a in rest]).reshape(d, rd, d, rd)
        for i in range(d):
            for j in range(d):
                comm = np.zeros((d, rd, d, rd), dtype=complex)
                comm[:, :, j, :] += ts[:, :, i, :]
                comm[i, :, :, :] -= ts[j, :, :, :]
                worst = max(worst, max_norm(comm))
    return worst


# ---------------------------------------------------------------------------
# public operations


def _support_layout(support: Iterable[Slot], full_layout: SpaceLayout) -> tuple[Support, SpaceLayout, list[int]]:
    support = canonical_support(support)
    sub = full_layout.restrict(support)
    return support, sub, full_layout.axes(support)


def embed(local, support: Iterable[Slot], full_layout: SpaceLayout) -> DenseOperator:
    """Extend ``local`` (factors in canonical support order) by the identity."""
    support, sub, axes = _support_layout(support, full_layout)
    m = _local_matrix(local, sub)
    return DenseOperator(full_layout, embed_matrix(m, full_layout.dims, axes))


def partial_trace(op, keep: Iterable[Slot]) -> DenseOperator:
    """Trace out every slot of ``op.layout`` not in ``keep``."""
    layout = op.layout
    keep, sub, axes = _support_layout(keep, layout)
    dims = layout.dims
    n = len(dims)
    rest = [a for a in range(n) if a not in axes]
    dk = sub.total_dim
    dr = int(np.prod([dims[a] for a in rest], dtype=np.int64))
    t = np.asarray(op.matrix).reshape(dims * 2).transpose(axes + rest + [n + a for a in axes] + [n + a for a in rest])
    reduced = np.trace(t.reshape(dk, dr, dk, dr), axis1=1, axis2=3)
    return DenseOperator(sub, reduced)


def is_localized(op: DenseOperator, region: Iterable[Slot], tol: float = 1e-9) -> tuple[bool, float]:
    """Whether ``op`` is of the form ``A_region ⊗ I`` (commutant criterion)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    region = canonical_support(region)
    axes = op.layout.axes(region)
    residual = localization_residual(op.matrix, op.layout.dims, axes)
    return residual <= tol, residual


def extract_local_block(
    apply: Callable[[np.ndarray], np.ndarray],
    support: Iterable[Slot],
    full_layout: SpaceLayout,
    quiescent_fill: Sequence[int] | dict,
    tol: float = 1e-9,
) -> DenseOperator:
    """Local block of a global operator known only through its action.

    ``apply`` maps flat vectors over ``full_layout`` to flat vectors.
    ``quiescent_fill`` gives the basis index for every slot of the layout,
    either positionally or as a ``{slot: index}`` mapping.  Raises
    :class:`LocalizationViolation` when some output column has weight on
    basis states that disagree with the fill outside the support.
    """
    support, sub, axes = _support_layout(support, full_layout)
    dims = full_layout.dims
    if isinstance(quiescent_fill, dict):
        fill = [int(quiescent_fill[s]) for s in full_layout.slots]
    else:
        fill = [int(q) for q in quiescent_fill]
    if len(fill) != len(dims):
        raise LayoutError("quiescent fill does not cover the layout")
    rest = [a for a in range(len(dims)) if a not in axes]
    rest_fill = tuple(fill[a] for a in rest)
    block = np.zeros((sub.total_dim, sub.total_dim), dtype=complex)
    worst, worst_col = 0.0, None
    for col in range(sub.total_dim):
        digits = list(fill)
        for a, v in zip(axes, np.unravel_index(col, sub.dims) if axes else ()):
            digits[a] = int(v)
        vec = np.zeros(full_layout.total_dim, dtype=complex)
        vec[full_layout.basis_index(digits)] = 1.0
        out = np.asarray(apply(vec)).reshape(dims).transpose(axes + rest)
        out = out.reshape((sub.total_dim,) + tuple(dims[a] for a in rest))
        column = out[(slice(None),) + rest_fill].copy()
        off = out.copy()
        off[(slice(None),) + rest_fill] = 0.0
        off_weight = float(np.linalg.norm(off))
        if off_weight > worst:
            worst, worst_col = off_weight, col
        block[:, col] = column
    if worst > tol:
        raise LocalizationViolation(worst, column=worst_col)
    return DenseOperator(sub, block)


def apply_on_support(state: StateVector, gate, support: Iterable[Slot]) -> StateVector:
    """``embed(gate, support) @ state`` without forming the full matrix."""
    layout = state.layout
    support, sub, axes = _support_layout(support, layout)
    m = _local_matrix(gate, sub)
    out = apply_local(state.amplitudes, layout.dims, m, axes)
    return StateVector(layout, out, normalized=False)


def check_unitary(op, tol: float = 1e-9) -> tuple[bool, float]:
    m = op.matrix if isinstance(op, DenseOperator) else np.asarray(op)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LayoutError("unitarity check needs a square matrix")
    residual = max_norm(m.conj().T @ m - np.eye(m.shape[0]))
    return residual <= tol, residual


def random_unitary_matrix(dim: int, seed) -> np.ndarray:
    """Haar unitary from the QR decomposition of a seeded Ginibre matrix."""
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    # fix the column phases so the distribution is Haar, not QR-biased
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_unitary(dim: int, seed, layout: SpaceLayout | None = None) -> DenseOperator:
    if layout is None:
        layout = SpaceLayout.from_dims([dim]) if dim >= 1 else None
    elif layout.total_dim != dim:
        raise LayoutError("layout dimension does not match requested dimension")
    return DenseOperator(layout, random_unitary_matrix(dim, seed))


def random_state(layout: SpaceLayout, seed) -> StateVector:
    rng = np.random.default_rng(seed)
    n = layout.total_dim
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return StateVector(layout, v / np.linalg.norm(v))


def random_density_matrix(layout: SpaceLayout, seed) -> DensityMatrix:
    """Full-rank mixed state ``W W† / Tr`` from a seeded Ginibre matrix."""
    rng = np.random.default_rng(seed)
    n = layout.total_dim
    w = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = w @ w.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(layout, rho / np.trace(rho).real)
