"""Causality certificates for unitaries on quantum labeled graphs.

Two pictures are supported.  The Heisenberg check is complete: ``U`` is causal
iff ``U† E U`` is localized on ``N_x`` for every matrix unit ``E`` at every
node ``x``.  The sampled state check draws pairs of states agreeing on
``N_x`` and compares the evolved reduced states at ``x``; it can only refute.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import LayoutError, NonUnitaryError
from .graph import QuantumLabeledGraph, neighborhood, transpose
from .tensor import (
    DenseOperator,
    DensityMatrix,
    check_unitary,
    embed,
    localization_residual,
    max_norm,
    node_support,
    partial_trace,
    random_density_matrix,
    random_unitary_matrix,
)

log = logging.getLogger(__name__)

DEFAULT_SAMPLES = 20


class Picture(str, Enum):
    HEISENBERG = "heisenberg"
    STATE_SAMPLED = "state_sampled"


@dataclass(frozen=True)
class NodeVerdict:
    node: int
    passed: bool
    residual: float
    # matrix-unit index i*d+j (heisenberg) or sample number (state_sampled)
    witness: int | None = None


@dataclass(frozen=True)
class CausalityReport:
    picture: Picture
    per_node: tuple[NodeVerdict, ...]
    tol: float
    unitarity_residual: float
    certified_unitary: bool = True
    seed: int | None = None
    samples: int | None = None
    inverse: bool = False

    @property
    def overall(self) -> bool:
        return self.certified_unitary and all(v.passed for v in self.per_node)

    @property
    def failing_nodes(self) -> list[int]:
        return [v.node for v in self.per_node if not v.passed]

    @property
    def max_residual(self) -> float:
        return max((v.residual for v in self.per_node), default=0.0)

    def worst(self) -> NodeVerdict | None:
        return max(self.per_node, key=lambda v: v.residual, default=None)


def _check_shapes(U: DenseOperator, g: QuantumLabeledGraph):
    if U.layout.dims != g.dims:
        raise LayoutError(f"operator dims {U.layout.dims} do not match graph dims {g.dims}")


def _unitarity(U: DenseOperator, tol: float, diagnostic: bool) -> tuple[bool, float]:
    ok, residual = check_unitary(U, tol)
    if not ok:
        if not diagnostic:
            raise NonUnitaryError(residual)
        log.warning("operator is not unitary (residual %.3e); reporting residuals only", residual)
    return ok, residual


def heisenberg_image(U: DenseOperator, A: DenseOperator) -> DenseOperator:
    """``U† A U``."""
    if U.layout.dims != A.layout.dims:
        raise LayoutError("operator and observable live on different spaces")
    ok, residual = check_unitary(U, 1e-9)
    if not ok:
        log.warning("heisenberg_image on a non-unitary operator (residual %.3e)", residual)
    return DenseOperator(A.layout, U.matrix.conj().T @ A.matrix @ U.matrix)


def matrix_unit_images(U: np.ndarray, dims, x: int):
    """Yield ``(i, j, U† E_ij U)`` for the matrix units ``E_ij`` at axis ``x``.

    Uses ``U† (E_ij ⊗ I) U = U_i† U_j`` where ``U_i`` keeps the rows whose
    digit at ``x`` is ``i``.
    """
    dims = tuple(dims)
    D = U.shape[0]
    d = dims[x]
    rows = np.moveaxis(U.reshape(dims + (D,)), x, 0).reshape(d, D // d, D)
    for i in range(d):
        left = rows[i].conj().T
        for j in range(d):
            yield i, j, left @ rows[j]


def node_heisenberg_residual(U: np.ndarray, g: QuantumLabeledGraph, x: int) -> tuple[float, int]:
    """Worst localization residual on ``N_x`` and the matrix unit producing it."""
    dims = g.dims
    region = neighborhood(g, x)
    worst, witness = 0.0, 0
    for i, j, image in matrix_unit_images(U, dims, x):
        r = localization_residual(image, dims, region)
        if r > worst:
            worst, witness = r, i * dims[x] + j
    return worst, witness


def check_causal_heisenberg(
    U: DenseOperator, g: QuantumLabeledGraph, tol: float = 1e-9, diagnostic: bool = False
) -> CausalityReport:
    """Complete causality certificate in the Heisenberg picture.

    A non-unitary ``U`` raises :class:`NonUnitaryError` unless ``diagnostic``
    is set, in which case residuals are still reported but nothing is
    certified.
    """
    _check_shapes(U, g)
    unitary, ures = _unitarity(U, tol, diagnostic)
    verdicts = []
    for x in range(len(g)):
        residual, witness = node_heisenberg_residual(U.matrix, g, x)
        passed = residual <= tol
        verdicts.append(NodeVerdict(x, passed, residual, None if passed else witness))
    return CausalityReport(Picture.HEISENBERG, tuple(verdicts), tol, ures, unitary)


def sampled_witness(U: DenseOperator, g: QuantumLabeledGraph, x: int, sample: int, seed: int):
    """Rebuild the state pair drawn for ``(x, sample)`` and its residual.

    Returns ``(rho, rho_prime, residual)``.  ``rho_prime = V rho V†`` with
    ``V`` a random unitary on everything outside ``N_x``, so both states
    agree on ``N_x``.
    """
    layout = U.layout
    rho = random_density_matrix(layout, (seed, x, sample, 0))
    outside = layout.complement(node_support(neighborhood(g, x)))
    if outside:
        sub = layout.restrict(outside)
        V = embed(random_unitary_matrix(sub.total_dim, (seed, x, sample, 1)), outside, layout).matrix
        m = V @ rho.matrix @ V.conj().T
        rho_prime = DensityMatrix(layout, (m + m.conj().T) / 2)
    else:
        rho_prime = rho
    u = U.matrix
    keep = node_support([x])
    out = partial_trace(DenseOperator(layout, u @ rho.matrix @ u.conj().T), keep)
    out_prime = partial_trace(DenseOperator(layout, u @ rho_prime.matrix @ u.conj().T), keep)
    return rho, rho_prime, max_norm(out.matrix - out_prime.matrix)


def check_causal_state_sampled(
    U: DenseOperator,
    g: QuantumLabeledGraph,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    tol: float = 1e-9,
    diagnostic: bool = False,
) -> CausalityReport:
    """Monte-Carlo falsification of causality in the state picture.

    Each ``(node, sample)`` pair draws from its own seed, so the report does
    not depend on evaluation order.  A failing node's witness is the sample
    number; :func:`sampled_witness` recomputes the state pair.
    """
    _check_shapes(U, g)
    unitary, ures = _unitarity(U, tol, diagnostic)
    verdicts = []
    for x in range(len(g)):
        worst, witness = 0.0, 0
        for k in range(samples):
            *_, r = sampled_witness(U, g, x, k, seed)
            if r > worst:
                worst, witness = r, k
        passed = worst <= tol
        verdicts.append(NodeVerdict(x, passed, worst, None if passed else witness))
    return CausalityReport(
        Picture.STATE_SAMPLED, tuple(verdicts), tol, ures, unitary, seed=seed, samples=samples
    )


def check_inverse_causal(U: DenseOperator, g: QuantumLabeledGraph, tol: float = 1e-9) -> CausalityReport:
    """Certify ``U†`` against the transposed graph."""
    report = check_causal_heisenberg(U.adjoint(), transpose(g), tol)
    return CausalityReport(
        report.picture, report.per_node, tol, report.unitarity_residual, report.certified_unitary, inverse=True
    )
