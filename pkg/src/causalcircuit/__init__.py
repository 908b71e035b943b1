"""Causality certification and local-circuit compilation for unitaries on quantum labeled graphs."""

from .causality import (
    CausalityReport,
    check_causal_heisenberg,
    check_causal_state_sampled,
    check_inverse_causal,
    heisenberg_image,
)
from .errors import (
    LocalizationViolation,
    NonUnitaryBlock,
    NonUnitaryError,
    ShiftInvarianceViolation,
    VerificationFailure,
)
from .graph import QuantumLabeledGraph, conflict_coloring, degree_stats, neighborhood, transpose
from .localizer import Circuit, assemble, synthesize_K, verify_representation
from .qca import TorusSpec, block_representation, make_partitioned_qca, make_shift_qca, make_torus_graph
from .tensor import DenseOperator, SpaceLayout, StateVector, embed, is_localized, partial_trace

__version__ = "0.1.0"
