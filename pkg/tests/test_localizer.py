import numpy as np
import pytest

from causalcircuit import zoo
from causalcircuit.errors import LocalizationViolation, NonUnitaryError, VerificationFailure
from causalcircuit.graph import QuantumLabeledGraph, degree_stats
from causalcircuit.localizer import (
    COMPUTED,
    UNCOMPUTED,
    DoubledLayout,
    assemble,
    build_encoding,
    build_swap_x,
    check_commutation,
    depth_bound,
    gate_support,
    leftover_state,
    product_factors,
    swap_matrix,
    synthesize_K,
    verification_inputs,
    verify_representation,
)
from causalcircuit.qca import TorusSpec, make_shift_qca
from causalcircuit.tensor import DenseOperator, check_unitary, embed, is_localized, random_unitary_matrix

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def full_K(U, g, x):
    """Brute force ``(U ⊗ I) Swap_x (U† ⊗ I)`` on the whole doubled space."""
    doubled = DoubledLayout.of(g)
    computed = [(COMPUTED, y) for y in range(len(g))]
    Uc = embed(U.matrix, computed, doubled.layout).matrix
    S = embed(swap_matrix(g.nodes[x].dim), [(COMPUTED, x), (UNCOMPUTED, x)], doubled.layout).matrix
    return DenseOperator(doubled.layout, Uc @ S @ Uc.conj().T)


class TestEncoding:
    def test_single_qubit(self):
        g = QuantumLabeledGraph.uniform(1, 2, {(0, 0)})
        doubled, enc = build_encoding(g)
        out = enc.apply(doubled, np.array([0, 1], dtype=complex))
        np.testing.assert_array_equal(out, [0, 1, 0, 0])  # |0>_c |1>_u

    def test_quiescent_input(self):
        g = QuantumLabeledGraph(((3, 2), (2, 1)), frozenset())
        doubled, enc = build_encoding(g)
        v = np.zeros(6, dtype=complex)
        v[g.layout().basis_index([2, 1])] = 1
        out = enc.apply(doubled, v)
        assert out[doubled.layout.basis_index([2, 2, 1, 1])] == 1
        assert np.count_nonzero(out) == 1

    def test_isometry(self):
        g = QuantumLabeledGraph(((2, 0), (3, 1), (2, 1)), frozenset())
        doubled, enc = build_encoding(g)
        rng = np.random.default_rng(0)
        states = rng.standard_normal((12, 10)) + 1j * rng.standard_normal((12, 10))
        states /= np.linalg.norm(states, axis=0)
        out = enc.apply(doubled, states)
        np.testing.assert_allclose(out.conj().T @ out, states.conj().T @ states, atol=1e-13)


class TestSwap:
    def test_qubit_swap_matrix(self):
        doubled = DoubledLayout.of(QuantumLabeledGraph.uniform(2, 2))
        s = build_swap_x(doubled, 1)
        np.testing.assert_array_equal(s.block.matrix, SWAP)
        assert s.support == ((COMPUTED, 1), (UNCOMPUTED, 1))

    def test_involution_and_commuting(self):
        doubled = DoubledLayout.of(QuantumLabeledGraph.uniform(3, 3))
        s0, s1 = build_swap_x(doubled, 0), build_swap_x(doubled, 1)
        np.testing.assert_array_equal(s0.block.matrix @ s0.block.matrix, np.eye(9))
        assert check_commutation([s0, s1]) == 0.0


class TestSynthesizeK:
    def test_identity_gives_swap(self):
        inst = zoo.identity()
        for x in range(3):
            gate = synthesize_K(inst.U, inst.graph, x)
            np.testing.assert_array_equal(gate.block.matrix, SWAP)
            assert gate.support == ((COMPUTED, x), (UNCOMPUTED, x))

    def test_shift_against_full_conjugation(self):
        inst = zoo.shift(4)
        for x in range(4):
            gate = synthesize_K(inst.U, inst.graph, x)
            assert gate.support == tuple(sorted([(COMPUTED, (x + 1) % 4), (UNCOMPUTED, x)], key=lambda s: (s[1], s[0])))
            K = full_K(inst.U, inst.graph, x)
            np.testing.assert_allclose(embed(gate.block, gate.support, K.layout).matrix, K.matrix, atol=1e-14)
            # (computed, x+1) <-> (uncomputed, x) in support order
            expected = SWAP
            np.testing.assert_array_equal(gate.block.matrix, expected)

    def test_local_unitary_blocks(self):
        u = random_unitary_matrix(2, 4)
        U = np.kron(np.kron(u, u), u)
        g = zoo.self_loops(3)
        gate = synthesize_K(DenseOperator(g.layout(), U), g, 1)
        expected = np.kron(u, np.eye(2)) @ SWAP @ np.kron(u.conj().T, np.eye(2))
        np.testing.assert_allclose(gate.block.matrix, expected, atol=1e-14)

    @pytest.mark.parametrize("name", list(zoo.NON_CAUSAL))
    def test_non_causal_rejected(self, name):
        inst = zoo.get(name)
        with pytest.raises(LocalizationViolation):
            for x in range(len(inst.graph)):
                synthesize_K(inst.U, inst.graph, x)

    def test_violation_residual_recomputes(self):
        inst = zoo.distant_swap()
        with pytest.raises(LocalizationViolation) as first:
            synthesize_K(inst.U, inst.graph, 0)
        with pytest.raises(LocalizationViolation) as second:
            synthesize_K(inst.U, inst.graph, 0)
        assert first.value.residual == second.value.residual == 1.0
        assert first.value.node == 0


@pytest.mark.parametrize("name", list(zoo.CAUSAL))
def test_blocks_match_materialized_K(name):
    """Complete localization check on the full doubled-space matrix."""
    inst = zoo.get(name)
    for x in range(len(inst.graph)):
        gate = synthesize_K(inst.U, inst.graph, x)
        K = full_K(inst.U, inst.graph, x)
        ok, residual = is_localized(K, gate_support(inst.graph, x), 1e-9)
        assert ok, residual
        np.testing.assert_allclose(embed(gate.block, gate.support, K.layout).matrix, K.matrix, atol=1e-12)


class TestCommutation:
    def test_disjoint(self):
        circuit = assemble(zoo.shift(4).U, zoo.shift(4).graph)
        assert check_commutation(circuit.gates) == 0.0

    def test_radius_half_overlapping(self):
        inst = zoo.qca_1d()
        gates = [synthesize_K(inst.U, inst.graph, x) for x in range(4)]
        assert set(gates[0].support) & set(gates[1].support)
        assert check_commutation(gates) <= 1e-10


class TestAssemble:
    def test_identity(self):
        inst = zoo.identity()
        c = assemble(inst.U, inst.graph)
        assert len(c.layers) == 1 and c.depth == 3
        assert all(np.array_equal(g.block.matrix, SWAP) for g in c.layers[0])

    def test_shift(self):
        inst = zoo.shift(4)
        c = assemble(inst.U, inst.graph)
        assert len(c.layers) == 1 and c.depth == 3
        assert degree_stats(inst.graph) == (1, 1, 2)
        assert c.depth <= depth_bound(inst.graph) + 2

    def test_radius_half_two_layers(self):
        inst = zoo.qca_1d()
        c = assemble(inst.U, inst.graph, schedule_method="torus-offsets", torus_shape=(4,))
        assert len(c.layers) == 2 and c.depth == 4
        assert [[g.origin_node for g in layer] for layer in c.layers] == [[0, 2], [1, 3]]

    def test_non_unitary(self):
        g = zoo.self_loops(1)
        with pytest.raises(NonUnitaryError):
            assemble(DenseOperator(g.layout(), np.diag([1, 0.5])), g)

    def test_unknown_schedule(self):
        inst = zoo.identity()
        with pytest.raises(ValueError):
            assemble(inst.U, inst.graph, schedule_method="optimal")


class TestVerify:
    def test_identity_exact(self):
        inst = zoo.identity()
        assert verify_representation(assemble(inst.U, inst.graph), inst.U).max_deviation == 0.0

    def test_shift(self):
        inst = zoo.shift(4)
        r = verify_representation(assemble(inst.U, inst.graph), inst.U, 20, seed=0, tol=1e-10)
        assert r.max_deviation <= 1e-10 and r.num_inputs == 36

    def test_torus_2x2(self):
        inst = zoo.partitioned_2d()
        c = assemble(inst.U, inst.graph, schedule_method="torus-offsets", torus_shape=(2, 2))
        r = verify_representation(c, inst.U, 20, 0, 1e-8)
        assert r.num_inputs == 16 + 20 and r.max_deviation <= 1e-8

    def test_wrong_operator(self):
        inst = zoo.shift(4)
        c = assemble(inst.U, inst.graph)
        wrong = DenseOperator(inst.U.layout, np.eye(16))
        # basis inputs: shifted and unshifted basis states are orthogonal, distance sqrt(2)
        with pytest.raises(VerificationFailure) as info:
            verify_representation(c, wrong, num_random_states=0)
        assert info.value.deviation == pytest.approx(np.sqrt(2), abs=1e-12)
        # with random inputs the deviation is max |U psi - psi| over the same inputs
        states, _ = verification_inputs(16, 20, 0)
        expected = np.linalg.norm(inst.U.matrix @ states - states, axis=0).max()
        with pytest.raises(VerificationFailure) as info:
            verify_representation(c, wrong, 20, 0)
        assert info.value.deviation == pytest.approx(expected, abs=1e-12)
        assert expected > np.sqrt(2)


class TestDecoding:
    def test_quiescent_fixed_gives_encoded_output(self):
        inst = zoo.shift(4)
        c = assemble(inst.U, inst.graph)
        assert c.decoding.uncompute
        psi = np.random.default_rng(1).standard_normal(16) + 0j
        psi /= np.linalg.norm(psi)
        out = c.run(psi[:, None])[:, 0]
        np.testing.assert_allclose(out, c.encoding.apply(c.doubled, inst.U.matrix @ psi), atol=1e-12)
        assert all(np.array_equal(b.matrix, SWAP) for b in c.decoding.blocks)

    def test_product_leftover_is_uncomputed(self):
        inst = zoo.local_unitaries()
        c = assemble(inst.U, inst.graph)
        assert c.decoding.uncompute
        assert not all(np.array_equal(b.matrix, swap_matrix(b.layout.dims[0])) for b in c.decoding.blocks)
        verify_representation(c, inst.U)

    def test_entangled_leftover_kept(self):
        inst = zoo.partitioned_1d()
        phi = leftover_state(inst.U, inst.graph)
        assert product_factors(phi, inst.graph.dims, 1e-9) is None
        c = assemble(inst.U, inst.graph)
        assert not c.decoding.uncompute
        verify_representation(c, inst.U)

    def test_no_uncompute_flag(self):
        inst = zoo.local_unitaries()
        c = assemble(inst.U, inst.graph, uncompute=False)
        assert not c.decoding.uncompute
        verify_representation(c, inst.U)


@pytest.mark.parametrize("name", list(zoo.CAUSAL))
def test_zoo_invariants(name):
    inst = zoo.get(name)
    shape = inst.torus.shape if inst.torus else None
    c = assemble(inst.U, inst.graph, 1e-9, inst.schedule, shape)
    assert all(g.residual <= 1e-9 for g in c.gates)
    assert all(check_unitary(g.block, 1e-9)[0] for g in c.gates)
    assert check_commutation(c.gates) <= 1e-9
    for layer in c.layers:
        supports = [set(g.support) for g in layer]
        assert all(not (a & b) for i, a in enumerate(supports) for b in supports[i + 1 :])
    assert len(c.layers) <= depth_bound(inst.graph)
    assert c.depth == len(c.layers) + 2
    verify_representation(c, inst.U, 20, 0, 1e-8)


def test_shift_on_three_cells():
    spec = TorusSpec((3,))
    U = make_shift_qca(spec)
    g = zoo.shift(3).graph
    verify_representation(assemble(U, g), U, 20, 0, 1e-10)
