import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalcircuit import zoo
from causalcircuit.causality import (
    check_causal_heisenberg,
    check_causal_state_sampled,
    check_inverse_causal,
    heisenberg_image,
    node_heisenberg_residual,
    sampled_witness,
)
from causalcircuit.errors import NonUnitaryError
from causalcircuit.graph import QuantumLabeledGraph, compose, neighborhood
from causalcircuit.qca import TorusSpec, make_partitioned_qca, make_shift_qca, make_torus_graph, translation_matrix
from causalcircuit.tensor import (
    DenseOperator,
    SpaceLayout,
    embed,
    is_localized,
    node_support,
    partial_trace,
    random_unitary_matrix,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)


def qubits(n):
    return SpaceLayout.from_dims([2] * n)


def ring(n, step, dim=2):
    return QuantumLabeledGraph.uniform(n, dim, {(x, (x + step) % n) for x in range(n)})


def rotate_bits_matrix(n):
    """Independent construction of ``c'_x = c_{x-1}`` from bit strings."""
    U = np.zeros((2**n, 2**n), dtype=complex)
    for bits in itertools.product((0, 1), repeat=n):
        out = tuple(bits[(x - 1) % n] for x in range(n))
        U[int("".join(map(str, out)), 2), int("".join(map(str, bits)), 2)] = 1
    return U


class TestHeisenbergImage:
    def test_identity(self):
        A = DenseOperator(qubits(2), random_unitary_matrix(4, 0))
        assert heisenberg_image(DenseOperator(qubits(2), np.eye(4)), A) == A

    def test_pauli_anticommutation(self):
        out = heisenberg_image(DenseOperator(qubits(1), X), DenseOperator(qubits(1), Z))
        np.testing.assert_array_equal(out.matrix, -Z)

    def test_shift_moves_observable(self):
        U = rotate_bits_matrix(3)
        np.testing.assert_array_equal(make_shift_qca(TorusSpec((3,))).matrix, U)
        Z1 = np.kron(np.kron(np.eye(2), Z), np.eye(2))
        Z0 = np.kron(Z, np.eye(4))
        out = heisenberg_image(DenseOperator(qubits(3), U), DenseOperator(qubits(3), Z1))
        np.testing.assert_array_equal(out.matrix, U.conj().T @ Z1 @ U)
        np.testing.assert_array_equal(out.matrix, Z0)


class TestHeisenbergCertificate:
    def test_local_unitaries(self):
        inst = zoo.local_unitaries()
        assert check_causal_heisenberg(inst.U, inst.graph).overall

    def test_shift_orientation(self):
        U = make_shift_qca(TorusSpec((4,)))
        assert check_causal_heisenberg(U, ring(4, -1)).overall
        report = check_causal_heisenberg(U, ring(4, 1))
        assert not report.overall
        assert report.failing_nodes == [0, 1, 2, 3]

    def test_distant_swap_witness_at_node_0(self):
        inst = zoo.distant_swap()
        report = check_causal_heisenberg(inst.U, inst.graph)
        assert not report.overall
        assert 0 in report.failing_nodes
        # the image of X at node 0 is X at node 2, outside N_0 = {0, 1}
        X0 = embed(X, node_support([0]), inst.U.layout)
        image = heisenberg_image(inst.U, X0)
        np.testing.assert_array_equal(image.matrix, embed(X, node_support([2]), inst.U.layout).matrix)
        assert not is_localized(image, node_support(neighborhood(inst.graph, 0)))[0]

    def test_non_unitary_rejected(self):
        g = ring(2, 0)
        m = np.eye(4)
        m[0, 0] = 0.5
        with pytest.raises(NonUnitaryError):
            check_causal_heisenberg(DenseOperator(qubits(2), m), g)
        report = check_causal_heisenberg(DenseOperator(qubits(2), m), g, diagnostic=True)
        assert not report.overall and not report.certified_unitary
        assert report.unitarity_residual == 0.75

    def test_witness_recomputes(self):
        inst = zoo.one_sided_cnot()
        report = check_causal_heisenberg(inst.U, inst.graph)
        for v in report.per_node:
            if v.passed:
                continue
            d = inst.graph.nodes[v.node].dim
            i, j = divmod(v.witness, d)
            E = np.zeros((d, d))
            E[i, j] = 1
            image = heisenberg_image(inst.U, embed(E, node_support([v.node]), inst.U.layout))
            _, residual = is_localized(image, node_support(neighborhood(inst.graph, v.node)))
            assert residual == pytest.approx(v.residual, abs=1e-14)
            assert node_heisenberg_residual(inst.U.matrix, inst.graph, v.node) == (v.residual, v.witness)


class TestStateSampled:
    def test_identity(self):
        inst = zoo.identity()
        assert check_causal_state_sampled(inst.U, inst.graph).overall

    def test_distant_swap_counterexample(self):
        inst = zoo.distant_swap()
        report = check_causal_state_sampled(inst.U, inst.graph, samples=5, seed=3)
        assert not report.overall
        for v in report.per_node:
            if not v.passed:
                rho, rho_p, residual = sampled_witness(inst.U, inst.graph, v.node, v.witness, 3)
                assert residual == v.residual
                # both states agree on N_x ...
                keep = node_support(neighborhood(inst.graph, v.node))
                a = partial_trace(DenseOperator(rho.layout, rho.matrix), keep).matrix
                b = partial_trace(DenseOperator(rho.layout, rho_p.matrix), keep).matrix
                np.testing.assert_allclose(a, b, atol=1e-12)

    def test_order_independent(self):
        inst = zoo.shift(3)
        a = check_causal_state_sampled(inst.U, inst.graph, samples=4, seed=1)
        b = check_causal_state_sampled(inst.U, inst.graph, samples=4, seed=1)
        assert a == b

    @pytest.mark.parametrize("name", list(zoo.CAUSAL))
    def test_agrees_with_heisenberg_on_causal_zoo(self, name):
        inst = zoo.get(name)
        assert check_causal_heisenberg(inst.U, inst.graph).overall
        assert check_causal_state_sampled(inst.U, inst.graph).overall

    @pytest.mark.parametrize("name", list(zoo.NON_CAUSAL))
    def test_agrees_with_heisenberg_on_controls(self, name):
        inst = zoo.get(name)
        h = check_causal_heisenberg(inst.U, inst.graph)
        s = check_causal_state_sampled(inst.U, inst.graph)
        assert not h.overall and not s.overall
        # a sampled failure is a sound counterexample, so it must be a Heisenberg failure too
        assert set(s.failing_nodes) <= set(h.failing_nodes)


class TestInverse:
    def test_identity(self):
        inst = zoo.identity()
        assert check_inverse_causal(inst.U, inst.graph).overall

    def test_shift(self):
        U = make_shift_qca(TorusSpec((4,)))
        left = translation_matrix(TorusSpec((4,)), 0, -1)
        np.testing.assert_array_equal(U.adjoint().matrix, left)
        assert check_inverse_causal(U, ring(4, -1)).overall
        assert check_causal_heisenberg(U.adjoint(), ring(4, 1)).overall

    @pytest.mark.parametrize("name", list(zoo.CAUSAL))
    def test_zoo(self, name):
        inst = zoo.get(name)
        assert check_inverse_causal(inst.U, inst.graph).overall


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([4, 6]), st.integers(1, 3), st.integers(0, 10_000))
def test_random_partitioned_circuits_inverse_causal(L, stages, seed):
    spec = TorusSpec((L,))
    offsets = [(k % 2,) for k in range(stages)]
    U, g = make_partitioned_qca(spec, random_unitary_matrix(4, seed), offsets)
    assert check_causal_heisenberg(U, g).overall
    assert check_inverse_causal(U, g).overall


def test_composition_two_step_graph():
    spec = TorusSpec((4,))
    g = make_torus_graph(spec)
    U = DenseOperator(spec.layout, translation_matrix(spec, 0, -1))
    V = zoo.qca_1d().U
    assert check_causal_heisenberg(U, g).overall and check_causal_heisenberg(V, g).overall
    UV = U @ V
    assert check_causal_heisenberg(UV, compose(g, g)).overall
    assert not check_causal_heisenberg(UV, g).overall


def test_composition_partitioned_stages():
    spec = TorusSpec((6,))
    U, gu = make_partitioned_qca(spec, random_unitary_matrix(4, 1), [(0,)])
    V, gv = make_partitioned_qca(spec, random_unitary_matrix(4, 2), [(1,)])
    # U @ V applies V first: images spread through U's blocks, then V's
    assert check_causal_heisenberg(U @ V, compose(gu, gv)).overall
