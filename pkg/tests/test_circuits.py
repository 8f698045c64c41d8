import numpy as np
import pytest

from clusterlab.circuits import (
    Gate,
    StateVector,
    apply_circuit,
    apply_gate,
    circuit_to_matrix,
    cluster_state,
    cp_ising_decomposition,
    cp_ising_decomposition_flipped,
    cr_to_ising,
    fidelity,
    gate_polynomial,
    gate_to_matrix,
    ms_to_ising,
    phase_aligned_residual,
    verify_decomposition,
    xzx_cx_route,
)
from clusterlab.errors import ArgumentError, CapacityError, DimensionError
from clusterlab.models import ChainSpec

import oracles as orc


CATALOG = [
    Gate("H", (2,)), Gate("X", (1,)), Gate("Y", (3,)), Gate("Z", (2,)),
    Gate("RX", (1,), 0.41), Gate("RZ", (3,), -1.3), Gate("ZZ", (3, 1), 0.77),
    Gate("CR", (1, 3), 0.9), Gate("CR", (3, 2), -0.5), Gate("MS", (2, 3), 1.7),
    Gate("CX", (1, 2)), Gate("CX", (3, 1)), Gate("CZ", (1, 3)), Gate("CP", (2, 1), 0.6),
    Gate("CCZ", (1, 2, 3)), Gate("CNZ", (1, 2, 3, 4)), Gate("CNP", (2, 4), 1.1),
]


class TestGates:
    """Embedded gate matrices against kron/expm references."""

    @pytest.mark.parametrize("g", CATALOG, ids=repr)
    def test_catalog_against_dense(self, g):
        assert np.allclose(gate_to_matrix(g, 4), orc.dense_gate(g, 4), atol=1e-12)

    @pytest.mark.parametrize("g", CATALOG, ids=repr)
    def test_unitary(self, g):
        u = g.local_matrix()
        assert np.allclose(u @ u.conj().T, np.eye(len(u)), atol=1e-12)

    def test_cnot_textbook(self):
        assert np.allclose(Gate("CX", (1, 2)).local_matrix(),
                           [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])

    def test_validation(self):
        with pytest.raises(ArgumentError):
            Gate("FOO", (1,))
        with pytest.raises(ArgumentError):
            Gate("CZ", (1, 1))
        with pytest.raises(ArgumentError):
            Gate("CCZ", (1, 2))
        with pytest.raises(ArgumentError):
            Gate("RX", (1,))
        with pytest.raises(ArgumentError):
            apply_gate(StateVector.basis(2), Gate("CZ", (1, 3)))

    def test_orders_and_diagonal_flag(self):
        assert Gate("CNZ", (1, 2, 3, 4)).order == 3
        assert Gate("ZZ", (1, 2), 0.1).is_diagonal()
        assert not Gate("CR", (1, 2), 0.1).is_diagonal()

    def test_diagonal_polynomials(self):
        for g in CATALOG:
            if g.is_diagonal():
                assert np.allclose(np.diag(gate_polynomial(g, 4).diagonal()), orc.dense_gate(g, 4), atol=1e-12)
        with pytest.raises(ArgumentError):
            gate_polynomial(Gate("H", (1,)), 2)


class TestStateVector:
    """Statevector bookkeeping and circuit application."""

    def test_basis_and_plus(self):
        v = StateVector.basis(3, 5)
        assert v.amplitudes[5] == 1 and v.bitstring(5) == "101"
        assert np.allclose(StateVector.plus(4).amplitudes, orc.plus_state(4))

    def test_dimension_check(self):
        with pytest.raises(DimensionError):
            StateVector(np.ones(3), 2)

    def test_h_then_cz_is_bell_like(self):
        v = apply_circuit(StateVector.basis(2), [Gate("H", (1,)), Gate("H", (2,)), Gate("CZ", (1, 2))])
        assert np.allclose(v.amplitudes, [0.5, 0.5, 0.5, -0.5])

    def test_x_flips_site_one(self):
        v = apply_gate(StateVector.basis(3), Gate("X", (1,)))
        assert v.amplitudes[1] == 1

    def test_random_circuit_against_dense(self):
        rng = np.random.default_rng(0)
        n = 5
        gates = [CATALOG[i] for i in rng.integers(0, len(CATALOG), 30)]
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        ref = psi.copy()
        for g in gates:
            ref = orc.dense_gate(g, n) @ ref
        out = apply_circuit(StateVector(psi, n), gates)
        assert np.allclose(out.amplitudes, ref, atol=1e-12)
        assert np.allclose(circuit_to_matrix(gates, n) @ psi, ref, atol=1e-12)
        assert out.norm() == pytest.approx(1.0)

    def test_fidelity(self):
        a, b = StateVector.basis(2, 0), StateVector.plus(2)
        assert fidelity(a, b) == pytest.approx(0.5)
        with pytest.raises(DimensionError):
            fidelity(a, StateVector.basis(3))

    def test_capacity(self):
        with pytest.raises(CapacityError):
            circuit_to_matrix([], 15)


class TestDecompositions:
    """Two-qubit identities checked up to global phase."""

    def test_phase_aligned_residual(self):
        a = np.array([[1, 0], [0, 1j]])
        assert phase_aligned_residual(a, np.exp(0.7j) * a) < 1e-14
        assert phase_aligned_residual(a, np.eye(2)) > 0.5

    def test_cp_ising_product(self):
        rng = np.random.default_rng(1)
        for phi in rng.uniform(-np.pi, np.pi, 10):
            assert verify_decomposition(Gate("CP", (1, 2), phi), cp_ising_decomposition(phi)) < 1e-12

    def test_cp_against_explicit_exponentials(self):
        phi = 1.234
        z1, z2 = orc.pauli("Z1", 2), orc.pauli("Z2", 2)
        ref = (np.exp(1j * phi / 4) * orc.expm(-1j * phi / 4 * z1) @ orc.expm(-1j * phi / 4 * z2)
               @ orc.expm(1j * phi / 4 * z1 @ z2))
        assert np.allclose(ref, orc.controlled_phase(2, (1, 2), np.exp(1j * phi)), atol=1e-12)

    def test_flipped_sign_gives_inverse(self):
        phi = 0.83
        circ = cp_ising_decomposition_flipped(phi)
        assert verify_decomposition(Gate("CP", (1, 2), -phi), circ) < 1e-12
        assert verify_decomposition(Gate("CP", (1, 2), phi), circ) > 0.1

    def test_cr_and_ms(self):
        rng = np.random.default_rng(2)
        for phi in rng.uniform(-np.pi, np.pi, 10):
            zz = Gate("ZZ", (1, 2), phi)
            assert verify_decomposition(zz, cr_to_ising(phi)) < 1e-12
            assert verify_decomposition(zz, ms_to_ising(phi)) < 1e-12

    def test_cr_reversed_control(self):
        assert verify_decomposition(Gate("ZZ", (2, 1), 0.4), cr_to_ising(0.4, control=2, target=1)) < 1e-12


class TestClusterStates:
    """Reference cluster states against the stabilizer oracle."""

    @pytest.mark.parametrize("closed", [True, False])
    def test_zxz_state_is_cz_on_plus(self, closed):
        n = 6
        spec = ChainSpec(n, "closed" if closed else "open", "ZXZ")
        ref = orc.cz_chain(n, closed) @ orc.plus_state(n)
        assert orc.phase_free_distance(cluster_state(spec).amplitudes, ref) < 1e-12

    def test_ccz_state(self):
        n = 6
        ref = orc.ccz_chain(n, True) @ orc.plus_state(n)
        got = cluster_state(ChainSpec(n, "closed", "CCZ")).amplitudes
        assert orc.phase_free_distance(got, ref) < 1e-12

    @pytest.mark.parametrize("n", [4, 6, 8])
    @pytest.mark.parametrize("boundary", ["closed", "open"])
    def test_xzx_routes_agree(self, n, boundary):
        had = cluster_state(ChainSpec(n, boundary, "XZX"))
        assert fidelity(had, xzx_cx_route(n, boundary)) >= 1 - 1e-12

    def test_xzx_route_validation(self):
        with pytest.raises(ArgumentError):
            xzx_cx_route(5)
