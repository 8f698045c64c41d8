import math

import numpy as np
import pytest

from clusterlab.circuits import StateVector, phase_aligned_residual
from clusterlab.errors import ArgumentError, StructureError
from clusterlab.models import ChainSpec, build, ising_nnn
from clusterlab.pauli import OperatorSum, opsum_mul, opsum_to_matrix
from clusterlab.spectra import diagonalize_dense
from clusterlab.symmetry import (
    anomaly_check,
    ccz_eta_naive,
    commutator_norm,
    conjugation_sign,
    duality_residual,
    edge_logicals,
    edge_representation,
    edge_symmetry_action,
    eta_generators,
    intertwine_check,
    is_pauli_string,
    kt_check,
    kt_operator,
    mapped_pair,
    noninvertible_D,
    projective_phase,
    sector_projector,
    string_order,
    string_order_vector,
    symmetric_projector,
    translation_matrix,
)

import oracles as orc
from catalog import model_specs, spec_id

DUALITY_MODELS = ("ZXZ", "XZX", "ZZZ_XXX", "BITFLIP", "PHASEFLIP")


def duality_spec(model: str, n: int) -> ChainSpec:
    angles = tuple(np.linspace(0.3, 2.1, n)) if model in ("BITFLIP", "PHASEFLIP") else None
    return ChainSpec(n, "closed", model, angles=angles)


def d_oracle(n: int) -> np.ndarray:
    """Kramers-Wannier-like operator of the ZXZ chain from expm factors."""
    def half(first, last):
        u = np.eye(2**n, dtype=complex)
        for j in range(first, last - 1, 2):
            dj = orc.expm(-0.25j * math.pi * orc.pauli(f"Z{j} Z{j + 2}", n)) @ orc.expm(
                -0.25j * math.pi * orc.pauli(f"X{j}", n))
            u = dj @ u
        u = orc.expm(-0.25j * math.pi * orc.pauli(f"X{last}", n)) @ u
        xs = orc.pauli(" ".join(f"X{k}" for k in range(first, n + 1, 2)), n)
        return (np.eye(2**n) + xs) / 2 @ u

    t = np.zeros((2**n, 2**n))
    for x in range(2**n):
        y = ((x << 1) & (2**n - 1)) | (x >> (n - 1))
        t[y, x] = 1
    return t @ half(2, n) @ half(1, n - 1)


class TestEta:
    """Z2 x Z2 generators."""

    def test_zxz_generators_are_x_strings(self):
        e, o = eta_generators(ChainSpec(6))
        assert e.opsum.labelled() == {"X2 X4 X6": 1}
        assert o.opsum.labelled() == {"X1 X3 X5": 1}

    @pytest.mark.parametrize("spec", model_specs(6, "closed") + model_specs(6, "open"), ids=spec_id)
    def test_commute_with_hamiltonian(self, spec):
        h = opsum_to_matrix(build(spec).hamiltonian)
        for s in eta_generators(spec):
            m = s.dense()
            assert commutator_norm(m, h) < 1e-10
            assert np.allclose(m @ m, np.eye(len(m)), atol=1e-10)

    def test_ccz_generator_is_not_a_pauli_string(self):
        e, _ = eta_generators(ChainSpec(6, "closed", "CCZ"))
        assert not is_pauli_string(e.opsum)

    def test_naive_ccz_candidate_fails(self):
        spec = ChainSpec(6, "closed", "CCZ")
        h = build(spec).hamiltonian
        assert commutator_norm(ccz_eta_naive(spec), h) == pytest.approx(2.0)

    def test_closed_ground_state_in_symmetric_sector(self):
        spec = ChainSpec(6)
        g = build(spec).reference_state.amplitudes
        p = symmetric_projector(spec)
        assert np.allclose(p @ g, g)
        e, _ = eta_generators(spec)
        assert np.allclose(sector_projector(e, -1) @ g, 0)


class TestDuality:
    """Entangling layer exchanges the two ends of the interpolation."""

    @pytest.mark.parametrize("model", ["ZXZ", "CCZ"])
    @pytest.mark.parametrize("alpha", [0.0, 0.2, 0.5, 0.8, 1.0])
    def test_residual(self, model, alpha):
        assert duality_residual(ChainSpec(8, "closed", model), alpha) < 1e-12

    def test_cz_dense_oracle(self):
        n = 6
        u = orc.cz_chain(n, True)
        hx = -sum(orc.pauli(f"X{j}", n) for j in range(1, n + 1))
        hz = -sum(orc.pauli(f"Z{(j - 2) % n + 1} X{j} Z{j % n + 1}", n) for j in range(1, n + 1))
        assert np.allclose(u @ hx @ u.conj().T, hz)


class TestNonInvertible:
    """Duality operator D on closed chains."""

    def test_translation(self):
        n = 5
        t = translation_matrix(n)
        for j in range(1, n + 1):
            assert np.allclose(t @ orc.pauli(f"X{j}", n) @ t.T, orc.pauli(f"X{j % n + 1}", n))

    @pytest.mark.parametrize("n", [4, 6])
    def test_matches_oracle(self, n):
        assert phase_aligned_residual(noninvertible_D(ChainSpec(n)).dense(), d_oracle(n)) < 1e-12

    @pytest.mark.parametrize("model", DUALITY_MODELS)
    @pytest.mark.parametrize("n", [4, 6])
    def test_intertwines(self, model, n):
        spec = duality_spec(model, n)
        d = noninvertible_D(spec)
        h = build(spec).hamiltonian
        assert intertwine_check(d, h, h) < 1e-10
        for j in range(1, n + 1):
            assert intertwine_check(d, *mapped_pair(spec, j)) < 1e-10
        assert np.linalg.svd(d.dense(), compute_uv=False).min() < 1e-10

    def test_dagger_d_is_sector_projector(self):
        spec = ChainSpec(6)
        d = noninvertible_D(spec).dense()
        e, o = eta_generators(spec)
        p = sector_projector(e) @ sector_projector(o)
        assert np.allclose(d.conj().T @ d, p, atol=1e-12)
        assert np.allclose(e.dense() @ d, d, atol=1e-12)

    def test_open_chain_rejected(self):
        with pytest.raises(ArgumentError):
            noninvertible_D(ChainSpec(6, "open"))


class TestKT:
    """Kennedy-Tasaki map to the next-nearest-neighbour Ising chain."""

    @pytest.mark.parametrize("model", DUALITY_MODELS)
    @pytest.mark.parametrize("n", [4, 6])
    def test_intertwines(self, model, n):
        assert kt_check(duality_spec(model, n)).max_residual < 1e-10

    def test_hamiltonian_image(self):
        spec = ChainSpec(6)
        kt = kt_operator(spec)
        # built from the projector-carrying halves of D, so KT is not unitary on a ring
        assert np.linalg.norm(kt.dense()) > 1
        h = build(spec).hamiltonian
        assert intertwine_check(kt, h, ising_nnn(spec).scale(-1)) < 1e-10


class TestStringOrder:
    """Products of consecutive stabilizers."""

    @pytest.mark.parametrize("spec", model_specs(8, "closed") + model_specs(8, "open"), ids=spec_id)
    def test_unity_on_reference(self, spec):
        b = build(spec)
        if len(b.sites) < 2:
            pytest.skip("no pair")
        g = b.reference_state.amplitudes
        assert string_order_vector(g, b, b.sites[0], b.sites[-1]) == pytest.approx(1.0, abs=1e-10)

    def test_zero_on_plus_state(self):
        spec = ChainSpec(8)
        assert string_order(StateVector.plus(8), spec, 2, 6) == pytest.approx(0.0, abs=1e-10)

    def test_dense_oracle(self):
        # K_2 K_3 K_4 = Z1 Y2 X3 Y4 Z5 up to sign; random state expectation must agree
        rng = np.random.default_rng(0)
        n = 6
        v = rng.normal(size=64) + 1j * rng.normal(size=64)
        v /= np.linalg.norm(v)
        ks = [orc.pauli(f"Z{j - 1} X{j} Z{j + 1}", n) for j in (2, 3, 4)]
        ref = np.vdot(v, ks[0] @ ks[1] @ ks[2] @ v)
        got = string_order_vector(v, build(ChainSpec(n)), 2, 4, return_complex=True)
        assert got == pytest.approx(ref, abs=1e-12)

    def test_bad_ranges(self):
        b = build(ChainSpec(6, "open"))
        with pytest.raises(IndexError):
            string_order_vector(b.reference_state.amplitudes, b, 4, 3)
        with pytest.raises(IndexError):
            string_order_vector(b.reference_state.amplitudes, b, 1, 3)


class TestEdges:
    """Edge logicals, symmetry action and projective phases."""

    def test_zxz_logical_labels(self):
        lg = edge_logicals(ChainSpec(6, "open"))
        assert lg.get("left", "X").labelled() == {"X1 Z2": 1}
        assert lg.get("left", "Z").labelled() == {"Z1": 1}
        assert lg.get("right", "X").labelled() == {"Z5 X6": 1}
        assert lg.get("right", "Z").labelled() == {"Z6": 1}
        assert len(lg.all()) == 6

    @pytest.mark.parametrize("spec", [s for s in model_specs(8, "open") if s.model != "X"], ids=spec_id)
    def test_logicals_commute_with_hamiltonian(self, spec):
        lg = edge_logicals(spec)
        h = opsum_to_matrix(build(spec).hamiltonian)
        assert len(lg.left) == spec.N
        for _, _, letter, op in lg.all():
            assert commutator_norm(op, h) < 1e-10
        for side in (lg.left, lg.right):
            for t in side:
                assert opsum_mul(t["X"], t["Y"]).allclose(t["Z"].scale(1j))

    def test_ground_manifold_dimension(self):
        for spec in (ChainSpec(6, "open"), ChainSpec(8, "open", "CCZ")):
            res = diagonalize_dense(build(spec).hamiltonian, k=2 ** (2 * spec.N) + 1)
            assert res.degeneracy_clusters[0][1] == 4 ** spec.N

    def test_sign_table(self):
        table = edge_symmetry_action(ChainSpec(6, "open"))
        want = {
            ("even", "X_left"): -1, ("even", "Z_left"): 1, ("even", "X_right"): 1, ("even", "Z_right"): -1,
            ("odd", "X_left"): 1, ("odd", "Z_left"): -1, ("odd", "X_right"): -1, ("odd", "Z_right"): 1,
        }
        for key, sign in want.items():
            assert table[key] == sign, key

    def test_projective_phases(self):
        rep = edge_representation(ChainSpec(6, "open"))
        for edge in ("left", "right"):
            assert projective_phase(rep[edge, "odd"], rep[edge, "even"]) == -1
        assert projective_phase(rep["left", "odd"], rep["right", "even"]) == 1
        assert projective_phase(rep["left", "even"], rep["right", "odd"]) == 1

    def test_anomaly(self):
        rep = anomaly_check(ChainSpec(6, "open"))
        assert rep.nontrivial
        assert rep.norms["X1_left@eta"] == pytest.approx(2.0)
        assert rep.norms["Z1_left@eta_even"] == pytest.approx(0.0)

    def test_structure_errors(self):
        a = OperatorSum.from_terms([("X1", 1.0), ("Z1", 1.0)], 1)
        with pytest.raises(StructureError):
            projective_phase(a, OperatorSum.from_label("X1", 1))
        with pytest.raises(StructureError):
            conjugation_sign(OperatorSum.from_label("X1", 1), a)

    def test_requires_open_drop(self):
        with pytest.raises(ArgumentError):
            edge_logicals(ChainSpec(6))
        with pytest.raises(ArgumentError):
            edge_logicals(ChainSpec(6, "open", edge_terms="include"))
        with pytest.raises(ArgumentError):
            edge_representation(ChainSpec(8, "open", "CCZ"))
