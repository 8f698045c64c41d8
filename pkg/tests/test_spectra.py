import json
import math

import numpy as np
import pytest

from clusterlab.errors import ArgumentError, CapacityError, ConvergenceError
from clusterlab.models import ChainSpec, build, interpolated
from clusterlab.pauli import OperatorSum
from clusterlab.spectra import (
    SpectrumResult,
    cluster_values,
    default_grid,
    degeneracy_count,
    diagonalize_dense,
    ground_subspace,
    lowest,
    lowest_eigenvalue,
    map_ordered,
    resolve_jobs,
    sweep_alpha,
)

import oracles as orc


def dense_oracle(op: OperatorSum) -> np.ndarray:
    """Dense matrix summed from kron-built Pauli strings."""
    n = op.n_sites
    m = np.zeros((2**n, 2**n), dtype=complex)
    for label, c in op.labelled().items():
        m += c * orc.pauli(label, n)
    return m


def random_hermitian(rng, n, terms=10):
    acc = {}
    for _ in range(terms):
        acc[(int(rng.integers(0, 2**n)), int(rng.integers(0, 2**n)))] = rng.normal()
    return OperatorSum(acc, n).real()


class TestClustering:
    def test_groups(self):
        got = cluster_values([-2.0, -2.0 + 1e-12, -1.0, 0.5, 0.5])
        assert [m for _, m in got] == [2, 1, 2]
        assert [v for v, _ in got] == pytest.approx([-2.0, -1.0, 0.5])

    def test_tolerance(self):
        assert len(cluster_values([0.0, 1e-3], tol=1e-2)) == 1
        assert cluster_values([]) == []

    def test_result_properties(self):
        r = SpectrumResult(np.array([1.0, -1.0, -1.0]), "dense")
        assert r.ground_energy == -1.0
        assert r.gap == pytest.approx(2.0)
        assert degeneracy_count(r) == 2
        assert math.isnan(SpectrumResult(np.array([0.0]), "dense").gap)
        d = json.loads(r.to_json())
        assert d["clusters"] == [[-1.0, 2], [1.0, 1]] and d["method"] == "dense"
        with pytest.raises(ArgumentError):
            r.ground_state()


class TestDense:
    """Block-split dense diagonalization against plain eigvalsh."""

    def test_random_operators(self):
        rng = np.random.default_rng(0)
        for n in (1, 3, 5, 6):
            h = random_hermitian(rng, n)
            ref = np.linalg.eigvalsh(dense_oracle(h))
            assert np.allclose(diagonalize_dense(h).eigenvalues, ref, atol=1e-10)
            assert np.allclose(diagonalize_dense(h, split=False).eigenvalues, ref, atol=1e-10)

    @pytest.mark.parametrize("spec", [
        ChainSpec(8), ChainSpec(8, "open", "CCZ"), ChainSpec(6, "closed", "CP", angles=(0.7,)),
        ChainSpec(6, "open", "BITFLIP", angles=tuple(np.linspace(0.2, 1.5, 6))),
    ], ids=lambda s: f"{s.model}-{s.boundary}")
    def test_model_spectra(self, spec):
        h = build(spec).hamiltonian
        ref = np.linalg.eigvalsh(dense_oracle(h))
        assert np.allclose(diagonalize_dense(h).eigenvalues, ref, atol=1e-10)

    def test_interpolated_vectors(self):
        h = interpolated(ChainSpec(8), 0.37)
        res = diagonalize_dense(h, k=5, vectors=True)
        m = dense_oracle(h)
        ref = np.linalg.eigvalsh(m)[:5]
        assert np.allclose(res.eigenvalues, ref, atol=1e-10)
        v = res.eigenvectors
        assert np.allclose(v.conj().T @ v, np.eye(5), atol=1e-10)
        assert np.allclose(m @ v, v * res.eigenvalues, atol=1e-9)
        assert res.residual_max < 1e-9

    def test_hadamard_frame_vectors(self):
        # CCZ blocks are found in the rotated frame; vectors must come back rotated
        h = build(ChainSpec(6, "closed", "CCZ")).hamiltonian
        res = diagonalize_dense(h, k=3, vectors=True)
        m = dense_oracle(h)
        assert np.allclose(m @ res.eigenvectors, res.eigenvectors * res.eigenvalues, atol=1e-9)

    def test_guards(self):
        with pytest.raises(CapacityError):
            diagonalize_dense(OperatorSum.identity(15))
        with pytest.raises(ArgumentError):
            diagonalize_dense(OperatorSum.from_label("X1", 2, 1j))

    def test_lowest_eigenvalue(self):
        assert lowest_eigenvalue(build(ChainSpec(6)).hamiltonian) == pytest.approx(-6)


class TestIterative:
    """Block Lanczos against the dense path."""

    def test_degenerate_open_zxz(self):
        h = build(ChainSpec(8, "open")).hamiltonian
        res = ground_subspace(h, k=6, seed=3)
        assert res.method == "iterative"
        assert np.allclose(res.eigenvalues[:4], -6, atol=1e-9)
        assert degeneracy_count(res) == 4
        assert res.gap == pytest.approx(2.0, abs=1e-8)

    def test_matches_dense_interpolated(self):
        h = interpolated(ChainSpec(10, "closed", "CCZ"), 0.45)
        it = ground_subspace(h, k=4, seed=1)
        de = diagonalize_dense(h, k=4)
        assert np.allclose(it.eigenvalues, de.eigenvalues, atol=1e-8)
        assert it.residual_max < 1e-8

    def test_complex_hamiltonian(self):
        h = build(ChainSpec(8, "closed", "CP", angles=(0.9,))).hamiltonian
        assert any("Y" in label for label in h.labelled())  # complex matrix elements
        it = ground_subspace(h, k=3, seed=2)
        assert np.allclose(it.eigenvalues, diagonalize_dense(h, k=3).eigenvalues, atol=1e-8)

    def test_seed_reproducible(self):
        h = interpolated(ChainSpec(8), 0.3)
        a, b = ground_subspace(h, k=2, seed=9), ground_subspace(h, k=2, seed=9)
        assert np.array_equal(a.eigenvalues, b.eigenvalues)
        assert a.seed == 9

    def test_convergence_error(self):
        h = interpolated(ChainSpec(12), 0.5)
        with pytest.raises(ConvergenceError) as info:
            ground_subspace(h, k=2, tol=1e-14, max_iterations=2, krylov_dim=6)
        assert info.value.best_residual > 0

    def test_argument_errors(self):
        h = build(ChainSpec(4)).hamiltonian
        with pytest.raises(ArgumentError):
            ground_subspace(h, k=0)
        with pytest.raises(ArgumentError):
            lowest(h, 2, method="magic")

    def test_lowest_dispatch(self):
        h = build(ChainSpec(6)).hamiltonian
        assert lowest(h, 2).method == "dense"
        assert lowest(h, 2, method="iterative").method == "iterative"


class TestSweep:
    """Parameter sweeps and their tabular output."""

    def test_small_sweep(self):
        spec = ChainSpec(6)
        table = sweep_alpha(spec, [0.0, 0.5, 1.0], m=3)
        assert table.header() == ["alpha", "e0", "e1", "e2", "gap", "string_order"]
        assert table.string_pair == (1, 3)
        so = table.column("string_order")
        assert so[-1] == pytest.approx(1.0, abs=1e-10)
        assert table.column("e0")[0] == pytest.approx(-6.0)
        assert table.column("e0")[-1] == pytest.approx(-6.0)
        lines = table.to_csv().splitlines()
        assert lines[0] == "alpha,e0,e1,e2,gap,string_order" and len(lines) == 4

    def test_spectrum_symmetric_about_half(self):
        spec = ChainSpec(6)
        grid = [0.1, 0.3, 0.7, 0.9]
        t = sweep_alpha(spec, grid, m=4)
        e = np.array([r.energies for r in t.rows])
        assert np.allclose(e[0], e[3], atol=1e-10) and np.allclose(e[1], e[2], atol=1e-10)

    def test_jobs_do_not_change_rows(self):
        spec = ChainSpec(6, "closed", "CCZ")
        grid = default_grid(5)
        a = sweep_alpha(spec, grid, jobs=1)
        b = sweep_alpha(spec, grid, jobs=3)
        assert a.to_csv() == b.to_csv()

    def test_failed_row_is_recorded(self):
        t = sweep_alpha(ChainSpec(6), [0.5], method="bogus")
        assert t.rows[0].error and math.isnan(t.rows[0].gap)

    def test_grid_and_jobs(self, monkeypatch):
        assert default_grid(3) == [0.0, 0.5, 1.0]
        with pytest.raises(ArgumentError):
            sweep_alpha(ChainSpec(4), [])
        monkeypatch.setenv("CLUSTERLAB_JOBS", "3")
        assert resolve_jobs(None) == 3
        assert resolve_jobs(0) == 1
        monkeypatch.delenv("CLUSTERLAB_JOBS")
        assert resolve_jobs(None) >= 1
        assert map_ordered(lambda x: x * x, [3, 1, 2], jobs=2) == [9, 1, 4]
