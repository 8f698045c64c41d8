"""clusterlab: stabilizer models of (higher-order) cluster chains by exact gate conjugation."""

from .circuits import Gate, StateVector, apply_gate, cluster_state, fidelity, gate_to_matrix, verify_decomposition
from .errors import ArgumentError, CapacityError, ClusterLabError, ConvergenceError, DimensionError, StructureError
from .models import ChainSpec, ModelBundle, build, frustration_check, interpolated, ising_nnn
from .pauli import OperatorSum, PauliString, commutes, opsum_apply, opsum_combine, opsum_mul, opsum_to_matrix
from .phasepoly import PhasePolynomial, conjugate_x, delta, exp_to_opsum, from_gate
from .spectra import SpectrumResult, SweepTable, degeneracy_count, diagonalize_dense, ground_subspace, sweep_alpha

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "CapacityError", "ChainSpec", "ClusterLabError", "ConvergenceError",
    "DimensionError", "Gate", "ModelBundle", "OperatorSum", "PauliString", "PhasePolynomial",
    "SpectrumResult", "StateVector", "StructureError", "SweepTable", "apply_gate", "build",
    "cluster_state", "commutes", "conjugate_x", "degeneracy_count", "delta", "diagonalize_dense",
    "exp_to_opsum", "fidelity", "from_gate", "frustration_check", "gate_to_matrix",
    "ground_subspace", "interpolated", "ising_nnn", "opsum_apply", "opsum_combine", "opsum_mul",
    "opsum_to_matrix", "sweep_alpha", "verify_decomposition",
]
