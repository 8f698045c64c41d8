"""Symmetry structures of the cluster-model family.

Model variants are obtained from the ZXZ chain through ``V = W (CZ layer)^dagger``
where ``W`` is the model's generating circuit: ``K_j = V K_j^ZXZ V^dagger``, and
every symmetry object (Z2 x Z2 generators, duality operator, KT map) is
transported the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import Gate, StateVector, circuit_to_matrix, phase_aligned_residual
from .errors import ArgumentError, CapacityError, DimensionError, StructureError
from .models import (
    ChainSpec,
    ModelBundle,
    build,
    cz_polynomial,
    dress,
    entangling_polynomial,
    generating_circuit,
    interpolated,
    pauli_product,
    undress_cz,
)
from .pauli import (
    DENSE_LIMIT,
    OperatorSum,
    PauliString,
    opsum_apply,
    opsum_mul,
    opsum_to_matrix,
)
from .phasepoly import conjugate_diagonal

_PHASE_TOL = 1e-10


@dataclass
class SymmetryOperator:
    """A symmetry given either as a Pauli sum or as a dense matrix."""

    label: str
    n_sites: int
    opsum: OperatorSum | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def dense(self) -> np.ndarray:
        if self.matrix is None:
            self.matrix = opsum_to_matrix(self.opsum)
        return self.matrix


def _as_matrix(a) -> np.ndarray:
    if isinstance(a, SymmetryOperator):
        return a.dense()
    if isinstance(a, OperatorSum):
        return opsum_to_matrix(a)
    return np.asarray(a)


def _check_dense(n: int) -> None:
    if n > DENSE_LIMIT:
        raise CapacityError(f"{n} sites exceeds dense limit {DENSE_LIMIT}")


def _x_string(sites: Sequence[int], n: int) -> OperatorSum:
    mask = sum(1 << (s - 1) for s in sites)
    return OperatorSum({(mask, 0): 1.0}, n)


# ---------------------------------------------------------------- Z2 x Z2

def eta_generators(spec: ChainSpec) -> tuple[SymmetryOperator, SymmetryOperator]:
    """``(eta_even, eta_odd) = V (prod X) V^dagger`` over each sublattice."""
    n = spec.n_sites
    even, odd = _x_string(range(2, n + 1, 2), n), _x_string(range(1, n + 1, 2), n)
    if spec.model == "X":
        pair = (even, odd)
    else:
        pair = (undress_cz(spec, even), undress_cz(spec, odd))
    return (SymmetryOperator("eta_even", n, pair[0]), SymmetryOperator("eta_odd", n, pair[1]))


def ccz_eta_naive(spec: ChainSpec) -> SymmetryOperator:
    """``prod_{j even} CZ_{j,j+2} prod_{j even} X_j`` (a candidate that fails to commute with H_CCZ)."""
    n = spec.n_sites
    from .phasepoly import PhasePolynomial

    poly = PhasePolynomial(n, {tuple(sorted((j, (j + 1) % n + 1))): math.pi for j in range(2, n + 1, 2)})
    cz = np.exp(1j * poly.phases())
    x = opsum_to_matrix(_x_string(range(2, n + 1, 2), n))
    return SymmetryOperator("eta_even_naive", n, matrix=cz[:, None] * x)


def commutator_norm(a, h) -> float:
    """``||A H - H A||_max`` on dense forms."""
    am, hm = _as_matrix(a), _as_matrix(h)
    if am.shape != hm.shape:
        raise DimensionError(f"shapes {am.shape} and {hm.shape} differ")
    return float(np.max(np.abs(am @ hm - hm @ am)))


def symmetric_projector(spec: ChainSpec) -> np.ndarray:
    """``P = (1 + eta_even eta_odd) / 2``."""
    _check_dense(spec.n_sites)
    e, o = eta_generators(spec)
    eta = e.dense() @ o.dense()
    return (np.eye(eta.shape[0]) + eta) / 2


def sector_projector(eta: SymmetryOperator, sign: int = 1) -> np.ndarray:
    m = eta.dense()
    return (np.eye(m.shape[0]) + sign * m) / 2


def project_hamiltonian(h, p: np.ndarray) -> np.ndarray:
    hm = _as_matrix(h)
    return p @ hm @ p


# ---------------------------------------------------------------- duality

def duality_residual(spec: ChainSpec, alpha: float) -> float:
    """``||U H(alpha) U^dagger - H(1 - alpha)||_max`` with ``U`` the entangling layer."""
    _check_dense(spec.n_sites)
    u = np.exp(1j * entangling_polynomial(spec).phases())
    h = opsum_to_matrix(interpolated(spec, alpha))
    conj = u[:, None] * h * u.conj()[None, :]
    return float(np.max(np.abs(conj - opsum_to_matrix(interpolated(spec, 1.0 - alpha)))))


def _v_matrix(spec: ChainSpec) -> np.ndarray:
    """Dense ``V = W (CZ layer)^dagger``."""
    n = spec.n_sites
    w = circuit_to_matrix(generating_circuit(spec), n)
    cz = np.exp(1j * cz_polynomial(spec).phases())
    return w * cz.conj()[None, :]


def _transport(spec: ChainSpec, m: np.ndarray) -> np.ndarray:
    if spec.model == "ZXZ":
        return m
    v = _v_matrix(spec)
    return v @ m @ v.conj().T


def translation_matrix(n: int) -> np.ndarray:
    """Permutation ``T`` with ``T X_j T^dagger = X_{j+1}`` (cyclic)."""
    _check_dense(n)
    idx = np.arange(1 << n)
    top = (idx >> (n - 1)) & 1
    new = ((idx << 1) & ((1 << n) - 1)) | top
    t = np.zeros((1 << n, 1 << n))
    t[new, idx] = 1.0
    return t


def _half_d(n: int, parity: int) -> np.ndarray:
    """``D^even`` (parity 0) or ``D^odd`` (parity 1) of the ZXZ chain."""
    last = n if parity == 0 else n - 1
    first = 2 if parity == 0 else 1
    gates: list[Gate] = []
    for j in range(first, last - 1, 2):
        # D_j = exp(-i pi/4 Z_j Z_{j+2}) exp(-i pi/4 X_j)
        gates.append(Gate("RX", (j,), math.pi / 2))
        gates.append(Gate("ZZ", (j, j + 2), math.pi))
    gates.append(Gate("RX", (last,), math.pi / 2))
    u = circuit_to_matrix(gates, n)
    sub = range(first, n + 1, 2)
    p = (np.eye(1 << n) + opsum_to_matrix(_x_string(sub, n))) / 2
    return p @ u


def _require_closed(spec: ChainSpec) -> None:
    if not spec.closed:
        raise ArgumentError("this construction needs a closed chain")
    _check_dense(spec.n_sites)


def noninvertible_D(spec: ChainSpec) -> SymmetryOperator:
    """``D = T D^even D^odd`` for ZXZ, transported by ``V`` for other models."""
    _require_closed(spec)
    n = spec.n_sites
    d = translation_matrix(n) @ _half_d(n, 0) @ _half_d(n, 1)
    return SymmetryOperator(f"D_{spec.model}", n, matrix=_transport(spec, d))


def intertwine_check(d, a, b) -> float:
    """``min_gamma ||D A - e^{i gamma} B D||_max``."""
    dm, am, bm = _as_matrix(d), _as_matrix(a), _as_matrix(b)
    if not (dm.shape == am.shape == bm.shape):
        raise DimensionError("operator dimensions disagree")
    return phase_aligned_residual(dm @ am, bm @ dm)


def mapped_pair(spec: ChainSpec, j: int) -> tuple[OperatorSum, OperatorSum]:
    """``(V X_j V^dagger, V Z_{j-1} Z_{j+1} V^dagger)`` on a closed chain."""
    n = spec.n_sites
    l, r = (j - 2) % n + 1, j % n + 1
    xj = pauli_product([("X", j)], n)
    zz = pauli_product([("Z", l), ("Z", r)], n)
    if spec.model == "ZXZ":
        return xj, zz
    return undress_cz(spec, xj), undress_cz(spec, zz)


def kt_operator(spec: ChainSpec) -> SymmetryOperator:
    """``KT = A^dagger (CZ layer) A`` with ``A = D^even D^odd``, transported by ``V``."""
    _require_closed(spec)
    n = spec.n_sites
    a = _half_d(n, 0) @ _half_d(n, 1)
    cz = np.exp(1j * cz_polynomial(spec).phases())
    kt = a.conj().T @ (cz[:, None] * a)
    return SymmetryOperator(f"KT_{spec.model}", n, matrix=_transport(spec, kt))


@dataclass
class KTReport:
    x_residuals: list[float]
    k_residuals: list[float]

    @property
    def max_residual(self) -> float:
        return max(self.x_residuals + self.k_residuals)


def kt_check(spec: ChainSpec) -> KTReport:
    """Residuals of ``KT X_j = X_j KT`` and ``KT K_j = Z_{j-1} Z_{j+1} KT``."""
    kt = kt_operator(spec).dense()
    n = spec.n_sites
    xs, ks = [], []
    for j in range(1, n + 1):
        xj, zz = mapped_pair(spec, j)
        xs.append(intertwine_check(kt, xj, xj))
        kj = xj if spec.model == "X" else build(spec).stabilizer_at(j)
        ks.append(intertwine_check(kt, kj, zz))
    return KTReport(xs, ks)


# ---------------------------------------------------------------- string order

def _stabilizer_range(bundle: ModelBundle, i: int, j: int) -> list[OperatorSum]:
    if not i < j:
        raise IndexError(f"string order needs i < j, got ({i}, {j})")
    for s in (i, j):
        if s not in bundle.sites:
            raise IndexError(f"site {s} is not a retained stabilizer site")
    return [bundle.stabilizer_at(k) for k in range(i, j + 1)]


def string_order_vector(vec: np.ndarray, bundle: ModelBundle, i: int, j: int,
                        return_complex: bool = False):
    """``<g| K_i K_{i+1} ... K_j |g>`` for a normalized amplitude vector."""
    w = np.asarray(vec, dtype=complex)
    for k in reversed(_stabilizer_range(bundle, i, j)):
        w = opsum_apply(k, w)
    val = complex(np.vdot(vec, w))
    return val if return_complex else val.real


def string_order(state: StateVector, spec: ChainSpec, i: int, j: int) -> float:
    return string_order_vector(state.amplitudes, build(spec), i, j)


# ---------------------------------------------------------------- edges

@dataclass
class LogicalSet:
    """Per-edge logical triples; ``left[n-1]["X"]`` is ``X^n_left``."""

    n_sites: int
    left: list[dict[str, OperatorSum]]
    right: list[dict[str, OperatorSum]]

    def get(self, edge: str, letter: str, n: int = 1) -> OperatorSum:
        side = self.left if edge == "left" else self.right
        return side[n - 1][letter]

    def all(self) -> list[tuple[str, int, str, OperatorSum]]:
        out = []
        for edge, side in (("left", self.left), ("right", self.right)):
            for n, triple in enumerate(side, start=1):
                for letter in "XYZ":
                    out.append((edge, n, letter, triple[letter]))
        return out


def edge_logicals(spec: ChainSpec) -> LogicalSet:
    """Dress ``X_n, Y_n, Z_n`` near each edge with the truncated open circuit."""
    if spec.closed or spec.edge_terms != "drop":
        raise ArgumentError("edge logicals need an open chain with edge_terms=drop")
    n, N = spec.n_sites, spec.N
    if N == 0:
        raise ArgumentError("the X model has no edge logicals")

    def triple(site: int) -> dict[str, OperatorSum]:
        return {c: dress(spec, pauli_product([(c, site)], n)) for c in "XYZ"}

    return LogicalSet(n, [triple(k) for k in range(1, N + 1)],
                      [triple(n - N + k) for k in range(1, N + 1)])


def projective_phase(ug: OperatorSum, uh: OperatorSum, tol: float = _PHASE_TOL) -> int:
    """``omega`` with ``U_g U_h = omega U_h U_g``, required to be +1 or -1."""
    gh, hg = opsum_mul(ug, uh), opsum_mul(uh, ug)
    if not gh and not hg:
        raise StructureError("both products vanish")
    keys = set(gh.terms) | set(hg.terms)
    ref = max(keys, key=lambda k: abs(hg.terms.get(k, 0)))
    denom = hg.terms.get(ref, 0)
    if abs(denom) < tol:
        raise StructureError("products are not proportional")
    omega = gh.terms.get(ref, 0) / denom
    if gh.max_abs_diff(hg.scale(omega)) > tol:
        raise StructureError("products are not proportional")
    for s in (1, -1):
        if abs(omega - s) < tol:
            return s
    raise StructureError(f"projective phase {omega:.6g} is not +-1")


def conjugation_sign(eta: OperatorSum, op: OperatorSum) -> int:
    """Sign ``s`` with ``eta op eta = s op``."""
    img = opsum_mul(opsum_mul(eta, op), eta)
    for s in (1, -1):
        if img.max_abs_diff(op.scale(s)) < _PHASE_TOL:
            return s
    raise StructureError("conjugation does not act as a sign")


def edge_symmetry_action(spec: ChainSpec) -> dict[tuple[str, str], int]:
    """Signs of ``eta L eta`` for ``eta`` in (even, odd) and each logical."""
    logicals = edge_logicals(spec)
    e, o = eta_generators(spec)
    table = {}
    for name, eta in (("even", e.opsum), ("odd", o.opsum)):
        for edge, n, letter, op in logicals.all():
            label = f"{letter}{'' if spec.N == 1 else n}_{edge}"
            table[(name, label)] = conjugation_sign(eta, op)
    return table


def edge_representation(spec: ChainSpec) -> dict[tuple[str, str], OperatorSum]:
    """``U_edge(eta)`` for the order-one chain: left (odd -> X, even -> Z), right mirrored."""
    if spec.N != 1:
        raise ArgumentError("edge representation is tabulated for order-one models")
    lg = edge_logicals(spec)
    return {
        ("left", "odd"): lg.get("left", "X"),
        ("left", "even"): lg.get("left", "Z"),
        ("right", "odd"): lg.get("right", "Z"),
        ("right", "even"): lg.get("right", "X"),
    }


@dataclass
class AnomalyReport:
    norms: dict[str, float]

    @property
    def nontrivial(self) -> bool:
        return all(v > 1.0 for k, v in self.norms.items() if k.endswith("@eta"))


def anomaly_check(spec: ChainSpec) -> AnomalyReport:
    """Max-norm commutators of the edge logicals with ``eta``, ``eta_even``, ``eta_odd``."""
    lg = edge_logicals(spec)
    e, o = eta_generators(spec)
    eta = opsum_mul(e.opsum, o.opsum)
    norms = {}
    for edge, n, letter, op in lg.all():
        if letter == "Y":
            continue
        label = f"{letter}{n}_{edge}"
        for tag, g in (("eta", eta), ("eta_even", e.opsum), ("eta_odd", o.opsum)):
            comm = opsum_mul(op, g) - opsum_mul(g, op)
            norms[f"{label}@{tag}"] = commutator_norm_opsum(comm)
    return AnomalyReport(norms)


def commutator_norm_opsum(comm: OperatorSum) -> float:
    if not comm:
        return 0.0
    if comm.n_sites <= 10:
        return float(np.max(np.abs(opsum_to_matrix(comm))))
    return float(sum(abs(c) for c in comm.terms.values()))


def is_pauli_string(op: OperatorSum) -> bool:
    return len(op) == 1
