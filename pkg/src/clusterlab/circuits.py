"""Statevector engine and gate catalog.

Local gate matrices list ``sites[0]`` as the most significant qubit of the
small matrix, so ``CX`` on ``(c, t)`` is the textbook 4x4 CNOT with control
``c``.  Global basis indices keep site 1 as the least significant bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError, CapacityError, DimensionError
from .pauli import DENSE_LIMIT

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CCZ": np.diag([1, 1, 1, 1, 1, 1, 1, -1]).astype(complex),
}
_ARITY = {"I": 1, "H": 1, "X": 1, "Y": 1, "Z": 1, "RX": 1, "RZ": 1,
          "CX": 2, "CZ": 2, "CP": 2, "ZZ": 2, "CR": 2, "MS": 2, "CCZ": 3}
_ANGLED = {"RX", "RZ", "CP", "ZZ", "CR", "MS", "CNP"}
KINDS = tuple(sorted(set(_ARITY) | {"CNZ", "CNP"}))


@dataclass(frozen=True)
class Gate:
    """A catalog gate on 1-indexed sites.

    Angle conventions: ``RX = exp(-i a/2 X)``, ``RZ = exp(-i a/2 Z)``,
    ``ZZ = exp(-i a/4 Z Z)``, ``CR = exp(-i a/2 Z X)``, ``MS = exp(-i a/2 X X)``,
    ``CP = diag(1, 1, 1, e^{ia})``; ``CNZ``/``CNP`` act on ``N + 1`` sites.
    """

    kind: str
    sites: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        if kind not in KINDS:
            raise ArgumentError(f"unknown gate kind {self.kind!r}")
        if len(set(self.sites)) != len(self.sites):
            raise ArgumentError(f"site collision in {kind}{self.sites}")
        if kind in ("CNZ", "CNP"):
            if len(self.sites) < 2:
                raise ArgumentError(f"{kind} needs at least two sites")
        elif len(self.sites) != _ARITY[kind]:
            raise ArgumentError(f"{kind} acts on {_ARITY[kind]} sites, got {len(self.sites)}")
        if kind in _ANGLED and self.angle is None:
            raise ArgumentError(f"{kind} requires an angle")

    @property
    def order(self) -> int:
        """Number of controls for controlled-phase kinds."""
        return len(self.sites) - 1

    def is_diagonal(self) -> bool:
        return self.kind in ("I", "Z", "RZ", "CZ", "CP", "CCZ", "CNZ", "CNP", "ZZ")

    def local_matrix(self) -> np.ndarray:
        return gate_local_matrix(self)

    def __repr__(self) -> str:
        ang = "" if self.angle is None else f"({self.angle:.6g})"
        return f"{self.kind}{ang}{list(self.sites)}"


def gate_local_matrix(g: Gate) -> np.ndarray:
    k, a = g.kind, g.angle
    if k in _FIXED:
        return _FIXED[k].copy()
    if k in ("CNZ", "CNP"):
        d = np.ones(1 << len(g.sites), dtype=complex)
        d[-1] = -1 if k == "CNZ" else np.exp(1j * a)
        return np.diag(d)
    c, s = math.cos(a / 2), math.sin(a / 2)
    if k == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if k == "RZ":
        return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
    if k == "CP":
        return np.diag([1, 1, 1, np.exp(1j * a)])
    if k == "ZZ":
        m, p = np.exp(-0.25j * a), np.exp(0.25j * a)
        return np.diag([m, p, p, m])
    if k == "CR":
        return np.array([[c, -1j * s, 0, 0], [-1j * s, c, 0, 0],
                         [0, 0, c, 1j * s], [0, 0, 1j * s, c]])
    if k == "MS":
        return np.array([[c, 0, 0, -1j * s], [0, c, -1j * s, 0],
                         [0, -1j * s, c, 0], [-1j * s, 0, 0, c]])
    raise ArgumentError(f"no matrix for {k}")  # pragma: no cover


@dataclass
class StateVector:
    """Amplitudes over ``2**n_sites`` basis states (site 1 = least significant bit)."""

    amplitudes: np.ndarray
    n_sites: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_sites,):
            raise DimensionError(
                f"expected {1 << self.n_sites} amplitudes, got shape {self.amplitudes.shape}"
            )

    @classmethod
    def basis(cls, n_sites: int, index: int = 0) -> "StateVector":
        amps = np.zeros(1 << n_sites, dtype=complex)
        amps[index] = 1.0
        return cls(amps, n_sites)

    @classmethod
    def plus(cls, n_sites: int) -> "StateVector":
        dim = 1 << n_sites
        return cls(np.full(dim, dim**-0.5, dtype=complex), n_sites)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.n_sites)

    def bitstring(self, index: int) -> str:
        """Basis label ``x_n ... x_1`` for an index."""
        return format(index, f"0{self.n_sites}b")


def _check_sites(sites: Sequence[int], n_sites: int) -> None:
    for s in sites:
        if not 1 <= s <= n_sites:
            raise ArgumentError(f"site {s} outside 1..{n_sites}")


def _apply_local(amps: np.ndarray, mat: np.ndarray, sites: Sequence[int], n_sites: int) -> np.ndarray:
    """Apply a local matrix to a vector or to each column of a 2-D block."""
    k = len(sites)
    batch = amps.shape[1:]
    t = amps.reshape((2,) * n_sites + batch)
    axes = [n_sites - s for s in sites]  # site n is axis 0
    m = mat.reshape((2,) * (2 * k))
    t = np.tensordot(m, t, axes=(list(range(k, 2 * k)), axes))
    t = np.moveaxis(t, list(range(k)), axes)
    return t.reshape(amps.shape)


def apply_gate(v: StateVector, g: Gate) -> StateVector:
    _check_sites(g.sites, v.n_sites)
    if g.kind in ("CNZ", "CNP", "CCZ", "CZ", "CP"):
        # controlled phase: touch only the all-ones amplitudes
        mask = sum(1 << (s - 1) for s in g.sites)
        idx = np.arange(1 << v.n_sites)
        out = v.amplitudes.copy()
        sel = (idx & mask) == mask
        phase = np.exp(1j * g.angle) if g.kind in ("CP", "CNP") else -1.0
        out[sel] *= phase
        return StateVector(out, v.n_sites)
    return StateVector(_apply_local(v.amplitudes, gate_local_matrix(g), g.sites, v.n_sites), v.n_sites)


def apply_circuit(v: StateVector, circuit: Sequence[Gate]) -> StateVector:
    """Apply gates in list order (first gate acts first)."""
    for g in circuit:
        v = apply_gate(v, g)
    return v


def gate_to_matrix(g: Gate, n_sites: int) -> np.ndarray:
    if n_sites > DENSE_LIMIT:
        raise CapacityError(f"{n_sites} sites exceeds dense limit {DENSE_LIMIT}")
    _check_sites(g.sites, n_sites)
    return _apply_local(np.eye(1 << n_sites, dtype=complex), gate_local_matrix(g), g.sites, n_sites)


def circuit_to_matrix(circuit: Sequence[Gate], n_sites: int) -> np.ndarray:
    """Dense unitary of a gate list (first gate acts first)."""
    if n_sites > DENSE_LIMIT:
        raise CapacityError(f"{n_sites} sites exceeds dense limit {DENSE_LIMIT}")
    u = np.eye(1 << n_sites, dtype=complex)
    for g in circuit:
        _check_sites(g.sites, n_sites)
        u = _apply_local(u, gate_local_matrix(g), g.sites, n_sites)
    return u


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.n_sites != b.n_sites:
        raise DimensionError(f"{a.n_sites} vs {b.n_sites} sites")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def phase_aligned_residual(a: np.ndarray, b: np.ndarray) -> float:
    """``min_gamma ||a - e^{i gamma} b||_max`` using the Frobenius-optimal phase."""
    inner = np.vdot(b, a)
    phase = inner / abs(inner) if abs(inner) > 1e-300 else 1.0
    return float(np.max(np.abs(a - phase * b)))


def verify_decomposition(target: Gate | np.ndarray, circuit: Sequence[Gate],
                         n_sites: int | None = None) -> float:
    """Phase-optimized max-norm distance between a target gate and a gate list."""
    if n_sites is None:
        sites = set(getattr(target, "sites", ()))
        for g in circuit:
            sites.update(g.sites)
        n_sites = max(sites)
    tgt = target if isinstance(target, np.ndarray) else gate_to_matrix(target, n_sites)
    return phase_aligned_residual(tgt, circuit_to_matrix(circuit, n_sites))


def cp_ising_decomposition(phi: float, a: int = 1, b: int = 2) -> list[Gate]:
    """``CP(phi) = e^{i phi/4} e^{-i phi/4 Z_a} e^{-i phi/4 Z_b} e^{+i phi/4 Z_a Z_b}``.

    Written with catalog gates: ``RZ(phi/2)`` on each site and ``ZZ(-phi)``.
    """
    return [Gate("RZ", (a,), phi / 2), Gate("RZ", (b,), phi / 2), Gate("ZZ", (a, b), -phi)]


def cp_ising_decomposition_flipped(phi: float, a: int = 1, b: int = 2) -> list[Gate]:
    """Opposite-sign variant ``e^{+i phi/4 Z_a} e^{+i phi/4 Z_b} e^{-i phi/4 Z_a Z_b}``.

    This product equals ``CP(-phi)`` up to a global phase; kept for comparison.
    """
    return [Gate("RZ", (a,), -phi / 2), Gate("RZ", (b,), -phi / 2), Gate("ZZ", (a, b), phi)]


def cr_to_ising(phi: float, control: int = 1, target: int = 2) -> list[Gate]:
    """``H_t CR(phi/2) H_t = ZZ(phi)``, the Ising gate ``exp(-i phi/4 Z Z)``."""
    return [Gate("H", (target,)), Gate("CR", (control, target), phi / 2), Gate("H", (target,))]


def ms_to_ising(phi: float, a: int = 1, b: int = 2) -> list[Gate]:
    """``H_a H_b MS(phi/2) H_a H_b = ZZ(phi)``."""
    return [Gate("H", (a,)), Gate("H", (b,)), Gate("MS", (a, b), phi / 2),
            Gate("H", (a,)), Gate("H", (b,))]


def hadamard_layer(sites: Sequence[int]) -> list[Gate]:
    return [Gate("H", (s,)) for s in sites]


def cluster_state(spec) -> StateVector:
    """Reference state of a model: ``|0...0>``, H on every site, then the model circuit."""
    from .models import generating_circuit

    v = StateVector.basis(spec.n_sites)
    return apply_circuit(v, hadamard_layer(range(1, spec.n_sites + 1)) + generating_circuit(spec))


def xzx_cx_route(n_sites: int, boundary: str = "closed") -> StateVector:
    """XZX cluster state from CX gates.

    H on odd sites, CX from each odd site to its even neighbours (including
    the wrap bond when closed), then H on odd sites again.
    """
    if n_sites < 2 or n_sites % 2:
        raise ArgumentError("n_sites must be even and at least 2")
    odd = range(1, n_sites + 1, 2)
    gates = hadamard_layer(odd)
    for j in odd:
        gates.append(Gate("CX", (j, j + 1)))
        left = j - 1 if j > 1 else (n_sites if boundary == "closed" and n_sites > 2 else None)
        if left is not None:
            gates.append(Gate("CX", (j, left)))
    gates += hadamard_layer(odd)
    return apply_circuit(StateVector.basis(n_sites), gates)


def gate_polynomial(g: Gate, n_sites: int):
    """Phase polynomial of a diagonal catalog gate."""
    from .phasepoly import PhasePolynomial, from_gate

    k = g.kind
    if k == "I":
        return PhasePolynomial.identity(n_sites)
    if k == "Z":
        return PhasePolynomial(n_sites, {g.sites: math.pi})
    if k == "RZ":
        return from_gate("ZROT", g.sites, n_sites, g.angle)
    if k in ("CZ", "CP", "CCZ", "CNZ", "CNP", "ZZ"):
        return from_gate(k, g.sites, n_sites, g.angle)
    raise ArgumentError(f"{k} is not diagonal")
