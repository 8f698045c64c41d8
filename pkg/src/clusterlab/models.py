"""Chain specifications and the stabilizer-model factory.

Every model is defined by a generating circuit ``W`` acting after a Hadamard
layer on ``|0...0>``.  ``W`` is a diagonal entangling layer followed by an
optional single-site post layer, and the stabilizers are ``K_j = W X_j W^dagger``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

from .circuits import Gate, StateVector, apply_circuit, gate_polynomial, hadamard_layer
from .errors import ArgumentError
from .pauli import (
    OperatorSum,
    PauliString,
    conjugate_by_hadamard,
    conjugate_by_rotation,
    opsum_apply,
    opsum_sum,
)
from .phasepoly import PhasePolynomial, compose_all, conjugate_diagonal, conjugate_x

MODELS = ("X", "ZXZ", "XZX", "ZZZ_XXX", "BITFLIP", "PHASEFLIP", "CP", "CCZ", "CNZ", "CNP", "ISING_ZZ")
_ALIASES = {"ZZZ-XXX": "ZZZ_XXX", "ZZZXXX": "ZZZ_XXX", "ISING": "ISING_ZZ", "ZZ": "ISING_ZZ",
            "BIT_FLIP": "BITFLIP", "PHASE_FLIP": "PHASEFLIP", "C^NZ": "CNZ", "C^NP": "CNP"}
# models whose entangling layer is the plain CZ chain
CZ_FAMILY = ("ZXZ", "XZX", "ZZZ_XXX", "BITFLIP", "PHASEFLIP")
INTERPOLATABLE = ("ZXZ", "CCZ", "CNZ")
STATE_LIMIT = 24


def canonical_model(name: str) -> str:
    key = name.strip().upper().replace(" ", "")
    key = _ALIASES.get(key, key)
    if key not in MODELS:
        raise ArgumentError(f"unknown model {name!r}; choose from {', '.join(MODELS)}")
    return key


@dataclass(frozen=True)
class ChainSpec:
    """Chain length, boundary, model family and angles.

    ``angles`` depends on the model: one per site (BITFLIP, PHASEFLIP), one
    per bond (CP), one per gate (CNP), or site angles followed by bond angles
    (ISING_ZZ).  A single value is broadcast.
    """

    n_sites: int
    boundary: str = "closed"
    model: str = "ZXZ"
    order: int | None = None
    angles: tuple[float, ...] | None = None
    edge_terms: str = "drop"

    def __post_init__(self):
        model = canonical_model(self.model)
        object.__setattr__(self, "model", model)
        boundary = self.boundary.lower()
        if boundary not in ("open", "closed"):
            raise ArgumentError(f"boundary must be open or closed, got {self.boundary!r}")
        object.__setattr__(self, "boundary", boundary)
        edge = self.edge_terms.lower()
        if edge not in ("include", "drop"):
            raise ArgumentError(f"edge_terms must be include or drop, got {self.edge_terms!r}")
        object.__setattr__(self, "edge_terms", edge)
        n = self.n_sites
        if not isinstance(n, (int, np.integer)) or n < 2 or n % 2:
            raise ArgumentError(f"sites must be an even integer >= 2, got {n!r}")
        object.__setattr__(self, "n_sites", int(n))

        if model in ("CNZ", "CNP"):
            if self.order is None or self.order < 1:
                raise ArgumentError(f"{model} needs order N >= 1")
            if n < 2 * self.order + 2:
                raise ArgumentError(f"{model} with N={self.order} needs at least {2 * self.order + 2} sites")
        elif self.order is not None and self.order != _fixed_order(model):
            raise ArgumentError(f"{model} has fixed order {_fixed_order(model)}, got {self.order}")
        N = self.N
        if boundary == "closed" and N > 0 and n < N + 2:
            raise ArgumentError(f"closed {model} chain needs at least {N + 2} sites")

        need = self.angle_count()
        if need == 0:
            if self.angles:
                raise ArgumentError(f"{model} takes no angles")
            object.__setattr__(self, "angles", None)
        else:
            if not self.angles:
                raise ArgumentError(f"{model} needs {need} angles")
            ang = tuple(float(a) for a in self.angles)
            if len(ang) == 1:
                ang = ang * need
            if len(ang) != need:
                raise ArgumentError(f"{model} needs {need} angles, got {len(ang)}")
            object.__setattr__(self, "angles", ang)

    @property
    def N(self) -> int:
        """Number of controls in each entangling gate (order of the model)."""
        return self.order if self.model in ("CNZ", "CNP") else _fixed_order(self.model)

    @property
    def closed(self) -> bool:
        return self.boundary == "closed"

    def gate_supports(self) -> list[tuple[int, ...]]:
        """Site tuples of the entangling gates, gate ``j`` covering ``j..j+N``."""
        N, n = self.N, self.n_sites
        if N == 0:
            return []
        if self.closed:
            return [tuple((j - 1 + k) % n + 1 for k in range(N + 1)) for j in range(1, n + 1)]
        return [tuple(range(j, j + N + 1)) for j in range(1, n - N + 1)]

    def angle_count(self) -> int:
        m = self.model
        if m in ("BITFLIP", "PHASEFLIP"):
            return self.n_sites
        if m in ("CP", "CNP"):
            return len(self.gate_supports())
        if m == "ISING_ZZ":
            return self.n_sites + len(self.gate_supports())
        return 0

    def retained_sites(self) -> list[int]:
        n, N = self.n_sites, self.N
        if self.closed or self.edge_terms == "include" or N == 0:
            return list(range(1, n + 1))
        return list(range(N + 1, n - N + 1))

    def replace(self, **changes) -> "ChainSpec":
        d = self.to_dict()
        d.update({k: v for k, v in changes.items()})
        return ChainSpec.from_dict(d)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"sites": self.n_sites, "boundary": self.boundary, "model": self.model,
                               "edge_terms": self.edge_terms}
        if self.model in ("CNZ", "CNP"):
            out["order"] = self.order
        if self.angles is not None:
            out["angles"] = list(self.angles)
        return out

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ChainSpec":
        allowed = {"sites", "boundary", "model", "order", "angles", "edge_terms"}
        for key in d:
            if key not in allowed:
                raise ArgumentError(f"unknown chain key {key!r}")
        if "sites" not in d:
            raise ArgumentError("chain config needs 'sites'")
        angles = d.get("angles")
        return cls(
            n_sites=d["sites"],
            boundary=d.get("boundary", "closed"),
            model=d.get("model", "ZXZ"),
            order=d.get("order"),
            angles=tuple(angles) if angles is not None else None,
            edge_terms=d.get("edge_terms", "drop"),
        )


def _fixed_order(model: str) -> int:
    if model == "X":
        return 0
    if model == "CCZ":
        return 2
    return 1


# ---------------------------------------------------------------- circuits

def entangling_layer(spec: ChainSpec) -> list[Gate]:
    """Diagonal part of the generating circuit (boundary-aware)."""
    m, sup = spec.model, spec.gate_supports()
    if m == "X":
        return []
    if m in CZ_FAMILY:
        return [Gate("CZ", s) for s in sup]
    if m == "CP":
        return [Gate("CP", s, a) for s, a in zip(sup, spec.angles)]
    if m == "CCZ":
        return [Gate("CCZ", s) for s in sup]
    if m == "CNZ":
        return [Gate("CNZ", s) for s in sup]
    if m == "CNP":
        return [Gate("CNP", s, a) for s, a in zip(sup, spec.angles)]
    # ISING_ZZ: exp(+i phiZ/4 Z_j) on every site, exp(-i phiZZ/4 Z Z) on every bond
    n = spec.n_sites
    site_angles, bond_angles = spec.angles[:n], spec.angles[n:]
    gates = [Gate("RZ", (j,), -a / 2) for j, a in zip(range(1, n + 1), site_angles)]
    return gates + [Gate("ZZ", s, a) for s, a in zip(sup, bond_angles)]


def post_layer(spec: ChainSpec) -> list[Gate]:
    """Single-site layer applied after the entangling layer."""
    n, m = spec.n_sites, spec.model
    if m == "XZX":
        return hadamard_layer(range(1, n + 1))
    if m == "ZZZ_XXX":
        return hadamard_layer(range(2, n + 1, 2))
    if m == "BITFLIP":
        return [Gate("RX", (j,), a) for j, a in zip(range(1, n + 1), spec.angles)]
    if m == "PHASEFLIP":
        # exp(+i phi/2 Z) == RZ(-phi)
        return [Gate("RZ", (j,), -a) for j, a in zip(range(1, n + 1), spec.angles)]
    return []


def generating_circuit(spec: ChainSpec) -> list[Gate]:
    """``W`` in application order; the reference state is ``W H^n |0...0>``."""
    return entangling_layer(spec) + post_layer(spec)


def entangling_polynomial(spec: ChainSpec) -> PhasePolynomial:
    n = spec.n_sites
    return compose_all([gate_polynomial(g, n) for g in entangling_layer(spec)], n)


def cz_polynomial(spec: ChainSpec) -> PhasePolynomial:
    """Plain CZ chain on the spec's bonds, the layer of the ZXZ model."""
    n = spec.n_sites
    bonds = ChainSpec(n, spec.boundary, "ZXZ").gate_supports()
    return PhasePolynomial(n, {b: math.pi for b in bonds})


def conjugate_by_gate(op: OperatorSum, g: Gate) -> OperatorSum:
    """``g op g^dagger`` for a single-site post-layer gate or a diagonal gate."""
    if g.kind == "H":
        return conjugate_by_hadamard(op, g.sites[0])
    if g.kind == "RX":
        return conjugate_by_rotation(op, "X", g.sites[0], g.angle)
    if g.kind == "RZ":
        return conjugate_by_rotation(op, "Z", g.sites[0], -g.angle)
    if g.is_diagonal():
        return conjugate_diagonal(gate_polynomial(g, op.n_sites), op)
    raise ArgumentError(f"cannot conjugate by {g.kind}")


def dress(spec: ChainSpec, op: OperatorSum) -> OperatorSum:
    """``W op W^dagger`` for the model's generating circuit ``W``."""
    out = conjugate_diagonal(entangling_polynomial(spec), op)
    for g in post_layer(spec):
        out = conjugate_by_gate(out, g)
    return _hermitian_clean(out)


def undress_cz(spec: ChainSpec, op: OperatorSum) -> OperatorSum:
    """``V op V^dagger`` with ``V = W (CZ layer)^dagger``.

    ``V`` maps ZXZ-model structures onto the requested model.
    """
    base = conjugate_diagonal(cz_polynomial(spec), op)
    return dress(spec, base)


def _hermitian_clean(op: OperatorSum) -> OperatorSum:
    return op.real() if op.is_hermitian(1e-12) else op


# ---------------------------------------------------------------- bundles

def stabilizer(spec: ChainSpec, j: int) -> OperatorSum:
    """``K_j = W X_j W^dagger`` with the (possibly truncated) circuit of ``spec``."""
    if not 1 <= j <= spec.n_sites:
        raise IndexError(f"site {j} outside 1..{spec.n_sites}")
    out = conjugate_x(entangling_polynomial(spec), j)
    for g in post_layer(spec):
        out = conjugate_by_gate(out, g)
    return _hermitian_clean(out)


@dataclass(frozen=True)
class ModelBundle:
    spec: ChainSpec
    sites: tuple[int, ...]
    stabilizers: tuple[OperatorSum, ...]
    hamiltonian: OperatorSum
    generating_circuit: tuple[Gate, ...] = field(repr=False)

    @cached_property
    def reference_state(self) -> StateVector:
        if self.spec.n_sites > STATE_LIMIT:
            raise ArgumentError(f"reference state limited to {STATE_LIMIT} sites")
        v = StateVector.basis(self.spec.n_sites)
        return apply_circuit(v, hadamard_layer(range(1, self.spec.n_sites + 1)) + list(self.generating_circuit))

    def stabilizer_at(self, j: int) -> OperatorSum:
        try:
            return self.stabilizers[self.sites.index(j)]
        except ValueError:
            raise IndexError(f"no retained stabilizer at site {j}") from None


def build(spec: ChainSpec) -> ModelBundle:
    sites = tuple(spec.retained_sites())
    stabs = tuple(stabilizer(spec, j) for j in sites)
    ham = opsum_sum(stabs, spec.n_sites).scale(-1.0)
    return ModelBundle(spec, sites, stabs, _hermitian_clean(ham), tuple(generating_circuit(spec)))


def transverse_field(spec: ChainSpec) -> OperatorSum:
    """``H_X = -sum_j X_j`` over the spec's retained sites."""
    n = spec.n_sites
    return OperatorSum({(1 << (j - 1), 0): -1.0 for j in spec.retained_sites()}, n)


def interpolated(spec: ChainSpec, alpha: float) -> OperatorSum:
    """``alpha H_model + (1 - alpha) H_X``."""
    if spec.model not in INTERPOLATABLE:
        raise ArgumentError(f"interpolation supports {INTERPOLATABLE}, not {spec.model}")
    hm = build(spec).hamiltonian
    return _hermitian_clean(hm.scale(alpha) + transverse_field(spec).scale(1.0 - alpha))


def ising_nnn(spec: ChainSpec) -> OperatorSum:
    """``sum_j Z_{j-1} Z_{j+1}``; closed chains wrap and merge repeated bonds."""
    n = spec.n_sites
    acc: dict[tuple[int, int], complex] = {}
    if spec.closed:
        pairs = [((j - 2) % n + 1, j % n + 1) for j in range(1, n + 1)]
    else:
        pairs = [(j - 1, j + 1) for j in range(2, n)]
    for a, b in pairs:
        if a == b:
            continue
        key = (0, (1 << (a - 1)) | (1 << (b - 1)))
        acc[key] = acc.get(key, 0) + 1.0
    return OperatorSum(acc, n)


@dataclass
class FrustrationReport:
    max_residual: float
    ground_energy: float
    expected_energy: float
    n_stabilizers: int

    @property
    def ok(self) -> bool:
        return self.max_residual < 1e-10 and abs(self.ground_energy - self.expected_energy) < 1e-10


def frustration_check(bundle: ModelBundle) -> FrustrationReport:
    """Residuals ``||K_j g - g||`` on the reference state and the ground energy."""
    from .spectra import lowest_eigenvalue

    g = bundle.reference_state.amplitudes
    worst = max((float(np.linalg.norm(opsum_apply(k, g) - g)) for k in bundle.stabilizers), default=0.0)
    e0 = lowest_eigenvalue(bundle.hamiltonian)
    return FrustrationReport(worst, e0, -float(len(bundle.stabilizers)), len(bundle.stabilizers))


# ---------------------------------------------------------------- CP closed forms

def cp_coefficients(left: float, right: float) -> dict[str, float]:
    """Coefficients of ``K_j = sum a_{pq} Z^p X_j Z^q + b_{pq} Z^p Y_j Z^q``.

    ``left`` and ``right`` are the CP angles on the bonds ``(j-1, j)`` and
    ``(j, j+1)``; keys are ``"a00"``, ``"a10"``, ..., ``"b11"`` with the first
    index on site ``j-1``.
    """
    a, b = left, right
    ca, cb, cab = math.cos(a), math.cos(b), math.cos(a + b)
    sa, sb, sab = math.sin(a), math.sin(b), math.sin(a + b)
    return {
        "a00": (1 + ca + cb + cab) / 4,
        "a10": (1 - ca + cb - cab) / 4,
        "a01": (1 + ca - cb - cab) / 4,
        "a11": (1 - ca - cb + cab) / 4,
        "b00": (sa + sb + sab) / 4,
        "b10": (-sa + sb - sab) / 4,
        "b01": (sa - sb - sab) / 4,
        "b11": (-sa - sb + sab) / 4,
    }


def cp_constant_coefficients(phi: float) -> dict[str, float]:
    """Constant-angle closed forms (``a10 == a01`` and ``b10 == b01``)."""
    c2 = math.cos(phi / 2) ** 2
    s2 = math.sin(phi / 2) ** 2
    return {
        "a00": c2 * math.cos(phi),
        "a10": math.sin(phi) ** 2 / 2,
        "a01": math.sin(phi) ** 2 / 2,
        "a11": -s2 * math.cos(phi),
        "b00": c2 * math.sin(phi),
        "b10": -math.sin(2 * phi) / 4,
        "b01": -math.sin(2 * phi) / 4,
        "b11": -s2 * math.sin(phi),
    }


def cp_stabilizer_coefficients(k: OperatorSum, j: int) -> dict[str, float]:
    """Read the eight ``a``/``b`` coefficients off a CP stabilizer ``K_j``."""
    n = k.n_sites
    left, right = (j - 2) % n + 1, j % n + 1
    out = {}
    for letter, tag in (("X", "a"), ("Y", "b")):
        for p in (0, 1):
            for q in (0, 1):
                toks = [f"{letter}{j}"]
                if p:
                    toks.append(f"Z{left}")
                if q:
                    toks.append(f"Z{right}")
                out[f"{tag}{p}{q}"] = k.coefficient(" ".join(toks)).real
    return out


def single_site(letter: str, j: int, n: int) -> OperatorSum:
    return OperatorSum.from_pauli(PauliString.single(letter, j, n))


def pauli_product(factors: Sequence[tuple[str, int]], n: int) -> OperatorSum:
    """Tensor product of single-site letters on distinct sites."""
    p = PauliString.from_label(" ".join(f"{l}{s}" for l, s in factors), n)
    return OperatorSum.from_pauli(p)
