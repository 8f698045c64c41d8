"""Phased Pauli strings and complex-weighted Pauli sums.

Basis convention used throughout the package: site 1 is the least
significant bit of a basis index, i.e. ``|x_n ... x_2 x_1>`` is the integer
``sum_j x_j 2**(j-1)``.

A Pauli string is stored as two bit masks ``x`` and ``z`` (bit ``s-1`` refers
to site ``s``).  A site with both bits set carries the Hermitian letter Y, so
that the phase-free string ``P(x, z)`` equals ``i**popcount(x & z) X**x Z**z``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError, DimensionError

DENSE_LIMIT = 14
PRUNE_TOL = 1e-12

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _check_site(site: int, n_sites: int) -> None:
    if not 1 <= site <= n_sites:
        raise IndexError(f"site {site} outside 1..{n_sites}")


@dataclass(frozen=True)
class PauliString:
    """``i**phase`` times a tensor product of single-site Pauli letters."""

    x: int
    z: int
    n_sites: int
    phase: int = 0

    def __post_init__(self):
        if self.n_sites < 1:
            raise DimensionError("n_sites must be positive")
        limit = 1 << self.n_sites
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise DimensionError("mask exceeds n_sites")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_letters(cls, letters: str, phase: int = 0) -> "PauliString":
        """``letters[0]`` acts on site 1."""
        x = z = 0
        for k, ch in enumerate(letters.upper()):
            bx, bz = _LETTER_BITS[ch]
            x |= bx << k
            z |= bz << k
        return cls(x, z, len(letters), phase)

    @classmethod
    def from_label(cls, label: str, n_sites: int, phase: int = 0) -> "PauliString":
        """Parse a sparse label such as ``"Z1 X2 Z3"`` (1-indexed sites)."""
        x = z = 0
        for tok in label.split():
            if tok.upper() == "I":
                continue
            ch, site = tok[0].upper(), int(tok[1:])
            _check_site(site, n_sites)
            bit = 1 << (site - 1)
            if (x | z) & bit:
                raise ValueError(f"site {site} appears twice in {label!r}")
            bx, bz = _LETTER_BITS[ch]
            x |= bx * bit
            z |= bz * bit
        return cls(x, z, n_sites, phase)

    @classmethod
    def single(cls, letter: str, site: int, n_sites: int) -> "PauliString":
        _check_site(site, n_sites)
        bx, bz = _LETTER_BITS[letter.upper()]
        bit = 1 << (site - 1)
        return cls(bx * bit, bz * bit, n_sites)

    @property
    def letters(self) -> str:
        return "".join(
            _BITS_LETTER[((self.x >> k) & 1, (self.z >> k) & 1)] for k in range(self.n_sites)
        )

    @property
    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    @property
    def coefficient(self) -> complex:
        return 1j**self.phase

    def label(self) -> str:
        return pauli_label(self.x, self.z, self.n_sites)

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_mul(self, other)

    def __repr__(self) -> str:
        pre = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase]
        return f"PauliString({pre}{self.letters})"


def pauli_label(x: int, z: int, n_sites: int) -> str:
    toks = []
    for k in range(n_sites):
        bits = ((x >> k) & 1, (z >> k) & 1)
        if bits != (0, 0):
            toks.append(f"{_BITS_LETTER[bits]}{k + 1}")
    return " ".join(toks) if toks else "I"


def _mul_keys(xa: int, za: int, xb: int, zb: int) -> tuple[int, int, int]:
    """Product of phase-free strings: returns (x, z, k) with P_a P_b = i**k P."""
    x3, z3 = xa ^ xb, za ^ zb
    k = _popcount(xa & za) + _popcount(xb & zb) - _popcount(x3 & z3) + 2 * _popcount(za & xb)
    return x3, z3, k % 4


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    if a.n_sites != b.n_sites:
        raise DimensionError(f"{a.n_sites} vs {b.n_sites} sites")
    x, z, k = _mul_keys(a.x, a.z, b.x, b.z)
    return PauliString(x, z, a.n_sites, a.phase + b.phase + k)


def commutes(a: PauliString, b: PauliString) -> bool:
    if a.n_sites != b.n_sites:
        raise DimensionError(f"{a.n_sites} vs {b.n_sites} sites")
    return _popcount((a.x & b.z) ^ (a.z & b.x)) % 2 == 0


def _snap(c: complex) -> complex:
    # drop round-off in one component, e.g. exp(i pi) = -1 + 1.2e-16j
    c = complex(c)
    re = 0.0 if abs(c.real) < PRUNE_TOL else c.real
    im = 0.0 if abs(c.imag) < PRUNE_TOL else c.imag
    return complex(re, im)


class OperatorSum:
    """Complex combination of phase-free (Hermitian) Pauli strings.

    Treated as an immutable value: every operation returns a new instance.
    Terms are keyed by ``(x, z)`` masks; coefficients below ``PRUNE_TOL`` in
    magnitude are dropped on construction.
    """

    __slots__ = ("_terms", "n_sites", "_groups")

    def __init__(self, terms: Mapping[tuple[int, int], complex], n_sites: int):
        if n_sites < 1:
            raise DimensionError("n_sites must be positive")
        self.n_sites = n_sites
        self._terms = {k: _snap(c) for k, c in terms.items() if abs(c) >= PRUNE_TOL}
        self._groups = None

    # construction helpers
    @classmethod
    def zero(cls, n_sites: int) -> "OperatorSum":
        return cls({}, n_sites)

    @classmethod
    def identity(cls, n_sites: int, coeff: complex = 1.0) -> "OperatorSum":
        return cls({(0, 0): coeff}, n_sites)

    @classmethod
    def from_pauli(cls, p: PauliString, coeff: complex = 1.0) -> "OperatorSum":
        return cls({p.key: coeff * p.coefficient}, p.n_sites)

    @classmethod
    def from_label(cls, label: str, n_sites: int, coeff: complex = 1.0) -> "OperatorSum":
        return cls.from_pauli(PauliString.from_label(label, n_sites), coeff)

    @classmethod
    def single(cls, letter: str, site: int, n_sites: int, coeff: complex = 1.0) -> "OperatorSum":
        return cls.from_pauli(PauliString.single(letter, site, n_sites), coeff)

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[str, complex]], n_sites: int) -> "OperatorSum":
        acc: dict[tuple[int, int], complex] = {}
        for label, c in pairs:
            p = PauliString.from_label(label, n_sites)
            acc[p.key] = acc.get(p.key, 0) + c
        return cls(acc, n_sites)

    # inspection
    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def items(self):
        """(PauliString, coefficient) pairs in deterministic label order."""
        keys = sorted(self._terms, key=lambda k: _sort_key(k, self.n_sites))
        return [(PauliString(x, z, self.n_sites), self._terms[(x, z)]) for x, z in keys]

    def coefficient(self, label: str) -> complex:
        p = PauliString.from_label(label, self.n_sites)
        return self._terms.get(p.key, 0.0)

    def labelled(self) -> dict[str, complex]:
        return {p.label(): c for p, c in self.items()}

    def support(self) -> set[int]:
        mask = 0
        for x, z in self._terms:
            mask |= x | z
        return {k + 1 for k in range(self.n_sites) if (mask >> k) & 1}

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def real(self) -> "OperatorSum":
        """Drop imaginary residue (call only after checking Hermiticity)."""
        return OperatorSum({k: c.real for k, c in self._terms.items()}, self.n_sites)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self.n_sites == other.n_sites and self._terms == other._terms

    __hash__ = None

    def allclose(self, other: "OperatorSum", tol: float = 1e-12) -> bool:
        diff = opsum_combine(self, other, 1.0, -1.0)
        return all(abs(c) <= tol for c in diff._terms.values())

    def max_abs_diff(self, other: "OperatorSum") -> float:
        diff = opsum_combine(self, other, 1.0, -1.0)
        return max((abs(c) for c in diff._terms.values()), default=0.0)

    # arithmetic sugar
    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        return opsum_combine(self, other, 1.0, 1.0)

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return opsum_combine(self, other, 1.0, -1.0)

    def __neg__(self) -> "OperatorSum":
        return self.scale(-1.0)

    def __mul__(self, c: complex) -> "OperatorSum":
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorSum") -> "OperatorSum":
        return opsum_mul(self, other)

    def scale(self, c: complex) -> "OperatorSum":
        return OperatorSum({k: c * v for k, v in self._terms.items()}, self.n_sites)

    def dagger(self) -> "OperatorSum":
        return OperatorSum({k: v.conjugate() for k, v in self._terms.items()}, self.n_sites)

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})*[{p.label()}]" for p, c in self.items()[:8])
        more = "" if len(self) <= 8 else f" + ... ({len(self)} terms)"
        return f"OperatorSum(n={self.n_sites}: {body or '0'}{more})"

    # serialization
    def to_records(self) -> list[dict]:
        return [{"pauli": p.label(), "re": c.real, "im": c.imag} for p, c in self.items()]

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_records(cls, records: Iterable[Mapping], n_sites: int) -> "OperatorSum":
        return cls.from_terms(
            ((r["pauli"], complex(r["re"], r["im"])) for r in records), n_sites
        )

    @classmethod
    def from_json(cls, text: str, n_sites: int) -> "OperatorSum":
        return cls.from_records(json.loads(text), n_sites)

    # grouped representation used by the matrix-free paths
    def _grouped(self):
        """Terms grouped by X mask: list of (x, [z...], [coeff*i^|x&z|...])."""
        if self._groups is None:
            groups: dict[int, tuple[list, list]] = {}
            for (x, z), c in self._terms.items():
                zs, cs = groups.setdefault(x, ([], []))
                zs.append(z)
                cs.append(c * 1j ** _popcount(x & z))
            self._groups = [
                (x, np.array(zs, dtype=np.int64), np.array(cs, dtype=complex))
                for x, (zs, cs) in sorted(groups.items())
            ]
        return self._groups


def _sort_key(key: tuple[int, int], n: int):
    x, z = key
    return tuple(((x >> k) & 1) * 2 + ((z >> k) & 1) for k in range(n))


def _same_size(a: OperatorSum, b: OperatorSum) -> None:
    if a.n_sites != b.n_sites:
        raise DimensionError(f"{a.n_sites} vs {b.n_sites} sites")


def opsum_combine(a: OperatorSum, b: OperatorSum, ca: complex = 1.0, cb: complex = 1.0) -> OperatorSum:
    """Return ``ca*a + cb*b``."""
    _same_size(a, b)
    acc = {k: ca * v for k, v in a._terms.items()}
    for k, v in b._terms.items():
        acc[k] = acc.get(k, 0) + cb * v
    return OperatorSum(acc, a.n_sites)


def opsum_mul(a: OperatorSum, b: OperatorSum) -> OperatorSum:
    _same_size(a, b)
    acc: dict[tuple[int, int], complex] = {}
    for (xa, za), ca in a._terms.items():
        for (xb, zb), cb in b._terms.items():
            x, z, k = _mul_keys(xa, za, xb, zb)
            acc[(x, z)] = acc.get((x, z), 0) + ca * cb * 1j**k
    return OperatorSum(acc, a.n_sites)


def opsum_sum(ops: Iterable[OperatorSum], n_sites: int) -> OperatorSum:
    acc: dict[tuple[int, int], complex] = {}
    for op in ops:
        if op.n_sites != n_sites:
            raise DimensionError(f"{op.n_sites} vs {n_sites} sites")
        for k, v in op._terms.items():
            acc[k] = acc.get(k, 0) + v
    return OperatorSum(acc, n_sites)


def conjugate_by_hadamard(op: OperatorSum, site: int) -> OperatorSum:
    """H_site op H_site: X and Z swap on ``site``, Y picks up a sign."""
    _check_site(site, op.n_sites)
    bit = 1 << (site - 1)
    acc = {}
    for (x, z), c in op._terms.items():
        bx, bz = x & bit, z & bit
        if bx and bz:
            c = -c
        nx = (x & ~bit) | (bit if bz else 0)
        nz = (z & ~bit) | (bit if bx else 0)
        acc[(nx, nz)] = c
    return OperatorSum(acc, op.n_sites)


# letter images under U P U^dagger for the two rotation conventions:
#   axis X: U = exp(-i phi/2 X)   Z -> cos Z - sin Y,  Y -> cos Y + sin Z
#   axis Z: U = exp(+i phi/2 Z)   X -> cos X - sin Y,  Y -> cos Y + sin X
_ROTATION_IMAGES = {
    "X": {"Z": (("Z", "cos"), ("Y", "-sin")), "Y": (("Y", "cos"), ("Z", "sin"))},
    "Z": {"X": (("X", "cos"), ("Y", "-sin")), "Y": (("Y", "cos"), ("X", "sin"))},
}


def conjugate_by_rotation(op: OperatorSum, axis: str, site: int, angle: float) -> OperatorSum:
    """Conjugate by a single-site rotation ``U op U^dagger``.

    ``axis="X"`` uses ``U = exp(-i angle/2 X)`` and ``axis="Z"`` uses
    ``U = exp(+i angle/2 Z)``; with these choices ``Z -> Z cos - Y sin`` and
    ``X -> X cos - Y sin`` respectively.
    """
    axis = axis.upper()
    if axis not in _ROTATION_IMAGES:
        raise ValueError(f"axis must be X or Z, got {axis!r}")
    _check_site(site, op.n_sites)
    bit = 1 << (site - 1)
    weights = {"cos": np.cos(angle), "sin": np.sin(angle), "-sin": -np.sin(angle)}
    images = _ROTATION_IMAGES[axis]
    acc: dict[tuple[int, int], complex] = {}
    for (x, z), c in op._terms.items():
        letter = _BITS_LETTER[(1 if x & bit else 0, 1 if z & bit else 0)]
        if letter not in images:
            acc[(x, z)] = acc.get((x, z), 0) + c
            continue
        for new_letter, w in images[letter]:
            bx, bz = _LETTER_BITS[new_letter]
            key = ((x & ~bit) | bx * bit, (z & ~bit) | bz * bit)
            acc[key] = acc.get(key, 0) + c * weights[w]
    return OperatorSum(acc, op.n_sites)


def _basis_index(n_sites: int) -> np.ndarray:
    return np.arange(1 << n_sites, dtype=np.int64)


def _diag_block(idx: np.ndarray, zs: np.ndarray, cs: np.ndarray) -> np.ndarray:
    d = np.zeros(idx.shape, dtype=complex)
    for z, c in zip(zs, cs):
        if z == 0:
            d += c
        else:
            d += c * (1.0 - 2.0 * (np.bitwise_count(idx & z) & 1))
    return d


def opsum_to_matrix(op: OperatorSum) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix in the global basis convention."""
    if op.n_sites > DENSE_LIMIT:
        raise CapacityError(f"{op.n_sites} sites exceeds dense limit {DENSE_LIMIT}")
    dim = 1 << op.n_sites
    idx = _basis_index(op.n_sites)
    mat = np.zeros((dim, dim), dtype=complex)
    for x, zs, cs in op._grouped():
        mat[idx ^ x, idx] += _diag_block(idx, zs, cs)
    return mat


def opsum_to_sparse(op: OperatorSum):
    """CSR matrix; no dense limit but memory grows as terms * 2**n."""
    import scipy.sparse as sp

    dim = 1 << op.n_sites
    idx = _basis_index(op.n_sites)
    rows, cols, vals = [], [], []
    for x, zs, cs in op._grouped():
        rows.append(idx ^ x)
        cols.append(idx)
        vals.append(_diag_block(idx, zs, cs))
    if not rows:
        return sp.csr_matrix((dim, dim), dtype=complex)
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return m.tocsr()


class _ApplyPlan:
    __slots__ = ("idx", "blocks")

    def __init__(self, op: OperatorSum):
        self.idx = _basis_index(op.n_sites)
        self.blocks = [(x, _diag_block(self.idx, zs, cs)) for x, zs, cs in op._grouped()]


_PLANS: dict[int, tuple[OperatorSum, _ApplyPlan]] = {}


def _plan_for(op: OperatorSum) -> _ApplyPlan:
    hit = _PLANS.get(id(op))
    if hit is not None and hit[0] is op:
        return hit[1]
    plan = _ApplyPlan(op)
    if len(_PLANS) > 8:
        _PLANS.clear()
    _PLANS[id(op)] = (op, plan)
    return plan


def opsum_apply(op: OperatorSum, v):
    """Matrix-free ``op @ v`` by bit flips and sign arithmetic.

    Accepts a numpy vector (or a 2-D block of column vectors) or a
    :class:`~clusterlab.circuits.StateVector`; returns the same kind.
    """
    amps = getattr(v, "amplitudes", v)
    amps = np.asarray(amps)
    dim = 1 << op.n_sites
    if amps.shape[0] != dim:
        raise DimensionError(f"vector length {amps.shape[0]} != 2**{op.n_sites}")
    plan = _plan_for(op)
    out = np.zeros(amps.shape, dtype=complex)
    for x, d in plan.blocks:
        w = d * amps if amps.ndim == 1 else d[:, None] * amps
        if x == 0:
            out += w
        else:
            out += w[plan.idx ^ x]
    if amps is not v:
        return type(v)(out, op.n_sites)
    return out


def expectation(op: OperatorSum, v) -> complex:
    amps = np.asarray(getattr(v, "amplitudes", v))
    return complex(np.vdot(amps, opsum_apply(op, amps)))
