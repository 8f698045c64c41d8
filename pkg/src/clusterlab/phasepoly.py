"""Diagonal gates as multilinear Boolean phase polynomials.

A diagonal unitary acts as ``U|x> = exp(i theta(x)) |x>`` with
``theta(x) = sum_S c_S prod_{j in S} x_j``.  Composition of diagonal gates is
coefficient addition, and conjugating ``X_j`` reduces to the finite
difference ``theta(x ^ e_j) - theta(x)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .errors import ArgumentError, CapacityError, DimensionError
from .pauli import OperatorSum, PauliString, opsum_mul

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12
EXPANSION_LIMIT = 16


def _reduce(angle: float) -> float | None:
    a = math.fmod(angle, TWO_PI)
    if a < 0:
        a += TWO_PI
    if a < ANGLE_TOL or TWO_PI - a < ANGLE_TOL:
        return None
    return a


@dataclass(frozen=True)
class PhasePolynomial:
    """``theta(x) = sum_S coeffs[S] * prod_{j in S} x_j`` with 1-indexed sites."""

    n_sites: int
    coeffs: Mapping[tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_sites < 1:
            raise DimensionError("n_sites must be positive")
        clean: dict[tuple[int, ...], float] = {}
        for key, c in self.coeffs.items():
            key = tuple(sorted(key))
            if len(set(key)) != len(key):
                raise ArgumentError(f"repeated site in monomial {key}")
            for s in key:
                if not 1 <= s <= self.n_sites:
                    raise IndexError(f"site {s} outside 1..{self.n_sites}")
            total = clean.get(key, 0.0) + float(c)
            clean[key] = total
        reduced = {}
        for key, c in clean.items():
            r = _reduce(c)
            if r is not None:
                reduced[key] = r
        object.__setattr__(self, "coeffs", dict(sorted(reduced.items())))

    @classmethod
    def identity(cls, n_sites: int) -> "PhasePolynomial":
        return cls(n_sites, {})

    def is_identity(self) -> bool:
        return not self.coeffs

    def support(self) -> tuple[int, ...]:
        sites = set()
        for key in self.coeffs:
            sites.update(key)
        return tuple(sorted(sites))

    def evaluate(self, x: int) -> float:
        """theta at the basis index ``x`` (site 1 = least significant bit)."""
        total = 0.0
        for key, c in self.coeffs.items():
            if all((x >> (s - 1)) & 1 for s in key):
                total += c
        return total

    def phases(self) -> np.ndarray:
        """theta(x) for every basis index, as a length ``2**n`` array."""
        idx = np.arange(1 << self.n_sites, dtype=np.int64)
        theta = np.zeros(idx.shape)
        for key, c in self.coeffs.items():
            mask = sum(1 << (s - 1) for s in key)
            theta += c * ((idx & mask) == mask)
        return theta

    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.phases())

    def __add__(self, other: "PhasePolynomial") -> "PhasePolynomial":
        return compose(self, other)

    def __neg__(self) -> "PhasePolynomial":
        return negate(self)

    def to_json(self) -> str:
        return json.dumps({",".join(map(str, k)): c for k, c in self.coeffs.items()})

    @classmethod
    def from_json(cls, text: str, n_sites: int) -> "PhasePolynomial":
        raw = json.loads(text)
        return cls(n_sites, {_parse_key(k): float(v) for k, v in raw.items()})


def _parse_key(k: str) -> tuple[int, ...]:
    k = k.strip()
    return tuple(int(t) for t in k.split(",")) if k else ()


_ARITY = {"CZ": 2, "CP": 2, "CCZ": 3, "ZROT": 1, "ZZ": 2}


def from_gate(kind: str, sites: Sequence[int], n_sites: int, angle: float | None = None,
              order: int | None = None) -> PhasePolynomial:
    """Phase polynomial of a diagonal gate.

    ``ZROT(phi) = exp(-i phi/2 Z)`` and ``ZZ(phi) = exp(-i phi/4 Z Z)``; their
    polynomials follow from substituting ``Z = 1 - 2x``.
    """
    kind = kind.upper()
    sites = tuple(int(s) for s in sites)
    if len(set(sites)) != len(sites):
        raise ArgumentError(f"repeated site in {sites}")
    if kind in ("CNZ", "CNP"):
        if order is not None and len(sites) != order + 1:
            raise ArgumentError(f"{kind} of order {order} needs {order + 1} sites, got {len(sites)}")
        if len(sites) < 2:
            raise ArgumentError(f"{kind} needs at least two sites")
    elif kind in _ARITY:
        if len(sites) != _ARITY[kind]:
            raise ArgumentError(f"{kind} acts on {_ARITY[kind]} sites, got {len(sites)}")
    else:
        raise ArgumentError(f"no phase polynomial for gate kind {kind!r}")
    needs_angle = kind in ("CP", "CNP", "ZROT", "ZZ")
    if needs_angle and angle is None:
        raise ArgumentError(f"{kind} requires an angle")

    if kind in ("CZ", "CCZ", "CNZ"):
        return PhasePolynomial(n_sites, {sites: math.pi})
    if kind in ("CP", "CNP"):
        return PhasePolynomial(n_sites, {sites: angle})
    if kind == "ZROT":
        (a,) = sites
        return PhasePolynomial(n_sites, {(): -angle / 2, (a,): angle})
    a, b = sites
    return PhasePolynomial(
        n_sites, {(): -angle / 4, (a,): angle / 2, (b,): angle / 2, (a, b): -angle}
    )


def compose(p: PhasePolynomial, q: PhasePolynomial) -> PhasePolynomial:
    if p.n_sites != q.n_sites:
        raise DimensionError(f"{p.n_sites} vs {q.n_sites} sites")
    acc = dict(p.coeffs)
    for k, c in q.coeffs.items():
        acc[k] = acc.get(k, 0.0) + c
    return PhasePolynomial(p.n_sites, acc)


def compose_all(polys: Sequence[PhasePolynomial], n_sites: int) -> PhasePolynomial:
    acc: dict[tuple[int, ...], float] = {}
    for p in polys:
        if p.n_sites != n_sites:
            raise DimensionError(f"{p.n_sites} vs {n_sites} sites")
        for k, c in p.coeffs.items():
            acc[k] = acc.get(k, 0.0) + c
    return PhasePolynomial(n_sites, acc)


def negate(p: PhasePolynomial) -> PhasePolynomial:
    return PhasePolynomial(p.n_sites, {k: -c for k, c in p.coeffs.items()})


def delta(p: PhasePolynomial, j: int) -> PhasePolynomial:
    """``theta(x ^ e_j) - theta(x)`` as a polynomial.

    A monomial ``c x_j m`` becomes ``c m - 2 c x_j m``.  The ``x_j`` part
    vanishes mod 2pi exactly when ``2c`` is a multiple of 2pi (CZ-type gates).
    """
    if not 1 <= j <= p.n_sites:
        raise IndexError(f"site {j} outside 1..{p.n_sites}")
    acc: dict[tuple[int, ...], float] = {}
    for key, c in p.coeffs.items():
        if j not in key:
            continue
        rest = tuple(s for s in key if s != j)
        acc[rest] = acc.get(rest, 0.0) + c
        acc[key] = acc.get(key, 0.0) - 2 * c
    return PhasePolynomial(p.n_sites, acc)


def exp_to_opsum(p: PhasePolynomial) -> OperatorSum:
    """``exp(i theta)`` as an exact combination of Z monomials.

    Uses ``exp(i c m_S) = I + (e^{ic} - 1) prod_{j in S} (I - Z_j)/2``.
    """
    support = p.support()
    if len(support) > EXPANSION_LIMIT:
        raise CapacityError(
            f"diagonal support of {len(support)} sites exceeds expansion limit {EXPANSION_LIMIT}"
        )
    acc: dict[int, complex] = {0: 1.0 + 0j}
    for key, c in p.coeffs.items():
        w = complex(np.exp(1j * c)) - 1.0
        if not key:
            acc = {z: v * (1.0 + w) for z, v in acc.items()}
            continue
        factor = {0: 1.0 + 0j}
        scale = w / (1 << len(key))
        bits = [1 << (s - 1) for s in key]
        for r in range(len(bits) + 1):
            for sub in combinations(bits, r):
                m = sum(sub)
                factor[m] = factor.get(m, 0) + scale * (-1) ** r
        nxt: dict[int, complex] = {}
        for za, va in acc.items():
            for zb, vb in factor.items():
                z = za ^ zb
                nxt[z] = nxt.get(z, 0) + va * vb
        acc = {z: v for z, v in nxt.items() if abs(v) >= 1e-15}
    return OperatorSum({(0, z): v for z, v in acc.items()}, p.n_sites)


def conjugate_x(p: PhasePolynomial, j: int) -> OperatorSum:
    """``U X_j U^dagger = X_j exp(i delta_j)`` for the diagonal gate ``U`` of ``p``."""
    d = exp_to_opsum(delta(p, j))
    xj = OperatorSum.from_pauli(PauliString.single("X", j, p.n_sites))
    return opsum_mul(xj, d)


def conjugate_diagonal(p: PhasePolynomial, op: OperatorSum) -> OperatorSum:
    """``U op U^dagger`` for an arbitrary Pauli sum ``op``.

    Each term ``P(x, z)`` maps to ``P(x, z)`` times ``exp(i delta_x)`` where
    ``delta_x(y) = theta(y ^ x) - theta(y)``; Z parts commute with ``U``.
    """
    out: dict[tuple[int, int], complex] = {}
    cache: dict[int, OperatorSum] = {}
    for pauli, c in op.items():
        if pauli.x not in cache:
            d = PhasePolynomial.identity(p.n_sites)
            shifted = p
            for k in range(p.n_sites):
                if (pauli.x >> k) & 1:
                    step = delta(shifted, k + 1)
                    d = compose(d, step)
                    shifted = compose(shifted, step)
            cache[pauli.x] = exp_to_opsum(d)
        term = opsum_mul(OperatorSum.from_pauli(pauli, c), cache[pauli.x])
        for key, v in term.terms.items():
            out[key] = out.get(key, 0) + v
    return OperatorSum(out, op.n_sites)
