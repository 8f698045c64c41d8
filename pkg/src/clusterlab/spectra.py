"""Dense and matrix-free eigensolvers, degeneracy analysis and alpha sweeps.

Dense diagonalization splits the Hilbert space into invariant blocks before
calling LAPACK.  Every term ``P(x, z)`` of a Hamiltonian moves a basis state
``b`` to ``b ^ x``, so the cosets of the GF(2) span of the X masks are
invariant subspaces.  The same holds in the frame rotated by a Hadamard on
every site, which exposes X-string symmetries such as the two sublattice
parities of the cluster chain; the frame with the smaller largest block wins.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import ArgumentError, CapacityError, ConvergenceError
from .pauli import DENSE_LIMIT, OperatorSum, conjugate_by_hadamard, opsum_apply

CLUSTER_TOL = 1e-8
DEFAULT_TOL = 1e-8
MAX_ITERATIONS = 5000


def cluster_values(values: Sequence[float], tol: float = CLUSTER_TOL) -> list[tuple[float, int]]:
    """Group ascending values; neighbours closer than ``tol`` share a cluster."""
    out: list[tuple[float, int]] = []
    start = 0
    vals = list(values)
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] >= tol:
            block = vals[start:i]
            out.append((float(np.mean(block)), len(block)))
            start = i
    return out


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    method: str
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eigenvectors: np.ndarray | None = field(default=None, repr=False)
    seed: int | None = None
    cluster_tol: float = CLUSTER_TOL
    iterations: int = 0

    def __post_init__(self):
        order = np.argsort(self.eigenvalues, kind="stable")
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)[order]
        if len(self.residuals):
            self.residuals = np.asarray(self.residuals)[order]
        if self.eigenvectors is not None:
            self.eigenvectors = self.eigenvectors[:, order]

    @property
    def degeneracy_clusters(self) -> list[tuple[float, int]]:
        return cluster_values(self.eigenvalues, self.cluster_tol)

    @property
    def gap(self) -> float:
        """Distance between the two lowest clusters (nan if only one was computed)."""
        cl = self.degeneracy_clusters
        return cl[1][0] - cl[0][0] if len(cl) > 1 else float("nan")

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def residual_max(self) -> float:
        return float(np.max(self.residuals)) if len(self.residuals) else 0.0

    def ground_state(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise ArgumentError("spectrum was computed without eigenvectors")
        return self.eigenvectors[:, 0]

    def to_dict(self) -> dict:
        gap = self.gap
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "clusters": [[v, m] for v, m in self.degeneracy_clusters],
            "gap": None if math.isnan(gap) else gap,
            "residual_max": self.residual_max,
            "seed": self.seed,
            "method": self.method,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def degeneracy_count(s: SpectrumResult, cluster_tol: float = CLUSTER_TOL) -> int:
    if not len(s.eigenvalues):
        raise ArgumentError("empty spectrum")
    return cluster_values(s.eigenvalues, cluster_tol)[0][1]


# ---------------------------------------------------------------- block structure

def _gf2_basis(masks: Sequence[int]) -> list[int]:
    """Reduced basis of the GF(2) span, each vector with a distinct pivot bit."""
    basis: list[int] = []
    for m in masks:
        for b in basis:
            m = min(m, m ^ b)
        if m:
            basis.append(m)
    return basis


def _enumerate_span(basis: Sequence[int]) -> np.ndarray:
    span = np.zeros(1, dtype=np.int64)
    for b in basis:
        span = np.concatenate([span, span ^ b])
    return np.sort(span)


def _hadamard_frame(h: OperatorSum) -> OperatorSum:
    for s in range(1, h.n_sites + 1):
        h = conjugate_by_hadamard(h, s)
    return h


def _block_layout(h: OperatorSum):
    """Return (frame_op, rotated?, list of index arrays) with the smallest blocks."""
    best = None
    for rotated in (False, True):
        op = _hadamard_frame(h) if rotated else h
        basis = _gf2_basis([x for x, _ in op.terms if x])
        size = 1 << len(basis)
        if best is None or size < best[0]:
            best = (size, rotated, op, basis)
    size, rotated, op, basis = best
    n = h.n_sites
    span = _enumerate_span(basis)
    seen = np.zeros(1 << n, dtype=bool)
    blocks = []
    for r in range(1 << n):
        if not seen[r]:
            idx = np.sort(span ^ r)
            seen[idx] = True
            blocks.append(idx)
    return op, rotated, blocks


def _block_matrix(op: OperatorSum, idx: np.ndarray, real: bool) -> np.ndarray:
    from .pauli import _diag_block

    dim = len(idx)
    pos = np.full(1 << op.n_sites, -1, dtype=np.int64)
    pos[idx] = np.arange(dim)
    mat = np.zeros((dim, dim), dtype=float if real else complex)
    for x, zs, cs in op._grouped():
        d = _diag_block(idx, zs, cs)
        cols = np.arange(dim)
        rows = pos[idx ^ x]
        mat[rows, cols] += d.real if real else d
    return mat


def _is_real(op: OperatorSum) -> bool:
    for x, zs, cs in op._grouped():
        if np.any(np.abs(cs.imag) > 0):
            return False
    return True


def _walsh_hadamard(vecs: np.ndarray, n: int) -> np.ndarray:
    """Apply a Hadamard on every site to each column."""
    out = vecs.reshape((2,) * n + vecs.shape[1:]).astype(complex)
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    for ax in range(n):
        out = np.moveaxis(np.tensordot(h, out, axes=([1], [ax])), 0, ax)
    return out.reshape(vecs.shape)


def diagonalize_dense(h: OperatorSum, k: int | None = None, vectors: bool = False,
                      split: bool = True) -> SpectrumResult:
    """Full (or lowest ``k``) spectrum by dense Hermitian diagonalization.

    Residuals are computed whenever eigenvectors are requested.
    """
    if h.n_sites > DENSE_LIMIT:
        raise CapacityError(f"{h.n_sites} sites exceeds dense limit {DENSE_LIMIT}")
    if not h.is_hermitian():
        raise ArgumentError("dense diagonalization needs a Hermitian operator")
    h = h.real()
    n = h.n_sites
    if split:
        op, rotated, blocks = _block_layout(h)
    else:
        op, rotated, blocks = h, False, [np.arange(1 << n)]
    real = _is_real(op)
    vals, vecs_parts = [], []
    for idx in blocks:
        mat = _block_matrix(op, idx, real)
        want = len(idx) if k is None else min(k, len(idx))
        subset = None if want == len(idx) else (0, want - 1)
        if vectors:
            w, v = sla.eigh(mat, subset_by_index=subset, driver="evr" if subset else None)
            full = np.zeros((1 << n, v.shape[1]), dtype=v.dtype)
            full[idx] = v
            vecs_parts.append(full)
        else:
            w = sla.eigh(mat, eigvals_only=True, subset_by_index=subset, driver="evr" if subset else None)
        vals.append(w)
    eig = np.concatenate(vals)
    order = np.argsort(eig, kind="stable")
    if k is not None:
        order = order[:k]
    eig = eig[order]
    evecs, res = None, np.zeros(0)
    if vectors:
        evecs = np.concatenate(vecs_parts, axis=1)[:, order]
        if rotated:
            evecs = _walsh_hadamard(evecs, n)
        hv = opsum_apply(h, evecs)
        res = np.linalg.norm(hv - evecs * eig[None, :], axis=0)
    return SpectrumResult(eig, "dense", res, evecs)


# ---------------------------------------------------------------- iterative

def ground_subspace(h: OperatorSum, k: int = 1, tol: float = DEFAULT_TOL, seed: int = 0,
                    block_size: int | None = None, krylov_dim: int | None = None,
                    max_iterations: int = MAX_ITERATIONS) -> SpectrumResult:
    """Lowest ``k`` eigenpairs by restarted block Lanczos.

    The Krylov basis is fully reorthogonalized (two Gram-Schmidt passes) and
    restarted from the current Ritz block.  ``h`` is accessed only through
    :func:`opsum_apply`; ``max_iterations`` bounds the number of block
    matrix-vector products.
    """
    if k < 1:
        raise ArgumentError("k must be at least 1")
    if not h.is_hermitian():
        raise ArgumentError("iterative solver needs a Hermitian operator")
    h = h.real()
    dim = 1 << h.n_sites
    real = _is_real(h)
    dtype = float if real else complex
    b = block_size or (k + 4)
    b = min(b, dim)
    kdim = krylov_dim or max(3 * b, 60)
    kdim = min(kdim, dim)
    n_blocks = max(2, kdim // b)

    def apply(block):
        out = opsum_apply(h, block)
        return out.real if real else out

    rng = np.random.default_rng(seed)
    v = rng.standard_normal((dim, b))
    if not real:
        v = v + 1j * rng.standard_normal((dim, b))
    v, _ = np.linalg.qr(v)
    best = math.inf
    matvecs = 0
    restarts = 0
    while matvecs < max_iterations:
        restarts += 1
        qs, hqs = [v], []
        for step in range(n_blocks):
            hv = apply(qs[-1])
            matvecs += 1
            hqs.append(hv)
            if step == n_blocks - 1 or sum(q.shape[1] for q in qs) >= dim:
                break
            w = hv
            basis = np.concatenate(qs, axis=1)
            for _ in range(2):
                w = w - basis @ (basis.conj().T @ w)
            q, r = np.linalg.qr(w)
            keep = np.abs(np.diag(r)) > 1e-10 * max(1.0, np.abs(r).max(initial=0))
            if not np.any(keep):
                break
            qs.append(q[:, keep])
        basis = np.concatenate(qs[: len(hqs)], axis=1)
        hbasis = np.concatenate(hqs, axis=1)
        t = basis.conj().T @ hbasis
        t = (t + t.conj().T) / 2
        theta, y = np.linalg.eigh(t)
        ritz = basis @ y[:, :b]
        hritz = hbasis @ y[:, :b]
        res = np.linalg.norm(hritz - ritz * theta[None, :b], axis=0)
        worst = float(np.max(res[:k]))
        best = min(best, worst)
        if worst < tol:
            return SpectrumResult(theta[:k], "iterative", res[:k], ritz[:, :k], seed=seed,
                                  iterations=restarts)
        v, _ = np.linalg.qr(ritz)
    raise ConvergenceError(f"block Lanczos did not reach tol {tol:g} in {matvecs} block products", best)


def lowest_eigenvalue(h: OperatorSum) -> float:
    if h.n_sites <= 12:
        return diagonalize_dense(h, k=1).ground_energy
    return ground_subspace(h, k=1).ground_energy


def lowest(h: OperatorSum, k: int, vectors: bool = True, method: str = "auto", seed: int = 0,
           tol: float = DEFAULT_TOL) -> SpectrumResult:
    """Lowest ``k`` eigenpairs by the dense or the iterative path."""
    if method == "auto":
        method = "dense" if h.n_sites <= 12 else "iterative"
    if method == "dense":
        return diagonalize_dense(h, k=k, vectors=vectors)
    if method == "iterative":
        return ground_subspace(h, k=k, tol=tol, seed=seed)
    raise ArgumentError(f"unknown method {method!r}")


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepRow:
    alpha: float
    energies: list[float]
    gap: float
    string_order: float
    error: str | None = None


@dataclass
class SweepTable:
    grid: list[float]
    m: int
    rows: list[SweepRow]
    string_pair: tuple[int, int] | None = None
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        if name == "alpha":
            return np.array([r.alpha for r in self.rows])
        if name == "gap":
            return np.array([r.gap for r in self.rows])
        if name == "string_order":
            return np.array([r.string_order for r in self.rows])
        if name.startswith("e"):
            i = int(name[1:])
            return np.array([r.energies[i] for r in self.rows])
        raise KeyError(name)

    def header(self) -> list[str]:
        return ["alpha"] + [f"e{i}" for i in range(self.m)] + ["gap", "string_order"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for r in self.rows:
            w.writerow([repr(float(r.alpha))] + [repr(float(e)) for e in r.energies]
                       + [repr(float(r.gap)), repr(float(r.string_order))])
        return buf.getvalue()


def default_grid(points: int = 101) -> list[float]:
    if points < 1:
        raise ArgumentError("grid needs at least one point")
    return [float(a) for a in np.linspace(0.0, 1.0, points)] if points > 1 else [0.0]


def resolve_jobs(jobs: int | None) -> int:
    """Worker count: explicit value, else ``CLUSTERLAB_JOBS``, else available CPUs."""
    if jobs is None:
        env = os.environ.get("CLUSTERLAB_JOBS")
        jobs = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(jobs))


def sweep_alpha(spec, grid: Sequence[float], m: int = 4, string_pair: tuple[int, int] | None = None,
                method: str = "auto", jobs: int | None = 1, seed: int = 0) -> SweepTable:
    """Lowest ``m`` levels, gap and ground-state string order along ``H(alpha)``.

    ``string_pair`` defaults to ``(first, middle)`` retained stabilizer sites.
    Rows that fail record the error message and NaN values.
    """
    from .models import build, interpolated
    from .symmetry import string_order_vector

    grid = [float(a) for a in grid]
    if not grid:
        raise ArgumentError("empty alpha grid")
    bundle = build(spec)
    sites = bundle.sites
    if string_pair is None:
        string_pair = (sites[0], sites[(len(sites) - 1) // 2])

    def row(alpha: float) -> SweepRow:
        try:
            h = interpolated(spec, alpha)
            res = lowest(h, max(m, 2), vectors=True, method=method, seed=seed)
            cl = cluster_values(res.eigenvalues)
            gap = cl[1][0] - cl[0][0] if len(cl) > 1 else float("nan")
            so = string_order_vector(res.ground_state(), bundle, *string_pair)
            return SweepRow(alpha, [float(e) for e in res.eigenvalues[:m]], gap, so)
        except (ArgumentError, ConvergenceError, CapacityError) as exc:
            return SweepRow(alpha, [float("nan")] * m, float("nan"), float("nan"), str(exc))

    n_jobs = resolve_jobs(jobs)
    if n_jobs == 1:
        rows = [row(a) for a in grid]
    else:
        with ThreadPoolExecutor(n_jobs) as pool:
            rows = list(pool.map(row, grid))
    rows.sort(key=lambda r: r.alpha)
    return SweepTable(grid, m, rows, string_pair, {"seed": seed, "method": method})


def map_ordered(fn: Callable, items: Sequence, jobs: int | None = 1) -> list:
    n_jobs = resolve_jobs(jobs)
    if n_jobs == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(n_jobs) as pool:
        return list(pool.map(fn, items))
