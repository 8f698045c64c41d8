"""Command-line front end.

Usage: ``python -m clusterlab <command> [chain flags] [command flags]``.  Exit status: 0 on success, 1 on computation
errors or failed checks, 2 on invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import struct
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .errors import ArgumentError, ClusterLabError
from .models import ChainSpec, build

COMMANDS = ("state", "spectrum", "sweep", "string-order", "verify", "expand", "logicals")
_CHAIN_KEYS = {"sites", "boundary", "model", "order", "angles", "edge_terms"}
_PARAM_KEYS = {"k", "m", "grid", "alphas", "pair", "alpha", "method", "cluster_tol", "tol", "site",
               "poly", "seed", "jobs", "out", "format"}


@dataclass
class RunConfig:
    chain: ChainSpec
    command: str
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        # the destination path is left out so output bytes do not depend on it
        params = {k: v for k, v in self.params.items() if k != "out"}
        return {"command": self.command, "chain": self.chain.to_dict(), "params": params,
                "version": __version__}


def _parse_angles(text: str | None) -> list[float] | None:
    if text is None:
        return None
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    toks = text.replace("\n", ",").replace(" ", ",").split(",")
    return [float(t) for t in toks if t.strip()]


def _parser() -> argparse.ArgumentParser:
    chain = argparse.ArgumentParser(add_help=False)
    g = chain.add_argument_group("chain")
    g.add_argument("--config", help="JSON file with 'chain' and 'params' objects")
    g.add_argument("--model")
    g.add_argument("--sites", type=int)
    g.add_argument("--boundary", choices=("open", "closed"))
    g.add_argument("--edge-terms", dest="edge_terms", choices=("include", "drop"))
    g.add_argument("--order", type=int)
    g.add_argument("--angles", help="comma list or @file")
    g.add_argument("--seed", type=int)
    g.add_argument("--jobs", type=int)
    g.add_argument("--out")
    g.add_argument("--format", choices=("json", "csv", "svg", "bin"))

    p = argparse.ArgumentParser(prog="python -m clusterlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("state", parents=[chain], help="reference cluster state amplitudes")
    sp = sub.add_parser("spectrum", parents=[chain], help="spectrum of the model Hamiltonian")
    sp.add_argument("--k", type=int, help="number of lowest levels (default: all)")
    sp.add_argument("--method", choices=("auto", "dense", "iterative"))
    sp.add_argument("--alpha", type=float, help="use the interpolated Hamiltonian")
    sp.add_argument("--cluster-tol", dest="cluster_tol", type=float)
    sw = sub.add_parser("sweep", parents=[chain], help="alpha sweep of H(alpha)")
    sw.add_argument("--grid", type=int, help="number of uniform points on [0, 1]")
    sw.add_argument("--alphas", help="explicit comma list of alpha values")
    sw.add_argument("--m", type=int)
    sw.add_argument("--pair", help="string order sites i,j")
    sw.add_argument("--method", choices=("auto", "dense", "iterative"))
    so = sub.add_parser("string-order", parents=[chain], help="string order parameter")
    so.add_argument("--pair", help="sites i,j (default: widest retained)")
    so.add_argument("--alpha", type=float, help="use the ground state of H(alpha)")
    sub.add_parser("verify", parents=[chain], help="run all property checks")
    ex = sub.add_parser("expand", parents=[chain], help="Pauli expansion of a stabilizer")
    ex.add_argument("--site", type=int, required=False)
    ex.add_argument("--poly", help="phase polynomial JSON (string or @file) to conjugate X_site by")
    sub.add_parser("logicals", parents=[chain], help="edge logical operators")
    return p


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    args = _parser().parse_args(argv)
    chain: dict[str, Any] = {}
    params: dict[str, Any] = {}
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        for key in raw:
            if key not in ("chain", "params"):
                raise ArgumentError(f"unknown config key {key!r}")
        chain.update(raw.get("chain", {}))
        params.update(raw.get("params", {}))
        for key in params:
            if key not in _PARAM_KEYS:
                raise ArgumentError(f"unknown parameter {key!r}")
    for key in _CHAIN_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            chain[key] = _parse_angles(val) if key == "angles" else val
    for key in _PARAM_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if "sites" not in chain:
        raise ArgumentError("--sites is required")
    chain.setdefault("model", "ZXZ")
    return RunConfig(ChainSpec.from_dict(chain), args.command, params)


def _pair(text, default):
    if text is None:
        return default
    if isinstance(text, str):
        i, j = (int(t) for t in text.split(","))
        return i, j
    return tuple(text)


def _emit(text: str | bytes, out: str | None) -> None:
    if out is None:
        if isinstance(text, bytes):
            sys.stdout.buffer.write(text)
        else:
            sys.stdout.write(text)
        return
    path = Path(out)
    if isinstance(text, bytes):
        path.write_bytes(text)
    else:
        path.write_text(text, newline="\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False, default=_jsonable) + "\n"


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(type(v))


def _clean(x: float):
    return None if x != x else x


def emit_plotdata(table, path: str | None, svg: bool = False, config: dict | None = None) -> None:
    """Write the sweep CSV (and optionally an SVG line chart next to it)."""
    if not table.rows:
        raise ArgumentError("empty sweep table")
    header = f"# {json.dumps(config, sort_keys=True)}\n" if config else ""
    _emit(header + table.to_csv(), path)
    if svg:
        target = Path(path).with_suffix(".svg") if path else None
        _emit(sweep_svg(table), str(target) if target else None)


def sweep_svg(table, width: int = 640, height: int = 400) -> str:
    """Minimal static SVG: energies, gap and string order against alpha."""
    alphas = table.column("alpha")
    series = [(f"e{i}", table.column(f"e{i}")) for i in range(table.m)]
    lo = float(np.nanmin([s.min() for _, s in series]))
    hi = float(np.nanmax([s.max() for _, s in series]))
    span = hi - lo or 1.0
    pad = 40

    def xy(a, e):
        x = pad + (width - 2 * pad) * a
        y = height - pad - (height - 2 * pad) * (e - lo) / span
        return f"{x:.2f},{y:.2f}"

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for name, s in series:
        pts = " ".join(xy(a, e) for a, e in zip(alphas, s) if e == e)
        lines.append(f'<polyline fill="none" stroke="black" stroke-width="1" points="{pts}"><title>{name}</title></polyline>')
    lines.append(f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle">alpha</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> int:
    from . import spectra, symmetry
    from .checks import run_checks
    from .circuits import cluster_state
    from .models import interpolated
    from .pauli import OperatorSum
    from .phasepoly import PhasePolynomial, conjugate_x

    spec, p = cfg.chain, cfg.params
    out, fmt = p.get("out"), p.get("format")
    seed = int(p.get("seed", 0))
    header = cfg.to_dict()

    if cfg.command == "state":
        v = cluster_state(spec)
        if fmt == "bin":
            amps = v.amplitudes
            data = struct.pack(f"<{2 * len(amps)}d", *np.column_stack([amps.real, amps.imag]).ravel())
            _emit(data, out)
        else:
            recs = [{"basis": v.bitstring(i), "re": float(a.real), "im": float(a.imag)}
                    for i, a in enumerate(v.amplitudes)]
            _emit(_dump({"config": header, "amplitudes": recs}), out)
        return 0

    if cfg.command == "spectrum":
        h = interpolated(spec, p["alpha"]) if "alpha" in p else build(spec).hamiltonian
        method = p.get("method", "auto")
        k = p.get("k")
        if method == "iterative" or (method == "auto" and spec.n_sites > 12):
            res = spectra.ground_subspace(h, k=k or 8, seed=seed, tol=p.get("tol", spectra.DEFAULT_TOL))
        else:
            res = spectra.diagonalize_dense(h, k=k, vectors=True)
        if "cluster_tol" in p:
            res.cluster_tol = float(p["cluster_tol"])
        d = res.to_dict()
        d["seed"] = seed
        d["config"] = header
        d["degeneracy"] = spectra.degeneracy_count(res, res.cluster_tol)
        _emit(_dump(d), out)
        return 0

    if cfg.command == "sweep":
        if "alphas" in p:
            try:
                grid = [float(a) for a in str(p["alphas"]).split(",") if a.strip()]
            except ValueError as exc:
                raise ArgumentError(f"bad --alphas list: {exc}") from None
        else:
            grid = spectra.default_grid(int(p.get("grid", 101)))
        pair = _pair(p.get("pair"), None)
        table = spectra.sweep_alpha(spec, grid, m=int(p.get("m", 4)), string_pair=pair,
                                    method=p.get("method", "auto"), jobs=p.get("jobs", None), seed=seed)
        header["params"]["string_pair"] = list(table.string_pair)
        if fmt == "json":
            rows = [{"alpha": r.alpha, "energies": r.energies, "gap": _clean(r.gap),
                     "string_order": _clean(r.string_order), "error": r.error} for r in table.rows]
            _emit(_dump({"config": header, "rows": rows}), out)
        else:
            emit_plotdata(table, out, svg=(fmt == "svg"), config=header)
        return 1 if any(r.error for r in table.rows) else 0

    if cfg.command == "string-order":
        bundle = build(spec)
        i, j = _pair(p.get("pair"), (bundle.sites[0], bundle.sites[-1]))
        if "alpha" in p:
            vec = spectra.lowest(interpolated(spec, p["alpha"]), 2, seed=seed).ground_state()
        else:
            vec = bundle.reference_state.amplitudes
        val = symmetry.string_order_vector(vec, bundle, i, j, return_complex=True)
        _emit(_dump({"config": header, "i": i, "j": j, "value": val.real, "imag": val.imag}), out)
        return 0

    if cfg.command == "verify":
        checks = run_checks(spec)
        recs = [c.to_dict() for c in checks]
        for r in recs:
            if r["residual"] != r["residual"]:
                r["residual"] = None
        _emit(_dump({"config": header, "checks": recs}), out)
        return 0 if all(c.passed for c in checks) else 1

    if cfg.command == "expand":
        n = spec.n_sites
        if "poly" in p:
            text = p["poly"]
            if text.startswith("@"):
                text = Path(text[1:]).read_text()
            poly = PhasePolynomial.from_json(text, n)
            if "site" not in p:
                raise ArgumentError("--poly needs --site")
            op = conjugate_x(poly, int(p["site"]))
            _emit(_dump({"config": header, "polynomial": json.loads(poly.to_json()),
                         "site": int(p["site"]), "terms": op.to_records()}), out)
            return 0
        bundle = build(spec)
        sites = [int(p["site"])] if "site" in p else list(bundle.sites)
        stabs = {str(j): bundle.stabilizer_at(j).to_records() for j in sites}
        _emit(_dump({"config": header, "stabilizers": stabs}), out)
        return 0

    if cfg.command == "logicals":
        lg = symmetry.edge_logicals(spec)
        recs = [{"edge": e, "index": k, "letter": l, "terms": op.to_records()} for e, k, l, op in lg.all()]
        _emit(_dump({"config": header, "logicals": recs}), out)
        return 0

    raise ArgumentError(f"unknown command {cfg.command!r}")  # pragma: no cover


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ArgumentError, ValueError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "kind": "validation"}) + "\n")
        return 2
    try:
        return run(cfg)
    except ArgumentError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "kind": "validation"}) + "\n")
        return 2
    except (ClusterLabError, OSError, IndexError) as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "kind": type(exc).__name__}) + "\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
