"""Command line interface: validate, angles, report, flow.

Exit codes: 0 success, 1 validation/run failure (including unreadable
input files), 2 usage errors.  Result documents print floating point
with 17 significant digits so runs can be reproduced bit-for-bit; the
manifest timestamp is the only field that varies between identical
runs.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .assembly import curvature, degenerate_tet_indices
from .flow import SCHEMES, FlowConfig, run_flow
from .tetra import classify, extended_angles, tet_volume
from .triangulation import (
    CuspedTriangulation,
    TriangulationError,
    build_cusp_matrix,
    edge_degrees,
    gauge_project,
    load_triangulation,
    validate,
)


def _fmt(value) -> str:
    """Serialize a document (nested dict/list/scalars) as JSON text.

    Floats are printed with 17 significant digits; key order is the
    insertion order of the document.
    """
    import json as _json

    if isinstance(value, dict):
        inner = ", ".join(f"{_json.dumps(k)}: {_fmt(v)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if isinstance(value, bool) or value is None:
        return _json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return _json.dumps(value)


def _load(path) -> CuspedTriangulation:
    try:
        return load_triangulation(path)
    except OSError as exc:
        raise _CliFailure(f"cannot read {path}: {exc}") from exc
    except TriangulationError as exc:
        raise _CliFailure(f"{path}: {exc}") from exc


class _CliFailure(Exception):
    """Carries a message for exit code 1."""


def _parse_lengths(text: str, n: int) -> np.ndarray:
    try:
        values = [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise _CliFailure(f"bad --lengths value: {exc}") from exc
    if len(values) != n:
        raise _CliFailure(f"--lengths needs {n} comma-separated values, got {len(values)}")
    return np.asarray(values)


def _cmd_validate(args) -> int:
    T = _load(args.file)
    C = build_cusp_matrix_or_none(T)
    print(f"tets: {T.num_tets}")
    print(f"edges (N): {T.num_edges}")
    print(f"cusps (s): {T.num_cusps}")
    print(f"edge degrees: {edge_degrees(T).tolist()}")
    if C is not None:
        print(f"rank(C): {np.linalg.matrix_rank(C)}")
    try:
        validate(T)
    except TriangulationError as exc:
        print(f"FAIL: {exc}")
        return 1
    if np.linalg.matrix_rank(C) != T.num_cusps:
        print(f"FAIL: rank(C) != number of cusps")
        return 1
    print("PASS")
    return 0


def build_cusp_matrix_or_none(T):
    try:
        return build_cusp_matrix(T)
    except TriangulationError:
        return None


def _cmd_angles(args) -> int:
    T = _load(args.file)
    validate_or_fail(T, args.file)
    l = _parse_lengths(args.lengths, T.num_edges)
    for i, tet in enumerate(T.tets):
        tl = l[np.asarray(tet.edges)]
        region = classify(tl)
        angles = extended_angles(tl)
        vol = tet_volume(tl)
        angle_text = ", ".join(f"{a:.17g}" for a in angles)
        print(f"tet {i}: {region}  volume={vol:.17g}")
        print(f"  angles (slots 12,13,14,34,24,23): [{angle_text}]")
    return 0


def validate_or_fail(T, path):
    try:
        validate(T)
    except TriangulationError as exc:
        raise _CliFailure(f"{path}: {exc}") from exc


def _cmd_report(args) -> int:
    T = _load(args.file)
    validate_or_fail(T, args.file)
    l = _parse_lengths(args.lengths, T.num_edges)
    state = curvature(T, l, with_laplacian=True)
    doc = {
        "num_edges": T.num_edges,
        "num_cusps": T.num_cusps,
        "lengths": l,
        "curvature": state.K,
        "energy": state.energy,
        "total_volume": state.total_volume,
        "degenerate_tets": degenerate_tet_indices(T, l),
    }
    if state.laplacian is not None:
        eigs = np.linalg.eigvalsh(state.laplacian)
        doc["laplacian_eigenvalues"] = {
            "min": float(eigs[0]),
            "max": float(eigs[-1]),
            "kernel_dimension": int(np.sum(np.abs(eigs) < 1e-9)),
        }
    else:
        doc["laplacian_eigenvalues"] = None
    text = _fmt(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_flow(args) -> int:
    T = _load(args.file)
    validate_or_fail(T, args.file)
    if args.lengths is not None and args.random_init is not None:
        raise _CliFailure("give either --lengths or --random-init, not both")

    cfg = FlowConfig(
        scheme=args.scheme,
        step=args.step,
        tol=args.tol,
        max_steps=args.max_steps,
        trace_every=args.trace_every,
        gauge_fix=not args.no_gauge_fix,
        record_lengths=args.trace_full or args.trace is not None,
    )
    seed = None
    if args.random_init is not None:
        seed = args.random_init
        rng = np.random.default_rng(seed)
        l0 = rng.uniform(-args.range, args.range, T.num_edges)
        l0 = gauge_project(l0, build_cusp_matrix(T))
    elif args.lengths is not None:
        l0 = _parse_lengths(args.lengths, T.num_edges)
    else:
        l0 = np.zeros(T.num_edges)

    result = run_flow(T, l0, cfg)

    if args.trace:
        result.trace.write_csv(args.trace, include_lengths=args.trace_full)

    manifest = {
        "tool": "cuspflow",
        "version": __version__,
        "input": str(args.file),
        "seed": seed,
        "start_time": datetime.now(timezone.utc).isoformat(),
        "config": {
            "scheme": cfg.scheme,
            "step": cfg.step,
            "tol": cfg.tol,
            "max_steps": cfg.max_steps,
            "trace_every": cfg.trace_every,
            "gauge_fix": cfg.gauge_fix,
        },
    }
    doc = {
        "manifest": manifest,
        "converged": result.converged,
        "aborted": result.aborted,
        "diagnostic": result.diagnostic,
        "steps_taken": result.steps_taken,
        "final_curvature_norm": result.final_curvature_norm,
        "final_volume": result.final_volume,
        "final_energy": result.final_energy,
        "gauge_drift": result.gauge_drift,
        "final_lengths": result.final_l,
    }
    text = _fmt(doc)
    if args.result:
        with open(args.result, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if result.aborted:
        print(f"aborted: {result.diagnostic}", file=sys.stderr)
        return 1
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cuspflow",
        description="Find complete hyperbolic metrics on ideally triangulated "
                    "cusped 3-manifolds by discrete curvature flow.")
    parser.add_argument("--version", action="version", version=f"cuspflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a triangulation file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("angles", help="per-tet angles, region class, and volume")
    p.add_argument("file")
    p.add_argument("--lengths", required=True, help="comma-separated edge lengths")
    p.set_defaults(func=_cmd_angles)

    p = sub.add_parser("report", help="curvature/energy/volume report at given lengths")
    p.add_argument("file")
    p.add_argument("--lengths", required=True, help="comma-separated edge lengths")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("flow", help="run the curvature flow")
    p.add_argument("file")
    p.add_argument("--lengths", help="comma-separated initial edge lengths")
    p.add_argument("--random-init", type=int, metavar="SEED",
                   help="draw initial lengths uniformly from [-range, range] "
                        "with this seed, then gauge-project")
    p.add_argument("--range", type=float, default=1.0)
    p.add_argument("--scheme", choices=SCHEMES, default="newton-hybrid")
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--no-gauge-fix", action="store_true",
                   help="do not project the initial lengths onto Ker(C)")
    p.add_argument("--trace", help="write a CSV trace here")
    p.add_argument("--trace-full", action="store_true",
                   help="append the full length vector to each trace row")
    p.add_argument("--result", help="write the JSON result document here")
    p.set_defaults(func=_cmd_flow)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
