"""Command-line front end.

Subcommands: ``synth`` (seeded synthetic observation tables), ``ipca``
(chunked warm-started PCA), ``ewmpca`` (per-observation moving PCA),
``estimate-alpha`` (ML decay fit), ``compare`` (classical PCA vs moving PCA
component cross-statistics).  Data travels as CSV observation tables
(:mod:`streampca.tableio`); every run also writes a JSON sidecar with the
keys ``command, params, alpha, eigenvalues, iterations, diagnostics`` so a
result can be reproduced from its outputs alone.  Diagnostics go to stderr,
data only to files; identical command lines on identical inputs produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date
from pathlib import Path

import numpy as np

from . import synth
from .ewmpca import EwmPCA
from .ewmstats import default_alpha_grid, estimate_alpha
from .ipca import IteratedPCA
from .refine import DivergenceError
from .tableio import (
    ObservationTable,
    format_float,
    read_table,
    write_labeled_matrix,
    write_sidecar,
    write_table,
)

__all__ = ["main", "cross_covariance", "cross_correlation"]

_BY_PREFIX = {"year": 4, "month": 7, "day": 10}


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _pc_names(p: int, prefix: str = "PC") -> list[str]:
    return [f"{prefix}{j + 1}" for j in range(p)]


def _sidecar_path(output: str) -> Path:
    return Path(output).with_suffix(".json")


# ---------------------------------------------------------------------------
# chunking

def parse_chunk_spec(spec: str) -> tuple[str, object]:
    if spec.startswith("chunk="):
        try:
            size = int(spec[len("chunk="):])
        except ValueError:
            raise ValueError(f"bad chunk size in {spec!r}") from None
        if size < 1:
            raise ValueError(f"chunk size must be >= 1, got {size}")
        return "chunk", size
    if spec.startswith("by="):
        unit = spec[len("by="):]
        if unit not in _BY_PREFIX:
            raise ValueError(
                f"unknown chunking unit {unit!r}: expected one of {sorted(_BY_PREFIX)}"
            )
        return "by", unit
    raise ValueError(f"unrecognized chunk spec {spec!r}: use 'chunk=N' or 'by=year|month|day'")


def chunk_bounds(table: ObservationTable, spec: str) -> list[tuple[int, int]]:
    """Half-open row ranges [lo, hi) covering the table in order."""
    kind, value = parse_chunk_spec(spec)
    n = table.n_rows
    if kind == "chunk":
        return [(lo, min(lo + value, n)) for lo in range(0, n, value)]
    if table.timestamps is None:
        raise ValueError(f"chunk spec 'by={value}' needs a timestamp column in the input")
    width = _BY_PREFIX[value]
    keys = []
    for i, ts in enumerate(table.timestamps):
        head = ts[:10]
        try:
            date.fromisoformat(head)
        except ValueError:
            raise ValueError(
                f"line {i + 2}: timestamp {ts!r} is not ISO-8601 (YYYY-MM-DD...)"
            ) from None
        keys.append(ts[:width])
    bounds: list[tuple[int, int]] = []
    lo = 0
    for i in range(1, n):
        if keys[i] != keys[lo]:
            bounds.append((lo, i))
            lo = i
    if n:
        bounds.append((lo, n))
    return bounds


# ---------------------------------------------------------------------------
# component cross-statistics

def cross_covariance(z1, z2) -> np.ndarray:
    """Column-by-column covariance between two component series (n-1 divisor)."""
    z1 = np.asarray(z1, dtype=np.float64)
    z2 = np.asarray(z2, dtype=np.float64)
    if z1.shape != z2.shape or z1.ndim != 2 or z1.shape[0] < 2:
        raise ValueError("component series must share a (n >= 2, p) shape")
    c1 = z1 - z1.mean(axis=0)
    c2 = z2 - z2.mean(axis=0)
    return c1.T @ c2 / (z1.shape[0] - 1)


def cross_correlation(z1, z2) -> np.ndarray:
    cov = cross_covariance(z1, z2)
    s1 = np.sqrt(np.diag(cross_covariance(z1, z1)))
    s2 = np.sqrt(np.diag(cross_covariance(z2, z2)))
    if np.any(s1 == 0.0) or np.any(s2 == 0.0):
        raise ValueError("zero-variance component: correlation undefined")
    return cov / np.outer(s1, s2)


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args) -> None:
    if args.kind == "stationary-gaussian":
        data = synth.stationary_gaussian(args.rows, args.cols, seed=args.seed)
        extra = {}
    elif args.kind == "regime-switch":
        points = _parse_int_list(args.switch_points, "switch-points")
        if not points:
            raise ValueError("regime-switch needs --switch-points")
        seeds = _parse_int_list(args.regime_seeds, "regime-seeds") if args.regime_seeds else None
        data = synth.regime_switch(
            args.rows, args.cols, points, seed=args.seed, regime_seeds=seeds
        )
        extra = {"switch_points": points, "regime_seeds": seeds}
    else:  # volatility-cluster
        data = synth.volatility_cluster(
            args.rows, args.cols, persistence=args.persistence, seed=args.seed
        )
        extra = {"persistence": args.persistence}
    table = ObservationTable(_pc_names(args.cols, prefix="x"), data)
    write_table(args.output, table)
    write_sidecar(
        _sidecar_path(args.output),
        {
            "command": "synth",
            "params": {
                "kind": args.kind,
                "rows": args.rows,
                "cols": args.cols,
                "seed": args.seed,
                **extra,
            },
            "alpha": None,
            "eigenvalues": None,
            "iterations": None,
            "diagnostics": None,
        },
    )
    _info(f"synth: wrote {args.rows} x {args.cols} table to {args.output}")


def cmd_ipca(args) -> None:
    table = read_table(args.input)
    if table.n_rows == 0:
        raise ValueError(f"{args.input}: no observation rows")
    bounds = chunk_bounds(table, args.chunk_spec)
    model = IteratedPCA(tol=args.tol, max_iter_count=args.max_iter)
    pieces: list[np.ndarray] = []
    eigenvalues: list[list[float]] = []
    iterations: list[int | None] = []
    continuity: list[list[float]] = []
    reseeded: list[int] = []
    previous = None
    for k, (lo, hi) in enumerate(bounds):
        chunk = table.data[lo:hi]
        try:
            model.fit(chunk, reseed=args.reseed)
        except DivergenceError as err:
            raise DivergenceError(
                f"chunk {k} (rows {lo + 1}-{hi}) failed to refine: {err}; "
                "rerun with --reseed to restart that chunk from a fresh "
                "eigendecomposition"
            ) from err
        except ValueError as err:
            raise ValueError(f"chunk {k} (rows {lo + 1}-{hi}): {err}") from err
        diag = model.last_fit_diagnostics_
        if k > 0 and diag is None:
            reseeded.append(k)
        if previous is not None:
            continuity.append(
                [float(v) for v in np.einsum("ij,ij->j", previous, model.components_)]
            )
        previous = model.components_
        eigenvalues.append([float(v) for v in model.explained_variance_])
        iterations.append(None if diag is None else diag.iterations)
        pieces.append(model.transform(chunk))
    series = np.vstack(pieces)
    out = ObservationTable(_pc_names(series.shape[1]), series, timestamps=table.timestamps)
    write_table(args.output, out)
    write_sidecar(
        _sidecar_path(args.output),
        {
            "command": "ipca",
            "params": {
                "input": str(args.input),
                "chunk_spec": args.chunk_spec,
                "reseed": bool(args.reseed),
                "tol": args.tol,
                "max_iter": args.max_iter,
            },
            "alpha": None,
            "eigenvalues": eigenvalues,
            "iterations": iterations,
            "diagnostics": {
                "chunk_bounds": [[lo, hi] for lo, hi in bounds],
                "sign_continuity": continuity,
                "reseeded_chunks": reseeded,
            },
        },
    )
    flips = sum(1 for row in continuity for v in row if v <= 0.0)
    _info(
        f"ipca: {len(bounds)} chunk(s), {flips} sign discontinuities, "
        f"wrote {args.output}"
    )


def _iteration_summary(counts: list[int]) -> dict:
    if not counts:
        return {"refinements": 0, "min": None, "max": None, "mean": None}
    return {
        "refinements": len(counts),
        "min": int(min(counts)),
        "max": int(max(counts)),
        "mean": float(np.mean(counts)),
    }


def _resolve_alpha(args, data: np.ndarray) -> tuple[float, dict | None]:
    """Parse --alpha; 'ml' estimates it from the data first."""
    if args.alpha != "ml":
        try:
            value = float(args.alpha)
        except ValueError:
            raise ValueError(
                f"--alpha must be a number in (0, 1) or 'ml', got {args.alpha!r}"
            ) from None
        return value, None
    grid = parse_grid_spec(args.grid) if args.grid else default_alpha_grid()
    alpha, curve = estimate_alpha(data, grid=grid, burn_in=args.burn_in)
    ml = {
        "argmax": alpha,
        "grid": [float(g) for g in grid],
        "loglik": [float(v) for v in curve],
    }
    return alpha, ml


def cmd_ewmpca(args) -> None:
    table = read_table(args.input)
    alpha, ml = _resolve_alpha(args, table.data)
    model = EwmPCA(
        alpha,
        tol=args.tol,
        max_iter_count=args.max_iter,
        warmup_rows=args.warmup,
    )
    series = model.add_all(table.data)
    out = ObservationTable(_pc_names(series.shape[1]), series, timestamps=table.timestamps)
    write_table(args.output, out)
    final = model.eigenvalues()
    write_sidecar(
        _sidecar_path(args.output),
        {
            "command": "ewmpca",
            "params": {
                "input": str(args.input),
                "alpha": args.alpha,
                "warmup": args.warmup,
                "tol": args.tol,
                "max_iter": args.max_iter,
            },
            "alpha": alpha,
            "eigenvalues": None if final is None else [float(v) for v in final],
            "iterations": {
                "observations": int(model.observation_count),
                **_iteration_summary(model.iteration_counts),
            },
            "diagnostics": {"ml": ml},
        },
    )
    _info(f"ewmpca: alpha={alpha}, {series.shape[0]} rows, wrote {args.output}")


def parse_grid_spec(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid spec must be 'start:stop:step', got {spec!r}")
    start, stop, step = (float(s) for s in parts)
    if step <= 0.0:
        raise ValueError(f"grid step must be positive, got {step}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"grid spec {spec!r} produces no points")
    return start + step * np.arange(count)


def cmd_estimate_alpha(args) -> None:
    table = read_table(args.input)
    grid = parse_grid_spec(args.grid) if args.grid else default_alpha_grid()
    alpha, curve = estimate_alpha(table.data, grid=grid, burn_in=args.burn_in)
    with open(args.output, "w") as fh:
        fh.write("alpha,loglik\n")
        for a, v in zip(grid, curve):
            fh.write(f"{format_float(a)},{format_float(v)}\n")
    write_sidecar(
        _sidecar_path(args.output),
        {
            "command": "estimate-alpha",
            "params": {
                "input": str(args.input),
                "grid": args.grid,
                "burn_in": args.burn_in,
            },
            "alpha": alpha,
            "eigenvalues": None,
            "iterations": None,
            "diagnostics": {"grid_size": int(grid.shape[0])},
        },
    )
    print(format_float(alpha))
    _info(f"estimate-alpha: wrote likelihood curve to {args.output}")


def cmd_compare(args) -> None:
    table = read_table(args.input)
    alpha, _ = _resolve_alpha(args, table.data)
    pca = IteratedPCA()
    z_classic = pca.fit_transform(table.data)
    model = EwmPCA(alpha, tol=args.tol, max_iter_count=args.max_iter, warmup_rows=args.warmup)
    z_moving = model.add_all(table.data)
    cov = cross_covariance(z_classic, z_moving)
    corr = cross_correlation(z_classic, z_moving)
    p = cov.shape[0]
    rows = _pc_names(p)
    cols = _pc_names(p, prefix="EWMPC")
    prefix = args.output_prefix
    write_labeled_matrix(f"{prefix}crosscovariance.csv", cov, rows, cols, corner="component")
    write_labeled_matrix(f"{prefix}crosscorrelation.csv", corr, rows, cols, corner="component")
    off = corr[~np.eye(p, dtype=bool)]
    write_sidecar(
        f"{prefix}run.json",
        {
            "command": "compare",
            "params": {
                "input": str(args.input),
                "alpha": args.alpha,
                "warmup": args.warmup,
                "tol": args.tol,
                "max_iter": args.max_iter,
            },
            "alpha": alpha,
            "eigenvalues": [float(v) for v in pca.explained_variance_],
            "iterations": _iteration_summary(model.iteration_counts),
            "diagnostics": {
                "max_abs_offdiag_crosscorr": float(np.max(np.abs(off))) if off.size else None
            },
        },
    )
    _info(f"compare: wrote {prefix}crosscovariance.csv and {prefix}crosscorrelation.csv")


# ---------------------------------------------------------------------------
# parser

def _parse_int_list(text: str | None, name: str) -> list[int]:
    if not text:
        return []
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ValueError(f"--{name} must be a comma-separated list of integers") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streampca",
        description="Streaming PCA toolkit: chunked warm-started PCA and "
        "exponentially weighted moving PCA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a seeded synthetic observation table")
    p.add_argument(
        "--kind",
        required=True,
        choices=["stationary-gaussian", "regime-switch", "volatility-cluster"],
        help="generator family",
    )
    p.add_argument("--rows", type=int, required=True, help="number of observations")
    p.add_argument("--cols", type=int, required=True, help="number of features")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument(
        "--switch-points",
        default=None,
        help="regime-switch: comma-separated row indices where regimes change",
    )
    p.add_argument(
        "--regime-seeds",
        default=None,
        help="regime-switch: comma-separated covariance seeds, one per regime",
    )
    p.add_argument(
        "--persistence",
        type=float,
        default=0.97,
        help="volatility-cluster: AR(1) log-volatility persistence (default 0.97)",
    )
    p.add_argument("--output", required=True, help="CSV path to write")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ipca", help="chunked warm-started PCA over an observation table")
    p.add_argument("input", help="CSV observation table")
    p.add_argument(
        "--chunk-spec",
        required=True,
        help="'chunk=N' for fixed row counts or 'by=year|month|day' "
        "(needs a timestamp column)",
    )
    p.add_argument("--output", required=True, help="component series CSV to write")
    p.add_argument(
        "--reseed",
        action="store_true",
        help="on refinement divergence, restart the chunk from a fresh "
        "eigendecomposition instead of failing",
    )
    p.add_argument("--tol", type=float, default=1e-6, help="refinement tolerance")
    p.add_argument("--max-iter", type=int, default=None, help="refinement iteration cap")
    p.set_defaults(func=cmd_ipca)

    p = sub.add_parser("ewmpca", help="exponentially weighted moving PCA")
    p.add_argument("input", help="CSV observation table")
    p.add_argument(
        "--alpha",
        required=True,
        help="decay in (0, 1), or 'ml' to fit it by maximum likelihood first",
    )
    p.add_argument("--warmup", type=int, default=100, help="warm-up rows (default 100)")
    p.add_argument("--tol", type=float, default=1e-6, help="refinement tolerance")
    p.add_argument("--max-iter", type=int, default=None, help="refinement iteration cap")
    p.add_argument("--grid", default=None, help="alpha grid 'start:stop:step' for --alpha ml")
    p.add_argument("--burn-in", type=int, default=None, help="likelihood burn-in for --alpha ml")
    p.add_argument("--output", required=True, help="component series CSV to write")
    p.set_defaults(func=cmd_ewmpca)

    p = sub.add_parser("estimate-alpha", help="grid-search ML fit of the decay")
    p.add_argument("input", help="CSV observation table")
    p.add_argument(
        "--grid",
        default=None,
        help="'start:stop:step' (default 0.5:0.999:0.001)",
    )
    p.add_argument(
        "--burn-in",
        type=int,
        default=None,
        help="likelihood terms before this observation count are dropped "
        "(default 10 x p)",
    )
    p.add_argument("--output", required=True, help="CSV path for the likelihood curve")
    p.set_defaults(func=cmd_estimate_alpha)

    p = sub.add_parser(
        "compare",
        help="cross-covariance/correlation between classical PCA and moving PCA components",
    )
    p.add_argument("input", help="CSV observation table")
    p.add_argument("--alpha", required=True, help="decay in (0, 1), or 'ml'")
    p.add_argument("--warmup", type=int, default=100, help="warm-up rows (default 100)")
    p.add_argument("--tol", type=float, default=1e-6, help="refinement tolerance")
    p.add_argument("--max-iter", type=int, default=None, help="refinement iteration cap")
    p.add_argument("--grid", default=None, help="alpha grid 'start:stop:step' for --alpha ml")
    p.add_argument("--burn-in", type=int, default=None, help="likelihood burn-in for --alpha ml")
    p.add_argument(
        "--output-prefix",
        required=True,
        help="prefix for crosscovariance.csv / crosscorrelation.csv / run.json",
    )
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, RuntimeError, ArithmeticError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
