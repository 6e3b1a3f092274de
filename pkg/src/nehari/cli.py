"""Command-line interface: batch runs with reproducible manifests.

Exit codes: 0 success, 1 failed validation or audit witness, 2 bad
configuration or input, 3 eigensolver problem, 4 variational solver
failure.
"""

from __future__ import annotations

import functools
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import __version__, io
from .errors import AuditError, ConfigError, GraphError, SolverError, SpectralError
from .experiments import audit_inequalities, bifurcation_sweep
from .graph import (
    check_summability,
    diameter,
    example_line_graph,
    path_graph,
    random_connected_graph,
    single_vertex_graph,
    validate_graph,
)
from .solver import ground_state
from .spectral import assemble, eigensolve

EXIT_CONFIG = 2
EXIT_SPECTRAL = 3
EXIT_SOLVER = 4


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ConfigError, GraphError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except SpectralError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_SPECTRAL)
        except (SolverError, AuditError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_SOLVER)

    return wrapper


@click.group()
@click.version_option(__version__)
@click.option("--seed", type=int, default=None, help="Override the configured PRNG seed.")
@click.option(
    "--threads",
    type=int,
    default=None,
    envvar="NEHARI_THREADS",
    help="Worker threads for multi-starts (falls back to NEHARI_THREADS).",
)
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    help="Directory for output files.",
)
@click.option("--tol", type=float, default=None, help="Override the gradient residual tolerance.")
@click.pass_context
def main(ctx, seed, threads, out_dir, tol):
    """Nehari-manifold ground states of the discrete NLS equation on graphs."""
    ctx.obj = {"seed": seed, "threads": threads, "out_dir": out_dir, "tol": tol}


def _apply_overrides(cfg, ctx_obj):
    if ctx_obj.get("seed") is not None:
        cfg = replace(cfg, seed=ctx_obj["seed"])
    if ctx_obj.get("threads") is not None:
        cfg = replace(cfg, threads=max(1, ctx_obj["threads"]))
    if ctx_obj.get("tol") is not None:
        cfg = replace(cfg, tol_grad=ctx_obj["tol"])
    return cfg


@main.command()
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def validate(graph_path):
    """Validate a graph file; exit 0 iff every check passes."""
    try:
        g = io.parse_graph_file(graph_path)
        report = validate_graph(g)
        click.echo(str(report))
        if report.passed and report["connected"].ok:
            diam = diameter(g)
            total = check_summability(g)
            click.echo(f"[INFO] diameter = {diam:.12g} (finite => canonically compactifiable)")
            click.echo(f"[INFO] pair summability = {total:.12g} (finite => canonically compactifiable)")
        sys.exit(0 if report.passed else 1)
    except (ConfigError, GraphError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@main.command()
@click.argument("graph_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-k", "n_pairs", type=int, required=True, help="Number of eigenpairs.")
@click.option(
    "--method",
    type=click.Choice(["auto", "dense", "iterative", "arpack", "subspace"]),
    default="auto",
)
@click.option("--vectors", "vectors_path", type=click.Path(path_type=Path), default=None,
              help="Also write eigenvectors as columnar CSV.")
@click.option("-o", "out_name", default=None, help="Output file name (JSON).")
@click.pass_context
@_handle_errors
def spectrum(ctx, graph_path, n_pairs, method, vectors_path, out_name):
    """Solve the generalized eigenproblem and write the spectral data."""
    g = io.parse_graph_file(graph_path)
    seed = ctx.obj.get("seed") or 0
    spec = eigensolve(assemble(g), n_pairs, method=method, seed=seed)
    out = ctx.obj["out_dir"] / (out_name or f"{graph_path.stem}_spectrum.json")
    io.write_text_atomic(out, io.dumps(io.spectral_to_dict(spec)))
    click.echo(f"wrote {out}")
    if vectors_path is not None:
        path = vectors_path if vectors_path.is_absolute() else ctx.obj["out_dir"] / vectors_path
        io.write_text_atomic(path, io.eigenvectors_to_csv(spec))
        click.echo(f"wrote {path}")


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-o", "out_name", default=None, help="Result file name (JSON).")
@click.pass_context
@_handle_errors
def solve(ctx, config_path, out_name):
    """Compute a ground state from a run configuration file."""
    run = io.parse_run_config(config_path)
    cfg = _apply_overrides(run.solver, ctx.obj)
    result = ground_state(run.graph, run.nonlinearity, cfg)
    out = ctx.obj["out_dir"] / (out_name or f"{config_path.stem}_result.json")
    io.write_text_atomic(out, io.dumps(io.result_to_dict(result, run.graph)))
    manifest = io.build_manifest(
        config_path, cfg.seed, [run.graph_path, config_path], [out], config_path.read_text()
    )
    manifest_path = out.with_suffix(".manifest.json")
    io.write_text_atomic(manifest_path, io.dumps(manifest))
    click.echo(
        f"status={result.status} energy={result.energy:.12g} level={result.level:.12g} "
        f"residual={result.residual_grad:.3e}"
    )
    click.echo(f"wrote {out}")
    click.echo(f"wrote {manifest_path}")


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-o", "out_base", default=None, help="Base name for the output files.")
@click.pass_context
@_handle_errors
def sweep(ctx, config_path, out_base):
    """Run a bifurcation sweep toward a spectral point."""
    import json

    path = Path(config_path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: sweep config must be an object")
    allowed = {"graph", "nonlinearity", "kappa", "target_k", "side", "n_points", "solver",
               "warm_start", "cold_check"}
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(f"{path}: unknown fields {sorted(extra)}")
    for key in ("graph", "nonlinearity", "kappa", "target_k", "side"):
        if key not in obj:
            raise ConfigError(f"{path}: missing required field {key!r}")
    kappa = obj["kappa"]
    if isinstance(kappa, bool) or kappa not in (1, -1):
        raise ConfigError(f"{path}: kappa must be 1 or -1")
    target_k = obj["target_k"]
    if isinstance(target_k, bool) or not isinstance(target_k, int) or target_k < 1:
        raise ConfigError(f"{path}: target_k must be a positive integer")
    n_points = obj.get("n_points", 10)
    if isinstance(n_points, bool) or not isinstance(n_points, int) or n_points < 1:
        raise ConfigError(f"{path}: n_points must be a positive integer (malformed grid)")
    graph_path = Path(obj["graph"])
    if not graph_path.is_absolute():
        graph_path = path.parent / graph_path
    g = io.parse_graph_file(graph_path)
    nl = io.nonlinearity_from_config(obj["nonlinearity"], g, source=str(path))
    cfg = _apply_overrides(io.solver_config_from(obj.get("solver"), kappa, 0.0, source=str(path)), ctx.obj)
    result = bifurcation_sweep(
        g,
        nl,
        kappa,
        target_k,
        obj["side"],
        n_points=n_points,
        solver=cfg,
        warm_start=obj.get("warm_start", True),
        cold_check=obj.get("cold_check", 3),
        seed=cfg.seed,
    )
    base = out_base or f"{path.stem}_sweep"
    out_dir = ctx.obj["out_dir"]
    csv_path = io.write_text_atomic(out_dir / f"{base}.csv", io.sweep_to_csv(result.rows))
    json_path = io.write_text_atomic(out_dir / f"{base}.json", io.dumps(io.sweep_to_dict(result)))
    plot_path = io.write_text_atomic(out_dir / f"{base}_loglog.dat", io.sweep_plot_data(result))
    manifest = io.build_manifest(
        path, cfg.seed, [graph_path, path], [csv_path, json_path, plot_path], path.read_text()
    )
    manifest_path = out_dir / f"{base}.manifest.json"
    io.write_text_atomic(manifest_path, io.dumps(manifest))
    click.echo(
        f"slope={result.fit.slope:.6g} r2={result.fit.r_squared:.6g} scaling_ok={result.scaling_ok}"
    )
    for p in (csv_path, json_path, plot_path, manifest_path):
        click.echo(f"wrote {p}")


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--lambdas", "-l", required=True,
              help="Comma-separated off-spectrum lambda values, e.g. 0.5,1.5,3.0")
@click.option("--n-random", type=int, default=100, show_default=True)
@click.option("--p", "p_exp", type=float, default=4.0, show_default=True,
              help="Power exponent used for the structural checks.")
@click.pass_context
@_handle_errors
def audit(ctx, graph_path, lambdas, n_random, p_exp):
    """Audit the proven inequalities on random vectors; exit 4 on a witness."""
    from .nonlinearity import power_nonlinearity

    g = io.parse_graph_file(graph_path)
    try:
        lam_list = [float(x) for x in lambdas.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --lambdas value: {exc}") from exc
    if not lam_list:
        raise ConfigError("--lambdas must contain at least one value")
    nl = power_nonlinearity(p_exp)
    seed = ctx.obj.get("seed") or 0
    report = audit_inequalities(g, nl, lam_list, n_random=n_random, seed=seed)
    click.echo(
        f"all inequalities hold: form bounds {report.form_bound_checks}, "
        f"embeddings {report.embedding_checks}, oscillation {report.poincare_checks}, "
        f"interpolation {report.interpolation_checks} (total {report.total} checks)"
    )


@main.command()
@click.argument("name", type=click.Choice(["line", "path", "single", "two", "random"]))
@click.option("--out", "out_name", default=None, help="Output file name.")
@click.option("--n", type=int, default=10, show_default=True, help="Vertex count (path/random).")
@click.option("--n-minus", type=int, default=5, show_default=True)
@click.option("--n-plus", type=int, default=5, show_default=True)
@click.option("--m", "m_value", type=float, default=1.0, show_default=True)
@click.option("--c", "c_value", type=float, default=0.0, show_default=True)
@click.pass_context
@_handle_errors
def example(ctx, name, out_name, n, n_minus, n_plus, m_value, c_value):
    """Emit a built-in graph (including the half-line example) as JSON."""
    seed = ctx.obj.get("seed") or 0
    if name == "line":
        g = example_line_graph(n_minus, n_plus)
    elif name == "path":
        g = path_graph(n, m=m_value, c=c_value)
    elif name == "single":
        g = single_vertex_graph(m=m_value, c=c_value)
    elif name == "two":
        g = path_graph(2, m=m_value, c=c_value)
    else:
        g = random_connected_graph(n, seed=seed)
    out = ctx.obj["out_dir"] / (out_name or f"{name}_graph.json")
    io.write_text_atomic(out, io.dumps(io.serialize_graph(g)))
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
