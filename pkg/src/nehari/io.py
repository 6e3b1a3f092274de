"""File formats, deterministic serialization, and run manifests.

Floats are written with 17 significant digits so that every output
round-trips exactly and repeated runs with the same seed produce
byte-identical files.  Writes go through a temp file plus rename.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import __version__
from .errors import ConfigError
from .graph import WeightedGraph
from .nonlinearity import Nonlinearity, power_nonlinearity
from .solver import GroundStateResult, SolverConfig
from .spectral import SpectralData

_SOLVER_KEYS = {
    "tol_grad",
    "tol_inner",
    "max_outer_iters",
    "max_inner_iters",
    "n_starts",
    "seed",
    "threads",
    "split_tol",
}


def format_float(x: float) -> str:
    if x != x:
        return "NaN"
    if x == float("inf"):
        return "Infinity"
    if x == float("-inf"):
        return "-Infinity"
    return f"{x:.17g}"


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON with fixed float formatting (17 significant digits)."""

    def render(node, depth):
        pad = " " * (indent * depth)
        pad_in = " " * (indent * (depth + 1))
        if isinstance(node, dict):
            if not node:
                return "{}"
            items = [
                f"{pad_in}{json.dumps(str(k))}: {render(v, depth + 1)}" for k, v in node.items()
            ]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(node, (list, tuple)):
            if not len(node):
                return "[]"
            items = [f"{pad_in}{render(v, depth + 1)}" for v in node]
            return "[\n" + ",\n".join(items) + "\n" + pad + "]"
        if isinstance(node, bool):
            return "true" if node else "false"
        if isinstance(node, (np.floating, float)):
            return format_float(float(node))
        if isinstance(node, (np.integer, int)):
            return str(int(node))
        if node is None:
            return "null"
        if isinstance(node, str):
            return json.dumps(node)
        if isinstance(node, np.ndarray):
            return render(node.tolist(), depth)
        raise TypeError(f"cannot serialize {type(node)!r}")

    return render(obj, 0) + "\n"


def write_text_atomic(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------------------
# graph schema


def parse_graph_obj(obj, source: str = "<graph>") -> WeightedGraph:
    """Strict parse of the graph JSON schema.

    Top level holds exactly "vertices" and "edges"; each vertex carries
    "id", "m", and optionally one of "c" or "V"; each edge carries "u",
    "v", "b" with b > 0.  Unknown fields and duplicate edges are
    rejected.
    """
    if not isinstance(obj, dict):
        raise ConfigError(f"{source}: graph document must be a JSON object")
    extra = set(obj) - {"vertices", "edges"}
    if extra:
        raise ConfigError(f"{source}: unknown top-level fields {sorted(extra)}")
    if "vertices" not in obj or "edges" not in obj:
        raise ConfigError(f"{source}: graph document needs 'vertices' and 'edges'")

    ids, ms, cs = [], [], []
    for i, vtx in enumerate(obj["vertices"]):
        where = f"{source}: vertices[{i}]"
        if not isinstance(vtx, dict):
            raise ConfigError(f"{where} must be an object")
        extra = set(vtx) - {"id", "m", "c", "V"}
        if extra:
            raise ConfigError(f"{where}: unknown fields {sorted(extra)}")
        if "id" not in vtx or "m" not in vtx:
            raise ConfigError(f"{where}: 'id' and 'm' are required")
        vid = vtx["id"]
        if isinstance(vid, bool) or not isinstance(vid, (int, str)):
            raise ConfigError(f"{where}: id must be a string or integer")
        m = _number(vtx["m"], f"{where}.m")
        if m <= 0:
            raise ConfigError(f"{where}: m must be > 0")
        if "c" in vtx and "V" in vtx:
            raise ConfigError(f"{where}: 'c' and 'V' are mutually exclusive")
        if "V" in vtx:
            V = _number(vtx["V"], f"{where}.V")
            if V < 1.0:
                raise ConfigError(f"{where}: V must be >= 1")
            c = m * (V - 1.0)
        else:
            c = _number(vtx.get("c", 0.0), f"{where}.c")
            if c < 0:
                raise ConfigError(f"{where}: c must be >= 0")
        ids.append(vid)
        ms.append(m)
        cs.append(c)
    if len(set(ids)) != len(ids):
        raise ConfigError(f"{source}: duplicate vertex ids")
    index = {v: i for i, v in enumerate(ids)}

    n = len(ids)
    rows, cols, vals = [], [], []
    seen = set()
    for i, edge in enumerate(obj["edges"]):
        where = f"{source}: edges[{i}]"
        if not isinstance(edge, dict):
            raise ConfigError(f"{where} must be an object")
        extra = set(edge) - {"u", "v", "b"}
        if extra:
            raise ConfigError(f"{where}: unknown fields {sorted(extra)}")
        if set(edge) != {"u", "v", "b"}:
            raise ConfigError(f"{where}: 'u', 'v', 'b' are required")
        u, v = edge["u"], edge["v"]
        if u not in index or v not in index:
            raise ConfigError(f"{where}: endpoint not in the vertex list")
        if u == v:
            raise ConfigError(f"{where}: self-loops are not allowed")
        b = _number(edge["b"], f"{where}.b")
        if b <= 0:
            raise ConfigError(f"{where}: b must be > 0")
        key = frozenset((u, v))
        if key in seen:
            raise ConfigError(f"{where}: duplicate edge between {u!r} and {v!r}")
        seen.add(key)
        rows += [index[u], index[v]]
        cols += [index[v], index[u]]
        vals += [b, b]
    b_mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return WeightedGraph(tuple(ids), np.array(ms), b_mat, np.array(cs))


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where} must be a number")
    val = float(x)
    if not np.isfinite(val):
        raise ConfigError(f"{where} must be finite")
    return val


def parse_graph_file(path: str | Path) -> WeightedGraph:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read graph file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_graph_obj(obj, source=str(path))


def serialize_graph(g: WeightedGraph) -> dict:
    """Schema dict for a graph; the killing term is the stored primitive."""
    vertices = [
        {"id": v, "m": float(g.m[i]), "c": float(g.c[i])} for i, v in enumerate(g.vertices)
    ]
    edges = []
    coo = sp.triu(g.b, k=1).tocoo()
    order = np.lexsort((coo.col, coo.row))
    for i, j, w in zip(coo.row[order], coo.col[order], coo.data[order]):
        edges.append({"u": g.vertices[int(i)], "v": g.vertices[int(j)], "b": float(w)})
    return {"vertices": vertices, "edges": edges}


# ---------------------------------------------------------------------------
# run configuration


def nonlinearity_from_config(obj, g: WeightedGraph, source: str = "<config>") -> Nonlinearity:
    if not isinstance(obj, dict):
        raise ConfigError(f"{source}: nonlinearity must be an object")
    kind = obj.get("kind")
    if kind != "power":
        raise ConfigError(f"{source}: unknown nonlinearity kind {kind!r} (only 'power' is supported)")
    extra = set(obj) - {"kind", "p", "g"}
    if extra:
        raise ConfigError(f"{source}: unknown nonlinearity fields {sorted(extra)}")
    if "p" not in obj:
        raise ConfigError(f"{source}: nonlinearity needs the exponent 'p'")
    p = _number(obj["p"], f"{source}.p")
    gspec = obj.get("g", {"default": 1.0})
    if isinstance(gspec, (int, float)) and not isinstance(gspec, bool):
        weights = np.full(g.n, float(gspec))
    elif isinstance(gspec, dict):
        extra = set(gspec) - {"default", "overrides"}
        if extra:
            raise ConfigError(f"{source}: unknown g fields {sorted(extra)}")
        default = _number(gspec.get("default", 1.0), f"{source}.g.default")
        weights = np.full(g.n, default)
        for key, val in gspec.get("overrides", {}).items():
            vid = key
            if vid not in g._index:
                # JSON object keys are strings; retry as integer id
                try:
                    vid = int(key)
                except (TypeError, ValueError):
                    pass
            weights[g.index(vid)] = _number(val, f"{source}.g.overrides[{key!r}]")
    else:
        raise ConfigError(f"{source}: g must be a number or an object")
    return power_nonlinearity(p, weights)


def solver_config_from(obj, kappa: int, lam: float, source: str = "<config>") -> SolverConfig:
    obj = obj or {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{source}: solver settings must be an object")
    extra = set(obj) - _SOLVER_KEYS
    if extra:
        raise ConfigError(f"{source}: unknown solver fields {sorted(extra)}")
    kwargs = {}
    for key in _SOLVER_KEYS & set(obj):
        val = obj[key]
        if key in ("max_outer_iters", "max_inner_iters", "n_starts", "seed", "threads"):
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{source}.{key} must be an integer")
            kwargs[key] = val
        else:
            kwargs[key] = _number(val, f"{source}.{key}")
    return SolverConfig(kappa=kappa, lam=lam, **kwargs)


@dataclass(frozen=True)
class RunConfig:
    graph_path: Path
    graph: WeightedGraph
    nonlinearity: Nonlinearity
    solver: SolverConfig
    raw: dict


def parse_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: run config must be an object")
    extra = set(obj) - {"graph", "nonlinearity", "kappa", "lambda", "solver"}
    if extra:
        raise ConfigError(f"{path}: unknown fields {sorted(extra)}")
    for key in ("graph", "nonlinearity", "kappa", "lambda"):
        if key not in obj:
            raise ConfigError(f"{path}: missing required field {key!r}")
    kappa = obj["kappa"]
    if isinstance(kappa, bool) or kappa not in (1, -1):
        raise ConfigError(f"{path}: kappa must be 1 or -1, got {kappa!r}")
    lam = _number(obj["lambda"], f"{path}.lambda")
    graph_path = Path(obj["graph"])
    if not graph_path.is_absolute():
        graph_path = path.parent / graph_path
    g = parse_graph_file(graph_path)
    nl = nonlinearity_from_config(obj["nonlinearity"], g, source=str(path))
    cfg = solver_config_from(obj.get("solver"), kappa, lam, source=str(path))
    return RunConfig(graph_path, g, nl, cfg, obj)


# ---------------------------------------------------------------------------
# result serialization


def result_to_dict(result: GroundStateResult, g: WeightedGraph) -> dict:
    return {
        "status": result.status,
        "kappa": result.kappa,
        "lambda": result.lam,
        "energy": result.energy,
        "level": result.level,
        "residual_grad": result.residual_grad,
        "nehari_residuals": list(result.nehari_residuals),
        "norms": dict(result.norms),
        "vertices": list(g.vertices),
        "u": result.u.values.tolist(),
        "starts": [
            {
                "index": s.index,
                "seed": s.seed,
                "converged": s.converged,
                "collapsed": s.collapsed,
                "level": s.level,
                "residual": s.residual,
                "outer_iters": s.outer_iters,
                "message": s.message,
            }
            for s in result.starts_report
        ],
    }


def spectral_to_dict(spec: SpectralData) -> dict:
    return {
        "eigenvalues": spec.eigenvalues.tolist(),
        "residuals": spec.residuals.tolist(),
        "k": spec.k,
    }


def eigenvectors_to_csv(spec: SpectralData) -> str:
    lines = []
    for row in spec.eigenvectors:
        lines.append(",".join(format_float(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def sweep_to_csv(rows) -> str:
    lines = ["lambda,delta,norm_E,norm_lp,energy,resid,status"]
    for r in rows:
        lines.append(
            ",".join(
                [
                    format_float(r.lam),
                    format_float(r.delta),
                    format_float(r.norm_E),
                    format_float(r.norm_lp),
                    format_float(r.energy),
                    format_float(r.residual),
                    r.status,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def sweep_to_dict(result) -> dict:
    return {
        "target_k": result.target_k,
        "side": result.side,
        "kappa": result.kappa,
        "p": result.p,
        "gap": result.gap,
        "fit": {
            "slope": result.fit.slope,
            "intercept": result.fit.intercept,
            "r_squared": result.fit.r_squared,
        },
        "scaling_ok": result.scaling_ok,
        "rows": [
            {
                "lambda": r.lam,
                "delta": r.delta,
                "norm_E": r.norm_E,
                "norm_lp": r.norm_lp,
                "energy": r.energy,
                "resid": r.residual,
                "status": r.status,
            }
            for r in result.rows
        ],
        "cold_checks": [
            {"row": i, "warm_level": w, "cold_level": c} for i, w, c in result.cold_checks
        ],
    }


def sweep_plot_data(result) -> str:
    """Two-column log10(delta), log10(norm_E) pairs for converged rows."""
    lines = []
    for r in result.rows:
        if r.status == "converged" and r.delta > 0 and r.norm_E > 0:
            lines.append(f"{format_float(np.log10(r.delta))} {format_float(np.log10(r.norm_E))}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# manifests


def build_manifest(config_path, seed, inputs, outputs, config_text: str) -> dict:
    return {
        "tool_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "config_path": str(config_path),
        "config_hash": sha256_text(config_text),
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {str(p): sha256_file(p) for p in outputs},
    }


def verify_manifest(path: str | Path) -> dict:
    """Reload a manifest and recompute every digest; mismatches raise."""
    path = Path(path)
    obj = json.loads(path.read_text())
    for section in ("inputs", "outputs"):
        for name, digest in obj.get(section, {}).items():
            actual = sha256_file(name)
            if actual != digest:
                raise ConfigError(
                    f"manifest digest mismatch for {name}: recorded {digest[:12]}..., "
                    f"recomputed {actual[:12]}..."
                )
    return obj
