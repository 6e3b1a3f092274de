"""Weighted graphs over discrete measure spaces.

A graph is described by symmetric nonnegative edge weights b and a
nonnegative killing term c over a vertex measure m > 0.  The derived
potential V = (c + m)/m is then >= 1, which keeps the Schroedinger form

    q(u) = (1/2) sum_{x,y} b(x,y) (u(y) - u(x))^2 + sum_x m(x) V(x) u(x)^2

bounded below by the squared l^2_m norm.  This module owns construction
and validation, the path metric with edge lengths 1/b, diameters, the
pair-summability constant, the oscillation (Poincare-type) check, the
l^1_m embedding constant, and the half-line example graph with mixed
measure growth used throughout the diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import GraphError
from .reports import CheckResult, ValidationReport

VertexId = int | str


@dataclass(frozen=True)
class WeightedGraph:
    """Immutable weighted graph over a measure space.

    ``vertices`` fixes the global ordering used by every array in the
    package.  ``b`` is stored as a symmetric sparse matrix with zero
    diagonal; ``m`` and ``c`` are per-vertex arrays aligned with
    ``vertices``.  The raw constructor performs only shape checks so that
    deliberately broken graphs can be built for ``validate_graph``; use
    :meth:`from_edges` for checked construction.
    """

    vertices: tuple[VertexId, ...]
    m: np.ndarray
    b: sp.csr_matrix
    c: np.ndarray

    def __post_init__(self):
        n = len(self.vertices)
        m = np.ascontiguousarray(np.asarray(self.m, dtype=float))
        c = np.ascontiguousarray(np.asarray(self.c, dtype=float))
        if m.shape != (n,) or c.shape != (n,):
            raise GraphError("m and c must be per-vertex arrays matching the vertex list")
        b = sp.csr_matrix(self.b, dtype=float, copy=True)
        if b.shape != (n, n):
            raise GraphError(f"edge-weight matrix must be {n}x{n}, got {b.shape}")
        b.eliminate_zeros()
        b.sort_indices()
        m.setflags(write=False)
        c.setflags(write=False)
        b.data.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.vertices)})
        if len(self._index) != n:
            raise GraphError("duplicate vertex identifiers")
        coo = b.tocoo()
        object.__setattr__(self, "_rows", coo.row)
        object.__setattr__(self, "_cols", coo.col)
        object.__setattr__(self, "_vals", coo.data)

    @classmethod
    def from_edges(
        cls,
        vertices: Sequence[VertexId],
        m: float | Sequence[float],
        edges: Iterable[tuple[VertexId, VertexId, float]],
        c: float | Sequence[float] | None = None,
        V: float | Sequence[float] | None = None,
    ) -> "WeightedGraph":
        """Build a graph from an edge list, rejecting malformed input.

        Exactly one of ``c`` and ``V`` may be given; the killing term is
        the stored primitive, so ``V`` is converted via c = m (V - 1) and
        must be >= 1 everywhere.
        """
        verts = tuple(vertices)
        n = len(verts)
        if n < 1:
            raise GraphError("graph needs at least one vertex")
        index = {v: i for i, v in enumerate(verts)}
        if len(index) != n:
            raise GraphError("duplicate vertex identifiers")
        marr = np.broadcast_to(np.asarray(m, dtype=float), (n,)).copy()
        if not np.all(np.isfinite(marr)) or np.any(marr <= 0):
            raise GraphError("vertex measure m must be finite and positive")
        if c is not None and V is not None:
            raise GraphError("give either c or V, not both")
        if V is not None:
            varr = np.broadcast_to(np.asarray(V, dtype=float), (n,)).copy()
            if np.any(varr < 1.0):
                bad = verts[int(np.argmin(varr))]
                raise GraphError(f"V must be >= 1 (vertex {bad!r} has V={varr.min():g})")
            carr = marr * (varr - 1.0)
        elif c is not None:
            carr = np.broadcast_to(np.asarray(c, dtype=float), (n,)).copy()
        else:
            carr = np.zeros(n)
        rows, cols, vals = [], [], []
        seen = set()
        for u, v, w in edges:
            if u not in index or v not in index:
                raise GraphError(f"edge ({u!r}, {v!r}) references an unknown vertex")
            if u == v:
                raise GraphError(f"self-loop at vertex {u!r} is not allowed")
            w = float(w)
            if not np.isfinite(w) or w <= 0:
                raise GraphError(f"edge ({u!r}, {v!r}) must have finite weight b > 0, got {w!r}")
            key = frozenset((u, v))
            if key in seen:
                raise GraphError(f"duplicate edge between {u!r} and {v!r}")
            seen.add(key)
            i, j = index[u], index[v]
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        b = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        return cls(verts, marr, b, carr)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index(self, v: VertexId) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v!r}") from None

    def indices(self, subset: Iterable[VertexId]) -> np.ndarray:
        return np.array([self.index(v) for v in subset], dtype=int)

    @property
    def V(self) -> np.ndarray:
        """Derived potential (c + m)/m."""
        return (self.c + self.m) / self.m

    @property
    def degree_sums(self) -> np.ndarray:
        """Per-vertex sums of incident edge weights."""
        return np.asarray(self.b.sum(axis=1)).ravel()

    def measure(self, subset: Iterable[VertexId] | None = None) -> float:
        if subset is None:
            return float(np.sum(self.m))
        idx = self.indices(subset)
        return float(np.sum(self.m[idx]))

    def form_value(self, values: np.ndarray) -> float:
        """Energy form q(u) by direct summation over stored edge entries.

        Each undirected edge appears twice in the symmetric storage, so the
        1/2 prefactor makes it count once.  Kept independent of the matrix
        assembly in :mod:`nehari.spectral` so the two can cross-check.
        """
        values = np.asarray(values, dtype=float)
        diff = values[self._cols] - values[self._rows]
        edge_part = 0.5 * float(np.dot(self._vals, diff * diff))
        vertex_part = float(np.dot((self.c + self.m), values * values))
        return edge_part + vertex_part

    def form_inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """Bilinear form q(u, v) by direct summation."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        du = u[self._cols] - u[self._rows]
        dv = v[self._cols] - v[self._rows]
        return 0.5 * float(np.dot(self._vals, du * dv)) + float(np.dot((self.c + self.m), u * v))

    def _length_matrix(self) -> sp.csr_matrix:
        lengths = self.b.copy()
        lengths.data = 1.0 / lengths.data
        return lengths


@dataclass(frozen=True)
class GraphFunction:
    """Real-valued vertex function bound to a graph."""

    graph: WeightedGraph
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if vals.shape != (self.graph.n,):
            raise GraphError(f"expected {self.graph.n} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise GraphError("vertex function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def lp_norm(self, p: float) -> float:
        return lp_norm(self.graph.m, self.values, p)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.graph.n else 0.0

    def energy_norm(self) -> float:
        return float(np.sqrt(self.graph.form_value(self.values)))

    def m_inner(self, other: "GraphFunction | np.ndarray") -> float:
        return float(np.dot(self.graph.m * self.values, _values_of(other)))

    def e_inner(self, other: "GraphFunction | np.ndarray") -> float:
        return self.graph.form_inner(self.values, _values_of(other))


def _values_of(u) -> np.ndarray:
    return u.values if isinstance(u, GraphFunction) else np.asarray(u, dtype=float)


def lp_norm(m: np.ndarray, values: np.ndarray, p: float) -> float:
    """Weighted norm ||u||_{l^p_m}; the sup norm (p = inf) carries no weight."""
    if p == np.inf:
        return float(np.max(np.abs(values)))
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(np.dot(m, np.abs(values) ** p) ** (1.0 / p))


def validate_graph(g: WeightedGraph) -> ValidationReport:
    """Check the structural graph assumptions plus measure positivity.

    The report lists diagonal vanishing, symmetry, per-vertex weight
    summability, m > 0, c >= 0, V >= 1, and connectivity; the graph is
    valid iff every check passes.
    """
    checks = []

    diag = g.b.diagonal()
    bad = np.nonzero(diag != 0)[0]
    checks.append(
        CheckResult(
            "diagonal_zero",
            bad.size == 0,
            "" if bad.size == 0 else f"b({g.vertices[bad[0]]!r},·) nonzero on the diagonal",
        )
    )

    asym = (abs(g.b - g.b.T)).tocoo()
    if asym.nnz:
        i = int(asym.row[0])
        j = int(asym.col[0])
        detail = f"b({g.vertices[i]!r},{g.vertices[j]!r}) != b({g.vertices[j]!r},{g.vertices[i]!r})"
        checks.append(CheckResult("symmetric", False, detail))
    else:
        checks.append(CheckResult("symmetric", True))

    deg = g.degree_sums
    ok_b = bool(np.all(np.isfinite(g.b.data)) and np.all(g.b.data >= 0) and np.all(np.isfinite(deg)))
    checks.append(CheckResult("summable_weights", ok_b, "" if ok_b else "nonfinite or negative edge weights"))

    ok_m = bool(np.all(np.isfinite(g.m)) and np.all(g.m > 0))
    checks.append(CheckResult("positive_measure", ok_m, "" if ok_m else "m must be positive"))

    ok_c = bool(np.all(np.isfinite(g.c)) and np.all(g.c >= 0))
    checks.append(CheckResult("nonnegative_killing", ok_c, "" if ok_c else "c must be nonnegative"))

    if ok_m:
        V = g.V
        ok_v = bool(np.all(V >= 1.0))
        detail = "" if ok_v else f"V must be >= 1 (min {V.min():g} at {g.vertices[int(np.argmin(V))]!r})"
    else:
        ok_v, detail = False, "V undefined for nonpositive m"
    checks.append(CheckResult("potential_at_least_one", ok_v, detail))

    ncomp, _ = connected_components(g.b, directed=False)
    checks.append(CheckResult("connected", ncomp == 1, "" if ncomp == 1 else f"{ncomp} components"))

    return ValidationReport(tuple(checks))


def path_metric(g: WeightedGraph, x: VertexId, y: VertexId) -> float:
    """Shortest-path distance with edge length 1/b; inf across components."""
    ix, iy = g.index(x), g.index(y)
    if ix == iy:
        return 0.0
    dist = shortest_path(g._length_matrix(), directed=False, indices=ix)
    return float(dist[iy])


def diameter(g: WeightedGraph, subset: Iterable[VertexId] | None = None) -> float:
    """Largest path-metric distance between subset vertices.

    Paths may leave the subset since the metric lives on the whole graph.
    Exact all-pairs computation; inf when the subset meets several
    components.
    """
    idx = np.arange(g.n) if subset is None else g.indices(subset)
    if idx.size == 0:
        raise GraphError("diameter of an empty subset is undefined")
    if idx.size == 1:
        return 0.0
    dist = shortest_path(g._length_matrix(), directed=False, indices=idx)
    return float(np.max(dist[:, idx]))


def check_summability(g: WeightedGraph, subset: Iterable[VertexId] | None = None) -> float:
    """Sum of 1/b(x,y) over ordered adjacent pairs inside the subset.

    Each undirected edge is counted twice (ordered-pair convention).  A
    finite value certifies the subset is canonically compactifiable and
    bounds its diameter.  The subset must induce a connected subgraph.
    """
    idx = np.arange(g.n) if subset is None else g.indices(subset)
    if idx.size == 0:
        raise GraphError("summability of an empty subset is undefined")
    sub = g.b[idx][:, idx].tocoo()
    if idx.size > 1:
        ncomp, labels = connected_components(sub, directed=False)
        if ncomp > 1:
            part = [g.vertices[idx[i]] for i in np.nonzero(labels == 0)[0]]
            rest = [g.vertices[idx[i]] for i in np.nonzero(labels != 0)[0]]
            raise GraphError(
                f"subset induces a disconnected subgraph: no edges cross the cut {part!r} | {rest!r}"
            )
    return float(np.sum(1.0 / sub.data)) if sub.nnz else 0.0


def poincare_check(
    g: WeightedGraph,
    subset: Iterable[VertexId],
    u: GraphFunction | np.ndarray,
    tol: float = 1e-10,
) -> tuple[float, float, bool]:
    """Oscillation bound sup - inf <= diam(subset)^(1/2) q(u)^(1/2).

    Returns (lhs, rhs, ok).  The inequality is proven for every u and
    every finite-diameter subset, so ok=False flags a numerical bug.
    """
    idx = g.indices(subset)
    if idx.size == 0:
        raise GraphError("oscillation over an empty subset is undefined")
    vals = _values_of(u)
    lhs = float(np.max(vals[idx]) - np.min(vals[idx]))
    rhs = float(np.sqrt(diameter(g, subset)) * np.sqrt(g.form_value(vals)))
    return lhs, rhs, lhs <= rhs + tol


def ell1_embedding_constant(g: WeightedGraph, K: Iterable[VertexId]) -> float:
    """Constant C(K) with ||u||_{l^1_m} <= C(K) ||u||_E.

    C(K) = (sum_{x not in K} m(x)^2/(c(x)+m(x)))^(1/2) + m(K)^(1/2); the
    complement term is a Cauchy-Schwarz constant against the potential
    part of the form, the K term uses V >= 1.
    """
    idx = g.indices(K)
    outside = np.ones(g.n, dtype=bool)
    outside[idx] = False
    tail = float(np.sum(g.m[outside] ** 2 / (g.c[outside] + g.m[outside])))
    return float(np.sqrt(tail) + np.sqrt(np.sum(g.m[idx])))


@dataclass(frozen=True)
class TruncationFamily:
    """Growing finite truncations of a symbolic infinite graph.

    ``generate(t)`` returns the finite graph at size parameter t and
    ``subset(t)`` the distinguished vertex set K_t inside it.  The K_t
    must be nested and exhaust the generated vertices as t grows.
    """

    generate: Callable[[int], WeightedGraph]
    subset: Callable[[int], tuple[VertexId, ...]]

    def validate_nesting(self, t_max: int) -> None:
        prev: set | None = None
        for t in range(1, t_max + 1):
            current = set(self.subset(t))
            verts = set(self.generate(t).vertices)
            if not current <= verts:
                raise GraphError(f"K_{t} is not contained in the generated vertex set")
            if prev is not None and not prev <= current:
                raise GraphError(f"K_{t - 1} is not contained in K_{t}")
            prev = current


def check_potential_growth(
    fam: TruncationFamily, ts: Iterable[int]
) -> list[tuple[int, float, float]]:
    """Tabulate (t, inf V outside K_t, m(K_t)) along a truncation family.

    A diverging middle column with finite measure column is the numerical
    evidence that the potential-growth condition holds for the family.
    """
    rows = []
    for t in ts:
        g = fam.generate(t)
        inside = set(fam.subset(t))
        outside_idx = [i for i, v in enumerate(g.vertices) if v not in inside]
        if not outside_idx:
            raise GraphError(f"complement of K_{t} is empty; truncation too small")
        inf_v = float(np.min(g.V[np.array(outside_idx)]))
        rows.append((t, inf_v, g.measure(fam.subset(t))))
    return rows


def example_line_graph(n_minus: int, n_plus: int, paper_literal: bool = False) -> WeightedGraph:
    """Half-line example with decaying measure on one side.

    Vertices -n_minus..n_plus with m(i) = 1/(i+1) for i >= 0 and 1/i^2
    for i < 0; consecutive edge weights b(i, i+1) = i+1 for i >= 0 and
    i^2 for i < 0.  The potential is V(i) = i for i >= 1 and is clamped
    to 1 for i <= 0 so that V >= 1 holds; ``paper_literal`` keeps the
    unclamped values V(0) = 0 and V(i) = 0 for i < 0 (the killing term
    then goes negative and validation fails), for growth diagnostics
    only.
    """
    if n_minus < 1 or n_plus < 1:
        raise GraphError("n_minus and n_plus must be >= 1")
    ids = list(range(-n_minus, n_plus + 1))
    m = np.array([1.0 / (i + 1) if i >= 0 else 1.0 / i**2 for i in ids])
    if paper_literal:
        V = np.array([float(max(i, 0)) for i in ids])
    else:
        V = np.array([float(i) if i >= 1 else 1.0 for i in ids])
    c = m * (V - 1.0)
    n = len(ids)
    rows, cols, vals = [], [], []
    for pos, i in enumerate(ids[:-1]):
        w = float(i + 1) if i >= 0 else float(i**2)
        rows += [pos, pos + 1]
        cols += [pos + 1, pos]
        vals += [w, w]
    b = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return WeightedGraph(tuple(ids), m, b, c)


def line_graph_family(n_minus: int, pad: int = 2) -> TruncationFamily:
    """Truncation family K_t = {-n_minus..-1} union {0..t} of the line example."""
    return TruncationFamily(
        generate=lambda t: example_line_graph(n_minus, t + pad),
        subset=lambda t: tuple(range(-n_minus, t + 1)),
    )


def path_graph(n: int, m: float = 1.0, b: float = 1.0, c: float = 0.0) -> WeightedGraph:
    """Path on n vertices 0..n-1 with constant data."""
    edges = [(i, i + 1, b) for i in range(n - 1)]
    return WeightedGraph.from_edges(range(n), m, edges, c=c)


def single_vertex_graph(m: float = 1.0, c: float = 0.0) -> WeightedGraph:
    return WeightedGraph.from_edges([0], m, [], c=c)


def random_connected_graph(
    n: int,
    seed: int,
    extra_edge_prob: float = 0.15,
    m_range: tuple[float, float] = (0.5, 2.0),
    b_range: tuple[float, float] = (0.5, 3.0),
    c_range: tuple[float, float] = (0.0, 2.0),
) -> WeightedGraph:
    """Random connected graph: random attachment tree plus extra edges."""
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int, float]] = []
    seen = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((j, i, float(rng.uniform(*b_range))))
        seen.add(frozenset((j, i)))
    for i in range(n):
        for j in range(i + 1, n):
            if frozenset((i, j)) not in seen and rng.random() < extra_edge_prob:
                edges.append((i, j, float(rng.uniform(*b_range))))
                seen.add(frozenset((i, j)))
    m = rng.uniform(*m_range, size=n)
    c = rng.uniform(*c_range, size=n)
    return WeightedGraph.from_edges(range(n), m, edges, c=c)
