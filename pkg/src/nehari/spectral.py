"""Operator assembly and the m-weighted generalized eigenproblem.

The stiffness matrix A realizes the energy form, u'Av = q(u, v), as the
edge-weight graph Laplacian plus the diagonal c + m; the mass matrix M
is the diagonal of the vertex measure.  Eigenpairs of A e = lambda M e
are m-orthonormal, and any spectral parameter splits the computed pairs
into the index sets below / at / above it, with projectors that are
orthogonal in both the m- and the energy inner product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, splu

from .errors import SpectralError
from .graph import GraphFunction, WeightedGraph, _values_of, lp_norm, validate_graph

DENSE_LIMIT = 512


@dataclass(frozen=True)
class FormMatrices:
    """Stiffness/mass pair (A, M) of a graph."""

    graph: WeightedGraph
    A: sp.csr_matrix
    M: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.graph.n


def assemble(g: WeightedGraph) -> FormMatrices:
    """Assemble A = (weighted Laplacian of b) + diag(c + m) and M = diag(m).

    Requires a valid graph; u'Au then reproduces the direct-summation
    form value to rounding.
    """
    report = validate_graph(g)
    if not report.passed:
        raise SpectralError("graph failed validation:\n" + "\n".join(str(c) for c in report.failures()))
    lap = sp.diags(g.degree_sums) - g.b
    A = (lap + sp.diags(g.c + g.m)).tocsr()
    M = sp.diags(g.m).tocsr()
    return FormMatrices(g, A, M)


def shifted_form(fm: FormMatrices, lam: float, u, v=None) -> float:
    """Shifted form value u'Av - lambda u'Mv (v defaults to u)."""
    uv = _values_of(u)
    vv = uv if v is None else _values_of(v)
    return float(uv @ (fm.A @ vv) - lam * (uv @ (fm.M @ vv)))


@dataclass(frozen=True)
class SpectralData:
    """Ascending eigenvalues with m-orthonormal eigenvectors."""

    graph: WeightedGraph
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    method: str

    def __post_init__(self):
        for name in ("eigenvalues", "eigenvectors", "residuals"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=float))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def full(self) -> bool:
        return self.k == self.graph.n


def _sign_normalize(vecs: np.ndarray) -> np.ndarray:
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            vecs[:, j] = -col
    return vecs


def _subspace_iteration(fm: FormMatrices, k: int, seed: int, maxiter: int, tol: float):
    """Shift-invert subspace iteration with Rayleigh-Ritz in the (A, M) pair.

    Covers block sizes ARPACK cannot handle (k close to n); converges in
    one Ritz step when k = n.
    """
    A, M = fm.A, fm.M
    n = fm.n
    lu = splu(A.tocsc())
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, k))
    vals = None
    for _ in range(maxiter):
        Y = lu.solve(M @ X)
        Ah = Y.T @ (A @ Y)
        Mh = Y.T @ (M @ Y)
        vals, W = scipy.linalg.eigh(Ah, Mh)
        X = Y @ W
        R = A @ X - (M @ X) * vals
        rel = np.linalg.norm(R, axis=0) / np.maximum(np.linalg.norm(A @ X, axis=0), 1e-300)
        if np.max(rel) <= tol:
            break
    return vals, X


def eigensolve(
    fm: FormMatrices,
    k: int,
    method: str = "auto",
    seed: int = 0,
    maxiter: int = 2000,
    resid_tol: float = 1e-8,
) -> SpectralData:
    """Compute the k smallest eigenpairs of A e = lambda M e.

    ``method`` is one of "auto", "dense", "iterative", "arpack",
    "subspace".  The dense path is the default up to n = 512; the
    iterative paths are seeded and deterministic.  Raises on residuals
    above ``resid_tol`` or iteration failure.
    """
    n = fm.n
    if not 1 <= k <= n:
        raise SpectralError(f"k must be in [1, {n}], got {k}")
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    if method == "iterative":
        method = "arpack" if k <= n - 2 else "subspace"

    if method == "dense":
        vals, vecs = scipy.linalg.eigh(
            fm.A.toarray(), fm.M.toarray(), subset_by_index=(0, k - 1)
        )
    elif method == "arpack":
        if k > n - 2:
            raise SpectralError("arpack path needs k <= n - 2; use dense or subspace")
        rng = np.random.default_rng(seed)
        try:
            vals, vecs = eigsh(
                fm.A.tocsc(),
                k=k,
                M=fm.M.tocsc(),
                sigma=0.0,
                which="LM",
                v0=rng.standard_normal(n),
                maxiter=maxiter,
            )
        except ArpackNoConvergence as exc:
            raise SpectralError(
                f"eigensolver did not converge after {maxiter} iterations: "
                f"{len(exc.eigenvalues)} of {k} pairs converged"
            ) from exc
    elif method == "subspace":
        vals, vecs = _subspace_iteration(fm, k, seed, maxiter, min(resid_tol, 1e-10))
    else:
        raise SpectralError(f"unknown eigensolver method {method!r}")

    order = np.argsort(vals)
    vals = np.asarray(vals)[order]
    vecs = _sign_normalize(np.asarray(vecs)[:, order])

    R = fm.A @ vecs - (fm.M @ vecs) * vals
    resid = np.linalg.norm(R, axis=0) / np.maximum(np.linalg.norm(fm.A @ vecs, axis=0), 1e-300)
    if np.max(resid) > resid_tol:
        bad = int(np.argmax(resid))
        raise SpectralError(
            f"eigenpair residuals above tolerance: worst {resid[bad]:.3e} at index {bad} "
            f"(residuals {np.array2string(resid, precision=3)})"
        )
    gram = vecs.T @ (fm.M @ vecs)
    if np.max(np.abs(gram - np.eye(k))) > 1e-8:
        raise SpectralError("eigenvectors are not m-orthonormal to tolerance")
    return SpectralData(fm.graph, vals, vecs, resid, method)


@dataclass(frozen=True)
class Splitting:
    """Partition of computed eigenpairs relative to a spectral parameter."""

    lam: float
    minus_idx: tuple[int, ...]
    zero_idx: tuple[int, ...]
    plus_idx: tuple[int, ...]
    delta: float
    tol: float


def split(spec: SpectralData, lam: float, tol: float = 1e-9) -> Splitting:
    """Split computed eigenpairs into indices below / at / above lam.

    Equality uses the scaled tolerance tol (1 + |lam|).  Errors out when
    lam sits above every computed eigenvalue, since the window then says
    nothing about the space above lam.
    """
    vals = spec.eigenvalues
    tol_eff = tol * (1.0 + abs(lam))
    if lam > vals[-1] + tol_eff:
        raise SpectralError(
            f"insufficient spectral window: lambda={lam:g} exceeds the largest computed "
            f"eigenvalue {vals[-1]:g}; extend k"
        )
    zero = np.abs(vals - lam) <= tol_eff
    minus = vals < lam - tol_eff
    plus = ~(zero | minus)
    delta = float(np.min(np.abs(vals - lam)))
    return Splitting(
        float(lam),
        tuple(np.nonzero(minus)[0].tolist()),
        tuple(np.nonzero(zero)[0].tolist()),
        tuple(np.nonzero(plus)[0].tolist()),
        delta,
        tol,
    )


_SIGN_IDX = {"+": "plus_idx", "-": "minus_idx", "0": "zero_idx"}


def project(spl: Splitting, spec: SpectralData, sign: str, u) -> GraphFunction:
    """Project u onto the eigenspaces on one side of the splitting.

    P u = sum over the index set of (e_j, u)_m e_j; the eigenbasis makes
    this simultaneously m- and energy-orthogonal.
    """
    if sign not in _SIGN_IDX:
        raise ValueError(f"sign must be one of '+', '-', '0', got {sign!r}")
    idx = list(getattr(spl, _SIGN_IDX[sign]))
    vals = _values_of(u)
    if not idx:
        return GraphFunction(spec.graph, np.zeros(spec.graph.n))
    E = spec.eigenvectors[:, idx]
    coeff = E.T @ (spec.graph.m * vals)
    return GraphFunction(spec.graph, E @ coeff)


@dataclass(frozen=True)
class FormBoundReport:
    """Outcome of the two-sided shifted-form bounds at one vector."""

    lam: float
    lam_above: float
    lam_below: float | None
    value_plus: float
    bound_plus: float
    ok_plus: bool
    value_minus: float | None
    bound_minus: float | None
    ok_minus: bool
    window_complete: bool

    @property
    def passed(self) -> bool:
        return self.ok_plus and self.ok_minus


def verify_form_bounds(
    spl: Splitting,
    spec: SpectralData,
    fm: FormMatrices,
    u,
    rel_tol: float = 1e-10,
) -> FormBoundReport:
    """Check the definiteness bounds of the shifted form on both projections.

    For lam strictly between consecutive eigenvalues and u+ / u- the
    projections above / below, the shifted form satisfies

        q_lam(u+) >= (lam_above - lam)/lam_above ||u+||_E^2
        q_lam(u-) <= (lam_below - lam)/lam_below ||u-||_E^2

    with equality on single eigenmodes.  Raises when lam lies in the
    computed spectrum.
    """
    if spl.zero_idx:
        raise SpectralError(f"lambda={spl.lam:g} lies in the computed spectrum (within tol)")
    if not spl.plus_idx:
        raise SpectralError("no computed eigenvalue above lambda; extend the window")
    lam = spl.lam
    lam_above = float(spec.eigenvalues[spl.plus_idx[0]])

    u_plus = project(spl, spec, "+", u).values
    e2_plus = float(u_plus @ (fm.A @ u_plus))
    value_plus = shifted_form(fm, lam, u_plus)
    bound_plus = (lam_above - lam) / lam_above * e2_plus
    slack_plus = rel_tol * max(1.0, abs(bound_plus), e2_plus)
    ok_plus = value_plus >= bound_plus - slack_plus

    if spl.minus_idx:
        lam_below = float(spec.eigenvalues[spl.minus_idx[-1]])
        u_minus = project(spl, spec, "-", u).values
        e2_minus = float(u_minus @ (fm.A @ u_minus))
        value_minus = shifted_form(fm, lam, u_minus)
        bound_minus = (lam_below - lam) / lam_below * e2_minus
        slack_minus = rel_tol * max(1.0, abs(bound_minus), e2_minus)
        ok_minus = value_minus <= bound_minus + slack_minus
    else:
        lam_below = None
        value_minus = bound_minus = None
        ok_minus = True

    return FormBoundReport(
        lam,
        lam_above,
        lam_below,
        value_plus,
        bound_plus,
        ok_plus,
        value_minus,
        bound_minus,
        ok_minus,
        spec.full,
    )


def projector_lp_bound(
    spl: Splitting,
    spec: SpectralData,
    p: float,
    n_samples: int = 200,
    seed: int = 0,
) -> tuple[float, float]:
    """Certified interval for the l^p_m operator norm of the below projector.

    The lower end is the best observed ratio ||P- u||_p / ||u||_p over
    random vectors and coordinate probes; the upper end is the Hoelder
    constant sum_j ||e_j||_p ||e_j||_p' with 1/p + 1/p' = 1.  The exact
    norm is not computed (it is NP-hard for general p); boundedness is
    what the interval certifies.
    """
    idx = list(spl.minus_idx)
    if not idx:
        return 0.0, 0.0
    g = spec.graph
    E = spec.eigenvectors[:, idx]

    if p == 1:
        p_conj: float = np.inf
    elif p == np.inf:
        p_conj = 1.0
    else:
        p_conj = p / (p - 1.0)
    upper = float(sum(lp_norm(g.m, E[:, j], p) * lp_norm(g.m, E[:, j], p_conj) for j in range(E.shape[1])))

    rng = np.random.default_rng(seed)
    probes = [np.eye(g.n)[:, i] for i in range(g.n)] if g.n <= 256 else []
    samples = [rng.standard_normal(g.n) for _ in range(n_samples)]
    lower = 0.0
    for vec in probes + samples:
        denom = lp_norm(g.m, vec, p)
        if denom == 0.0:
            continue
        proj = E @ (E.T @ (g.m * vec))
        lower = max(lower, lp_norm(g.m, proj, p) / denom)
    return lower, upper
