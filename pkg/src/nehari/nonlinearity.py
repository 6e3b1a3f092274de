"""Nonlinear term evaluators and their structural validators.

A nonlinearity is the pair (f, F) with F the primitive of f in the
state variable and F(x, 0) = 0.  The power family f = g(x) |s|^(p-2) s
carries the structural constants (p, q, a0, a1) used by the critical
value bounds; custom pairs can be supplied directly but must come with
an explicit primitive, never a quadrature of f.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError
from .graph import GraphFunction, WeightedGraph, _values_of
from .reports import CheckResult, ValidationReport


@dataclass(frozen=True)
class PowerParams:
    """Structural constants: growth exponents and two-sided power bounds."""

    p: float
    q: float
    a0: float
    a1: float


@dataclass(frozen=True)
class Nonlinearity:
    """Vertexwise evaluator pair; arrays are aligned with the vertex order.

    ``f``/``F``/``df`` map a value array to a value array, broadcasting
    any per-vertex weights.  ``df`` is optional; solvers fall back to a
    central difference of f when it is missing.
    """

    kind: str
    f: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray] | None = None
    params: PowerParams | None = None
    g: np.ndarray | float | None = None

    def df_values(self, values: np.ndarray) -> np.ndarray:
        if self.df is not None:
            return self.df(values)
        h = 1e-6 * (1.0 + np.abs(values))
        return (self.f(values + h) - self.f(values - h)) / (2.0 * h)


def power_nonlinearity(p: float, g: float | np.ndarray = 1.0) -> Nonlinearity:
    """Pure-power nonlinearity f = g |s|^(p-2) s with primitive g |s|^p / p.

    Requires p > 2 and g >= some positive constant; the structural
    parameters are q = p, a0 = min(g)/p, a1 = max(g), and the AR
    inequality q F <= f s holds with equality.
    """
    if not np.isfinite(p) or p <= 2:
        raise ConfigError(f"power exponent must satisfy p > 2, got {p}")
    garr = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(garr)) or np.any(garr <= 0):
        raise ConfigError("vertex weights g must be finite and positive")

    def f(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return garr * np.abs(s) ** (p - 2.0) * s

    def F(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return garr * np.abs(s) ** p / p

    def df(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return garr * (p - 1.0) * np.abs(s) ** (p - 2.0)

    params = PowerParams(p=float(p), q=float(p), a0=float(garr.min() / p), a1=float(garr.max()))
    return Nonlinearity("power", f, F, df, params, garr if garr.ndim else float(garr))


def custom_nonlinearity(f, F, df=None, params: PowerParams | None = None) -> Nonlinearity:
    """Wrap user evaluators; F must be the exact primitive with F(0) = 0."""
    return Nonlinearity("custom", f, F, df, params, None)


def default_sample_grid(s_max: float = 10.0, per_decade: int = 12) -> np.ndarray:
    """Symmetric log-spaced sample grid reaching from 1e-6 up to s_max."""
    decades = int(np.ceil(np.log10(s_max / 1e-6)))
    pos = np.geomspace(1e-6, s_max, decades * per_decade + 1)
    return np.concatenate([-pos[::-1], [0.0], pos])


def _eval_grid(nl: Nonlinearity, s_grid, vertices) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[int]]:
    width = np.size(nl.g) if isinstance(nl.g, np.ndarray) else 1
    cols = list(vertices) if vertices is not None else list(range(width))
    s_grid = np.asarray(s_grid, dtype=float)
    fv = np.stack([np.broadcast_to(nl.f(np.full(width, s)), (width,)) for s in s_grid])
    Fv = np.stack([np.broadcast_to(nl.F(np.full(width, s)), (width,)) for s in s_grid])
    return s_grid, fv[:, cols], Fv[:, cols], cols


def validate_assumptions(nl: Nonlinearity, s_grid=None, vertices=None) -> ValidationReport:
    """Grid validation of the structural nonlinearity conditions.

    Checks vanishing at the origin, vanishing small-argument slope
    (heuristic trend of max |f|/|s| across decade radii), strict
    monotonicity of f(s)/|s| on each sign branch, superquadratic growth
    of F/s^2 over the outer two decades, and, when structural parameters
    are present, the AR inequality and the two power bounds.  A pass
    certifies the conditions on the grid only.
    """
    if s_grid is None:
        s_grid = default_sample_grid()
    s, fv, Fv, cols = _eval_grid(nl, s_grid, vertices)
    checks: list[CheckResult] = []
    nonzero = s != 0.0
    sn = s[nonzero]
    fn = fv[nonzero]
    Fn = Fv[nonzero]

    if np.any(s == 0.0):
        at0 = np.abs(fv[s == 0.0])
        ok = bool(np.all(at0 <= 1e-15))
        checks.append(CheckResult("f1_zero_at_origin", ok, "" if ok else "f(x,0) != 0"))
    else:
        checks.append(CheckResult("f1_zero_at_origin", False, "grid must contain s = 0"))

    # f2: mu_hat(R) = max_{0<|s|<=R} |f|/|s| must decay to zero with R.
    radii = np.geomspace(np.min(np.abs(sn)), np.max(np.abs(sn)), 8)
    ratio = np.abs(fn) / np.abs(sn)[:, None]
    ok_f2, wit_f2 = True, ""
    for j, x in enumerate(cols):
        mu = np.array([np.max(ratio[np.abs(sn) <= r, j], initial=0.0) for r in radii])
        if np.any(mu <= 0):
            ok_f2, wit_f2 = False, f"f vanishes identically near 0 at vertex {x}"
            break
        slope = (np.log(mu[-1]) - np.log(mu[0])) / (np.log(radii[-1]) - np.log(radii[0]))
        if slope < 0.02:
            ok_f2, wit_f2 = False, f"|f|/|s| does not vanish as s -> 0 at vertex {x} (trend {slope:.3g})"
            break
    checks.append(CheckResult("f2_vanishing_small_slope", ok_f2, wit_f2))

    # f3: f(s)/|s| strictly increasing on each sign branch.
    ok_f3, wit_f3 = True, ""
    signed_ratio = fn / np.abs(sn)[:, None]
    for branch in (sn > 0, sn < 0):
        order = np.argsort(sn[branch])
        vals = signed_ratio[branch][order]
        svals = sn[branch][order]
        diffs = np.diff(vals, axis=0)
        scale = np.maximum(np.abs(vals[1:]), np.abs(vals[:-1]))
        bad = diffs <= 1e-14 * np.maximum(scale, 1e-300)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            ok_f3, wit_f3 = False, f"f(s)/|s| not strictly increasing at (x={cols[j]}, s={svals[i + 1]:g})"
            break
    checks.append(CheckResult("f3_ratio_strictly_increasing", ok_f3, wit_f3))

    # f4: F/s^2 must keep growing over the two outermost decades.
    ok_f4, wit_f4 = True, ""
    outer = np.abs(sn) >= np.max(np.abs(sn)) / 100.0
    quad_ratio = Fn / (sn**2)[:, None]
    for branch_mask in (outer & (sn > 0), outer & (sn < 0)):
        svals = np.abs(sn[branch_mask])
        order = np.argsort(svals)
        vals = quad_ratio[branch_mask][order]
        svals = svals[order]
        for j, x in enumerate(cols):
            slope = (np.log(vals[-1, j]) - np.log(vals[0, j])) / (np.log(svals[-1]) - np.log(svals[0]))
            if not np.isfinite(slope) or slope < 0.01:
                ok_f4, wit_f4 = False, f"F/s^2 not increasing beyond the outer decade at vertex {x}"
                break
        if not ok_f4:
            break
    checks.append(CheckResult("f4_superquadratic_growth", ok_f4, wit_f4))

    if nl.params is not None:
        pr = nl.params
        fs = fn * sn[:, None]
        ar = (pr.q * Fn <= fs * (1.0 + 1e-12) + 1e-300) & (Fn > 0)
        ok = bool(np.all(ar))
        wit = "" if ok else _witness(ar, sn, cols, "AR inequality q F <= f s fails")
        checks.append(CheckResult("ar_inequality", ok, wit))

        low = Fn >= pr.a0 * np.abs(sn)[:, None] ** pr.p * (1.0 - 1e-12)
        ok = bool(np.all(low))
        checks.append(
            CheckResult("lower_power_bound", ok, "" if ok else _witness(low, sn, cols, "F >= a0 |s|^p fails"))
        )

        up = np.abs(fn) <= pr.a1 * np.abs(sn)[:, None] ** (pr.p - 1.0) * (1.0 + 1e-12)
        ok = bool(np.all(up))
        checks.append(
            CheckResult("upper_power_bound", ok, "" if ok else _witness(up, sn, cols, "|f| <= a1 |s|^(p-1) fails"))
        )

    return ValidationReport(tuple(checks))


def _witness(mask: np.ndarray, sn: np.ndarray, cols, label: str) -> str:
    i, j = np.argwhere(~mask)[0]
    return f"{label} at (x={cols[j]}, s={sn[i]:g})"


def nonlinear_energy(g: WeightedGraph, nl: Nonlinearity, u) -> float:
    """Measure-weighted total of the primitive, sum_x m(x) F(x, u(x))."""
    return float(np.dot(g.m, nl.F(_values_of(u))))


def nonlinear_gradient(g: WeightedGraph, nl: Nonlinearity, u) -> GraphFunction:
    """Vertex function r = f(x, u(x)); pairs as sum m r h against directions h."""
    return GraphFunction(g, nl.f(_values_of(u)))
