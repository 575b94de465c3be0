"""Sup-norm extremal probes of the endpoint derivative growth constant.

For each degree n this module solves

    maximise |P'(a)|  over polynomials with deg P <= n, |P| <= 1 on K,

as a linear program and worms the finite relaxation down to the continuum
by an exchange loop.  Dividing the optimal |P'(a)| by n^2 gives a per-degree
ratio whose asymptotic envelope is the sharp constant 2 pi^2 Omega(K, a)^2
computed independently from the equilibrium density; a study collects the
ratios and flags any excursion above that envelope.

Numerical core: polynomials are parametrised by their values at n + 1
interpolation nodes placed at quantiles of the equilibrium measure (with all
component endpoints included).  On a union of intervals any fixed global
polynomial basis explodes in the gaps - Chebyshev coefficients of the hull
grow like exp(n * g_K inside the gap) and are unusable in double precision
beyond degree ~40 - while equilibrium-distributed nodal values keep every
constraint row bounded by a small Lebesgue constant at all tested degrees.
The constraint grid is arccos-spaced per component (32*(n+1) points by
default); the exchange loop appends the witness's true local maxima until
the overshoot is below tolerance, and the witness is finally renormalised
by its refined sup-norm so the reported value is a certified lower bound.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULTS, NumericsConfig
from .equilibrium import ComponentTable, EquilibriumData, density, green, omega_factor, solve_equilibrium
from .errors import NumericsError, SetSpecError
from .interval_sets import IntervalSet, check_interval_condition
from .numerics import ChebPoly, LPProblem, lp_maximize


@functools.lru_cache(maxsize=64)
def _solved(K: IntervalSet, cfg: NumericsConfig = DEFAULTS) -> EquilibriumData:
    return solve_equilibrium(K, cfg)


# ---------------------------------------------------------------------------
# interpolation nodes at equilibrium quantiles


def _component_quantiles(tab: ComponentTable, levels: np.ndarray) -> np.ndarray:
    """Points x in the component with equilibrium mass of [left, x] = level.

    With x = mid + half*cos(phi) the cumulative mass from the left endpoint
    is half*(c_0*(pi - phi) - sum_k c_k sin(k phi)/k), solved for phi by
    bisection (the density is positive, so mass is strictly monotone).
    """
    c = np.asarray(tab.coeffs)
    k = np.arange(1, len(c))

    def mass(phi: np.ndarray) -> np.ndarray:
        s = np.sin(np.outer(phi, k)) @ (c[1:] / k) if len(k) else 0.0
        return tab.half * (c[0] * (np.pi - phi) - s)

    lo = np.zeros(len(levels))
    hi = np.full(len(levels), np.pi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = mass(mid) < levels
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    phi = 0.5 * (lo + hi)
    return tab.mid + tab.half * np.cos(phi)


def _interpolation_nodes(E: EquilibriumData, n: int) -> np.ndarray:
    """n + 1 nodes: all component endpoints plus interior equilibrium quantiles.

    Below n + 1 = 2m there is no room for every endpoint; the nodes are then
    plain global equilibrium quantiles (midpoint levels), which stay distinct
    and well spread.
    """
    K = E.set
    total = n + 1
    masses = np.array([tab.mass for tab in E.tables])
    if total < 2 * K.m:
        levels = masses.sum() * (np.arange(total) + 0.5) / total
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        nodes = []
        for j, tab in enumerate(E.tables):
            local = levels[(levels > cum[j]) & (levels <= cum[j + 1])] - cum[j]
            if len(local):
                nodes.append(_component_quantiles(tab, local))
        return np.sort(np.concatenate(nodes))
    raw = masses / masses.sum() * total
    alloc = np.maximum(2, np.round(raw).astype(int))
    while alloc.sum() > total:
        alloc[int(np.argmax(alloc - raw))] -= 1
    while alloc.sum() < total:
        alloc[int(np.argmin(alloc - raw))] += 1
    nodes = []
    for tab, (u, v), nj in zip(E.tables, K.intervals, alloc):
        if nj == 2:
            interior = np.empty(0)
        else:
            levels = tab.mass * np.arange(1, nj - 1) / (nj - 1)
            interior = np.sort(_component_quantiles(tab, levels))
        nodes.append(np.concatenate([[u], interior, [v]]))
    return np.sort(np.concatenate(nodes))


def _bary_weights(nodes: np.ndarray) -> np.ndarray:
    """Barycentric weights in log space, rescaled to max modulus 1."""
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    lw = -np.sum(np.log(np.abs(diff)), axis=1)
    sg = np.prod(np.sign(diff), axis=1)
    return sg * np.exp(lw - lw.max())


def _lagrange_rows(x: np.ndarray, nodes: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Matrix of Lagrange basis values l_j(x_i); exact unit rows at nodes."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    diff = x[:, None] - nodes[None, :]
    hit = np.abs(diff) < 1e-15
    q = w[None, :] / np.where(hit, 1.0, diff)
    anyhit = hit.any(axis=1)
    rows = np.empty_like(q)
    if np.any(~anyhit):
        rows[~anyhit] = q[~anyhit] / q[~anyhit].sum(axis=1, keepdims=True)
    rows[anyhit] = hit[anyhit].astype(float)
    return rows


def _deriv_row(nodes: np.ndarray, w: np.ndarray, x: float) -> np.ndarray:
    """Row of l_j'(x); node and off-node barycentric derivative formulas."""
    j = int(np.argmin(np.abs(nodes - x)))
    if abs(nodes[j] - x) < 1e-14 * max(1.0, abs(x)):
        D = np.zeros(len(nodes))
        mask = np.arange(len(nodes)) != j
        D[mask] = (w[mask] / w[j]) / (nodes[j] - nodes[mask])
        D[j] = -D.sum()
        return D
    q = w / (x - nodes)
    Q = q.sum()
    qp = -w / (x - nodes) ** 2
    Qp = qp.sum()
    return (qp * Q - q * Qp) / Q**2


# ---------------------------------------------------------------------------
# grids and refined maxima


def _arccos_grid(K: IntervalSet, per_component: int) -> np.ndarray:
    pts = []
    for (u, v) in K.intervals:
        theta = np.linspace(0.0, np.pi, per_component)
        pts.append((u + v) / 2.0 + (v - u) / 2.0 * np.cos(theta))
    return np.unique(np.concatenate(pts))


def _refined_maxima(
    evalP: Callable[[np.ndarray], np.ndarray], K: IntervalSet, n: int, per_degree: int = 16
) -> list[tuple[float, float]]:
    """Local maxima of |P| on K, polished by two parabola stages in angle."""
    out = []
    for (u, v) in K.intervals:
        mid, half = (u + v) / 2.0, (v - u) / 2.0
        theta = np.linspace(0.0, np.pi, per_degree * (n + 1))
        vals = np.abs(evalP(mid + half * np.cos(theta)))
        isloc = np.r_[True, vals[1:] >= vals[:-1]] & np.r_[vals[:-1] >= vals[1:], True]
        for j in np.nonzero(isloc)[0]:
            t0, h = theta[j], theta[1] - theta[0]
            for _ in range(3):
                tt = np.clip(np.array([t0 - h, t0, t0 + h]), 0.0, np.pi)
                vv = np.abs(evalP(mid + half * np.cos(tt)))
                curv = vv[0] - 2.0 * vv[1] + vv[2]
                if curv < -1e-300:
                    t0 = float(np.clip(tt[1] + 0.5 * h * (vv[0] - vv[2]) / curv, 0.0, np.pi))
                h /= 8.0
            x = float(mid + half * math.cos(t0))
            out.append((x, float(np.abs(evalP(np.array([x])))[0])))
    return out


def _sup_norm(evalP, K: IntervalSet, n: int) -> float:
    return max(v for _, v in _refined_maxima(evalP, K, n))


# ---------------------------------------------------------------------------
# results


@dataclasses.dataclass(frozen=True)
class ExtremalResult:
    """One degree of the extremal probe.

    ``value`` is |P'(a)| of the final normalised witness, a certified lower
    bound for the continuum optimum; ``ratio`` = value / degree**2.  The
    witness is exposed both as hull-interval Chebyshev coefficients (for
    export; lossy on unions at high degree) and through ``evaluate``, the
    numerically reliable barycentric form.
    """

    degree: int
    value: float
    ratio: float
    witness: ChebPoly
    active_points: np.ndarray
    nodes: np.ndarray = dataclasses.field(repr=False)
    node_values: np.ndarray = dataclasses.field(repr=False)
    exchange_rounds: int = 0
    grid_doubled: bool = False

    def evaluate(self, x):
        w = _bary_weights(self.nodes)
        out = _lagrange_rows(np.atleast_1d(x), self.nodes, w) @ self.node_values
        return out if np.ndim(x) else float(out[0])


@dataclasses.dataclass(frozen=True)
class MarkovStudy:
    set: IntervalSet
    a: float
    rows: tuple[ExtremalResult, ...]
    limit_constant: float
    flagged: tuple[int, ...] = ()


# ---------------------------------------------------------------------------
# the probe


def _solve_once(
    K: IntervalSet,
    a: float,
    n: int,
    nodes: np.ndarray,
    w: np.ndarray,
    objective_point: float,
    grid: np.ndarray,
    cfg: NumericsConfig,
) -> tuple[np.ndarray, float, np.ndarray, int]:
    """Grid LP plus exchange; returns (node values, objective, points, rounds)."""
    sep = 1e-13 * (K.max - K.min)
    pts = grid[np.min(np.abs(grid[:, None] - nodes[None, :]), axis=1) > sep]
    d = _deriv_row(nodes, w, objective_point)

    def solve(points: np.ndarray):
        problem = LPProblem(
            objective=d,
            constraint_points=points,
            rows=_lagrange_rows(points, nodes, w),
            bound=1.0,
            var_bound=1.0,
        )
        value, y, active = lp_maximize(problem, cfg)
        return y, value, active

    vals, obj, active = solve(pts)
    rounds = 0
    best_worst = np.inf
    stall = 0
    for _ in range(cfg.lp_exchange_rounds):
        rounds += 1
        evalP = lambda x, v=vals: _lagrange_rows(x, nodes, w) @ v
        maxima = _refined_maxima(evalP, K, n)
        worst = max(v for _, v in maxima)
        if worst <= 1.0 + cfg.lp_exchange_tol:
            break
        # progress may be non-monotone; give up only after three stalled rounds
        if worst < best_worst:
            best_worst, stall = worst, 0
        else:
            stall += 1
            if stall >= 3:
                break
        new = np.array([x for x, v in maxima if v > 1.0 + 1e-12])
        if len(new):
            new = new[np.min(np.abs(new[:, None] - nodes[None, :]), axis=1) > sep]
        if len(new):
            new = new[np.min(np.abs(new[:, None] - pts[None, :]), axis=1) > sep]
        if len(new) == 0:
            break
        pts = np.sort(np.concatenate([pts, new]))
        vals, obj, active = solve(pts)
    return vals, obj, active, rounds


def markov_extremal(
    K: IntervalSet,
    a: float,
    n: int,
    cfg: NumericsConfig = DEFAULTS,
    objective_point: float | None = None,
) -> ExtremalResult:
    """Solve max |P'(a)| over degree <= n with |P| <= 1 on K.

    The objective maximises P'(a) directly; by the P -> -P symmetry of the
    feasible set this equals the maximum of |P'(a)|.  ``objective_point``
    moves the derivative functional off the distinguished endpoint (used by
    the norm-equivalence probe); constraints are unchanged.
    """
    if not 1 <= n <= cfg.markov_degree_cap:
        raise SetSpecError(f"degree must lie in [1, {cfg.markov_degree_cap}], got {n}")
    check_interval_condition(K, a)
    E = _solved(K, cfg)
    nodes = _interpolation_nodes(E, n)
    w = _bary_weights(nodes)
    obj_pt = a if objective_point is None else float(objective_point)

    per = cfg.lp_grid_per_degree * (n + 1)
    grid = _arccos_grid(K, per)
    vals, obj, active, rounds = _solve_once(K, a, n, nodes, w, obj_pt, grid, cfg)
    evalP = lambda x, v=vals: _lagrange_rows(x, nodes, w) @ v

    # spec'd validation: 4x grid, one doubling allowed before giving up
    doubled = False
    vgrid = _arccos_grid(K, cfg.lp_validation_factor * per)
    if np.max(np.abs(evalP(vgrid))) > 1.0 + 1e-6:
        doubled = True
        grid = _arccos_grid(K, 2 * per)
        vals, obj, active, rounds = _solve_once(K, a, n, nodes, w, obj_pt, grid, cfg)
        evalP = lambda x, v=vals: _lagrange_rows(x, nodes, w) @ v
        vgrid = _arccos_grid(K, 2 * cfg.lp_validation_factor * per)
        if np.max(np.abs(evalP(vgrid))) > 1.0 + 1e-6:
            raise NumericsError(
                f"witness validation failed after one grid refinement at degree {n}"
            )

    S = _sup_norm(evalP, K, n)
    if not math.isfinite(S) or S <= 0:
        raise NumericsError(f"degenerate witness norm {S} at degree {n}")
    vals = vals / S
    value = abs(float(_deriv_row(nodes, w, obj_pt) @ vals))
    witness = _fit_hull_cheb(K, n, lambda x: _lagrange_rows(x, nodes, w) @ vals)
    # the oscillation set of the normalised witness, not raw grid hits
    maxima = _refined_maxima(lambda x, v=vals: _lagrange_rows(x, nodes, w) @ v, K, n)
    active = np.array(sorted(x for x, val in maxima if val >= 1.0 - 1e-9))
    return ExtremalResult(
        degree=n,
        value=value,
        ratio=value / n**2,
        witness=witness,
        active_points=np.asarray(active),
        nodes=nodes,
        node_values=vals,
        exchange_rounds=rounds,
        grid_doubled=doubled,
    )


def _fit_hull_cheb(K: IntervalSet, n: int, evalP) -> ChebPoly:
    """Chebyshev coefficients over [min K, max K] by interpolation.

    Faithful for single intervals; on unions the coefficients grow like the
    witness's gap excursion and are export-only beyond moderate degree.
    """
    lo, hi = K.min, K.max
    theta = (2.0 * np.arange(1, n + 2) - 1.0) * np.pi / (2.0 * (n + 1))
    s = np.cos(theta)
    x = (lo + hi) / 2.0 + (hi - lo) / 2.0 * s
    vals = np.asarray(evalP(x), dtype=float)
    k = np.arange(n + 1)
    c = (2.0 / (n + 1)) * np.cos(np.outer(k, theta)) @ vals
    c[0] *= 0.5
    return ChebPoly((lo, hi), tuple(float(x) for x in c))


def markov_study(
    K: IntervalSet,
    a: float,
    degrees: Sequence[int],
    cfg: NumericsConfig = DEFAULTS,
) -> MarkovStudy:
    """Per-degree extremal results against the equilibrium limit constant."""
    degs = [int(n) for n in degrees]
    if any(n2 <= n1 for n1, n2 in zip(degs, degs[1:])):
        raise SetSpecError("degrees must be strictly increasing")
    E = _solved(K, cfg)
    limit = 2.0 * math.pi**2 * omega_factor(E, a) ** 2
    rows = tuple(markov_extremal(K, a, n, cfg) for n in degs)
    flagged = tuple(r.degree for r in rows if r.ratio > limit * 1.02)
    return MarkovStudy(set=K, a=a, rows=rows, limit_constant=limit, flagged=flagged)


def derivative_norm_probe(
    K: IntervalSet,
    a: float,
    n: int,
    grid_points: int = 50,
    cfg: NumericsConfig = DEFAULTS,
) -> tuple[float, float]:
    """(value at a, max value over a grid on [a - rho, a]) for the pointwise
    objective versus run-up-norm objective comparison."""
    ctx = check_interval_condition(K, a)
    theta = np.linspace(0.0, np.pi, grid_points)
    probes = a - ctx.rho / 2.0 + (ctx.rho / 2.0) * np.cos(theta)
    at_a = markov_extremal(K, a, n, cfg).value
    best = 0.0
    for x in probes:
        r = markov_extremal(K, a, n, cfg, objective_point=float(x))
        best = max(best, r.value)
    return at_a, best


# ---------------------------------------------------------------------------
# inequality audits


def _poly_norm_on_set(P, K: IntervalSet, n: int) -> float:
    return _sup_norm(lambda x: np.asarray(P(x), dtype=float), K, max(n, 1))


def bernstein_audit(
    E: EquilibriumData,
    P: ChebPoly,
    probes: Sequence[float],
    cfg: NumericsConfig = DEFAULTS,
) -> float:
    """max over probes of |P'(x)| / (n pi w(x) ||P||_K); at most 1 for true
    polynomials of degree n (the interior derivative bound)."""
    n = P.degree
    if n == 0:
        return 0.0
    norm = _poly_norm_on_set(P, E.set, n)
    dP = P.deriv()
    worst = 0.0
    for x in probes:
        wx = density(E, float(x), cfg)
        worst = max(worst, abs(dP(float(x))) / (n * math.pi * wx * norm))
    return worst


def bernstein_walsh_audit(
    E: EquilibriumData,
    P: ChebPoly,
    z: float,
    cfg: NumericsConfig = DEFAULTS,
) -> float:
    """|P(z)| / (||P||_K exp(n g(z))) for z outside the set; at most 1."""
    if E.set.contains(z):
        raise SetSpecError(f"audit point {z} must lie outside the set")
    n = P.degree
    norm = _poly_norm_on_set(P, E.set, n)
    return abs(P(z)) / (norm * math.exp(n * green(E, z, cfg)))


# ---------------------------------------------------------------------------
# export


def study_rows(study: MarkovStudy) -> list[tuple[int, float, float, float]]:
    """(degree, value, ratio, limit_constant) rows for CSV/JSON export."""
    return [(r.degree, r.value, r.ratio, study.limit_constant) for r in study.rows]
