"""Equilibrium measures on finite unions of closed intervals.

For K = union of m non-degenerate intervals the equilibrium density has the
closed form

    w(t) = |q(t)| / (pi * sqrt(prod_j |t - a_j| |t - b_j|)),   t in Int(K),

where q is the monic polynomial of degree m - 1 whose integral against the
weight vanishes over every bounded gap; q has exactly one root per gap.

``solve_equilibrium`` determines q through its roots: freezing all roots
but the k-th turns gap k's vanishing condition into a weighted mean

    lambda_k = int_gap t |R_k| W / int_gap |R_k| W,

which always lands inside the gap, and sweeping the gaps in order is a
rapidly convergent fixed-point iteration (a dozen sweeps for 64 intervals).
Products over roots and endpoints are accumulated in log space, so density
and gap-polynomial values stay well scaled at any number of components;
a coefficient-form solve would lose all precision beyond ~30 gaps.

The logarithmic potential is evaluated spectrally: with t = mid + half*s on
a component and G the smooth factor of w there, the component's
contribution to U(x) = int log(1/|x-t|) w(t) dt is a closed-form series in
the Chebyshev coefficients of G, valid for x inside the component, in a
gap, or outside the set, with geometric convergence and no special handling
of the log singularity.

Also here: the explicit point-mass balayage kernel onto an interval, its
edge limit, the density decomposition residual on the run-up interval
[a - rho, a], edge-limit profiles, and the outer-approximant convergence
study for the edge factor.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as _nppoly

from .config import DEFAULTS, NumericsConfig
from .errors import NumericsError, SetSpecError
from .interval_sets import EndpointContext, IntervalSet, outer_approx
from .numerics import MonicPoly, _gauss_cheb_adaptive, chebyshev_expand


@dataclasses.dataclass(frozen=True)
class ComponentTable:
    """Chebyshev expansion of the smooth density factor on one component.

    With t = mid + half*s, G(s) collects |q(t)| and the square roots of the
    distances to all endpoints of the *other* components, so that
    w(t) dt = G(s)/sqrt(1 - s^2) * half ds on the component.  The leading
    coefficient carries the component's equilibrium mass.
    """

    mid: float
    half: float
    coeffs: tuple[float, ...]

    @property
    def mass(self) -> float:
        return self.half * math.pi * self.coeffs[0]


@dataclasses.dataclass(frozen=True)
class EquilibriumData:
    """A solved set: gap polynomial (as roots and in monic form), Robin
    constant, capacity, total density mass, and per-component tables."""

    set: IntervalSet
    q: MonicPoly
    roots: tuple[float, ...]
    robin: float
    cap: float
    mass: float
    tables: tuple[ComponentTable, ...] = dataclasses.field(repr=False)


@dataclasses.dataclass(frozen=True)
class BalayageQuery:
    """Point mass at x swept onto the interval [b, a]; x strictly outside."""

    x: float
    b: float
    a: float

    def __post_init__(self) -> None:
        if not self.b < self.a:
            raise SetSpecError(f"balayage target needs b < a, got [{self.b}, {self.a}]")
        guard = 1e-12 * (self.a - self.b)
        if self.b - guard <= self.x <= self.a + guard:
            raise SetSpecError(f"source point {self.x} must lie outside [{self.b}, {self.a}]")


# ---------------------------------------------------------------------------
# gap polynomial


def _log_dist_sum(t: np.ndarray, points: np.ndarray) -> np.ndarray:
    """sum_j log|t - points_j|, vectorised over t."""
    if len(points) == 0:
        return np.zeros_like(t)
    return np.sum(np.log(np.abs(t[:, None] - points[None, :])), axis=1)


def _q_abs(roots: np.ndarray, t: np.ndarray) -> np.ndarray:
    """|q(t)| = exp(sum log|t - root|); 1 when there are no roots."""
    if len(roots) == 0:
        return np.ones_like(t)
    return np.exp(_log_dist_sum(t, roots))


def _q_sign(roots: np.ndarray, t: float) -> int:
    """Sign of q(t) from the parity of the roots above t."""
    return -1 if (np.sum(roots > t) % 2) else 1


def _solve_gap_roots(K: IntervalSet, cfg: NumericsConfig) -> np.ndarray:
    """Fixed-point sweeps for the gap roots; one root per bounded gap."""
    gaps = K.gaps()
    d = len(gaps)
    if d == 0:
        return np.empty(0)
    ends = np.asarray(K.endpoints())
    lam = np.array([(g0 + g1) / 2.0 for g0, g1 in gaps])
    lengths = np.array([g1 - g0 for g0, g1 in gaps])
    max_sweeps = 300
    floor_tol = 1e-13
    prev_delta = np.inf
    for _ in range(max_sweeps):
        delta = 0.0
        for k, (g0, g1) in enumerate(gaps):
            others = ends[(ends != g0) & (ends != g1)]
            lam_rest = np.delete(lam, k)
            tmid = (g0 + g1) / 2.0
            # fixed rescaling so the adaptive quadrature sees one function
            shift = float(
                np.sum(np.log(np.abs(tmid - lam_rest))) if len(lam_rest) else 0.0
            ) - 0.5 * float(np.sum(np.log(np.abs(tmid - others))))

            def f(t, _others=others, _rest=lam_rest, _shift=shift):
                logs = -0.5 * _log_dist_sum(t, _others)
                if len(_rest):
                    logs = logs + _log_dist_sum(t, _rest)
                g = np.exp(logs - _shift)
                return np.vstack([t * g, g])

            moments = _gauss_cheb_adaptive(f, g0, g1, cfg)
            new = float(moments[0] / moments[1])
            delta = max(delta, abs(new - lam[k]) / lengths[k])
            lam[k] = new
        if delta < floor_tol or delta >= prev_delta:
            return lam
        prev_delta = delta
    raise NumericsError(
        f"gap-root iteration did not converge in {max_sweeps} sweeps (delta {delta:.2e})"
    )


def _verify_gap_conditions(
    K: IntervalSet, roots: np.ndarray, cfg: NumericsConfig
) -> None:
    """Residual audit: each root must be the weighted gap mean it defines.

    Equivalent to the vanishing of int_gap q W (divide by the constant-sign
    cofactor); stated this way the integrands stay smooth.
    """
    ends = np.asarray(K.endpoints())
    for k, (g0, g1) in enumerate(K.gaps()):
        others = ends[(ends != g0) & (ends != g1)]
        lam_rest = np.delete(roots, k)
        tmid = (g0 + g1) / 2.0
        shift = float(
            np.sum(np.log(np.abs(tmid - lam_rest))) if len(lam_rest) else 0.0
        ) - 0.5 * float(np.sum(np.log(np.abs(tmid - others))))

        def f(t, _others=others, _rest=lam_rest, _shift=shift):
            logs = -0.5 * _log_dist_sum(t, _others)
            if len(_rest):
                logs = logs + _log_dist_sum(t, _rest)
            g = np.exp(logs - _shift)
            return np.vstack([t * g, g])

        moments = _gauss_cheb_adaptive(f, g0, g1, cfg)
        resid = abs(float(moments[0] / moments[1]) - roots[k]) / (g1 - g0)
        if resid > 5e-10:
            raise NumericsError(f"gap condition residual {resid:.2e} in gap {k}")


def solve_equilibrium(K: IntervalSet, cfg: NumericsConfig = DEFAULTS) -> EquilibriumData:
    """Solve for the equilibrium measure of K."""
    if K.has_degenerate():
        raise SetSpecError("equilibrium needs all intervals non-degenerate; widen() first")
    roots = _solve_gap_roots(K, cfg)
    _verify_gap_conditions(K, roots, cfg)
    q = MonicPoly(tuple(float(c) for c in _nppoly.polyfromroots(roots)[:-1]))
    tables = _component_tables(K, roots, cfg)
    mass = float(sum(tab.mass for tab in tables))
    probes = _robin_probes(K, cfg.potential_probe_count)
    robin = float(np.mean([_potential_from_tables(tables, x) for x in probes]))
    cap = math.exp(-robin)
    return EquilibriumData(
        set=K, q=q, roots=tuple(float(r) for r in roots), robin=robin, cap=cap,
        mass=mass, tables=tables,
    )


def _component_tables(
    K: IntervalSet, roots: np.ndarray, cfg: NumericsConfig
) -> tuple[ComponentTable, ...]:
    ends = np.asarray(K.endpoints())
    tables = []
    for (u, v) in K.intervals:
        mid, half = (u + v) / 2.0, (v - u) / 2.0
        others = ends[(ends != u) & (ends != v)]

        def G(s, _others=others, _mid=mid, _half=half):
            t = _mid + _half * s
            logs = -_log_dist_sum(t, _others) * 0.5
            if len(roots):
                logs = logs + _log_dist_sum(t, np.asarray(roots))
            return np.exp(logs) / (np.pi * _half)

        coeffs = chebyshev_expand(G, -1.0, 1.0, cfg)
        tables.append(
            ComponentTable(mid=mid, half=half, coeffs=tuple(float(x) for x in coeffs))
        )
    return tuple(tables)


def _robin_probes(K: IntervalSet, count: int) -> list[float]:
    """Deterministic interior probe points spread over the set."""
    if K.m >= count:
        idx = np.unique(np.round(np.linspace(0, K.m - 1, count)).astype(int))
        return [(K.intervals[j][0] + K.intervals[j][1]) / 2.0 for j in idx]
    probes = [(u + v) / 2.0 for u, v in K.intervals]
    widest = max(range(K.m), key=lambda j: K.intervals[j][1] - K.intervals[j][0])
    u, v = K.intervals[widest]
    mid, half = (u + v) / 2.0, (v - u) / 2.0
    extra = count - K.m
    angles = np.pi * np.arange(1, extra + 1) / (extra + 2)
    probes.extend(mid + half * 0.8 * np.cos(angles))
    return probes[:count]


# ---------------------------------------------------------------------------
# pointwise evaluation


def q_value(E: EquilibriumData, t: float) -> float:
    """Signed gap-polynomial value, stable at any degree."""
    r = np.asarray(E.roots)
    return _q_sign(r, t) * float(_q_abs(r, np.array([t]))[0])


def density(E: EquilibriumData, t: float, cfg: NumericsConfig = DEFAULTS):
    """Equilibrium density w(t) strictly inside a component of the set."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    ends = np.asarray(E.set.endpoints())
    roots = np.asarray(E.roots)
    out = np.empty_like(t_arr)
    for i, ti in enumerate(t_arr):
        if not E.set.contains(ti) or np.min(np.abs(ends - ti)) <= cfg.density_edge_guard:
            raise SetSpecError(
                f"density undefined at {ti}: not strictly inside a component "
                f"(guard {cfg.density_edge_guard})"
            )
        logw = -0.5 * float(_log_dist_sum(np.array([ti]), ends)[0])
        if len(roots):
            logw += float(_log_dist_sum(np.array([ti]), roots)[0])
        out[i] = math.exp(logw) / math.pi
    return out if np.ndim(t) else float(out[0])


def omega_factor(E: EquilibriumData, a: float) -> float:
    """Edge factor Omega(K, a) = lim_{t -> a-} w(t) sqrt(a - t) at a right endpoint."""
    rights = [r for _, r in E.set.intervals]
    if a not in rights:
        raise SetSpecError(f"{a} is not a right endpoint of the set")
    ends = np.asarray(E.set.endpoints())
    others = ends[ends != a]
    if len(others) != len(ends) - 1:
        raise SetSpecError("degenerate interval at the distinguished endpoint")
    roots = np.asarray(E.roots)
    logw = -0.5 * float(_log_dist_sum(np.array([a]), others)[0])
    if len(roots):
        logw += float(_log_dist_sum(np.array([a]), roots)[0])
    return math.exp(logw) / math.pi


def _phi_terms(xi: float, nterms: int) -> tuple[float, np.ndarray]:
    """Closed forms of (1/pi) int log(1/|xi - s|) T_k(s)/sqrt(1-s^2) ds.

    Inside [-1, 1]: log 2 for k = 0 and T_k(xi)/k for k >= 1; outside, with
    zeta = |xi| + sqrt(xi^2 - 1): log 2 - log zeta and sign(xi)^k zeta^-k /k.
    """
    ks = np.arange(1, nterms) if nterms > 1 else np.empty(0)
    if abs(xi) <= 1.0:
        theta = math.acos(min(1.0, max(-1.0, xi)))
        return math.log(2.0), (np.cos(ks * theta) / ks if len(ks) else ks)
    lz = math.log(abs(xi) + math.sqrt(xi * xi - 1.0))
    signs = np.ones(len(ks)) if xi > 0 else (-1.0) ** ks
    return math.log(2.0) - lz, (signs * np.exp(-ks * lz) / ks if len(ks) else ks)


def _potential_from_tables(tables: Sequence[ComponentTable], x: float) -> float:
    total = 0.0
    for tab in tables:
        xi = (x - tab.mid) / tab.half
        c = np.asarray(tab.coeffs)
        phi0, phik = _phi_terms(xi, len(c))
        series = c[0] * (phi0 + math.log(1.0 / tab.half))
        if len(c) > 1:
            series += float(c[1:] @ phik)
        total += tab.half * math.pi * series
    return total


def equilibrium_potential(E: EquilibriumData, x: float) -> float:
    """Logarithmic potential U(x) = int log(1/|x - t|) dnu(t), any real x."""
    if not math.isfinite(x):
        raise SetSpecError(f"potential needs finite x, got {x}")
    return _potential_from_tables(E.tables, x)


def capacity(E: EquilibriumData) -> float:
    """Logarithmic capacity exp(-Robin constant)."""
    return E.cap


def green(E: EquilibriumData, z: float, cfg: NumericsConfig = DEFAULTS) -> float:
    """Green's function with pole at infinity, g(z) = -U(z) - log cap, real z.

    Clamped to exactly 0 when z lies in the set and the computed value is
    within 1e-9 of zero.
    """
    g = E.robin - equilibrium_potential(E, z)
    if abs(g) <= 1e-9 and E.set.contains(z):
        return 0.0
    return g


# ---------------------------------------------------------------------------
# balayage


def balayage_density(qy: BalayageQuery, t) -> float:
    """Density at t of the balayage of a point mass at qy.x onto [qy.b, qy.a]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= qy.b) or np.any(t_arr >= qy.a):
        raise SetSpecError(f"density point must lie strictly inside [{qy.b}, {qy.a}]")
    x, b, a = qy.x, qy.b, qy.a
    num = math.sqrt(abs(x - b) * abs(x - a))
    out = num / (np.pi * np.abs(t_arr - x) * np.sqrt(np.abs(t_arr - a) * np.abs(t_arr - b)))
    return out if t_arr.ndim else float(out)


def balayage_edge_limit(qy: BalayageQuery) -> float:
    """lim_{t -> a-} sqrt(a - t) * balayage_density(qy, t)."""
    x, b, a = qy.x, qy.b, qy.a
    return math.sqrt(abs(x - b)) / (math.pi * math.sqrt(abs(x - a) * abs(a - b)))


def balayage_mass(qy: BalayageQuery, cfg: NumericsConfig = DEFAULTS) -> float:
    """Total swept mass; 1 for any admissible query (regression check)."""
    x, b, a = qy.x, qy.b, qy.a
    num = math.sqrt(abs(x - b) * abs(x - a))

    def f(t):
        return num / (np.pi * np.abs(t - x))

    return float(_gauss_cheb_adaptive(f, b, a, cfg))


def decomposition_residual(
    E: EquilibriumData,
    ctx: EndpointContext,
    t: float,
    cfg: NumericsConfig = DEFAULTS,
) -> float:
    """|w_K(t) - (w_[b,a](t) - int_{K \\ [b,a]} Bal(x; t) dnu(x))| with b = a - rho.

    The run-up density dominates w_K pointwise; the correction integral runs
    over all of K left of b.  Full components keep their own endpoint
    singularities; the truncated home component contributes a smooth
    integrand because the kernel's sqrt|x - b| factor cancels the
    quadrature weight's artificial cut at b.
    """
    a, rho = ctx.a, ctx.rho
    b = a - rho
    if not (b < t < a):
        raise SetSpecError(f"probe {t} must lie in (a - rho, a) = ({b}, {a})")
    lhs = density(E, t, cfg)
    interval_term = 1.0 / (np.pi * math.sqrt((t - b) * (a - t)))

    ends = np.asarray(E.set.endpoints())
    roots = np.asarray(E.roots)
    home = E.set.component_of(a)
    hu, _ = E.set.intervals[home]
    correction = 0.0

    def bal(x):
        return (
            np.sqrt(np.abs(x - b) * np.abs(x - a))
            / (np.pi * np.abs(t - x) * math.sqrt(abs(t - a) * abs(t - b)))
        )

    def w_smooth(x, excluded):
        logs = -0.5 * _log_dist_sum(x, ends[~np.isin(ends, excluded)])
        if len(roots):
            logs = logs + _log_dist_sum(x, roots)
        return np.exp(logs) / np.pi

    for j, (u, v) in enumerate(E.set.intervals):
        if j == home:
            continue

        def f_full(x, _u=u, _v=v):
            return bal(x) * w_smooth(x, np.array([_u, _v]))

        correction += float(_gauss_cheb_adaptive(f_full, u, v, cfg))

    if hu < b:

        def f_home(x):
            return bal(x) * w_smooth(x, np.array([hu])) * np.sqrt(b - x)

        correction += float(_gauss_cheb_adaptive(f_home, hu, b, cfg))

    rhs = interval_term - correction
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# studies


def edge_limit_profile(
    E: EquilibriumData,
    a: float,
    offsets: Sequence[float],
    cfg: NumericsConfig = DEFAULTS,
) -> list[tuple[float, float]]:
    """Table of (delta, w(a - delta) * sqrt(delta)) for empirical rate checks."""
    offs = [float(d) for d in offsets]
    if any(d <= 0 for d in offs):
        raise SetSpecError("offsets must be positive")
    if any(d2 >= d1 for d1, d2 in zip(offs, offs[1:])):
        raise SetSpecError("offsets must be strictly decreasing")
    home = E.set.component_of(a)
    hu, hv = E.set.intervals[home]
    if hv != a:
        raise SetSpecError(f"{a} is not the right endpoint of its component")
    if offs[0] >= hv - hu:
        raise SetSpecError("largest offset leaves the component interval")
    return [(d, density(E, a - d, cfg) * math.sqrt(d)) for d in offs]


def outer_convergence_study(
    K: IntervalSet,
    ctx: EndpointContext,
    m_list: Sequence[int],
    cfg: NumericsConfig = DEFAULTS,
) -> list[tuple[int, float]]:
    """Omega(K_m^+, a) along the outer filtration; nondecreasing in m."""
    out = []
    for m in m_list:
        Km = outer_approx(K, ctx, int(m))
        Em = solve_equilibrium(Km, cfg)
        out.append((int(m), omega_factor(Em, ctx.a)))
    return out


# ---------------------------------------------------------------------------
# export


def to_record(E: EquilibriumData, a: float | None = None) -> dict:
    """JSON-ready record {set, q_coeffs, cap, robin, mass[, omega]}."""
    rec = {
        "set": {"intervals": [[l, r] for l, r in E.set.intervals]},
        "q_coeffs": list(E.q.coeffs) + [1.0],
        "cap": E.cap,
        "robin": E.robin,
        "mass": E.mass,
    }
    if a is not None:
        rec["omega"] = {"a": a, "value": omega_factor(E, a)}
    return rec


def density_table(
    E: EquilibriumData, points_per_component: int = 200, cfg: NumericsConfig = DEFAULTS
) -> list[tuple[float, float]]:
    """(t, w(t)) rows on interior arccos-spaced grids, one block per component."""
    rows = []
    for (u, v) in E.set.intervals:
        mid, half = (u + v) / 2.0, (v - u) / 2.0
        theta = np.linspace(0.0, np.pi, points_per_component + 2)[1:-1]
        for t in mid + half * np.cos(theta[::-1]):
            rows.append((float(t), density(E, float(t), cfg)))
    return rows
