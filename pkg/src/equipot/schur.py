"""Witness constructions and audits for the local endpoint growth bound.

The bound under audit: if |P_n(x)| <= h(x)/sqrt(a - x) on the run-up
interval [a - rho, a) (local hypothesis) and ||P_n||_K^{1/n} stays bounded
by 1 (global hypothesis), then ||P_n||_[a-rho,a] <= n(1+o(1)) 2 pi h(a)
Omega(K, a), and this is sharp.

Sharpness witnesses are built on polynomial inverse images
K* = T_N^{-1}[-1, 1]:

    P_n(x) = h(a) * H_m(T_N(x)) * U_d(x) * sqrt(2 |T_N'(a)|) / (1 + eta)^2,

with H_m = T_{m+1}' / (m+1) (the classical extremal family with
|H_m(+-1)| = m + 1), m = floor((n - sqrt n)/N), and U_d a peaking
polynomial of degree d = floor(sqrt n) equal to 1 at a.  Two closed-form
inverse-image families ship: the affine map of a single interval (N = 1)
and the symmetric quadratic family T_2(x) = (2x^2 - 1 - alpha^2)/(1 -
alpha^2) with T_2^{-1}[-1, 1] = [-1, -alpha] u [alpha, 1] (N = 2).

``counterexample_demo`` audits T_{n+1}'/(n+1) on [-2, 1]: it satisfies the
local hypothesis with h(x) = 1/sqrt(1+x) but violates the global one, and
its endpoint value n + 1 exceeds the bound's threshold - showing the global
hypothesis cannot be dropped.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as _npcheb
from numpy.polynomial import polynomial as _nppoly

from .config import DEFAULTS, NumericsConfig
from .equilibrium import EquilibriumData, omega_factor, solve_equilibrium
from .errors import SetSpecError
from .interval_sets import EndpointContext, IntervalSet, check_interval_condition
from .numerics import ChebPoly, cheb_T_deriv


@dataclasses.dataclass(frozen=True)
class InverseImageMap:
    """A polynomial T_N with T_N^{-1}[-1, 1] equal to ``target_set``."""

    N: int
    T: ChebPoly
    target_set: IntervalSet
    a: float
    alpha: float | None = None

    def __call__(self, x):
        return self.T(x)

    def deriv_at(self, x) -> float:
        return self.T.deriv()(x)


def affine_inverse_image(u: float, v: float) -> InverseImageMap:
    """N = 1 family: the affine map of [u, v] onto [-1, 1]."""
    if not u < v:
        raise SetSpecError(f"affine map needs u < v, got [{u}, {v}]")
    T = ChebPoly((u, v), (0.0, 1.0))
    return InverseImageMap(N=1, T=T, target_set=IntervalSet(((u, v),)), a=v)


def quadratic_inverse_image(alpha: float) -> InverseImageMap:
    """N = 2 family: T_2(x) = (2x^2 - 1 - alpha^2)/(1 - alpha^2).

    T_2 maps both [-1, -alpha] and [alpha, 1] onto [-1, 1]; the
    distinguished endpoint is a = 1, where T_2'(1) = 4/(1 - alpha^2).
    """
    if not 0.0 < alpha < 1.0:
        raise SetSpecError(f"alpha must lie in (0, 1), got {alpha}")
    denom = 1.0 - alpha * alpha
    # in the Chebyshev basis of [-1, 1]: 2x^2 = T_2 + 1
    T = ChebPoly((-1.0, 1.0), (-alpha * alpha / denom, 0.0, 1.0 / denom))
    target = IntervalSet(((-1.0, -alpha), (alpha, 1.0)))
    return InverseImageMap(N=2, T=T, target_set=target, a=1.0, alpha=alpha)


def h_poly(m: int, w):
    """H_m(w) = T_{m+1}'(w)/(m+1); |H_m(+-1)| = m + 1 and |H_m| <= 1/sqrt(1-w^2) inside."""
    if m < 0:
        raise SetSpecError(f"h_poly needs m >= 0, got {m}")
    return cheb_T_deriv(m + 1, w) / (m + 1)


def peaking_poly(K: IntervalSet, a: float, d: int) -> ChebPoly:
    """U(x) = ((x - c)/(a - c))**d with c the midpoint of [min K, a].

    U(a) = 1 and |U| <= 1 on K (a must be max K); the decay away from a is
    geometric in the rescaled distance from c.  Note |U| = 1 again at the
    mirror point 2c - a = min K, so the peak is one-sided.
    """
    if d < 1:
        raise SetSpecError(f"peaking degree must be >= 1, got {d}")
    if a != K.max:
        raise SetSpecError(f"peaking point {a} must be the maximum of the set")
    c = (K.min + a) / 2.0
    if a == c:
        raise SetSpecError("set is a single point; no peaking polynomial")
    lo, hi = K.min, K.max
    mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    # ((x - c)/(a - c))^d is linear in the frame variable s: expand and convert
    lin = np.array([(mid - c) / (a - c), half / (a - c)])
    mono = _nppoly.polypow(lin, d)
    return ChebPoly((lo, hi), tuple(float(x) for x in _npcheb.poly2cheb(mono)))


@dataclasses.dataclass(frozen=True)
class SchurWitness:
    """Sharpness witness; evaluation on demand, degree <= n by construction."""

    n: int
    m: int
    eta: float
    h_a: float
    map: InverseImageMap
    peak: ChebPoly

    @property
    def scale(self) -> float:
        return math.sqrt(2.0 * abs(self.map.deriv_at(self.map.a))) / (1.0 + self.eta) ** 2

    @property
    def degree(self) -> int:
        return self.map.N * self.m + self.peak.degree

    @property
    def value_at_a(self) -> float:
        return self.h_a * (self.m + 1) * self.scale

    def __call__(self, x):
        w = self.map(x)
        return self.h_a * h_poly(self.m, w) * self.peak(x) * self.scale


def build_witness(
    map: InverseImageMap, h_a: float, n: int, eta: float
) -> SchurWitness:
    """Assemble the witness for degree budget n and headroom parameter eta."""
    if n < 16:
        raise SetSpecError(f"witness needs n >= 16, got {n}")
    if not 0.0 < eta <= 1.0:
        raise SetSpecError(f"eta must lie in (0, 1], got {eta}")
    if h_a <= 0.0:
        raise SetSpecError(f"h_a must be positive, got {h_a}")
    m = int((n - math.sqrt(n)) // map.N)
    d = int(math.isqrt(n))
    peak = peaking_poly(map.target_set, map.a, d)
    wit = SchurWitness(n=n, m=m, eta=eta, h_a=h_a, map=map, peak=peak)
    if wit.degree > n:
        raise SetSpecError(f"witness degree {wit.degree} exceeds budget {n}")
    return wit


@dataclasses.dataclass(frozen=True)
class AuditReport:
    """Hypothesis and conclusion checks for one polynomial at one degree.

    local_margin is the worst grid value of |P(x)| sqrt(a-x) / h(x); local_ok
    allows 1 + 1e-9.  growth_estimate is the grid sup-norm to the power 1/n
    (a lower bound on the true norm growth).  norm_ratio and point_ratio
    compare the run-up norm and |P(a)| against n * 2 pi h(a) Omega(K, a).
    """

    n: int
    local_ok: bool
    local_margin: float
    growth_estimate: float
    norm_ratio: float
    point_ratio: float
    bound_threshold: float
    local_grid_points: int
    growth_grid_per_component: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def audit_bound(
    P: Callable[[np.ndarray], np.ndarray],
    h: Callable[[float], float],
    K: IntervalSet,
    ctx: EndpointContext,
    n: int,
    E: EquilibriumData,
    local_grid_points: int = 2000,
) -> AuditReport:
    """Audit one polynomial evaluator against both hypotheses and the bound."""
    a, rho = ctx.a, ctx.rho
    mid, half = a - rho / 2.0, rho / 2.0
    theta = np.linspace(0.0, np.pi, local_grid_points + 1)[1:]
    xs = mid + half * np.cos(theta)  # in [a - rho, a)
    Px = np.abs(np.asarray(P(xs), dtype=float))
    hx = np.array([h(float(x)) for x in xs])
    if np.any(hx <= 0.0):
        raise SetSpecError("h must be positive on [a - rho, a]")
    local_vals = Px * np.sqrt(a - xs) / hx
    local_margin = float(np.max(local_vals)) if len(xs) else 0.0
    local_ok = local_margin <= 1.0 + 1e-9

    per = 64 * (n + 1)
    sup = 0.0
    for (u, v) in K.intervals:
        th = np.linspace(0.0, np.pi, per)
        vals = np.abs(np.asarray(P((u + v) / 2.0 + (v - u) / 2.0 * np.cos(th)), dtype=float))
        sup = max(sup, float(np.max(vals)))
    growth = sup ** (1.0 / n) if sup > 0 else 0.0

    threshold = n * 2.0 * math.pi * h(a) * omega_factor(E, a)
    runup = np.concatenate([xs, [a]])
    runup_sup = float(np.max(np.abs(np.asarray(P(runup), dtype=float))))
    point = abs(float(np.asarray(P(np.array([a])), dtype=float)[0]))
    return AuditReport(
        n=n,
        local_ok=bool(local_ok),
        local_margin=local_margin,
        growth_estimate=growth,
        norm_ratio=runup_sup / threshold if threshold > 0 else math.inf,
        point_ratio=point / threshold if threshold > 0 else math.inf,
        bound_threshold=threshold,
        local_grid_points=local_grid_points,
        growth_grid_per_component=per,
    )


def audit_witness(
    wit: SchurWitness,
    h: Callable[[float], float] | None = None,
    cfg: NumericsConfig = DEFAULTS,
) -> AuditReport:
    """Audit a built witness on its own target set (h defaults to h_a)."""
    K = wit.map.target_set
    ctx = check_interval_condition(K, wit.map.a)
    E = solve_equilibrium(K, cfg)
    hfun = (lambda x: wit.h_a) if h is None else h
    return audit_bound(wit, hfun, K, ctx, wit.n, E)


def counterexample_demo(n: int, cfg: NumericsConfig = DEFAULTS) -> AuditReport:
    """Audit P_n = T_{n+1}'/(n+1) on [-2, 1] with a = 1, rho = 1.

    The local hypothesis holds with h(x) = 1/sqrt(1+x), the global one fails
    (norm growth 2 + sqrt 3 from the excursion to -2), and |P_n(1)| = n + 1
    exceeds the bound threshold n * sqrt(2/3).
    """
    if n < 1:
        raise SetSpecError(f"counterexample needs n >= 1, got {n}")
    K = IntervalSet(((-2.0, 1.0),))
    ctx = check_interval_condition(K, 1.0, rho=1.0)
    E = solve_equilibrium(K, cfg)

    def P(x):
        return cheb_T_deriv(n + 1, x) / (n + 1)

    def h(x: float) -> float:
        return 1.0 / math.sqrt(1.0 + x)

    return audit_bound(P, h, K, ctx, n, E)
