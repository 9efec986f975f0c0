"""Lagrangian, Wolfe dual feasibility and duality-gap checks.

A pair ``(x, mu)`` is dual feasible when ``H(x, mu, v) = f'(x, v) + sum
mu_i G_i'(x, v)`` is the zero interval for every probed direction ``v``.
``H`` is assembled from separate gH-directional derivatives of ``f`` and
each ``G_i``; it is not the derivative of the Lagrangian.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .interval import ZERO, Interval, add, compare, norm, scale
from .manifold import Point, Tangent
from .problem import (
    FeasibleSample,
    Riop,
    check_efficiency,
    efficient_indices,
    is_feasible,
    lagrangian_value,
)
from .rivf import BoxSampler, DerivativeError, _gh_dir_deriv_raw, check_geodesic_convexity

__all__ = [
    "DualPoint",
    "GapReport",
    "lagrangian",
    "wolfe_H",
    "is_dual_feasible",
    "check_weak_duality",
    "check_no_gap",
    "discover_duals",
    "convexity_hypothesis",
]

DUAL_TOL = 1e-7
WEAK_TOL = 1e-7
GAP_TOL = 1e-8


@dataclass
class DualPoint:
    x: Point
    mu: tuple[float, ...]
    directions: list[np.ndarray]
    worst_H_norm: float
    tol: float = DUAL_TOL

    @property
    def feasible(self) -> bool:
        return self.worst_H_norm <= self.tol


@dataclass
class GapReport:
    # weak_verified | weak_violated | no_gap_weak | no_gap_strong | gap_unknown
    kind: str
    primal_value: Optional[Interval] = None
    dual_value: Optional[Interval] = None
    witness: Optional[tuple[Point, DualPoint]] = None
    hypothesis_ok: bool = True
    worst_violation: float = 0.0
    pairs_checked: int = 0
    primal_efficient: Optional[bool] = None
    dual_efficient: Optional[bool] = None
    notes: list[str] = field(default_factory=list)


def _coords(x) -> np.ndarray:
    return x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)


def _check_mu(p: Riop, mu) -> tuple[float, ...]:
    m = tuple(float(a) for a in mu)
    if len(m) != p.r:
        raise ValueError(f"expected {p.r} multipliers, got {len(m)}")
    if any(a < 0 for a in m):
        raise ValueError("multipliers must be nonnegative")
    return m


def lagrangian(p: Riop, x: Point, mu: Sequence[float]) -> Interval:
    """``L(x, mu) = f(x) + sum mu_i G_i(x)`` (Minkowski sum)."""
    return lagrangian_value(p, x, _check_mu(p, mu))


def _H_raw(p: Riop, x: np.ndarray, mu: tuple[float, ...], v: np.ndarray) -> Interval:
    total = _gh_dir_deriv_raw(p.objective, x, v).value
    for m, g in zip(mu, p.constraints):
        total = add(total, scale(m, _gh_dir_deriv_raw(g, x, v).value))
    return total


def wolfe_H(p: Riop, x: Point, mu: Sequence[float], v: Tangent) -> Interval:
    """``f'(x, v) + sum mu_i G_i'(x, v)`` from separate derivative intervals."""
    if not np.array_equal(v.at.coords, x.coords):
        raise ValueError("tangent vector is not based at x")
    return _H_raw(p, x.coords, _check_mu(p, mu), v.vec)


def _probe_dirs(p: Riop, x: np.ndarray, probe: Optional[FeasibleSample]) -> list[np.ndarray]:
    kind = p.manifold
    dirs = []
    if probe is not None:
        for y in probe.points:
            v = kind.log_raw(x, y)
            if np.any(v):
                dirs.append(v)
    for e in kind.unit_basis(x):
        dirs.extend([e, -e])
    return dirs


def is_dual_feasible(
    p: Riop, x, mu: Sequence[float], probe: Optional[FeasibleSample], tol: float = DUAL_TOL
) -> DualPoint:
    """Largest ``||H(x, mu, v)||`` over ``log_x`` of the probe points and the
    unit coordinate directions ``+-e_i``. Non-convergent derivatives count as
    an infinite norm."""
    c = _coords(x)
    m = _check_mu(p, mu)
    dirs = _probe_dirs(p, c, probe)
    worst = 0.0
    for v in dirs:
        try:
            worst = max(worst, norm(_H_raw(p, c, m, v)))
        except DerivativeError:
            worst = float("inf")
            break
    return DualPoint(p.manifold.point(c), m, dirs, worst, tol)


def convexity_hypothesis(p: Riop, seed: int = 0) -> bool:
    """Sample-verified geodesic convexity of ``f`` and every ``G_i`` on the box."""
    sampler = BoxSampler(p.manifold, p.lo, p.hi)
    return all(
        check_geodesic_convexity(g, sampler, seed=seed).convex for g in (p.objective, *p.constraints)
    )


def check_weak_duality(
    p: Riop,
    primal: FeasibleSample,
    duals: Sequence[DualPoint],
    tol: float = WEAK_TOL,
    hypothesis_ok: Optional[bool] = None,
) -> GapReport:
    """Check ``L(x1, mu) <= f(x0)`` for every primal sample point ``x0`` and
    every dual-feasible ``(x1, mu)``. Reports the most violating pair."""
    if not len(primal) or not duals:
        raise ValueError("empty primal sample or dual list")
    if hypothesis_ok is None:
        hypothesis_ok = convexity_hypothesis(p, primal.seed)
    fvals = [p.objective.at(x) for x in primal.points]
    flo = np.array([a.lo for a in fvals])
    fhi = np.array([a.hi for a in fvals])
    worst, wpair = -np.inf, None
    pairs = 0
    skipped = 0
    for d in duals:
        if not d.feasible:
            skipped += 1
            continue
        L = lagrangian_value(p, d.x, d.mu)
        gap = np.maximum(L.lo - flo, L.hi - fhi)
        k = int(np.argmax(gap))
        pairs += len(gap)
        if gap[k] > worst:
            worst, wpair = float(gap[k]), (k, d, L)
    if wpair is None:
        raise ValueError("no dual-feasible point among the duals")
    k, d, L = wpair
    kind = "weak_verified" if worst <= tol else "weak_violated"
    rep = GapReport(
        kind,
        primal_value=fvals[k],
        dual_value=L,
        witness=(p.manifold.point(primal.points[k]), d),
        hypothesis_ok=hypothesis_ok,
        worst_violation=max(worst, 0.0),
        pairs_checked=pairs,
    )
    if skipped:
        rep.notes.append(f"{skipped} dual point(s) skipped as not dual feasible")
    if not hypothesis_ok:
        rep.notes.append("convexity hypothesis failed on samples")
    return rep


def check_no_gap(
    p: Riop,
    x_star,
    mu_star: Sequence[float],
    primal: FeasibleSample,
    duals: Sequence[DualPoint],
    tol: float = GAP_TOL,
) -> GapReport:
    """Strong no-gap: ``(x*, mu*)`` dual feasible with ``sum mu_i G_i(x*) = [0, 0]``.
    Otherwise weak no-gap: some efficient sampled primal value equals some
    maximal dual value within ``tol``. Otherwise ``gap_unknown``."""
    c = _coords(x_star)
    m = _check_mu(p, mu_star)
    fx = p.objective.at(c)
    feasible = is_feasible(p, c, primal.tol or 0.0)
    dstar = is_dual_feasible(p, c, m, primal)
    slack = ZERO
    for mi, g in zip(m, p.constraints):
        slack = add(slack, scale(mi, g.at(c)))
    feas_duals = [d for d in duals if d.feasible]
    if feasible and dstar.feasible and norm(slack) <= tol:
        L = lagrangian_value(p, c, m)
        rep = GapReport("no_gap_strong", fx, L, (p.manifold.point(c), dstar))
        rep.primal_efficient = check_efficiency(p, c, primal).efficient
        rep.dual_efficient = _dual_efficient(p, L, feas_duals, tol)
        return rep
    if not feas_duals:
        return GapReport("gap_unknown", fx, None, None, notes=["no dual-feasible point available"])

    fvals = [p.objective.at(x) for x in primal.points]
    eff_p = efficient_indices(fvals)
    lvals = [lagrangian_value(p, d.x, d.mu) for d in feas_duals]
    eff_d = efficient_indices(lvals, maximize=True)
    for i in eff_p:
        for j in eff_d:
            a, b = fvals[i], lvals[j]
            if max(abs(a.lo - b.lo), abs(a.hi - b.hi)) <= tol:
                rep = GapReport("no_gap_weak", a, b, (p.manifold.point(primal.points[i]), feas_duals[j]))
                rep.primal_efficient = True
                rep.dual_efficient = True
                return rep
    return GapReport("gap_unknown", fx, None, None, notes=["no common efficient value found"])


def _dual_efficient(p: Riop, L: Interval, duals: Sequence[DualPoint], tol: float) -> bool:
    """``L`` is not strictly below (in the maximization sense) any other dual value."""
    for d in duals:
        other = lagrangian_value(p, d.x, d.mu)
        rel = compare(L, other)
        if rel.leq and (L.lo < other.lo - tol or L.hi < other.hi - tol):
            return False
    return True


def discover_duals(
    p: Riop,
    points: Sequence[np.ndarray],
    probe: Optional[FeasibleSample],
    tol: float = DUAL_TOL,
) -> list[DualPoint]:
    """Fit multipliers at candidate points and keep the dual-feasible pairs.

    At each point the endpoint slopes along ``+-e_i`` give linear equations
    ``a + B mu = 0``; the least-squares solution clipped to ``mu >= 0`` is
    then checked with :func:`is_dual_feasible`.
    """
    kind = p.manifold
    out: list[DualPoint] = []
    seen: set[bytes] = set()
    for x in points:
        c = _coords(x)
        if not p.in_domain(c) or c.tobytes() in seen:
            continue
        seen.add(c.tobytes())
        rows_a, rows_b = [], []
        try:
            for e in kind.unit_basis(c):
                for v in (e, -e):
                    d = _gh_dir_deriv_raw(p.objective, c, v)
                    gs = [_gh_dir_deriv_raw(g, c, v) for g in p.constraints]
                    rows_a += [d.lower_slope, d.upper_slope]
                    rows_b += [[g.lower_slope for g in gs], [g.upper_slope for g in gs]]
        except DerivativeError:
            continue
        a = np.asarray(rows_a)
        if p.r:
            B = np.asarray(rows_b, dtype=float)
            mu = np.clip(np.linalg.lstsq(B, -a, rcond=None)[0], 0.0, None)
            mu[np.abs(mu) < 1e-12] = 0.0
        else:
            mu = np.zeros(0)
        # cheap screen on the coordinate directions before the full probe
        if not is_dual_feasible(p, c, tuple(mu), None, tol).feasible:
            continue
        dp = is_dual_feasible(p, c, tuple(mu), probe, tol)
        if dp.feasible:
            out.append(dp)
    return out
