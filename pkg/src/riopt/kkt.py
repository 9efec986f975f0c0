"""KKT certificate checks for interval problems on Hadamard manifolds.

Every check evaluates the directional-derivative inequalities at ``x0``
along ``v = log_{x0}(x)`` for each ``x`` in a feasible sample, with a single
multiplier vector shared by all sample points, plus complementary
slackness at ``x0``. The checks are sufficiency certificates: a passing
certificate marks ``x0`` as an efficient candidate.

Certificate ids:

``T31``  real-valued problem ``min F s.t. g_i <= 0``
``T32``  split multipliers on the lower and upper endpoint problems
``T33``  weighted objective ``l1*lower(f) + l2*upper(f)`` with ``upper(G_i)``
``T34``  interval form ``0 <= f' + sum mu_i G_i'``
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .interval import Interval, add, norm, scale
from .manifold import Point
from .problem import FeasibleSample, Riop, ScalarProblem, efficient_indices, is_feasible, lagrangian_value
from .rivf import DERIV_TOL, LADDER, _endpoint_slope, _gh_dir_deriv_raw

__all__ = [
    "THEOREMS",
    "Multipliers",
    "KktCertificate",
    "check_kkt_real",
    "check_kkt_split",
    "check_kkt_weighted",
    "check_kkt_interval",
    "check_kkt",
    "find_multipliers",
    "check_lagrange_multiplier",
    "check_global_min_characterization",
]

THEOREMS = ("T31", "T32", "T33", "T34")
INEQ_TOL = 1e-7
SLACK_TOL = 1e-8
ACTIVE_TOL = 1e-8
MU_MAX = 100.0
WEIGHT_RATIOS = (1.0, 0.5, 2.0, 0.25, 4.0, 0.125, 8.0, 1 / 16, 16.0)


@dataclass(frozen=True)
class Multipliers:
    mu: tuple[float, ...] = ()
    split: Optional[tuple[tuple[float, ...], tuple[float, ...]]] = None
    weights: Optional[tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        vals = list(self.mu)
        if self.split is not None:
            lo, hi = (tuple(float(m) for m in s) for s in self.split)
            object.__setattr__(self, "split", (lo, hi))
            vals += list(lo) + list(hi)
        if any(m < 0 for m in vals):
            raise ValueError("multipliers must be nonnegative")
        if self.weights is not None:
            w = tuple(float(a) for a in self.weights)
            if len(w) != 2 or not (w[0] > 0 and w[1] > 0):
                raise ValueError("weights must be two strictly positive numbers")
            object.__setattr__(self, "weights", w)

    def __str__(self) -> str:
        parts = []
        if self.mu:
            parts.append("mu=(" + ", ".join(f"{m:.6g}" for m in self.mu) + ")")
        if self.split is not None:
            lo, hi = self.split
            parts.append("mu_lower=(" + ", ".join(f"{m:.6g}" for m in lo) + ")")
            parts.append("mu_upper=(" + ", ".join(f"{m:.6g}" for m in hi) + ")")
        if self.weights is not None:
            parts.append(f"weights=({self.weights[0]:.6g}, {self.weights[1]:.6g})")
        return " ".join(parts) or "mu=()"


@dataclass
class KktCertificate:
    theorem: str
    point: Point
    multipliers: Multipliers
    directions_checked: int
    worst_violation: float  # smallest left-hand side over the sample; >= -tol passes
    complementary_slackness: bool
    verdict: bool
    worst_direction: Optional[np.ndarray] = None


def _coords(x) -> np.ndarray:
    return x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)


@dataclass
class _Slopes:
    """Endpoint directional derivatives at x0 toward each sample point."""

    dirs: list[np.ndarray]
    fl: np.ndarray
    fu: np.ndarray
    gl: np.ndarray  # (K, r)
    gu: np.ndarray


def _slopes(p: Riop, x0: np.ndarray, sample: FeasibleSample) -> _Slopes:
    kind = p.manifold
    dirs, fl, fu, gl, gu = [], [], [], [], []
    for x in sample.points:
        v = kind.log_raw(x0, x)
        d = _gh_dir_deriv_raw(p.objective, x0, v)
        gs = [_gh_dir_deriv_raw(g, x0, v) for g in p.constraints]
        dirs.append(v)
        fl.append(d.lower_slope)
        fu.append(d.upper_slope)
        gl.append([g.lower_slope for g in gs])
        gu.append([g.upper_slope for g in gs])
    r = p.r
    return _Slopes(
        dirs,
        np.asarray(fl),
        np.asarray(fu),
        np.asarray(gl, dtype=float).reshape(len(dirs), r),
        np.asarray(gu, dtype=float).reshape(len(dirs), r),
    )


def _finish(theorem, x0, kind, mult, lhs: np.ndarray, dirs, slack_ok: bool) -> KktCertificate:
    if lhs.size:
        k = int(np.argmin(lhs))
        worst, wdir = float(lhs[k]), dirs[k]
    else:
        worst, wdir = 0.0, None
    verdict = worst >= -INEQ_TOL and slack_ok
    return KktCertificate(theorem, kind.point(x0), mult, int(lhs.size), worst, slack_ok, verdict, wdir)


def check_kkt_real(
    F: ScalarProblem, x0, mu: Multipliers, sample: FeasibleSample
) -> KktCertificate:
    """``F'(x0, v) + sum mu_i g_i'(x0, v) >= 0`` over the sample and ``mu_i g_i(x0) = 0``."""
    kind = F.manifold
    c0 = _coords(x0)
    m = np.asarray(mu.mu, dtype=float)
    if m.size != len(F.constraints):
        raise ValueError(f"expected {len(F.constraints)} multipliers, got {m.size}")
    lhs, dirs = [], []
    for x in sample.points:
        v = kind.log_raw(c0, x)
        total = _real_slope(F.objective, kind, c0, v)
        for mi, g in zip(m, F.constraints):
            if mi:
                total += mi * _real_slope(g, kind, c0, v)
        lhs.append(total)
        dirs.append(v)
    slack = all(abs(mi * g(c0)) <= SLACK_TOL for mi, g in zip(m, F.constraints))
    return _finish("T31", c0, kind, mu, np.asarray(lhs), dirs, slack)


def _real_slope(e, kind, x0, v) -> float:
    return _endpoint_slope(e, kind, x0, v, LADDER, None, DERIV_TOL)[0]


def check_kkt_split(p: Riop, x0, m: Multipliers, sample: FeasibleSample, _s: Optional[_Slopes] = None) -> KktCertificate:
    if m.split is None:
        raise ValueError("T32 needs split multipliers (mu_lower, mu_upper)")
    c0 = _coords(x0)
    s = _s or _slopes(p, c0, sample)
    ml, mu_ = (np.asarray(a, dtype=float) for a in m.split)
    _check_len(p, ml, mu_)
    low = s.fl + s.gl @ ml
    up = s.fu + s.gu @ mu_
    lhs = np.minimum(low, up)
    slack = True
    for i, g in enumerate(p.constraints):
        glo, ghi = g.endpoints(c0)
        slack &= abs(ml[i] * glo) <= SLACK_TOL and abs(mu_[i] * ghi) <= SLACK_TOL
    return _finish("T32", c0, p.manifold, m, lhs, s.dirs, bool(slack))


def check_kkt_weighted(p: Riop, x0, m: Multipliers, sample: FeasibleSample, _s: Optional[_Slopes] = None) -> KktCertificate:
    if m.weights is None:
        raise ValueError("T33 needs weights (l1, l2)")
    c0 = _coords(x0)
    s = _s or _slopes(p, c0, sample)
    mv = np.asarray(m.mu, dtype=float)
    _check_len(p, mv)
    l1, l2 = m.weights
    lhs = l1 * s.fl + l2 * s.fu + s.gu @ mv
    slack = all(abs(mv[i] * g.endpoints(c0)[1]) <= SLACK_TOL for i, g in enumerate(p.constraints))
    return _finish("T33", c0, p.manifold, m, lhs, s.dirs, slack)


def check_kkt_interval(p: Riop, x0, m: Multipliers, sample: FeasibleSample, _s: Optional[_Slopes] = None) -> KktCertificate:
    """``[0, 0] <= f'(x0, v) + sum mu_i G_i'(x0, v)`` as a Minkowski sum of
    derivative intervals, with ``mu_i G_i(x0) = [0, 0]``."""
    c0 = _coords(x0)
    s = _s or _slopes(p, c0, sample)
    mv = np.asarray(m.mu, dtype=float)
    _check_len(p, mv)
    lhs = []
    for k in range(len(s.dirs)):
        total = Interval(min(s.fl[k], s.fu[k]), max(s.fl[k], s.fu[k]))
        for i in range(p.r):
            gi = Interval(min(s.gl[k, i], s.gu[k, i]), max(s.gl[k, i], s.gu[k, i]))
            total = add(total, scale(mv[i], gi))
        lhs.append(total.lo)
    slack = all(norm(scale(mv[i], g.at(c0))) <= SLACK_TOL for i, g in enumerate(p.constraints))
    return _finish("T34", c0, p.manifold, m, np.asarray(lhs), s.dirs, slack)


def _check_len(p: Riop, *vecs: np.ndarray) -> None:
    for v in vecs:
        if v.size != p.r:
            raise ValueError(f"expected {p.r} multipliers, got {v.size}")


def check_kkt(p: Riop, theorem: str, x0, m: Multipliers, sample: FeasibleSample) -> KktCertificate:
    checks = {"T32": check_kkt_split, "T33": check_kkt_weighted, "T34": check_kkt_interval}
    if theorem not in checks:
        raise ValueError(f"unknown interval KKT theorem {theorem!r}")
    return checks[theorem](p, x0, m, sample)


# multiplier search -----------------------------------------------------------


def _grid_search(a: np.ndarray, B: np.ndarray, tol: float = INEQ_TOL) -> Optional[np.ndarray]:
    """Smallest-l1 ``mu`` in ``[0, MU_MAX]^k`` with ``min(a + B mu) >= -tol``.

    Coarse-to-fine grid: step 10 over the whole box, then refinement by a
    factor 10 around the current best point (the verified point of smallest
    l1 norm if one exists, else the point of largest margin).
    """
    k = B.shape[1]
    if k == 0:
        return np.zeros(0) if (a.size == 0 or a.min() >= -tol) else None
    per_dim = 11 if k <= 3 else 5
    lo, hi, step = np.zeros(k), np.full(k, MU_MAX), MU_MAX / (per_dim - 1)
    best_ok: Optional[np.ndarray] = None
    for _ in range(5):
        axes = [np.unique(np.clip(np.round((lo[i] + step * np.arange(per_dim + 1)) / step) * step, 0.0, hi[i]))
                for i in range(k)]
        axes = [ax[(ax >= lo[i] - 1e-12) & (ax <= hi[i] + 1e-12)] for i, ax in enumerate(axes)]
        grid = np.array(list(itertools.product(*axes)))
        margin = (a[:, None] + B @ grid.T).min(axis=0) if a.size else np.zeros(len(grid))
        ok = margin >= -tol
        if ok.any():
            idx = np.flatnonzero(ok)
            l1 = grid[idx].sum(axis=1)
            pick = idx[np.lexsort((-margin[idx], l1))[0]]
            if best_ok is None or grid[pick].sum() <= best_ok.sum():
                best_ok = grid[pick]
            center = best_ok
        else:
            center = grid[int(np.argmax(margin))]
        lo = np.maximum(center - step, 0.0)
        hi = np.minimum(center + step, MU_MAX)
        step /= 10.0
    return best_ok


def _active(values: Sequence[float]) -> np.ndarray:
    return np.array([abs(v) <= ACTIVE_TOL for v in values], dtype=bool)


def _search(a: np.ndarray, B: np.ndarray, active: np.ndarray) -> Optional[np.ndarray]:
    mu = np.zeros(B.shape[1])
    sub = _grid_search(a, B[:, active])
    if sub is None:
        return None
    mu[active] = sub
    return mu


def find_multipliers(
    p: Riop, x0, theorem: str, sample: FeasibleSample, F: Optional[ScalarProblem] = None
) -> Optional[Multipliers]:
    """Search for multipliers certifying ``theorem`` at ``x0``; ``None`` if the
    grid search finds none. Support is restricted to active constraints and
    every candidate is re-verified by the matching check."""
    c0 = _coords(x0)
    if theorem == "T31":
        if F is None:
            raise ValueError("T31 needs the scalar problem")
        return _find_real(F, c0, sample)
    s = _slopes(p, c0, sample)
    vals = [g.endpoints(c0) for g in p.constraints]
    if theorem == "T32":
        ml = _search(s.fl, s.gl, _active([v[0] for v in vals]))
        mu_ = _search(s.fu, s.gu, _active([v[1] for v in vals]))
        if ml is None or mu_ is None:
            return None
        m = Multipliers(split=(tuple(ml), tuple(mu_)))
        return m if check_kkt_split(p, c0, m, sample, s).verdict else None
    if theorem == "T33":
        act = _active([v[1] for v in vals])
        for ratio in WEIGHT_RATIOS:
            l1, l2 = ratio / (1 + ratio), 1 / (1 + ratio)
            mu = _search(l1 * s.fl + l2 * s.fu, s.gu, act)
            if mu is not None:
                m = Multipliers(mu=tuple(mu), weights=(l1, l2))
                if check_kkt_weighted(p, c0, m, sample, s).verdict:
                    return m
        return None
    if theorem == "T34":
        act = np.array([max(abs(lo), abs(hi)) <= ACTIVE_TOL for lo, hi in vals], dtype=bool)
        mu = _search(np.minimum(s.fl, s.fu), np.minimum(s.gl, s.gu), act)
        if mu is None:
            return None
        m = Multipliers(mu=tuple(mu))
        return m if check_kkt_interval(p, c0, m, sample, s).verdict else None
    raise ValueError(f"unknown theorem {theorem!r}")


def _find_real(F: ScalarProblem, c0: np.ndarray, sample: FeasibleSample) -> Optional[Multipliers]:
    kind = F.manifold
    a, B = [], []
    for x in sample.points:
        v = kind.log_raw(c0, x)
        a.append(_real_slope(F.objective, kind, c0, v))
        B.append([_real_slope(g, kind, c0, v) for g in F.constraints])
    a_arr = np.asarray(a)
    B_arr = np.asarray(B, dtype=float).reshape(len(a), len(F.constraints))
    mu = _search(a_arr, B_arr, _active([g(c0) for g in F.constraints]))
    if mu is None:
        return None
    m = Multipliers(mu=tuple(mu))
    return m if check_kkt_real(F, c0, m, sample).verdict else None


# Lagrange multipliers --------------------------------------------------------


def _same_value_sets(A: Sequence[Interval], B: Sequence[Interval], tol: float) -> bool:
    def covered(xs, ys):
        return all(any(max(abs(x.lo - y.lo), abs(x.hi - y.hi)) <= tol for y in ys) for x in xs)

    return covered(A, B) and covered(B, A)


def check_lagrange_multiplier(
    p: Riop,
    mu: Multipliers,
    domain_sample: Sequence[np.ndarray],
    feasible_sample: FeasibleSample,
    tol: float = 1e-8,
) -> bool:
    """Sample-level test of ``min(f, X) = min_{x in D} L(x, mu)``.

    Both efficient-value sets are computed over the pooled points (domain
    sample plus feasible sample), the objective side restricted to the
    feasible ones, and compared as sets up to ``tol`` in the Hausdorff metric.
    """
    pool = [np.asarray(x, dtype=float) for x in domain_sample] + list(feasible_sample.points)
    pool = [x for x in pool if p.in_domain(x)]
    feas = [x for x in pool if is_feasible(p, x, feasible_sample.tol)]
    if not pool or not feas:
        raise ValueError("empty samples")
    fvals = [p.objective.at(x) for x in feas]
    lvals = [lagrangian_value(p, x, mu.mu) for x in pool]
    ef = [fvals[i] for i in efficient_indices(fvals)]
    el = [lvals[i] for i in efficient_indices(lvals)]
    return _same_value_sets(ef, el, tol)


def check_global_min_characterization(
    p: Riop,
    x_star,
    mu: Multipliers,
    domain_sample: Sequence[np.ndarray],
    tol: float = 1e-8,
) -> bool:
    """``x*`` feasible, no sampled ``L(x, mu)`` strictly below ``L(x*, mu)``,
    and ``mu_i G_i(x*) = [0, 0]`` for all ``i``."""
    c = _coords(x_star)
    if not is_feasible(p, c):
        return False
    for i, g in enumerate(p.constraints):
        if norm(scale(mu.mu[i], g.at(c))) > tol:
            return False
    ls = lagrangian_value(p, c, mu.mu)
    for x in domain_sample:
        x = np.asarray(x, dtype=float)
        if not p.in_domain(x):
            continue
        lx = lagrangian_value(p, x, mu.mu)
        if lx.lo <= ls.lo and lx.hi <= ls.hi and (lx.lo < ls.lo - tol or lx.hi < ls.hi - tol):
            return False
    return True
