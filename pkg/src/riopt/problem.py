"""Interval optimization problems on a Hadamard manifold.

``min f(x)`` subject to ``x`` in an open coordinate box and ``G_i(x) <= 0``
under the interval order. Efficiency is certified against finite feasible
samples; scalarized problems are solved by a multistart penalized
Riemannian gradient descent.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .expr import Expr, ExprDomainError, Num
from .interval import Interval, add, compare, scale
from .manifold import ManifoldKind, Point
from .rivf import Rivf

__all__ = [
    "EmptySampleError",
    "Riop",
    "FeasibleSample",
    "EfficiencyCertificate",
    "ScalarProblem",
    "SolveSettings",
    "SolveCandidate",
    "is_feasible",
    "sample_feasible",
    "sample_domain",
    "scalarize",
    "solve_scalar",
    "check_efficiency",
    "efficient_indices",
    "solve",
    "lagrangian_value",
]

REPAIR_TOL = 1e-9


class EmptySampleError(RuntimeError):
    """No feasible point was found within the sampling budget."""


@dataclass(frozen=True, eq=False)
class Riop:
    manifold: ManifoldKind
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    objective: Rivf
    constraints: tuple[Rivf, ...] = ()

    def __post_init__(self):
        n = self.manifold.dim
        object.__setattr__(self, "lo", tuple(float(a) for a in self.lo))
        object.__setattr__(self, "hi", tuple(float(a) for a in self.hi))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(self.lo) != n or len(self.hi) != n:
            raise ValueError(f"domain box must have {n} bounds per side")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError("domain box has an empty side")
        for g in (self.objective, *self.constraints):
            if g.domain != self.manifold:
                raise ValueError("all RIVFs must share the problem manifold")

    @property
    def r(self) -> int:
        return len(self.constraints)

    def in_domain(self, x: np.ndarray) -> bool:
        return bool(
            np.all(x > np.asarray(self.lo))
            and np.all(x < np.asarray(self.hi))
            and self.manifold.contains(x)
        )

    def point(self, coords) -> Point:
        return self.manifold.point(coords)


def _coords(x) -> np.ndarray:
    return x.coords if isinstance(x, Point) else np.asarray(x, dtype=float)


def is_feasible(p: Riop, x, tol: float = 0.0) -> bool:
    """``x`` lies in the domain box and every ``G_i(x) <= [0, 0]``."""
    c = _coords(x)
    if not p.in_domain(c):
        return False
    for g in p.constraints:
        lo, hi = g.endpoints(c)
        if tol == 0.0:
            if not compare(Interval(lo, hi), Interval(0.0, 0.0)).leq:
                return False
        elif hi > tol:
            return False
    return True


@dataclass
class FeasibleSample:
    points: list[np.ndarray]
    resolution: str
    seed: int
    tol: float = 0.0

    def __len__(self) -> int:
        return len(self.points)


def _averaging_maps(dim: int) -> list[tuple[str, Callable[[np.ndarray], np.ndarray]]]:
    maps = []
    for i, j in itertools.combinations(range(dim), 2):
        def pair(x, i=i, j=j):
            y = x.copy()
            y[i] = y[j] = 0.5 * (x[i] + x[j])
            return y
        maps.append((f"avg(x{i + 1},x{j + 1})", pair))
    if dim > 2:
        def full(x):
            return np.full_like(x, x.mean())
        maps.append(("avg(all)", full))
    return maps


def _safe(pred, x) -> bool:
    try:
        return pred(x)
    except ExprDomainError:
        return False


def _sample_set(
    manifold: ManifoldKind,
    lo: Sequence[float],
    hi: Sequence[float],
    feasible: Callable[[np.ndarray], bool],
    n: int,
    seed: int,
    budget: Optional[int] = None,
) -> FeasibleSample:
    rng = np.random.default_rng(seed)
    lo_a, hi_a = np.asarray(lo, float), np.asarray(hi, float)

    def draw():
        while True:
            x = rng.uniform(lo_a, hi_a)
            if np.all(x > lo_a) and np.all(x < hi_a) and manifold.contains(x):
                return x

    budget = budget or max(2000, 50 * n)
    pts: list[np.ndarray] = []
    tried = 0
    while len(pts) < n and tried < budget:
        x = draw()
        tried += 1
        if _safe(feasible, x):
            pts.append(x)
        if tried == 2000 and len(pts) < 2:
            break
    rate = len(pts) / max(tried, 1)
    if len(pts) >= n:
        return FeasibleSample(pts[:n], f"rejection(tried={tried})", seed)
    if rate >= 1e-3 and pts:
        return FeasibleSample(pts, f"rejection(tried={tried}, short)", seed)

    # measure-zero feasible set: detect equalities by trying averaging projections
    pilot = [draw() for _ in range(400)]
    scored = []
    for name, fmap in _averaging_maps(manifold.dim):
        hits = sum(_safe(feasible, fmap(x)) for x in pilot)
        if hits:
            scored.append((hits, name, fmap))
    if not scored and not pts:
        raise EmptySampleError(f"no feasible point among {tried + len(pilot)} candidates")
    if scored:
        scored.sort(key=lambda s: -s[0])
        _, name, fmap = scored[0]
        tries = 0
        while len(pts) < n and tries < budget:
            tries += 1
            y = fmap(draw())
            if _safe(feasible, y):
                pts.append(y)
        return FeasibleSample(pts[:n], f"equality-repair({name}, tried={tries})", seed, REPAIR_TOL)
    return FeasibleSample(pts, f"rejection(tried={tried}, short)", seed)


def sample_feasible(p: Riop, n: int, seed: int = 0) -> FeasibleSample:
    """Rejection-sample the feasible set; measure-zero sets (acceptance rate
    below 1e-3) switch to equality repair by coordinate averaging."""
    if n <= 0:
        raise ValueError("n must be positive")
    sample = _sample_set(p.manifold, p.lo, p.hi, lambda x: is_feasible(p, x), n, seed)
    for x in sample.points:
        if not is_feasible(p, x, REPAIR_TOL):
            raise EmptySampleError("repaired sample point failed re-verification")
    return sample


def sample_domain(p: Riop, n: int, seed: int = 0) -> list[np.ndarray]:
    return _sample_set(p.manifold, p.lo, p.hi, lambda x: True, n, seed).points


def lagrangian_value(p: Riop, x, mu: Sequence[float]) -> Interval:
    """``f(x) + sum mu_i G_i(x)`` as a Minkowski sum."""
    c = _coords(x)
    if len(mu) != p.r:
        raise ValueError(f"expected {p.r} multipliers, got {len(mu)}")
    total = p.objective.at(c)
    for m, g in zip(mu, p.constraints):
        if m < 0:
            raise ValueError("multipliers must be nonnegative")
        total = add(total, scale(float(m), g.at(c)))
    return total


# scalarization -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalarProblem:
    manifold: ManifoldKind
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    objective: Expr
    constraints: tuple[Expr, ...]
    mode: str
    weights: Optional[tuple[float, float]] = None

    def in_domain(self, x: np.ndarray) -> bool:
        return bool(
            np.all(x > np.asarray(self.lo))
            and np.all(x < np.asarray(self.hi))
            and self.manifold.contains(x)
        )

    def is_feasible(self, x, tol: float = 0.0) -> bool:
        c = _coords(x)
        return self.in_domain(c) and all(g(c) <= tol for g in self.constraints)

    def __str__(self) -> str:
        cons = "; ".join(f"{g.to_source()} <= 0" for g in self.constraints) or "none"
        return f"min {self.objective.to_source()} s.t. {cons} [{self.mode}]"


def scalarize(p: Riop, mode: str, weights: Optional[Sequence[float]] = None) -> ScalarProblem:
    """Build the weighted, lower-endpoint or upper-endpoint scalar problem.

    ``weighted`` keeps the interval feasible set (``G_i <= 0`` is equivalent
    to ``upper(G_i) <= 0``); ``lower`` and ``upper`` use the endpoint
    constraint sets, which in general differ from it.
    """
    f = p.objective
    if mode == "weighted":
        if weights is None or len(weights) != 2:
            raise ValueError("weighted mode needs two weights")
        l1, l2 = float(weights[0]), float(weights[1])
        if not (l1 > 0 and l2 > 0):
            raise ValueError(f"weights must be strictly positive, got ({l1}, {l2})")
        obj = Num(l1) * f.lower + Num(l2) * f.upper
        cons = tuple(g.upper for g in p.constraints)
        return ScalarProblem(p.manifold, p.lo, p.hi, obj, cons, mode, (l1, l2))
    if mode == "lower":
        return ScalarProblem(p.manifold, p.lo, p.hi, f.lower, tuple(g.lower for g in p.constraints), mode)
    if mode == "upper":
        return ScalarProblem(p.manifold, p.lo, p.hi, f.upper, tuple(g.upper for g in p.constraints), mode)
    raise ValueError(f"unknown scalarization mode {mode!r}")


@dataclass(frozen=True)
class SolveSettings:
    weight_ratios: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    starts: int = 16
    max_iter: int = 500
    step_tol: float = 1e-8
    rho0: float = 10.0
    rho_factor: float = 10.0
    rounds: int = 4
    samples: int = 1000
    seed: int = 0
    dedup_tol: float = 1e-6
    stall_iters: int = 50
    efficiency_tol: float = 1e-9

    def weight_grid(self) -> list[tuple[float, float]]:
        return [(r / (1.0 + r), 1.0 / (1.0 + r)) for r in self.weight_ratios]


def _penalized(sp: ScalarProblem, rho: float):
    obj = sp.objective.compile()
    cons = [g.compile() for g in sp.constraints]

    def phi(x):
        try:
            val = obj(x)
            for g in cons:
                s = g(x)
                if s > 0:
                    val += rho * s * s
        except (ValueError, ZeroDivisionError, OverflowError):
            return math.inf
        return val

    return phi


def _descend(sp: ScalarProblem, x0: np.ndarray, settings: SolveSettings) -> np.ndarray:
    kind = sp.manifold
    lo, hi = np.asarray(sp.lo), np.asarray(sp.hi)
    x = x0.copy()
    h = 1e-6
    rho = settings.rho0
    for _ in range(settings.rounds):
        phi = _penalized(sp, rho)
        fx = phi(x)
        eta = 1.0
        stall = 0
        for _ in range(settings.max_iter):
            frame = kind.unit_basis(x)
            grad = np.zeros(kind.dim)
            for u in frame:
                d = (phi(kind.exp_raw(x, h * u)) - phi(kind.exp_raw(x, -h * u))) / (2 * h)
                grad += d * u
            if not np.all(np.isfinite(grad)):
                break
            gnorm = math.sqrt(float(np.sum(grad * grad * kind.metric_diag(x))))
            if eta * gnorm < settings.step_tol:
                break
            y = kind.exp_raw(x, -eta * grad)
            inside = (y > lo).all() and (y < hi).all() and kind.contains(y)
            fy = phi(y) if inside else math.inf
            stall = stall + 1 if not fy < fx - 1e-14 * (1.0 + abs(fx)) else 0
            if fy < fx:
                x, fx = y, fy
                eta = min(eta * 2.0, 1e6)
            else:
                eta *= 0.5
            if stall >= settings.stall_iters:
                break
        rho *= settings.rho_factor
    return x


def _repair(sp: ScalarProblem, start: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Map a descent end point back into the feasible set.

    Tries the point itself, then coordinate-averaging projections, then
    bisects along the geodesic from the (feasible) start.
    """
    feas = lambda z: _safe(sp.is_feasible, z)  # noqa: E731
    if feas(x):
        return x
    targets = [x] + [fmap(x) for _, fmap in _averaging_maps(sp.manifold.dim)]
    for y in targets[1:]:
        if feas(y):
            return y
    kind = sp.manifold
    best = start
    for y in targets:
        if not kind.contains(y):
            continue
        v = kind.log_raw(start, y)
        a, b = 0.0, 1.0
        for _ in range(60):
            m = 0.5 * (a + b)
            if feas(kind.exp_raw(start, m * v)):
                a = m
            else:
                b = m
        z = kind.exp_raw(start, a * v) if a > 0 else start
        if feas(z) and _safe_val(sp.objective, z) < _safe_val(sp.objective, best):
            best = z
    return best


def _safe_val(e: Expr, x) -> float:
    try:
        return e(x)
    except ExprDomainError:
        return math.inf


@dataclass
class ScalarResult:
    point: np.ndarray
    value: float
    finals: list[np.ndarray]


def _solve_scalar(sp: ScalarProblem, settings: SolveSettings, seed: Optional[int] = None) -> ScalarResult:
    seed = settings.seed if seed is None else seed
    starts = _sample_set(sp.manifold, sp.lo, sp.hi, sp.is_feasible, settings.starts, seed).points
    if not starts:
        raise EmptySampleError("no feasible starting point for the scalar problem")
    finals = []
    best, best_val = None, math.inf
    for s in starts:
        end = _repair(sp, s, _descend(sp, s, settings))
        finals.append(end)
        for cand in (end, s):
            val = _safe_val(sp.objective, cand)
            if val < best_val:
                best, best_val = cand, val
    if best is None:
        raise EmptySampleError("no feasible iterate found")
    return ScalarResult(best, best_val, finals)


def solve_scalar(sp: ScalarProblem, settings: SolveSettings = SolveSettings()) -> Point:
    """Multistart penalized Riemannian descent; returns the best feasible iterate."""
    return sp.manifold.point(_solve_scalar(sp, settings).point)


# efficiency ----------------------------------------------------------------


@dataclass
class EfficiencyCertificate:
    candidate: Point
    value: Interval
    dominating_witness: Optional[tuple[Point, Interval]]
    checked: int
    seed: int = 0
    tol: float = 1e-9

    @property
    def efficient(self) -> bool:
        return self.dominating_witness is None


def _dominates(a: Interval, b: Interval, tol: float) -> bool:
    """``a < b`` strictly, with one endpoint ahead by more than ``tol``."""
    return compare(a, b).leq and (a.lo < b.lo - tol or a.hi < b.hi - tol)


def check_efficiency(
    p: Riop, x0, sample: FeasibleSample, tol: float = 1e-9
) -> EfficiencyCertificate:
    """Scan ``sample`` for a point whose objective value strictly dominates
    ``f(x0)``. Gaps of at most ``tol`` on both endpoints count as ties."""
    c0 = _coords(x0)
    v0 = p.objective.at(c0)
    for x in sample.points:
        fx = p.objective.at(x)
        if _dominates(fx, v0, tol):
            return EfficiencyCertificate(
                p.manifold.point(c0), v0, (p.manifold.point(x), fx), len(sample), sample.seed, tol
            )
    return EfficiencyCertificate(p.manifold.point(c0), v0, None, len(sample), sample.seed, tol)


def efficient_indices(values: Sequence[Interval], tol: float = 1e-9, maximize: bool = False) -> list[int]:
    """Indices of values not strictly dominated by another value in the list."""
    out = []
    for i, a in enumerate(values):
        dominated = False
        for j, b in enumerate(values):
            if i == j:
                continue
            if (not maximize and _dominates(b, a, tol)) or (maximize and _dominates(a, b, tol)):
                dominated = True
                break
        if not dominated:
            out.append(i)
    return out


@dataclass
class SolveCandidate:
    point: Point
    value: Interval
    modes: list[str]
    feasible: bool
    certificate: Optional[EfficiencyCertificate]
    simultaneous: bool = False
    unique_among_starts: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def efficient(self) -> bool:
        return self.certificate is not None and self.certificate.efficient


def _mode_label(sp: ScalarProblem) -> str:
    if sp.mode == "weighted":
        return f"weighted({sp.weights[0]:.6g},{sp.weights[1]:.6g})"
    return sp.mode


def solve(
    p: Riop, settings: SolveSettings = SolveSettings(), sample: Optional[FeasibleSample] = None
) -> list[SolveCandidate]:
    """Weighted-grid plus endpoint scalarizations, deduplicated, each
    candidate carrying an efficiency certificate against a feasible sample."""
    if sample is None:
        sample = sample_feasible(p, settings.samples, settings.seed)
    problems = [scalarize(p, "weighted", w) for w in settings.weight_grid()]
    problems += [scalarize(p, "lower"), scalarize(p, "upper")]
    results: list[tuple[str, ScalarResult]] = []
    for sp in problems:
        try:
            results.append((_mode_label(sp), _solve_scalar(sp, settings)))
        except EmptySampleError:
            continue

    kind = p.manifold
    cands: list[SolveCandidate] = []
    for label, res in results:
        x = res.point
        for c in cands:
            if float(np.sqrt(np.sum(kind.log_raw(c.point.coords, x) ** 2 * kind.metric_diag(c.point.coords)))) < settings.dedup_tol:
                c.modes.append(label)
                break
        else:
            feas = is_feasible(p, x, REPAIR_TOL)
            cert = check_efficiency(p, x, sample, settings.efficiency_tol) if feas else None
            cands.append(SolveCandidate(kind.point(x), p.objective.at(x), [label], feas, cert))
        if label in ("lower", "upper"):
            spread = max(
                float(np.sqrt(np.sum(kind.log_raw(x, y) ** 2 * kind.metric_diag(x)))) for y in res.finals
            )
            if spread < settings.dedup_tol:
                for c in cands:
                    if label in c.modes:
                        c.unique_among_starts = True
                        c.notes.append(f"{label}: unique among {len(res.finals)} multistart results")
    for c in cands:
        if "lower" in c.modes and "upper" in c.modes:
            c.simultaneous = True
            c.notes.append("simultaneous lower/upper optimizer")
    return cands
