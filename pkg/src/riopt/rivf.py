"""Riemannian interval-valued functions (RIVFs).

A RIVF is a pair of scalar expressions ``lower <= upper`` on a manifold.
This module evaluates them, estimates one-sided gH-directional derivatives
numerically and probes gH-continuity and geodesic convexity on samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Protocol, Sequence

import numpy as np

from .expr import Expr, ExprDomainError, Neg, parse_expr
from .interval import Interval, compare, gh_diff, norm, scale, add
from .manifold import ManifoldKind, Point, Tangent, log

__all__ = [
    "RivfError",
    "DerivativeError",
    "Rivf",
    "DerivativeReport",
    "ConvexityReport",
    "PointSampler",
    "BoxSampler",
    "LADDER",
    "directional_derivative",
    "eval_rivf",
    "gh_dir_deriv",
    "check_geodesic_convexity",
    "check_gradient_inequality",
    "check_gh_continuity",
    "check_monotone",
]

LADDER = (1e-2, 1e-3, 1e-4, 1e-5)
# tried only when the default ladder does not converge, e.g. a kink of a
# min/max/abs term sits between the larger steps and leaves two clean quotients
FALLBACK_STEPS = (1e-6, 1e-7)
DERIV_TOL = 1e-6


class RivfError(ValueError):
    """Malformed RIVF: lower endpoint above upper endpoint at some point."""


class DerivativeError(ArithmeticError):
    """The difference-quotient ladder did not converge."""


@dataclass(frozen=True)
class Rivf:
    lower: Expr
    upper: Expr
    domain: ManifoldKind

    def __post_init__(self):
        n = max(self.lower.arity, self.upper.arity)
        if n > self.domain.dim:
            raise RivfError(
                f"expression uses x{n} but {self.domain.spec()} has dimension {self.domain.dim}"
            )

    @classmethod
    def parse(cls, lower: str, upper: str, domain: ManifoldKind) -> "Rivf":
        return cls(parse_expr(lower), parse_expr(upper), domain)

    @classmethod
    def degenerate(cls, e: Expr | str, domain: ManifoldKind) -> "Rivf":
        if isinstance(e, str):
            e = parse_expr(e)
        return cls(e, e, domain)

    def endpoints(self, x: np.ndarray) -> tuple[float, float]:
        lo, hi = float(self.lower(x)), float(self.upper(x))
        if lo > hi:
            raise RivfError(f"lower {lo!r} > upper {hi!r} at x={np.asarray(x).tolist()}")
        return lo, hi

    def at(self, x: np.ndarray) -> Interval:
        return Interval(*self.endpoints(x))

    def __call__(self, x: Point) -> Interval:
        return eval_rivf(self, x)

    def __neg__(self) -> "Rivf":
        return Rivf(Neg(self.upper), Neg(self.lower), self.domain)

    def __add__(self, other: "Rivf") -> "Rivf":
        return Rivf(self.lower + other.lower, self.upper + other.upper, self.domain)

    def scaled(self, lam: float) -> "Rivf":
        if lam >= 0:
            return Rivf(lam * self.lower, lam * self.upper, self.domain)
        return Rivf(lam * self.upper, lam * self.lower, self.domain)

    def __str__(self) -> str:
        return f"[{self.lower.to_source()}, {self.upper.to_source()}]"


def eval_rivf(f: Rivf, x: Point) -> Interval:
    return f.at(x.coords)


@dataclass(frozen=True)
class DerivativeReport:
    value: Interval
    lower_slope: float
    upper_slope: float
    step_used: float
    est_error: float


def directional_derivative(
    fn: Callable[[np.ndarray], float],
    kind: ManifoldKind,
    x: np.ndarray,
    v: np.ndarray,
    ladder: Sequence[float] = LADDER,
    f0: Optional[float] = None,
) -> tuple[float, float, float]:
    """One-sided derivative of ``t -> fn(exp_x(t v))`` at ``t = 0+``.

    Forward difference quotients over the step ladder are fed into a
    Richardson table (first-order error expansion, step ratio taken from the
    ladder). The entry with the smallest local increment is returned, which
    keeps the estimate on the correct side of a kink lying inside the
    largest steps. Returns ``(slope, est_error, step)``.
    """
    if f0 is None:
        f0 = fn(x)
    if not np.any(v):
        return 0.0, 0.0, ladder[-1]
    steps, quots = [], []
    for t in ladder:
        try:
            ft = fn(kind.exp_raw(x, t * v))
        except ExprDomainError:
            continue
        steps.append(t)
        quots.append(float((ft - f0) / t))
    if len(quots) < 2:
        raise DerivativeError("fewer than two usable ladder steps")

    table = [[q] for q in quots]
    best, best_err, best_step = quots[-1], abs(quots[-1] - quots[-2]), steps[-1]
    for i in range(1, len(quots)):
        inc = abs(quots[i] - quots[i - 1])
        if inc < best_err:
            best, best_err, best_step = quots[i], inc, steps[i]
        ratio = steps[i - 1] / steps[i]
        for j in range(1, i + 1):
            fac = ratio**j
            val = (fac * table[i][j - 1] - table[i - 1][j - 1]) / (fac - 1.0)
            table[i].append(val)
            err = max(abs(val - table[i][j - 1]), abs(val - table[i - 1][j - 1]))
            if err < best_err:
                best, best_err, best_step = val, err, steps[i]
    return best, best_err, best_step


def gh_dir_deriv(
    f: Rivf,
    x: Point,
    v: Tangent,
    ladder: Sequence[float] = LADDER,
    tol: float = DERIV_TOL,
) -> DerivativeReport:
    """gH-directional derivative ``f'(x, v)`` as the min/max hull of the
    endpoint functions' one-sided directional derivatives."""
    return _gh_dir_deriv_raw(f, x.coords, v.vec, ladder, tol)


def _converged(d: float, e: float, tol: float) -> bool:
    return e <= tol * max(1.0, abs(d))


def _endpoint_slope(fn, kind, x, v, ladder, f0, tol) -> tuple[float, float, float]:
    d, e, s = directional_derivative(fn, kind, x, v, ladder, f0)
    if not _converged(d, e, tol) and ladder[-1] > FALLBACK_STEPS[0]:
        d2, e2, s2 = directional_derivative(fn, kind, x, v, tuple(ladder) + FALLBACK_STEPS, f0)
        if e2 < e:
            d, e, s = d2, e2, s2
    if not _converged(d, e, tol):
        raise DerivativeError(f"directional derivative did not converge (estimate {d!r}, error {e!r})")
    return d, e, s


def _gh_dir_deriv_raw(f, x, v, ladder=LADDER, tol=DERIV_TOL) -> DerivativeReport:
    kind = f.domain
    lo0, hi0 = f.endpoints(x)
    dl, el, sl = _endpoint_slope(f.lower, kind, x, v, ladder, lo0, tol)
    du, eu, su = _endpoint_slope(f.upper, kind, x, v, ladder, hi0, tol)
    return DerivativeReport(
        value=Interval(min(dl, du), max(dl, du)),
        lower_slope=dl,
        upper_slope=du,
        step_used=min(sl, su),
        est_error=max(el, eu),
    )


class PointSampler(Protocol):
    def __call__(self, rng: np.random.Generator, n: int) -> list[np.ndarray]: ...


@dataclass(frozen=True)
class BoxSampler:
    """Uniform samples from an open coordinate box intersected with the manifold.

    Coordinate boxes are geodesically convex for every supported kind, since
    geodesics move each coordinate monotonically between its endpoints.
    """

    kind: ManifoldKind
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __call__(self, rng: np.random.Generator, n: int) -> list[np.ndarray]:
        lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
        out: list[np.ndarray] = []
        while len(out) < n:
            x = rng.uniform(lo, hi)
            if np.all(x > lo) and np.all(x < hi) and self.kind.contains(x):
                out.append(x)
        return out


@dataclass
class ConvexityReport:
    verdict: str  # convex | concave | neither | inconclusive
    witness: Optional[tuple[np.ndarray, np.ndarray, float]]
    samples_checked: int
    convex: bool = False
    concave: bool = False
    concave_witness: Optional[tuple[np.ndarray, np.ndarray, float]] = None


def _tol(*vals: float) -> float:
    return 1e-9 * (1.0 + max(abs(v) for v in vals))


def convexity_violation(f: Rivf, x: np.ndarray, y: np.ndarray, t: float) -> tuple[bool, bool]:
    """Return ``(convex_violated, concave_violated)`` at ``gamma(t)``."""
    kind = f.domain
    z = kind.exp_raw(x, t * kind.log_raw(x, y))
    fx, fy, fz = f.at(x), f.at(y), f.at(z)
    comb = add(scale(1.0 - t, fx), scale(t, fy))
    tl = _tol(fx.lo, fx.hi, fy.lo, fy.hi, fz.lo, fz.hi)
    vex = fz.lo > comb.lo + tl or fz.hi > comb.hi + tl
    cave = comb.lo > fz.lo + tl or comb.hi > fz.hi + tl
    return vex, cave


def check_geodesic_convexity(
    f: Rivf,
    sampler: PointSampler,
    grid: int = 9,
    pairs: int = 64,
    seed: int = 0,
) -> ConvexityReport:
    """Sample-relative test of ``f(gamma(t)) <= (1-t) f(x) + t f(y)``.

    ``convex`` means no counterexample among ``samples_checked`` triples; the
    concave side is tested on the same triples through the reversed order.
    """
    rng = np.random.default_rng(seed)
    pts = sampler(rng, 2 * pairs)
    if len(pts) < 2:
        raise ValueError("sampler returned fewer than two points")
    ts = [(k + 1) / (grid + 1) for k in range(grid)]
    checked = 0
    vex_w = cave_w = None
    for k in range(len(pts) // 2):
        x, y = pts[2 * k], pts[2 * k + 1]
        for t in ts:
            try:
                vex, cave = convexity_violation(f, x, y, t)
            except ExprDomainError:
                continue
            checked += 1
            if vex and vex_w is None:
                vex_w = (x, y, t)
            if cave and cave_w is None:
                cave_w = (x, y, t)
        if vex_w is not None and cave_w is not None:
            break
    convex = checked > 0 and vex_w is None
    concave = checked > 0 and cave_w is None
    if checked == 0:
        verdict = "inconclusive"
    elif convex:
        verdict = "convex"
    elif concave:
        verdict = "concave"
    else:
        verdict = "neither"
    return ConvexityReport(verdict, vex_w, checked, convex, concave, cave_w)


def check_gradient_inequality(
    f: Rivf,
    x: Point,
    y: Point,
    concave: bool = False,
    tol: float = 1e-7,
) -> bool:
    """``f'(x, log_x y) <= f(y) -gH f(x)`` for convex ``f``; the reversed
    inequality when ``concave`` is set."""
    kind = f.domain
    d = gh_dir_deriv(f, x, log(kind, x, y)).value
    r = gh_diff(eval_rivf(f, y), eval_rivf(f, x))
    if concave:
        d, r = r, d
    return d.lo <= r.lo + tol and d.hi <= r.hi + tol


def check_gh_continuity(
    f: Rivf,
    x: Point,
    radii: Sequence[float] = tuple(10.0**-k for k in range(1, 10)),
    directions: int = 8,
    seed: int = 0,
    tol: float = 1e-6,
) -> bool:
    """Probe ``||f(exp_x v) -gH f(x)|| -> 0`` as the Riemannian norm of ``v``
    shrinks along ``radii``. Returns False on a detected jump."""
    kind = f.domain
    rng = np.random.default_rng(seed)
    x0 = x.coords
    g = kind.metric_diag(x0)
    dirs = []
    for e in kind.unit_basis(x0):
        dirs.extend([e, -e])
    for _ in range(directions):
        u = rng.standard_normal(kind.dim)
        dirs.append(u / math.sqrt(float(np.sum(u * u * g))))
    fx = f.at(x0)
    scale_tol = tol * (1.0 + norm(fx))
    prev = math.inf
    last = math.inf
    for r in sorted(radii, reverse=True):
        worst = 0.0
        for u in dirs:
            try:
                fy = f.at(kind.exp_raw(x0, r * u))
            except ExprDomainError:
                return False
            worst = max(worst, norm(gh_diff(fy, fx)))
        if worst > prev + scale_tol:
            return False
        prev = last = worst
    return last <= scale_tol


def check_monotone(f: Rivf, points: Sequence[np.ndarray], increasing: bool = True) -> bool:
    """Monotonicity under the coordinatewise order on ``points``."""
    vals = [f.at(p) for p in points]
    for i, p in enumerate(points):
        for j, q in enumerate(points):
            if i != j and np.all(p <= q):
                rel = compare(vals[i], vals[j])
                if increasing and not rel.leq:
                    return False
                if not increasing and not rel.geq:
                    return False
    return True
