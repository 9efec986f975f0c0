"""Seeded property battery over all modules.

Each check returns a :class:`PropertyResult` with the number of cases
examined and the first failing case, if any. ``run_battery`` runs all of
them; the CLI's ``verify-properties`` command reports the results.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import BUILTIN, parse_config
from .duality import check_no_gap, check_weak_duality, is_dual_feasible, lagrangian
from .generators import (
    concave_rivf,
    convex_rivf,
    planted_problem,
    random_interval,
    random_kind,
    smooth_rivf,
    u_box,
)
from .interval import ZERO, Interval, add, compare, gh_diff, hausdorff, isum, neg, norm, scale
from .kkt import (
    Multipliers,
    check_kkt_split,
    find_multipliers,
)
from .manifold import Euclidean, PositiveOrthant, Product, distance, exp, geodesic, log
from .problem import (
    Riop,
    SolveSettings,
    check_efficiency,
    is_feasible,
    sample_feasible,
    solve,
)
from .rivf import (
    BoxSampler,
    DerivativeError,
    Rivf,
    check_geodesic_convexity,
    check_gh_continuity,
    check_gradient_inequality,
    check_monotone,
    gh_dir_deriv,
)

__all__ = ["PropertyResult", "run_battery"]

TOL = 1e-12


@dataclass
class PropertyResult:
    name: str
    passed: bool
    checked: int
    failure: Optional[str] = None
    seconds: float = 0.0


class _Tally:
    def __init__(self, name: str):
        self.name = name
        self.checked = 0
        self.failure: Optional[str] = None

    def check(self, ok: bool, what: Callable[[], str] | str = "") -> None:
        self.checked += 1
        if not ok and self.failure is None:
            self.failure = what() if callable(what) else what

    def result(self) -> PropertyResult:
        return PropertyResult(self.name, self.failure is None and self.checked > 0, self.checked, self.failure)


def _close(a: Interval, b: Interval, tol: float = TOL) -> bool:
    return abs(a.lo - b.lo) <= tol and abs(a.hi - b.hi) <= tol


def _leq(a: Interval, b: Interval, tol: float = 0.0) -> bool:
    return a.lo <= b.lo + tol and a.hi <= b.hi + tol


def _lt(a: Interval, b: Interval) -> bool:
    return _leq(a, b) and (a.lo, a.hi) != (b.lo, b.hi)


def _pair(rng, tie_rate: float = 0.25) -> tuple[Interval, Interval]:
    """Random pair; a fraction shares one or both endpoints to exercise ties."""
    a, b = random_interval(rng), random_interval(rng)
    u = rng.random()
    if u < tie_rate / 3:
        b = a
    elif u < 2 * tie_rate / 3:
        b = Interval(a.lo, max(a.lo, b.hi))
    elif u < tie_rate:
        b = Interval(min(b.lo, a.hi), a.hi)
    return a, b


# interval ------------------------------------------------------------------


def check_gh_difference(seed: int, n: int) -> PropertyResult:
    """Closed form of the gH-difference and the two-branch definition."""
    rng = np.random.default_rng(seed)
    t = _Tally("interval.gh_difference")
    for _ in range(n):
        a, b = _pair(rng)
        c = gh_diff(a, b)
        d1, d2 = a.lo - b.lo, a.hi - b.hi
        t.check(c.lo == min(d1, d2) and c.hi == max(d1, d2), lambda: f"closed form fails for {a}, {b}")
        branch1 = _close(add(b, c), a)
        branch2 = _close(add(a, scale(-1.0, c)), b)
        t.check(branch1 or branch2, lambda: f"neither branch holds for {a}, {b}")
    return t.result()


def check_hausdorff(seed: int, n: int) -> PropertyResult:
    """Metric properties (a)-(f) of the Hausdorff distance."""
    rng = np.random.default_rng(seed)
    t = _Tally("interval.hausdorff")
    for _ in range(n):
        a, b = _pair(rng)
        c, d = random_interval(rng), random_interval(rng)
        lam = float(rng.uniform(-10, 10))
        h = hausdorff(a, b)
        t.check((h == 0) == (a == b), lambda: f"(a) {a}, {b}")
        t.check(abs(hausdorff(scale(lam, a), scale(lam, b)) - abs(lam) * h) <= 10 * TOL * max(1.0, abs(lam)),
                lambda: f"(b) {a}, {b}, {lam}")
        t.check(abs(hausdorff(add(a, c), add(b, c)) - h) <= TOL * 10, lambda: f"(c) {a}, {b}, {c}")
        t.check(hausdorff(add(a, b), add(c, d)) <= hausdorff(a, c) + hausdorff(b, d) + TOL * 10,
                lambda: f"(d) {a}, {b}, {c}, {d}")
        t.check(abs(h - norm(gh_diff(a, b))) <= TOL, lambda: f"(e) {a}, {b}")
        # (f) holds as an equality only when B and C sit on the same side of
        # A's width (both differences take the same branch); in general it is
        # an inequality
        lf, rf = hausdorff(gh_diff(a, b), gh_diff(a, c)), hausdorff(b, c)
        lf2 = hausdorff(gh_diff(b, a), gh_diff(c, a))
        if (b.width <= a.width) == (c.width <= a.width):
            t.check(abs(lf - rf) <= TOL * 10 and abs(lf2 - rf) <= TOL * 10, lambda: f"(f) {a}, {b}, {c}")
        else:
            t.check(lf <= rf + TOL * 10 and lf2 <= rf + TOL * 10, lambda: f"(f) bound {a}, {b}, {c}")
    return t.result()


def check_order_gh(seed: int, n: int) -> PropertyResult:
    """Order facts (a)-(e) relating the interval order and the gH-difference."""
    rng = np.random.default_rng(seed)
    t = _Tally("interval.order_gh")
    for _ in range(n):
        a, b = _pair(rng)
        c = random_interval(rng)
        dab = gh_diff(a, b)
        t.check(_leq(a, b) == _leq(dab, ZERO), lambda: f"(a) {a}, {b}")
        t.check((not _lt(a, b)) == (not _lt(dab, ZERO)), lambda: f"(b) {a}, {b}")
        # (c) with a forced A <= B
        lo2 = a.lo + abs(rng.normal())
        b2 = Interval(lo2, max(lo2, a.hi + abs(rng.normal())))
        if _leq(a, b2):
            t.check(_leq(gh_diff(a, c), gh_diff(b2, c), TOL * 10), lambda: f"(c) {a}, {b2}, {c}")
        # (d) with 0 <= A and C chosen above A -gH B
        a0 = Interval(abs(a.lo), abs(a.lo) + a.width)
        d0 = gh_diff(a0, b)
        lo2 = d0.lo + abs(rng.normal())
        c2 = Interval(lo2, max(lo2, d0.hi + abs(rng.normal())))
        t.check(_leq(neg(b), c2, TOL * 10), lambda: f"(d) {a0}, {b}, {c2}")
        lhs = _leq(c, dab)
        rhs = _leq(gh_diff(neg(a), neg(b)), neg(c))
        t.check(lhs == rhs, lambda: f"(e) {a}, {b}, {c}")
        t.check(neg(dab) == gh_diff(neg(a), neg(b)), lambda: f"negation identity {a}, {b}")
    return t.result()


def check_order_axioms(seed: int, n: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    t = _Tally("interval.order_axioms")
    for _ in range(n):
        a, b = _pair(rng, 0.5)
        c = add(b, Interval(0.0, abs(float(rng.normal()))))
        ab, ba = compare(a, b), compare(b, a)
        t.check(not (ab.leq and ba.leq) or a == b, lambda: f"antisymmetry {a}, {b}")
        t.check(not (ab.leq and compare(b, c).leq) or compare(a, c).leq, lambda: f"transitivity {a}, {b}, {c}")
        t.check(ab.incomparable == (not ab.leq and not ba.leq), lambda: f"incomparable {a}, {b}")
    return t.result()


def check_zero_sum(seed: int, n: int) -> PropertyResult:
    """A Minkowski sum equal to [0, 0] forces every summand to be degenerate."""
    rng = np.random.default_rng(seed)
    t = _Tally("interval.zero_sum")
    for _ in range(n):
        k = int(rng.integers(2, 6))
        if rng.random() < 0.5:
            vals = [float(v) for v in rng.integers(-50, 51, k - 1)]
            items = [Interval(v, v) for v in vals] + [Interval(-sum(vals), -sum(vals))]
        else:
            items = [random_interval(rng, (-10, 10), 5.0) for _ in range(k)]
            items[int(rng.integers(k))] = Interval(0.0, float(rng.uniform(1e-6, 1.0)))
        s = isum(items)
        if s == ZERO:
            t.check(all(x.width == 0 for x in items), lambda: f"nondegenerate summand in {items}")
        else:
            t.check(any(x.width > 0 for x in items) or s.lo != 0, lambda: f"{items}")
    return t.result()


# manifold ------------------------------------------------------------------


def _rand_point(rng, kind):
    lo, hi = u_box(kind)
    return kind.point(rng.uniform(lo, hi))


def check_manifold(seed: int, n: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    t = _Tally("manifold.geometry")
    kinds = [Euclidean(1), Euclidean(3), PositiveOrthant(1), PositiveOrthant(2),
             Product((Euclidean(1), PositiveOrthant(2)))]
    for i in range(n):
        kind = kinds[i % len(kinds)]
        x, y, z = (_rand_point(rng, kind) for _ in range(3))
        v = log(kind, x, y)
        back = exp(kind, x, v)
        t.check(np.allclose(back.coords, y.coords, rtol=1e-10, atol=1e-10), lambda: f"exp/log {x} {y}")
        dxy, dyx = distance(kind, x, y), distance(kind, y, x)
        t.check(abs(dxy - dyx) <= 1e-10 * (1 + dxy), lambda: f"symmetry {x} {y}")
        t.check(distance(kind, x, z) <= dxy + distance(kind, y, z) + 1e-10, lambda: f"triangle {x} {y} {z}")
        tt = float(rng.uniform(0, 1))
        g = geodesic(kind, x, y, tt)
        t.check(abs(distance(kind, x, g) - tt * dxy) <= 1e-9 * (1 + dxy), lambda: f"constant speed {x} {y} {tt}")
        if isinstance(kind, Product):
            parts = [f.exp_raw(x.coords[s], v.vec[s]) for f, s in kind._slices()]
            t.check(np.allclose(np.concatenate(parts), back.coords), lambda: "product factorwise")
    return t.result()


# rivf ----------------------------------------------------------------------


def _rand_dir(rng, kind, x):
    u = rng.standard_normal(kind.dim)
    g = kind.metric_diag(x)
    return u / math.sqrt(float(np.sum(u * u * g)))


def _central_slope(fn, kind, x, v, h=1e-5):
    return (fn(kind.exp_raw(x, h * v)) - fn(kind.exp_raw(x, -h * v))) / (2 * h)


def check_derivative_decomposition(seed: int, n: int) -> PropertyResult:
    """Interval derivative equals the min/max hull of endpoint slopes, which
    are recomputed here with a central difference."""
    rng = np.random.default_rng(seed)
    t = _Tally("rivf.derivative_decomposition")
    kinds = [Euclidean(2), PositiveOrthant(2), Euclidean(1), PositiveOrthant(1)]
    for i in range(n):
        kind = kinds[i % len(kinds)]
        f = smooth_rivf(rng, kind)
        x = _rand_point(rng, kind)
        v = _rand_dir(rng, kind, x.coords)
        try:
            rep = gh_dir_deriv(f, x, kind.tangent(x, v))
        except DerivativeError as exc:
            t.check(False, f"no convergence: {exc}")
            continue
        sl = _central_slope(f.lower, kind, x.coords, v)
        su = _central_slope(f.upper, kind, x.coords, v)
        want = Interval(min(sl, su), max(sl, su))
        t.check(_close(rep.value, want, 1e-6), lambda: f"{f} at {x}: {rep.value} vs {want}")
        negv = gh_dir_deriv(-f, x, kind.tangent(x, v)).value
        t.check(_close(negv, neg(rep.value), 1e-12), lambda: f"negation identity for {f}")
    return t.result()


def check_nonadditivity_witness(seed: int = 0, n: int = 1) -> PropertyResult:
    """``f = [x, 1]``, ``g = [0, 1 + x]`` at 0 along 1: (f+g)' = [1, 1], f' + g' = [0, 2]."""
    t = _Tally("rivf.nonadditivity_witness")
    kind = Euclidean(1)
    f = Rivf.parse("x1", "1", kind)
    g = Rivf.parse("0", "1 + x1", kind)
    x = kind.point([0.0])
    v = kind.tangent(x, [1.0])
    sum_d = add(gh_dir_deriv(f, x, v).value, gh_dir_deriv(g, x, v).value)
    d_sum = gh_dir_deriv(f + g, x, v).value
    t.check(_close(sum_d, Interval(0, 2), 1e-6), f"f'+g' = {sum_d}")
    t.check(_close(d_sum, Interval(1, 1), 1e-6), f"(f+g)' = {d_sum}")
    t.check(not _close(sum_d, d_sum, 1e-3), "derivative of the sum equals the sum of derivatives")
    return t.result()


def _convex_battery(seed: int, n: int, pairs: int, concave: bool) -> list[PropertyResult]:
    rng = np.random.default_rng(seed)
    tag = "concave" if concave else "convex"
    verified = _Tally(f"rivf.{tag}_sample_verified")
    grad = _Tally(f"rivf.{tag}_gradient_inequality")
    cor = _Tally("rivf.convex_no_strict_underestimate") if not concave else None
    sub = _Tally("rivf.convex_sublevel_sets") if not concave else None
    cont = _Tally("rivf.convex_gh_continuity") if not concave else None
    exist = _Tally(f"rivf.{tag}_derivative_exists")
    for _ in range(n):
        kind = random_kind(rng)
        f = concave_rivf(rng, kind) if concave else convex_rivf(rng, kind)
        lo, hi = u_box(kind)
        rep = check_geodesic_convexity(f, BoxSampler(kind, lo, hi), seed=int(rng.integers(1 << 30)))
        ok = rep.concave if concave else rep.convex
        verified.check(ok, lambda: f"{f}: verdict {rep.verdict}")
        if not ok:
            continue
        for _ in range(pairs):
            x, y = _rand_point(rng, kind), _rand_point(rng, kind)
            try:
                d = gh_dir_deriv(f, x, log(kind, x, y)).value
                exist.check(True)
            except DerivativeError as exc:
                exist.check(False, f"{f} at {x}: {exc}")
                continue
            grad.check(check_gradient_inequality(f, x, y, concave=concave, tol=1e-7),
                       lambda: f"{f} at {x}, {y}")
            if concave:
                continue
            fx, fy = f(x), f(y)
            rhs = add(d, fx)
            strictly = _leq(fy, rhs) and (fy.lo < rhs.lo - 1e-7 or fy.hi < rhs.hi - 1e-7)
            cor.check(not strictly, lambda: f"{f}: f(y) < f'(x, v) + f(x) at {x}, {y}")
            level = Interval(max(fx.lo, fy.lo), max(fx.hi, fy.hi))
            for tt in np.linspace(0.1, 0.9, 9):
                z = geodesic(kind, x, y, float(tt))
                sub.check(_leq(f(z), level, 1e-7), lambda: f"{f}: sublevel fails at t={tt}")
        if not concave:
            x = _rand_point(rng, kind)
            cont.check(check_gh_continuity(f, x), lambda: f"{f} at {x}")
    return [r.result() for r in (verified, grad, cor, sub, cont, exist) if r is not None]


def check_monotonicity(seed: int, n: int) -> PropertyResult:
    """Interval monotonicity holds iff it holds for both endpoint functions."""
    rng = np.random.default_rng(seed)
    t = _Tally("rivf.monotonicity")
    kind = Euclidean(1)
    pts = [np.array([v]) for v in np.linspace(-2, 2, 25)]
    for _ in range(n):
        a, b, c = rng.uniform(-1, 1, 3).round(3)
        lower = f"{a}*x1 + {abs(b)}*x1^3" if rng.random() < 0.5 else f"{a}*x1^2"
        upper = f"({lower}) + ({abs(c)} + exp({rng.uniform(-1, 1):.3f}*x1))"
        f = Rivf.parse(lower, upper, kind)
        lo = np.array([f.lower(p) for p in pts])
        hi = np.array([f.upper(p) for p in pts])
        inc = bool(np.all(np.diff(lo) >= 0) and np.all(np.diff(hi) >= 0))
        dec = bool(np.all(np.diff(lo) <= 0) and np.all(np.diff(hi) <= 0))
        t.check(check_monotone(f, pts, True) == inc, lambda: f"increasing {f}")
        t.check(check_monotone(f, pts, False) == dec, lambda: f"decreasing {f}")
    return t.result()


def check_continuity_control(seed: int = 0, n: int = 1) -> PropertyResult:
    """A jump at 0 must be detected; smooth functions must pass."""
    t = _Tally("rivf.gh_continuity_controls")
    kind = Euclidean(1)
    jump = Rivf.parse("0^abs(x1) - 1", "1", kind)
    x0 = kind.point([0.0])
    t.check(not check_gh_continuity(jump, x0), "jump at 0 not detected")
    t.check(check_gh_continuity(Rivf.parse("2", "3", kind), x0), "constant flagged")
    ex = parse_config(BUILTIN["example31"]).problem()
    t.check(check_gh_continuity(ex.objective, ex.point([1.0])), "example objective flagged at 1")
    return t.result()


# problem / kkt / duality -----------------------------------------------------


def check_scalarization(seed: int, n: int) -> PropertyResult:
    """Weighted-scalarization optimizers and multistart-unique endpoint
    optimizers pass the efficiency scan on the example problems."""
    t = _Tally("problem.scalarization_efficiency")
    for name in ("example31",):
        p = parse_config(BUILTIN[name]).problem()
        settings = SolveSettings(seed=seed, samples=n)
        for c in solve(p, settings):
            weighted = any(m.startswith("weighted") for m in c.modes)
            if weighted or c.unique_among_starts:
                t.check(c.feasible and c.efficient, lambda: f"{name}: {c.point} {c.modes}")
    return t.result()


def check_feasibility_equivalence(seed: int, n: int) -> PropertyResult:
    rng = np.random.default_rng(seed)
    t = _Tally("problem.feasibility_equivalence")
    for name in BUILTIN:
        p = parse_config(BUILTIN[name]).problem()
        for _ in range(n):
            x = rng.uniform(p.lo, p.hi)
            if rng.random() < 0.3 and p.manifold.dim == 2:
                x[1] = x[0]
            want = all(g.lower(x) <= 0 and g.upper(x) <= 0 for g in p.constraints)
            t.check(is_feasible(p, x) == want, lambda: f"{name} at {x}")
    return t.result()


def _planted(rng, r=None):
    kind = random_kind(rng)
    r = int(rng.integers(1, 3)) if r is None else r
    return planted_problem(rng, kind, r)


def check_kkt_chain(seed: int, n: int, sample_size: int = 120) -> list[PropertyResult]:
    """Certified points pass the efficiency scan; interval certificates
    imply split certificates with equal multipliers."""
    rng = np.random.default_rng(seed)
    chain = _Tally("kkt.sufficiency_chain")
    impl = _Tally("kkt.interval_implies_split")
    succeeded = 0
    for k in range(n):
        pp = _planted(rng)
        p = pp.problem
        s = sample_feasible(p, sample_size, seed + k)
        cands = [pp.center] + [s.points[int(i)] for i in rng.integers(0, len(s), 2)]
        for x0 in cands:
            found = False
            for th in ("T32", "T33", "T34"):
                m = find_multipliers(p, x0, th, s)
                if m is None:
                    continue
                found = True
                if th == "T34":
                    split = Multipliers(split=(m.mu, m.mu))
                    impl.check(check_kkt_split(p, x0, split, s).verdict, lambda: f"{p.objective} at {x0}")
            if found:
                succeeded += 1
                chain.check(check_efficiency(p, x0, s).efficient, lambda: f"{p.objective} at {x0}")
    res = [chain.result(), impl.result()]
    res[0].failure = res[0].failure or (None if succeeded >= n else f"only {succeeded} certified points")
    res[0].passed = res[0].failure is None
    return res


def check_weak_duality_sweep(seed: int, n: int, sample_size: int = 120) -> PropertyResult:
    rng = np.random.default_rng(seed)
    t = _Tally("duality.weak_duality")
    for k in range(n):
        pp = _planted(rng)
        p = pp.problem
        s = sample_feasible(p, sample_size, seed + k)
        d = is_dual_feasible(p, pp.center, pp.mu, s)
        t.check(d.feasible, lambda: f"planted point not dual feasible: {d.worst_H_norm}")
        if d.feasible:
            rep = check_weak_duality(p, s, [d], hypothesis_ok=True)
            t.check(rep.kind == "weak_verified", lambda: f"{p.objective}: violation {rep.worst_violation}")
    return t.result()


def strong_duality_problem() -> Riop:
    kind = Euclidean(1)
    return Riop(kind, (-3.0,), (3.0,), Rivf.parse("x1^2", "x1^2 + 1", kind), (Rivf.parse("-1", "-1", kind),))


def check_strong_no_gap(seed: int = 0, n: int = 200) -> PropertyResult:
    t = _Tally("duality.strong_no_gap")
    p = strong_duality_problem()
    s = sample_feasible(p, n, seed)
    x = p.point([0.0])
    rep = check_no_gap(p, x, (0.0,), s, [])
    t.check(rep.kind == "no_gap_strong", f"kind {rep.kind}")
    t.check(rep.primal_value == lagrangian(p, x, (0.0,)), "f(x*) != L(x*, mu*)")
    return t.result()


def check_example_regressions(seed: int = 0, n: int = 1000) -> PropertyResult:
    """The efficient point of the first example fails the split-multiplier
    certificate for every searched multiplier."""
    t = _Tally("kkt.sufficiency_only_regression")
    p = parse_config(BUILTIN["example31"]).problem()
    s = sample_feasible(p, n, seed)
    x0 = p.point([1.0])
    t.check(check_efficiency(p, x0, s).efficient, "x0 = 1 not efficient")
    t.check(find_multipliers(p, x0, "T32", s) is None, "split multipliers found")
    return t.result()




def run_battery(seed: int = 0, quick: bool = False) -> list[PropertyResult]:
    """Run every property group; ``quick`` shrinks the case counts tenfold."""
    k = 10 if quick else 1
    plan: list[Callable[[], PropertyResult | list[PropertyResult]]] = [
        lambda: check_gh_difference(seed, 10_000 // k),
        lambda: check_hausdorff(seed + 1, 10_000 // k),
        lambda: check_order_gh(seed + 2, 10_000 // k),
        lambda: check_order_axioms(seed + 3, 10_000 // k),
        lambda: check_zero_sum(seed + 4, 10_000 // k),
        lambda: check_manifold(seed + 5, 1000 // k),
        lambda: check_derivative_decomposition(seed + 6, max(100 // k, 20)),
        lambda: check_nonadditivity_witness(),
        lambda: _convex_battery(seed + 7, max(50 // k, 10), 20, concave=False),
        lambda: _convex_battery(seed + 8, max(50 // k, 10), 20, concave=True),
        lambda: check_monotonicity(seed + 9, 40 // k),
        lambda: check_continuity_control(),
        lambda: check_feasibility_equivalence(seed + 10, 500 // k),
        lambda: check_scalarization(seed, 1000 // k),
        lambda: check_example_regressions(seed, 1000 // k),
        lambda: check_kkt_chain(seed + 11, max(20 // k, 4)),
        lambda: check_weak_duality_sweep(seed + 12, max(20 // k, 4)),
        lambda: check_strong_no_gap(seed),
    ]
    out: list[PropertyResult] = []
    for job in plan:
        t0 = time.perf_counter()
        res = job()
        res = res if isinstance(res, list) else [res]
        dt = (time.perf_counter() - t0) / len(res)
        for r in res:
            r.seconds = dt
        out.extend(res)
    return out
