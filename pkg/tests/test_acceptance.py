"""Acceptance criteria 1-10, each at its stated tolerance and sample size.

Every test carries a ``criterion`` marker; the pytest summary prints one
PASS/FAIL line per criterion.
"""
import math
import subprocess
import sys

import numpy as np
import pytest

from riopt import properties as P
from riopt.cli import EXIT_OK, run
from riopt.duality import check_no_gap, lagrangian
from riopt.interval import Interval, gh_diff, hausdorff
from riopt.kkt import Multipliers, check_kkt_interval, find_multipliers
from riopt.manifold import PositiveOrthant
from riopt.problem import SolveSettings, check_efficiency, is_feasible, sample_feasible, scalarize, solve, solve_scalar
from riopt.rivf import _gh_dir_deriv_raw

crit = pytest.mark.criterion
N_INTERVAL = 10_000


def close(a, b, tol):
    return abs(a.lo - b.lo) <= tol and abs(a.hi - b.hi) <= tol


@crit(1, "example31: feasible set, f(1), efficiency of 1, derivatives at 1, no split multipliers")
def test_criterion_01(ex31, ex31_sample):
    s = ex31_sample
    assert len(s) >= 1000 and all(0 < x[0] <= 1 for x in s.points)
    grid = np.linspace(0.01, 3.99, 400)
    assert all(is_feasible(ex31, [t]) == (t <= 1) for t in grid)
    assert ex31.objective.at(np.array([1.0])) == Interval(1.0, 2.0)
    assert check_efficiency(ex31, [1.0], s).efficient
    one = np.array([1.0])
    P1 = PositiveOrthant(1)
    for x in s.points:
        if x[0] == 1.0:
            continue
        v = P1.log_raw(one, x)
        f = _gh_dir_deriv_raw(ex31.objective, one, v)
        g = _gh_dir_deriv_raw(ex31.constraints[0], one, v)
        lnx = math.log(x[0])
        assert abs(f.lower_slope - lnx) <= 1e-6 and abs(f.upper_slope) <= 1e-6
        assert abs(g.lower_slope - lnx) <= 1e-6 and abs(g.upper_slope) <= 1e-6
    assert find_multipliers(ex31, one, "T32", s) is None


@crit(2, "example32: diagonal feasible set, interval KKT at the origin with mu=(1,1), derivatives")
def test_criterion_02(ex32):
    s = sample_feasible(ex32, 1000, 0)
    assert s.resolution.startswith("equality-repair")
    assert all(abs(x[0] - x[1]) <= 1e-9 and x[0] >= 0 for x in s.points)
    o = np.array([0.0, 0.0])
    assert check_kkt_interval(ex32, o, Multipliers(mu=(1.0, 1.0)), s).verdict
    rng = np.random.default_rng(0)
    free_dirs = [rng.uniform(-2, 2, 2) for _ in range(200)]
    for x in list(s.points) + free_dirs:
        f = _gh_dir_deriv_raw(ex32.objective, o, x).value
        a, b = 2 * x[0] + x[1], x[0] + 2 * x[1]
        assert close(f, Interval(min(a, b), max(a, b)), 1e-6)
    for x in s.points:
        g1 = _gh_dir_deriv_raw(ex32.constraints[0], o, x).value
        g2 = _gh_dir_deriv_raw(ex32.constraints[1], o, x).value
        assert close(g1, Interval(-x[0], 0.0), 1e-6)
        assert close(g2, Interval(-x[1], 0.0), 1e-6)


@crit(3, "interval calculus battery, 1e4 cases per group, tolerance 1e-12")
def test_criterion_03():
    for check, seed in (
        (P.check_gh_difference, 0),
        (P.check_hausdorff, 1),
        (P.check_order_gh, 2),
        (P.check_order_axioms, 3),
    ):
        res = check(seed, N_INTERVAL)
        assert res.passed, res.failure
        assert res.checked >= N_INTERVAL


@crit("3f", "literal identity d(A -gH B, A -gH C) = d(B, C) on all random triples")
@pytest.mark.xfail(strict=True, reason="false when B and C lie on opposite sides of A's width")
def test_criterion_03_literal_difference_identity():
    rng = np.random.default_rng(1)
    failures = 0
    for _ in range(N_INTERVAL):
        a, b, c = (P.random_interval(rng) for _ in range(3))
        lhs = hausdorff(gh_diff(a, b), gh_diff(a, c))
        lhs2 = hausdorff(gh_diff(b, a), gh_diff(c, a))
        rhs = hausdorff(b, c)
        failures += abs(lhs - rhs) > 1e-12 or abs(lhs2 - rhs) > 1e-12
    assert failures == 0, f"{failures} of {N_INTERVAL} triples violate the identity"


@crit(4, "derivative decomposition on 100 smooth RIVFs, negation identity, non-additivity witness")
def test_criterion_04():
    res = P.check_derivative_decomposition(6, 100)
    assert res.passed, res.failure
    assert res.checked >= 200
    res = P.check_nonadditivity_witness()
    assert res.passed, res.failure


@crit(5, "convexity inequalities on 50 convex and 50 concave RIVFs x 20 pairs, sublevel sets")
def test_criterion_05():
    results = P._convex_battery(7, 50, 20, concave=False) + P._convex_battery(8, 50, 20, concave=True)
    by_name = {r.name: r for r in results}
    for r in results:
        assert r.passed, f"{r.name}: {r.failure}"
    assert by_name["rivf.convex_sample_verified"].checked >= 50
    assert by_name["rivf.concave_sample_verified"].checked >= 50
    assert by_name["rivf.convex_gradient_inequality"].checked >= 1000
    assert by_name["rivf.concave_gradient_inequality"].checked >= 1000
    assert by_name["rivf.convex_sublevel_sets"].checked >= 1000


@crit(6, "weighted optimizers pass the dominance scan; weighted(1,1) optimum within 1e-4 of 1/sqrt(2)")
def test_criterion_06(ex31, ex31_sample):
    settings = SolveSettings()
    cands = solve(ex31, settings, ex31_sample)
    weighted = [c for c in cands if any(m.startswith("weighted") for m in c.modes)]
    assert len(weighted) == len(settings.weight_grid())
    assert all(c.feasible and c.efficient for c in weighted)
    x = solve_scalar(scalarize(ex31, "weighted", (1, 1)), settings)
    assert abs(x.coords[0] - 1 / math.sqrt(2)) <= 1e-4


@crit(7, "KKT sufficiency chain on 20 random convex problems; interval certificate implies split")
def test_criterion_07():
    chain, impl = P.check_kkt_chain(11, 20)
    assert chain.passed, chain.failure
    assert impl.passed, impl.failure
    assert chain.checked >= 20 and impl.checked >= 1


@crit(8, "weak duality on 20 random convex problems (1e-7); zero-sum lemma on 1e4 cases")
def test_criterion_08():
    res = P.check_weak_duality_sweep(12, 20)
    assert res.passed, res.failure
    assert res.checked >= 40
    res = P.check_zero_sum(4, N_INTERVAL)
    assert res.passed, res.failure
    assert res.checked >= N_INTERVAL


@crit(9, "strong no-gap on the inactive-constraint quadratic with f(x*) = L(x*, mu*) exactly")
def test_criterion_09():
    p = P.strong_duality_problem()
    s = sample_feasible(p, 500, 0)
    x = p.point([0.0])
    rep = check_no_gap(p, x, (0.0,), s, [])
    assert rep.kind == "no_gap_strong"
    assert rep.primal_value == lagrangian(p, x, (0.0,)) == rep.dual_value


@crit(10, "CLI: solve example31 --seed 7 byte-identical twice; verify-properties exits 0")
def test_criterion_10():
    a = run(["solve", "examples/example31", "--seed", "7"])
    b = run(["solve", "examples/example31", "--seed", "7"])
    assert a[1] == EXIT_OK and a == b
    proc = subprocess.run([sys.executable, "-m", "riopt", "verify-properties"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout[-2000:]
