import numpy as np
import pytest

from riopt import properties as P
from riopt.duality import is_dual_feasible
from riopt.generators import coord_kinds, planted_problem, random_interval, random_kind, u_box
from riopt.interval import Interval, gh_diff, hausdorff
from riopt.manifold import Euclidean, PositiveOrthant, Product
from riopt.problem import is_feasible, sample_feasible


def test_random_interval_ranges():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a = random_interval(rng)
        assert -100 <= a.lo <= 100 and 0 <= a.width <= 50


def test_u_box_and_kinds():
    kind = Product((Euclidean(1), PositiveOrthant(1)))
    assert coord_kinds(kind) == ["e", "p"]
    lo, hi = u_box(kind)
    assert lo[0] == -2 and hi[1] == pytest.approx(np.exp(2))
    rng = np.random.default_rng(1)
    assert all(random_kind(rng).dim in (1, 2) for _ in range(20))


@pytest.mark.parametrize("seed", range(8))
def test_planted_center_is_feasible_and_dual_feasible(seed):
    rng = np.random.default_rng(seed)
    pp = planted_problem(rng, random_kind(rng), r=2)
    p = pp.problem
    assert is_feasible(p, pp.center)
    for g, act in zip(p.constraints, pp.active):
        if act:
            assert abs(g.upper(pp.center)) <= 1e-9
    s = sample_feasible(p, 60, seed)
    assert is_dual_feasible(p, pp.center, pp.mu, s).feasible


def test_hausdorff_difference_identity_counterexample():
    # the unrestricted identity d(A - B, A - C) = d(B, C) fails when B and C
    # sit on opposite sides of A's width
    a, b, c = Interval(50.7026, 77.6098), Interval(-34.0537, 5.36778), Interval(-9.30042, -2.59834)
    lhs, rhs = hausdorff(gh_diff(a, b), gh_diff(a, c)), hausdorff(b, c)
    assert lhs == pytest.approx(12.24, abs=0.01) and rhs == pytest.approx(24.7533, abs=1e-4)
    assert (b.width <= a.width) != (c.width <= a.width)


@pytest.mark.parametrize(
    "check, n",
    [
        (P.check_gh_difference, 500),
        (P.check_hausdorff, 500),
        (P.check_order_gh, 500),
        (P.check_order_axioms, 500),
        (P.check_zero_sum, 500),
        (P.check_manifold, 100),
        (P.check_derivative_decomposition, 12),
        (P.check_monotonicity, 8),
        (P.check_feasibility_equivalence, 100),
    ],
)
def test_property_checks_pass(check, n):
    res = check(11, n)
    assert res.passed, res.failure
    assert res.checked >= n


def test_fixed_checks_pass():
    for res in (P.check_nonadditivity_witness(), P.check_continuity_control(), P.check_strong_no_gap()):
        assert res.passed, res.failure
    for res in P._convex_battery(3, 6, 5, concave=False) + P._convex_battery(4, 6, 5, concave=True):
        assert res.passed, res.failure


def test_tally_reports_first_failure():
    t = P._Tally("demo")
    t.check(True)
    t.check(False, "first")
    t.check(False, lambda: "second")
    r = t.result()
    assert not r.passed and r.failure == "first" and r.checked == 3
