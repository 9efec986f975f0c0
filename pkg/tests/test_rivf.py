import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riopt.generators import concave_rivf, convex_rivf, smooth_rivf, u_box
from riopt.interval import Interval, neg
from riopt.manifold import Euclidean, PositiveOrthant, Product, log
from riopt.rivf import (
    BoxSampler,
    DerivativeError,
    Rivf,
    RivfError,
    check_geodesic_convexity,
    check_gh_continuity,
    check_gradient_inequality,
    check_monotone,
    convexity_violation,
    gh_dir_deriv,
)

E1, E2, P1 = Euclidean(1), Euclidean(2), PositiveOrthant(1)


def close(a, b, tol=1e-6):
    return abs(a.lo - b.lo) <= tol and abs(a.hi - b.hi) <= tol


def test_eval_examples(ex31):
    one = ex31.point([1.0])
    assert ex31.objective(one) == Interval(1.0, 2.0)
    assert ex31.constraints[0](one) == Interval(0.0, 0.0)
    f = Rivf.degenerate("x1", E1)
    for a in (-3.0, 0.0, 2.5):
        assert f(E1.point([a])) == Interval(a, a)


def test_lower_above_upper_is_an_error():
    f = Rivf.parse("x1 + 1", "x1", E1)
    with pytest.raises(RivfError):
        f(E1.point([0.0]))
    with pytest.raises(RivfError):
        Rivf.parse("x2", "x2", E1)


@pytest.mark.parametrize("xt", [0.1, 0.3, 0.5, 0.9])
def test_example31_derivative_at_one(ex31, xt):
    # oracle: lower slope ln(xt), upper slope 0
    one = ex31.point([1.0])
    v = log(P1, one, P1.point([xt]))
    rep = gh_dir_deriv(ex31.objective, one, v)
    assert rep.lower_slope == pytest.approx(math.log(xt), abs=1e-6)
    assert rep.upper_slope == pytest.approx(0.0, abs=1e-6)
    assert close(rep.value, Interval(math.log(xt), 0.0))
    g = gh_dir_deriv(ex31.constraints[0], one, v)
    assert g.lower_slope == pytest.approx(math.log(xt), abs=1e-6)
    assert g.upper_slope == pytest.approx(0.0, abs=1e-6)


def test_constant_rivf_derivative():
    f = Rivf.parse("2", "3", E2)
    x = E2.point([0.3, -1.0])
    rep = gh_dir_deriv(f, x, E2.tangent(x, [1.0, 2.0]))
    assert rep.value == Interval(0.0, 0.0)
    assert rep.lower_slope == 0.0 and rep.upper_slope == 0.0


@pytest.mark.parametrize("s", [0.1, 1.0, 2.5])
def test_example32_derivative_along_diagonal(ex32, s):
    x0 = ex32.point([0.0, 0.0])
    v = E2.tangent(x0, [s, s])
    assert close(gh_dir_deriv(ex32.objective, x0, v).value, Interval(3 * s, 3 * s))
    g1 = gh_dir_deriv(ex32.constraints[0], x0, v).value
    g2 = gh_dir_deriv(ex32.constraints[1], x0, v).value
    assert close(g1, Interval(-s, 0.0)) and close(g2, Interval(-s, 0.0))


def test_one_sided_at_kink():
    f = Rivf.parse("abs(x1)", "abs(x1) + 1", E1)
    x = E1.point([0.0])
    assert close(gh_dir_deriv(f, x, E1.tangent(x, [1.0])).value, Interval(1.0, 1.0))
    assert close(gh_dir_deriv(f, x, E1.tangent(x, [-1.0])).value, Interval(1.0, 1.0))


def test_nonconvergent_derivative_raises():
    f = Rivf.parse("sqrt(abs(x1))", "sqrt(abs(x1)) + 1", E1)
    x = E1.point([0.0])
    with pytest.raises(DerivativeError):
        gh_dir_deriv(f, x, E1.tangent(x, [1.0]))


def test_nonadditivity_witness():
    f = Rivf.parse("x1", "1", E1)
    g = Rivf.parse("0", "1 + x1", E1)
    x = E1.point([0.0])
    v = E1.tangent(x, [1.0])
    fd, gd = gh_dir_deriv(f, x, v).value, gh_dir_deriv(g, x, v).value
    assert close(Interval(fd.lo + gd.lo, fd.hi + gd.hi), Interval(0.0, 2.0))
    assert close(gh_dir_deriv(f + g, x, v).value, Interval(1.0, 1.0))


def test_convexity_examples(ex31):
    rep = check_geodesic_convexity(ex31.objective, BoxSampler(P1, (0.05,), (4.0,)))
    assert rep.verdict == "convex" and rep.convex and rep.samples_checked > 0
    f = Rivf.parse("-(x1^2)", "x1^2", E1)
    rep = check_geodesic_convexity(f, BoxSampler(E1, (-2.0,), (2.0,)))
    assert rep.verdict == "neither"
    x, y, t = rep.witness
    assert convexity_violation(f, x, y, t)[0]
    assert convexity_violation(f, np.array([-1.0]), np.array([1.0]), 0.5)[0]
    aff = Rivf.degenerate("2*x1 - 3*x2 + 1", E2)
    rep = check_geodesic_convexity(aff, BoxSampler(E2, (-2.0, -2.0), (2.0, 2.0)))
    assert rep.convex and rep.concave


def test_gradient_inequality_examples(ex31):
    one, half = P1.point([1.0]), P1.point([0.5])
    # f'(1, log 1/2) = [-ln 2, 0] <= f(1/2) -gH f(1) = [-1/2, 1/2]
    assert check_gradient_inequality(ex31.objective, one, half)
    assert check_gradient_inequality(ex31.objective, one, one)


def test_continuity_examples(ex31):
    assert check_gh_continuity(ex31.objective, ex31.point([1.0]))
    assert check_gh_continuity(Rivf.parse("-1", "4", E1), E1.point([0.0]))
    jump = Rivf.parse("0^abs(x1) - 1", "1", E1)
    assert not check_gh_continuity(jump, E1.point([0.0]))
    assert check_gh_continuity(Rivf.parse("abs(x1)", "abs(x1) + 1", E1), E1.point([0.0]))


def test_monotone():
    pts = [np.array([a]) for a in np.linspace(-1, 1, 11)]
    assert check_monotone(Rivf.parse("x1", "x1 + 1", E1), pts, True)
    assert not check_monotone(Rivf.parse("x1", "x1^2 + 2", E1), pts, True)
    assert check_monotone(Rivf.parse("-x1 - 1", "-x1", E1), pts, False)


def test_negation_and_scaling():
    f = Rivf.parse("x1", "x1^2 + 1", E1)
    x = np.array([0.5])
    assert (-f).at(x) == neg(f.at(x))
    assert f.scaled(-2.0).at(x) == Interval(-2 * 1.25, -1.0)


KINDS = [E1, E2, P1, PositiveOrthant(2), Product((E1, P1))]


def central(fn, kind, x, v, h=1e-5):
    return (fn(kind.exp_raw(x, h * v)) - fn(kind.exp_raw(x, -h * v))) / (2 * h)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, len(KINDS) - 1), st.integers(0, 2**32 - 1))
def test_decomposition_against_central_differences(k, seed):
    kind = KINDS[k]
    rng = np.random.default_rng(seed)
    f = smooth_rivf(rng, kind)
    lo, hi = u_box(kind)
    x = kind.point(rng.uniform(lo, hi))
    v = rng.standard_normal(kind.dim) * np.where(kind.contains(-np.ones(kind.dim)), 1.0, x.coords)
    rep = gh_dir_deriv(f, x, kind.tangent(x, v))
    sl, su = central(f.lower, kind, x.coords, v), central(f.upper, kind, x.coords, v)
    tol = 1e-6 * max(1.0, abs(sl), abs(su))
    assert close(rep.value, Interval(min(sl, su), max(sl, su)), tol)
    assert rep.value == Interval(min(rep.lower_slope, rep.upper_slope), max(rep.lower_slope, rep.upper_slope))
    assert gh_dir_deriv(-f, x, kind.tangent(x, v)).value == neg(rep.value)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, len(KINDS) - 1), st.integers(0, 2**32 - 1))
def test_generated_convex_and_concave(k, seed):
    kind = KINDS[k]
    rng = np.random.default_rng(seed)
    lo, hi = u_box(kind)
    sampler = BoxSampler(kind, lo, hi)
    f = convex_rivf(rng, kind)
    assert check_geodesic_convexity(f, sampler, pairs=16, seed=seed).convex
    g = concave_rivf(rng, kind)
    assert check_geodesic_convexity(g, sampler, pairs=16, seed=seed).concave
    x, y = (kind.point(rng.uniform(lo, hi)) for _ in range(2))
    assert check_gradient_inequality(f, x, y)
    assert check_gradient_inequality(g, x, y, concave=True)


def test_kink_inside_large_steps_uses_fallback_steps():
    # kink of abs(x1 - 5e-4) lies between the two largest ladder steps
    f = Rivf.parse("abs(x1 - 5e-4) + x1^2", "abs(x1 - 5e-4) + x1^2 + 1", E1)
    x = E1.point([0.0])
    rep = gh_dir_deriv(f, x, E1.tangent(x, [1.0]))
    assert close(rep.value, Interval(-1.0, -1.0))
