import math

import numpy as np
import pytest

from riopt.interval import Interval, compare
from riopt.manifold import Euclidean, PositiveOrthant
from riopt.problem import (
    EmptySampleError,
    Riop,
    SolveSettings,
    check_efficiency,
    efficient_indices,
    is_feasible,
    lagrangian_value,
    sample_domain,
    sample_feasible,
    scalarize,
    solve,
    solve_scalar,
)
from riopt.rivf import Rivf

E1 = Euclidean(1)
FAST = SolveSettings(starts=8, samples=300)


def test_feasibility_examples(ex31, ex32):
    assert is_feasible(ex31, [0.5]) and is_feasible(ex31, [1.0])
    assert not is_feasible(ex31, [2.0])
    assert is_feasible(ex32, [1.0, 1.0]) and is_feasible(ex32, [0.0, 0.0])
    assert not is_feasible(ex32, [1.0, 2.0]) and not is_feasible(ex32, [-1.0, -1.0])
    free = Riop(E1, (-1.0,), (1.0,), Rivf.parse("x1", "x1", E1))
    assert is_feasible(free, [0.3]) and not is_feasible(free, [1.5])


def test_feasibility_is_endpointwise(ex32):
    rng = np.random.default_rng(0)
    for _ in range(500):
        x = rng.uniform(-2, 2, 2)
        if rng.random() < 0.3:
            x[1] = x[0]
        want = all(g.lower(x) <= 0 and g.upper(x) <= 0 for g in ex32.constraints)
        assert is_feasible(ex32, x) == want


def test_riop_validation():
    with pytest.raises(ValueError):
        Riop(E1, (1.0,), (0.0,), Rivf.parse("x1", "x1", E1))
    with pytest.raises(ValueError):
        Riop(E1, (0.0,), (1.0,), Rivf.parse("x1", "x1", PositiveOrthant(1)))


def test_sample_feasible_example31(ex31):
    s = sample_feasible(ex31, 100, 3)
    assert len(s) == 100 and s.resolution.startswith("rejection")
    assert all(0 < x[0] <= 1 for x in s.points)
    assert all(is_feasible(ex31, x) for x in s.points)


def test_sample_feasible_example32_uses_repair(ex32):
    s = sample_feasible(ex32, 50, 3)
    assert len(s) == 50 and s.resolution.startswith("equality-repair")
    assert s.tol == pytest.approx(1e-9)
    for x in s.points:
        assert abs(x[0] - x[1]) <= 1e-9 and x[0] >= 0
        assert is_feasible(ex32, x, s.tol)


def test_sampling_is_seeded(ex31):
    a, b = sample_feasible(ex31, 20, 5), sample_feasible(ex31, 20, 5)
    assert all(np.array_equal(x, y) for x, y in zip(a.points, b.points))
    assert len(sample_domain(ex31, 10, 1)) == 10


def test_infeasible_problem_raises():
    p = Riop(E1, (-1.0,), (1.0,), Rivf.parse("x1", "x1", E1), (Rivf.parse("1", "1", E1),))
    with pytest.raises(EmptySampleError):
        sample_feasible(p, 10, 0)


def test_scalarize_examples(ex31):
    sp = scalarize(ex31, "weighted", (1, 1))
    for x in (0.3, 0.7, 1.0):
        assert sp.objective([x]) == pytest.approx(2 * x + 1 / x)
    assert sp.is_feasible([0.5]) and not sp.is_feasible([1.5])
    with pytest.raises(ValueError):
        scalarize(ex31, "weighted", (1, 0))
    low = scalarize(ex31, "lower")
    assert low.objective([0.4]) == pytest.approx(0.4)
    assert low.constraints[0]([3.0]) == 0.0  # min(0, ln 3)
    with pytest.raises(ValueError):
        scalarize(ex31, "middle")


def test_solve_scalar_examples(ex31):
    x = solve_scalar(scalarize(ex31, "weighted", (1, 1)), FAST)
    assert x.coords[0] == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    x = solve_scalar(scalarize(ex31, "upper"), FAST)
    assert x.coords[0] == pytest.approx(1.0, abs=1e-4)
    E2 = Euclidean(2)
    q = Riop(E2, (-5, -5), (5, 5), Rivf.parse("(x1 - 1)^2 + (x2 + 2)^2", "(x1 - 1)^2 + (x2 + 2)^2 + 1", E2))
    x = solve_scalar(scalarize(q, "lower"), FAST)
    assert np.allclose(x.coords, [1.0, -2.0], atol=1e-4)


def test_efficiency_examples(ex31, ex31_sample):
    cert = check_efficiency(ex31, [1.0], ex31_sample)
    assert cert.efficient and cert.checked == 1000 and cert.value == Interval(1.0, 2.0)
    cert = check_efficiency(ex31, [0.5], ex31_sample)
    assert cert.efficient and cert.value == Interval(0.5, 2.5)
    inc = Riop(E1, (-1.0,), (2.0,), Rivf.parse("x1", "x1 + 1", E1), (Rivf.parse("-x1", "-x1", E1),))
    s = sample_feasible(inc, 200, 0)
    cert = check_efficiency(inc, [1.0], s)
    assert not cert.efficient
    w, fw = cert.dominating_witness
    assert fw == inc.objective(w) and compare(fw, cert.value).lt


def test_ties_never_dominate():
    vals = [Interval(0, 1), Interval(0, 1), Interval(-1, 2), Interval(1, 2)]
    assert efficient_indices(vals) == [0, 1, 2]
    assert efficient_indices(vals, maximize=True) == [3]


def test_lagrangian_value(ex32):
    assert lagrangian_value(ex32, [1.0, 1.0], (1.0, 1.0)) == Interval(1.0, 3.0)
    with pytest.raises(ValueError):
        lagrangian_value(ex32, [1.0, 1.0], (1.0,))
    with pytest.raises(ValueError):
        lagrangian_value(ex32, [1.0, 1.0], (1.0, -1.0))


def test_solve_example31(ex31):
    cands = solve(ex31, FAST)
    ones = [c for c in cands if abs(c.point.coords[0] - 1.0) < 1e-4]
    assert ones and ones[0].efficient and "upper" in ones[0].modes
    mid = [c for c in cands if "weighted(0.5,0.5)" in c.modes]
    assert mid and mid[0].point.coords[0] == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    assert len({round(c.point.coords[0], 4) for c in cands}) == len(cands)
    for c in cands:
        if any(m.startswith("weighted") for m in c.modes) or c.unique_among_starts:
            assert c.feasible and c.efficient


def test_solve_example32_includes_origin(ex32):
    cands = solve(ex32, SolveSettings(starts=6, samples=200, weight_ratios=(1.0,)))
    assert any(np.allclose(c.point.coords, [0.0, 0.0], atol=1e-4) and c.efficient for c in cands)


def test_solve_is_deterministic(ex31):
    a = solve(ex31, FAST)
    b = solve(ex31, FAST)
    assert [c.point for c in a] == [c.point for c in b]
