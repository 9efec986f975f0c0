import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riopt.config import BUILTIN, ConfigError, ProblemConfig, load_config, parse_config, render_config
from riopt.interval import Interval
from riopt.manifold import Euclidean, PositiveOrthant

BASE = """\
[manifold]
kind = "euclidean(1)"

[domain]
lo = [-1.0]
hi = [1.0]

[objective]
lower = "{lo}"
upper = "{hi}"
"""


def test_example31_config():
    cfg = parse_config(BUILTIN["example31"])
    p = cfg.problem()
    assert p.manifold == PositiveOrthant(1) and p.r == 1
    assert p.objective.at(np.array([2.0])) == Interval(2.0, 2.5)
    assert p.constraints[0].at(np.array([0.5])).lo == pytest.approx(np.log(0.5))
    assert p.constraints[0].at(np.array([2.0])).hi == pytest.approx(np.log(2.0))


def test_example32_config():
    p = parse_config(BUILTIN["example32"]).problem()
    assert p.manifold == Euclidean(2) and p.r == 2
    assert p.objective.at(np.array([1.0, 0.0])) == Interval(1.0, 2.0)


def test_lower_above_upper_rejected_with_witness():
    with pytest.raises(ConfigError) as exc:
        parse_config(BASE.format(lo="x1 + 1", hi="x1"))
    assert exc.value.witness is not None and exc.value.line == 9
    x = exc.value.witness
    assert x[0] + 1 > x[0]


def test_syntax_error_position():
    with pytest.raises(ConfigError) as exc:
        parse_config(BASE.format(lo="ln(", hi="x1"))
    assert exc.value.line == 9 and exc.value.column == 13
    assert "end of input" in str(exc.value)


@pytest.mark.parametrize(
    "text, needle",
    [
        (BASE.format(lo="x2", hi="x2"), "dimension"),
        (BASE.format(lo="x1", hi="x1").replace("euclidean(1)", "sphere(1)"), "unknown manifold"),
        (BASE.format(lo="x1", hi="x1").replace("hi = [1.0]", "hi = [-2.0]"), "lo >= hi"),
        (BASE.format(lo="x1", hi="x1").replace("hi = [1.0]", "hi = [1.0, 2.0]"), "entries"),
        (BASE.format(lo="x1", hi="x1") + "\n[extra]\na = 1\n", "unknown key"),
        (BASE.format(lo="x1", hi="x1") + "\n[solve]\nstarts = -1\n", "positive integer"),
        (BASE.format(lo="x1", hi="x1") + "\n[solve]\nfoo = 1\n", "unknown solve setting"),
        (BASE.format(lo="x1", hi="x1") + "\n[[constraint]]\nlower = \"x1\"\n", "exactly the keys"),
        ("seed = -1\n" + BASE.format(lo="x1", hi="x1"), "seed"),
        ("[manifold\n", "syntax error"),
        ("[manifold]\nkind = \"euclidean(1)\"\n", "missing section"),
    ],
)
def test_rejections(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert needle in str(exc.value)


def test_round_trip_builtins():
    for text in BUILTIN.values():
        cfg = parse_config(text)
        assert parse_config(render_config(cfg)) == cfg


exprs = st.sampled_from(["x1", "x1^2", "abs(x1)", "exp(x1)", "min(x1, 0)", "2*x1 - 1"])


@settings(max_examples=30, deadline=None)
@given(exprs, st.floats(0, 3), st.integers(0, 1000), st.integers(1, 40), st.lists(st.floats(0.1, 10), min_size=1, max_size=3))
def test_round_trip_generated(e, w, seed, starts, ratios):
    cfg = ProblemConfig(
        "euclidean(1)", (-1.5,), (2.0,), (e, f"{e} + {w!r}"), ((e, f"{e} + 1"),),
        (("starts", starts), ("weight_ratios", tuple(ratios)), ("step_tol", 1e-7)), seed,
    )
    back = parse_config(render_config(cfg))
    assert back == cfg
    assert back.solve_settings().starts == starts


def test_load_config_falls_back_to_builtin(tmp_path):
    assert load_config("examples/example31") == parse_config(BUILTIN["example31"])
    assert load_config("example32.toml") == parse_config(BUILTIN["example32"])
    path = tmp_path / "p.toml"
    path.write_text(BASE.format(lo="x1", hi="x1 + 1"))
    assert load_config(str(path)).objective == ("x1", "x1 + 1")
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing"))
