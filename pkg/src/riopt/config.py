"""Problem configuration files.

A config is a small TOML document::

    seed = 0

    [manifold]
    kind = "positive(1)"

    [domain]          # open coordinate box used for sampling
    lo = [0.0]
    hi = [4.0]

    [objective]
    lower = "x1"
    upper = "x1 + 1/x1"

    [[constraint]]
    lower = "min(0, ln(x1))"
    upper = "max(0, ln(x1))"

    [solve]           # optional SolveSettings overrides
    starts = 16

Expressions keep their source text so that rendering a parsed config gives
back an equal config.
"""
from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import tomli

from .expr import ExprDomainError, ExprSyntaxError, parse_expr
from .manifold import ManifoldError, parse_kind
from .problem import Riop, SolveSettings
from .rivf import Rivf, RivfError

__all__ = ["ConfigError", "ProblemConfig", "parse_config", "render_config", "BUILTIN", "load_config"]

VALIDATION_POINTS = 256


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None, witness=None):
        self.line, self.column, self.witness = line, column, witness
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


_SETTING_KEYS = {f.name: f.type for f in dataclasses.fields(SolveSettings) if f.name != "seed"}


@dataclass(frozen=True)
class ProblemConfig:
    manifold: str
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    objective: tuple[str, str]
    constraints: tuple[tuple[str, str], ...] = ()
    settings: tuple[tuple[str, Any], ...] = ()
    seed: int = 0

    def solve_settings(self, **overrides) -> SolveSettings:
        kw = dict(self.settings)
        kw["seed"] = self.seed
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return SolveSettings(**kw)

    def problem(self) -> Riop:
        kind = parse_kind(self.manifold)
        obj = Rivf.parse(*self.objective, kind)
        cons = tuple(Rivf.parse(lo, hi, kind) for lo, hi in self.constraints)
        return Riop(kind, self.lo, self.hi, obj, cons)


def _locate(text: str, needle: str) -> tuple[Optional[int], Optional[int]]:
    """1-based line and column of the first quoted occurrence of ``needle``."""
    for i, line in enumerate(text.splitlines(), 1):
        for q in ('"', "'"):
            j = line.find(q + needle + q)
            if j >= 0:
                return i, j + 2
    return None, None


def _key_line(text: str, key: str) -> Optional[int]:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for i, line in enumerate(text.splitlines(), 1):
        if pat.match(line):
            return i
    return None


def _expr(text: str, src: Any, what: str):
    if not isinstance(src, str):
        raise ConfigError(f"{what} must be a quoted expression string", _key_line(text, what.split(".")[-1]))
    try:
        return parse_expr(src)
    except ExprSyntaxError as exc:
        line, col = _locate(text, src)
        raise ConfigError(
            f"{what}: {exc}", line, None if col is None else col + exc.pos
        ) from None


def _floats(text: str, v: Any, key: str) -> tuple[float, ...]:
    if not isinstance(v, list) or not all(isinstance(a, (int, float)) and not isinstance(a, bool) for a in v):
        raise ConfigError(f"domain.{key} must be a list of numbers", _key_line(text, key))
    out = tuple(float(a) for a in v)
    if not all(math.isfinite(a) for a in out):
        raise ConfigError(f"domain.{key} must be finite", _key_line(text, key))
    return out


def parse_config(text: str) -> ProblemConfig:
    """Parse and validate a config. Raises :class:`ConfigError` with a line
    (and column where known) on syntax errors, arity mismatches and
    endpoint-order violations found on a validation sample."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        if m:
            line, col = int(m.group(1)), int(m.group(2))
        else:
            line, col = max(1, len(text.splitlines())), None
        raise ConfigError(f"syntax error: {exc}", line, col) from None

    known = {"seed", "manifold", "domain", "objective", "constraint", "solve"}
    for k in doc:
        if k not in known:
            raise ConfigError(f"unknown key {k!r}", _key_line(text, k) or _key_line(text, f"[{k}]"))
    for sec in ("manifold", "domain", "objective"):
        if not isinstance(doc.get(sec), dict):
            raise ConfigError(f"missing section [{sec}]")

    kind_src = doc["manifold"].get("kind")
    try:
        kind = parse_kind(kind_src) if isinstance(kind_src, str) else None
    except ManifoldError as exc:
        raise ConfigError(str(exc), _key_line(text, "kind")) from None
    if kind is None:
        raise ConfigError("manifold.kind must be a string", _key_line(text, "kind"))

    lo = _floats(text, doc["domain"].get("lo"), "lo")
    hi = _floats(text, doc["domain"].get("hi"), "hi")
    if len(lo) != kind.dim or len(hi) != kind.dim:
        raise ConfigError(f"domain bounds need {kind.dim} entries", _key_line(text, "lo"))
    if any(a >= b for a, b in zip(lo, hi)):
        raise ConfigError("domain has lo >= hi on some coordinate", _key_line(text, "lo"))

    pairs = [("objective", doc["objective"])]
    cons_raw = doc.get("constraint", [])
    if not isinstance(cons_raw, list):
        raise ConfigError("constraints must be written as [[constraint]] tables", _key_line(text, "constraint"))
    pairs += [(f"constraint[{i + 1}]", c) for i, c in enumerate(cons_raw)]
    srcs: list[tuple[str, str]] = []
    rivfs: list[tuple[str, Rivf, str]] = []
    for name, tbl in pairs:
        if not isinstance(tbl, dict) or set(tbl) != {"lower", "upper"}:
            raise ConfigError(f"{name} needs exactly the keys lower and upper")
        lo_e = _expr(text, tbl["lower"], f"{name}.lower")
        hi_e = _expr(text, tbl["upper"], f"{name}.upper")
        for e, src in ((lo_e, tbl["lower"]), (hi_e, tbl["upper"])):
            if e.arity > kind.dim:
                line, _ = _locate(text, src)
                raise ConfigError(
                    f"{name}: expression uses x{e.arity} but {kind.spec()} has dimension {kind.dim}", line
                )
        srcs.append((tbl["lower"], tbl["upper"]))
        rivfs.append((name, Rivf(lo_e, hi_e, kind), tbl["lower"]))

    settings = []
    for k, v in (doc.get("solve") or {}).items():
        if k not in _SETTING_KEYS:
            raise ConfigError(f"unknown solve setting {k!r}", _key_line(text, k))
        if k == "weight_ratios":
            if not isinstance(v, list) or not v or not all(isinstance(a, (int, float)) and a > 0 for a in v):
                raise ConfigError("weight_ratios must be a list of positive numbers", _key_line(text, k))
            v = tuple(float(a) for a in v)
        elif _SETTING_KEYS[k] == "int":
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise ConfigError(f"{k} must be a positive integer", _key_line(text, k))
        else:
            if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
                raise ConfigError(f"{k} must be a positive number", _key_line(text, k))
            v = float(v)
        settings.append((k, v))

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer", _key_line(text, "seed"))

    cfg = ProblemConfig(kind_src, lo, hi, srcs[0], tuple(srcs[1:]), tuple(settings), seed)
    _validate_order(kind, lo, hi, rivfs, text)
    return cfg


def _validate_order(kind, lo, hi, rivfs, text: str) -> None:
    rng = np.random.default_rng(12345)
    lo_a, hi_a = np.asarray(lo), np.asarray(hi)
    pts = [x for x in rng.uniform(lo_a, hi_a, size=(VALIDATION_POINTS, kind.dim)) if kind.contains(x)]
    for name, f, src in rivfs:
        for x in pts:
            try:
                f.endpoints(x)
            except ExprDomainError:
                continue
            except RivfError:
                a, b = float(f.lower(x)), float(f.upper(x))
                line, _ = _locate(text, src)
                raise ConfigError(
                    f"{name}: lower {a:.6g} > upper {b:.6g} at x = ({', '.join(f'{c:.6g}' for c in x)})",
                    line,
                    witness=x.copy(),
                ) from None


def _toml_value(v: Any) -> str:
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(_toml_value(a) for a in v) + "]"
    if isinstance(v, float):
        return repr(v)
    return str(int(v))


def render_config(cfg: ProblemConfig) -> str:
    """Render in the documented layout; ``parse_config`` inverts it exactly."""
    out = [f"seed = {cfg.seed}", "", "[manifold]", f"kind = {_toml_value(cfg.manifold)}", ""]
    out += ["[domain]", f"lo = {_toml_value(list(cfg.lo))}", f"hi = {_toml_value(list(cfg.hi))}", ""]
    out += ["[objective]", f"lower = {_toml_value(cfg.objective[0])}", f"upper = {_toml_value(cfg.objective[1])}", ""]
    for lo, hi in cfg.constraints:
        out += ["[[constraint]]", f"lower = {_toml_value(lo)}", f"upper = {_toml_value(hi)}", ""]
    if cfg.settings:
        out.append("[solve]")
        out += [f"{k} = {_toml_value(v)}" for k, v in cfg.settings]
        out.append("")
    return "\n".join(out)


EXAMPLE31 = """\
# Positive half-line with metric u*v/x^2; feasible set (0, 1].
seed = 0

[manifold]
kind = "positive(1)"

[domain]
lo = [0.0]
hi = [4.0]

[objective]
lower = "x1"
upper = "x1 + 1/x1"

[[constraint]]
lower = "min(0, ln(x1))"
upper = "max(0, ln(x1))"
"""

EXAMPLE32 = """\
# Flat plane; feasible set is the ray x1 = x2 >= 0.
seed = 0

[manifold]
kind = "euclidean(2)"

[domain]
lo = [-2.0, -2.0]
hi = [2.0, 2.0]

[objective]
lower = "min(x1 + 2*x2, 2*x1 + x2)"
upper = "max(x1 + 2*x2, 2*x1 + x2)"

[[constraint]]
lower = "min(x1 - x2, -x1)"
upper = "max(x1 - x2, -x1)"

[[constraint]]
lower = "min(x2 - x1, -x2)"
upper = "max(x2 - x1, -x2)"
"""

BUILTIN = {"example31": EXAMPLE31, "example32": EXAMPLE32}


def load_config(ref: str) -> ProblemConfig:
    """Load a config from a file path, falling back to a built-in example
    whose name matches the path's final component."""
    import os

    if os.path.isfile(ref):
        with open(ref, encoding="utf-8") as fh:
            return parse_config(fh.read())
    name = os.path.basename(ref.rstrip("/"))
    if name.endswith(".toml"):
        name = name[:-5]
    if name in BUILTIN:
        return parse_config(BUILTIN[name])
    raise ConfigError(f"no such config file or built-in example: {ref!r}")
