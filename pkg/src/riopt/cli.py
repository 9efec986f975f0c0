"""Command-line interface.

Commands: ``solve``, ``check-kkt``, ``check-dual``, ``verify-properties``
and ``examples``. Exit codes: 0 when every verdict passes, 1 when some
check fails, 2 on configuration or usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .config import BUILTIN, ConfigError, ProblemConfig, load_config
from .duality import check_no_gap, check_weak_duality, discover_duals
from .expr import ExprDomainError
from .interval import Interval, render
from .kkt import (
    THEOREMS,
    Multipliers,
    check_kkt,
    check_kkt_real,
    find_multipliers,
)
from .manifold import ManifoldError
from .problem import (
    EmptySampleError,
    Riop,
    SolveCandidate,
    is_feasible,
    sample_domain,
    sample_feasible,
    scalarize,
    solve,
)
from .rivf import DerivativeError, RivfError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


@dataclass
class Report:
    meta: list[tuple[str, Any]] = field(default_factory=list)
    tables: list[tuple[str, list[dict[str, Any]]]] = field(default_factory=list)
    raw: Optional[str] = None  # verbatim body, e.g. a printed config

    def table(self, name: str) -> list[dict[str, Any]]:
        rows: list[dict[str, Any]] = []
        self.tables.append((name, rows))
        return rows

    def render(self, fmt: str = "table") -> str:
        if self.raw is not None:
            return self.raw
        if fmt == "records":
            lines = [json.dumps({"record": "meta", **dict(self.meta)}, sort_keys=True)]
            for name, rows in self.tables:
                lines += [json.dumps({"record": name, **row}, sort_keys=True) for row in rows]
            return "\n".join(lines) + "\n"
        out = [f"{k}: {v}" for k, v in self.meta]
        for name, rows in self.tables:
            out += ["", f"== {name} =="]
            out += _align(rows) if rows else ["(none)"]
        return "\n".join(out) + "\n"


def _align(rows: list[dict[str, Any]]) -> list[str]:
    cols = list(rows[0])
    cells = [[str(r.get(c, "")) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    fmt = lambda vals: "  ".join(v.ljust(w) for v, w in zip(vals, widths)).rstrip()  # noqa: E731
    return [fmt(cols), fmt(["-" * w for w in widths])] + [fmt(row) for row in cells]


def _pt(x) -> str:
    c = x.coords if hasattr(x, "coords") else np.asarray(x)
    return "(" + ", ".join(f"{v:.6g}" for v in c) + ")"


def _vec(v: Sequence[float]) -> str:
    return "(" + ", ".join(f"{a:.6g}" for a in v) + ")"


def _iv(a: Optional[Interval]) -> str:
    return "-" if a is None else render(a)


def _floats(text: str, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"{what}: empty vector")
    return vals


def _weights(args) -> Optional[tuple[float, float]]:
    if args.weights is None:
        return None
    w = _floats(args.weights, "--weights")
    if len(w) != 2 or not (w[0] > 0 and w[1] > 0):
        raise ConfigError("--weights needs two strictly positive numbers")
    return w


def _setup(args) -> tuple[ProblemConfig, Riop, Report]:
    cfg = load_config(args.config)
    p = cfg.problem()
    seed = cfg.seed if args.seed is None else args.seed
    settings = cfg.solve_settings(seed=seed, samples=args.samples, efficiency_tol=args.tol)
    w = _weights(args)
    if w is not None:
        settings = type(settings)(**{**settings.__dict__, "weight_ratios": (w[0] / w[1],)})
    args._settings = settings
    rep = Report()
    rep.meta += [
        ("command", args.command),
        ("problem", f"{p.manifold.spec()} box {_vec(p.lo)}..{_vec(p.hi)} r={p.r}"),
        ("seed", settings.seed),
        ("samples", settings.samples),
        ("efficiency_tol", f"{settings.efficiency_tol:g}"),
    ]
    return cfg, p, rep


def _point(p: Riop, args) -> Optional[np.ndarray]:
    if args.point is None:
        return None
    x = np.asarray(_floats(args.point, "--point"))
    if x.shape[0] != p.manifold.dim:
        raise ConfigError(f"--point needs {p.manifold.dim} coordinates")
    p.manifold.point(x)
    return x


def _mu(p: Riop, args) -> Optional[tuple[float, ...]]:
    if args.mu is None:
        return None
    m = _floats(args.mu, "--mu") if p.r else ()
    if len(m) != p.r or any(a < 0 for a in m):
        raise ConfigError(f"--mu needs {p.r} nonnegative entries")
    return m


def _candidate_rows(rep: Report, cands: list[SolveCandidate]) -> bool:
    rows = rep.table("candidates")
    ok = True
    for i, c in enumerate(cands):
        cert = c.certificate
        if not c.feasible:
            verdict = "infeasible"
        elif c.efficient:
            verdict = "efficient"
        else:
            verdict = "dominated"
            ok = False
        rows.append({
            "id": i,
            "point": _pt(c.point),
            "f": _iv(c.value),
            "modes": ",".join(c.modes),
            "verdict": verdict,
            "checked": cert.checked if cert else 0,
            "witness": _pt(cert.dominating_witness[0]) if cert and cert.dominating_witness else "-",
            "notes": "; ".join(c.notes) or "-",
        })
    return ok


def cmd_solve(args) -> tuple[Report, int]:
    _, p, rep = _setup(args)
    s = args._settings
    sample = sample_feasible(p, s.samples, s.seed)
    rep.meta.append(("feasible_sample", sample.resolution))
    cands = solve(p, s, sample)
    ok = _candidate_rows(rep, cands)
    return rep, EXIT_OK if ok and cands else EXIT_FAIL


def _default_point(p: Riop, settings, sample) -> np.ndarray:
    cands = [c for c in solve(p, settings, sample) if c.efficient]
    if not cands:
        raise EmptySampleError("solver returned no efficient candidate")
    return cands[0].point.coords


def cmd_check_kkt(args) -> tuple[Report, int]:
    _, p, rep = _setup(args)
    s = args._settings
    sample = sample_feasible(p, s.samples, s.seed)
    rep.meta.append(("feasible_sample", sample.resolution))
    x0 = _point(p, args)
    if x0 is None:
        x0 = _default_point(p, s, sample)
        rep.meta.append(("point_source", "solver"))
    mu = _mu(p, args)
    w = _weights(args) or (0.5, 0.5)
    rep.meta.append(("point", _pt(x0)))
    rep.meta.append(("point_feasible", is_feasible(p, x0, sample.tol)))
    theorems = THEOREMS if args.theorem in (None, "all") else (args.theorem,)
    rows = rep.table("kkt")
    all_ok = True
    for th in theorems:
        if th == "T31":
            F = scalarize(p, "weighted", w)
            m = Multipliers(mu=mu) if mu is not None else find_multipliers(p, x0, th, sample, F)
            cert = check_kkt_real(F, x0, m, sample) if m is not None else None
        else:
            if mu is not None:
                m = {
                    "T32": Multipliers(split=(mu, mu)),
                    "T33": Multipliers(mu=mu, weights=w),
                    "T34": Multipliers(mu=mu),
                }[th]
            else:
                m = find_multipliers(p, x0, th, sample)
            cert = check_kkt(p, th, x0, m, sample) if m is not None else None
        ok = cert is not None and cert.verdict
        all_ok &= ok
        rows.append({
            "theorem": th,
            "multipliers": str(m) if m is not None else "none found",
            "directions": cert.directions_checked if cert else len(sample),
            "worst_lhs": f"{cert.worst_violation:.6g}" if cert else "-",
            "slackness": cert.complementary_slackness if cert else "-",
            "verdict": ok,
        })
    return rep, EXIT_OK if all_ok else EXIT_FAIL


def cmd_check_dual(args) -> tuple[Report, int]:
    _, p, rep = _setup(args)
    s = args._settings
    sample = sample_feasible(p, s.samples, s.seed)
    rep.meta.append(("feasible_sample", sample.resolution))
    x_star = _point(p, args)
    cands = solve(p, s, sample)
    pts = [c.point.coords for c in cands] + ([x_star] if x_star is not None else [])
    pts += sample_domain(p, 32, s.seed)
    duals = discover_duals(p, pts, sample)
    if x_star is None:
        eff = [c for c in cands if c.efficient]
        x_star = eff[0].point.coords if eff else cands[0].point.coords
    mu = _mu(p, args)
    if mu is None:
        near = [d for d in duals if np.array_equal(d.x.coords, x_star)]
        mu = near[0].mu if near else tuple([0.0] * p.r)
    rep.meta.append(("dual_points", len(duals)))
    rows = rep.table("duality")
    ok = True
    if duals:
        weak = check_weak_duality(p, sample, duals)
        ok = weak.kind == "weak_verified" or not weak.hypothesis_ok
        rows.append(_gap_row("weak duality", weak))
    else:
        rows.append({"check": "weak duality", "kind": "skipped", "primal": "-", "dual": "-",
                     "witness": "-", "notes": "no dual-feasible point found"})
    gap = check_no_gap(p, x_star, mu, sample, duals)
    rows.append(_gap_row(f"no gap at {_pt(x_star)} mu={_vec(mu) if mu else '()'}", gap))
    return rep, EXIT_OK if ok else EXIT_FAIL


def _gap_row(name: str, g) -> dict[str, Any]:
    notes = list(g.notes)
    if not g.hypothesis_ok:
        notes.append("hypothesis failed")
    if g.primal_efficient is not None:
        notes.append(f"primal efficient={g.primal_efficient}, dual efficient={g.dual_efficient}")
    return {
        "check": name,
        "kind": g.kind,
        "primal": _iv(g.primal_value),
        "dual": _iv(g.dual_value),
        "witness": f"{_pt(g.witness[0])} / {_pt(g.witness[1].x)}" if g.witness else "-",
        "notes": "; ".join(notes) or "-",
    }


def cmd_verify(args) -> tuple[Report, int]:
    from .properties import run_battery

    seed = 0 if args.seed is None else args.seed
    rep = Report(meta=[("command", "verify-properties"), ("seed", seed), ("quick", args.quick)])
    rows = rep.table("properties")
    ok = True
    for r in run_battery(seed, quick=args.quick):
        ok &= r.passed
        rows.append({"property": r.name, "cases": r.checked, "passed": r.passed, "failure": r.failure or "-"})
    return rep, EXIT_OK if ok else EXIT_FAIL


def cmd_examples(args) -> tuple[Report, int]:
    if args.name:
        if args.name not in BUILTIN:
            raise ConfigError(f"unknown example {args.name!r}; available: {', '.join(BUILTIN)}")
        return Report(raw=BUILTIN[args.name]), EXIT_OK
    rep = Report(meta=[("command", "examples")])
    rows = rep.table("examples")
    for name, text in BUILTIN.items():
        cfg = load_config(name)
        rows.append({
            "name": name,
            "manifold": cfg.manifold,
            "objective": f"[{cfg.objective[0]}, {cfg.objective[1]}]",
            "constraints": len(cfg.constraints),
        })
    return rep, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="riopt", description="Interval optimization on Hadamard manifolds.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("config", help="config file, or a built-in example name")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--samples", type=int, default=None, help="feasible sample size")
        sp.add_argument("--tol", type=float, default=None, help="efficiency tie tolerance")
        sp.add_argument("--format", choices=("table", "records"), default="table")
        sp.add_argument("--weights", default=None, help="l1,l2 (strictly positive)")

    sp = sub.add_parser("solve", help="scalarize, solve and certify candidates")
    common(sp)
    sp = sub.add_parser("check-kkt", help="KKT certificates at a point")
    common(sp)
    sp.add_argument("--point", default=None)
    sp.add_argument("--theorem", choices=("all",) + THEOREMS, default="all")
    sp.add_argument("--mu", default=None)
    sp = sub.add_parser("check-dual", help="weak duality sweep and gap detection")
    common(sp)
    sp.add_argument("--point", default=None)
    sp.add_argument("--mu", default=None)
    sp = sub.add_parser("verify-properties", help="run the property battery")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--quick", action="store_true")
    sp.add_argument("--format", choices=("table", "records"), default="table")
    sp = sub.add_parser("examples", help="list or print built-in example configs")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--format", choices=("table", "records"), default="table")
    return ap


COMMANDS = {
    "solve": cmd_solve,
    "check-kkt": cmd_check_kkt,
    "check-dual": cmd_check_dual,
    "verify-properties": cmd_verify,
    "examples": cmd_examples,
}


def run(argv: Optional[Sequence[str]] = None) -> tuple[str, int]:
    """Run a command; returns ``(report_text, exit_code)``."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return "", EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if getattr(args, "samples", None) is not None and args.samples <= 0:
            raise ConfigError("--samples must be positive")
        if getattr(args, "tol", None) is not None and args.tol < 0:
            raise ConfigError("--tol must be nonnegative")
        rep, code = COMMANDS[args.command](args)
    except (ConfigError, ManifoldError, RivfError) as exc:
        return f"error: {exc}\n", EXIT_CONFIG
    except (EmptySampleError, DerivativeError, ExprDomainError) as exc:
        return f"check failed: {exc}\n", EXIT_FAIL
    return rep.render(args.format), code


def main(argv: Optional[Sequence[str]] = None) -> int:
    text, code = run(argv)
    stream = sys.stderr if code == EXIT_CONFIG else sys.stdout
    stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
