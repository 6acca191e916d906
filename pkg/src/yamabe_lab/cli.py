"""``yamabe-lab`` command line.

Exit codes: 0 success or theorem match, 1 usage error, 2 breakdown-terminated
integration, 3 theorem mismatch (or a failing acceptance check).
"""

from __future__ import annotations

import argparse
import contextlib
import itertools
import math
import sys
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import acceptance
from . import io as lab_io
from .classify import TheoremMatch, classify, sweep
from .errors import StiffnessError, YamabeLabError
from .geometry import FiberKind, FiberModel
from .integrate import (IntegratorConfig, Trajectory, full_line_seed, integrate_full_line,
                        integrate_pole, separatrix_trajectory_2d)
from .odes import SolitonParams, StartCase

EXIT_OK, EXIT_USAGE, EXIT_BREAKDOWN, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


# keys accepted in a --config file, mapped to argparse destinations
CONFIG_KEYS = {
    "dim": "dim", "lambda": "lam", "rbar": "rbar", "fiber": "fiber", "case": "case",
    "branch": "branch", "rho0": "rho0", "drho0": "drho0", "r_max": "r_max",
    "r_min": "r_min", "rel_tol": "rel_tol", "abs_tol": "abs_tol",
    "pole_offset": "pole_offset", "out": "out", "output": "output",
    "separatrix": "separatrix",
}
_FLOATS = {"lam", "rbar", "rho0", "drho0", "r_max", "r_min", "rel_tol", "abs_tol",
           "pole_offset"}


@dataclass
class RunConfig:
    params: SolitonParams
    integrator: IntegratorConfig
    seed: Optional[Tuple[float, float]]
    separatrix: bool
    out: str
    output: Optional[str]


def read_config_file(path: str) -> Dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{num}: unknown key {key!r}")
        values[CONFIG_KEYS[key]] = value
    return values


def _merged(args: argparse.Namespace) -> Dict[str, object]:
    merged: Dict[str, object] = {}
    if getattr(args, "config", None):
        for dest, text in read_config_file(args.config).items():
            try:
                if dest in _FLOATS:
                    merged[dest] = float(text)
                elif dest == "dim":
                    merged[dest] = int(text)
                elif dest == "separatrix":
                    merged[dest] = text.lower() in ("1", "true", "yes", "on")
                else:
                    merged[dest] = text
            except ValueError as exc:
                raise UsageError(f"bad value for {dest}: {text!r}") from exc
    for dest in CONFIG_KEYS.values():
        value = getattr(args, dest, None)
        if value is not None and value is not False:
            merged[dest] = value
    return merged


def _fiber(dim: int, name: Optional[str], rbar: Optional[float], case: str) -> FiberModel:
    if dim == 2:
        if name not in (None, "circle") or rbar not in (None, 0.0):
            raise UsageError("a 2D run uses the circle fiber with rbar = 0")
        return FiberModel.circle()
    if name is None:
        if rbar is None:
            if case == "pole":
                return FiberModel.sphere()
            raise UsageError("a 3D full-line run needs --rbar or --fiber")
        return FiberModel.surface(rbar)
    kind = FiberKind(name)
    if kind is FiberKind.CIRCLE:
        raise UsageError("a 3D run needs a surface fiber")
    if kind is FiberKind.ROUND_SPHERE2:
        return FiberModel(kind, 2.0 if rbar is None else rbar)
    if kind is FiberKind.EUCLIDEAN2:
        return FiberModel(kind, 0.0 if rbar is None else rbar)
    if kind is FiberKind.HYPERBOLIC2:
        return FiberModel(kind, -2.0 if rbar is None else rbar)
    if rbar is None:
        raise UsageError("--fiber constscal needs --rbar")
    return FiberModel(kind, rbar)


def build_run_config(args: argparse.Namespace, need_seed: bool = True) -> RunConfig:
    m = _merged(args)
    try:
        dim = int(m.get("dim", 2))
        if dim not in (2, 3):
            raise UsageError("--dim must be 2 or 3")
        lam = m.get("lam")
        if lam is None:
            raise UsageError("--lambda is required")
        has_seed = "rho0" in m or "drho0" in m
        separatrix = bool(m.get("separatrix", False))
        case = m.get("case") or ("line" if has_seed or separatrix else "pole")
        if case not in ("pole", "line"):
            raise UsageError("--case must be pole or line")
        branch = str(m.get("branch", "A")).upper()
        if branch not in ("A", "B"):
            raise UsageError("--branch must be A or B")
        seed = None
        if case == "pole":
            if has_seed:
                raise UsageError("a pole start takes no --rho0/--drho0 seed")
            if separatrix:
                raise UsageError("--separatrix applies to full-line runs")
        elif need_seed:
            if separatrix:
                if "drho0" in m:
                    raise UsageError("--separatrix fixes drho0; give only --rho0")
                seed = (float(m.get("rho0", 1.0)), math.nan)
            elif "rho0" not in m or "drho0" not in m:
                raise UsageError("a full-line run needs both --rho0 and --drho0")
            else:
                seed = (float(m["rho0"]), float(m["drho0"]))
        fiber = _fiber(dim, m.get("fiber"), m.get("rbar"), case)
        params = SolitonParams(dim, float(lam), fiber,
                               StartCase.POLE if case == "pole" else StartCase.LINE,
                               1 if branch == "A" else -1)
        if separatrix and not (dim == 2 and params.lam < 0):
            raise UsageError("--separatrix needs --dim 2 and a negative lambda")
        cfg = IntegratorConfig()
        overrides = {k: float(m[k]) for k in ("r_max", "r_min", "rel_tol", "abs_tol",
                                              "pole_offset") if k in m}
        if overrides:
            cfg = replace(cfg, **overrides)
        out = str(m.get("out", "csv"))
        if out not in ("csv", "json"):
            raise UsageError("--out must be csv or json")
        return RunConfig(params, cfg, seed, separatrix, out, m.get("output"))
    except YamabeLabError as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def run_trajectory(rc: RunConfig) -> Trajectory:
    p = rc.params
    if p.case is StartCase.POLE:
        return integrate_pole(p, rc.integrator)
    if rc.separatrix:
        return separatrix_trajectory_2d(p.lam, rc.seed[0], rc.integrator)
    try:
        seed = full_line_seed(p, *rc.seed)
    except YamabeLabError as exc:
        raise UsageError(str(exc)) from exc
    return integrate_full_line(p, seed, rc.integrator)


@contextlib.contextmanager
def _sink(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_integrate(args) -> int:
    rc = build_run_config(args)
    code = EXIT_OK
    try:
        traj = run_trajectory(rc)
    except StiffnessError as exc:
        print(f"integration stalled: {exc}", file=sys.stderr)
        if exc.trajectory is None:
            return EXIT_BREAKDOWN
        traj, code = exc.trajectory, EXIT_BREAKDOWN
    with _sink(rc.output) as fh:
        if rc.out == "json":
            fh.write(lab_io.dumps_trajectory(traj) + "\n")
        else:
            lab_io.write_trajectory_csv(traj, fh)
    ev = traj.terminal_event
    if ev is not None:
        print(f"breakdown: {ev.kind.value} at r={ev.r!r}", file=sys.stderr)
        code = EXIT_BREAKDOWN
    return code


def cmd_classify(args) -> int:
    rc = build_run_config(args)
    try:
        traj = run_trajectory(rc)
        report = classify(traj)
    except YamabeLabError as exc:
        print(f"classification failed: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    with _sink(rc.output) as fh:
        fh.write(lab_io.report_json(report) + "\n")
    if report.theorem_match is TheoremMatch.MISMATCH:
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_verify(args) -> int:
    names = None
    if args.only:
        names = [x for part in args.only for x in part.split(",") if x.strip()]
    try:
        nums = acceptance.resolve(names)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    if not args.tol_scale > 0:
        raise UsageError("--tol-scale must be positive")
    results = acceptance.run([str(n) for n in nums], args.tol_scale)
    for res in results:
        print(res.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_MISMATCH


def parse_grid(text: str) -> List[float]:
    """``a:b:step`` inclusive of ``b``, or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"malformed grid {text!r}, expected a:b:step")
        try:
            a, b, step = (float(x) for x in parts)
        except ValueError as exc:
            raise UsageError(f"malformed grid {text!r}") from exc
        if not (step > 0 and math.isfinite(a) and math.isfinite(b)) or b < a:
            raise UsageError(f"empty grid {text!r}")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [a + i * step for i in range(count)]
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"malformed grid {text!r}") from exc
    if not values:
        raise UsageError("empty grid")
    return values


def parse_seed_grid(text: str) -> List[Tuple[float, float]]:
    """``rho0s x drho0s`` (comma lists, Cartesian product) or ``r:d;r:d``."""
    text = text.strip()
    try:
        if "x" in text:
            left, right = text.split("x", 1)
            rhos = [float(v) for v in left.split(",") if v.strip()]
            drhos = [float(v) for v in right.split(",") if v.strip()]
            seeds = list(itertools.product(rhos, drhos))
        else:
            seeds = []
            for item in text.split(";"):
                if item.strip():
                    r, d = item.split(":")
                    seeds.append((float(r), float(d)))
    except ValueError as exc:
        raise UsageError(f"malformed seed grid {text!r}") from exc
    if not seeds:
        raise UsageError("empty seed grid")
    return seeds


def cmd_sweep(args) -> int:
    if args.lambda_grid is None and args.lam is None:
        raise UsageError("sweep needs --lambda-grid or --lambda")
    lams = parse_grid(args.lambda_grid) if args.lambda_grid is not None else [args.lam]
    seeds = parse_seed_grid(args.seed_grid) if args.seed_grid else None
    if args.lam is None:
        args.lam = lams[0]
    rc = build_run_config(args, need_seed=False)
    if rc.params.case is StartCase.LINE and not seeds:
        raise UsageError("a full-line sweep needs --seed-grid")
    rows = sweep(rc.params, lams, seeds, rc.integrator)
    with _sink(rc.output) as fh:
        lab_io.write_sweep_csv(rows, fh)
    if any(r.report is not None and r.report.theorem_match is TheoremMatch.MISMATCH
           for r in rows):
        return EXIT_MISMATCH
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, choices=(2, 3))
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--rbar", type=float)
    p.add_argument("--fiber", choices=[k.value for k in FiberKind])
    p.add_argument("--case", choices=("pole", "line"))
    p.add_argument("--branch", choices=("A", "B"))
    p.add_argument("--rho0", type=float)
    p.add_argument("--drho0", type=float)
    p.add_argument("--separatrix", action="store_true",
                   help="2D expanding full line: start on the complete solution through rho0")
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--abs-tol", dest="abs_tol", type=float)
    p.add_argument("--pole-offset", dest="pole_offset", type=float)
    p.add_argument("--out", choices=("csv", "json"))
    p.add_argument("--output", help="output path (default: standard output)")
    p.add_argument("--config", help="flat key = value file; flags override it")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="yamabe-lab",
                     description="Integrate and classify warped-product Yamabe solitons.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    p = sub.add_parser("integrate", help="integrate one trajectory, write CSV or JSON")
    _run_flags(p)
    p.set_defaults(func=cmd_integrate)
    p = sub.add_parser("classify", help="integrate and write a JSON classification report")
    _run_flags(p)
    p.set_defaults(func=cmd_classify)
    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--only", action="append",
                   help="criterion numbers or names, comma separated")
    p.add_argument("--tol-scale", dest="tol_scale", type=float, default=1.0)
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("sweep", help="classify a grid of lambdas and seeds")
    _run_flags(p)
    p.add_argument("--lambda-grid", dest="lambda_grid")
    p.add_argument("--seed-grid", dest="seed_grid",
                   help="'0.5,1,2x-1,0.1' (product) or '1:0.5;2:-0.1'")
    p.set_defaults(func=cmd_sweep)
    return parser


_VALUE_FLAGS = ("--lambda-grid", "--seed-grid", "--lambda", "--rbar", "--rho0", "--drho0",
                "--r-max", "--r-min")


def _glue_values(argv: Sequence[str]) -> List[str]:
    """Attach values such as ``-3:1:0.5`` to their flag so argparse does not
    mistake them for options."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_glue_values(argv))
        return args.func(args)
    except UsageError as exc:
        print(f"yamabe-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
