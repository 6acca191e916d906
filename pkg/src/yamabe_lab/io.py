"""CSV and JSON emitters for trajectories, reports and sweep tables.

Floats are written with ``repr``, the shortest string that parses back to
the same double, so files round-trip without loss.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, fields
from typing import Iterable, List, Optional, TextIO

from .classify import SweepRow
from .errors import DomainError
from .geometry import CurvatureSample, FiberKind, FiberModel
from .integrate import Event, EventKind, IntegratorConfig, Sample, Trajectory
from .odes import SolitonParams, StartCase, WarpState

CSV_COLUMNS = ["r", "rho", "drho", "ddrho", "F", "R", "K", "k_rad", "k_fib",
               "C_steady", "residual"]
SWEEP_COLUMNS = ["lambda", "rho0", "drho0", "scalar_sign", "k_monotonicity", "k_min",
                 "k_max", "bound_lo", "bound_hi", "asymptote_drho", "asymptote_rms",
                 "completeness", "theorem_match", "terminal_r", "error", "explanation"]
FORMAT_TAG = "yamabe-lab-trajectory"


def fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def parse(cell: str) -> Optional[float]:
    return None if cell == "" else float(cell)


# --------------------------------------------------------------------------
# parameters
# --------------------------------------------------------------------------

def params_to_dict(p: SolitonParams) -> dict:
    return {"n": p.n, "lambda": p.lam, "fiber": p.fiber.kind.value, "rbar": p.rbar,
            "case": p.case.value, "branch": p.branch}


def params_from_dict(d: dict) -> SolitonParams:
    fiber = FiberModel(FiberKind(d["fiber"]), float(d["rbar"]))
    return SolitonParams(int(d["n"]), float(d["lambda"]), fiber,
                         StartCase(d["case"]), int(d["branch"]))


def config_to_dict(c: IntegratorConfig) -> dict:
    return asdict(c)


def config_from_dict(d: dict) -> IntegratorConfig:
    names = {f.name for f in fields(IntegratorConfig)}
    return IntegratorConfig(**{k: v for k, v in d.items() if k in names})


# --------------------------------------------------------------------------
# trajectories
# --------------------------------------------------------------------------

def _state_dict(st: WarpState) -> dict:
    return {"r": st.r, "rho": st.rho, "drho": st.drho, "F": st.F, "R": st.R}


def _event_dict(ev: Event) -> dict:
    return {"kind": ev.kind.value, "r": ev.r, "state": _state_dict(ev.state)}


def trajectory_to_dict(traj: Trajectory) -> dict:
    cols = {name: [] for name in ("r", "rho", "drho", "F", "R", "ddrho", "C_steady",
                                  "residual")}
    curv = {f.name: [] for f in fields(CurvatureSample)}
    for s in traj.samples:
        st = s.state
        for name in ("r", "rho", "drho", "F", "R"):
            cols[name].append(getattr(st, name))
        cols["ddrho"].append(s.ddrho)
        cols["C_steady"].append(s.C_steady)
        cols["residual"].append(s.residual)
        for name in curv:
            curv[name].append(getattr(s.curvature, name))
    return {
        "format": FORMAT_TAG,
        "version": 1,
        "params": params_to_dict(traj.params),
        "config": config_to_dict(traj.config),
        "direction": traj.direction,
        "seed_index": traj.seed_index,
        "samples": cols,
        "curvature": curv,
        "events": [_event_dict(ev) for ev in traj.events],
    }


def trajectory_from_dict(d: dict) -> Trajectory:
    if d.get("format") != FORMAT_TAG:
        raise DomainError("not a trajectory document")
    cols, curv = d["samples"], d["curvature"]
    samples = []
    for i in range(len(cols["r"])):
        st = WarpState(r=cols["r"][i], rho=cols["rho"][i], drho=cols["drho"][i],
                       F=cols["F"][i], R=cols["R"][i])
        cs = CurvatureSample(**{k: v[i] for k, v in curv.items()})
        samples.append(Sample(state=st, ddrho=cols["ddrho"][i], curvature=cs,
                              C_steady=cols["C_steady"][i], residual=cols["residual"][i]))
    events = [Event(EventKind(e["kind"]), e["r"], WarpState(**e["state"]))
              for e in d["events"]]
    return Trajectory(params=params_from_dict(d["params"]), samples=samples, events=events,
                      direction=d["direction"], config=config_from_dict(d["config"]),
                      seed_index=d["seed_index"])


def dumps_trajectory(traj: Trajectory) -> str:
    return json.dumps(trajectory_to_dict(traj))


def loads_trajectory(text: str) -> Trajectory:
    return trajectory_from_dict(json.loads(text))


def write_trajectory_csv(traj: Trajectory, out: TextIO) -> None:
    """One row per sample; events and parameters follow as ``#`` comments."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in traj.samples:
        st, c = s.state, s.curvature
        w.writerow([fmt(st.r), fmt(st.rho), fmt(st.drho), fmt(s.ddrho), fmt(st.F),
                    fmt(st.R), fmt(c.k_gauss), fmt(c.k_rad), fmt(c.k_fib),
                    fmt(s.C_steady), fmt(s.residual)])
    p = traj.params
    out.write(f"# params n={p.n} lambda={p.lam!r} fiber={p.fiber.kind.value} "
              f"rbar={p.rbar!r} case={p.case.value} branch={'A' if p.branch == 1 else 'B'}\n")
    out.write("# event,kind,r,rho,drho,F,R\n")
    for ev in traj.events:
        st = ev.state
        out.write(f"# event,{ev.kind.value},{fmt(ev.r)},{fmt(st.rho)},{fmt(st.drho)},"
                  f"{fmt(st.F)},{fmt(st.R)}\n")


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    write_trajectory_csv(traj, buf)
    return buf.getvalue()


def read_trajectory_csv(text: str):
    """Parse a trajectory CSV into ``(columns, events)``.

    ``columns`` maps each header name to a list of floats (``None`` for
    empty cells); ``events`` is a list of ``(kind, r, rho, drho, F, R)``.
    """
    lines = text.splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    reader = csv.reader(body)
    header = next(reader)
    if header != CSV_COLUMNS:
        raise DomainError(f"unexpected header {header}")
    columns = {name: [] for name in header}
    for row in reader:
        for name, cell in zip(header, row):
            columns[name].append(parse(cell))
    events = []
    for ln in lines:
        if ln.startswith("# event,") and not ln.startswith("# event,kind"):
            parts = ln[len("# event,"):].split(",")
            events.append((parts[0],) + tuple(parse(x) for x in parts[1:]))
    return columns, events


# --------------------------------------------------------------------------
# reports and sweeps
# --------------------------------------------------------------------------

def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def report_json(report) -> str:
    return json.dumps(_json_safe(report.to_dict()), indent=2)


def write_sweep_csv(rows: Iterable[SweepRow], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        rho0, drho0 = row.seed if row.seed is not None else (None, None)
        rep = row.report
        if rep is None:
            w.writerow([fmt(row.lam), fmt(rho0), fmt(drho0)] + [""] * 11
                       + [row.error or "", ""])
            continue
        lo, hi = rep.predicted_k_bounds if rep.predicted_k_bounds else (None, None)
        av, ares = rep.asymptote_drho if rep.asymptote_drho else (None, None)
        w.writerow([fmt(row.lam), fmt(rho0), fmt(drho0), rep.scalar_sign.value,
                    rep.k_monotonicity.value, fmt(rep.k_range[0]), fmt(rep.k_range[1]),
                    fmt(lo), fmt(hi), fmt(av), fmt(ares), rep.completeness.value,
                    rep.theorem_match.value, fmt(rep.terminal_r), "", rep.explanation])


def sweep_csv(rows: List[SweepRow]) -> str:
    buf = io.StringIO()
    write_sweep_csv(rows, buf)
    return buf.getvalue()
