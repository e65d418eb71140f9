"""Batch runs, checkpoint/restart and epsilon sweeps."""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import stencils as st
from .config import ConfigError, RunConfig, validate
from .diagnostics import CSV_COLUMNS, DiagnosticsRecord, criteria_monitor
from .dynamics import InstabilityError, evolve
from .grid import sup_norm
from .initial import SupportError, make_ic
from .snapshot import SnapshotError, load_snapshot, write_snapshot

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INSTABILITY = 3
EXIT_IO = 4

DIAG_FILE = "diagnostics.csv"
FINAL_SNAPSHOT = "final.epsf"
LAST_VALID_SNAPSHOT = "last_valid.epsf"
FAILURE_FILE = "failure.json"
SUMMARY_FILE = "summary.csv"
SUMMARY_COLUMNS = ("epsilon", "status", "final_omega1_sup", "omega1_growth",
                   "max_gamma_ratio", "energy_residual", "failure_time")


def snapshot_name(step: int) -> str:
    return f"snap_{step:08d}.epsf"


def _fmt(x) -> str:
    return repr(float(x))


@dataclass
class RunResult:
    status: int
    records: list = field(default_factory=list)
    omega1_sup: list = field(default_factory=list)
    final_state: object = None
    failure: Optional[dict] = None
    message: str = ""


def execute(cfg: RunConfig, resume=None, out_dir=None) -> RunResult:
    """Run one configuration; never raises for solver, config or io failures."""
    try:
        validate(cfg)
        grid, params = cfg.grid, cfg.params
        out = Path(cfg.output if out_dir is None else out_dir)
        if resume is not None:
            snap = load_snapshot(resume)
            if snap.state.grid != grid:
                raise ConfigError(f"snapshot grid {snap.state.grid} differs from config grid {grid}")
            if snap.params != params:
                raise ConfigError(f"snapshot parameters {snap.params} differ from config {params}")
            state0, step0 = snap.state, snap.step
        else:
            state0, step0 = make_ic(cfg.ic_spec, grid), 0
        if not cfg.T > state0.t:
            raise ConfigError(f"T = {cfg.T} does not exceed the start time {state0.t}")
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, SupportError) as exc:
        return RunResult(EXIT_CONFIG, message=str(exc))
    except (SnapshotError, OSError) as exc:
        return RunResult(EXIT_IO, message=str(exc))
    except ValueError as exc:
        return RunResult(EXIT_CONFIG, message=str(exc))

    result = RunResult(EXIT_OK)
    diag_path = out / DIAG_FILE
    append = resume is not None and diag_path.exists()
    last = {"state": state0, "step": step0}
    try:
        with open(diag_path, "a" if append else "w", newline="") as fh:
            writer = csv.writer(fh)
            if not append:
                writer.writerow(CSV_COLUMNS)

            def observe(state, n):
                step = step0 + n
                final = state.t == cfg.T
                last["state"], last["step"] = state, step
                if n == 0 and append:
                    return
                if step % cfg.diag_stride == 0 or final:
                    with np.errstate(over="ignore", invalid="ignore"):
                        rec = criteria_monitor(state, params, cfg.monitor, cfg.threads)
                    writer.writerow([_fmt(v) for v in rec.row()])
                    result.records.append(rec)
                    result.omega1_sup.append(sup_norm(state.omega1))
                if step % cfg.snapshot_stride == 0 and not (n == 0 and resume is not None):
                    write_snapshot(state, out / snapshot_name(step), params, step)

            try:
                final = evolve(state0, params, 0.0, cfg.step_control, observe, 1,
                               cfg.threads, until=cfg.T)
            except InstabilityError as exc:
                fh.flush()
                write_snapshot(last["state"], out / LAST_VALID_SNAPSHOT, params, last["step"])
                result.failure = {"time": exc.t, "field": exc.field, "last_dt": exc.dt,
                                  "last_valid_time": last["state"].t, "last_valid_step": last["step"]}
                (out / FAILURE_FILE).write_text(json.dumps(result.failure, indent=2) + "\n")
                result.status = EXIT_INSTABILITY
                result.final_state = last["state"]
                result.message = str(exc)
                return result
        write_snapshot(final, out / FINAL_SNAPSHOT, params, last["step"])
        result.final_state = final
    except OSError as exc:
        return RunResult(EXIT_IO, message=str(exc))
    return result


def run(cfg: RunConfig, resume=None) -> int:
    res = execute(cfg, resume)
    if res.message:
        log.error(res.message)
    return res.status


def energy_residual(records: Sequence[DiagnosticsRecord], nu: float) -> float:
    """Centred-difference energy-balance defect max |dE/dt + 2 nu D| / E(0).

    Tolerates uneven record spacing (the clipped last step), unlike the
    strict uniform-stride version in ``diagnostics``.
    """
    if len(records) < 3 or records[0].E_eps == 0:
        return float("nan")
    t = np.array([r.t for r in records])
    E = np.array([r.E_eps for r in records])
    D = np.array([r.D_eps for r in records])
    span = t[2:] - t[:-2]
    ok = span > 0  # steps shrink to nothing just before a blow-up
    if not ok.any():
        return float("nan")
    dE = (E[2:][ok] - E[:-2][ok]) / span[ok]
    return float(np.max(np.abs(dE + 2.0 * nu * D[1:-1][ok])) / E[0])


def omega1_scale0(state, T: float) -> float:
    """Reference size of omega1 for growth factors.

    ||omega1(0)||_oo when nonzero; otherwise T ||d_z(u1^2)(0)||_oo, the size
    omega1 reaches if it grows at its initial (linear-in-time) rate.
    """
    w0 = sup_norm(state.omega1)
    if w0 > 0:
        return w0
    g = state.grid
    return T * float(np.abs(st.d_z(state.u1.values**2, g.hz)).max())


def _summary_row(eps: float, cfg: RunConfig, res: RunResult) -> dict:
    status = {EXIT_OK: "ok", EXIT_INSTABILITY: "instability"}.get(res.status, "error")
    row = {"epsilon": eps, "status": status, "final_omega1_sup": math.nan,
           "omega1_growth": math.nan, "max_gamma_ratio": math.nan,
           "energy_residual": math.nan, "failure_time": math.nan}
    if res.records:
        row["final_omega1_sup"] = res.omega1_sup[-1]
        g0 = res.records[0].gamma_sup
        if g0 > 0:
            row["max_gamma_ratio"] = max(r.gamma_sup for r in res.records) / g0
        row["energy_residual"] = energy_residual(res.records, cfg.nu)
        scale = omega1_scale0(make_ic(cfg.ic_spec, cfg.grid), cfg.T)
        if scale > 0:
            row["omega1_growth"] = res.omega1_sup[-1] / scale
    if res.failure:
        row["failure_time"] = res.failure["time"]
    return row


def _sweep_one(args):
    cfg, eps, out_dir = args
    cfg = cfg.with_values(epsilon=eps, output=str(out_dir))
    res = execute(cfg)
    if res.message:
        log.warning("eps=%g: %s", eps, res.message)
    return _summary_row(eps, cfg, res)


def eps_dirname(eps: float) -> str:
    return f"eps_{eps:g}"


def sweep(cfg: RunConfig, eps_list: Sequence[float]) -> list[dict]:
    """Run ``cfg`` once per epsilon into ``<output>/eps_<value>`` and write ``summary.csv``.

    Raises ConfigError up front for any epsilon outside [0, 2).
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise ConfigError("empty epsilon list")
    for eps in eps_list:
        if not 0.0 <= eps < 2.0:
            raise ConfigError(f"invalid epsilon = {eps!r}: requires epsilon ∈ [0,2)")
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    pooled = cfg.threads > 1 and len(eps_list) > 1
    inner = cfg.with_values(threads=1) if pooled else cfg
    jobs = [(inner, eps, out / eps_dirname(eps)) for eps in eps_list]
    if pooled:
        with ProcessPoolExecutor(max_workers=min(cfg.threads, len(jobs))) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    with open(out / SUMMARY_FILE, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (v if isinstance(v, str) else _fmt(v)) for k, v in row.items()})
    return rows


def read_diagnostics(path) -> list[dict]:
    """Parse a diagnostics CSV, checking the header against the fixed schema."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected diagnostics header {header}")
        return [dict(zip(CSV_COLUMNS, map(float, row))) for row in reader]
