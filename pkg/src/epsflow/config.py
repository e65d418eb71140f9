"""Flat ``key = value`` run configuration."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .diagnostics import EPS_PRIME, MonitorConfig
from .dynamics import StepControl
from .grid import GridSpec, ModelParams
from .initial import IC_NAMES, ICSpec


class ConfigError(ValueError):
    pass


def _opt_float(s):
    return None if s.strip().lower() in ("", "none", "auto") else float(s)


def _p_list(s):
    out = []
    for item in s.split(","):
        item = item.strip()
        if item:
            out.append(math.inf if item.lower() in ("inf", "infinity") else float(item))
    return tuple(out)


# key -> (parser, default, description)
KEYS = {
    "Nr": (int, 129, "radial node count, axis included (>= 3)"),
    "Nz": (int, 128, "axial node count, periodic (>= 2)"),
    "R": (float, 8.0, "radial extent"),
    "Lz": (float, 8.0, "axial period"),
    "epsilon": (float, 1.5, "convection strength, in [0,2)"),
    "nu": (float, 0.1, "viscosity, >= 0"),
    "T": (float, 0.5, "final time"),
    "cfl_adv": (float, 0.5, "advective CFL factor, in (0,1]"),
    "cfl_diff": (float, 0.2, "diffusive CFL factor, in (0,1]"),
    "dt_max": (float, 1e-2, "time step cap"),
    "eps_prime": (float, EPS_PRIME, "exponent eps' of the monitored L^q norm, q = 4 - eps'"),
    "prodi_serrin_p": (_p_list, (4.0,), "comma-separated spatial exponents p > 3 (q from 3/p + 2/q = 1)"),
    "diag_stride": (int, 1, "steps between diagnostics rows (>= 1)"),
    "snapshot_stride": (int, 100, "steps between snapshots (>= 1)"),
    "ic": (str, "gaussian_swirl", "initial condition: " + ", ".join(IC_NAMES)),
    "ic_amplitude": (float, 4.0, "initial-condition amplitude"),
    "ic_width": (float, 0.5, "Gaussian width"),
    "ic_r0": (float, 0.0, "radial centre of the bump(s)"),
    "ic_z0": (_opt_float, None, "axial centre (auto = Lz/2)"),
    "ic_separation": (_opt_float, None, "dipole spacing (auto = 2 * width)"),
    "ic_modes": (int, 3, "random_smooth: highest axial wavenumber"),
    "seed": (int, 0, "seed for randomized initial conditions"),
    "output": (str, "run_output", "output directory"),
    "threads": (int, 1, "worker threads; 1 = bit-reproducible sequential mode"),
}


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=lambda: {k: v[1] for k, v in KEYS.items()})

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def with_values(self, **kw) -> "RunConfig":
        vals = dict(self.values)
        for k, v in kw.items():
            if k not in KEYS:
                raise ConfigError(f"unknown key {k!r}")
            vals[k] = v
        cfg = replace(self, values=vals)
        validate(cfg)
        return cfg

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.Nr, self.Nz, self.R, self.Lz)

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.epsilon, self.nu)

    @property
    def step_control(self) -> StepControl:
        return StepControl(self.cfl_adv, self.cfl_diff, self.dt_max)

    @property
    def monitor(self) -> MonitorConfig:
        pairs = tuple((p, 2.0 / (1.0 - (0.0 if math.isinf(p) else 3.0 / p)))
                      for p in self.prodi_serrin_p)
        return MonitorConfig(self.eps_prime, pairs, self.diag_stride)

    @property
    def ic_spec(self) -> ICSpec:
        return ICSpec(self.ic, self.ic_amplitude, self.ic_width, self.ic_r0,
                      self.ic_z0, self.ic_separation, self.ic_modes, self.seed)


def validate(cfg: RunConfig) -> None:
    v = cfg.values
    checks = [
        ("epsilon", 0.0 <= v["epsilon"] < 2.0, "epsilon ∈ [0,2)"),
        ("nu", v["nu"] >= 0.0, "nu >= 0"),
        ("Nr", v["Nr"] >= 3, "Nr >= 3"),
        ("Nz", v["Nz"] >= 2, "Nz >= 2"),
        ("R", v["R"] > 0, "R > 0"),
        ("Lz", v["Lz"] > 0, "Lz > 0"),
        ("T", v["T"] > 0, "T > 0"),
        ("cfl_adv", 0 < v["cfl_adv"] <= 1, "cfl_adv ∈ (0,1]"),
        ("cfl_diff", 0 < v["cfl_diff"] <= 1, "cfl_diff ∈ (0,1]"),
        ("dt_max", v["dt_max"] > 0, "dt_max > 0"),
        ("eps_prime", 0 < v["eps_prime"] < 4, "eps_prime ∈ (0,4)"),
        ("prodi_serrin_p", len(v["prodi_serrin_p"]) > 0 and all(p > 3 for p in v["prodi_serrin_p"]),
         "every p > 3"),
        ("diag_stride", v["diag_stride"] >= 1, "diag_stride >= 1"),
        ("snapshot_stride", v["snapshot_stride"] >= 1, "snapshot_stride >= 1"),
        ("ic", v["ic"] in IC_NAMES, "ic ∈ {" + ", ".join(IC_NAMES) + "}"),
        ("ic_width", v["ic_width"] > 0, "ic_width > 0"),
        ("ic_modes", v["ic_modes"] >= 0, "ic_modes >= 0"),
        ("threads", v["threads"] >= 1, "threads >= 1"),
    ]
    for key, ok, rule in checks:
        if not ok:
            raise ConfigError(f"invalid {key} = {v[key]!r}: requires {rule}")


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    vals = {k: v[1] for k, v in KEYS.items()}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        parser = KEYS[key][0]
        try:
            vals[key] = parser(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: cannot parse {key} = {value!r}") from None
    cfg = RunConfig(vals)
    validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def _fmt(v):
    if v is None:
        return "auto"
    if isinstance(v, tuple):
        return ", ".join("inf" if math.isinf(p) else repr(p) for p in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(cfg: RunConfig) -> str:
    lines = [f"{k} = {_fmt(cfg.values[k])}" for k in KEYS]
    return "\n".join(lines) + "\n"


def key_table() -> str:
    rows = ["| key | default | meaning |", "|---|---|---|"]
    rows += [f"| `{k}` | `{_fmt(d)}` | {desc} |" for k, (_, d, desc) in KEYS.items()]
    return "\n".join(rows)
