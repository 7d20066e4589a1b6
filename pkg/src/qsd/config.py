"""Flat ``dot.path = value`` scenario configuration.

One assignment per line, ``#`` starts a comment.  Unknown keys and
ill-typed values are errors naming the offending key.  A ``meta.txt``
written by a run (first line :data:`META_HEADER`) is also accepted: its
result-only sections are skipped so a run can be reproduced from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .dispersion import MODES
from .pde import FORMS

META_HEADER = "# qsd run metadata"
META_SECTIONS = ("derived.", "scheme.", "flags.", "result.", "units.", "sigma2_eq_")

SCENARIO_MODES = {
    "free": ("closed_form", "constant_sigma", "elementary_approx", "log_law", "early_power", "beta_resolved"),
    "harmonic": ("relaxed", "beta_resolved", "constant_sigma"),
    "pde": FORMS,
}
DEFAULT_MODES = {
    "free": ("closed_form", "constant_sigma", "elementary_approx"),
    "harmonic": ("relaxed", "beta_resolved"),
    "pde": ("coffey", "ankerhold"),
}
QUANTUM_ONLY = ("closed_form", "log_law", "early_power")


class ConfigError(ValueError):
    pass


def _float(key, raw):
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite, got {raw!r}")
    return v


def _int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _bool(key, raw):
    low = raw.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {raw!r}")


def _str(key, raw):
    return raw.strip()


def _float_list(key, raw):
    return tuple(_float(key, v) for v in raw.split(",") if v.strip())


def _str_list(key, raw):
    return tuple(v.strip() for v in raw.split(",") if v.strip())


def _opt(conv):
    def parse(key, raw):
        return None if raw.strip().lower() in ("", "auto", "none") else conv(key, raw)

    return parse


# key -> (parser, default); None default means "resolved from other keys"
SCHEMA: dict[str, tuple[Callable[[str, str], Any], Any]] = {
    "scenario": (_str, None),
    "modes": (_str_list, None),
    "params.mass": (_float, 1.0),
    "params.zeta": (_float, 1.0),
    "params.beta": (_float, 1.0),
    "params.hbar": (_float, 1.0),
    "params.omega0": (_float, None),
    "arrhenius.D0": (_opt(_float), None),
    "arrhenius.Ea": (_opt(_float), None),
    "potential.kind": (_str, None),
    "potential.coeffs": (_float_list, ()),
    "potential.a": (_float, 1.0),
    "potential.b": (_float, 1.0),
    "grid.x_lo": (_float, None),
    "grid.x_hi": (_float, None),
    "grid.n": (_int, 1024),
    "grid.n_beta": (_int, 256),
    "grid.beta_min": (_opt(_float), None),
    "grid.initial": (_str, "uniform"),
    "grid.override_validity": (_bool, False),
    "initial.sigma2": (_float, None),
    "time.t_start": (_float, None),
    "time.t_end": (_float, 10.0),
    "time.n_samples": (_int, 101),
    "time.spacing": (_str, "linear"),
    "ode.rtol": (_float, 1e-9),
    "ode.atol": (_float, 1e-12),
    "log_law.const": (_opt(_float), None),
    "output.directory": (_str, "qsd_out"),
    "output.precision": (_int, 17),
    "output.units": (_str, None),
}


@dataclass
class ScenarioConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @property
    def scenario(self) -> str:
        return self.values["scenario"]

    @property
    def modes(self) -> tuple:
        return self.values["modes"]

    def to_text(self) -> str:
        """Resolved configuration, one ``key = value`` line per schema key."""
        return "".join(f"{k} = {format_value(self.values[k])}".rstrip() + "\n" for k in SCHEMA)


def format_value(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(format_value(x) for x in v)
    return str(v)


def parse_text(text: str) -> dict:
    raw: dict[str, str] = {}
    lines = text.splitlines()
    is_meta = bool(lines) and lines[0].strip() == META_HEADER
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if is_meta and key.startswith(META_SECTIONS):
            continue
        if key not in SCHEMA:
            raise ConfigError(f"{key}: unknown configuration key (line {lineno})")
        if key in raw:
            raise ConfigError(f"{key}: assigned twice (line {lineno})")
        raw[key] = value
    return raw


def resolve(raw: dict) -> ScenarioConfig:
    """Parse values, fill defaults and check cross-key invariants."""
    v: dict[str, Any] = {}
    for key, (parse, default) in SCHEMA.items():
        v[key] = parse(key, raw[key]) if key in raw else default

    scenario = v["scenario"]
    if scenario not in SCENARIO_MODES:
        raise ConfigError(f"scenario: must be one of {sorted(SCENARIO_MODES)}, got {scenario!r}")

    for key in ("params.mass", "params.zeta", "params.beta"):
        if not v[key] > 0:
            raise ConfigError(f"{key}: must be > 0, got {v[key]!r}")
    if v["params.hbar"] < 0:
        raise ConfigError(f"params.hbar: must be >= 0, got {v['params.hbar']!r}")
    if v["params.omega0"] is None:
        v["params.omega0"] = 0.0 if scenario == "free" else 1.0
    if v["params.omega0"] < 0:
        raise ConfigError(f"params.omega0: must be >= 0, got {v['params.omega0']!r}")
    if scenario == "free" and v["params.omega0"] != 0:
        raise ConfigError("params.omega0: must be 0 for scenario=free")
    if scenario == "harmonic" and not v["params.omega0"] > 0:
        raise ConfigError("params.omega0: must be > 0 for scenario=harmonic")

    d0, ea = v["arrhenius.D0"], v["arrhenius.Ea"]
    if (d0 is None) != (ea is None):
        raise ConfigError("arrhenius.D0: arrhenius.D0 and arrhenius.Ea must be given together")
    for key in ("arrhenius.D0", "arrhenius.Ea"):
        if v[key] is not None and not v[key] > 0:
            raise ConfigError(f"{key}: must be > 0, got {v[key]!r}")

    modes = v["modes"] if v["modes"] is not None else DEFAULT_MODES[scenario]
    if not modes:
        raise ConfigError("modes: at least one mode is required")
    for mode in modes:
        if mode not in SCENARIO_MODES[scenario]:
            known = MODES + FORMS
            what = "unknown mode" if mode not in known else f"not valid for scenario={scenario}"
            raise ConfigError(f"modes: {mode!r} is {what}")
        if mode in QUANTUM_ONLY and v["params.hbar"] == 0:
            raise ConfigError(f"params.hbar: mode {mode!r} needs hbar > 0")
    if len(set(modes)) != len(modes):
        raise ConfigError("modes: listed twice")
    v["modes"] = tuple(modes)

    if v["output.units"] is None:
        v["output.units"] = "scaled" if v["params.hbar"] > 0 else "raw"
    if v["output.units"] not in ("scaled", "raw"):
        raise ConfigError(f"output.units: must be 'scaled' or 'raw', got {v['output.units']!r}")
    if v["output.units"] == "scaled" and v["params.hbar"] == 0:
        raise ConfigError("output.units: scaled units need params.hbar > 0")
    if not 1 <= v["output.precision"] <= 17:
        raise ConfigError("output.precision: must lie in [1, 17]")

    if v["time.spacing"] not in ("linear", "geometric"):
        raise ConfigError(f"time.spacing: must be 'linear' or 'geometric', got {v['time.spacing']!r}")
    if v["time.n_samples"] < 2:
        raise ConfigError(f"time.n_samples: must be >= 2, got {v['time.n_samples']}")
    if v["time.t_start"] is None:
        v["time.t_start"] = 1e-3 if v["time.spacing"] == "geometric" else 0.0
    if v["time.t_start"] < 0:
        raise ConfigError("time.t_start: must be >= 0")
    if v["time.spacing"] == "geometric" and not v["time.t_start"] > 0:
        raise ConfigError("time.t_start: geometric spacing needs t_start > 0")
    if not v["time.t_end"] > v["time.t_start"]:
        raise ConfigError("time.t_end: must exceed time.t_start")
    if "log_law" in modes and not v["time.t_start"] > 0:
        raise ConfigError("time.t_start: log_law needs t_start > 0")

    if v["initial.sigma2"] is None:
        v["initial.sigma2"] = 0.0 if scenario == "free" else 1.0
    if v["initial.sigma2"] < 0:
        raise ConfigError("initial.sigma2: must be >= 0")
    needs_positive = scenario == "pde" or "beta_resolved" in modes or (
        scenario == "harmonic" and "constant_sigma" in modes)
    if needs_positive and not v["initial.sigma2"] > 0:
        raise ConfigError("initial.sigma2: must be > 0 for the requested modes")

    if v["grid.n_beta"] < 16:
        raise ConfigError("grid.n_beta: must be >= 16")
    if v["grid.initial"] not in ("uniform", "coth"):
        raise ConfigError(f"grid.initial: must be 'uniform' or 'coth', got {v['grid.initial']!r}")
    if v["grid.initial"] == "coth" and scenario != "harmonic":
        raise ConfigError("grid.initial: the coth profile needs scenario=harmonic")
    if v["grid.beta_min"] is not None and not 0 < v["grid.beta_min"] <= v["params.beta"] / v["grid.n_beta"]:
        raise ConfigError("grid.beta_min: must lie in (0, beta/n_beta]")
    if v["grid.n"] < 64:
        raise ConfigError("grid.n: must be >= 64")
    if v["potential.kind"] is None:
        v["potential.kind"] = "harmonic" if v["params.omega0"] > 0 else "free"
    if v["potential.kind"] not in ("free", "harmonic", "double_well", "polynomial"):
        raise ConfigError(f"potential.kind: unknown potential {v['potential.kind']!r}")
    if v["potential.kind"] == "polynomial" and not 1 <= len(v["potential.coeffs"]) <= 9:
        raise ConfigError("potential.coeffs: polynomial needs 1 to 9 coefficients")
    if v["grid.x_lo"] is None:
        v["grid.x_lo"] = -10.0
    if v["grid.x_hi"] is None:
        v["grid.x_hi"] = -v["grid.x_lo"]
    if not v["grid.x_hi"] > v["grid.x_lo"]:
        raise ConfigError("grid.x_hi: must exceed grid.x_lo")
    for key in ("ode.rtol", "ode.atol"):
        if not v[key] > 0:
            raise ConfigError(f"{key}: must be > 0")
    return ScenarioConfig(v)


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    raw = parse_text(text)
    for key, value in (overrides or {}).items():
        if key not in SCHEMA:
            raise ConfigError(f"{key}: unknown configuration key")
        raw[key] = value
    return resolve(raw)
