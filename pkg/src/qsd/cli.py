"""Command-line scenario runner.

    qsd run    --config <path> [--out <dir>]
    qsd sweep  --config <path> --key <dotpath> --values v1,v2,... [--out <dir>] [--jobs N]
    qsd scales --config <path>

Exit status: 0 on success, 2 on configuration errors, 3 on solver errors.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .analysis import crossover_scales, early_exponent, log_derivative
from .config import META_HEADER, ConfigError, ScenarioConfig, format_value, load_config
from .dispersion import (
    constant_sigma_fixed_point,
    equilibrium_dispersion_harmonic,
    relaxed_fixed_point,
    trajectory,
)
from .model import ArrheniusModel, PhysicalParams, Potential
from .pde import (
    SemiclassicalValidityError,
    build_effective_fields,
    evolve,
    gaussian_state,
    moments,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


@dataclass
class RunResult:
    series: dict = field(default_factory=dict)  # mode -> (t, sigma2) in output units
    raw_final: dict = field(default_factory=dict)  # mode -> final sigma2 in raw units
    meta: dict = field(default_factory=dict)


def physical_params(cfg: ScenarioConfig) -> PhysicalParams:
    return PhysicalParams(cfg["params.mass"], cfg["params.zeta"], cfg["params.beta"],
                          cfg["params.hbar"], cfg["params.omega0"])


def arrhenius_model(cfg: ScenarioConfig) -> ArrheniusModel | None:
    if cfg["arrhenius.D0"] is None:
        return None
    return ArrheniusModel(cfg["arrhenius.D0"], cfg["arrhenius.Ea"])


def potential(cfg: ScenarioConfig, p: PhysicalParams) -> Potential:
    kind = cfg["potential.kind"]
    if kind == "free":
        return Potential.free()
    if kind == "harmonic":
        return Potential.harmonic(p.mass, p.omega0)
    if kind == "double_well":
        return Potential.double_well(cfg["potential.a"], cfg["potential.b"])
    return Potential.polynomial(cfg["potential.coeffs"])


def _scales(cfg: ScenarioConfig, p: PhysicalParams):
    if cfg["output.units"] == "scaled":
        return p.t_cross, p.lambda_T
    return 1.0, 1.0


def time_grid(cfg: ScenarioConfig) -> np.ndarray:
    t0, t1, n = cfg["time.t_start"], cfg["time.t_end"], cfg["time.n_samples"]
    if cfg["time.spacing"] == "geometric":
        return np.geomspace(t0, t1, n)
    return np.linspace(t0, t1, n)


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    p = physical_params(cfg)
    arr = arrhenius_model(cfg)
    t_unit, x_unit = _scales(cfg, p)
    s_unit = x_unit * x_unit
    t_out = time_grid(cfg)
    t_raw = t_out * t_unit
    sigma2_0 = cfg["initial.sigma2"] * s_unit
    res = RunResult()
    meta = res.meta

    scales = crossover_scales(p, arr)
    meta["derived.D"] = p.D
    meta["derived.lambda_T"] = p.lambda_T
    meta["derived.t_cross"] = p.t_cross
    meta["derived.sigma2_quantum_10pct"] = scales.sigma2_quantum_10pct
    if arr is not None:
        meta["derived.lambda_E"] = scales.lambda_E
    if cfg["output.units"] == "scaled":
        meta["units.t"] = "t_cross"
        meta["units.x"] = "lambda_T"
        meta["units.sigma2"] = "lambda_T^2"
    else:
        meta["units.t"] = meta["units.x"] = meta["units.sigma2"] = "raw"
    meta["scheme.backend"] = kernels.BACKEND

    if cfg.scenario == "harmonic":
        meta["sigma2_eq_relaxed"] = relaxed_fixed_point(p)
        meta["sigma2_eq_constant_sigma"] = constant_sigma_fixed_point(p)
        meta["sigma2_eq_coth"] = equilibrium_dispersion_harmonic(p)

    if cfg.scenario == "pde":
        _run_pde(cfg, p, t_out, t_raw, sigma2_0, x_unit, res)
    else:
        meta["scheme.ode"] = "dormand-prince 5(4)"
        meta["scheme.ode_rtol"] = cfg["ode.rtol"]
        meta["scheme.ode_atol"] = cfg["ode.atol"]
        for mode in cfg.modes:
            options = {"rtol": cfg["ode.rtol"], "atol": cfg["ode.atol"]}
            if mode == "beta_resolved":
                options.update(n_beta=cfg["grid.n_beta"], beta_min=cfg["grid.beta_min"],
                               initial=cfg["grid.initial"])
            traj = trajectory(mode, t_raw, p, sigma2_0=sigma2_0, zeta_model=arr,
                              log_const=cfg["log_law.const"], **options)
            for k, v in sorted(traj.meta.items()):
                if k not in ("rtol", "atol"):
                    meta[f"scheme.{mode}.{k}"] = v
            res.series[mode] = (t_out, traj.sigma2 / s_unit)
            res.raw_final[mode] = float(traj.sigma2[-1])
    return res


def _run_pde(cfg, p, t_out, t_raw, sigma2_0, x_unit, res):
    x_lo, x_hi = cfg["grid.x_lo"] * x_unit, cfg["grid.x_hi"] * x_unit
    V = potential(cfg, p)
    override = cfg["grid.override_validity"]
    start = gaussian_state(x_lo, x_hi, cfg["grid.n"], sigma2_0)
    for form in cfg.modes:
        fields = build_effective_fields(V, p, form, start.x)
        res.meta[f"flags.{form}.semiclassical_valid"] = fields.valid
        state = start.copy()
        state.t = float(t_raw[0])
        var = np.empty(t_raw.size)
        for i, t in enumerate(t_raw):
            state = evolve(state, fields, p, float(t), override=override)
            var[i] = moments(state).variance
        m = moments(state)
        res.meta[f"scheme.{form}.steps"] = state.info["steps"]
        res.meta[f"scheme.{form}.dt"] = state.info["dt"]
        res.meta[f"flags.{form}.clamped"] = state.info["clamped"]
        res.meta[f"result.{form}.min_P"] = state.info["min_P"]
        res.meta[f"result.{form}.norm_error"] = abs(m.norm - 1.0)
        res.series[form] = (t_out, var / (x_unit * x_unit))
        res.raw_final[form] = float(var[-1])
    res.meta["scheme.pde"] = "vertex-centred flux form, SSP-RK2, CFL 0.4, reflecting ends"


def alpha_column(t: np.ndarray, s: np.ndarray) -> list:
    """Local exponent at interior points whose neighbours are all positive."""
    alpha: list = [None] * t.size
    ok = (t > 0) & (s > 0)
    for i in range(1, t.size - 1):
        if ok[i - 1] and ok[i] and ok[i + 1]:
            alpha[i] = 0.5 * float(log_derivative(t[i - 1:i + 2], s[i - 1:i + 2])[0])
    return alpha


def format_number(v: float, precision: int) -> str:
    return f"{v:.{precision - 1}e}"


def write_csv(path: Path, t: np.ndarray, s: np.ndarray, precision: int) -> None:
    alpha = alpha_column(t, s)
    lines = ["t,sigma2,alpha"]
    for ti, si, ai in zip(t, s, alpha):
        a = "" if ai is None else format_number(ai, precision)
        lines.append(f"{format_number(float(ti), precision)},{format_number(float(si), precision)},{a}")
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def write_meta(path: Path, cfg: ScenarioConfig, meta: dict) -> None:
    lines = [META_HEADER, cfg.to_text().rstrip("\n")]
    lines += [f"{k} = {format_value(meta[k])}" for k in sorted(meta)]
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def execute(cfg: ScenarioConfig, out_dir: Path) -> RunResult:
    res = run_scenario(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    precision = cfg["output.precision"]
    for mode, (t, s) in res.series.items():
        write_csv(out_dir / f"{cfg.scenario}_{mode}.csv", t, s, precision)
    write_meta(out_dir / "meta.txt", cfg, res.meta)
    return res


SOLVER_ERRORS = (ArithmeticError, SemiclassicalValidityError, ValueError)


def cmd_run(config: str, out: str | None) -> int:
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        execute(cfg, Path(out or cfg["output.directory"]))
    except SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _sweep_one(args):
    config, key, value, out_dir = args
    cfg = load_config(config, {key: value})
    res = execute(cfg, out_dir)
    p = physical_params(cfg)
    mode = cfg.modes[0]
    t_unit, x_unit = _scales(cfg, p)
    t, s = res.series[mode]
    row = {
        "value": value,
        "mode": mode,
        "final_sigma2": res.raw_final[mode],
        "early_alpha": early_exponent(t * t_unit, s * x_unit * x_unit),
        "t_cross": p.t_cross,
    }
    if cfg.scenario == "harmonic":
        row["sigma2_eq_coth"] = res.meta["sigma2_eq_coth"]
    return row


def cmd_sweep(config: str, key: str, values: str, out: str | None, jobs: int = 1) -> int:
    vals = [v.strip() for v in values.split(",") if v.strip()]
    try:
        if not vals:
            raise ConfigError("--values: empty value list")
        base = load_config(config)
        for v in vals:
            load_config(config, {key: v})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    root = Path(out or base["output.directory"])
    tasks = [(config, key, v, root / f"{key}={v}") for v in vals]
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_sweep_one, tasks))
        else:
            rows = [_sweep_one(t) for t in tasks]
    except SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    precision = base["output.precision"]
    cols = list(rows[0])
    lines = [",".join(cols)]
    for row in rows:
        cells = []
        for c in cols:
            v = row[c]
            cells.append(format_number(v, precision) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "sweep.csv", "w", newline="\n", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_scales(config: str) -> int:
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    p = physical_params(cfg)
    sc = crossover_scales(p, arrhenius_model(cfg))
    print(f"D = {p.D!r}")
    print(f"lambda_T = {p.lambda_T!r}")
    print(f"t_cross = {p.t_cross!r}")
    print(f"sigma2_quantum_10pct = {sc.sigma2_quantum_10pct!r}")
    if sc.lambda_E is not None:
        print(f"lambda_E = {sc.lambda_E!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsd", description="Quantum Smoluchowski dispersion scenarios")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    sweep = sub.add_parser("sweep", help="run a scenario for several values of one key")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--key", required=True)
    sweep.add_argument("--values", required=True)
    sweep.add_argument("--out")
    sweep.add_argument("--jobs", type=int, default=1)
    scales = sub.add_parser("scales", help="print derived scales")
    scales.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.key, args.values, args.out, args.jobs)
    return cmd_scales(args.config)


if __name__ == "__main__":
    sys.exit(main())
