"""Command-line front end.

Subcommands::

    epca solve           march and/or Picard-iterate one instance, certify it
    epca diagnose        defect profiles of a path read from CSV
    epca verify-process  numerical check of the evolution-process axioms
    epca demo-heat       the heat-equation example end to end

Exit codes: 0 verdict pass, 1 verdict fail, 2 usage error, 3 solver error.
Every option can also be given in a ``--config`` file as ``key = value``
(``#`` comments, option names with or without dashes); command-line flags
override the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import evolution as ev
from . import io
from .function_space import grid_divisions, stepanov_defect_profile, sup_defect_profile
from .heat import HeatInstance, build_heat_process, run_heat_demo, snapshot
from .solver import (
    SolverConfig,
    SolverError,
    certify_sap,
    march,
    picard_solve,
)

log = logging.getLogger("epca")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

COMMANDS = ("solve", "diagnose", "verify-process", "demo-heat")
MODELS = ("scalar", "diagonal", "heat")
METHODS = ("march", "picard", "both")
FORCINGS = ("sine", "rational", "affine", "decay", "ramp", "zero", "modal", "pointwise")


class UsageError(ValueError):
    pass


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _choice(options):
    def conv(text):
        if text not in options:
            raise UsageError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return conv


def _path_or_none(text):
    return None if text in (None, "", "none") else str(text)


# key -> (converter, default, help)
OPTIONS = {
    "model": (_choice(MODELS), "scalar", "instance family"),
    "method": (_choice(METHODS), "both", "solution route"),
    "forcing": (_choice(FORCINGS), None,
                "nonlinearity (scalar/diagonal: sine, rational, affine, decay, ramp, "
                "zero; heat: modal, pointwise)"),
    "a": (float, 3.0, "decay rate of the scalar model"),
    "K": (float, 1.0, "declared stability constant"),
    "L": (float, 1.0, "Lipschitz constant of the scalar/diagonal nonlinearity"),
    "beta": (float, 1.0, "Lipschitz constant of the heat nonlinearity"),
    "rates": (_floats, None, "diagonal rates, comma separated"),
    "c0": (_floats, None, "initial state, comma separated"),
    "omega": (float, 2.0, "asymptotic period"),
    "p": (float, 1.0, "Stepanov exponent"),
    "h": (float, 1.0 / 64, "grid step, 1/m"),
    "horizon": (int, None, "integer horizon (default 64, demo-heat 100)"),
    "modes": (int, 16, "retained sine modes"),
    "quad_order": (int, 4, "Gauss-Legendre points per substep"),
    "tol": (float, 1e-10, "Picard tolerance"),
    "max_iter": (int, 200, "Picard iteration cap"),
    "sap_tol": (float, 1e-2, "tolerance of the defect decay test"),
    "samples": (int, 10_000, "random samples for verify-process"),
    "snapshots": (_floats, (), "times for spatial snapshots (demo-heat)"),
    "input": (_path_or_none, None, "path CSV to diagnose"),
    "process": (_path_or_none, None, "process description file"),
    "out": (str, "epca_out", "output directory"),
    "seed": (int, 0, "seed for diagnostic sampling"),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str
    method: str
    forcing: str
    a: float
    K: float
    L: float
    beta: float
    rates: Optional[tuple]
    c0: Optional[tuple]
    omega: float
    p: float
    h: float
    horizon: int
    modes: int
    quad_order: int
    tol: float
    max_iter: int
    sap_tol: float
    samples: int
    snapshots: tuple
    input: Optional[str]
    process: Optional[str]
    out: str
    seed: int
    config: Optional[str] = None

    @property
    def lipschitz(self) -> float:
        return self.beta if self.model == "heat" else self.L

    @property
    def theta(self) -> float:
        if self.model == "heat":
            return self.beta / 3.0
        a = self.a if self.model == "scalar" else -max(self.rates or (-self.a,))
        return self.L * self.K / a

    def solver_config(self) -> SolverConfig:
        return SolverConfig(self.h, self.horizon, self.quad_order, self.tol, self.max_iter)


def _validate(values: dict):
    def need(cond, msg):
        if not cond:
            raise UsageError(msg)

    need(values["p"] >= 1, "p must be >= 1")
    try:
        grid_divisions(values["h"])
    except ValueError:
        raise UsageError("h must be 1/m for an integer m >= 2") from None
    need(values["horizon"] >= 1, "horizon must be >= 1")
    need(values["a"] > 0, "a must be > 0")
    need(values["K"] > 0, "K must be > 0")
    need(values["L"] >= 0, "L must be >= 0")
    need(values["beta"] >= 0, "beta must be >= 0")
    need(values["omega"] > 0, "omega must be > 0")
    need(values["modes"] >= 1, "modes must be >= 1")
    need(1 <= values["quad_order"] <= 16, "quad_order must be in 1..16")
    need(values["tol"] > 0, "tol must be > 0")
    need(values["max_iter"] >= 1, "max_iter must be >= 1")
    need(values["sap_tol"] > 0, "sap_tol must be > 0")
    need(values["samples"] >= 1, "samples must be >= 1")
    if values["rates"] is not None:
        need(len(values["rates"]) >= 1, "rates must not be empty")
    heat_like = values["model"] == "heat" or values["command"] == "demo-heat"
    if values["forcing"] is not None:
        heat_forcing = values["forcing"] in ("modal", "pointwise")
        need(heat_forcing == heat_like,
             f"forcing {values['forcing']!r} does not fit model {values['model']!r}")
    if values["command"] in ("solve", "demo-heat"):
        need(values["horizon"] >= 4 * values["omega"],
             "horizon must be >= 4*omega for certification")
    if values["command"] == "diagnose":
        need(values["input"] is not None, "diagnose needs --input")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epca",
        description="Asymptotically periodic mild solutions of equations with "
                    "piecewise constant argument.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name in COMMANDS:
        sp = sub.add_parser(name, allow_abbrev=False)
        sp.add_argument("--config", default=argparse.SUPPRESS, metavar="FILE",
                        help="key = value file; flags override it")
        for key, (_, default, help_) in OPTIONS.items():
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, dest=key, default=argparse.SUPPRESS, metavar="X",
                            help=f"{help_} (default: {default})")
    return parser


def parse_config(argv) -> RunConfig:
    """Flags, then config file, then defaults. Exits with code 2 on errors."""
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    config_file = ns.pop("config", None)
    raw = {}
    lookup = {k.lower(): k for k in OPTIONS}
    if config_file is not None:
        try:
            file_values = io.read_kv_file(config_file)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        for key, value in file_values.items():
            if key not in lookup:
                parser.error(f"unknown config key {key!r}")
            raw[lookup[key]] = value
    raw.update(ns)
    values = {"command": command, "config": config_file}
    for key, (conv, default, _) in OPTIONS.items():
        if key in raw:
            try:
                values[key] = conv(raw[key])
            except (UsageError, ValueError, TypeError):
                parser.error(f"malformed value for {key}: {raw[key]!r}")
        else:
            values[key] = default
    if values["horizon"] is None:
        values["horizon"] = 100 if command == "demo-heat" else 64
    try:
        _validate(values)
    except UsageError as exc:
        parser.error(str(exc))
    return RunConfig(**values)


# --- instances -------------------------------------------------------------

def build_process(cfg: RunConfig) -> ev.EvolutionProcess:
    if cfg.process is not None:
        return ev.load_process(cfg.process)
    if cfg.model == "heat":
        return build_heat_process(cfg.modes)
    if cfg.model == "scalar":
        return ev.EvolutionProcess(np.array([-cfg.a]), cfg.K, cfg.a, cfg.omega, None,
                                   "scalar")
    rates = cfg.rates if cfg.rates is not None else tuple(
        -(cfg.a + k) for k in range(cfg.modes))
    a = -max(rates)
    if a <= 0:
        raise UsageError("diagonal rates must all be negative")
    return ev.EvolutionProcess(np.array(rates), cfg.K, a, cfg.omega, None, "diagonal")


def build_nonlinearity(cfg: RunConfig, dim: int) -> ev.Nonlinearity:
    kind = cfg.forcing
    if cfg.model == "heat":
        inst = HeatInstance(beta=cfg.beta, modes=dim, forcing=kind or "modal")
        return inst.nonlinearity()
    kind = kind or "sine"
    w = cfg.omega
    if kind == "sine":
        return ev.sine_state(cfg.L, ev.standard_drive, dim, w)
    if kind == "rational":
        return ev.rational_state(cfg.L, ev.standard_drive, dim, w)
    if kind == "affine":
        return ev.affine(cfg.L, ev.standard_drive, dim, w)
    if kind == "decay":
        return ev.affine(0.0, lambda t: np.exp(-t), dim, w)
    if kind == "ramp":
        return ev.ramp(dim, w)
    return ev.zero_nonlinearity(dim, w)


def initial_state(cfg: RunConfig, dim: int) -> np.ndarray:
    if cfg.c0 is None:
        return np.eye(dim)[0] if cfg.model == "heat" else np.ones(dim)
    c0 = np.array(cfg.c0, dtype=np.float64)
    if c0.size == 1 and dim > 1:
        c0 = np.full(dim, c0[0])
    if c0.shape != (dim,):
        raise UsageError(f"c0 has {c0.size} entries, state dimension is {dim}")
    return c0


# --- subcommands -----------------------------------------------------------

def _write_report(out: Path, name: str, lines) -> None:
    (out / name).write_text("\n".join(lines) + "\n")


def _certification_lines(sup, sp, verdict, cfg):
    return [
        f"omega = {cfg.omega:g}",
        f"p = {cfg.p:g}",
        f"sup_defect_final = {sup.final:.6e}",
        f"stepanov_defect_final = {sp.final:.6e}",
        f"decay_tolerance = {cfg.sap_tol:g}",
        f"verdict = {'pass' if verdict else 'fail'}",
    ]


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    proc = build_process(cfg)
    f = build_nonlinearity(cfg, proc.dim)
    c0 = initial_state(cfg, proc.dim)
    scfg = cfg.solver_config()
    theta = f.lipschitz * proc.K / proc.a
    lines = ["command = solve", f"model = {cfg.model}", f"process = {proc.describe()}",
             f"forcing = {f.name}", f"L = {f.lipschitz:g}", f"theta = {theta:.12g}",
             f"h = {scfg.h:.17g}", f"horizon = {scfg.horizon}", f"method = {cfg.method}"]
    if theta >= 1:
        log.warning("theta = %.4g >= 1: contraction condition violated", theta)
    sol_m = sol_p = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if cfg.method in ("march", "both"):
            sol_m = march(proc, f, c0, scfg)
        if cfg.method in ("picard", "both"):
            sol_p = picard_solve(proc, f, c0, scfg)
    primary = sol_p if sol_p is not None else sol_m
    io.write_path_csv(primary.path, out / "solution.csv")
    if sol_p is not None:
        io.write_residuals_csv(sol_p.residuals, out / "residuals.csv")
        lines.append(f"picard_iterations = {sol_p.iterations}")
    if sol_m is not None and sol_p is not None:
        io.write_path_csv(sol_m.path, out / "solution_march.csv")
        diff = float(np.max(np.abs(sol_m.path.values - sol_p.path.values)))
        lines.append(f"march_picard_sup_difference = {diff:.3e}")
    sup, sp, verdict = certify_sap(primary, cfg.omega, cfg.p, cfg.sap_tol,
                                   cfg.quad_order)
    io.write_profile_csv(sup, out / "profile_sup.csv")
    io.write_profile_csv(sp, out / "profile_sp.csv")
    lines += _certification_lines(sup, sp, verdict, cfg)
    _write_report(out, "report.txt", lines)
    print("\n".join(lines))
    return EXIT_PASS if verdict else EXIT_FAIL


def cmd_diagnose(cfg: RunConfig, out: Path) -> int:
    try:
        path = io.read_path_csv(cfg.input)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {cfg.input}: {exc}") from None
    sup = sup_defect_profile(path, cfg.omega)
    sp = stepanov_defect_profile(path, cfg.omega, cfg.p, cfg.quad_order)
    verdict = sup.decays(cfg.sap_tol) and sp.decays(cfg.sap_tol)
    io.write_profile_csv(sup, out / "profile_sup.csv")
    io.write_profile_csv(sp, out / "profile_sp.csv")
    lines = ["command = diagnose", f"input = {cfg.input}",
             f"horizon = {path.horizon}", f"h = {path.h:.17g}"]
    lines += _certification_lines(sup, sp, verdict, cfg)
    _write_report(out, "report.txt", lines)
    print("\n".join(lines))
    return EXIT_PASS if verdict else EXIT_FAIL


def cmd_verify_process(cfg: RunConfig, out: Path) -> int:
    proc = build_process(cfg)
    report = ev.certify_process(proc, cfg.samples, cfg.seed)
    lines = ["command = verify-process", f"process = {proc.describe()}"] + report.lines()
    _write_report(out, "process_report.txt", lines)
    print("\n".join(lines))
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_demo_heat(cfg: RunConfig, out: Path) -> int:
    inst = HeatInstance(beta=cfg.beta, modes=cfg.modes, forcing=cfg.forcing or "modal",
                        c0=None if cfg.c0 is None else initial_state(cfg, cfg.modes))
    result = run_heat_demo(inst, cfg.solver_config(), cfg.p, cfg.sap_tol)
    path = result.picard.path
    io.write_path_csv(path, out / "solution.csv")
    io.write_residuals_csv(result.picard.residuals, out / "residuals.csv")
    io.write_profile_csv(result.sup_profile, out / "profile_sup.csv")
    io.write_profile_csv(result.sp_profile, out / "profile_sp.csv")
    for t in cfg.snapshots:
        try:
            x, u = snapshot(path, t, inst.n_x)
        except ValueError as exc:
            raise UsageError(f"snapshot time {t:g}: {exc}") from None
        io.write_snapshot_csv(x, u, out / f"snapshot_{t:g}.csv")
    _write_report(out, "report.txt", result.report)
    print("\n".join(result.report))
    return EXIT_PASS if result.verdict else EXIT_FAIL


HANDLERS = {
    "solve": cmd_solve,
    "diagnose": cmd_diagnose,
    "verify-process": cmd_verify_process,
    "demo-heat": cmd_demo_heat,
}


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"epca: cannot create output directory {out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return HANDLERS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"epca: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, ValueError, FloatingPointError) as exc:
        print(f"epca: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    return run(parse_config(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
