"""Command-line interface: ``stabres <command> [options]``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import benchmarks
from .diagram import build_diagram, write_diagram_csv
from .errors import StabilizationError
from .extract import METHODS, ExtractionSettings, failure_report, report, report_document, run_method
from .io import fmt, write_csv, write_json
from .model import UNITS, BoxGrid, ShellModel
from .oracle import ToyModel, default_toy, find_poles, toy_spectrum, write_poles_csv
from .spectrum import bound_state, quantization_residual, solve_levels

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    G: float = 20.0
    c: float = 5.0
    c_min: float = 1.0
    c_max: float = 30.0
    c_steps: int = 5801
    levels: int = 10
    out: str | None = None
    format: str = "csv"
    verify: bool = False
    bound_state: bool = False
    method: list = field(default_factory=lambda: list(METHODS))
    fit_N: int = 5
    window_fraction: float = 0.2
    dos_levels: list = field(default_factory=lambda: [8, 9, 10])
    qbp_N: int = 10
    x0: float = 0.0
    E_target: float | None = None
    resonance: int = 1
    n_poles: int = 2
    E_int: float | None = None
    delta: list | None = None
    L_min: float = 1.0
    L_max: float = 2.0
    L_steps: int = 401

    def validate(self, command):
        if not np.isfinite(self.G):
            raise ConfigError("G must be finite")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.levels < 1:
            raise ConfigError("levels must be >= 1")
        if command == "spectrum" and not self.c > 0:
            raise ConfigError("c must be positive")
        if command in ("diagram", "extract"):
            try:
                self.grid()
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if command == "diagram" and self.c_steps < 2:
            raise ConfigError("diagram needs at least 2 grid points")
        if command == "extract":
            bad = set(self.method) - set(METHODS)
            if bad:
                raise ConfigError(f"unknown method(s) {sorted(bad)}")
            if not 0 < self.window_fraction <= 1:
                raise ConfigError("window-fraction must lie in (0, 1]")
            if min(self.dos_levels) < 1 or self.fit_N < 1 or self.qbp_N < 1:
                raise ConfigError("level indices must be >= 1")
            if not -1 < self.x0 < self.c_max:
                raise ConfigError("x0 must lie in (-1, c-max)")
            if self.E_target is None and self.resonance < 1:
                raise ConfigError("resonance index must be >= 1")
        if command == "poles" and self.n_poles < 1:
            raise ConfigError("n-poles must be >= 1")
        if command == "toy":
            if self.delta is not None and len(self.delta) != 2:
                raise ConfigError("toy model takes two couplings")
            if not 0 < self.L_min < self.L_max or self.L_steps < 2:
                raise ConfigError("need 0 < L-min < L-max and L-steps >= 2")

    def grid(self):
        return BoxGrid(self.c_min, self.c_max, self.c_steps)

    def settings(self):
        return ExtractionSettings(c_min=self.c_min, c_max=self.c_max,
                                  points_per_unit=(self.c_steps - 1) / (self.c_max - self.c_min),
                                  fit_N=self.fit_N, window_fraction=self.window_fraction,
                                  dos_levels=tuple(self.dos_levels), qbp_N=self.qbp_N, x0=self.x0)


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="stabres", description="Resonances of a delta-shell barrier from finite-box spectra.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--G", type=float, help="dimensionless coupling 2 m U a / hbar^2")
    common.add_argument("--config", help="JSON file with option values; flags take precedence")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--verify", action="store_true", default=None, help="re-check residuals of the output")
    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--c-min", type=float)
    grid.add_argument("--c-max", type=float)
    grid.add_argument("--c-steps", type=int)
    grid.add_argument("--levels", type=int)

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("spectrum", parents=[common], help="levels of one box")
    p.add_argument("--c", type=float, help="box size in units of a")
    p.add_argument("--levels", type=int)
    p.add_argument("--bound-state", action="store_true", default=None)

    sub.add_parser("diagram", parents=[common, grid], help="stabilization diagram CSV")

    p = sub.add_parser("extract", parents=[common, grid], help="resonance fits (JSON)")
    p.add_argument("--method", type=_str_list, help="comma-separated subset of fit,dos,qbp")
    p.add_argument("--fit-N", type=int)
    p.add_argument("--window-fraction", type=float)
    p.add_argument("--dos-levels", type=_int_list)
    p.add_argument("--qbp-N", type=int)
    p.add_argument("--x0", type=float)
    target = p.add_mutually_exclusive_group()
    target.add_argument("--E-target", type=float, help="energy near which to look for the resonance")
    target.add_argument("--resonance", type=int, help="use the k-th exact pole to locate the resonance")

    p = sub.add_parser("poles", parents=[common], help="exact S-matrix poles")
    p.add_argument("--n-poles", type=int)

    p = sub.add_parser("toy", parents=[common], help="three-level toy model eigenvalues")
    p.add_argument("--E-int", type=float)
    p.add_argument("--delta", type=_float_list, help="two couplings; default derived from G")
    p.add_argument("--L-min", type=float)
    p.add_argument("--L-max", type=float)
    p.add_argument("--L-steps", type=int)

    sub.add_parser("reproduce-paper", aliases=["reproduce"], parents=[common], help="check all benchmark couplings against reference values")
    return parser


def load_config(args, command):
    known = {f.name for f in fields(RunConfig)}
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = value
    for key, value in vars(args).items():
        if key in known and value is not None:
            values[key] = value
    if command == "toy" and args.G is None and "G" not in values:
        values["G"] = 50.0
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate(command)
    return cfg


def _emit_table(cfg, header, rows, comments, payload):
    if cfg.format == "json":
        write_json(cfg.out, payload)
    else:
        write_csv(cfg.out, header, rows, comments)


def cmd_spectrum(cfg):
    model = ShellModel(cfg.G)
    levels = solve_levels(model, cfg.c, cfg.levels)
    rows = [(lv.N, lv.q, lv.E) for lv in levels]
    header = ["N", "q", "E"]
    if cfg.verify:
        res = [abs(quantization_residual(lv.q, cfg.G, cfg.c)) / max(1.0, lv.q) for lv in levels]
        if max(res) > 1e-10:
            raise StabilizationError(f"residual check failed: {max(res):.3e}")
        header.append("residual")
        rows = [r + (e,) for r, e in zip(rows, res)]
    comments = [f"units: {UNITS}, G={cfg.G:g}, c={cfg.c:g}"]
    payload = {"units": UNITS, "G": cfg.G, "c": cfg.c,
               "levels": [{"N": r[0], **dict(zip(header[1:], [float(fmt(v)) for v in r[1:]]))} for r in rows]}
    if cfg.bound_state:
        bs = bound_state(model)
        comments.append("bound state: none" if bs is None else f"bound state: kappa={fmt(bs.kappa)}, E={fmt(bs.E)}")
        payload["bound_state"] = None if bs is None else {"kappa": float(fmt(bs.kappa)), "E": float(fmt(bs.E))}
    _emit_table(cfg, header, rows, comments, payload)


def cmd_diagram(cfg):
    diagram = build_diagram(ShellModel(cfg.G), cfg.grid(), cfg.levels)
    if cfg.format == "json":
        write_json(cfg.out, {"units": UNITS, "G": cfg.G, "c": [float(fmt(v)) for v in cfg.grid().values()],
                             "E": [[float(fmt(v)) for v in s.E_of_c] for s in diagram]})
    else:
        write_diagram_csv(diagram, cfg.out)


def cmd_extract(cfg):
    model = ShellModel(cfg.G)
    if cfg.E_target is not None:
        target = cfg.E_target
    else:
        target = find_poles(model, cfg.resonance)[cfg.resonance - 1].E_r
    s = cfg.settings()
    need = max([s.fit_N if "fit" in cfg.method else 1, s.qbp_N if "qbp" in cfg.method else 1]
               + (list(s.dos_levels) if "dos" in cfg.method else []))
    diagram = build_diagram(model, s.grid(), need)
    entries = []
    for method in cfg.method:
        try:
            entries.append(report(run_method(model, method, target, s, diagram=diagram), cfg.G))
        except StabilizationError as exc:
            entries.append(failure_report(method, cfg.G, exc))
    write_json(cfg.out, report_document(entries))


def cmd_poles(cfg):
    poles = find_poles(ShellModel(cfg.G), cfg.n_poles)
    if cfg.verify and max(p.residual for p in poles) > 1e-10:
        raise StabilizationError("pole residual check failed")
    if cfg.format == "json":
        write_json(cfg.out, {"units": UNITS, "G": cfg.G, "poles": [
            {"n": p.n, "Re_q": float(fmt(p.q.real)), "Im_q": float(fmt(p.q.imag)),
             "E_r": float(fmt(p.E_r)), "Gamma": float(fmt(p.Gamma))} for p in poles]})
    else:
        write_poles_csv(poles, cfg.G, cfg.out)


def cmd_toy(cfg):
    toy = default_toy(cfg.G)
    if cfg.E_int is not None or cfg.delta is not None:
        toy = ToyModel(E_int=toy.E_int if cfg.E_int is None else cfg.E_int,
                       Delta=toy.Delta if cfg.delta is None else tuple(cfg.delta))
    L = np.linspace(cfg.L_min, cfg.L_max, cfg.L_steps)
    lam = toy_spectrum(toy, L)
    if cfg.verify:
        trace = toy.E_int + toy.exterior_level(1, L) + toy.exterior_level(2, L)
        if np.max(np.abs(lam.sum(axis=1) - trace)) > 1e-10 * np.max(np.abs(trace)):
            raise StabilizationError("trace check failed")
    header = ["L", "lambda1", "lambda2", "lambda3"]
    rows = np.column_stack([L, lam])
    comments = [f"units: {UNITS}", f"E_int={fmt(toy.E_int)}, Delta1={fmt(toy.Delta[0])}, Delta2={fmt(toy.Delta[1])}"]
    payload = {"units": UNITS, "E_int": toy.E_int, "Delta": list(toy.Delta),
               "rows": [[float(fmt(v)) for v in r] for r in rows]}
    _emit_table(cfg, header, rows, comments, payload)


def cmd_reproduce(cfg):
    checks = benchmarks.run_all()
    for c in checks:
        print(c.line())
    n_fail = sum(not c.passed for c in checks)
    summary = f"{len(checks) - n_fail}/{len(checks)} checks passed"
    if cfg.out:
        if cfg.format == "json":
            write_json(cfg.out, {"units": UNITS, "summary": summary,
                                 "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]})
        else:
            write_csv(cfg.out, ["name", "passed", "detail"], [(c.name, str(c.passed), c.detail) for c in checks],
                      comments=[f"units: {UNITS}", summary])
    print(summary)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "diagram": cmd_diagram,
    "extract": cmd_extract,
    "poles": cmd_poles,
    "toy": cmd_toy,
    "reproduce-paper": cmd_reproduce,
    "reproduce": cmd_reproduce,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args, args.command)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StabilizationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
