"""Command-line front end.

Usage:  lossyline <command> --config run.json [--output out.csv] [--format csv|json]
                  [--kernel paper|consistent|calibrated] [--set key=value ...]

Physical units at this boundary: ohm, H, F, cm, s, Hz. Positions are turned
into normalized x = l / v (seconds) here and nowhere else.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .calibration import (STANDARD_CASES, CalibrationCase, CalibrationError, calibrate,
                          load_report)
from .core import InvalidLineError, LineParams, derive_params
from .fdtd import CFLError, FdtdGrid, InstabilityError, dump_csv, fdtd_solve
from .kernels import DEFAULT_KERNEL, Kernel, KernelVariant
from .network import (IncompatibleNetworkError, NetworkSpec, build_tridiagonal_cap,
                      mass_tensor, modal_decompose, network_response)
from .quadrature import ConvergenceError
from .reflections import FiniteLine, reflected_delay, reflected_response, reflection_budget
from .response import NoCrossingError, NoRootError, default_window, delay_time, response_at
from .waveform import Waveform

CALIBRATION_ENV = "LOSSYLINE_CALIBRATION"

SCHEMA = {
    "line": {"r", "ell", "c", "z0"},
    "network": {"r", "cap", "ind", "v", "c_grd", "c_m", "n"},
    "waveform": {"kind", "amplitude", "frequency", "width", "onset", "duration",
                 "samples_t", "samples_v"},
    "inputs": None,
    "positions": None,
    "time": {"start", "stop", "points"},
    "threshold": None,
    "umax": None,
    "length": None,
    "termination": {"gamma", "z_load", "source_gamma"},
    "reflections": None,
    "frequency_convention": None,
    "kernel": None,
    "oracle": {"points_per_width", "dx", "boundary", "stride"},
}


class ConfigError(ValueError):
    pass


# -- configuration -------------------------------------------------------------

def _validate(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a JSON object")
    for key, value in cfg.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        allowed = SCHEMA[key]
        if allowed is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected an object")
            extra = set(value) - allowed
            if extra:
                raise ConfigError(f"{key}: unknown field(s) {sorted(extra)}")
    return cfg


def _apply_overrides(cfg: dict, pairs) -> dict:
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set {key}: {part} is not an object")
        node[parts[-1]] = value
    return cfg


def load_config(path, overrides=()) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return _validate(_apply_overrides(cfg, overrides))


def _number(section, name, value, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{name}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or (positive and value <= 0) or (nonneg and value < 0):
        raise ConfigError(f"{section}.{name}: invalid value {value!r}")
    return value


def line_from_config(cfg) -> LineParams:
    sec = cfg.get("line")
    if sec is None:
        raise ConfigError("missing 'line' section")
    try:
        r = _number("line", "r", sec.get("r"), nonneg=True)
        c = _number("line", "c", sec.get("c"), positive=True)
        if "ell" in sec:
            if "z0" in sec:
                raise ConfigError("line: give either ell or z0, not both")
            return LineParams(r, _number("line", "ell", sec["ell"], positive=True), c)
        if "z0" in sec:
            return LineParams.from_impedance(r, c, _number("line", "z0", sec["z0"], positive=True))
    except InvalidLineError as exc:
        raise ConfigError(f"line: {exc}") from None
    raise ConfigError("line: need ell or z0")


def waveform_from_dict(d, where="waveform") -> Waveform:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = set(d) - SCHEMA["waveform"]
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {sorted(extra)}")
    kw = dict(d)
    if kw.get("duration") is None:
        kw["duration"] = math.inf
    samples = (kw.pop("samples_t", ()), kw.pop("samples_v", ()))
    try:
        if kw.get("kind") == "sampled":
            return Waveform.sampled(samples[0], samples[1], duration=kw["duration"])
        return Waveform(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _positions(cfg):
    pos = cfg.get("positions")
    if not isinstance(pos, list) or not pos:
        raise ConfigError("positions: expected a non-empty list of lengths in cm")
    return [_number("positions", str(i), p, positive=True) for i, p in enumerate(pos)]


def _times(cfg, default_stop):
    sec = cfg.get("time", {})
    start = _number("time", "start", sec.get("start", 0.0), nonneg=True)
    stop = _number("time", "stop", sec.get("stop", default_stop), positive=True)
    points = sec.get("points", 401)
    if not isinstance(points, int) or points < 2:
        raise ConfigError("time.points: expected an integer >= 2")
    if stop <= start:
        raise ConfigError("time: stop must exceed start")
    return np.linspace(start, stop, points)


def _threshold(cfg):
    b = _number("threshold", "b", cfg.get("threshold", 0.5))
    if not 0 < b < 1:
        raise ConfigError("threshold must lie in (0, 1)")
    return b


def _omega0(cfg, u0: Waveform):
    conv = cfg.get("frequency_convention", "angular")
    if conv not in ("angular", "cyclic"):
        raise ConfigError("frequency_convention must be 'angular' or 'cyclic'")
    w = u0.dominant_omega()
    if conv == "cyclic" and u0.kind in ("sine", "step", "sampled"):
        w /= 2.0 * math.pi
    return w


def _finite_line(cfg, v, z0):
    if "length" not in cfg:
        return None
    length = _number("length", "cm", cfg["length"], positive=True)
    term = cfg.get("termination")
    if term is None:
        return None
    src = term.get("source_gamma")
    src = None if src is None else _number("termination", "source_gamma", src)
    try:
        if "gamma" in term:
            return FiniteLine.from_physical(length, v, gamma=_number("termination", "gamma",
                                                                     term["gamma"]), source_gamma=src)
        if "z_load" in term:
            zl = term["z_load"]
            zl = math.inf if zl in ("inf", "open", None) else _number("termination", "z_load", zl,
                                                                       nonneg=True)
            return FiniteLine.from_physical(length, v, z_load=zl, z0=z0, source_gamma=src)
    except ValueError as exc:
        raise ConfigError(f"termination: {exc}") from None
    raise ConfigError("termination: need gamma or z_load")


def network_from_config(cfg) -> NetworkSpec:
    sec = cfg.get("network")
    if sec is None:
        raise ConfigError("missing 'network' section")
    r = _number("network", "r", sec.get("r"), nonneg=True)
    try:
        if "cap" in sec:
            cap = np.asarray(sec["cap"], dtype=float)
        elif {"c_grd", "c_m", "n"} <= set(sec):
            cap = build_tridiagonal_cap(_number("network", "c_grd", sec["c_grd"], positive=True),
                                        _number("network", "c_m", sec["c_m"], nonneg=True),
                                        int(sec["n"]))
        else:
            raise ConfigError("network: need cap or (c_grd, c_m, n)")
        if "ind" in sec:
            return NetworkSpec(cap, np.asarray(sec["ind"], dtype=float), r)
        if "v" in sec:
            return NetworkSpec.from_capacitance(cap, _number("network", "v", sec["v"], positive=True), r)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"network: {exc}") from None
    raise ConfigError("network: need ind or v")


def select_kernel(choice: str) -> tuple[Kernel, dict]:
    if choice == "paper":
        return Kernel(KernelVariant.PAPER_LITERAL), {"source": "override"}
    if choice == "consistent":
        return Kernel(KernelVariant.DERIVATIVE_CONSISTENT), {"source": "override"}
    if choice != "calibrated":
        raise ConfigError(f"unknown kernel choice {choice!r}")
    path = os.environ.get(CALIBRATION_ENV)
    if path:
        try:
            return load_report(path), {"source": path}
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot load calibration report {path}: {exc}") from None
    report = calibrate()
    return report.kernel, {"source": "calibrated", "oracle_l2": report.oracle_l2}


# -- output --------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(format(v, ".17g")) if math.isfinite(v) else None
    return v


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            buf = io.StringIO()
            buf.write(",".join(self.columns) + "\n")
            for row in self.rows:
                buf.write(",".join(_fmt(v) for v in row) + "\n")
            return buf.getvalue()
        records = [{c: _json_value(v) for c, v in zip(self.columns, row)} for row in self.rows]
        meta = {k: _json_value(v) if not isinstance(v, (dict, list)) else v for k, v in self.meta.items()}
        return json.dumps({"meta": meta, "records": records}, indent=2, sort_keys=True) + "\n"


def parse_csv(text: str) -> list[dict]:
    """Inverse of the CSV rendering: list of {column: float|str} records."""
    lines = text.rstrip("\n").split("\n")
    cols = lines[0].split(",")
    out = []
    for line in lines[1:]:
        rec = {}
        for c, raw in zip(cols, line.split(",")):
            try:
                rec[c] = float(raw)
            except ValueError:
                rec[c] = raw
        out.append(rec)
    return out


# -- commands --------------------------------------------------------------------

def cmd_params(cfg, kernel_choice) -> Table:
    p = line_from_config(cfg)
    d = derive_params(p)
    length = _number("length", "cm", cfg.get("length", 1.0), positive=True)
    budget = reflection_budget(length, d.v, d.m)
    row = [p.r, p.ell, p.c, d.v, d.m, d.z0, d.decay_length, math.isinf(d.decay_length),
           length, budget.n_r, budget.capped]
    cols = ["r_ohm_per_cm", "ell_h_per_cm", "c_f_per_cm", "v_cm_per_s", "m_per_s", "z0_ohm",
            "decay_length_cm", "decay_length_infinite", "length_cm", "n_reflections",
            "n_reflections_capped"]
    return Table(cols, [row], {"command": "params"})


def cmd_calibrate(cfg, kernel_choice) -> Table:
    cases = list(STANDARD_CASES)
    if "line" in cfg and "positions" in cfg:
        d = derive_params(line_from_config(cfg))
        x = _positions(cfg)[0] / d.v
        cases.append(CalibrationCase(m=d.m, x=x, width=0.1 * x))
    report = calibrate(cases)
    rows = []
    for case, errs in zip(report.cases, report.errors):
        for key in sorted(errs):
            rows.append([case.m, case.x, case.m * case.x, key, errs[key]])
    meta = report.to_dict()
    meta["command"] = "calibrate"
    return Table(["m_per_s", "x_s", "mx", "candidate", "oracle_l2"], rows, meta)


def _line_setup(cfg):
    p = line_from_config(cfg)
    d = derive_params(p)
    u0 = waveform_from_dict(cfg.get("waveform"))
    return d, u0


def cmd_response(cfg, kernel_choice) -> Table:
    d, u0 = _line_setup(cfg)
    pos = _positions(cfg)
    kernel, ksrc = select_kernel(kernel_choice)
    xs = [l / d.v for l in pos]
    t = _times(cfg, default_window(max(xs), u0, d.m))
    rows = []
    for l, x in zip(pos, xs):
        vals = response_at(x, t, u0, d.m, kernel)
        rows.extend([ti, l, vi] for ti, vi in zip(t, vals))
    return Table(["time_s", "position_cm", "voltage"], rows,
                 {"command": "response", "kernel": kernel.to_dict(), "kernel_source": ksrc})


def cmd_delay(cfg, kernel_choice) -> Table:
    d, u0 = _line_setup(cfg)
    pos = _positions(cfg)
    b = _threshold(cfg)
    umax = cfg.get("umax", "response")
    if umax not in ("response", "input"):
        raise ConfigError("umax must be 'response' or 'input'")
    kernel, ksrc = select_kernel(kernel_choice)
    w = _omega0(cfg, u0)
    line = _finite_line(cfg, d.v, d.z0)
    t_stop = cfg.get("time", {}).get("stop")
    rows = []
    for l in pos:
        x = l / d.v
        if line is None:
            res = delay_time(x, b, u0, d.m, kernel, t_end=t_stop, u_max=umax, omega0=w)
        else:
            res = reflected_delay(line, x, b, u0, d.m, cfg.get("reflections"), kernel,
                                  t_end=t_stop, u_max=umax, omega0=w)
        rows.append([l, b, res.delay, res.uncertainty_floor, res.bracket[0], res.bracket[1],
                     res.u_max])
    return Table(["position_cm", "threshold", "delay_s", "uncertainty_floor_s", "bracket_lo_s",
                  "bracket_hi_s", "u_max"], rows,
                 {"command": "delay", "kernel": kernel.to_dict(), "kernel_source": ksrc,
                  "reflecting": line is not None})


def cmd_reflect(cfg, kernel_choice) -> Table:
    d, u0 = _line_setup(cfg)
    line = _finite_line(cfg, d.v, d.z0)
    if line is None:
        raise ConfigError("reflect needs 'length' and 'termination'")
    pos = _positions(cfg)
    for l in pos:
        if l > line.xbar * d.v * (1 + 1e-12):
            raise ConfigError(f"position {l} cm lies beyond the line end")
    kernel, ksrc = select_kernel(kernel_choice)
    t = _times(cfg, default_window(2 * line.xbar, u0, d.m))
    n_r = cfg.get("reflections")
    rows, bounds = [], []
    for l in pos:
        res = reflected_response(line, l / d.v, t, u0, d.m, n_r, kernel)
        bounds.append(res.envelope_bound)
        rows.extend([ti, l, vi] for ti, vi in zip(t, res.values))
    return Table(["time_s", "position_cm", "voltage"], rows,
                 {"command": "reflect", "gamma": line.gamma, "source_gamma": line.gamma_s,
                  "kernel": kernel.to_dict(), "kernel_source": ksrc,
                  "truncation_bounds": [_json_value(b) for b in bounds]})


def cmd_network(cfg, kernel_choice) -> Table:
    spec = network_from_config(cfg)
    inputs = cfg.get("inputs")
    if not isinstance(inputs, list) or len(inputs) != spec.n:
        raise ConfigError(f"inputs: expected a list of {spec.n} waveform objects or nulls")
    u_in = [None if w is None else waveform_from_dict(w, f"inputs[{i}]") for i, w in enumerate(inputs)]
    pos = _positions(cfg)
    try:
        basis = modal_decompose(mass_tensor(spec))
    except IncompatibleNetworkError as exc:
        raise ConfigError(str(exc)) from None
    kernel, ksrc = select_kernel(kernel_choice)
    v = spec.v
    xs = [l / v for l in pos]
    settle = max(w.settle_time() for w in u_in if w is not None) if any(u_in) else 0.0
    t = _times(cfg, max(xs) + settle + 4 * max(max(xs), float(basis.rates[-1]) * max(xs) ** 2))
    rows = []
    for l, x in zip(pos, xs):
        vals = network_response(spec, x, t, u_in, kernel, basis).components
        for k, ti in enumerate(t):
            rows.extend([ti, l, i, vals[k, i]] for i in range(spec.n))
    return Table(["time_s", "position_cm", "line", "voltage"], rows,
                 {"command": "network", "mode_rates": [float(r) for r in basis.rates],
                  "kernel": kernel.to_dict(), "kernel_source": ksrc})


def cmd_oracle(cfg, kernel_choice, compare=False, dump=None) -> Table:
    d, u0 = _line_setup(cfg)
    pos = _positions(cfg)
    xs = [l / d.v for l in pos]
    sec = cfg.get("oracle", {})
    t_stop = cfg.get("time", {}).get("stop") or default_window(max(xs), u0, d.m)
    if "dx" in sec:
        dx = _number("oracle", "dx", sec["dx"], positive=True) / d.v
    else:
        ppw = sec.get("points_per_width", 40)
        scale = u0.width if u0.width > 0 else max(xs) / 100.0
        dx = scale / ppw
    boundary = sec.get("boundary", "absorbing")
    try:
        grid = FdtdGrid.for_window(dx, t_stop, max(xs), boundary)
    except (ValueError, CFLError) as exc:
        raise ConfigError(f"oracle: {exc}") from None
    res = fdtd_solve(grid, d.m, u0, xs, t_stop)
    if dump:
        dump_csv(res, xs, dump)
    stride = int(sec.get("stride", 1))
    t = res.times[::stride]
    fd = res.values[::stride]
    cols = ["time_s", "position_cm", "fdtd"]
    meta = {"command": "oracle", "dx_s": grid.dx, "dt_s": grid.dt, "cells": grid.cells}
    analytic = None
    if compare:
        kernel, ksrc = select_kernel(kernel_choice)
        analytic = np.stack([response_at(x, t, u0, d.m, kernel) for x in xs], axis=1)
        cols.append("analytic")
        l2 = np.linalg.norm(analytic - fd, axis=0) / np.maximum(np.linalg.norm(fd, axis=0), 1e-300)
        meta["relative_l2"] = [float(e) for e in l2]
        meta["kernel"] = kernel.to_dict()
        for l, e in zip(pos, l2):
            print(f"position {l:g} cm: relative L2 analytic vs FDTD = {e:.3e}", file=sys.stderr)
    rows = []
    for j, l in enumerate(pos):
        for k, ti in enumerate(t):
            row = [ti, l, fd[k, j]]
            if analytic is not None:
                row.append(analytic[k, j])
            rows.append(row)
    return Table(cols, rows, meta)


COMMANDS = {
    "params": cmd_params,
    "calibrate": cmd_calibrate,
    "response": cmd_response,
    "delay": cmd_delay,
    "reflect": cmd_reflect,
    "network": cmd_network,
    "oracle": cmd_oracle,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are validation errors (exit 1); 2 is reserved for numerics
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lossyline", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--output", help="write the table here instead of stdout")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--kernel", choices=("paper", "consistent", "calibrated"), default=None,
                    help=f"boundary kernel (default: config 'kernel' or calibrated); 'calibrated' "
                         f"reads ${CALIBRATION_ENV} if set, otherwise runs the oracle calibration")
    ap.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a config field, e.g. --set threshold=0.9 --set line.r=10")
    ap.add_argument("--compare", action="store_true", help="oracle: add analytic column and L2 summary")
    ap.add_argument("--dump", metavar="PATH",
                    help="oracle: write raw probe series as CSV (header time,x=<pos>...) on the "
                         "native FDTD time grid, positions in normalized seconds")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        kernel_choice = args.kernel or cfg.get("kernel", "calibrated")
        if args.command == "oracle":
            table = cmd_oracle(cfg, kernel_choice, compare=args.compare, dump=args.dump)
        else:
            table = COMMANDS[args.command](cfg, kernel_choice)
        text = table.render(args.format)
    except (ConfigError, InvalidLineError, IncompatibleNetworkError) as exc:
        print(f"lossyline {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, NoCrossingError, NoRootError, InstabilityError, CalibrationError) as exc:
        print(f"lossyline {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"lossyline {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
