"""Command-line interface.

Subcommands: analyze, phase-diagram, threshold, lyapunov, stationary,
simulate, sensitivity. Every command accepts --config pointing at a JSON
file whose fields mirror the long flag names; explicitly passed flags win
over config values, and unknown config fields are rejected. Outputs go to
--output (stdout by default) and are byte-identical across reruns with the
same inputs.

Exit codes: 0 success, 1 parse/validation error, 2 degenerate spec
(lambda(0) = 0), 3 numerical failure (solver, certificate search, or
simulation timeout).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional

from .errors import (
    CertificateWindowExhausted,
    DegenerateError,
    GridTooLargeError,
    OutOfRangeError,
    SimulationTimeout,
    SolverFailureError,
)
from .lyapunov import LyapunovCandidate, boundary_drift, find_margin
from .rates import BASE, RateFunction, SaturatedN, SaturatedStar, ServiceRates, SystemSpec
from .simulate import SimConfig, simulate
from .stability import phase_classify, sensitivity_scan, threshold_answer, verdict
from .stationary import TruncatedGrid, solve_stationary

_MAX_SERIES_ROWS = 100_000


class CliError(Exception):
    """Flag or config problem; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _parse_floats(text: str) -> tuple[float, ...]:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise CliError("expected a comma-separated list of numbers")
    try:
        return tuple(float(s) for s in items)
    except ValueError as e:
        raise CliError(f"bad number list {text!r}: {e}") from None


def _parse_init(value) -> tuple[int, int]:
    if isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = str(value).split(",")
    if len(parts) != 2:
        raise CliError("initial state must be two integers: x1,x2")
    try:
        return int(parts[0]), int(parts[1])
    except (TypeError, ValueError):
        raise CliError("initial state must be two integers: x1,x2") from None


def _parse_variant(value):
    if isinstance(value, dict):
        if set(value) == {"saturatedN"}:
            return SaturatedN(int(value["saturatedN"]))
        raise CliError(f"bad variant object {value!r}")
    text = str(value)
    if text == "base":
        return BASE
    if text in ("star", "saturatedStar"):
        return SaturatedStar()
    for prefix in ("sat:", "saturatedN:"):
        if text.startswith(prefix):
            try:
                return SaturatedN(int(text[len(prefix):]))
            except ValueError:
                raise CliError(f"bad saturation level in {text!r}") from None
    raise CliError(
        f"unknown variant {text!r}; use base, star, or sat:<level>"
    )


def _load_config(path: Optional[str], allowed: set[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as e:
        raise CliError(f"cannot read config: {e}") from None
    except json.JSONDecodeError as e:
        raise CliError(f"config is not valid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise CliError("config must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise CliError(f"unknown config fields: {sorted(unknown)}")
    return obj


def _pick(args, config: dict, key: str, default=None):
    """Flag value if given, else config value, else default."""
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if key in config:
        return config[key]
    return default


_SPEC_KEYS = {"spec", "prefix", "cycle", "mu1", "mu2", "variant"}


def _resolve_spec(args, config: dict) -> SystemSpec:
    """Build a SystemSpec from --spec, inline flags, or config."""
    path = getattr(args, "spec", None)
    if path is not None:
        try:
            if path == "-":
                obj = json.load(sys.stdin)
            else:
                with open(path) as fh:
                    obj = json.load(fh)
        except OSError as e:
            raise CliError(f"cannot read spec: {e}") from None
        except json.JSONDecodeError as e:
            raise CliError(f"spec is not valid JSON: {e}") from None
        return SystemSpec.from_json(obj)

    prefix = _pick(args, config, "prefix")
    cycle = _pick(args, config, "cycle")
    mu1 = _pick(args, config, "mu1")
    mu2 = _pick(args, config, "mu2")
    if cycle is not None and (mu1 is not None) and (mu2 is not None):
        if isinstance(prefix, str):
            prefix = _parse_floats(prefix)
        if isinstance(cycle, str):
            cycle = _parse_floats(cycle)
        lam = RateFunction(
            prefix=tuple(float(v) for v in (prefix or ())),
            cycle=tuple(float(v) for v in cycle),
        )
        variant = _pick(args, config, "variant", "base")
        return SystemSpec(lam, ServiceRates(float(mu1), float(mu2)), _parse_variant(variant))

    if "spec" in config:
        return SystemSpec.from_json(config["spec"])
    raise CliError(
        "no system given: pass --spec FILE, or --cycle/--mu1/--mu2 "
        "(plus optional --prefix/--variant), or a config with a spec field"
    )


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _require_format(args, config: dict, supported: tuple[str, ...]) -> str:
    fmt = _pick(args, config, "format", supported[0])
    if fmt not in supported:
        raise CliError(
            f"format {fmt!r} not supported here (choose from {', '.join(supported)})"
        )
    return fmt


def _add_spec_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--spec", metavar="FILE", help="system spec JSON file ('-' for stdin)")
    sub.add_argument("--prefix", metavar="LIST", help="admission rates before the cycle, comma-separated")
    sub.add_argument("--cycle", metavar="LIST", help="repeating admission rates, comma-separated")
    sub.add_argument("--mu1", type=float, help="node-1 service rate")
    sub.add_argument("--mu2", type=float, help="node-2 service rate")
    sub.add_argument("--variant", help="base (default), star, or sat:<level>")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE", help="JSON file of defaults for this command")
    sub.add_argument("--output", metavar="FILE", help="write the result here instead of stdout")
    sub.add_argument("--format", choices=("json", "csv"), help="output format where both make sense")
    sub.add_argument("--seed", type=int, help="random seed where simulation is involved")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tandemstab",
        description="Stability analysis of a two-node tandem queue with "
        "queue-length-dependent admission.",
    )
    subs = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = subs.add_parser("analyze",
                        help="decide stability of one system; emits a verdict JSON")
    _add_spec_flags(p)
    _add_common(p)

    p = subs.add_parser("phase-diagram",
                        help="label the (mu1, mu2) plane for threshold admission; emits CSV")
    p.add_argument("--mu1-min", type=float, help="default 0.05")
    p.add_argument("--mu1-max", type=float, help="default 3.0")
    p.add_argument("--mu2-min", type=float, help="default 0.05")
    p.add_argument("--mu2-max", type=float, help="default 3.0")
    p.add_argument("--step", type=float, help="grid step, default 0.05")
    _add_common(p)

    p = subs.add_parser("threshold",
                        help="which admission thresholds K are stable for given rates")
    p.add_argument("--mu1", type=float, help="node-1 service rate")
    p.add_argument("--mu2", type=float, help="node-2 service rate")
    _add_common(p)

    p = subs.add_parser("lyapunov",
                        help="negative-drift certificate for a system")
    _add_spec_flags(p)
    p.add_argument("--r", type=float, help="report drift at this margin instead of searching")
    p.add_argument("--window", type=int, help="boundary levels to report / certificate window")
    _add_common(p)

    p = subs.add_parser("stationary",
                        help="stationary distribution on a truncated grid")
    _add_spec_flags(p)
    p.add_argument("--m1", type=int, help="largest node-1 level on the grid (default 80)")
    p.add_argument("--m2", type=int, help="largest node-2 level on the grid (default 80)")
    _add_common(p)

    p = subs.add_parser("simulate",
                        help="event-driven simulation; emits trajectory statistics JSON")
    _add_spec_flags(p)
    p.add_argument("--horizon", type=float, help="simulated time per replication")
    p.add_argument("--reps", type=int, help="replications, default 1")
    p.add_argument("--init", metavar="X1,X2", help="starting state, default 0,0")
    p.add_argument("--max-events", type=int, help="event cap per replication")
    p.add_argument("--backend", choices=("auto", "compiled", "python"),
                   help="kernel selection, default auto")
    p.add_argument("--series", metavar="FILE", help="also write a (t, x1, x2) CSV sampled from replication 0")
    p.add_argument("--series-points", type=int,
                   help=f"rows in the series CSV, default 10000, max {_MAX_SERIES_ROWS}")
    _add_common(p)

    p = subs.add_parser("sensitivity",
                        help="verdicts along a sweep of one service rate; emits CSV")
    _add_spec_flags(p)
    p.add_argument("--axis", choices=("mu1", "mu2"), help="which rate to sweep")
    p.add_argument("--grid", metavar="LIST", help="comma-separated sweep values")
    p.add_argument("--sweep-min", type=float, help="sweep start (with --sweep-max/--sweep-steps)")
    p.add_argument("--sweep-max", type=float, help="sweep end")
    p.add_argument("--sweep-steps", type=int, help="number of sweep points")
    _add_common(p)

    return parser


def cmd_analyze(args) -> int:
    config = _load_config(args.config, _SPEC_KEYS | {"format", "output"})
    _require_format(args, config, ("json",))
    spec = _resolve_spec(args, config)
    v = verdict(spec)
    out = {"spec": spec.to_json()}
    out.update(v.to_json())
    _emit(_json_text(out), _pick(args, config, "output"))
    return 0


def cmd_phase_diagram(args) -> int:
    keys = {"mu1_min", "mu1_max", "mu2_min", "mu2_max", "step", "format", "output"}
    config = _load_config(args.config, keys)
    _require_format(args, config, ("csv",))
    lo1 = float(_pick(args, config, "mu1_min", 0.05))
    hi1 = float(_pick(args, config, "mu1_max", 3.0))
    lo2 = float(_pick(args, config, "mu2_min", 0.05))
    hi2 = float(_pick(args, config, "mu2_max", 3.0))
    step = float(_pick(args, config, "step", 0.05))
    if step <= 0 or lo1 <= 0 or lo2 <= 0 or hi1 < lo1 or hi2 < lo2:
        raise CliError("phase grid needs positive ranges and a positive step")

    def grid(lo, hi):
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + step * k for k in range(n)]

    rows = []
    for m1 in grid(lo1, hi1):
        for m2 in grid(lo2, hi2):
            rows.append([f"{m1:.10g}", f"{m2:.10g}", phase_classify(m1, m2)])
    _emit(_csv_text(["mu1", "mu2", "label"], rows), _pick(args, config, "output"))
    return 0


def cmd_threshold(args) -> int:
    config = _load_config(args.config, {"mu1", "mu2", "format", "output"})
    _require_format(args, config, ("json",))
    mu1 = _pick(args, config, "mu1")
    mu2 = _pick(args, config, "mu2")
    if mu1 is None or mu2 is None:
        raise CliError("threshold needs --mu1 and --mu2")
    ans = threshold_answer(float(mu1), float(mu2))
    _emit(_json_text(ans.to_json()), _pick(args, config, "output"))
    return 0


def cmd_lyapunov(args) -> int:
    config = _load_config(args.config, _SPEC_KEYS | {"r", "window", "format", "output"})
    _require_format(args, config, ("json",))
    spec = _resolve_spec(args, config)
    spec.require_admitting()
    r = _pick(args, config, "r")
    window = _pick(args, config, "window")

    if r is not None:
        r = float(r)
        if r <= 0:
            raise CliError("--r must be positive")
        cand = LyapunovCandidate(spec, r)
        levels = int(window) if window is not None else 50
        drifts = [[n, boundary_drift(cand, n)] for n in range(levels + 1)]
        out = {
            "spec": spec.to_json(),
            "r": r,
            "boundary_drift": drifts,
            "max_boundary_drift": max(d for _, d in drifts),
            "interior_drift": -r,
        }
        _emit(_json_text(out), _pick(args, config, "output"))
        return 0

    cert = find_margin(spec, window=int(window) if window is not None else None)
    out = {"spec": spec.to_json(), "criterion_holds": cert is not None}
    if cert is not None:
        out["certificate"] = {
            "r": cert.r,
            "n0": cert.n0,
            "window": cert.window,
            "max_tail_drift": cert.max_tail_drift,
        }
    _emit(_json_text(out), _pick(args, config, "output"))
    return 0


def cmd_stationary(args) -> int:
    config = _load_config(args.config, _SPEC_KEYS | {"m1", "m2", "format", "output"})
    fmt = _require_format(args, config, ("csv", "json"))
    spec = _resolve_spec(args, config)
    m1 = int(_pick(args, config, "m1", 80))
    m2 = int(_pick(args, config, "m2", 80))
    sol = solve_stationary(spec, TruncatedGrid(m1, m2))
    diag = {
        "grid": [m1, m2],
        "residual": sol.residual,
        "escape_mass": sol.escape_mass,
    }
    if fmt == "json":
        out = {"spec": spec.to_json(), **diag, "pi": sol.pi.tolist()}
        _emit(_json_text(out), _pick(args, config, "output"))
        return 0
    rows = []
    for x1 in range(m1 + 1):
        for x2 in range(m2 + 1):
            rows.append([x1, x2, f"{sol.pi[x1, x2]:.17g}"])
    _emit(_csv_text(["x1", "x2", "pi"], rows), _pick(args, config, "output"))
    print(json.dumps(diag), file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    keys = _SPEC_KEYS | {
        "seed", "horizon", "reps", "init", "max_events", "backend",
        "series", "series_points", "format", "output",
    }
    config = _load_config(args.config, keys)
    _require_format(args, config, ("json",))
    spec = _resolve_spec(args, config)
    horizon = _pick(args, config, "horizon")
    if horizon is None:
        raise CliError("simulate needs --horizon")
    series_path = _pick(args, config, "series")
    series_points = int(_pick(args, config, "series_points", 10_000))
    if series_points > _MAX_SERIES_ROWS:
        raise CliError(f"series is capped at {_MAX_SERIES_ROWS} rows")
    cfg = SimConfig(
        seed=int(_pick(args, config, "seed", 0)),
        horizon=float(horizon),
        replications=int(_pick(args, config, "reps", 1)),
        max_events=int(_pick(args, config, "max_events", 10_000_000)),
        initial=_parse_init(_pick(args, config, "init", "0,0")),
    )
    stats = simulate(
        spec,
        cfg,
        backend=_pick(args, config, "backend", "auto"),
        series_points=series_points if series_path else 0,
    )
    payload = stats.to_json()
    # wall-clock time varies between runs; outputs must not
    payload.pop("wall_seconds", None)
    out = {"spec": spec.to_json(), "config": cfg.to_json(), **payload}
    _emit(_json_text(out), _pick(args, config, "output"))
    if series_path:
        rows = [
            [f"{t:.10g}", int(x1), int(x2)]
            for t, x1, x2 in (stats.series if stats.series is not None else [])
        ]
        _emit(_csv_text(["t", "x1", "x2"], rows), series_path)
    return 0


def cmd_sensitivity(args) -> int:
    keys = _SPEC_KEYS | {
        "axis", "grid", "sweep_min", "sweep_max", "sweep_steps", "format", "output",
    }
    config = _load_config(args.config, keys)
    _require_format(args, config, ("csv",))
    axis = _pick(args, config, "axis")
    if axis not in ("mu1", "mu2"):
        raise CliError("sensitivity needs --axis mu1 or --axis mu2")
    spec = _resolve_spec(args, config)
    mu_fixed = spec.mu2 if axis == "mu1" else spec.mu1

    grid_arg = _pick(args, config, "grid")
    if grid_arg is not None:
        grid = (
            _parse_floats(grid_arg)
            if isinstance(grid_arg, str)
            else [float(v) for v in grid_arg]
        )
    else:
        lo = _pick(args, config, "sweep_min")
        hi = _pick(args, config, "sweep_max")
        steps = _pick(args, config, "sweep_steps")
        if lo is None or hi is None or steps is None:
            raise CliError("sensitivity needs --grid or --sweep-min/--sweep-max/--sweep-steps")
        lo, hi, steps = float(lo), float(hi), int(steps)
        if steps < 2 or hi <= lo:
            raise CliError("sweep needs at least 2 steps and sweep-max > sweep-min")
        grid = [lo + (hi - lo) * k / (steps - 1) for k in range(steps)]
    if any(g <= 0 for g in grid):
        raise CliError("sweep values must be positive rates")

    rows = []
    for g, v in sensitivity_scan(spec.lam, mu_fixed, axis, grid):
        rows.append([f"{g:.10g}", v.status, v.witness or ""])
    _emit(_csv_text([axis, "status", "witness"], rows), _pick(args, config, "output"))
    return 0


_COMMANDS = {
    "analyze": cmd_analyze,
    "phase-diagram": cmd_phase_diagram,
    "threshold": cmd_threshold,
    "lyapunov": cmd_lyapunov,
    "stationary": cmd_stationary,
    "simulate": cmd_simulate,
    "sensitivity": cmd_sensitivity,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        return _COMMANDS[args.command](args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except DegenerateError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (GridTooLargeError, OutOfRangeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (SolverFailureError, CertificateWindowExhausted, SimulationTimeout) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
