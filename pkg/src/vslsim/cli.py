"""Command-line entry point.

Subcommands:
  run    execute a scenario, write telemetry CSV + run summary
  sweep  re-run a scenario across a grid of values for one schema path
  serve  expose a live simulation over the teleop WebSocket protocol

Exit codes are a stable contract: 0 success, 1 validation error (bad
scenario, bad override, bad grid), 2 I/O error (unreadable file, unwritable
output, bind failure). All randomness flows from the scenario seed; the CLI
adds none.
"""

from __future__ import annotations

import argparse
import copy
import os
import sys
from pathlib import Path

import yaml

from . import metrics
from .engine import run as run_scenario
from .scenario import (ScenarioError, apply_override, build_scenario,
                       bundled_scenario_names, parse_document)
from .teleop import DEFAULT_STREAM_RATE, TeleopServer
from .telemetry import write_telemetry

OUTPUT_ENV = "VSLSIM_OUT"

PLOT_SPEC = {
    "plot_spec_version": 1,
    "source": "telemetry.csv",
    "time": "t",
    "panels": [
        {"title": "UAV attitude (rad)", "series": ["theta_x", "theta_y"]},
        {"title": "Tip deflection (rad)", "series": ["alpha_x", "alpha_y"]},
        {"title": "Stiffness & load cell", "series": ["sigma_target", "sigma_measured", "load_cell"]},
        {"title": "Disturbances (N*m)", "series": ["tau_d_x", "tau_d_y", "tau_w_x", "tau_w_y"]},
    ],
    "shading": {"column": "sigma_measured", "rigid_above": 0.5},
}


def _load_document(path_arg: str) -> dict:
    path = Path(path_arg)
    if path.is_file():
        text = path.read_text()
        return parse_document(text, source=path.name)
    # fall back to a bundled scenario name, e.g. `vslsim run hover_impacts`
    from importlib import resources
    name = path_arg if path_arg.endswith(".scenario") else path_arg + ".scenario"
    ref = resources.files("vslsim") / "scenarios" / name
    if ref.is_file():
        return parse_document(ref.read_text(), source=name)
    raise FileNotFoundError(
        f"scenario file not found: {path_arg!r} "
        f"(bundled scenarios: {', '.join(bundled_scenario_names())})")


def _apply_cli_overrides(doc: dict, args: argparse.Namespace) -> None:
    for item in args.override or []:
        if "=" not in item:
            raise ScenarioError(f"--override expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        apply_override(doc, key.strip(), yaml.safe_load(raw), source="--override")
    if getattr(args, "dt", None) is not None:
        doc["dt"] = args.dt
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "decimate", None) is not None:
        doc["decimate"] = args.decimate


def _write_outputs(result, out_dir: Path, quiet: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    telemetry_path = write_telemetry(result.records, out_dir / "telemetry.csv")
    summary = metrics.build_summary(result)
    metrics.write_summary(summary, out_dir / "summary.yaml")
    if summary.windows:
        metrics.write_window_csv(summary.windows, out_dir / "windows.csv")
    (out_dir / "plot_spec.yaml").write_text(yaml.safe_dump(PLOT_SPEC, sort_keys=False))
    if not quiet:
        print(f"{result.scenario.name}: {len(result.records)} records -> {telemetry_path}")
        if result.breach_steps:
            print(f"warning: {result.breach_steps} steps outside the small-angle "
                  "envelope (validity flagged in telemetry)")


def cmd_run(args: argparse.Namespace) -> int:
    doc = _load_document(args.scenario)
    _apply_cli_overrides(doc, args)
    scenario = build_scenario(doc)
    result = run_scenario(scenario)
    _write_outputs(result, Path(args.out), args.quiet)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    base = _load_document(args.scenario)
    _apply_cli_overrides(base, args)
    grid = [yaml.safe_load(v) for v in args.grid.split(",") if v.strip() != ""]
    if not grid:
        raise ScenarioError("--grid must contain at least one value")
    out_root = Path(args.out)
    all_windows = []
    values = []
    for i, value in enumerate(grid):
        doc = copy.deepcopy(base)
        apply_override(doc, args.param, value, source="--param")
        scenario = build_scenario(doc)
        result = run_scenario(scenario)
        run_dir = out_root / f"run_{i:03d}"
        _write_outputs(result, run_dir, args.quiet)
        summary = metrics.build_summary(result)
        for w in summary.windows:
            all_windows.append(w)
            values.append(float(value))
    if all_windows:
        metrics.write_window_csv(all_windows, out_root / "sweep.csv",
                                 extra_column=(args.param, values))
        if not args.quiet:
            print(f"sweep table -> {out_root / 'sweep.csv'}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    doc = _load_document(args.scenario)
    _apply_cli_overrides(doc, args)
    scenario = build_scenario(doc)
    host, _, port = args.bind.rpartition(":")
    host = host or "127.0.0.1"
    server = TeleopServer(scenario, host=host, port=int(port),
                          stream_rate=args.rate, time_scale=args.time_scale,
                          max_clients=args.max_clients)
    out_dir = Path(args.out)
    try:
        # Bind first so failures report before we claim to be serving.
        server.start()
    except OSError as exc:
        raise OSError(f"cannot bind {args.bind}: {exc}") from exc
    if not args.quiet:
        print(f"teleop service on ws://{host}:{server.bound_port} "
              f"(rate {args.rate} Hz, time scale {args.time_scale}); Ctrl-C stops")
    try:
        while True:
            server._thread.join(timeout=0.5)
            if not server._thread.is_alive():
                break
    except KeyboardInterrupt:
        pass
    records = server.stop()
    out_dir.mkdir(parents=True, exist_ok=True)
    write_telemetry(records, out_dir / "telemetry.csv")
    if not args.quiet:
        print(f"\ntelemetry flushed -> {out_dir / 'telemetry.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vslsim",
        description="Quadrotor + variable-stiffness-link simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    default_out = os.environ.get(OUTPUT_ENV, "out")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("scenario", help="scenario file path or bundled scenario name")
        p.add_argument("-o", "--out", default=default_out,
                       help=f"output directory (default ${OUTPUT_ENV} or 'out')")
        p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="patch any scenario field, e.g. params.k_max=400 "
                            "or stiffness_schedule.0.sigma=0.5 (repeatable)")
        p.add_argument("--dt", type=float, help="integration step, s")
        p.add_argument("--seed", type=int, help="disturbance seed")
        p.add_argument("--quiet", action="store_true")

    p_run = sub.add_parser("run", help="execute a scenario")
    common(p_run)
    p_run.add_argument("--decimate", type=int, help="record every Nth step")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario across a value grid")
    common(p_sweep)
    p_sweep.add_argument("--decimate", type=int, help="record every Nth step")
    p_sweep.add_argument("--param", required=True,
                         help="scenario schema path to vary, e.g. stiffness_schedule.0.sigma")
    p_sweep.add_argument("--grid", required=True,
                         help="comma-separated values, e.g. 0,0.25,0.5,0.75,1")
    p_sweep.set_defaults(func=cmd_sweep)

    p_serve = sub.add_parser("serve", help="run the live teleop service")
    common(p_serve)
    p_serve.add_argument("--bind", default="127.0.0.1:8765", metavar="HOST:PORT")
    p_serve.add_argument("--rate", type=float, default=DEFAULT_STREAM_RATE,
                         help="state stream rate, Hz")
    p_serve.add_argument("--time-scale", type=float, default=1.0,
                         help="sim seconds per wall second; 0 = stepped mode")
    p_serve.add_argument("--max-clients", type=int, default=16)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
