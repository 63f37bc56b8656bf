"""Command line front end.

Subcommands: simulate (run one scenario, write trace.csv/metrics.txt),
envelope (sweep a motion scenario across peak speeds and pool the
torque/speed samples), fk and jacobian (query a chain fixture), and
fixtures (list everything runnable by name).

Exit codes: 0 on success, 2 for configuration or usage errors, 3 when
the integrator blows up.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import fixtures, svg
from .errors import ConfigError, SimulationBlowUpError
from .kinematics import forward_kinematics, g_function
from .simulation import (
    SimulationTrace,
    compute_metrics,
    envelope_points,
    metrics_text,
    run_fma_scenario,
    run_force_control_scenario,
    trace_csv_text,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BLOWUP = 3


def _run_config(cfg: config_mod.ScenarioConfig) -> SimulationTrace:
    scenario = config_mod.build_scenario(cfg)
    if cfg.kind == "fma":
        return run_fma_scenario(scenario)
    return run_force_control_scenario(scenario)


def _load(args) -> config_mod.ScenarioConfig:
    cfg = config_mod.load_scenario(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = config_mod.replace_values(cfg, "run", seed=args.seed)
    return cfg


def _trace_plot(trace: SimulationTrace):
    t = trace.t
    if trace.meta["kind"] == "force":
        return [
            ("measured", t, trace.column("tau_ext")),
            ("reference", t, trace.column("f_ref")),
        ], "force [N]"
    return [
        ("q", t, trace.column("q")),
        ("q_ref", t, trace.column("q_ref")),
    ], "position [rad]"


def cmd_simulate(args) -> int:
    cfg = _load(args)
    trace = _run_config(cfg)
    metrics = compute_metrics(trace)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / "trace.csv"
    metrics_path = out / "metrics.txt"
    trace_path.write_text(trace_csv_text(trace), encoding="ascii")
    metrics_path.write_text(metrics_text(metrics), encoding="ascii")
    written = [str(trace_path), str(metrics_path)]
    if args.svg:
        series, ylabel = _trace_plot(trace)
        svg_path = out / "trace.svg"
        svg.write_plot(svg_path, series, title=trace.meta["name"], xlabel="t [s]", ylabel=ylabel)
        written.append(str(svg_path))
    if args.json:
        print(
            json.dumps(
                {
                    "name": trace.meta["name"],
                    "kind": trace.meta["kind"],
                    "samples": trace.n_samples,
                    "metrics": asdict(metrics),
                    "files": written,
                },
                indent=2,
            )
        )
    else:
        print(f"{trace.meta['name']}: {trace.n_samples} samples")
        print(metrics_text(metrics), end="")
        for path in written:
            print(f"wrote {path}")
    return EXIT_OK


def cmd_envelope(args) -> int:
    cfg = _load(args)
    if cfg.kind != "fma":
        raise ConfigError("envelope sweeps need an fma scenario (kind = fma)")
    try:
        multipliers = [float(tok) for tok in args.sweep.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"bad sweep spec {args.sweep!r}; expected comma-separated numbers") from None
    if not multipliers or any(m <= 0 for m in multipliers):
        raise ConfigError("sweep multipliers must be positive numbers")

    base_name = cfg.run["name"]
    base_peak = cfg.reference["omega_peak"]
    variants = []
    for mult in multipliers:
        variant = config_mod.replace_values(cfg, "reference", omega_peak=base_peak * mult)
        variants.append(config_mod.replace_values(variant, "run", name=f"{base_name}@x{mult:g}"))

    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            traces = list(pool.map(_run_config, variants))
    else:
        traces = [_run_config(v) for v in variants]
    points = envelope_points(traces)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "envelope.csv"
    lines = ["torque,speed,tag"]
    lines += [f"{p.torque:.17g},{p.speed:.17g},{p.tag}" for p in points]
    csv_path.write_text("\n".join(lines) + "\n", encoding="ascii")
    written = [str(csv_path)]
    if args.svg:
        svg_path = out / "envelope.svg"
        speeds = [p.speed for p in points]
        torques = [p.torque for p in points]
        svg.write_plot(
            svg_path,
            [("samples", speeds, torques, "dot")],
            title=f"{base_name} envelope",
            xlabel="speed [rad/s]",
            ylabel="torque [N*m]",
        )
        written.append(str(svg_path))
    if args.json:
        print(
            json.dumps(
                {
                    "name": base_name,
                    "runs": len(variants),
                    "points": [asdict(p) for p in points],
                    "files": written,
                },
                indent=2,
            )
        )
    else:
        print(f"{len(points)} envelope points from {len(variants)} runs")
        for path in written:
            print(f"wrote {path}")
    return EXIT_OK


def _chain_and_angles(args):
    chain = fixtures.chain_fixture(args.chain)
    theta = np.asarray(args.theta, dtype=float)
    if theta.shape[0] != chain.dof:
        raise ConfigError(f"{args.chain!r} has {chain.dof} joints, got {theta.shape[0]} angles")
    return chain, theta


def cmd_fk(args) -> int:
    chain, theta = _chain_and_angles(args)
    pose = forward_kinematics(chain, theta)
    if args.json:
        print(json.dumps({"position": pose.position.tolist(), "euler": pose.euler.tolist()}))
    else:
        print("position =", " ".join(f"{v:.9g}" for v in pose.position))
        print("euler =", " ".join(f"{v:.9g}" for v in pose.euler))
    return EXIT_OK


def cmd_jacobian(args) -> int:
    chain, theta = _chain_and_angles(args)
    g = g_function(chain, theta)
    if args.json:
        print(json.dumps({"jacobian": g.tolist()}))
    else:
        for row in g:
            print(" ".join(f"{v:.9g}" for v in row))
    return EXIT_OK


def cmd_fixtures(args) -> int:
    listing = {
        "chains": sorted(fixtures.CHAIN_FIXTURES),
        "actuators": sorted(fixtures.ACTUATOR_FIXTURES),
        "surfaces": sorted(fixtures.SURFACE_FIXTURES),
        "weightings": sorted(fixtures.WEIGHTING_FIXTURES),
        "scenarios": config_mod.builtin_scenario_names(),
    }
    if args.json:
        print(json.dumps(listing, indent=2))
    else:
        for group, names in listing.items():
            print(f"{group}: {', '.join(names) if names else '(none)'}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fmasim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and write its trace")
    sim.add_argument("--config", required=True, help="scenario file path or built-in name")
    sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--svg", action="store_true", help="also write a trace plot")
    sim.add_argument("--json", action="store_true", help="print a JSON summary")
    sim.set_defaults(handler=cmd_simulate)

    env = sub.add_parser("envelope", help="sweep peak speed and pool torque/speed samples")
    env.add_argument("--config", required=True, help="fma scenario file path or built-in name")
    env.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    env.add_argument(
        "--sweep",
        default="0.25,0.5,0.75,1,1.25,1.5",
        help="comma-separated peak-speed multipliers",
    )
    env.add_argument("--parallel", type=int, default=1, metavar="N", help="worker processes")
    env.add_argument("--out", default=".", help="output directory")
    env.add_argument("--svg", action="store_true", help="also write an envelope plot")
    env.add_argument("--json", action="store_true", help="print the points as JSON")
    env.set_defaults(handler=cmd_envelope)

    fk = sub.add_parser("fk", help="forward kinematics of a chain fixture")
    fk.add_argument("chain", help="chain fixture name")
    fk.add_argument("theta", nargs="+", type=float, help="joint angles [rad]")
    fk.add_argument("--json", action="store_true")
    fk.set_defaults(handler=cmd_fk)

    jac = sub.add_parser("jacobian", help="tool-point jacobian of a chain fixture")
    jac.add_argument("chain", help="chain fixture name")
    jac.add_argument("theta", nargs="+", type=float, help="joint angles [rad]")
    jac.add_argument("--json", action="store_true")
    jac.set_defaults(handler=cmd_jacobian)

    fix = sub.add_parser("fixtures", help="list built-in fixtures and scenarios")
    fix.add_argument("--json", action="store_true")
    fix.set_defaults(handler=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as exc:
        # fixture registries raise KeyError with a message listing the known names
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_USAGE
    except SimulationBlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
