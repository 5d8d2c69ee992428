"""Command-line front end.

Exit status: 0 success, 2 configuration error, 3 computation error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, OutputError, TpaError
from .scenario import (BUILTIN_SCENARIOS, coincidence_report, emit, load_scenario, mode_report,
                       optimize_bandwidth, run_scenario, sweep, table1)

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_IO = 0, 2, 3, 4


def _common(parser):
    parser.add_argument("--scenario", choices=sorted(BUILTIN_SCENARIOS),
                        help="start from a built-in scenario")
    parser.add_argument("--config", metavar="PATH", help="flat key = value config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config key (repeatable)")
    parser.add_argument("--output", metavar="PATH", help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")
    parser.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="concurrent evaluations for sweeps (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entangled-tpa",
        description="Two-photon absorption rates of entangled and monochromatic photon pairs "
                    "around a sub-wavelength fiber.")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "mode": "guided-mode report (dispersion, velocities, field)",
        "rate": "total absorption rate for one configuration",
        "sweep": "rate against detuning or bandwidth",
        "optimize": "bandwidth that maximizes the entangled rate",
        "table1": "fiber (entangled, monochromatic) and toroid benchmark rates",
        "coincidence": "signal-idler coincidence profile",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        _common(p)
        if name == "sweep":
            p.add_argument("--variable", choices=("detuning", "bandwidth"))
            p.add_argument("--lo", type=float, metavar="NM")
            p.add_argument("--hi", type=float, metavar="NM")
            p.add_argument("--steps", type=int)
        if name == "optimize":
            p.add_argument("--lo", type=float, metavar="NM")
            p.add_argument("--hi", type=float, metavar="NM")
    return parser


def _flag_overrides(args) -> list[str]:
    out = list(args.overrides)
    if args.command == "sweep":
        for flag, key in (("variable", "sweep.variable"), ("lo", "sweep.lo_nm"),
                          ("hi", "sweep.hi_nm"), ("steps", "sweep.steps")):
            if getattr(args, flag) is not None:
                out.append(f"{key}={getattr(args, flag)}")
    if args.command == "optimize":
        for flag, key in (("lo", "optimize.lo_nm"), ("hi", "optimize.hi_nm")):
            if getattr(args, flag) is not None:
                out.append(f"{key}={getattr(args, flag)}")
    if args.format is not None:
        out.append(f"output.format={args.format}")
    if args.output is not None:
        out.append(f"output.path={args.output}")
    return out


def _execute(args):
    if args.jobs < 1:
        raise ConfigError("must be at least 1", "--jobs")
    overrides = _flag_overrides(args)
    if args.command == "table1":
        if args.config or args.scenario:
            raise ConfigError("table1 runs the built-in scenarios; use --set to adjust them",
                              "--config" if args.config else "--scenario")
        config = load_scenario(None, overrides=overrides)
        rows = table1(overrides=[o for o in overrides if not o.startswith("output.")],
                      jobs=args.jobs)
        payload = {
            "scenarios": rows,
            "parameters": config.parameters,
            "config_hash": config.config_hash,
            "csv_rows": [(r["scenario"], "scenario", r["rate_per_s"], r["enhancement_factor"],
                          r["separation_s_m"]) for r in rows],
        }
        return payload, config

    config = load_scenario(args.scenario, args.config, overrides)
    if args.command == "rate":
        return run_scenario(config), config
    if args.command == "sweep":
        if config.sweep is None:
            raise ConfigError("sweep needs sweep.variable (or --variable)", "sweep.variable")
        return sweep(config, jobs=args.jobs), config
    if args.command == "optimize":
        result = optimize_bandwidth(config, jobs=args.jobs)
        result.update(parameters=config.parameters, config_hash=config.config_hash,
                      csv_rows=[(result["sigma_star_nm"], "nm", result["rate_star"], None, None)])
        return result, config
    if args.command == "mode":
        report = mode_report(config)
        report.update(parameters=config.parameters, config_hash=config.config_hash,
                      table_header="quantity,value",
                      table_rows=[(k, v) for k, v in report.items()
                                  if isinstance(v, (int, float))])
        return report, config
    if args.command == "coincidence":
        report = coincidence_report(config)
        report.update(parameters=config.parameters, config_hash=config.config_hash,
                      table_header="z_separation_m,relative_density",
                      table_rows=report["rows"])
        return report, config
    raise ConfigError(f"unknown command {args.command!r}", "command")  # pragma: no cover


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result, config = _execute(args)
        emit(result, config.output_format, config.output_path or None)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TpaError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
