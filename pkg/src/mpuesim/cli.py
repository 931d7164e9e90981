"""Command-line interface: ``run``, ``sweep``, ``replay`` and ``validate-config``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .engine import DESK_SCALE, SweepSpec, rows_to_csv, run_simulation, run_sweep
from .kpi import replay_events
from .scenario import (ConfigError, ConfigParseError, ScenarioConfig, config_from_mapping,
                       load_config_file, parse_overrides, schema_help)

TRACE_FLAGS = ("motion", "links", "meas")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors show the schema too
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{schema_help()}\n")
        raise SystemExit(2)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML scenario file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config field (repeatable)")
    p.add_argument("--seed", type=int, help="RNG seed")
    p.add_argument("--no-fast-fading", action="store_true")
    p.add_argument("--no-shadow-fading", action="store_true")
    p.add_argument("--desk-scale", action="store_true",
                   help="100 UEs for 30 s simulated")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mpuesim", description="FR2 multi-panel UE mobility simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one simulation")
    _add_config_args(run)
    run.add_argument("--out-dir", default=".", help="output directory")
    for name in TRACE_FLAGS:
        run.add_argument(f"--trace-{name}", action="store_true", help=f"write trace_{name}.csv")

    sweep = sub.add_parser("sweep", help="parameter sweep over o_a3, t_ttt, k_b and scheme")
    _add_config_args(sweep)
    sweep.add_argument("--out-dir", default=".", help="output directory")
    sweep.add_argument("--parallel", type=int, default=1, metavar="N")
    sweep.add_argument("--seeds", type=int, nargs="+", help="seeds to average over")
    sweep.add_argument("--o-a3", type=float, nargs="+")
    sweep.add_argument("--t-ttt", type=float, nargs="+")
    sweep.add_argument("--k-b", type=int, nargs="+")
    sweep.add_argument("--scheme", nargs="+")

    replay = sub.add_parser("replay", help="recompute KPIs from an event log")
    replay.add_argument("events", help="events.jsonl")

    val = sub.add_parser("validate-config", help="check a scenario file")
    val.add_argument("path")
    val.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return parser


def _config(args) -> ScenarioConfig:
    cfg = load_config_file(args.config) if getattr(args, "config", None) else ScenarioConfig()
    overrides = {}
    if getattr(args, "desk_scale", False):
        overrides.update(DESK_SCALE)
    if getattr(args, "no_fast_fading", False):
        overrides["fast_fading"] = False
    if getattr(args, "no_shadow_fading", False):
        overrides["shadow_fading"] = False
    if getattr(args, "seed", None) is not None:
        overrides["rng_seed"] = args.seed
    overrides.update(parse_overrides(args.set))
    return config_from_mapping(overrides, base=cfg)


def _cmd_run(args) -> int:
    cfg = _config(args)
    traces = [n for n in TRACE_FLAGS if getattr(args, f"trace_{n}")]
    report = run_simulation(cfg, out_dir=args.out_dir, traces=traces)
    print(report.to_json())
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    default = SweepSpec()
    spec = SweepSpec(
        o_a3=tuple(args.o_a3 or default.o_a3), t_ttt=tuple(args.t_ttt or default.t_ttt),
        k_b=tuple(args.k_b or default.k_b), scheme=tuple(args.scheme or default.scheme),
        seeds=tuple(args.seeds if args.seeds else (cfg.rng_seed,)),
    )
    rows = run_sweep(spec, cfg, parallelism=args.parallel)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "kpi_report.csv").write_text(rows_to_csv(rows))
    failed = [r for r in rows if r["errors"]]
    for r in failed:
        print(f"point {r['scheme']} k_b={r['k_b']} o_a3={r['o_a3']} t_ttt={r['t_ttt']}: "
              f"{r['errors']}", file=sys.stderr)
    print(f"{len(rows)} points written to {out / 'kpi_report.csv'}")
    return 1 if failed else 0


def _cmd_replay(args) -> int:
    with open(args.events) as fh:
        report = replay_events(fh)
    print(report.to_json())
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config_file(args.path)
    if args.set:
        config_from_mapping(parse_overrides(args.set), base=cfg)
    print(f"{args.path}: ok")
    return 0


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "replay": _cmd_replay,
            "validate-config": _cmd_validate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error in field '{exc.field}': {exc}", file=sys.stderr)
        return 2
    except ConfigParseError as exc:
        print(f"config parse error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
