"""Command line front end.

Subcommands:

    run <scenario.scn>     simulate one scenario, write trace + report
    batch                  run a whole pack, paired with/without runs
    validate <scenario>    parse and check a scenario file, no run
    pack                   export the selected pack as directive files

Exit codes are a stable contract: 0 landed (or, for batch/pack, all
work done), 1 error, 2 collided, 3 postponed on ground.  Everything is
deterministic: the same invocation writes byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import engine, metrics, scenario_io
from .engine import RunResult, SimParams, TerminalKind
from .geo import RouteId
from .scenario_io import Scenario, ScenarioError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_COLLIDED = 2
EXIT_POSTPONED = 3

_TERMINAL_EXIT = {
    TerminalKind.LANDED_AT: EXIT_OK,
    TerminalKind.COLLIDED: EXIT_COLLIDED,
    TerminalKind.POSTPONED_ON_GROUND: EXIT_POSTPONED,
    TerminalKind.TIMED_OUT: EXIT_ERROR,
}


def _sim_params(sc: Scenario, dt: float | None, cas_enabled: bool = True) -> SimParams:
    overrides = dict(sc.sim_overrides)
    if dt is not None:
        overrides["dt"] = dt
    overrides["cas_enabled"] = cas_enabled and overrides.get("cas_enabled", True)
    return SimParams(**overrides)


def _baselines(sc: Scenario) -> dict[RouteId, float]:
    perf = sc.performance()
    return {rid: metrics.theoretical_flight_time(r, perf) for rid, r in sc.routes.items()}


def _apply_config(sc: Scenario, config_path: str, base_dir: Path | None) -> Scenario:
    """Overlay a file of SET directives onto an already-parsed scenario."""
    overlay = Path(config_path).read_text(encoding="utf-8")
    text = scenario_io.serialize_scenario(sc) + "\n" + overlay
    return scenario_io.parse_scenario(text, base_dir=base_dir)


def _write_trace(result: RunResult, path: Path) -> None:
    path.write_text("\n".join(engine.trace_csv_lines(result)) + "\n", encoding="utf-8")


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.3f}"


def _terminal_phrase(result: RunResult) -> str:
    kind = result.terminal.kind
    if kind is TerminalKind.LANDED_AT:
        return f"landed at {result.terminal.vertiport}"
    if kind is TerminalKind.COLLIDED:
        return "collided"
    if kind is TerminalKind.POSTPONED_ON_GROUND:
        return "postponed on ground"
    return "timed out"


def _run_report_lines(
    report: metrics.MetricsReport, off_report: metrics.MetricsReport | None
) -> list[str]:
    lines = [
        "metric,value",
        f"t_sim_s,{_fmt(report.t_sim)}",
        f"d_ground_s,{_fmt(report.d_ground)}",
        f"d_air_s,{_fmt(report.d_air)}",
        f"d_total_s,{_fmt(report.d_total)}",
        f"cpa_with_m,{_fmt(report.cpa)}",
    ]
    if off_report is not None:
        lines.append(f"cpa_without_m,{_fmt(off_report.cpa)}")
    return lines


def cmd_run(args: argparse.Namespace) -> int:
    path = Path(args.scenario)
    try:
        sc = scenario_io.load_scenario(path)
        if args.config:
            sc = _apply_config(sc, args.config, path.parent)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ScenarioError, ValueError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = engine.run(sc, _sim_params(sc, args.dt))
    report = metrics.delays(result, _baselines(sc))
    _write_trace(result, out / f"{sc.id}_trace.csv")

    off_report = None
    if args.compare:
        off = engine.run(sc, _sim_params(sc, args.dt, cas_enabled=False))
        off_report = metrics.delays(off, _baselines(sc))
        _write_trace(off, out / f"{sc.id}_trace_nocas.csv")

    if args.format in ("csv", "both"):
        lines = _run_report_lines(report, off_report)
        (out / f"{sc.id}_report.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.format in ("structured", "both"):
        import json

        doc = {
            "scenario_id": sc.id,
            "terminal": result.terminal.kind.name,
            "landed_at": result.terminal.vertiport,
            "t_sim_s": report.t_sim,
            "d_ground_s": report.d_ground,
            "d_air_s": report.d_air,
            "d_total_s": report.d_total,
            "cpa_with_m": report.cpa,
            "cpa_without_m": off_report.cpa if off_report else None,
        }
        (out / f"{sc.id}_report.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    print(f"{sc.id}: {_terminal_phrase(result)}, t_sim={_fmt(report.t_sim)} s")
    return _TERMINAL_EXIT[result.terminal.kind]


def _resolve_pack(selector: str | None) -> scenario_io.ScenarioPack:
    if selector is None:
        selector = os.environ.get("UAMCAS_PACK_DIR", "default")
    return scenario_io.load_pack(selector)


def cmd_batch(args: argparse.Namespace) -> int:
    try:
        pack = _resolve_pack(args.pack)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    out = Path(args.out)
    traces = out / "traces"
    traces.mkdir(parents=True, exist_ok=True)

    with_cas: dict[str, metrics.MetricsReport] = {}
    without_cas: dict[str, metrics.MetricsReport] = {}
    try:
        for sc in sorted(pack, key=lambda s: s.id):
            if args.config:
                sc = _apply_config(sc, args.config, None)
            baselines = _baselines(sc)
            on = engine.run(sc, _sim_params(sc, args.dt))
            off = engine.run(sc, _sim_params(sc, args.dt, cas_enabled=False))
            with_cas[sc.id] = metrics.delays(on, baselines)
            without_cas[sc.id] = metrics.delays(off, baselines)
            _write_trace(on, traces / f"{sc.id}.csv")
            _write_trace(off, traces / f"{sc.id}_nocas.csv")
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    table = metrics.summarize_batch(with_cas, without_cas)
    scenario_io.write_batch_report(table, out, args.format)
    for line in scenario_io.batch_csv_lines(table):
        print(line)
    if table.mean_d_air is not None:
        print(f"# mean airborne delay over {len(table.rows)} scenarios: "
              f"{table.mean_d_air:.3f} s")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        scenario_io.load_scenario(args.scenario)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ScenarioError as exc:
        for n, msg in exc.errors:
            print(f"{args.scenario}:{n}: {msg}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print("OK")
    return EXIT_OK


def cmd_pack(args: argparse.Namespace) -> int:
    try:
        pack = _resolve_pack(args.pack)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    written = scenario_io.export_pack(pack, args.out)
    print(f"wrote {len(written)} scenarios to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uamcas",
        description="Deterministic fast-time simulator for an urban air "
        "mobility collision-avoidance system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--dt", type=float, default=None, help="timestep override, seconds")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument(
            "--format", choices=("csv", "structured", "both"), default="csv",
            help="report format",
        )
        p.add_argument("--config", default=None, help="file of SET overrides to apply")
        p.add_argument(
            "--seedless", action="store_true",
            help="forbid nondeterministic inputs (the simulator uses none; "
            "accepted so invocations are explicit about it)",
        )

    p_run = sub.add_parser("run", help="simulate one scenario file")
    p_run.add_argument("scenario", help="path to a scenario directive file")
    p_run.add_argument("--compare", action="store_true", help="also run with the system off")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_batch = sub.add_parser("batch", help="run every scenario in a pack, paired on/off")
    p_batch.add_argument("--pack", default=None, help='"default" or a directory of .scn files')
    common(p_batch)
    p_batch.set_defaults(func=cmd_batch)

    p_val = sub.add_parser("validate", help="check a scenario file without running it")
    p_val.add_argument("scenario", help="path to a scenario directive file")
    p_val.set_defaults(func=cmd_validate)

    p_pack = sub.add_parser("pack", help="export a pack as directive files")
    p_pack.add_argument("--pack", default=None, help='"default" or a directory of .scn files')
    p_pack.add_argument("--out", default="pack", help="output directory")
    p_pack.set_defaults(func=cmd_pack)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
