"""Post-run accounting: theoretical baselines, closest point of
approach, and the ground/airborne/total delay decomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .agents import PerformanceModel
from .engine import RunResult, Terminal, TerminalKind, TickRecord
from .geo import Route, RouteId, cpa_linear, polyline_length


class NoEncounterError(ValueError):
    """CPA requested for an intruder that never appeared in the trace."""


class PairingError(ValueError):
    """Batch rows without a matching with/without counterpart."""


def theoretical_flight_time(route: Route, perf: PerformanceModel) -> float:
    """Still-air time: cruise over the polyline plus the vertical climb
    and descent legs."""
    return (
        polyline_length(route) / perf.cruise_speed
        + perf.cruise_alt / perf.climb_rate
        + perf.cruise_alt / perf.descent_rate
    )


def cpa(result: RunResult, intruder_id: str) -> float:
    """Minimum 3-D separation over the encounter.

    Within each tick both agents move linearly, so the continuous
    minimum on a tick interval is the closed-form CPA of the relative
    motion; the result can only be at or below every sampled separation.
    """
    best = math.inf
    prev: tuple[float, tuple[float, float, float]] | None = None
    for rec in result.ticks:
        it = None
        for cand in rec.intruders:
            if cand.intruder_id == intruder_id:
                it = cand
                break
        if it is None:
            prev = None
            continue
        own_p = (rec.own_east, rec.own_north, rec.own_up)
        intr_p = (it.east, it.north, it.up)
        rel = (intr_p[0] - own_p[0], intr_p[1] - own_p[1], intr_p[2] - own_p[2])
        best = min(best, math.sqrt(rel[0] ** 2 + rel[1] ** 2 + rel[2] ** 2))
        if prev is not None:
            t0, rel0 = prev
            span = rec.t - t0
            rel_vel = ((rel[0] - rel0[0]) / span, (rel[1] - rel0[1]) / span, (rel[2] - rel0[2]) / span)
            _, d = cpa_linear(rel0, rel_vel, span)
            best = min(best, d)
        prev = (rec.t, rel)
    if best is math.inf:
        raise NoEncounterError(f"intruder {intruder_id!r} never present")
    return best


def intruder_ids(result: RunResult) -> list[str]:
    seen: dict[str, None] = {}
    for rec in result.ticks:
        for it in rec.intruders:
            seen.setdefault(it.intruder_id, None)
    return list(seen)


@dataclass(frozen=True)
class MetricsReport:
    """Run-level outcome numbers; airborne fields are None when the
    departure was postponed."""

    cpa: float | None
    t_sim: float | None
    d_ground: float
    d_air: float | None
    d_total: float | None
    route_flown: RouteId | None
    terminal: Terminal


def compose_delays(d_ground: float, d_air: float) -> float:
    """Total delay is the exact sum of its parts."""
    return d_ground + d_air


def delays(result: RunResult, baselines: Mapping[RouteId, float]) -> MetricsReport:
    """Assemble the delay decomposition for one run.

    The airborne baseline is the theoretical time of the route the
    flight departed on; a diversion landing elsewhere still counts
    against that plan.  Airborne delay is floored at zero.
    """
    if result.terminal.kind is TerminalKind.POSTPONED_ON_GROUND:
        return MetricsReport(
            cpa=None,
            t_sim=None,
            d_ground=math.inf,
            d_air=None,
            d_total=None,
            route_flown=None,
            terminal=result.terminal,
        )
    t_sim = result.end_time - result.departure_time
    d_ground = float(result.ground_decision.delay_s)
    d_air = max(0.0, t_sim - baselines[result.departed_route])
    ids = intruder_ids(result)
    cpa_val = min(cpa(result, i) for i in ids) if ids else None
    return MetricsReport(
        cpa=cpa_val,
        t_sim=t_sim,
        d_ground=d_ground,
        d_air=d_air,
        d_total=compose_delays(d_ground, d_air),
        route_flown=result.departed_route,
        terminal=result.terminal,
    )


@dataclass(frozen=True)
class BatchRow:
    scenario_id: str
    cpa_with: float | None
    cpa_without: float | None
    t_sim: float | None
    d_ground: float
    d_air: float | None
    d_total: float | None
    terminal: Terminal


@dataclass(frozen=True)
class BatchTable:
    rows: tuple[BatchRow, ...]
    mean_d_air: float | None


def summarize_batch(
    with_cas: Mapping[str, MetricsReport],
    without_cas: Mapping[str, MetricsReport],
) -> BatchTable:
    """Merge paired runs into the comparison table, ordered by scenario
    id.  Delay columns come from the system-on run; the system-off run
    contributes its CPA."""
    if set(with_cas) != set(without_cas):
        odd = set(with_cas) ^ set(without_cas)
        raise PairingError(f"unpaired scenario ids: {sorted(odd)}")
    rows = []
    for sid in sorted(with_cas):
        on = with_cas[sid]
        off = without_cas[sid]
        rows.append(
            BatchRow(
                scenario_id=sid,
                cpa_with=on.cpa,
                cpa_without=off.cpa,
                t_sim=on.t_sim,
                d_ground=on.d_ground,
                d_air=on.d_air,
                d_total=on.d_total,
                terminal=on.terminal,
            )
        )
    finite = [r.d_air for r in rows if r.d_air is not None]
    mean_d_air = sum(finite) / len(finite) if finite else None
    return BatchTable(tuple(rows), mean_d_air)
