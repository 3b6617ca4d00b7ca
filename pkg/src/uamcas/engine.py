"""Fixed-timestep simulation loop.

Per tick, in a fixed order chosen once for determinism: intruders
advance, separations and zones are sensed against the not-yet-moved
ownship, the decision tree runs (when the avoidance system is enabled),
and finally the ownship moves under the resulting guidance.  The
recorded tick snapshot pairs post-move positions so trace geometry is
time-consistent.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Mapping

from . import agents, cdr, envelopes, geo
from .agents import FlightMode, NavPlan, OwnshipState
from .envelopes import Zone
from .geo import EnuPoint
from .maneuvers import ManeuverCommand

if TYPE_CHECKING:
    from .scenario_io import Scenario


@dataclass(frozen=True)
class SimParams:
    dt: float = 0.1
    max_sim_time: float = 3600.0
    cas_enabled: bool = True
    contact_distance: float = 5.0

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.max_sim_time <= 0.0:
            raise ValueError("max_sim_time must be positive")


class TerminalKind(enum.Enum):
    LANDED_AT = "LANDED_AT"
    COLLIDED = "COLLIDED"
    TIMED_OUT = "TIMED_OUT"
    POSTPONED_ON_GROUND = "POSTPONED_ON_GROUND"


@dataclass(frozen=True)
class Terminal:
    kind: TerminalKind
    vertiport: str | None = None


@dataclass(frozen=True, slots=True)
class IntruderTick:
    intruder_id: str
    east: float
    north: float
    up: float
    separation: float
    zone: Zone


@dataclass(frozen=True, slots=True)
class TickRecord:
    t: float
    own_east: float
    own_north: float
    own_up: float
    own_track: float
    flight_mode: FlightMode
    phase: cdr.CdrPhase
    intruders: tuple[IntruderTick, ...]
    command: str


@dataclass(frozen=True)
class RunResult:
    scenario_id: str
    ticks: list[TickRecord]
    terminal: Terminal
    ground_decision: cdr.GroundDecision
    departure_time: float
    end_time: float
    planned_route: geo.RouteId
    departed_route: geo.RouteId | None
    command_log: list[tuple[float, ManeuverCommand]]


def governing_intruder(rec: TickRecord) -> IntruderTick | None:
    if not rec.intruders:
        return None
    return min(rec.intruders, key=lambda it: it.separation)


def run(scenario: "Scenario", params: SimParams | None = None) -> RunResult:
    """Execute one scenario end to end."""
    if params is None:
        params = SimParams(**scenario.sim_overrides)
    sc = scenario
    origin = sc.vertiports["V1"].position
    vertiports_enu: Mapping[str, EnuPoint] = {
        vid: geo.to_enu(origin, vp.position) for vid, vp in sc.vertiports.items()
    }
    polylines = {rid: geo.project_route(origin, route) for rid, route in sc.routes.items()}
    perf = sc.performance()

    # Strategic phase.  Only intruders scheduled on the absolute clock
    # exist before departure; the rest are encounter scripts pinned to
    # the departure the decision produces.
    if params.cas_enabled:
        ground_records = [r for r in sc.intruders if r.ground_clock]
        decision = cdr.takeoff_delay_check(
            ground_records, vertiports_enu["V1"], polylines, sc.ground_params, sc.planned_route
        )
    else:
        decision = cdr.GroundDecision.depart(sc.planned_route, 0.0)

    if decision.postponed:
        return RunResult(
            scenario_id=sc.id,
            ticks=[],
            terminal=Terminal(TerminalKind.POSTPONED_ON_GROUND),
            ground_decision=decision,
            departure_time=math.inf,
            end_time=0.0,
            planned_route=sc.planned_route,
            departed_route=None,
            command_log=[],
        )

    departure = decision.delay_s
    plan = NavPlan(polylines[decision.route], decision.route, sc.destination_id(decision.route))
    guidance = agents.follow_plan(plan, sc.capture_radius)

    own = OwnshipState(
        t=departure,
        pos=EnuPoint(plan.waypoints[0].east, plan.waypoints[0].north, 0.0),
        track=0.0,
        ground_speed=0.0,
        vertical_speed=0.0,
        flight_mode=FlightMode.GROUND,
        active_route=decision.route,
        next_waypoint_index=0,
    )

    # Pin departure-relative spawn clocks now that departure is known.
    records = [
        r if r.ground_clock else replace(r, spawn_time=r.spawn_time + departure)
        for r in sc.intruders
    ]
    airborne_records = [r for r in records if not r.ground_clock]

    cdr_state = cdr.CdrState()
    hist_len = max(3, int(math.ceil(sc.cdr_params.hold_duration / params.dt)) + 5)
    history: dict[str, deque] = {r.id: deque(maxlen=hist_len) for r in airborne_records}
    prev_pos: dict[str, EnuPoint | None] = {r.id: None for r in airborne_records}

    ticks: list[TickRecord] = []
    command_log: list[tuple[float, ManeuverCommand]] = []
    active_label = ""
    terminal: Terminal | None = None
    t = departure

    while terminal is None:
        t_next = t + params.dt
        if t_next > params.max_sim_time:
            terminal = Terminal(TerminalKind.TIMED_OUT)
            break

        # 1. Intruders advance.
        present: list[tuple[agents.IntruderRecord, EnuPoint, agents.Vec3]] = []
        for rec in airborne_records:
            st = agents.intruder_state_at(
                rec, t_next, ownship_pos=own.pos, prev_pos=prev_pos[rec.id], dt=params.dt
            )
            if st is None:
                prev_pos[rec.id] = None
            else:
                prev_pos[rec.id] = st[0]
                present.append((rec, st[0], st[1]))

        # 2. Sensing against the pre-move ownship.
        env = envelopes.envelopes_for(
            sc.ownship_config, own.flight_mode, sc.envelope_params, perf.cruise_speed
        )
        observations = []
        sensed: dict[str, tuple[float, Zone]] = {}
        for rec, pos, vel in present:
            sep = geo.distance_3d(own.pos, pos)
            zone = envelopes.classify(sep, env)
            sensed[rec.id] = (sep, zone)
            observations.append(
                cdr.IntruderObservation(rec.id, rec.kind, pos, vel, sep, zone)
            )
        for rec in airborne_records:
            sep_zone = sensed.get(rec.id)
            history[rec.id].append(
                (t_next, sep_zone[0] if sep_zone else None, sep_zone[1] if sep_zone else None)
            )

        # 3. Decision.
        if params.cas_enabled:
            cdr_state, command = cdr.cdr_step(
                cdr_state, t_next, own, observations, history,
                vertiports_enu, sc.ownship_config, sc.cdr_params,
            )
            if command is not None:
                command_log.append((t_next, command))
                active_label = command.label()
                guidance, own = agents.resolve_command(
                    own, perf, guidance, command, vertiports_enu
                )

        # 4. Ownship advances.
        own = agents.ownship_step(own, perf, guidance, params.dt)

        # 5. Record the post-move snapshot.
        intruder_ticks = []
        contact = False
        rec_env = envelopes.envelopes_for(
            sc.ownship_config, own.flight_mode, sc.envelope_params, perf.cruise_speed
        )
        for rec, pos, vel in present:
            sep = geo.distance_3d(own.pos, pos)
            intruder_ticks.append(
                IntruderTick(rec.id, pos.east, pos.north, pos.up, sep, envelopes.classify(sep, rec_env))
            )
            if sep <= params.contact_distance:
                contact = True
        ticks.append(
            TickRecord(
                t=t_next,
                own_east=own.pos.east,
                own_north=own.pos.north,
                own_up=own.pos.up,
                own_track=own.track,
                flight_mode=own.flight_mode,
                phase=cdr_state.phase,
                intruders=tuple(intruder_ticks),
                command=active_label,
            )
        )

        if contact:
            terminal = Terminal(TerminalKind.COLLIDED)
        elif own.flight_mode is FlightMode.GROUND:
            terminal = Terminal(TerminalKind.LANDED_AT, guidance.plan.destination_id)
        t = t_next

    return RunResult(
        scenario_id=sc.id,
        ticks=ticks,
        terminal=terminal,
        ground_decision=decision,
        departure_time=departure,
        end_time=t,
        planned_route=sc.planned_route,
        departed_route=decision.route,
        command_log=command_log,
    )


TRACE_HEADER = "t_s,own_east_m,own_north_m,own_up_m,own_track_deg,phase,intruder_id,sep_m,zone,command"


def trace_csv_lines(result: RunResult) -> list[str]:
    """Render a run as the plot-ready trace table, one row per tick with
    the governing (nearest) intruder's columns."""
    lines = [TRACE_HEADER]
    for rec in result.ticks:
        gov = governing_intruder(rec)
        if gov is None:
            intr = ",,"
        else:
            intr = f"{gov.intruder_id},{gov.separation:.3f},{gov.zone.name}"
        lines.append(
            f"{rec.t:.3f},{rec.own_east:.3f},{rec.own_north:.3f},{rec.own_up:.3f},"
            f"{rec.own_track:.3f},{rec.phase.value},{intr},{rec.command}"
        )
    return lines
