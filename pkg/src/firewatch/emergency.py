"""Event-driven emergency response simulation on top of a patrol plan.

UAVs fly their closed tours at constant speed from random starting arc
offsets.  When a sensor raises an alert, an available (patrolling) UAV is
diverted: it flies straight to the sensor, collects the data over the upload
window, ferries it to a delivery edge with spare utilization, and rejoins its
tour at the nearest waypoint.  All motion is piecewise linear, so every stage
time is closed-form; there is no tick loop.

Concurrent alerts are served highest fire-history first (FIFO within equal
priority); alerts with no available UAV queue until a UAV frees up.  Events
at direct-communication sensors are served straight from the edge and
flagged.
"""

from __future__ import annotations

import csv
import heapq
import json
from dataclasses import dataclass

import numpy as np

from .clustering import cluster_radius
from .edge_assignment import EdgeLoadState
from .model import AlgoParams, Point2D, derive_seed, distance, link_ranges
from .timing import execution_time, expected_wait, response_time, transmission_time

EVENTS_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EmergencyEvent:
    sensor_id: int
    alert_time_s: float
    priority: int   # the sensor's fire-history score

    def __post_init__(self):
        if self.alert_time_s < 0:
            raise ValueError(f"alert_time_s must be >= 0, got {self.alert_time_s}")


@dataclass(frozen=True)
class EmergencyTrace:
    event_seq: int
    sensor_id: int
    alert_time_s: float
    priority: int
    uav_id: int | None            # None when served without dispatch
    edge_id: int
    t_queue_s: float
    t_dispatch_travel_s: float
    t_tra_s: float
    t_delivery_travel_s: float
    t_exe_s: float
    response_time_s: float        # sum of the five stage times
    resume_waypoint: int | None
    deadline_met: bool
    delivery_fallback: bool
    served_direct: bool


@dataclass(frozen=True)
class NormalImpactReport:
    baseline_mean_s: float
    with_events_mean_s: float
    delta_s: float
    delta_fraction: float


@dataclass(frozen=True)
class SimulationResult:
    traces: tuple[EmergencyTrace, ...]
    impact: NormalImpactReport
    horizon_s: float
    phases_m: tuple[float, ...]   # initial arc offset per UAV


class RouteGeometry:
    """Closed-tour polyline (depot first) with cumulative arc lengths."""

    def __init__(self, points: np.ndarray):
        self.points = np.asarray(points, dtype=float)
        q = len(self.points)
        legs = [float(np.linalg.norm(self.points[(i + 1) % q] - self.points[i]))
                for i in range(q)]
        self.cum = np.concatenate([[0.0], np.cumsum(legs)])
        self.length_m = float(self.cum[-1])

    @classmethod
    def from_route(cls, route, scenario) -> "RouteGeometry":
        depot = scenario.edge_by_id(route.depot_edge_id)
        pts = [[depot.pos.x, depot.pos.y]]
        pts += [[scenario.sensor_by_id(i).pos.x, scenario.sensor_by_id(i).pos.y]
                for i in route.waypoints]
        return cls(np.array(pts))

    def arc_of_waypoint(self, widx: int) -> float:
        """Arc length from the depot to waypoint widx (0-based tour index)."""
        return float(self.cum[widx + 1])

    def position_at_arc(self, arc_m: float) -> Point2D:
        if self.length_m == 0.0:
            return Point2D(float(self.points[0, 0]), float(self.points[0, 1]))
        arc = arc_m % self.length_m
        i = int(np.searchsorted(self.cum, arc, side="right")) - 1
        i = min(i, len(self.points) - 1)
        leg = self.cum[i + 1] - self.cum[i]
        a = self.points[i]
        b = self.points[(i + 1) % len(self.points)]
        frac = (arc - self.cum[i]) / leg if leg > 0 else 0.0
        pt = a + frac * (b - a)
        return Point2D(float(pt[0]), float(pt[1]))


def uav_position_at(geom: RouteGeometry, t_s: float, v_g: float,
                    phase_m: float = 0.0) -> Point2D:
    """Patrol position at arc (phase + v_g * t) mod tour length; the depot
    for an empty tour."""
    return geom.position_at_arc(phase_m + v_g * t_s)


def select_dispatch_uav(candidates: list[tuple[int, Point2D]], sensor_pos: Point2D,
                        edges) -> int:
    """Dispatch rule: among available UAVs minimize straight-line distance to
    the sensor plus sensor-to-nearest-edge distance (ties by lowest uav id)."""
    if not candidates:
        raise ValueError("no available UAV")
    to_edge = min(distance(sensor_pos, e.pos) for e in edges)
    return min(candidates, key=lambda c: (distance(c[1], sensor_pos) + to_edge, c[0]))[0]


def select_delivery_edge(sensor_pos: Point2D, edges, load: EdgeLoadState,
                         theta_max: float) -> tuple[int, bool]:
    """Nearest edge with utilization below theta_max (ties by lowest id).
    When every edge is saturated, falls back to the least utilized one and
    reports it via the second return value."""
    ok = [e for e in edges if load.utilization(e.id) < theta_max]
    if ok:
        return min(ok, key=lambda e: (distance(sensor_pos, e.pos), e.id)).id, False
    least = min(edges, key=lambda e: (load.utilization(e.id), e.id))
    return least.id, True


def resume_waypoint(current_pos: Point2D, geom: RouteGeometry) -> int | None:
    """Nearest waypoint to resume patrol at (ties by earliest tour index);
    None for an empty tour (return to depot)."""
    n = len(geom.points) - 1
    if n <= 0:
        return None
    d = np.linalg.norm(geom.points[1:] - np.array([current_pos.x, current_pos.y]), axis=1)
    return int(np.argmin(d))


def fallback_edge(uav_pos: Point2D, edges, load: EdgeLoadState, omega_d: float,
                  omega_l: float, d_norm_m: float, exclude=()) -> int:
    """Alternate delivery edge: minimize omega_d * (distance / d_norm) +
    omega_l * utilization over edges not excluded (ties by lowest id)."""
    candidates = [e for e in edges if e.id not in set(exclude)]
    if not candidates:
        raise ValueError("no reachable edge")
    return min(candidates, key=lambda e: (
        omega_d * distance(uav_pos, e.pos) / d_norm_m + omega_l * load.utilization(e.id),
        e.id)).id


def generate_events(scenario, plan, n_events: int, horizon_s: float, seed: int,
                    min_history: int = 50) -> list[EmergencyEvent]:
    """Auto-generate alerts at the n highest-fire-history UAV-served sensors
    scoring above min_history, at uniform-random times within the horizon."""
    uav_ids = sorted(plan.clustering.assignment)
    hot = sorted((s for s in (scenario.sensor_by_id(i) for i in uav_ids)
                  if s.fire_history > min_history),
                 key=lambda s: (-s.fire_history, s.id))
    if len(hot) < n_events:
        raise ValueError(
            f"only {len(hot)} UAV-served sensors have fire_history > {min_history}; "
            f"{n_events} events requested")
    rng = np.random.default_rng(derive_seed(seed, "emergency-events"))
    times = np.sort(rng.uniform(0.0, horizon_s, size=n_events))
    return [EmergencyEvent(sensor_id=s.id, alert_time_s=float(t), priority=s.fire_history)
            for s, t in zip(hot[:n_events], times)]


def save_events(events: list[EmergencyEvent], path: str) -> None:
    doc = {"schema_version": EVENTS_SCHEMA_VERSION,
           "events": [{"sensor_id": e.sensor_id, "alert_time_s": e.alert_time_s,
                       "priority": e.priority} for e in events]}
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def load_events(path: str) -> list[EmergencyEvent]:
    with open(path) as f:
        doc = json.load(f)
    if doc.get("schema_version") != EVENTS_SCHEMA_VERSION:
        raise ValueError(f"unsupported events schema_version {doc.get('schema_version')!r}")
    return [EmergencyEvent(sensor_id=int(e["sensor_id"]),
                           alert_time_s=float(e["alert_time_s"]),
                           priority=int(e["priority"]))
            for e in doc["events"]]


class _UavState:
    __slots__ = ("geom", "ref_time", "ref_arc", "available")

    def __init__(self, geom: RouteGeometry, phase_m: float):
        self.geom = geom
        self.ref_time = 0.0
        self.ref_arc = phase_m
        self.available = True

    def patrol_pos(self, t: float, v_g: float) -> Point2D:
        return self.geom.position_at_arc(self.ref_arc + v_g * (t - self.ref_time))


def simulate(plan, scenario, events: list[EmergencyEvent], horizon_s: float,
             algo: AlgoParams, dispatch_policy: str = "nearest") -> SimulationResult:
    """Run the emergency protocol over the horizon and report per-event
    traces plus the impact on normal monitoring service.

    dispatch_policy "nearest" uses the distance rule over all available UAVs;
    "own_cluster" forces the alert sensor's own patrol UAV (used to check the
    analytic response bound).
    """
    if dispatch_policy not in ("nearest", "own_cluster"):
        raise ValueError(f"unknown dispatch_policy {dispatch_policy!r}")
    if horizon_s <= 0:
        raise ValueError(f"horizon_s must be > 0, got {horizon_s}")
    for e in events:
        if e.alert_time_s > horizon_s:
            raise ValueError(f"event at sensor {e.sensor_id} alerts past the horizon")
    events = sorted(events, key=lambda e: e.alert_time_s)

    p = scenario.physical
    v = p.v_g
    geoms = [RouteGeometry.from_route(r, scenario) for r in plan.routes]
    rng = np.random.default_rng(derive_seed(algo.seed, "patrol-phase"))
    phases = tuple(float(rng.uniform(0.0, g.length_m)) if g.length_m > 0 else 0.0
                   for g in geoms)
    uavs = [_UavState(g, ph) for g, ph in zip(geoms, phases)]

    # timeline entries: (time, rank, seq, payload); alerts outrank frees so a
    # UAV freed at an alert instant can take that alert
    timeline: list = []
    for seq, ev in enumerate(events):
        heapq.heappush(timeline, (ev.alert_time_s, 0, seq, ev))
    free_seq = len(events)

    pending: list = []   # (-priority, seq, event)
    traces: dict[int, EmergencyTrace] = {}
    absences: dict[int, list[tuple[float, float]]] = {j: [] for j in range(plan.m)}

    def serve_direct(seq: int, ev: EmergencyEvent):
        s = scenario.sensor_by_id(ev.sensor_id)
        eid = plan.assignment.direct_map[ev.sensor_id]
        t_tra = transmission_time(s.request.data_size_mb, p.data_rate_mbps)
        t_exe = execution_time(s.request.compute_mi,
                               scenario.edge_by_id(eid).capacity_mips)
        resp = t_tra + t_exe
        traces[seq] = EmergencyTrace(
            event_seq=seq, sensor_id=ev.sensor_id, alert_time_s=ev.alert_time_s,
            priority=ev.priority, uav_id=None, edge_id=eid, t_queue_s=0.0,
            t_dispatch_travel_s=0.0, t_tra_s=t_tra, t_delivery_travel_s=0.0,
            t_exe_s=t_exe, response_time_s=resp, resume_waypoint=None,
            deadline_met=resp <= p.t_urgent_s, delivery_fallback=False,
            served_direct=True)

    def dispatch(seq: int, ev: EmergencyEvent, uav_id: int, now: float):
        nonlocal free_seq
        uav = uavs[uav_id]
        s = scenario.sensor_by_id(ev.sensor_id)
        pos0 = uav.patrol_pos(now, v)
        t_disp = distance(pos0, s.pos) / v
        t_tra = transmission_time(s.request.data_size_mb, p.data_rate_mbps)
        eid, fb = select_delivery_edge(s.pos, scenario.edges,
                                       plan.assignment.load, algo.theta_max)
        edge = scenario.edge_by_id(eid)
        t_del = distance(s.pos, edge.pos) / v
        t_exe = execution_time(s.request.compute_mi, edge.capacity_mips)
        arrive = now + t_disp + t_tra + t_del
        t_queue = now - ev.alert_time_s
        resp = t_queue + t_disp + t_tra + t_del + t_exe

        widx = resume_waypoint(edge.pos, uav.geom)
        if widx is None:
            target = Point2D(float(uav.geom.points[0, 0]), float(uav.geom.points[0, 1]))
            arc = 0.0
        else:
            target = Point2D(float(uav.geom.points[widx + 1, 0]),
                             float(uav.geom.points[widx + 1, 1]))
            arc = uav.geom.arc_of_waypoint(widx)
        t_back = arrive + distance(edge.pos, target) / v

        uav.available = False
        absences[uav_id].append((now, t_back))
        heapq.heappush(timeline, (t_back, 1, free_seq, (uav_id, arc)))
        free_seq += 1

        traces[seq] = EmergencyTrace(
            event_seq=seq, sensor_id=ev.sensor_id, alert_time_s=ev.alert_time_s,
            priority=ev.priority, uav_id=uav_id, edge_id=eid, t_queue_s=t_queue,
            t_dispatch_travel_s=t_disp, t_tra_s=t_tra, t_delivery_travel_s=t_del,
            t_exe_s=t_exe, response_time_s=resp, resume_waypoint=widx,
            deadline_met=resp <= p.t_urgent_s, delivery_fallback=fb,
            served_direct=False)

    def try_dispatch(now: float):
        while True:
            avail = [(i, u.patrol_pos(now, v)) for i, u in enumerate(uavs) if u.available]
            if not avail or not pending:
                return
            launched = False
            for entry in sorted(pending):
                _, seq, ev = entry
                if dispatch_policy == "own_cluster":
                    own = plan.clustering.assignment[ev.sensor_id]
                    if not uavs[own].available:
                        continue
                    uav_id = own
                else:
                    uav_id = select_dispatch_uav(avail, scenario.sensor_by_id(ev.sensor_id).pos,
                                                 scenario.edges)
                pending.remove(entry)
                heapq.heapify(pending)
                dispatch(seq, ev, uav_id, now)
                launched = True
                break
            if not launched:
                return

    while timeline:
        now = timeline[0][0]
        # drain everything at this instant (alerts first) before dispatching
        while timeline and timeline[0][0] == now:
            _, rank, seq, payload = heapq.heappop(timeline)
            if rank == 0:
                ev = payload
                if ev.sensor_id in plan.assignment.direct_map:
                    serve_direct(seq, ev)
                else:
                    heapq.heappush(pending, (-ev.priority, seq, ev))
            else:
                uav_id, arc = payload
                uav = uavs[uav_id]
                uav.ref_time = now
                uav.ref_arc = arc
                uav.available = True
        try_dispatch(now)

    impact = _normal_impact(plan, scenario, events, absences, horizon_s)
    return SimulationResult(traces=tuple(traces[i] for i in sorted(traces)),
                            impact=impact, horizon_s=horizon_s, phases_m=phases)


def _normal_impact(plan, scenario, events, absences, horizon_s: float) -> NormalImpactReport:
    """Mean normal-service response over non-alert sensors, with the per-
    cluster expected wait recomputed under revisit periods inflated by the
    measured UAV absence episodes (weighted by their share of the horizon)."""
    p = scenario.physical
    r_sg, _, _ = link_ranges(p)
    contact = 2.0 * r_sg / p.v_g

    wait_with: dict[int, float] = {}
    for j, route in enumerate(plan.routes):
        t_r = route.revisit_s
        base = expected_wait(route.length_m, p)
        episodes = [(max(0.0, min(e, horizon_s) - min(s, horizon_s)))
                    for s, e in absences.get(j, [])]
        episodes = [a for a in episodes if a > 0]
        if not episodes or t_r == 0.0:
            wait_with[j] = base
            continue
        inflated = [t_r + a for a in episodes]
        inflated_share = sum(inflated)
        normal_share = max(0.0, horizon_s - inflated_share)
        num = normal_share * base + sum(T * max(0.0, (T - contact) / 2.0) for T in inflated)
        wait_with[j] = num / (normal_share + inflated_share)

    alert_ids = {e.sensor_id for e in events}
    base_vals, with_vals = [], []
    for s in scenario.sensors:
        if s.id in alert_ids:
            continue
        r = response_time(s.id, plan, scenario)
        base_vals.append(r.t_total_s)
        if r.path_kind == "uav":
            j = plan.clustering.assignment[s.id]
            with_vals.append(r.t_total_s - r.t_wait_s + wait_with[j])
        else:
            with_vals.append(r.t_total_s)
    if not base_vals:
        return NormalImpactReport(0.0, 0.0, 0.0, 0.0)
    base_mean = float(np.mean(base_vals))
    with_mean = float(np.mean(with_vals))
    delta = with_mean - base_mean
    return NormalImpactReport(
        baseline_mean_s=base_mean, with_events_mean_s=with_mean, delta_s=delta,
        delta_fraction=delta / base_mean if base_mean > 0 else 0.0)


def emergency_response_bound(plan, scenario, theta_max: float) -> float:
    """Analytic worst-case emergency response when a sensor's own cluster
    UAV dispatches: two max-cluster-radius legs, the longest sensor-to-
    delivery-edge leg, and the largest upload and execution windows."""
    p = scenario.physical
    radii = []
    for j, route in enumerate(plan.routes):
        xy = np.array([[scenario.sensor_by_id(i).pos.x, scenario.sensor_by_id(i).pos.y]
                       for i in route.waypoints]).reshape(len(route.waypoints), 2)
        radii.append(cluster_radius(xy, plan.clustering.centers[j]))
    r_max = max(radii) if radii else 0.0

    uav_ids = sorted(plan.clustering.assignment)
    if not uav_ids:
        raise ValueError("plan has no UAV-served sensors")
    d_del, t_tra_max, t_exe_max = 0.0, 0.0, 0.0
    for sid in uav_ids:
        s = scenario.sensor_by_id(sid)
        eid, _ = select_delivery_edge(s.pos, scenario.edges, plan.assignment.load,
                                      theta_max)
        d_del = max(d_del, distance(s.pos, scenario.edge_by_id(eid).pos))
        t_tra_max = max(t_tra_max, transmission_time(s.request.data_size_mb,
                                                     p.data_rate_mbps))
        t_exe_max = max(t_exe_max, execution_time(
            s.request.compute_mi, scenario.edge_by_id(eid).capacity_mips))
    return 2.0 * r_max / p.v_g + d_del / p.v_g + t_tra_max + t_exe_max


def write_trace_csv(result: SimulationResult, path: str) -> None:
    fields = ["event_seq", "sensor_id", "alert_time_s", "priority", "uav_id",
              "edge_id", "t_queue_s", "t_dispatch_travel_s", "t_tra_s",
              "t_delivery_travel_s", "t_exe_s", "response_time_s",
              "resume_waypoint", "deadline_met", "delivery_fallback",
              "served_direct"]
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for tr in result.traces:
            writer.writerow({k: getattr(tr, k) for k in fields})
