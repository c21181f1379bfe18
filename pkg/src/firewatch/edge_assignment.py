"""Two-phase assignment of service load onto edge nodes.

Phase 1 maps direct sensors to their nearest in-range edge.  Phase 2 maps
clusters, in ascending cluster id, to the edge minimizing a blend of
normalized mean distance and prospective utilization:

    score = omega_d * (mean_dist / d_norm) + omega_l * (load + demand) / capacity

Overloads are repaired greedily by moving the smallest-demand cluster off the
most overloaded edge; if no edge can absorb any movable cluster the repair
fails and the caller should grow the fleet.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import EdgeNode, PhysicalParams, Sensor, distance, link_ranges


class RepairFailure(Exception):
    """No overload-clearing move exists at the current fleet size."""


@dataclass
class EdgeLoadState:
    loads_mips: list[float]
    capacities_mips: list[float]

    def utilization(self, k: int) -> float:
        return self.loads_mips[k] / self.capacities_mips[k]

    def overloaded(self) -> list[int]:
        return [k for k, (l, c) in enumerate(zip(self.loads_mips, self.capacities_mips))
                if l > c]

    def copy(self) -> "EdgeLoadState":
        return EdgeLoadState(list(self.loads_mips), list(self.capacities_mips))


@dataclass(frozen=True)
class Assignment:
    direct_map: dict[int, int]    # sensor id -> edge id
    cluster_map: dict[int, int]   # cluster id -> edge id
    load: EdgeLoadState


def assign_direct(direct_sensors: list[Sensor], edges: list[EdgeNode],
                  p: PhysicalParams) -> tuple[dict[int, int], EdgeLoadState]:
    """Phase 1: each direct sensor joins its nearest in-range edge (ties by
    lowest edge id) and adds compute_mi / t_period to that edge's load."""
    _, _, r_se = link_ranges(p)
    load = EdgeLoadState([0.0] * len(edges), [e.capacity_mips for e in edges])
    direct_map: dict[int, int] = {}
    for s in sorted(direct_sensors, key=lambda s: s.id):
        best, best_d = None, None
        for e in edges:
            d = distance(s.pos, e.pos)
            if d <= r_se and (best_d is None or d < best_d):
                best, best_d = e.id, d
        if best is None:
            raise ValueError(f"sensor {s.id} has no edge within {r_se} m")
        direct_map[s.id] = best
        load.loads_mips[best] += s.request.compute_mi / p.t_period_s
    return direct_map, load


def cluster_demand(members: list[Sensor], t_period_s: float) -> float:
    """Steady-state MIPS a cluster adds to its edge: sum(compute_mi) / period."""
    if t_period_s <= 0:
        raise ValueError(f"t_period_s must be > 0, got {t_period_s}")
    return sum(s.request.compute_mi for s in members) / t_period_s


def _mean_dists(cluster_members: list[list[Sensor]], edges: list[EdgeNode]) -> np.ndarray:
    """dbar[j, k] = mean member distance of cluster j to edge k (0 if empty)."""
    edge_xy = np.array([[e.pos.x, e.pos.y] for e in edges])
    dbar = np.zeros((len(cluster_members), len(edges)))
    for j, members in enumerate(cluster_members):
        if members:
            xy = np.array([[s.pos.x, s.pos.y] for s in members])
            dbar[j] = np.linalg.norm(xy[:, None, :] - edge_xy[None, :, :], axis=2).mean(axis=0)
    return dbar


def _score(dbar_jk: float, load: float, demand: float, capacity: float,
           omega_d: float, omega_l: float, d_norm_m: float) -> float:
    return omega_d * (dbar_jk / d_norm_m) + omega_l * (load + demand) / capacity


def assign_clusters(cluster_members: list[list[Sensor]], edges: list[EdgeNode],
                    load: EdgeLoadState, omega_d: float, omega_l: float,
                    d_norm_m: float, t_period_s: float
                    ) -> tuple[dict[int, int], EdgeLoadState]:
    """Phase 2: clusters in ascending id pick the lowest-score edge (ties by
    lowest edge id); the load state is updated after each pick."""
    load = load.copy()
    dbar = _mean_dists(cluster_members, edges)
    cluster_map: dict[int, int] = {}
    for j, members in enumerate(cluster_members):
        demand = cluster_demand(members, t_period_s)
        scores = [_score(dbar[j, k], load.loads_mips[k], demand, e.capacity_mips,
                         omega_d, omega_l, d_norm_m)
                  for k, e in enumerate(edges)]
        k_best = int(np.argmin(scores))
        cluster_map[j] = edges[k_best].id
        load.loads_mips[k_best] += demand
    return cluster_map, load


def repair_overload(cluster_map: dict[int, int], cluster_members: list[list[Sensor]],
                    edges: list[EdgeNode], load: EdgeLoadState,
                    omega_d: float, omega_l: float, d_norm_m: float,
                    t_period_s: float) -> tuple[dict[int, int], EdgeLoadState]:
    """Clear capacity overloads by moving clusters, least demand first, from
    the most overloaded edge to the best-scoring edge with room.

    Every applied move strictly reduces total overload, so the loop
    terminates.  Raises RepairFailure when no movable cluster fits anywhere.
    """
    cluster_map = dict(cluster_map)
    load = load.copy()
    dbar = _mean_dists(cluster_members, edges)
    demands = [cluster_demand(ms, t_period_s) for ms in cluster_members]

    while True:
        over = load.overloaded()
        if not over:
            return cluster_map, load
        worst = max(over, key=lambda k: (load.loads_mips[k] - load.capacities_mips[k], -k))
        movable = sorted((j for j, e in cluster_map.items()
                          if e == worst and demands[j] > 0),
                         key=lambda j: (demands[j], j))
        moved = False
        for j in movable:
            fits = [k for k, e in enumerate(edges)
                    if k != worst and load.loads_mips[k] + demands[j] <= e.capacity_mips]
            if not fits:
                continue
            k_best = min(fits, key=lambda k: (
                _score(dbar[j, k], load.loads_mips[k], demands[j],
                       edges[k].capacity_mips, omega_d, omega_l, d_norm_m), k))
            load.loads_mips[worst] -= demands[j]
            load.loads_mips[k_best] += demands[j]
            cluster_map[j] = edges[k_best].id
            moved = True
            break
        if not moved:
            raise RepairFailure(
                f"edge {worst} overloaded by "
                f"{load.loads_mips[worst] - load.capacities_mips[worst]:.3f} MIPS "
                f"and no cluster can move")
