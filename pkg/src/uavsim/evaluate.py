"""Mission metrics, RSRP CDF, and the exact product-graph oracle.

Two objective flavors are reported for every mission:
  * objective: the raw weighted sum w_en * Joules + w_sig * meters-in-hole
    + w_ho * handoff count (mixed units, as formulated);
  * objective_normalized: the unit-free per-step cost the planner optimizes
    (motion 1/sqrt(2) or 1, arrival-point disconnectivity, handoffs).

Disconnectivity distance uses the two-endpoint rule: a segment counts only
when the serving-cell RSRP is below threshold at BOTH of its endpoints; the
normalized objective instead penalizes uncovered arrival points, matching
the training reward. Both definitions are kept exactly as specified by their
respective uses.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, asdict

import numpy as np

from .energy import EnergyBudget, battery_percent, mission_energy
from .errors import ValidationError
from .planner import (DIRECTIONS, INV_SQRT2, Trajectory, normalized_cost)
from .radio import RadioMap, is_covered
from .scenario import Scenario


@dataclass
class MissionMetrics:
    planner: str
    altitude_m: float
    handoffs: int
    disconnectivity_m: float
    disconnectivity_pct: float
    battery_pct: float
    energy_j: float
    total_distance_m: float
    objective: float
    objective_normalized: float
    reached_goal: bool

    def validate(self) -> "MissionMetrics":
        if self.handoffs < 0:
            raise ValidationError("negative handoff count")
        if not 0.0 <= self.disconnectivity_pct <= 100.0:
            raise ValidationError("disconnectivity percent out of [0, 100]")
        if self.objective < 0:
            raise ValidationError("objective must be nonnegative")
        return self


def count_handoffs(traj: Trajectory) -> int:
    """Number of consecutive waypoint pairs served by different cells."""
    return sum(1 for a, b in zip(traj.cells, traj.cells[1:]) if a != b)


def disconnectivity_distance(traj: Trajectory, threshold: float,
                             step: float) -> tuple[float, float]:
    """(meters, percent) of traveled distance inside coverage holes.

    A segment counts when the serving-cell RSRP is below threshold at both
    endpoints; an empty or single-point trajectory yields (0, 0).
    """
    lengths = traj.segment_lengths(step)
    total = sum(lengths)
    hole = 0.0
    for k, seg in enumerate(lengths):
        if (not is_covered(traj.rsrps[k], threshold)
                and not is_covered(traj.rsrps[k + 1], threshold)):
            hole += seg
    pct = 100.0 * hole / total if total > 0 else 0.0
    return hole, pct


def objective_value(traj: Trajectory, scenario: Scenario) -> float:
    """Raw weighted mission objective: w_en * energy + w_sig * hole meters + w_ho * handoffs."""
    w_en, w_sig, w_ho = scenario.weights
    energy = mission_energy(traj.coords(scenario.grid), scenario.speed, scenario.power)
    hole_m, _ = disconnectivity_distance(traj, scenario.rsrp_threshold, scenario.grid.step)
    return w_en * energy + w_sig * hole_m + w_ho * count_handoffs(traj)


def normalized_objective(traj: Trajectory, scenario: Scenario,
                         weights: tuple[float, float, float] | None = None) -> float:
    """Unit-free mission cost consistent with the training reward (negated)."""
    w = weights if weights is not None else scenario.weights
    return normalized_cost(traj.step_counts(scenario.rsrp_threshold), w)


def rsrp_cdf(traj: Trajectory) -> list[tuple[float, float]]:
    """Empirical CDF of the serving-cell RSRP over waypoints: (value, P[X <= value])."""
    if not traj.rsrps:
        raise ValidationError("trajectory has no RSRP samples")
    values = np.sort(np.asarray(traj.rsrps, dtype=float))
    n = len(values)
    out = []
    for v in np.unique(values):
        out.append((float(v), float(np.searchsorted(values, v, side="right")) / n))
    return out


def cdf_at(traj: Trajectory, x: float) -> float:
    """Empirical P[RSRP <= x] over trajectory waypoints."""
    vals = np.asarray(traj.rsrps, dtype=float)
    return float(np.mean(vals <= x))


def evaluate_mission(traj: Trajectory, scenario: Scenario, planner: str = "",
                     include_vertical: bool = True) -> MissionMetrics:
    g = scenario.grid
    energy = mission_energy(traj.coords(g), scenario.speed, scenario.power)
    hole_m, hole_pct = disconnectivity_distance(traj, scenario.rsrp_threshold, g.step)
    budget = EnergyBudget(capacity=scenario.energy_budget, reserve=0.0,
                          speed=scenario.speed, altitude=g.altitude)
    return MissionMetrics(
        planner=planner,
        altitude_m=g.altitude,
        handoffs=count_handoffs(traj),
        disconnectivity_m=hole_m,
        disconnectivity_pct=hole_pct,
        battery_pct=battery_percent(energy, budget, scenario.power, include_vertical),
        energy_j=energy,
        total_distance_m=traj.total_distance(g.step),
        objective=objective_value(traj, scenario),
        objective_normalized=normalized_objective(traj, scenario),
        reached_goal=tuple(traj.waypoints[-1]) == tuple(scenario.goal),
    ).validate()


# ---------------------------------------------------------------------------
# Exact oracle: Dijkstra over the (position x serving rank) product graph
# ---------------------------------------------------------------------------

DEFAULT_ORACLE_NODE_LIMIT = 400_000


def oracle_optimal(scenario: Scenario, rmap: RadioMap,
                   weights: tuple[float, float, float] | None = None,
                   force_rank0: bool = False,
                   node_limit: int = DEFAULT_ORACLE_NODE_LIMIT
                   ) -> tuple[Trajectory, float]:
    """Minimum-cost start -> goal mission over (grid point, serving rank) nodes.

    Edge cost matches the negated training reward: w_en-weighted motion cost
    plus w_sig if the arrival candidate is below threshold plus w_ho on a
    serving-cell change. Exact label-setting search; ties resolve toward the
    lower node index, so results are deterministic.
    """
    w = tuple(weights) if weights is not None else tuple(scenario.weights)
    w_en, w_sig, w_ho = w
    g = rmap.grid
    size = g.size
    ranks = 1 if force_rank0 else rmap.mprime
    n_nodes = size * size * ranks
    if n_nodes > node_limit:
        raise ValidationError(
            f"oracle instance too large: {n_nodes} nodes > limit {node_limit}")

    ids = rmap.cell_ids
    covered = rmap.rsrp_dbm >= scenario.rsrp_threshold
    card_cost = w_en * INV_SQRT2  # DIRECTIONS lists the four cardinals first
    diag_cost = w_en * 1.0

    start_i, start_j = scenario.start
    goal_i, goal_j = scenario.goal

    def node(i: int, j: int, r: int) -> int:
        return (i * size + j) * ranks + r

    dist = np.full(n_nodes, np.inf)
    pred = np.full(n_nodes, -1, dtype=np.int64)
    src = node(start_i, start_j, 0)
    dist[src] = 0.0
    heap: list[tuple[float, int]] = [(0.0, src)]
    goal_nodes = {node(goal_i, goal_j, r) for r in range(ranks)}
    settled_goal = -1

    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u in goal_nodes:
            settled_goal = u
            break
        r = u % ranks
        pos = u // ranks
        i, j = divmod(pos, size)
        cell = ids[i, j, r]
        for didx, (di, dj) in enumerate(DIRECTIONS):
            ni, nj = i + di, j + dj
            if not (0 <= ni < size and 0 <= nj < size):
                continue
            base = d + (diag_cost if didx >= 4 else card_cost)
            for nr in range(ranks):
                cost = base
                if not covered[ni, nj, nr]:
                    cost += w_sig
                if ids[ni, nj, nr] != cell:
                    cost += w_ho
                v = node(ni, nj, nr)
                if cost < dist[v]:
                    dist[v] = cost
                    pred[v] = u
                    heapq.heappush(heap, (cost, v))

    if settled_goal < 0:
        raise ValidationError("oracle found no start -> goal path")

    # Reconstruct and recompute the objective from step counts for exactness.
    chain = []
    u = settled_goal
    while u >= 0:
        chain.append(u)
        u = int(pred[u])
    chain.reverse()
    wps, cells, rsrps = [], [], []
    for u in chain:
        r = u % ranks
        pos = u // ranks
        i, j = divmod(pos, size)
        wps.append((i, j))
        cells.append(int(ids[i, j, r]))
        rsrps.append(float(rmap.rsrp_dbm[i, j, r]))
    traj = Trajectory(wps, cells, rsrps).validate()
    cost = normalized_cost(traj.step_counts(scenario.rsrp_threshold), w)
    return traj, cost


# ---------------------------------------------------------------------------
# Report and figure-data exports
# ---------------------------------------------------------------------------

def write_metrics_json(metrics: MissionMetrics, path, extra: dict | None = None) -> None:
    data = asdict(metrics)
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_comparison_csv(rows: list[MissionMetrics], path) -> None:
    """Planner x metric table feeding the grouped-bar figure."""
    with open(path, "w") as fh:
        fh.write("planner,altitude_m,handoffs,disconnectivity_pct,battery_pct,"
                 "total_distance_m,objective,objective_normalized\n")
        for m in rows:
            fh.write(f"{m.planner},{m.altitude_m:g},{m.handoffs},"
                     f"{m.disconnectivity_pct:.6f},{m.battery_pct:.6f},"
                     f"{m.total_distance_m:.3f},{m.objective:.6f},"
                     f"{m.objective_normalized:.9f}\n")


def write_cdf_csv(traj: Trajectory, path) -> None:
    with open(path, "w") as fh:
        fh.write("rsrp_dbm,cum_prob\n")
        for v, p in rsrp_cdf(traj):
            fh.write(f"{v:.6f},{p:.9f}\n")
