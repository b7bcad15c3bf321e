"""Comparison planners: shortest path and RSRP-aware RL.

The shortest-path baseline flies a canonical octile geodesic (diagonal legs
first) and always serves the strongest cell. The RSRP-aware baseline reuses
the Q-learning planner with weights (0.10, 0.90, 0.0) and strongest-cell
association forced, i.e. it avoids coverage holes but ignores handoffs.
"""
from __future__ import annotations

from .planner import Trajectory, TrainResult, train
from .radio import RadioMap
from .scenario import Scenario

RSRP_AWARE_WEIGHTS = (0.10, 0.90, 0.0)


def shortest_path(scenario: Scenario, rmap: RadioMap) -> Trajectory:
    """Canonical octile geodesic start -> goal with rank-0 cell association."""
    i, j = scenario.start
    gi, gj = scenario.goal
    wps = [(i, j)]
    while (i, j) != (gi, gj):
        di = (gi > i) - (gi < i)
        dj = (gj > j) - (gj < j)
        i += di
        j += dj
        wps.append((i, j))
    cells = [int(rmap.cell_ids[i, j, 0]) for i, j in wps]
    rsrps = [float(rmap.rsrp_dbm[i, j, 0]) for i, j in wps]
    return Trajectory(wps, cells, rsrps).validate()


def rsrp_aware_plan(scenario: Scenario, rmap: RadioMap) -> TrainResult:
    """Disconnectivity-avoiding planner that ignores handoff events."""
    return train(scenario, rmap, weights=RSRP_AWARE_WEIGHTS, force_rank0=True)
