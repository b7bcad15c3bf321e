"""Cargo-UAV trajectory planning and cell association simulator."""

from .scenario import (Cell, DeploymentParams, GridSpec, Scenario, TrainConfig,
                       coords_to_grid, generate_scenario, grid_to_coords,
                       load_scenario, octile_distance, save_scenario)
from .radio import (ChannelParams, RadioMap, antenna_gain, build_radio_map,
                    is_covered, load_radio_map, los_probability, mean_pathloss,
                    rsrp, save_radio_map)
from .energy import (EnergyBudget, PowerParams, available_energy,
                     battery_percent, mission_energy, propulsion_power,
                     segment_energy)
from .planner import (Action, QTable, State, TrainResult, Trajectory,
                      load_qtable, q_update, reward, rollout, save_qtable,
                      select_action, step, train)
from .baselines import rsrp_aware_plan, shortest_path
from .evaluate import (MissionMetrics, cdf_at, count_handoffs,
                       disconnectivity_distance, evaluate_mission,
                       normalized_objective, objective_value, oracle_optimal,
                       rsrp_cdf)
from .errors import InfeasibleMissionError, PlanningFailure, ValidationError

__version__ = "0.1.0"
