"""World definition: grid geometry, base-station deployment, and all run configuration.

A Scenario is immutable after construction and fully serializable to a
human-editable YAML file, so runs are reproducible from (config, seed) alone.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np
import yaml

from .errors import ValidationError

DEFAULT_AREA_SIDE_M = 3000.0
DEFAULT_GRID_STEP_M = 20.0
DEFAULT_ALTITUDE_M = 80.0
DEFAULT_CARRIER_HZ = 1.8e9
DEFAULT_RSRP_THRESHOLD_DBM = -65.0
DEFAULT_WEIGHTS = (0.025, 0.90, 0.075)
ALT_WEIGHTS = (0.04, 0.80, 0.16)
DEFAULT_SPEED_MPS = 30.0
DEFAULT_ENERGY_BUDGET_J = 2.5e6


@dataclass(frozen=True)
class GridSpec:
    """Square planning grid at a fixed flight altitude.

    origin is the south-west corner in meters; size is the number of grid
    points per axis, so the covered area side is (size - 1) * step.
    """

    origin: tuple[float, float] = (0.0, 0.0)
    step: float = DEFAULT_GRID_STEP_M
    size: int = 151
    altitude: float = DEFAULT_ALTITUDE_M

    @property
    def area_side(self) -> float:
        return (self.size - 1) * self.step

    def contains(self, i: int, j: int) -> bool:
        return 0 <= i < self.size and 0 <= j < self.size

    def validate(self) -> None:
        if self.step <= 0:
            raise ValidationError(f"grid step must be positive, got {self.step}")
        if self.size < 2:
            raise ValidationError(f"grid needs at least 2 points per axis, got {self.size}")
        if self.altitude <= 0:
            raise ValidationError(f"flight altitude must be positive, got {self.altitude}")


@dataclass(frozen=True)
class Cell:
    """One sector of a base station site."""

    cell_id: int
    position: tuple[float, float, float]  # BS antenna location, z includes mast height (m)
    azimuth_deg: float
    downtilt_deg: float
    tx_power_dbm: float

    def validate(self) -> None:
        if not 0.0 <= self.azimuth_deg < 360.0:
            raise ValidationError(f"cell {self.cell_id}: azimuth {self.azimuth_deg} not in [0, 360)")
        if self.downtilt_deg < 0:
            raise ValidationError(f"cell {self.cell_id}: negative downtilt {self.downtilt_deg}")


@dataclass(frozen=True)
class TrainConfig:
    """Q-learning hyperparameters.

    epsilon_decay is applied once per taken action: eps <- max(eps_min, eps - decay).
    When None it is derived at training time as
    (epsilon_start - epsilon_min) / (0.7 * max_episodes * D) with D the octile
    step count between start and goal, i.e. exploration is spread over roughly
    70% of training assuming converged-length episodes.
    max_steps None means 8 * grid size per episode.
    """

    learning_rate: float = 0.01
    discount: float = 0.9
    epsilon_start: float = 0.99
    epsilon_min: float = 0.01
    epsilon_decay: float | None = None
    max_episodes: int = 10_000
    max_steps: int | None = None
    extended_state: bool = False
    seed: int = 0

    def validate(self) -> None:
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValidationError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if not 0.0 <= self.discount < 1.0:
            raise ValidationError(f"discount must be in [0, 1), got {self.discount}")
        if not 0.0 <= self.epsilon_min <= self.epsilon_start <= 1.0:
            raise ValidationError(
                f"need 0 <= epsilon_min <= epsilon_start <= 1, got "
                f"({self.epsilon_min}, {self.epsilon_start})")
        if self.max_episodes < 1:
            raise ValidationError("max_episodes must be >= 1")


@dataclass(frozen=True)
class DeploymentParams:
    """Synthetic base-station deployment knobs (the measured layout is unavailable)."""

    area_side: float = DEFAULT_AREA_SIDE_M
    step: float = DEFAULT_GRID_STEP_M
    altitude: float = DEFAULT_ALTITUDE_M
    three_sector_sites: int = 20
    two_sector_sites: int = 2
    min_separation: float = 400.0
    bs_height: float = 25.0
    downtilt_deg: float = 6.0
    tx_power_dbm: float = 46.0
    max_site_attempts: int = 10_000

    @property
    def total_cells(self) -> int:
        return 3 * self.three_sector_sites + 2 * self.two_sector_sites


THREE_SECTOR_AZIMUTHS = (0.0, 120.0, 240.0)
TWO_SECTOR_AZIMUTHS = (0.0, 180.0)


@dataclass(frozen=True)
class Scenario:
    """Full description of one simulated delivery mission world."""

    grid: GridSpec
    cells: tuple[Cell, ...]
    carrier_freq: float
    rsrp_threshold: float
    weights: tuple[float, float, float]  # (w_en, w_sig, w_ho), sums to 1
    start: tuple[int, int]
    goal: tuple[int, int]
    speed: float
    energy_budget: float  # usable capacity minus emergency reserve (J)
    rl: TrainConfig
    seed: int
    channel: "ChannelParams" = None  # type: ignore[assignment]
    power: "PowerParams" = None  # type: ignore[assignment]

    def __post_init__(self):
        # Late defaults avoid an import cycle with the radio/energy modules.
        if self.channel is None:
            from .radio import ChannelParams
            object.__setattr__(self, "channel", ChannelParams(carrier_freq=self.carrier_freq))
        if self.power is None:
            from .energy import PowerParams
            object.__setattr__(self, "power", PowerParams())

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    def validate(self) -> "Scenario":
        self.grid.validate()
        self.rl.validate()
        if not self.cells:
            raise ValidationError("scenario has no cells (empty deployment rejected)")
        ids = [c.cell_id for c in self.cells]
        if sorted(ids) != list(range(len(ids))):
            raise ValidationError("cell ids must be unique and dense starting at 0")
        by_site: dict[tuple[float, float, float], list[float]] = {}
        for c in self.cells:
            c.validate()
            by_site.setdefault(c.position, []).append(c.azimuth_deg)
        for pos, azs in by_site.items():
            if len(azs) != len(set(azs)):
                raise ValidationError(f"site {pos} has duplicate sector azimuths {azs}")
        if abs(sum(self.weights) - 1.0) > 1e-9 or any(w < 0 for w in self.weights):
            raise ValidationError(f"weights must be nonnegative and sum to 1, got {self.weights}")
        if self.start == self.goal:
            raise ValidationError("start and goal must differ")
        for name, (i, j) in (("start", self.start), ("goal", self.goal)):
            if not self.grid.contains(i, j):
                raise ValidationError(f"{name} {(i, j)} is off-grid for size {self.grid.size}")
        if self.speed <= 0:
            raise ValidationError(f"speed must be positive, got {self.speed}")
        if self.energy_budget <= 0:
            raise ValidationError(f"energy budget must be positive, got {self.energy_budget}")
        if self.carrier_freq <= 0:
            raise ValidationError(f"carrier frequency must be positive, got {self.carrier_freq}")
        if self.channel.carrier_freq != self.carrier_freq:
            raise ValidationError("channel.carrier_freq disagrees with scenario.carrier_freq")
        self.channel.validate()
        self.power.validate()
        return self


def grid_to_coords(i: int, j: int, grid: GridSpec) -> tuple[float, float, float]:
    """Map grid indices to 3D coordinates (m) at the flight altitude."""
    if not grid.contains(i, j):
        raise ValidationError(f"grid index {(i, j)} out of range for size {grid.size}")
    return (grid.origin[0] + i * grid.step, grid.origin[1] + j * grid.step, grid.altitude)


def coords_to_grid(x: float, y: float, grid: GridSpec) -> tuple[int, int]:
    """Inverse of grid_to_coords; exact round-trip for on-grid points."""
    i = round((x - grid.origin[0]) / grid.step)
    j = round((y - grid.origin[1]) / grid.step)
    if not grid.contains(i, j):
        raise ValidationError(f"coordinates ({x}, {y}) fall outside the grid")
    return i, j


def _sample_sites(rng: np.random.Generator, params: DeploymentParams) -> list[tuple[float, float]]:
    """Rejection-sample site locations with a minimum inter-site distance."""
    n_sites = params.three_sector_sites + params.two_sector_sites
    sites: list[tuple[float, float]] = []
    side = params.area_side
    for _ in range(n_sites):
        for _attempt in range(params.max_site_attempts):
            x = float(rng.uniform(0.0, side))
            y = float(rng.uniform(0.0, side))
            if all(math.hypot(x - sx, y - sy) >= params.min_separation for sx, sy in sites):
                sites.append((x, y))
                break
        else:
            raise ValidationError(
                f"could not place {n_sites} sites with separation "
                f"{params.min_separation} m in a {side} m square (placed {len(sites)})")
    return sites


def generate_scenario(seed: int, params: DeploymentParams | None = None) -> Scenario:
    """Build a reproducible synthetic scenario from a seed and deployment parameters."""
    params = params or DeploymentParams()
    if params.total_cells < 1:
        raise ValidationError("deployment produces no cells")
    rng = np.random.default_rng(seed)
    sites = _sample_sites(rng, params)

    cells: list[Cell] = []
    for idx, (x, y) in enumerate(sites):
        azimuths = THREE_SECTOR_AZIMUTHS if idx < params.three_sector_sites else TWO_SECTOR_AZIMUTHS
        for az in azimuths:
            cells.append(Cell(
                cell_id=len(cells),
                position=(x, y, params.bs_height),
                azimuth_deg=az,
                downtilt_deg=params.downtilt_deg,
                tx_power_dbm=params.tx_power_dbm,
            ))

    size = int(round(params.area_side / params.step)) + 1
    grid = GridSpec(origin=(0.0, 0.0), step=params.step, size=size, altitude=params.altitude)

    from .radio import ChannelParams
    from .energy import PowerParams

    scenario = Scenario(
        grid=grid,
        cells=tuple(cells),
        carrier_freq=DEFAULT_CARRIER_HZ,
        rsrp_threshold=DEFAULT_RSRP_THRESHOLD_DBM,
        weights=DEFAULT_WEIGHTS,
        start=(0, 0),
        goal=(size - 1, size - 1),
        speed=DEFAULT_SPEED_MPS,
        energy_budget=DEFAULT_ENERGY_BUDGET_J,
        rl=TrainConfig(seed=seed),
        seed=seed,
        channel=ChannelParams(carrier_freq=DEFAULT_CARRIER_HZ),
        power=PowerParams(),
    )
    return scenario.validate()


# ---------------------------------------------------------------------------
# Serialization (YAML, schema documented in README)
# ---------------------------------------------------------------------------

def scenario_to_dict(s: Scenario) -> dict:
    return {
        "seed": s.seed,
        "grid": {
            "origin": [float(s.grid.origin[0]), float(s.grid.origin[1])],
            "step": float(s.grid.step),
            "size": int(s.grid.size),
            "altitude": float(s.grid.altitude),
        },
        "carrier_freq_hz": float(s.carrier_freq),
        "rsrp_threshold_dbm": float(s.rsrp_threshold),
        "weights": {
            "energy": float(s.weights[0]),
            "signal": float(s.weights[1]),
            "handoff": float(s.weights[2]),
        },
        "start": [int(s.start[0]), int(s.start[1])],
        "goal": [int(s.goal[0]), int(s.goal[1])],
        "speed_mps": float(s.speed),
        "energy_budget_j": float(s.energy_budget),
        "rl": {k: v for k, v in asdict(s.rl).items()},
        "channel": {k: float(v) for k, v in asdict(s.channel).items()},
        "power": {k: float(v) for k, v in asdict(s.power).items()},
        "cells": [
            {
                "id": c.cell_id,
                "position": [float(p) for p in c.position],
                "azimuth_deg": float(c.azimuth_deg),
                "downtilt_deg": float(c.downtilt_deg),
                "tx_power_dbm": float(c.tx_power_dbm),
            }
            for c in s.cells
        ],
    }


def scenario_from_dict(d: dict) -> Scenario:
    from .radio import ChannelParams
    from .energy import PowerParams

    try:
        grid = GridSpec(
            origin=(float(d["grid"]["origin"][0]), float(d["grid"]["origin"][1])),
            step=float(d["grid"]["step"]),
            size=int(d["grid"]["size"]),
            altitude=float(d["grid"]["altitude"]),
        )
        cells = tuple(
            Cell(
                cell_id=int(c["id"]),
                position=tuple(float(p) for p in c["position"]),
                azimuth_deg=float(c["azimuth_deg"]),
                downtilt_deg=float(c["downtilt_deg"]),
                tx_power_dbm=float(c["tx_power_dbm"]),
            )
            for c in d["cells"]
        )
        rl_d = dict(d.get("rl", {}))
        if rl_d.get("epsilon_decay") is not None:
            rl_d["epsilon_decay"] = float(rl_d["epsilon_decay"])
        if rl_d.get("max_steps") is not None:
            rl_d["max_steps"] = int(rl_d["max_steps"])
        scenario = Scenario(
            grid=grid,
            cells=cells,
            carrier_freq=float(d["carrier_freq_hz"]),
            rsrp_threshold=float(d["rsrp_threshold_dbm"]),
            weights=(
                float(d["weights"]["energy"]),
                float(d["weights"]["signal"]),
                float(d["weights"]["handoff"]),
            ),
            start=(int(d["start"][0]), int(d["start"][1])),
            goal=(int(d["goal"][0]), int(d["goal"][1])),
            speed=float(d["speed_mps"]),
            energy_budget=float(d["energy_budget_j"]),
            rl=TrainConfig(**rl_d),
            seed=int(d["seed"]),
            channel=ChannelParams(**d["channel"]) if "channel" in d else None,
            power=PowerParams(**d["power"]) if "power" in d else None,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed scenario data: {exc!r}") from exc
    return scenario.validate()


def scenario_to_yaml(s: Scenario) -> str:
    """Canonical YAML form; byte-stable for a fixed scenario."""
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=True, default_flow_style=False)


def scenario_checksum(s: Scenario) -> bytes:
    """SHA-256 over the canonical YAML, used to pair map files with scenarios."""
    return hashlib.sha256(scenario_to_yaml(s).encode()).digest()


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w") as fh:
        fh.write(scenario_to_yaml(s))


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValidationError(f"scenario file {path} does not contain a mapping")
    return scenario_from_dict(data)


def octile_steps(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    """(diagonal, cardinal) step counts of a minimal 8-connected path a -> b."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return min(dx, dy), abs(dx - dy)


def octile_distance(a: tuple[int, int], b: tuple[int, int], step: float) -> float:
    """Length in meters of a minimal 8-connected grid path between two points."""
    diag, card = octile_steps(a, b)
    return step * (diag * math.sqrt(2.0) + card)
