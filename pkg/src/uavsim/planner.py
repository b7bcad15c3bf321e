"""Joint trajectory planning and cell association via tabular Q-learning.

State: grid position plus serving cell; an action pairs one of eight motion
directions with the candidate rank (0 = strongest) to associate with at the
destination point. Per-step reward is

    W = w_en * W_mo + w_sig * W_sig + w_ho * W_ho             in [-1, 0]

with W_mo = -1/sqrt(2) for cardinal moves and -1 for diagonal ones, W_ho = -1
iff the serving cell changes, and W_sig = -1 iff the serving-cell RSRP at the
arrival point is below the coverage threshold.

The default Q-table is indexed by position only, matching the published
table shape; the handoff term then depends on history outside the table
state. extended_state=True adds the serving rank to the index, restoring the
Markov property (used by the exact-oracle equivalence checks).
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyBudget, available_energy, segment_energy
from .errors import InfeasibleMissionError, PlanningFailure, ValidationError
from .radio import RadioMap, is_covered
from .scenario import GridSpec, Scenario, TrainConfig, grid_to_coords, octile_steps

DIR_NAMES = ("E", "W", "N", "S", "NE", "NW", "SE", "SW")
DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1))
IS_DIAGONAL = (False, False, False, False, True, True, True, True)
INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class State:
    """UAV position (grid indices) with its serving cell (map rank and id)."""

    i: int
    j: int
    rank: int
    cell_id: int


@dataclass(frozen=True)
class Action:
    direction: int   # index into DIRECTIONS
    cell_rank: int

    @property
    def name(self) -> str:
        return DIR_NAMES[self.direction]


@dataclass
class Trajectory:
    """Ordered waypoints with the serving cell id and its RSRP at each one."""

    waypoints: list[tuple[int, int]]
    cells: list[int]
    rsrps: list[float]

    def __len__(self) -> int:
        return len(self.waypoints)

    def validate(self) -> "Trajectory":
        if not (len(self.waypoints) == len(self.cells) == len(self.rsrps)):
            raise ValidationError("trajectory waypoint/cell/rsrp lengths differ")
        if not self.waypoints:
            raise ValidationError("trajectory is empty")
        for (i0, j0), (i1, j1) in zip(self.waypoints, self.waypoints[1:]):
            if max(abs(i1 - i0), abs(j1 - j0)) != 1:
                raise ValidationError(
                    f"consecutive waypoints {(i0, j0)}->{(i1, j1)} are not 8-neighbors")
        return self

    def coords(self, grid: GridSpec) -> list[tuple[float, float]]:
        return [(grid.origin[0] + i * grid.step, grid.origin[1] + j * grid.step)
                for i, j in self.waypoints]

    def segment_lengths(self, step: float) -> list[float]:
        out = []
        for (i0, j0), (i1, j1) in zip(self.waypoints, self.waypoints[1:]):
            diag = i1 != i0 and j1 != j0
            out.append(step * math.sqrt(2.0) if diag else step)
        return out

    def total_distance(self, step: float) -> float:
        return float(sum(self.segment_lengths(step)))

    def step_counts(self, threshold: float) -> tuple[int, int, int, int]:
        """(cardinal, diagonal, uncovered-arrival, handoff) step counts."""
        n_card = n_diag = n_unc = n_ho = 0
        for k in range(1, len(self.waypoints)):
            i0, j0 = self.waypoints[k - 1]
            i1, j1 = self.waypoints[k]
            if i1 != i0 and j1 != j0:
                n_diag += 1
            else:
                n_card += 1
            if not is_covered(self.rsrps[k], threshold):
                n_unc += 1
            if self.cells[k] != self.cells[k - 1]:
                n_ho += 1
        return n_card, n_diag, n_unc, n_ho


def normalized_cost(counts: tuple[int, int, int, int],
                    weights: tuple[float, float, float]) -> float:
    """Unit-free mission cost (negated cumulative reward) from step counts."""
    n_card, n_diag, n_unc, n_ho = counts
    w_en, w_sig, w_ho = weights
    return w_en * (n_card * INV_SQRT2 + n_diag) + w_sig * n_unc + w_ho * n_ho


def write_trajectory_csv(traj: Trajectory, grid: GridSpec, path) -> None:
    with open(path, "w") as fh:
        fh.write("step,i,j,x_m,y_m,cell_id,rsrp_dbm\n")
        for k, ((i, j), c, r) in enumerate(zip(traj.waypoints, traj.cells, traj.rsrps)):
            x, y, _ = grid_to_coords(i, j, grid)
            fh.write(f"{k},{i},{j},{x:.3f},{y:.3f},{c},{r:.6f}\n")


def read_trajectory_csv(path) -> Trajectory:
    waypoints, cells, rsrps = [], [], []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[:3] != ["step", "i", "j"]:
            raise ValidationError(f"{path} is not a trajectory CSV")
        for line in fh:
            parts = line.strip().split(",")
            waypoints.append((int(parts[1]), int(parts[2])))
            cells.append(int(parts[5]))
            rsrps.append(float(parts[6]))
    return Trajectory(waypoints, cells, rsrps).validate()


# ---------------------------------------------------------------------------
# Action space helpers
# ---------------------------------------------------------------------------

def legal_directions(i: int, j: int, size: int) -> list[int]:
    out = []
    for d, (di, dj) in enumerate(DIRECTIONS):
        if 0 <= i + di < size and 0 <= j + dj < size:
            out.append(d)
    return out


class _ActionTables:
    """Precomputed per-position legal action indices for a size x size grid."""

    def __init__(self, size: int, ranks: int):
        self.size = size
        self.ranks = ranks
        self.n_actions = 8 * ranks
        self.di = np.repeat([d[0] for d in DIRECTIONS], ranks)
        self.dj = np.repeat([d[1] for d in DIRECTIONS], ranks)
        self.rank = np.tile(np.arange(ranks), 8)
        self.diagonal = np.repeat(IS_DIAGONAL, ranks)
        self.legal: list[np.ndarray] = []
        self.full: list[bool] = []
        for i in range(size):
            for j in range(size):
                dirs = legal_directions(i, j, size)
                acts = np.array([d * ranks + r for d in dirs for r in range(ranks)],
                                dtype=np.intp)
                self.legal.append(acts)
                self.full.append(len(acts) == self.n_actions)


@dataclass(eq=False)
class QTable:
    """Dense Q-values; (size, size, 8, ranks) or (size, size, ranks, 8, ranks) extended."""

    values: np.ndarray
    extended: bool
    size: int
    ranks: int
    seed: int = 0
    episodes: int = 0

    @classmethod
    def zeros(cls, size: int, ranks: int, extended: bool = False, seed: int = 0) -> "QTable":
        shape = (size, size, ranks, 8, ranks) if extended else (size, size, 8, ranks)
        return cls(np.zeros(shape), extended, size, ranks, seed=seed)

    def rows(self) -> np.ndarray:
        """(num_states, 8 * ranks) view of the same memory."""
        return self.values.reshape(-1, 8 * self.ranks)

    def row_index(self, i: int, j: int, rank: int) -> int:
        pos = i * self.size + j
        return pos * self.ranks + rank if self.extended else pos


_QTAB_MAGIC = b"QTAB\x01"


def save_qtable(q: QTable, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_QTAB_MAGIC)
        fh.write(struct.pack("<BIIqq", int(q.extended), q.size, q.ranks,
                             q.seed, q.episodes))
        fh.write(np.ascontiguousarray(q.values).tobytes())


def load_qtable(path) -> QTable:
    with open(path, "rb") as fh:
        if fh.read(5) != _QTAB_MAGIC:
            raise ValidationError(f"{path} is not a Q-table file")
        extended, size, ranks, seed, episodes = struct.unpack("<BIIqq", fh.read(25))
        shape = (size, size, ranks, 8, ranks) if extended else (size, size, 8, ranks)
        vals = np.frombuffer(fh.read(), dtype=np.float64)
        if vals.size != int(np.prod(shape)):
            raise ValidationError(f"Q-table file {path} is truncated")
        return QTable(vals.reshape(shape).copy(), bool(extended), size, ranks,
                      seed=seed, episodes=episodes)


# ---------------------------------------------------------------------------
# MDP primitives
# ---------------------------------------------------------------------------

def start_state(rmap: RadioMap, position: tuple[int, int]) -> State:
    """Initial state: serving cell is the strongest candidate at the position."""
    i, j = position
    return State(i, j, 0, int(rmap.cell_ids[i, j, 0]))


def step(state: State, action: Action, rmap: RadioMap) -> State:
    """Deterministic transition: move one grid step, associate with the
    candidate at action.cell_rank of the destination point."""
    if not 0 <= action.cell_rank < rmap.mprime:
        raise ValidationError(f"cell rank {action.cell_rank} out of range")
    di, dj = DIRECTIONS[action.direction]
    ni, nj = state.i + di, state.j + dj
    if not rmap.grid.contains(ni, nj):
        raise ValidationError(
            f"direction {DIR_NAMES[action.direction]} leaves the grid from "
            f"({state.i}, {state.j})")
    return State(ni, nj, action.cell_rank, int(rmap.cell_ids[ni, nj, action.cell_rank]))


def reward(prev: State, next_state: State, rmap: RadioMap,
           weights: tuple[float, float, float], threshold: float) -> float:
    """Weighted penalty for one transition; always in [-1, 0]."""
    di = next_state.i - prev.i
    dj = next_state.j - prev.j
    if max(abs(di), abs(dj)) != 1:
        raise ValidationError("states are not grid-adjacent")
    w_en, w_sig, w_ho = weights
    w_mo = -1.0 if (di != 0 and dj != 0) else -INV_SQRT2
    w_handoff = 0.0 if next_state.cell_id == prev.cell_id else -1.0
    covered = is_covered(
        float(rmap.rsrp_dbm[next_state.i, next_state.j, next_state.rank]), threshold)
    w_signal = 0.0 if covered else -1.0
    return w_en * w_mo + w_sig * w_signal + w_ho * w_handoff


def q_update(q: QTable, state: State, action: Action, reward_value: float,
             next_state: State, alpha: float, beta: float) -> float:
    """Bellman update Q <- (1-a) Q + a (r + b max_a' Q(s', a')); returns the new value."""
    rows = q.rows()
    row = q.row_index(state.i, state.j, state.rank)
    a = action.direction * q.ranks + action.cell_rank
    nrow = q.row_index(next_state.i, next_state.j, next_state.rank)
    legal = [d * q.ranks + r
             for d in legal_directions(next_state.i, next_state.j, q.size)
             for r in range(q.ranks)]
    best_next = float(rows[nrow, legal].max())
    new = (1.0 - alpha) * rows[row, a] + alpha * (reward_value + beta * best_next)
    rows[row, a] = new
    return float(new)


def select_action(q: QTable, state: State, epsilon: float, rng) -> Action:
    """Epsilon-greedy over legal actions; greedy ties break to the lowest index."""
    dirs = legal_directions(state.i, state.j, q.size)
    legal = [d * q.ranks + r for d in dirs for r in range(q.ranks)]
    if not legal:
        raise PlanningFailure(f"no legal action at ({state.i}, {state.j})")
    kappa = rng.random()
    if kappa < epsilon:
        a = legal[int(rng.integers(len(legal)))]
    else:
        rows = q.rows()
        row = q.row_index(state.i, state.j, state.rank)
        vals = rows[row, legal]
        a = legal[int(np.argmax(vals))]
    return Action(a // q.ranks, a % q.ranks)


# ---------------------------------------------------------------------------
# Training loop (Algorithm: episode loop with per-action epsilon decay)
# ---------------------------------------------------------------------------

@dataclass
class TrainLog:
    episode: np.ndarray
    cumulative_reward: np.ndarray
    steps: np.ndarray
    reached_goal: np.ndarray
    energy_j: np.ndarray
    epsilon_end: np.ndarray  # in-memory trace only, not part of the CSV schema

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("episode,cumulative_reward,steps,reached_goal,energy_J\n")
            for k in range(len(self.episode)):
                fh.write(f"{self.episode[k]},{self.cumulative_reward[k]:.9f},"
                         f"{self.steps[k]},{int(self.reached_goal[k])},"
                         f"{self.energy_j[k]:.3f}\n")


@dataclass
class TrainResult:
    qtable: QTable
    best: Trajectory
    log: TrainLog
    best_cost: float
    best_episode: int
    weights: tuple[float, float, float]


def resolve_config(cfg: TrainConfig, scenario: Scenario,
                   e_avail: float, e_cardinal: float) -> tuple[float, int]:
    """Fill in derived defaults: (epsilon_decay, max_steps).

    max_steps defaults to the number of cheapest (cardinal) steps the energy
    budget allows, so episodes normally end at the goal or by energy
    exhaustion, never earlier. epsilon_decay defaults to spreading the decay
    over the expected total action count of 70% of the episodes, estimating
    the converged episode length by the start-goal octile step count.
    """
    if cfg.max_steps is not None:
        max_steps = cfg.max_steps
    else:
        max_steps = max(8 * scenario.grid.size, int(e_avail / e_cardinal) + 1)
    if cfg.epsilon_decay is not None:
        eps_dec = cfg.epsilon_decay
    else:
        diag, card = octile_steps(scenario.start, scenario.goal)
        horizon = 0.7 * cfg.max_episodes * max(diag + card, 1)
        eps_dec = (cfg.epsilon_start - cfg.epsilon_min) / horizon
    return eps_dec, max_steps


def _episode_loop(rows, ids_flat, cov_flat, legal_acts, legal_cnt,
                  a_di, a_dj, a_rank, a_diag, move_cost, seg_e,
                  size, ranks, extended, start_i, start_j, goal_i, goal_j,
                  alpha, beta, eps0, eps_min, eps_dec,
                  max_episodes, max_steps, e_avail, w_en, w_sig, w_ho,
                  log_reward, log_steps, log_reached, log_energy, log_eps,
                  ti, tj, tr, best_i, best_j, best_r, rng):
    """Episode loop shared by the numba-compiled and pure-Python paths.

    Returns (best_episode, best_len, n_card, n_diag, n_unc, n_ho) of the best
    feasible episode, best_episode = -1 when none reached the goal in budget.
    """
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    n_actions = 8 * ranks
    eps = eps0
    best_ep = -1
    best_len = 0
    best_obj = np.inf
    bc = bd = bu = bh = 0
    for ep in range(max_episodes):
        i = start_i
        j = start_j
        rank = 0
        pos = i * size + j
        cell = ids_flat[pos, 0]
        ti[0] = i
        tj[0] = j
        tr[0] = 0
        cum_r = 0.0
        energy = 0.0
        steps = 0
        n_card = 0
        n_diag = 0
        n_unc = 0
        n_ho = 0
        reached = False
        while True:
            srow = pos * ranks + rank if extended else pos
            cnt = legal_cnt[pos]
            if rng.random() < eps:
                a = legal_acts[pos, int(rng.random() * cnt)]
            else:
                a = legal_acts[pos, 0]
                best_v = rows[srow, a]
                for t in range(1, cnt):
                    cand = legal_acts[pos, t]
                    v = rows[srow, cand]
                    if v > best_v:
                        best_v = v
                        a = cand
            rk = a_rank[a]
            ni = i + a_di[a]
            nj = j + a_dj[a]
            npos = ni * size + nj
            ncell = ids_flat[npos, rk]
            cost = move_cost[a]
            if a_diag[a]:
                n_diag += 1
            else:
                n_card += 1
            if not cov_flat[npos, rk]:
                cost += w_sig
                n_unc += 1
            if ncell != cell:
                cost += w_ho
                n_ho += 1
            r = -cost

            nrow = npos * ranks + rk if extended else npos
            ncnt = legal_cnt[npos]
            best_next = rows[nrow, legal_acts[npos, 0]]
            for t in range(1, ncnt):
                v = rows[nrow, legal_acts[npos, t]]
                if v > best_next:
                    best_next = v
            qsa = rows[srow, a]
            rows[srow, a] = qsa + alpha * (r + beta * best_next - qsa)

            eps = eps - eps_dec
            if eps < eps_min:
                eps = eps_min

            cum_r += r
            energy += seg_e[a]
            steps += 1
            i = ni
            j = nj
            pos = npos
            rank = rk
            cell = ncell
            ti[steps] = i
            tj[steps] = j
            tr[steps] = rk
            if i == goal_i and j == goal_j:
                reached = True
                break
            if steps >= max_steps or energy > e_avail:
                break

        log_reward[ep] = cum_r
        log_steps[ep] = steps
        log_reached[ep] = reached
        log_energy[ep] = energy
        log_eps[ep] = eps

        if reached and energy <= e_avail:
            obj = w_en * (n_card * inv_sqrt2 + n_diag) + w_sig * n_unc + w_ho * n_ho
            if obj < best_obj:
                best_obj = obj
                best_ep = ep
                best_len = steps + 1
                bc = n_card
                bd = n_diag
                bu = n_unc
                bh = n_ho
                for t in range(best_len):
                    best_i[t] = ti[t]
                    best_j[t] = tj[t]
                    best_r[t] = tr[t]
    return best_ep, best_len, bc, bd, bu, bh


def _get_episode_loop():
    """Numba-compile the episode loop when available; fall back to pure Python."""
    global _COMPILED_LOOP
    if _COMPILED_LOOP is None:
        try:
            import numba
            _COMPILED_LOOP = numba.njit(cache=True, fastmath=False)(_episode_loop)
        except ImportError:
            _COMPILED_LOOP = _episode_loop
    return _COMPILED_LOOP


_COMPILED_LOOP = None


def train(scenario: Scenario, rmap: RadioMap, *,
          weights: tuple[float, float, float] | None = None,
          force_rank0: bool = False,
          config: TrainConfig | None = None) -> TrainResult:
    """Run Q-learning episodes and return the table, the best feasible episode
    trajectory, and the per-episode log.

    Episodes start at the scenario start point (serving the strongest cell),
    end on reaching the goal, and truncate at the step cap or when cumulative
    segment energy exceeds the available budget. Epsilon decays once per taken
    action. The best episode is the goal-reaching, energy-feasible one with
    the lowest unit-free mission cost.
    """
    cfg = config or scenario.rl
    cfg.validate()
    w = tuple(weights) if weights is not None else tuple(scenario.weights)
    if len(w) != 3 or abs(sum(w) - 1.0) > 1e-9 or any(x < 0 for x in w):
        raise ValidationError(f"weights must be nonnegative and sum to 1, got {w}")
    w_en, w_sig, w_ho = w

    g = rmap.grid
    size = g.size
    ranks = 1 if force_rank0 else rmap.mprime
    start = scenario.start
    goal = scenario.goal
    for name, (i, j) in (("start", start), ("goal", goal)):
        if not g.contains(i, j):
            raise ValidationError(f"{name} {(i, j)} not on the map grid")
        if not is_covered(float(rmap.rsrp_dbm[i, j, 0]), scenario.rsrp_threshold):
            raise InfeasibleMissionError(f"{name} point {(i, j)} is not covered")
    e_avail = available_energy(
        EnergyBudget(capacity=scenario.energy_budget, reserve=0.0,
                     speed=scenario.speed, altitude=g.altitude),
        scenario.power)
    e_card = segment_energy(scenario.speed, g.step, scenario.power)
    e_diag = segment_energy(scenario.speed, g.step * math.sqrt(2.0), scenario.power)
    eps_dec, max_steps = resolve_config(cfg, scenario, e_avail, e_card)

    tables = _ActionTables(size, ranks)
    n_actions = tables.n_actions
    n_pos = size * size
    legal_acts = np.zeros((n_pos, n_actions), dtype=np.int64)
    legal_cnt = np.zeros(n_pos, dtype=np.int64)
    for p, acts in enumerate(tables.legal):
        legal_cnt[p] = len(acts)
        legal_acts[p, :len(acts)] = acts

    q = QTable.zeros(size, ranks, extended=cfg.extended_state, seed=cfg.seed)
    ids_flat = np.ascontiguousarray(rmap.cell_ids.reshape(n_pos, rmap.mprime))
    cov_flat = np.ascontiguousarray(
        (rmap.rsrp_dbm >= scenario.rsrp_threshold).reshape(n_pos, rmap.mprime))
    move_cost = np.where(tables.diagonal, w_en * 1.0, w_en * INV_SQRT2)
    seg_e = np.where(tables.diagonal, e_diag, e_card)

    log_reward = np.zeros(cfg.max_episodes)
    log_steps = np.zeros(cfg.max_episodes, dtype=np.int64)
    log_reached = np.zeros(cfg.max_episodes, dtype=np.bool_)
    log_energy = np.zeros(cfg.max_episodes)
    log_eps = np.zeros(cfg.max_episodes)
    ti = np.zeros(max_steps + 1, dtype=np.int64)
    tj = np.zeros(max_steps + 1, dtype=np.int64)
    tr = np.zeros(max_steps + 1, dtype=np.int64)
    best_i = np.zeros(max_steps + 1, dtype=np.int64)
    best_j = np.zeros(max_steps + 1, dtype=np.int64)
    best_r = np.zeros(max_steps + 1, dtype=np.int64)

    rng = np.random.default_rng(cfg.seed)
    loop = _get_episode_loop()
    best_ep, best_len, bc, bd, bu, bh = loop(
        q.rows(), ids_flat, cov_flat, legal_acts, legal_cnt,
        np.array([d[0] for d in DIRECTIONS]).repeat(ranks),
        np.array([d[1] for d in DIRECTIONS]).repeat(ranks),
        tables.rank.astype(np.int64), tables.diagonal.astype(np.bool_),
        move_cost, seg_e,
        size, ranks, cfg.extended_state, start[0], start[1], goal[0], goal[1],
        cfg.learning_rate, cfg.discount, cfg.epsilon_start, cfg.epsilon_min,
        eps_dec, cfg.max_episodes, max_steps, e_avail, w_en, w_sig, w_ho,
        log_reward, log_steps, log_reached, log_energy, log_eps,
        ti, tj, tr, best_i, best_j, best_r, rng)

    q.episodes = cfg.max_episodes
    log = TrainLog(np.arange(cfg.max_episodes), log_reward, log_steps,
                   log_reached, log_energy, log_eps)
    if best_ep < 0:
        raise PlanningFailure(
            f"no feasible episode in {cfg.max_episodes} episodes "
            f"(goal reached in {int(log_reached.sum())}, max steps {max_steps}, "
            f"available energy {e_avail:.0f} J)")

    wps = [(int(best_i[t]), int(best_j[t])) for t in range(best_len)]
    cells = [int(rmap.cell_ids[i, j, int(best_r[t])])
             for t, (i, j) in enumerate(wps)]
    rsrps = [float(rmap.rsrp_dbm[i, j, int(best_r[t])])
             for t, (i, j) in enumerate(wps)]
    best_traj = Trajectory(wps, cells, rsrps).validate()
    best_cost = normalized_cost((bc, bd, bu, bh), w)
    return TrainResult(qtable=q, best=best_traj, log=log,
                       best_cost=best_cost, best_episode=int(best_ep), weights=w)


def rollout(q: QTable, scenario: Scenario, rmap: RadioMap,
            max_steps: int | None = None) -> Trajectory:
    """Greedy (epsilon = 0) walk from start until goal or the step cap.

    Raises PlanningFailure with the partial trajectory attached when the
    deterministic policy revisits a state (it would loop forever).
    """
    if q.ranks > rmap.mprime:
        raise ValidationError("Q-table has more ranks than the radio map")
    g = rmap.grid
    size = g.size
    if q.size != size:
        raise ValidationError("Q-table grid size does not match the map")
    ranks = q.ranks
    tables = _ActionTables(size, ranks)
    rows = q.rows()
    cap = max_steps if max_steps is not None else 8 * size

    i, j = scenario.start
    rank = 0
    cell = int(rmap.cell_ids[i, j, 0])
    wps = [(i, j)]
    cells = [cell]
    rsrps = [float(rmap.rsrp_dbm[i, j, 0])]
    seen: set[int] = set()
    goal = tuple(scenario.goal)

    for _ in range(cap):
        if (i, j) == goal:
            break
        pos = i * size + j
        srow = pos * ranks + rank if q.extended else pos
        if srow in seen:
            exc = PlanningFailure(
                f"greedy policy revisited state (i={i}, j={j}, rank={rank}); "
                "the learned table does not reach the goal")
            exc.trajectory = Trajectory(wps, cells, rsrps)
            raise exc
        seen.add(srow)
        acts = tables.legal[pos]
        if tables.full[pos]:
            a = int(rows[srow].argmax())
        else:
            a = int(acts[int(rows[srow, acts].argmax())])
        rank = int(tables.rank[a])
        i += int(tables.di[a])
        j += int(tables.dj[a])
        cell = int(rmap.cell_ids[i, j, rank])
        wps.append((i, j))
        cells.append(cell)
        rsrps.append(float(rmap.rsrp_dbm[i, j, rank]))
    return Trajectory(wps, cells, rsrps).validate()
