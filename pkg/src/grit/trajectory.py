"""Trajectory ingestion and preprocessing into labelled training samples.

An episode is one recording: several agents observed on a common frame grid.
Preprocessing assigns each vehicle its ground-truth goal (the first goal
radius the trajectory enters), trims the trajectory at that frame, and takes
eleven samples at observation fractions 0.0 to 1.0 in steps of 0.1.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .errors import TrajectoryError
from .features import FeatureVector, extract_all
from .geometry import wrap_heading
from .scenario import (
    GoalSpec,
    GoalType,
    Scenario,
    assign_goal_type,
    reachable_goals,
)

FRACTION_GRID: Tuple[float, ...] = tuple(k / 10.0 for k in range(11))

_TIME_TOL = 1e-6


@dataclass(frozen=True)
class AgentState:
    """One observed frame of one agent. Heading is wrapped to (-pi, pi]."""

    time: float
    x: float
    y: float
    heading: float
    speed: float
    acceleration: float

    def __post_init__(self):
        for name in ("time", "x", "y", "heading", "speed", "acceleration"):
            if not math.isfinite(getattr(self, name)):
                raise TrajectoryError(f"non-finite {name} in agent state")
        if self.speed < 0.0:
            raise TrajectoryError("negative speed in agent state")
        object.__setattr__(self, "heading", wrap_heading(self.heading))


class Episode:
    """Recording of one or more agents on a shared frame grid."""

    def __init__(self, frame_rate: float, trajectories: Mapping[str, Sequence[AgentState]]):
        if not (math.isfinite(frame_rate) and frame_rate > 0):
            raise TrajectoryError("frame rate must be positive")
        self.frame_rate = float(frame_rate)
        self.trajectories: Dict[str, Tuple[AgentState, ...]] = {}
        dt = 1.0 / frame_rate
        for agent_id in trajectories:
            states = tuple(trajectories[agent_id])
            if not states:
                raise TrajectoryError(f"agent '{agent_id}' has no states")
            times = [s.time for s in states]
            for a, b in zip(times[:-1], times[1:]):
                if b <= a:
                    raise TrajectoryError(
                        f"agent '{agent_id}' has out-of-order timestamps"
                    )
                if abs((b - a) - dt) > _TIME_TOL:
                    raise TrajectoryError(
                        f"agent '{agent_id}' frame gap {b - a:.6f} does not match "
                        f"1/frame_rate = {dt:.6f}"
                    )
            self.trajectories[agent_id] = states
        self._times: Dict[str, List[float]] = {
            a: [s.time for s in t] for a, t in self.trajectories.items()
        }

    def agent_ids(self) -> List[str]:
        return sorted(self.trajectories)

    def state_at(self, agent_id: str, time: float) -> Optional[AgentState]:
        """State of an agent at a frame time, or None if not observed then."""
        times = self._times.get(agent_id)
        if not times:
            return None
        i = bisect_left(times, time - _TIME_TOL)
        if i < len(times) and abs(times[i] - time) <= _TIME_TOL:
            return self.trajectories[agent_id][i]
        return None


# -- CSV format --------------------------------------------------------------

_REQUIRED_COLUMNS = ("time", "agent_id", "x", "y", "heading")
_OPTIONAL_COLUMNS = ("speed", "acceleration")


def load_trajectories(path: str | Path, frame_rate: float) -> Episode:
    """Load one episode from CSV.

    Columns: time, agent_id, x, y, heading plus optional speed and
    acceleration. When the optional columns are absent, both are derived
    from positions. Rows of one agent must already be in time order.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise TrajectoryError(f"cannot read trajectory file: {exc}") from exc
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise TrajectoryError("trajectory file is empty") from None
    header = [h.strip() for h in header]
    for col in _REQUIRED_COLUMNS:
        if col not in header:
            raise TrajectoryError(f"missing required column '{col}'")
    idx = {col: header.index(col) for col in header}
    has_kin = all(c in header for c in _OPTIONAL_COLUMNS)

    rows: Dict[str, List[Tuple[float, float, float, float, float, float]]] = {}
    order: List[str] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            t = float(row[idx["time"]])
            agent = row[idx["agent_id"]].strip()
            x = float(row[idx["x"]])
            y = float(row[idx["y"]])
            heading = float(row[idx["heading"]])
            if has_kin:
                speed = float(row[idx["speed"]])
                accel = float(row[idx["acceleration"]])
            else:
                speed = 0.0
                accel = 0.0
        except (ValueError, IndexError) as exc:
            raise TrajectoryError(f"malformed row at line {lineno}: {exc}") from exc
        if not agent:
            raise TrajectoryError(f"empty agent id at line {lineno}")
        if agent not in rows:
            rows[agent] = []
            order.append(agent)
        prev = rows[agent]
        if prev and t <= prev[-1][0]:
            raise TrajectoryError(f"agent '{agent}' has out-of-order timestamps")
        prev.append((t, x, y, heading, speed, accel))

    trajectories: Dict[str, List[AgentState]] = {}
    for agent in order:
        states = [
            AgentState(t, x, y, h, max(s, 0.0) if not has_kin else s, a)
            for t, x, y, h, s, a in rows[agent]
        ]
        if not has_kin:
            states = derive_kinematics(states, frame_rate)
        trajectories[agent] = states
    return Episode(frame_rate, trajectories)


def save_trajectories(episode: Episode, path: str | Path) -> None:
    """Write an episode as CSV with full float precision."""
    lines = ["time,agent_id,x,y,heading,speed,acceleration"]
    for agent_id in episode.agent_ids():
        for s in episode.trajectories[agent_id]:
            lines.append(
                f"{s.time!r},{agent_id},{s.x!r},{s.y!r},"
                f"{s.heading!r},{s.speed!r},{s.acceleration!r}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


# -- kinematics ---------------------------------------------------------------


def _smooth5(values: List[float]) -> List[float]:
    """Centered 5-sample moving average, truncated at the boundaries."""
    n = len(values)
    out = []
    for i in range(n):
        lo = max(0, i - 2)
        hi = min(n, i + 3)
        out.append(sum(values[lo:hi]) / (hi - lo))
    return out


def derive_kinematics(
    states: Sequence[AgentState], frame_rate: float
) -> List[AgentState]:
    """Derive speed and acceleration from positions.

    Speed is the central finite difference of position (one-sided at the
    ends), acceleration the central difference of speed, and both are then
    smoothed with a 5-sample moving average. A single-frame trajectory gets
    zeros.
    """
    n = len(states)
    if n == 0:
        return []
    dt = 1.0 / frame_rate
    if n == 1:
        s = states[0]
        return [AgentState(s.time, s.x, s.y, s.heading, 0.0, 0.0)]
    xs = [s.x for s in states]
    ys = [s.y for s in states]

    def step(i: int, j: int) -> float:
        return math.hypot(xs[j] - xs[i], ys[j] - ys[i])

    speeds = [0.0] * n
    speeds[0] = step(0, 1) / dt
    speeds[-1] = step(n - 2, n - 1) / dt
    for i in range(1, n - 1):
        speeds[i] = step(i - 1, i + 1) / (2.0 * dt)

    accels = [0.0] * n
    accels[0] = (speeds[1] - speeds[0]) / dt
    accels[-1] = (speeds[-1] - speeds[-2]) / dt
    for i in range(1, n - 1):
        accels[i] = (speeds[i + 1] - speeds[i - 1]) / (2.0 * dt)

    speeds = [max(v, 0.0) for v in _smooth5(speeds)]
    accels = _smooth5(accels)
    return [
        AgentState(s.time, s.x, s.y, s.heading, v, a)
        for s, v, a in zip(states, speeds, accels)
    ]


# -- goal labelling and sampling ----------------------------------------------


def first_goal_entry(
    trajectory: Sequence[AgentState], scenario: Scenario
) -> Optional[Tuple[GoalSpec, int]]:
    """First goal whose radius the trajectory enters, with the frame index.

    Simultaneous entry into several goals resolves to scenario goal order.
    """
    for i, state in enumerate(trajectory):
        for goal in scenario.goals:
            if math.hypot(state.x - goal.x, state.y - goal.y) <= goal.radius:
                return goal, i
    return None


def ground_truth_goal(
    trajectory: Sequence[AgentState], scenario: Scenario
) -> Optional[GoalSpec]:
    hit = first_goal_entry(trajectory, scenario)
    return None if hit is None else hit[0]


def _round_half_down(x: float) -> int:
    """Nearest integer, ties toward the smaller value."""
    return int(math.ceil(x - 0.5))


def fraction_cutoffs(trim_index: int) -> List[int]:
    """Frame index per observation fraction, for a trajectory trimmed at
    trim_index (inclusive). Always 11 entries; duplicates possible."""
    return [_round_half_down(f * trim_index) for f in FRACTION_GRID]


def sample_points(trajectory: Sequence[AgentState], goal: GoalSpec) -> List[int]:
    """Deduplicated sample frame indices for one vehicle and its true goal.

    The trajectory is trimmed at the first frame inside the goal radius;
    fractions of the trimmed duration are rounded to the nearest frame with
    ties toward the earlier frame. Trajectories shorter than the grid yield
    every frame once.
    """
    trim = None
    for i, state in enumerate(trajectory):
        if math.hypot(state.x - goal.x, state.y - goal.y) <= goal.radius:
            trim = i
            break
    if trim is None:
        raise TrajectoryError("trajectory never enters the goal radius")
    return sorted(set(fraction_cutoffs(trim)))


def history_for(episode: Episode, vehicle_id: str, cutoff_index: int) -> Episode:
    """Episode truncated for one inference query.

    The subject keeps frames up to cutoff_index; every other agent keeps the
    frames between the subject's first observation and the cutoff time.
    """
    if vehicle_id not in episode.trajectories:
        raise TrajectoryError(f"unknown vehicle '{vehicle_id}'")
    subject = episode.trajectories[vehicle_id]
    if not (0 <= cutoff_index < len(subject)):
        raise TrajectoryError(
            f"frame {cutoff_index} out of range for vehicle '{vehicle_id}'"
        )
    t_first = subject[0].time - _TIME_TOL
    t_cut = subject[cutoff_index].time + _TIME_TOL
    out: Dict[str, Sequence[AgentState]] = {vehicle_id: subject[: cutoff_index + 1]}
    for agent_id, states in episode.trajectories.items():
        if agent_id == vehicle_id:
            continue
        kept = [s for s in states if t_first <= s.time <= t_cut]
        if kept:
            out[agent_id] = kept
    return Episode(episode.frame_rate, out)


# -- dataset assembly ----------------------------------------------------------


@dataclass(frozen=True)
class LabeledSample:
    episode_index: int
    agent_id: str
    frame_index: int
    time: float
    goal_id: str
    goal_type: GoalType
    features: FeatureVector
    label: bool


def build_datasets(
    episodes: Sequence[Episode],
    scenario: Scenario,
    agent_filter: Optional[Set[Tuple[int, str]]] = None,
) -> Dict[Tuple[str, GoalType], List[LabeledSample]]:
    """Labelled samples per (goal, goal type) pair.

    Vehicles that never reach a goal are skipped. Each sampled frame yields
    one sample per reachable goal, labelled by whether that goal is the
    vehicle's true goal. agent_filter, when given, restricts which vehicles
    produce samples; all vehicles still appear as traffic context.
    """
    buckets: Dict[Tuple[str, GoalType], List[LabeledSample]] = {}
    for ep_index, episode in enumerate(episodes):
        for agent_id in episode.agent_ids():
            if agent_filter is not None and (ep_index, agent_id) not in agent_filter:
                continue
            trajectory = episode.trajectories[agent_id]
            hit = first_goal_entry(trajectory, scenario)
            if hit is None:
                continue
            true_goal, _trim = hit
            for cutoff in sample_points(trajectory, true_goal):
                history = history_for(episode, agent_id, cutoff)
                state = trajectory[cutoff]
                routes = reachable_goals(state, scenario)
                if not routes:
                    continue
                features = extract_all(history, agent_id, routes, scenario)
                for route in routes:
                    gtype = assign_goal_type(state, route, scenario)
                    sample = LabeledSample(
                        episode_index=ep_index,
                        agent_id=agent_id,
                        frame_index=cutoff,
                        time=state.time,
                        goal_id=route.goal.goal_id,
                        goal_type=gtype,
                        features=features[route.goal.goal_id],
                        label=route.goal.goal_id == true_goal.goal_id,
                    )
                    buckets.setdefault((route.goal.goal_id, gtype), []).append(sample)
    return buckets
