"""Bayesian goal posteriors from reachability, priors, and tree likelihoods."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import TrajectoryError
from .features import extract_all
from .scenario import GoalType, Scenario, assign_goal_type, reachable_goals
from .trajectory import Episode
from .tree import GoalModel, PairKey, traverse

STATUS_OK = "ok"
STATUS_NO_GOALS = "no_reachable_goals"


def posterior(likelihoods: Sequence[float], priors: Sequence[float]) -> List[float]:
    """Normalize likelihood times prior over the candidate set.

    A degenerate all-zero score vector falls back to the uniform
    distribution so downstream consumers always see probabilities.
    """
    if len(likelihoods) != len(priors):
        raise ValueError("likelihoods and priors must align")
    n = len(likelihoods)
    if n == 0:
        return []
    scores = [l * p for l, p in zip(likelihoods, priors)]
    total = sum(scores)
    if total <= 0.0:
        return [1.0 / n] * n
    return [s / total for s in scores]


def normalized_entropy(probs: Sequence[float]) -> float:
    """Shannon entropy scaled to [0, 1] by the log of the support size."""
    n = len(probs)
    if n <= 1:
        return 0.0
    h = 0.0
    for p in probs:
        if p > 0.0:
            h -= p * math.log(p)
    return max(0.0, h / math.log(n))


@dataclass(frozen=True)
class GoalEstimate:
    goal_id: str
    goal_type: GoalType
    likelihood: float
    prior: float
    probability: float

    def to_dict(self) -> dict:
        return {
            "goal_id": self.goal_id,
            "goal_type": self.goal_type.value,
            "likelihood": self.likelihood,
            "prior": self.prior,
            "probability": self.probability,
        }


@dataclass
class GoalPosterior:
    status: str
    entries: List[GoalEstimate] = field(default_factory=list)

    @property
    def p_goal(self) -> Dict[str, float]:
        out: Dict[str, float] = {}
        for e in self.entries:
            out[e.goal_id] = out.get(e.goal_id, 0.0) + e.probability
        return out

    @property
    def argmax_goal(self) -> Optional[str]:
        """Most probable goal; None when empty or tied at the top."""
        by_goal = self.p_goal
        if not by_goal:
            return None
        best = max(by_goal.values())
        winners = [g for g, p in by_goal.items() if p == best]
        if len(winners) != 1:
            return None
        return winners[0]

    @property
    def entropy(self) -> float:
        return normalized_entropy(list(self.p_goal.values()))

    def probability_of(self, goal_id: str) -> float:
        return self.p_goal.get(goal_id, 0.0)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "entries": [e.to_dict() for e in self.entries],
            "p_goal": self.p_goal,
            "argmax_goal": self.argmax_goal,
            "normalized_entropy": self.entropy,
        }


def _scoped_priors(model: GoalModel, pairs: Sequence[PairKey]) -> List[float]:
    raw = [model.prior_for(pair) for pair in pairs]
    total = sum(raw)
    if total <= 0.0:
        return [1.0 / len(raw)] * len(raw) if raw else []
    return [p / total for p in raw]


def infer(
    history: Episode,
    vehicle_id: str,
    scenario: Scenario,
    model: GoalModel,
    timings: Optional[Dict[str, float]] = None,
) -> GoalPosterior:
    """Posterior over (goal, goal type) pairs for one vehicle at its last frame.

    The history must already be truncated at the decision point. Pairs
    without a trained tree score the uninformed likelihood 0.5; pairs
    without a prior receive the model's floor. Pass a dict as timings to
    accumulate per-stage wall-clock seconds (goal_generation, features,
    traversal, posterior).
    """
    if vehicle_id not in history.trajectories:
        raise TrajectoryError(f"unknown vehicle '{vehicle_id}'")
    state = history.trajectories[vehicle_id][-1]

    t0 = time.perf_counter()
    routes = reachable_goals(state, scenario)
    t1 = time.perf_counter()
    if timings is not None:
        timings["goal_generation"] = timings.get("goal_generation", 0.0) + (t1 - t0)
    if not routes:
        return GoalPosterior(status=STATUS_NO_GOALS)

    t0 = time.perf_counter()
    feats = extract_all(history, vehicle_id, routes, scenario)
    pairs: List[Tuple[PairKey, str]] = []
    for route in routes:
        gtype = assign_goal_type(state, route, scenario)
        pairs.append(((route.goal.goal_id, gtype), route.goal.goal_id))
    t1 = time.perf_counter()
    if timings is not None:
        timings["features"] = timings.get("features", 0.0) + (t1 - t0)

    t0 = time.perf_counter()
    likelihoods: List[float] = []
    for pair, goal_id in pairs:
        tree = model.trees.get(pair)
        if tree is None:
            likelihoods.append(0.5)
            continue
        x = feats[goal_id].imputed(model.metadata)
        like, _ = traverse(tree, x)
        likelihoods.append(like)
    t1 = time.perf_counter()
    if timings is not None:
        timings["traversal"] = timings.get("traversal", 0.0) + (t1 - t0)

    t0 = time.perf_counter()
    priors = _scoped_priors(model, [pair for pair, _ in pairs])
    probs = posterior(likelihoods, priors)
    order = sorted(range(len(pairs)), key=lambda i: (pairs[i][0][0], pairs[i][0][1].value))
    entries = [
        GoalEstimate(
            goal_id=pairs[i][0][0],
            goal_type=pairs[i][0][1],
            likelihood=likelihoods[i],
            prior=priors[i],
            probability=probs[i],
        )
        for i in order
    ]
    t1 = time.perf_counter()
    if timings is not None:
        timings["posterior"] = timings.get("posterior", 0.0) + (t1 - t0)
    return GoalPosterior(status=STATUS_OK, entries=entries)


def infer_no_dt(
    history: Episode,
    vehicle_id: str,
    scenario: Scenario,
    model: GoalModel,
) -> GoalPosterior:
    """Reachability-plus-priors baseline: every candidate gets likelihood 0.5."""
    if vehicle_id not in history.trajectories:
        raise TrajectoryError(f"unknown vehicle '{vehicle_id}'")
    state = history.trajectories[vehicle_id][-1]
    routes = reachable_goals(state, scenario)
    if not routes:
        return GoalPosterior(status=STATUS_NO_GOALS)
    pair_list: List[PairKey] = []
    for route in routes:
        gtype = assign_goal_type(state, route, scenario)
        pair_list.append((route.goal.goal_id, gtype))
    priors = _scoped_priors(model, pair_list)
    probs = posterior([0.5] * len(pair_list), priors)
    order = sorted(range(len(pair_list)), key=lambda i: (pair_list[i][0], pair_list[i][1].value))
    entries = [
        GoalEstimate(
            goal_id=pair_list[i][0],
            goal_type=pair_list[i][1],
            likelihood=0.5,
            prior=priors[i],
            probability=probs[i],
        )
        for i in order
    ]
    return GoalPosterior(status=STATUS_OK, entries=entries)
