"""Tree growing, cost-complexity pruning, priors, and hyperparameter search.

Splits maximize class-weighted information gain, where the weights rescale
the two classes to equal total mass so trees are insensitive to the heavy
negative skew of one-vs-rest datasets. The same weights drive the pruning
risk so growing and pruning agree on what a node costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ModelError
from .features import BOOLEAN_FEATURES, DEFAULT_METADATA, FEATURE_NAMES, FeatureMetadata
from .scenario import GoalType
from .tree import DecisionRule, GoalModel, PairKey, TreeNode, edge_weights, node_likelihood, traverse
from .trajectory import LabeledSample

_GAIN_TOL = 1e-12
_PRUNE_TOL = 1e-12
_LOSS_CLAMP = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    max_depth: int = 7
    alpha: float = 1.0
    ccp_alpha: float = 0.0
    min_samples_split: int = 2

    def __post_init__(self):
        if self.max_depth < 0:
            raise ModelError("max_depth must be non-negative")
        if self.alpha < 0:
            raise ModelError("alpha must be non-negative")
        if self.ccp_alpha < 0:
            raise ModelError("ccp_alpha must be non-negative")
        if self.min_samples_split < 2:
            raise ModelError("min_samples_split must be at least 2")


def _entropy_bits(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def _rows_to_arrays(
    rows: Sequence[Mapping[str, object]]
) -> Tuple[np.ndarray, List[str]]:
    if not rows:
        raise ModelError("cannot fit a tree on an empty dataset")
    names = sorted(rows[0])
    key_set = set(names)
    for name in names:
        if name not in FEATURE_NAMES:
            raise ModelError(f"unknown feature '{name}'")
    X = np.empty((len(rows), len(names)), dtype=float)
    for i, row in enumerate(rows):
        if set(row) != key_set:
            raise ModelError("all samples must share the same feature keys")
        for j, name in enumerate(names):
            value = row[name]
            if value is None:
                raise ModelError(
                    f"feature '{name}' is missing in sample {i}; impute before fitting"
                )
            X[i, j] = float(value)
    return X, names


def fit_tree(
    rows: Sequence[Mapping[str, object]],
    labels: Sequence[bool],
    config: TrainConfig = TrainConfig(),
) -> TreeNode:
    """Grow a likelihood tree by recursive binary splitting.

    Rows are feature maps sharing one key set (any subset of the known
    features); missing values must already be imputed. Threshold candidates
    are midpoints between consecutive distinct values; the split with the
    highest weighted information gain wins, ties going to the
    lexicographically first feature and then the smallest threshold.
    Growth stops at max_depth, below min_samples_split, or when no split
    has positive gain. With alpha = 0 the data must contain both classes.
    """
    X, names = _rows_to_arrays(rows)
    y = np.asarray(labels, dtype=bool)
    if y.shape != (X.shape[0],):
        raise ModelError("labels must match samples one to one")
    n_pos = int(y.sum())
    n_neg = int(y.size) - n_pos
    alpha = config.alpha
    if n_pos + alpha <= 0 or n_neg + alpha <= 0:
        raise ModelError(
            "training needs both classes present, or a positive alpha"
        )
    total_mass = y.size + 2.0 * alpha
    w_pos = total_mass / (n_pos + alpha)
    w_neg = total_mass / (n_neg + alpha)

    def node_p(node_pos: float, node_neg: float, parent: float) -> float:
        return node_likelihood(node_pos, node_neg, n_pos, n_neg, alpha, parent)

    def best_split(idx: np.ndarray) -> Optional[Tuple[int, float, float]]:
        """(column, threshold, gain) of the best candidate, or None.

        Impurity uses the class weights on raw node counts, so a pure node
        has zero entropy and never splits, regardless of smoothing.
        """
        ys = y[idx]
        pos_here = int(ys.sum())
        neg_here = idx.size - pos_here
        parent_mass = w_pos * pos_here + w_neg * neg_here
        if parent_mass <= 0:
            return None
        parent_h = _entropy_bits(w_pos * pos_here / parent_mass)
        best: Optional[Tuple[int, float, float]] = None
        for j in range(len(names)):
            col = X[idx, j]
            order = np.argsort(col, kind="stable")
            xs = col[order]
            ls = ys[order]
            cuts = np.nonzero(xs[:-1] < xs[1:])[0]
            if cuts.size == 0:
                continue
            cum_pos = np.cumsum(ls)
            pos_l = cum_pos[cuts].astype(float)
            n_l = (cuts + 1).astype(float)
            neg_l = n_l - pos_l
            pos_r = pos_here - pos_l
            neg_r = neg_here - neg_l
            m_l = w_pos * pos_l + w_neg * neg_l
            m_r = w_pos * pos_r + w_neg * neg_r
            h_l = _vec_entropy(w_pos * pos_l / m_l)
            h_r = _vec_entropy(w_pos * pos_r / m_r)
            gains = parent_h - (m_l * h_l + m_r * h_r) / parent_mass
            k = int(np.argmax(gains))
            gain = float(gains[k])
            if not math.isfinite(gain) or gain <= _GAIN_TOL:
                continue
            if best is None or gain > best[2]:
                thr = float((xs[cuts[k]] + xs[cuts[k] + 1]) / 2.0)
                best = (j, thr, gain)
        return best

    def grow(idx: np.ndarray, depth: int, parent_l: float) -> TreeNode:
        pos_here = int(y[idx].sum())
        neg_here = idx.size - pos_here
        node = TreeNode(
            likelihood=node_p(pos_here, neg_here, parent_l),
            n_pos=pos_here,
            n_neg=neg_here,
        )
        if depth >= config.max_depth or idx.size < config.min_samples_split:
            return node
        found = best_split(idx)
        if found is None:
            return node
        j, thr, _ = found
        name = names[j]
        if name in BOOLEAN_FEATURES:
            rule = DecisionRule(name, "boolean")
            true_mask = X[idx, j] >= thr
        else:
            rule = DecisionRule(name, "threshold", thr)
            true_mask = X[idx, j] < thr
        true_idx = idx[true_mask]
        false_idx = idx[~true_mask]
        node.rule = rule
        node.true_child = grow(true_idx, depth + 1, node.likelihood)
        node.false_child = grow(false_idx, depth + 1, node.likelihood)
        node.true_weight, node.false_weight = edge_weights(
            node.likelihood, node.true_child.likelihood, node.false_child.likelihood
        )
        return node

    root = grow(np.arange(y.size), 0, 0.5)
    root.class_weights = (w_pos, w_neg)
    return root


def _vec_entropy(p: np.ndarray) -> np.ndarray:
    q = 1.0 - p
    out = np.zeros_like(p)
    interior = (p > 0.0) & (p < 1.0)
    pi = p[interior]
    qi = q[interior]
    out[interior] = -(pi * np.log2(pi) + qi * np.log2(qi))
    return out


# -- minimal cost-complexity pruning ---------------------------------------------


def prune(root: TreeNode, ccp_alpha: float) -> TreeNode:
    """Collapse subtrees whose effective complexity parameter is at most
    ccp_alpha, weakest link first. Returns a new tree; the input is untouched.

    Requires the training bookkeeping (per-node counts, root class weights)
    that fit_tree leaves behind, so prune at training time, not on loaded
    models.
    """
    if ccp_alpha < 0:
        raise ModelError("ccp_alpha must be non-negative")
    tree = root.copy()
    if ccp_alpha == 0.0 or tree.is_leaf:
        return tree
    if tree.class_weights is None:
        raise ModelError("tree lacks training counts; prune freshly fit trees")
    w_pos, w_neg = tree.class_weights
    root_mass = w_pos * tree.n_pos + w_neg * tree.n_neg
    if root_mass <= 0:
        raise ModelError("tree has no mass")

    def risk(node: TreeNode) -> float:
        """Same weighted raw-count entropy the growing criterion used."""
        mass = w_pos * node.n_pos + w_neg * node.n_neg
        if mass <= 0:
            return 0.0
        return (mass / root_mass) * _entropy_bits(w_pos * node.n_pos / mass)

    def weakest(node: TreeNode, counter: List[int]) -> Optional[Tuple[float, int, TreeNode]]:
        """Min (effective alpha, preorder index) internal node of the subtree."""
        index = counter[0]
        counter[0] += 1
        if node.is_leaf:
            return None
        leaf_risk = 0.0
        leaves = 0
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur.is_leaf:
                leaf_risk += risk(cur)
                leaves += 1
            else:
                stack.append(cur.false_child)
                stack.append(cur.true_child)
        eff = (risk(node) - leaf_risk) / (leaves - 1)
        best = (eff, index, node)
        for child in (node.true_child, node.false_child):
            cand = weakest(child, counter)
            if cand is None:
                continue
            if cand[0] < best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                best = cand
        return best

    while not tree.is_leaf:
        found = weakest(tree, [0])
        if found is None or found[0] > ccp_alpha + _PRUNE_TOL:
            break
        node = found[2]
        node.rule = None
        node.true_child = None
        node.false_child = None
        node.true_weight = None
        node.false_weight = None
    return tree


# -- priors ------------------------------------------------------------------------


def estimate_priors(
    datasets: Mapping[PairKey, Sequence[LabeledSample]], alpha: float = 1.0
) -> Tuple[Dict[PairKey, float], float]:
    """Smoothed vehicle-count priors over (goal, goal type) pairs.

    Each pair scores the number of distinct vehicles that actually realized
    it (at least one positively labeled sample); alpha is added everywhere
    before normalizing. Returns the prior table and the floor an unseen pair
    would receive (alpha over the same total).
    """
    if alpha < 0:
        raise ModelError("alpha must be non-negative")
    if not datasets:
        raise ModelError("no datasets to estimate priors from")
    counts: Dict[PairKey, int] = {}
    for pair, samples in datasets.items():
        vehicles = {
            (s.episode_index, s.agent_id) for s in samples if s.label
        }
        counts[pair] = len(vehicles)
    total = sum(counts.values()) + alpha * len(counts)
    if total <= 0:
        raise ModelError("no positive samples to estimate priors from")
    priors = {pair: (c + alpha) / total for pair, c in counts.items()}
    return priors, alpha / total


# -- end-to-end training ------------------------------------------------------------


def _sample_rows(
    samples: Sequence[LabeledSample], metadata: FeatureMetadata
) -> Tuple[List[Dict[str, object]], List[bool]]:
    rows = [s.features.imputed(metadata) for s in samples]
    labels = [s.label for s in samples]
    return rows, labels


def train_model(
    datasets: Mapping[PairKey, Sequence[LabeledSample]],
    config: TrainConfig = TrainConfig(),
    metadata: FeatureMetadata = DEFAULT_METADATA,
) -> GoalModel:
    """Fit one pruned tree per (goal, goal type) pair and estimate priors."""
    if not datasets:
        raise ModelError("no datasets to train on")
    trees: Dict[PairKey, TreeNode] = {}
    for pair in sorted(datasets):
        samples = datasets[pair]
        if not samples:
            continue
        rows, labels = _sample_rows(samples, metadata)
        tree = fit_tree(rows, labels, config)
        trees[pair] = prune(tree, config.ccp_alpha)
    if not trees:
        raise ModelError("no datasets to train on")
    priors, floor = estimate_priors(datasets, config.alpha)
    model = GoalModel(trees=trees, priors=priors, metadata=metadata, prior_floor=floor)
    model.validate()
    return model


# -- hyperparameter grid ------------------------------------------------------------


@dataclass(frozen=True)
class GridResult:
    config: TrainConfig
    loss: float


@dataclass
class GridSearchResult:
    best_model: GoalModel
    best_config: TrainConfig
    results: List[GridResult]


def _group_by_decision(
    datasets: Mapping[PairKey, Sequence[LabeledSample]]
) -> List[List[Tuple[PairKey, LabeledSample]]]:
    """Regroup per-pair samples into per-decision groups (one vehicle frame)."""
    groups: Dict[Tuple[int, str, int], List[Tuple[PairKey, LabeledSample]]] = {}
    for pair, samples in datasets.items():
        for s in samples:
            groups.setdefault((s.episode_index, s.agent_id, s.frame_index), []).append(
                (pair, s)
            )
    return [groups[k] for k in sorted(groups)]


def validation_loss(
    model: GoalModel,
    val_datasets: Mapping[PairKey, Sequence[LabeledSample]],
) -> float:
    """Mean negative log probability assigned to the realized goal."""
    groups = _group_by_decision(val_datasets)
    losses: List[float] = []
    for group in groups:
        true_pairs = [pair for pair, s in group if s.label]
        if not true_pairs:
            continue
        scores: Dict[PairKey, float] = {}
        for pair, s in group:
            x = s.features.imputed(model.metadata)
            if pair in model.trees:
                like, _ = traverse(model.trees[pair], x)
            else:
                like = 0.5
            scores[pair] = like * model.prior_for(pair)
        total = sum(scores.values())
        if total <= 0:
            p_true = 0.0
        else:
            p_true = sum(scores[pair] for pair in true_pairs) / total
        losses.append(-math.log(max(p_true, _LOSS_CLAMP)))
    if not losses:
        raise ModelError("validation set has no labeled decisions")
    return sum(losses) / len(losses)


def grid_search(
    train_datasets: Mapping[PairKey, Sequence[LabeledSample]],
    val_datasets: Optional[Mapping[PairKey, Sequence[LabeledSample]]] = None,
    alphas: Sequence[float] = (0.1, 1.0, 10.0),
    ccp_alphas: Sequence[float] = (0.0, 0.001, 0.01),
    max_depth: int = 7,
    min_samples_split: int = 2,
    metadata: FeatureMetadata = DEFAULT_METADATA,
) -> GridSearchResult:
    """Pick smoothing and pruning strength by validation likelihood.

    Trees are fit once per alpha and re-pruned per ccp_alpha. Equal losses
    resolve toward the stronger regularizer (larger ccp_alpha, then larger
    alpha). A single-cell grid skips validation entirely.
    """
    if not alphas or not ccp_alphas:
        raise ModelError("grid must contain at least one value per axis")
    configs: List[TrainConfig] = []
    for alpha in sorted(alphas, reverse=True):
        for ccp in sorted(ccp_alphas, reverse=True):
            configs.append(
                TrainConfig(
                    max_depth=max_depth,
                    alpha=alpha,
                    ccp_alpha=ccp,
                    min_samples_split=min_samples_split,
                )
            )
    if len(configs) == 1:
        model = train_model(train_datasets, configs[0], metadata)
        return GridSearchResult(model, configs[0], [GridResult(configs[0], math.nan)])
    if val_datasets is None:
        raise ModelError("grid search over several configs needs validation data")

    results: List[GridResult] = []
    best: Optional[Tuple[float, TrainConfig, GoalModel]] = None
    by_alpha: Dict[float, Dict[PairKey, TreeNode]] = {}
    for config in configs:
        if config.alpha not in by_alpha:
            raw: Dict[PairKey, TreeNode] = {}
            for pair in sorted(train_datasets):
                samples = train_datasets[pair]
                if not samples:
                    continue
                rows, labels = _sample_rows(samples, metadata)
                raw[pair] = fit_tree(
                    rows, labels, replace(config, ccp_alpha=0.0)
                )
            by_alpha[config.alpha] = raw
        trees = {
            pair: prune(tree, config.ccp_alpha)
            for pair, tree in by_alpha[config.alpha].items()
        }
        priors, floor = estimate_priors(train_datasets, config.alpha)
        model = GoalModel(trees=trees, priors=priors, metadata=metadata, prior_floor=floor)
        loss = validation_loss(model, val_datasets)
        results.append(GridResult(config, loss))
        # configs iterate from the strongest regularizer down, so a strict
        # comparison keeps the preferred config on ties
        if best is None or loss < best[0]:
            best = (loss, config, model)
    assert best is not None
    return GridSearchResult(best[2], best[1], results)
