#!/usr/bin/env python3
"""Regenerate the bundled desk-scale training fixtures.

Each fixture is small enough to check by hand and is chosen so greedy
tree growing reaches the same training accuracy as exhaustive depth<=2
enumeration; the script asserts that before writing anything.
"""

import itertools
import json
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from grit.training import TrainConfig, fit_tree
from grit.tree import traverse

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "grit" / "data" / "desk"

Row = Dict[str, float]


def _thresholds(rows: Sequence[Row], feature: str) -> List[float]:
    values = sorted({float(r[feature]) for r in rows})
    return [(a + b) / 2.0 for a, b in zip(values, values[1:])]


def _accuracy(assign: Sequence[bool], labels: Sequence[bool]) -> int:
    return sum(1 for a, b in zip(assign, labels) if a == b)


def _majority(labels: Sequence[bool]) -> bool:
    return sum(labels) * 2 > len(labels)


def best_depth2_accuracy(rows: Sequence[Row], labels: Sequence[bool]) -> int:
    """Training accuracy of the best tree of depth <= 2, by brute force."""
    features = sorted(rows[0])
    n = len(rows)
    idx = list(range(n))

    def leaf_acc(sub: List[int]) -> int:
        if not sub:
            return 0
        lab = [labels[i] for i in sub]
        maj = _majority(lab)
        return sum(1 for v in lab if v == maj)

    def depth1_acc(sub: List[int]) -> int:
        best = leaf_acc(sub)
        for f in features:
            for thr in _thresholds([rows[i] for i in sub] or rows, f):
                left = [i for i in sub if rows[i][f] < thr]
                right = [i for i in sub if rows[i][f] >= thr]
                if left and right:
                    best = max(best, leaf_acc(left) + leaf_acc(right))
        return best

    best = depth1_acc(idx)
    for f in features:
        for thr in _thresholds(rows, f):
            left = [i for i in idx if rows[i][f] < thr]
            right = [i for i in idx if rows[i][f] >= thr]
            if left and right:
                best = max(best, depth1_acc(left) + depth1_acc(right))
    return best


def fitted_accuracy(rows: Sequence[Row], labels: Sequence[bool], alpha: float) -> int:
    tree = fit_tree(rows, labels, TrainConfig(max_depth=2, alpha=alpha))
    hits = 0
    for row, label in zip(rows, labels):
        likelihood, _ = traverse(tree, row)
        hits += (likelihood > 0.5) == label
    return hits


FIXTURES = [
    {
        "name": "desk_separable",
        "description": "Six samples split cleanly by one speed threshold.",
        "alpha": 1.0,
        "rows": [
            {"speed": 2.0, "angle_in_lane": 0.0},
            {"speed": 3.0, "angle_in_lane": 0.0},
            {"speed": 4.0, "angle_in_lane": 0.0},
            {"speed": 6.0, "angle_in_lane": 0.0},
            {"speed": 7.0, "angle_in_lane": 0.0},
            {"speed": 8.0, "angle_in_lane": 0.0},
        ],
        "labels": [True, True, True, False, False, False],
    },
    {
        "name": "desk_conjunction",
        "description": "Positive only when slow and angled right; needs depth 2.",
        "alpha": 1.0,
        "rows": [
            {"speed": s, "angle_in_lane": a}
            for s, a in itertools.product((2.0, 2.0, 2.0, 8.0, 8.0, 8.0), (-1.0, 1.0))
        ],
        "labels": [s == 2.0 and a == -1.0
                   for s, a in itertools.product((2.0, 2.0, 2.0, 8.0, 8.0, 8.0), (-1.0, 1.0))],
    },
    {
        "name": "desk_nonmonotone",
        "description": "A fast positive outlier; the optimum needs a second cut.",
        "alpha": 1.0,
        "rows": [
            {"speed": v, "angle_in_lane": 0.0}
            for v in (1.0, 2.0, 3.0, 4.0, 6.0, 7.0, 8.0, 9.0)
        ],
        "labels": [True, True, True, True, False, False, False, True],
    },
]


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for doc in FIXTURES:
        rows, labels = doc["rows"], doc["labels"]
        assert len(rows) <= 12, doc["name"]
        greedy = fitted_accuracy(rows, labels, doc["alpha"])
        brute = best_depth2_accuracy(rows, labels)
        assert greedy == brute, (doc["name"], greedy, brute)
        path = OUT_DIR / f"{doc['name']}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"wrote {path} (training accuracy {greedy}/{len(rows)})")


if __name__ == "__main__":
    main()
