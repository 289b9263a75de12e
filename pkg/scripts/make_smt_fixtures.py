#!/usr/bin/env python3
"""Regenerate the bundled SMT parity fixtures.

Each fixture is a small hand-built model plus a proposition whose native
verdict is known by construction; the parity check is that an SMT solver
says unsat on the exported script exactly when the native verifier says
Verified. Run from the repository root.
"""

import json
from pathlib import Path

from grit.scenario import GoalType
from grit.tree import DecisionRule, GoalModel, TreeNode, edge_weights, save_model
from grit.verification import proposition_from_dict, proposition_to_dict, verify

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "grit" / "data" / "smt"

A = ("G_a", GoalType.STRAIGHT_ON)
B = ("G_b", GoalType.TURN_LEFT)
A_DOC = ["G_a", "straight_on"]
B_DOC = ["G_b", "turn_left"]


def stump(feature: str, threshold: float, l_true: float, l_false: float) -> TreeNode:
    w_true, w_false = edge_weights(0.5, l_true, l_false)
    return TreeNode(
        likelihood=0.5,
        rule=DecisionRule(feature, "threshold", threshold),
        true_child=TreeNode(l_true),
        false_child=TreeNode(l_false),
        true_weight=w_true,
        false_weight=w_false,
    )


def deep_a() -> TreeNode:
    inner_true, inner_false = TreeNode(0.9), TreeNode(0.6)
    w_t, w_f = edge_weights(0.8, 0.9, 0.6)
    inner = TreeNode(
        likelihood=0.8,
        rule=DecisionRule("angle_in_lane", "threshold", 0.0),
        true_child=inner_true,
        false_child=inner_false,
        true_weight=w_t,
        false_weight=w_f,
    )
    w_t, w_f = edge_weights(0.5, 0.8, 0.2)
    return TreeNode(
        likelihood=0.5,
        rule=DecisionRule("speed", "threshold", 5.0),
        true_child=inner,
        false_child=TreeNode(0.2),
        true_weight=w_t,
        false_weight=w_f,
    )


def two_pair_model(tree_a: TreeNode, tree_b: TreeNode) -> GoalModel:
    return GoalModel(
        trees={A: tree_a, B: tree_b},
        priors={A: 0.5, B: 0.5},
        prior_floor=0.01,
    )


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    fixtures = [
        (
            "pair1",
            two_pair_model(stump("speed", 5.0, 0.8, 0.2), stump("speed", 5.0, 0.3, 0.7)),
            {
                "name": "smt_slow_argmax",
                "description": "Below 5 m/s the straight goal wins outright.",
                "scope": [A_DOC, B_DOC],
                "antecedent": [{"feature": "speed", "op": "<", "value": 5.0}],
                "consequent": {"kind": "argmax_is", "goal": "G_a"},
            },
        ),
        (
            "pair2",
            two_pair_model(stump("speed", 5.0, 0.8, 0.2), stump("speed", 5.0, 0.3, 0.7)),
            {
                "name": "smt_unconditional_argmax",
                "description": "The straight goal wins everywhere; fast vehicles break it.",
                "scope": [A_DOC, B_DOC],
                "antecedent": [],
                "consequent": {"kind": "argmax_is", "goal": "G_a"},
            },
        ),
        (
            "pair3",
            two_pair_model(deep_a(), stump("speed", 5.0, 0.3, 0.7)),
            {
                "name": "smt_floor_holds",
                "description": "The straight goal keeps at least 20% posterior everywhere.",
                "scope": [A_DOC, B_DOC],
                "antecedent": [],
                "consequent": {"kind": "prob_at_least", "goal": "G_a", "threshold": 0.2},
            },
        ),
    ]
    for stem, model, doc in fixtures:
        prop = proposition_from_dict(doc)
        verdict = "Verified" if verify(model, prop).verified else "Refuted"
        save_model(model, OUT_DIR / f"{stem}_model.json")
        with open(OUT_DIR / f"{stem}_prop.json", "w", encoding="utf-8") as fh:
            json.dump(proposition_to_dict(prop), fh, indent=2)
            fh.write("\n")
        print(f"wrote {stem}: native verdict {verdict}")


if __name__ == "__main__":
    main()
