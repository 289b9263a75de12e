#!/usr/bin/env python3
"""End-to-end demo: generate data, train, infer, verify, evaluate.

Exercises the same code paths as the CLI but through the library API, and
prints a compact report. Useful as a smoke test and as a worked example.
"""

import argparse
import time

from grit.assets import proposition_assets
from grit.evaluation import benchmark, evaluate, generate_synthetic
from grit.inference import infer
from grit.trajectory import build_datasets, ground_truth_goal, history_for
from grit.training import TrainConfig, train_model
from grit.verification import verify


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vehicles", type=int, default=250)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--template", default="t_junction")
    args = ap.parse_args()

    t0 = time.time()
    scenario, episodes = generate_synthetic(args.template, args.vehicles, seed=args.seed)
    n_train = max(1, len(episodes) - 2)
    train_eps, test_eps = episodes[:n_train], episodes[n_train:]
    print(f"generated {args.vehicles} vehicles in {len(episodes)} episodes "
          f"({time.time() - t0:.1f}s)")

    t0 = time.time()
    datasets = build_datasets(train_eps, scenario)
    model = train_model(datasets, TrainConfig(alpha=1.0, ccp_alpha=0.001))
    print(f"trained {len(model.trees)} trees ({time.time() - t0:.1f}s)")
    for pair, tree in sorted(model.trees.items()):
        print(f"  {pair[0]}:{pair[1].value:12s} depth {tree.depth()} "
              f"leaves {tree.leaf_count()}")

    episode = test_eps[0]
    agent_id = sorted(episode.trajectories)[0]
    full = len(episode.trajectories[agent_id])
    history = history_for(episode, agent_id, full // 2)
    post = infer(history, agent_id, scenario, model)
    truth = ground_truth_goal(episode.trajectories[agent_id], scenario)
    label = truth.goal_id if truth is not None else "none"
    print(f"\nhalfway posterior for {agent_id} (truth: {label}):")
    for entry in post.entries:
        print(f"  {entry.goal_id}:{entry.goal_type.value:12s} "
              f"P={entry.probability:.3f} L={entry.likelihood:.3f}")

    if args.template == "t_junction":
        print("\nbundled propositions:")
        for prop in proposition_assets():
            result = verify(model, prop)
            verdict = "Verified" if result.verified else "Refuted"
            print(f"  {prop.name:24s} {verdict} ({result.boxes_checked} boxes)")

    t0 = time.time()
    report = evaluate(model, test_eps, scenario, include_baseline=True)
    print(f"\nevaluation on {report.n_vehicles} held-out vehicles "
          f"({time.time() - t0:.1f}s):")
    print("  fraction accuracy entropy  baseline")
    for i, point in enumerate(report.curve):
        base = report.baseline_curve[i]
        print(f"  {point.fraction:8.1f} {point.accuracy:8.3f} "
              f"{point.entropy:7.3f} {base.accuracy:9.3f}")

    bench = benchmark(model, test_eps, scenario)
    shares = ", ".join(f"{k} {v:.0%}" for k, v in sorted(bench.stage_shares.items()))
    print(f"\ninference: {bench.mean_us:.0f} us mean over {bench.n_calls} calls")
    print(f"stage shares: {shares}")


if __name__ == "__main__":
    main()
