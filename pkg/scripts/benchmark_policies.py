#!/usr/bin/env python3
"""Compare branching policies on one instance family.

Runs every baseline policy over the same seeded instance stream and prints
per-policy shifted geometric means of tree size and LP effort, plus the
relative tree-size reduction against the random baseline.

Examples:
    python3 scripts/benchmark_policies.py
    python3 scripts/benchmark_policies.py --family set_cover --episodes 20
    python3 scripts/benchmark_policies.py --tier paper --policies random,pseudocost
"""

import argparse
import sys
import time

from mipgym import preset, run_episodes
from mipgym.policies import POLICIES
from mipgym.runner import shifted_geometric_mean


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--family", default="combinatorial_auction")
    parser.add_argument("--tier", default="desk", choices=("desk", "paper"))
    parser.add_argument("--episodes", type=int, default=50)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--gen-seed", type=int, default=0)
    parser.add_argument(
        "--policies",
        default=",".join(sorted(POLICIES)),
        help="comma-separated subset of: " + ", ".join(sorted(POLICIES)),
    )
    args = parser.parse_args(argv)

    config = preset(args.family, args.tier, seed=args.gen_seed)
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]

    print(f"family={args.family} tier={args.tier} episodes={args.episodes}")
    header = f"{'policy':<20} {'sgm nodes':>10} {'sgm lp iters':>13} {'time':>8}"
    print(header)
    print("-" * len(header))
    sgm_nodes = {}
    for policy in policies:
        start = time.perf_counter()
        report = run_episodes(
            config,
            policy=policy,
            n_episodes=args.episodes,
            n_threads=args.threads,
        )
        elapsed = time.perf_counter() - start
        failures = [row for row in report.rows if row.error]
        if failures:
            print(f"{policy:<20} {len(failures)} failed episodes", file=sys.stderr)
            return 1
        sgm_nodes[policy] = shifted_geometric_mean([r.nodes for r in report.rows])
        sgm_iters = shifted_geometric_mean([r.lp_iterations for r in report.rows])
        print(
            f"{policy:<20} {sgm_nodes[policy]:>10.3f} {sgm_iters:>13.3f}"
            f" {elapsed:>7.1f}s"
        )

    if "random" in sgm_nodes:
        print()
        for policy, value in sorted(sgm_nodes.items(), key=lambda kv: kv[1]):
            if policy == "random":
                continue
            reduction = 100.0 * (1.0 - value / sgm_nodes["random"])
            print(f"{policy}: {reduction:+.1f}% tree-size change vs random")
    return 0


if __name__ == "__main__":
    sys.exit(main())
