#!/usr/bin/env python3
"""Time the bundled instance presets under a default solve.

For each family and tier this solves a handful of seeded instances with the
engine defaults and reports nodes, LP iterations, and wall time.  Use it to
check that the ``desk`` tier stays interactive on your machine and to gauge
how much heavier the ``paper`` tier is before launching long runs.

Example:
    python3 scripts/calibrate_presets.py --tier desk --count 5
"""

import argparse
import sys
import time

from mipgym import preset, solve_instance
from mipgym.generators import FAMILIES, PRESETS


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--tier", default="desk", choices=sorted(PRESETS))
    parser.add_argument("--count", type=int, default=5)
    parser.add_argument("--families", default=",".join(sorted(FAMILIES)))
    args = parser.parse_args(argv)

    header = (
        f"{'family':<32} {'params':<28} {'nodes':>12} {'lp iters':>12} "
        f"{'max time':>9}"
    )
    print(header)
    print("-" * len(header))
    for family in (f.strip() for f in args.families.split(",") if f.strip()):
        config = preset(family, args.tier)
        generator = config.build()
        nodes, iters, worst = [], [], 0.0
        for index in range(args.count):
            instance = generator.generate(index)
            start = time.perf_counter()
            engine = solve_instance(instance)
            worst = max(worst, time.perf_counter() - start)
            if engine.status.value not in ("optimal", "infeasible"):
                print(f"{family}: unexpected status {engine.status.value}")
                return 1
            nodes.append(engine.nodes_processed)
            iters.append(engine.lp_iterations_total)
        params = ",".join(f"{k}={v}" for k, v in config.params.items())
        print(
            f"{family:<32} {params:<28} "
            f"{min(nodes):>4}..{max(nodes):<7} "
            f"{min(iters):>5}..{max(iters):<6} {worst:>8.2f}s"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
