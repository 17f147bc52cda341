#!/usr/bin/env python3
"""Run the synthetic drift experiment and print an adaptive-vs-static table.

Example:

    python scripts/drift_experiment.py --seeds 1,2,3,4,5 --kinds sgns,ri-ttri
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from driftline.experiment import run_drift_comparison  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", default="1,2,3,4,5")
    parser.add_argument("--kinds", default="sgns,ri-ttri,ri-trri")
    args = parser.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]
    kinds = tuple(args.kinds.split(","))

    print(f"{'seed':>4} {'model':<8} {'adaptive':>9} {'static':>9} {'winner':<8}")
    wins = {kind: 0 for kind in kinds}
    start = time.perf_counter()
    for seed in seeds:
        result = run_drift_comparison(seed, kinds)
        for kind in kinds:
            a = result.f1[kind]["adaptive"]
            s = result.f1[kind]["static"]
            winner = "adaptive" if a > s else "static" if s > a else "tie"
            wins[kind] += a > s
            print(f"{seed:>4} {kind:<8} {a:>9.3f} {s:>9.3f} {winner:<8}")
    elapsed = time.perf_counter() - start
    print()
    for kind in kinds:
        print(f"{kind}: adaptive wins {wins[kind]}/{len(seeds)} seeds")
    print(f"total runtime: {elapsed:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
