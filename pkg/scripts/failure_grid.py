"""Seeded failure-to-consensus counts for the graph and space grid.

Usage: python scripts/failure_grid.py [--trials 1000] [--seed 2024] [--jobs N] [--out report.json]
"""

import argparse
import json
import os

from sphere_consensus.experiments import BatchSpec, run_batch

ROWS = [
    ("S^2", dict(space="sphere", dim=2, protocol="alg2")),
    ("S^1", dict(space="sphere", dim=1, protocol="alg2")),
    ("SO(3) naive", dict(space="so3", protocol="alg3")),
    ("SO(3) composite", dict(space="so3", protocol="alg4", n_bound=6)),
]
GRAPHS = [{"kind": "cycle", "n": 6}, {"kind": "barbell", "n": 6}, {"kind": "complete", "n": 6}]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out")
    args = p.parse_args()
    report = []
    print(f"{'':16}" + "".join(f"{g['kind']:>12}" for g in GRAPHS))
    for label, kw in ROWS:
        cells = []
        for k, graph in enumerate(GRAPHS):
            spec = BatchSpec(graph=graph, gain={"constant": 5.0}, trials=args.trials, seed=args.seed + k, **kw)
            batch = run_batch(spec, jobs=args.jobs)
            report.append({"row": label, **batch.to_dict()})
            flag = "*" if batch.inconclusive else ""
            cells.append(f"{batch.counts['failure']}{flag}")
        print(f"{label:16}" + "".join(f"{c:>12}" for c in cells), flush=True)
    print(f"(failures out of {args.trials}; * marks > 1% timeouts)")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2)


if __name__ == "__main__":
    main()
