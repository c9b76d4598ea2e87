"""Reverse-time flow on cycles over S^2: terminal edge spread versus the maximin value."""

import argparse

import numpy as np

from sphere_consensus.experiments import backward_batch, cycle_maximin_s
from sphere_consensus.gains import constant
from sphere_consensus.protocols import edge_s
from sphere_consensus.topology import cycle


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--sizes", type=int, nargs="+", default=[3, 4, 5, 6, 7])
    args = p.parse_args()
    seeds = np.random.SeedSequence(0).spawn(args.seeds)
    print(f"{'N':>3} {'maximin':>10} {'min s':>12} {'max s':>12}")
    for N in args.sizes:
        ens = backward_batch(cycle(N), constant(1.0), seeds)
        s = edge_s(ens.final_states, cycle(N))
        print(f"{N:>3} {cycle_maximin_s(N):>10.6f} {s.min():>12.8f} {s.max():>12.8f}")


if __name__ == "__main__":
    main()
