#!/usr/bin/env python3
"""Search for distributions where P(X >= theta E X) < (1 - theta^2) E[X]^2 / E[X^2].

The classical Paley-Zygmund factor is (1 - theta)^2. The larger factor
1 - theta^2 is not valid in general; this script finds the worst violations
among random finite distributions and confirms the classical form on the
same instances.
"""

import argparse

import numpy as np

from megflood.oracles import PaleyZygmundInstance, random_paley_zygmund


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--show", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    bad = []
    classical_failures = 0
    for _ in range(args.instances):
        inst = random_paley_zygmund(rng)
        chk = inst.evaluate()
        if not chk.passed:
            bad.append((chk.rhs - chk.lhs, inst, chk))
        twin = PaleyZygmundInstance(inst.values, inst.probs, inst.theta, "classical")
        classical_failures += not twin.evaluate().passed
    print(f"1 - theta^2 factor violated on {len(bad)}/{args.instances} instances")
    print(f"(1 - theta)^2 factor violated on {classical_failures}/{args.instances} instances")
    for gap, inst, chk in sorted(bad, key=lambda b: b[0], reverse=True)[:args.show]:
        print(f"  gap {gap:.4f}: X={np.round(inst.values, 4).tolist()} p={np.round(inst.probs, 4).tolist()} "
              f"theta={inst.theta:.4f}  P(X >= theta EX)={chk.lhs:.4f} < {chk.rhs:.4f}")


if __name__ == "__main__":
    main()
