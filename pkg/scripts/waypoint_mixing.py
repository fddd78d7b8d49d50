#!/usr/bin/env python3
"""Random waypoint chain on small lattices: exact vs sampled mixing, region check, bounds.

The exact mixing time comes from the trip structure of the chain; the
sampled value is a lower estimate from walkers started at the worst states.
For the smallest configurations the full transition matrix is built as a
cross-check.
"""

import argparse
import time

from megflood.markov import mixing_time
from megflood.mobility import WaypointChain, WaypointConfig, analyse_waypoint, build_random_waypoint, region_bound
from megflood.nodemeg import node_meg_bound

DENSE_LIMIT = 3000


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--sides", type=float, nargs="+", default=[3.0, 5.0, 7.0, 10.0])
    ap.add_argument("--radius", type=float, default=2.0)
    ap.add_argument("--speed", type=float, default=2.0)
    args = ap.parse_args()

    print(f"{'L':>5} {'states':>8} {'exact':>6} {'sampled':>8} {'dense':>6} {'delta':>7} {'lambda':>7} "
          f"{'P_NM':>8} {'node bound':>11} {'region bound':>13}")
    for L in args.sides:
        cfg = WaypointConfig(args.n, L, args.radius, args.speed, args.speed)
        t0 = time.perf_counter()
        chain = WaypointChain(cfg)
        exact = chain.exact_mixing().steps
        sampled = chain.sampled_mixing(walkers=4000).steps
        dense = mixing_time(chain.to_kernel()) if chain.state_count <= DENSE_LIMIT else "-"
        an = analyse_waypoint(cfg)
        nm = build_random_waypoint(cfg)
        reg = region_bound(exact, an.region, args.n) if an.region.passed else float("nan")
        print(f"{L:5.1f} {chain.state_count:8d} {exact:6d} {sampled:8d} {dense!s:>6} {an.region.delta:7.3f} "
              f"{an.region.lam:7.3f} {nm.p_nm:8.4f} {node_meg_bound(nm):11.3g} {reg:13.3g}"
              f"   ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
