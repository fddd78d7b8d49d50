#!/usr/bin/env python3
"""Run built-in experiments and print a one-line digest per (model, n) cell.

    python3 scripts/run_presets.py                    # every preset
    python3 scripts/run_presets.py cycle-paths --workers 4 --out results
"""

import argparse
import time
from pathlib import Path

from megflood.experiment import PRESETS, preset_config, run


def digest(rec: dict) -> str:
    bounds = {k[len("bound_"):]: v for k, v in rec.items() if k.startswith("bound_") and v}
    bits = ", ".join(f"{k}={v:.3g}" for k, v in sorted(bounds.items()))
    beta = rec.get("beta_hat")
    est = "" if beta is None else f" beta_hat={beta:.3f}"
    return (f"  {rec['model_id']} n={rec['n']}: median={rec.get('flood_median')} "
            f"q90={rec.get('flood_q90')} timeouts={rec.get('timeouts')}{est} | {bits}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="*", choices=[[]] + sorted(PRESETS), default=[])
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--trials", type=int)
    args = ap.parse_args()

    for name in args.names or list(PRESETS):
        cfg = preset_config(name, trials=args.trials)
        t0 = time.perf_counter()
        out = run(cfg, Path(args.out) / name, workers=args.workers)
        print(f"{name} ({time.perf_counter() - t0:.1f}s) -> {out.out_dir}")
        for rec in out.records:
            print(digest(rec))
        for f in out.failures:
            print(f"  FAILURE {f}")


if __name__ == "__main__":
    main()
