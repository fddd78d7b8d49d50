"""Command-line entry point: ``megflood {simulate,estimate,bound,verify,presets}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiment import (PRESETS, ConfigError, ExperimentConfig, preset_config, presets, run,
                         verify_point, _jsonable)


def _load(args) -> ExperimentConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("give exactly one of --config or --preset")
    if args.preset:
        cfg = preset_config(args.preset)
        doc = cfg.to_dict()
    else:
        doc = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        doc["seeds"] = [args.seed]
    if args.trials is not None:
        doc["trials"] = args.trials
    return ExperimentConfig.from_dict(doc)


def _common(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("experiment source")
    src.add_argument("--config", help="JSON experiment config")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in experiment")
    p.add_argument("--seed", type=int, help="replace the config's seed list with this seed")
    p.add_argument("--trials", type=int, help="override the number of flooding trials")
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--strict", action="store_true", help="stop at the first failure")
    p.add_argument("--workers", type=int, default=1, help="worker processes for trials")


STAGE_MAP = {
    "simulate": ("flood", "estimate", "bounds"),
    "estimate": ("estimate", "bounds"),
    "bound": ("bounds",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="megflood", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("simulate", "flooding runs, estimates and bounds"),
                           ("estimate", "stationarity estimates and bounds, no flooding"),
                           ("bound", "analytic parameters and bound values only"),
                           ("verify", "expansion-event and pairwise-dependence checks")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        if name == "verify":
            p.add_argument("--samples", type=int, default=2000, help="epoch samples per check")
    p = sub.add_parser("presets", help="list built-in experiments")
    p.add_argument("--json", action="store_true", help="print the full preset configs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        if args.json:
            print(json.dumps(PRESETS, indent=2, sort_keys=True))
        else:
            for name, desc in presets():
                print(f"{name:18s} {desc}")
        return 0
    try:
        cfg = _load(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "verify":
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        reports, ok = [], True
        for spec in cfg.models:
            for n in cfg.n_values:
                for seed in cfg.seeds:
                    try:
                        rep = verify_point(cfg, spec, int(n), int(seed), samples=args.samples)
                    except ValueError as exc:
                        rep = {"model_id": spec.get("name"), "n": n, "seed": seed, "passed": False,
                               "error": str(exc), "checks": []}
                    reports.append(rep)
                    ok &= rep["passed"]
                    status = "PASS" if rep["passed"] else "FAIL"
                    print(f"{status} {rep['model_id']} n={n} seed={seed} ({len(rep['checks'])} checks)")
                    if not rep["passed"] and args.strict:
                        break
        (out / "verify.json").write_text(json.dumps(_jsonable(reports), indent=2, sort_keys=True) + "\n")
        return 0 if ok else 1
    outcome = run(cfg, args.out, workers=args.workers, strict=args.strict,
                  stages=STAGE_MAP[args.command])
    for rec in outcome.records:
        med = rec.get("flood_median")
        line = f"{rec['model_id']} n={rec['n']} seed={rec['seed']}"
        if med is not None:
            line += f" median flood={med:g}"
        for key in ("bound_stationarity", "bound_node_meg", "bound_edge_meg", "bound_comparator",
                    "bound_waypoint_region", "bound_path_model"):
            if rec.get(key) is not None:
                line += f" {key[6:]}={rec[key]:.4g}"
        print(line)
    for f in outcome.failures:
        print(f"failure: {f}", file=sys.stderr)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
