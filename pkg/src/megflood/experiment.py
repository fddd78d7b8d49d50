"""Config-driven experiment runner: build models, flood, estimate, evaluate bounds.

Outputs (all deterministic given the config and seeds):

* ``runs.csv``     one row per flooding trial
* ``results.csv``  one row per (model, n, seed) with statistics and bounds
* ``summary.json`` the same records with full bound inputs and precondition
                   annotations, plus quantiles and plot-ready series
"""

from __future__ import annotations

import ast
import copy
import csv
import hashlib
import json
import math
import operator
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import edgemeg, mobility, nodemeg
from .dyngraph import MegProcess, Snapshot, StaticMeg, estimate_alpha, estimate_beta
from .flooding import (DEFAULT_STEP_CAP, BoundParams, max_source_samples, run_floods, run_rows,
                       summarize, stationarity_bound, write_runs_csv)
from .markov import MarkovError, mixing_report
from .seeding import stream

SCHEMA_VERSION = 1
STAGES = ("flood", "estimate", "bounds")


class ConfigError(ValueError):
    pass


# --- parameter expressions ------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow, ast.FloorDiv: operator.floordiv}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"sqrt": math.sqrt, "log": math.log, "ln": math.log, "log2": math.log2,
          "ceil": math.ceil, "floor": math.floor, "min": min, "max": max}
_CONSTS = {"pi": math.pi, "e": math.e}


def evaluate(expr, **names) -> Any:
    """Evaluate numeric literals or small arithmetic expressions such as ``"2/n"``.

    Only arithmetic, a few math functions and the supplied names are allowed.
    """
    if not isinstance(expr, str):
        return expr
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad expression {expr!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in names:
                return names[node.id]
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise ConfigError(f"unknown name {node.id!r} in {expr!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and not node.keywords):
            return _FUNCS[node.func.id](*map(ev, node.args))
        raise ConfigError(f"unsupported syntax in {expr!r}")

    return ev(tree)


def _resolve(params: dict, n: int) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, dict):
            out[k] = _resolve(v, n)
        elif isinstance(v, str) and k not in ("name", "family", "graph_name", "init"):
            try:
                out[k] = evaluate(v, n=n)
            except ConfigError:
                out[k] = v
        else:
            out[k] = v
    return out


# --- config ---------------------------------------------------------------------------


@dataclass
class EstimatorSettings:
    enabled: bool = True
    trials: int = 100
    burn_in_epochs: int = 3
    set_sizes: list[int] | None = None


@dataclass
class ExperimentConfig:
    """One experiment: a list of models swept over node counts and seeds."""

    name: str
    models: list[dict]
    n_values: list[int]
    seeds: list[int]
    trials: int = 100
    step_cap: int | None = None
    epoch: str | int = "analytic"
    estimator: EstimatorSettings = field(default_factory=EstimatorSettings)
    c: float = 1.0
    sources: str | list[int] = "all"
    max_source_trials: int = 0
    bounds: str | list[str] = "auto"
    description: str = ""

    def __post_init__(self):
        if isinstance(self.estimator, dict):
            self.estimator = EstimatorSettings(**self.estimator)
        if isinstance(self.models, dict):
            self.models = [self.models]
        self.validate()

    def validate(self) -> None:
        if not self.models:
            raise ConfigError("config lists no models")
        if not self.n_values:
            raise ConfigError("empty n sweep")
        if not self.seeds:
            raise ConfigError("seeds must be given explicitly")
        if any(int(n) < 2 for n in self.n_values):
            raise ConfigError("every n must be >= 2")
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if not (self.epoch == "analytic" or (isinstance(self.epoch, int) and self.epoch >= 1)):
            raise ConfigError("epoch must be 'analytic' or a positive integer")
        for m in self.models:
            if "name" not in m:
                raise ConfigError(f"model spec without a name: {m}")
            if m["name"] not in MODEL_BUILDERS:
                raise ConfigError(f"unknown model {m['name']!r}; known: {sorted(MODEL_BUILDERS)}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = copy.deepcopy(doc)
        if "model" in doc and "models" not in doc:
            doc["models"] = [doc.pop("model")]
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def model_id(spec: dict) -> str:
    params = ",".join(f"{k}={json.dumps(v, sort_keys=True, separators=(',', ':'))}"
                      for k, v in sorted(spec.items()) if k != "name")
    return f"{spec['name']}[{params}]"


# --- model construction -------------------------------------------------------


@dataclass
class BoundInfo:
    formula: str
    inputs: dict
    preconditions: dict[str, bool]
    note: str = ""

    @property
    def applicable(self) -> bool:
        return all(self.preconditions.values())

    @property
    def value(self) -> float | None:
        if not self.applicable:
            return None
        return evaluate_bound(self.formula, self.inputs)


@dataclass
class ModelInstance:
    process: MegProcess
    analytics: dict[str, Any]
    bounds: dict[str, BoundInfo]
    alpha_beta: tuple[float, float] | None  # analytic (alpha, beta) for the step cap
    notes: list[str] = field(default_factory=list)


BOUND_FORMULAS: dict[str, Callable[..., float]] = {
    "stationarity": lambda **kw: stationarity_bound(BoundParams(**kw)),
    "node_meg": nodemeg.node_meg_bound_value,
    "edge_meg": edgemeg.edge_meg_value,
    "comparator": edgemeg.sparse_flooding_comparator,
    "waypoint_region": mobility.region_bound_value,
    "path_model": mobility.path_model_bound_value,
    "graph_walk": mobility.graph_walk_bound_value,
}


def evaluate_bound(formula: str, inputs: dict) -> float:
    return float(BOUND_FORMULAS[formula](**inputs))


def _epoch(cfg: ExperimentConfig, analytic: int) -> int:
    return analytic if cfg.epoch == "analytic" else int(cfg.epoch)


def _build_edge_meg(spec: dict, n: int, cfg: ExperimentConfig) -> ModelInstance:
    espec = edgemeg.spec_from_config(spec)
    meg = edgemeg.EdgeMeg(n, espec)
    alpha = edgemeg.edge_meg_alpha(espec)
    mix = mixing_report(espec.kernel)
    M = _epoch(cfg, mix.steps)
    analytics = {"alpha": alpha, "beta": 1.0, "t_mix": mix.steps, "M": M,
                 "t_mix_method": mix.method}
    ok = {"alpha>0": alpha > 0}
    bounds = {
        "stationarity": BoundInfo("stationarity", {"M": M, "alpha": alpha, "beta": 1.0, "n": n, "c": cfg.c}, ok),
        "edge_meg": BoundInfo("edge_meg", {"t_mix": mix.steps, "alpha": alpha, "n": n, "c": cfg.c}, ok),
    }
    if "p" in spec:
        bounds["comparator"] = BoundInfo("comparator", {"n": n, "p": float(spec["p"])},
                                         {"p>0": float(spec["p"]) > 0})
    return ModelInstance(meg, analytics, bounds, (alpha, 1.0) if alpha > 0 else None)


def _node_meg_instance(nm: nodemeg.NodeMeg, cfg: ExperimentConfig, extra: dict | None = None,
                       more_bounds: dict | None = None) -> ModelInstance:
    n = nm.n
    analytics = {"p_nm": nm.p_nm, "p_nm2": nm.p_nm2}
    bounds: dict[str, BoundInfo] = {}
    ab = None
    notes = list(nm.flags)
    if nm.p_nm > 0:
        mix = nm.mixing_estimate
        eta = nm.eta
        M = _epoch(cfg, nodemeg.epoch_length_value(mix.steps, nm.p_nm, n))
        analytics.update(eta=eta, t_mix=mix.steps, M=M, t_mix_method=mix.method,
                         alpha=nm.p_nm, beta=nodemeg.PAIR_DEPENDENCE_FACTOR * eta)
        bounds["node_meg"] = BoundInfo("node_meg", {"t_mix": mix.steps, "p_nm": nm.p_nm, "eta": eta,
                                                    "n": n, "c": cfg.c}, {"p_nm>0": True})
        # general bound with the analytic density and the pair-dependence factor 17*eta
        bounds["stationarity"] = BoundInfo(
            "stationarity", {"M": M, "alpha": min(1.0, nm.p_nm), "beta": nodemeg.PAIR_DEPENDENCE_FACTOR * eta,
                         "n": n, "c": cfg.c}, {"p_nm>0": True}, "alpha = P_NM, beta = 17 eta")
        ab = (min(1.0, nm.p_nm), nodemeg.PAIR_DEPENDENCE_FACTOR * eta)
    else:
        notes.append("P_NM = 0: no bound applies")
    analytics.update(extra or {})
    bounds.update(more_bounds or {})
    return ModelInstance(nm.as_meg(), analytics, bounds, ab, notes)


def _graph_from_spec(doc: dict) -> mobility.MobilityGraph:
    doc = dict(doc)
    if "edges" in doc:
        return mobility.MobilityGraph.from_json(doc)
    name = doc.pop("name")
    try:
        gen = mobility.GRAPH_GENERATORS[name]
    except KeyError:
        raise ConfigError(f"unknown graph {name!r}") from None
    return gen(**{k: int(v) for k, v in doc.items()})


def _build_random_walk(spec: dict, n: int, cfg: ExperimentConfig) -> ModelInstance:
    H = _graph_from_spec(spec["graph"])
    nm = mobility.build_random_walk(H, n, laziness=float(spec.get("laziness", 0.0)))
    checks = mobility.path_family_checks(H, H.edge_paths())
    return _graph_model(nm, H, checks, cfg, walk=True)


def _build_random_path(spec: dict, n: int, cfg: ExperimentConfig) -> ModelInstance:
    H = _graph_from_spec(spec["graph"])
    fam = spec.get("paths", "edges")
    P = H.edge_paths() if fam == "edges" else mobility.PathFamily(fam)
    nm = mobility.build_random_path(H, P, n, strict=True)
    checks = mobility.path_family_checks(H, P)
    return _graph_model(nm, H, checks, cfg, walk=fam == "edges")


def _graph_model(nm, H, checks, cfg, walk: bool) -> ModelInstance:
    n = nm.n
    extra = {"points": H.point_count, "path_delta": checks.delta, "simple": checks.simple,
             "reversible": checks.reversible, "graph_delta": mobility.graph_delta(H)}
    inst = _node_meg_instance(nm, cfg, extra)
    if "t_mix" in inst.analytics:
        t = inst.analytics["t_mix"]
        inst.bounds["path_model"] = BoundInfo(
            "path_model", {"t_mix": t, "points": H.point_count, "delta": checks.delta, "n": n, "c": cfg.c},
            {"simple": checks.simple, "reversible": checks.reversible})
        inst.bounds["graph_walk"] = BoundInfo(
            "graph_walk", {"t_mix": t, "points": H.point_count, "delta": mobility.graph_delta(H),
                           "n": n, "c": cfg.c}, {"random_walk": walk})
    return inst


def _build_waypoint(spec: dict, n: int, cfg: ExperimentConfig) -> ModelInstance:
    wcfg = mobility.WaypointConfig(n=n, L=float(spec["L"]), r=float(spec["r"]),
                                   v_min=float(spec["v_min"]), v_max=float(spec.get("v_max", spec["v_min"])),
                                   m=spec.get("m"))
    wa = mobility.analyse_waypoint(wcfg)
    rc = wa.region
    extra = {"lattice": wcfg.resolution, "spacing": wcfg.spacing, "r_over_spacing": wcfg.r / wcfg.spacing,
             "region_delta": rc.delta, "region_lambda": rc.lam, "states": wa.model.state_count}
    inst = _node_meg_instance(wa.model, cfg, extra)
    if "t_mix" in inst.analytics:
        inst.bounds["waypoint_region"] = BoundInfo(
            "waypoint_region", {"t_mix": inst.analytics["t_mix"], "delta": rc.delta, "lam": rc.lam,
                           "volume": rc.volume, "radius": rc.radius, "dim": rc.dim, "n": n, "c": cfg.c},
            {"region_conditions": rc.passed, "r>0": rc.radius > 0}, rc.note)
    return inst


def _build_node_meg(spec: dict, n: int, cfg: ExperimentConfig) -> ModelInstance:
    doc = dict(spec)
    doc["n"] = n
    return _node_meg_instance(nodemeg.model_from_json(doc), cfg)


def _build_static(spec: dict, n: int, cfg: ExperimentConfig) -> ModelInstance:
    kind = spec.get("graph", "complete")
    makers = {"complete": Snapshot.complete, "empty": Snapshot.empty, "path": Snapshot.path,
              "star": Snapshot.star}
    if kind not in makers:
        raise ConfigError(f"unknown static graph {kind!r}")
    return ModelInstance(StaticMeg(makers[kind](n)), {"M": 1}, {}, None)


MODEL_BUILDERS: dict[str, Callable[[dict, int, ExperimentConfig], ModelInstance]] = {
    "edge_meg": _build_edge_meg,
    "random_walk": _build_random_walk,
    "random_path": _build_random_path,
    "waypoint": _build_waypoint,
    "node_meg": _build_node_meg,
    "static": _build_static,
}


def build_model(spec: dict, n: int, cfg: ExperimentConfig) -> ModelInstance:
    return MODEL_BUILDERS[spec["name"]](_resolve(spec, n), n, cfg)


# --- running ---------------------------------------------------------------------------

RESULT_COLUMNS = (
    "config_hash", "model_id", "n", "seed", "trials", "timeouts", "step_cap",
    "flood_mean", "flood_median", "flood_q90", "flood_whp", "max_source_median",
    "spreading_mean", "saturation_mean",
    "alpha_hat", "alpha_radius", "beta_hat", "beta_radius",
    "alpha", "beta", "p_nm", "p_nm2", "eta", "t_mix", "M",
    "bound_stationarity", "bound_node_meg", "bound_edge_meg", "bound_comparator",
    "bound_waypoint_region", "bound_path_model", "bound_graph_walk",
    "ratio_stationarity", "ratio_node_meg", "preconditions", "status",
)


@dataclass
class RunOutcome:
    records: list[dict]
    failures: list[str]
    out_dir: Path | None

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return repr(x)
    return str(x)


def _step_cap(cfg: ExperimentConfig, inst: ModelInstance, n: int) -> int:
    if cfg.step_cap is not None:
        return int(cfg.step_cap)
    if inst.alpha_beta is None or "M" not in inst.analytics:
        return DEFAULT_STEP_CAP
    a, b = inst.alpha_beta
    bound = stationarity_bound(BoundParams(inst.analytics["M"], a, b, n, cfg.c))
    return int(min(DEFAULT_STEP_CAP, max(1, math.ceil(100 * bound))))


def _requested(cfg: ExperimentConfig) -> set[str] | None:
    if cfg.bounds == "auto":
        return None
    names = set(cfg.bounds)
    unknown = names - set(BOUND_FORMULAS)
    if unknown:
        raise ConfigError(f"unknown bounds requested: {sorted(unknown)}")
    return names


def run_point(cfg: ExperimentConfig, spec: dict, n: int, seed: int, *, stages=STAGES,
              workers: int = 1, runs_out: list | None = None) -> tuple[dict, list[str]]:
    """One (model, n, seed) cell: returns its record and any failures."""
    mid = model_id(spec)
    rec: dict[str, Any] = {"config_hash": cfg.config_hash, "model_id": mid, "n": n, "seed": seed}
    failures: list[str] = []
    try:
        inst = build_model(spec, n, cfg)
    except (ConfigError, MarkovError, mobility.MobilityError, nodemeg.NodeMegError, ValueError) as exc:
        rec["status"] = f"model construction failed: {exc}"
        return rec, [f"{mid} n={n}: {rec['status']}"]
    rec.update({k: v for k, v in inst.analytics.items()})
    rec["notes"] = inst.notes
    requested = _requested(cfg)

    bounds_out = {}
    if "bounds" in stages:
        for name, info in inst.bounds.items():
            entry = {"formula": info.formula, "inputs": info.inputs,
                     "preconditions": info.preconditions, "value": info.value, "note": info.note}
            bounds_out[name] = entry
            rec[f"bound_{name}"] = info.value
        if requested is not None:
            for name in sorted(requested):
                if name not in inst.bounds:
                    failures.append(f"{mid} n={n}: bound {name} does not apply to this model")
                elif not inst.bounds[name].applicable:
                    bad = [k for k, v in inst.bounds[name].preconditions.items() if not v]
                    failures.append(f"{mid} n={n}: bound {name} preconditions failed: {', '.join(bad)}")
    rec["bounds"] = bounds_out
    rec["preconditions"] = ";".join(
        f"{name}:{'ok' if info.applicable else 'failed(' + ','.join(k for k, v in info.preconditions.items() if not v) + ')'}"
        for name, info in sorted(inst.bounds.items()))

    M = int(inst.analytics.get("M", 1))
    if "estimate" in stages and cfg.estimator.enabled:
        a_hat = estimate_alpha(inst.process, M, cfg.estimator.burn_in_epochs, cfg.estimator.trials,
                               stream(seed, mid, n, "alpha"))
        rec.update(alpha_hat=a_hat.value, alpha_radius=a_hat.radius)
        sizes = cfg.estimator.set_sizes
        if sizes is not None:
            sizes = [a for a in sizes if a <= n - 2]
        b_hat = estimate_beta(inst.process, M, sizes, cfg.estimator.trials,
                              stream(seed, mid, n, "beta"), burn_in_epochs=cfg.estimator.burn_in_epochs)
        rec.update(beta_hat=b_hat.value, beta_radius=b_hat.radius, estimator_note=b_hat.note)
        if a_hat.value > 0 and math.isfinite(b_hat.value):
            params = {"M": M, "alpha": a_hat.value, "beta": b_hat.value, "n": n, "c": cfg.c}
            bounds_out["stationarity_estimated"] = {
                "formula": "stationarity", "inputs": params, "preconditions": {"alpha_hat>0": True},
                "value": evaluate_bound("stationarity", params), "note": "alpha_hat, beta_hat plugged in"}

    if "flood" in stages and cfg.trials > 0:
        cap = _step_cap(cfg, inst, n)
        runs = run_floods(inst.process, cfg.sources, cfg.trials, cap, seed, (mid, n), workers)
        maxes = None
        if cfg.max_source_trials:
            maxes = max_source_samples(inst.process, cfg.max_source_trials, cap, seed, (mid, n), workers)
        stats = summarize(runs, maxes)
        o = stats.overall
        rec.update(trials=o.count, timeouts=o.timeouts, step_cap=cap, flood_mean=o.mean,
                   flood_median=o.median, flood_q90=o.q90, flood_whp=o.q_whp,
                   spreading_mean=stats.mean_spreading, saturation_mean=stats.mean_saturation,
                   max_source_median=None if maxes is None else stats.max_over_sources.median,
                   flags=stats.flags)
        for name in ("stationarity", "node_meg"):
            b = rec.get(f"bound_{name}")
            if b:
                rec[f"ratio_{name}"] = o.median / b
        rec["series"] = {"median_informed": _median_curve(runs)}
        if runs_out is not None:
            runs_out.extend(run_rows(runs, mid, seed))
    rec["status"] = "ok" if not failures else "; ".join(failures)
    return rec, failures


def _median_curve(runs) -> list[float]:
    """Median |I_t| per step across runs (completed runs padded with n)."""
    longest = max(len(r.informed_sizes) for r in runs)
    mat = np.array([list(r.informed_sizes) + [r.informed_sizes[-1]] * (longest - len(r.informed_sizes))
                    for r in runs], dtype=float)
    return [float(x) for x in np.median(mat, axis=0)]


def run(cfg: ExperimentConfig, out_dir=None, *, workers: int = 1, strict: bool = False,
        stages=STAGES) -> RunOutcome:
    """Run the full sweep. Failures are recorded; with ``strict`` the first one stops the run."""
    records, failures, run_rows_all = [], [], []
    for spec in cfg.models:
        for n in cfg.n_values:
            for seed in cfg.seeds:
                rec, fails = run_point(cfg, spec, int(n), int(seed), stages=stages, workers=workers,
                                       runs_out=run_rows_all)
                records.append(rec)
                failures.extend(fails)
                if fails and strict:
                    break
            if failures and strict:
                break
        if failures and strict:
            break
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        write_outputs(cfg, records, run_rows_all, failures, out)
    return RunOutcome(records, failures, out)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_outputs(cfg: ExperimentConfig, records, rows, failures, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_runs_csv(rows, out / "runs.csv")
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for rec in records:
            w.writerow([_fmt(rec.get(col)) for col in RESULT_COLUMNS])
    summary = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": cfg.config_hash,
        "config": cfg.to_dict(),
        "records": records,
        "failures": failures,
    }
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")


# --- verification suites ------------------------------------------------------------


def verify_point(cfg: ExperimentConfig, spec: dict, n: int, seed: int, *, samples: int = 2000) -> dict:
    """Expansion-event frequencies, and for node-MEGs the pairwise-dependence check."""
    from .dyngraph import ExpansionConfig, verify_expansion_events

    mid = model_id(spec)
    inst = build_model(spec, n, cfg)
    out: dict[str, Any] = {"model_id": mid, "n": n, "seed": seed, "checks": [], "passed": True}
    a = inst.analytics.get("alpha")
    b = inst.analytics.get("beta")
    M = int(inst.analytics.get("M", 1))
    if a is None or b is None:
        M_est = M
        a = estimate_alpha(inst.process, M_est, trials=cfg.estimator.trials,
                           rng=stream(seed, mid, n, "alpha")).value
        b = estimate_beta(inst.process, M_est, trials=cfg.estimator.trials,
                          rng=stream(seed, mid, n, "beta")).value
    sizes = tuple(s for s in (2, 4, 8) if s <= n // 4) or (1,)
    ecfg = ExpansionConfig(set_sizes=sizes, samples=samples, dynamic_samples=max(50, samples // 20),
                           events=("degree", "expansion", "contact"))
    rep = verify_expansion_events(inst.process, a, b, M, ecfg, stream(seed, mid, n, "verify"))
    for c in rep.checks:
        out["checks"].append({"suite": c.event, "size": c.set_size, "observed": c.observed,
                              "required": c.required, "passed": c.passed})
    out["flags"] = rep.flags
    model = getattr(inst.process, "model", None)
    if isinstance(model, nodemeg.NodeMeg) and model.p_nm > 0:
        pair_rep = nodemeg.verify_pair_dependence(model, tuple(s for s in (1, 2, 3) if s <= n - 2), 20_000,
                                     stream(seed, mid, n, "pairs"))
        for r in pair_rep.rows:
            out["checks"].append({"suite": f"pair_dependence/{r.method}", "size": r.size, "observed": r.ratio,
                                  "required": r.limit, "passed": r.passed})
    out["passed"] = all(c["passed"] is not False for c in out["checks"])
    return out


# --- presets --------------------------------------------------------------------------

PRESETS: dict[str, dict] = {
    "edge-meg-sweep": {
        "name": "edge-meg-sweep",
        "description": "Two-state edge-MEG with p = 2/n, q = 0.5 (q >= np regime) over n in {64, 128, 256}",
        "models": [{"name": "edge_meg", "p": "2/n", "q": 0.5}],
        "n_values": [64, 128, 256],
        "seeds": [1],
        "trials": 200,
        "estimator": {"trials": 60},
    },
    "waypoint-sparse": {
        "name": "waypoint-sparse",
        "description": "Random waypoint, side sqrt(n), constant radius and speed 2, n in {100, 400}",
        "models": [{"name": "waypoint", "L": "sqrt(n)", "r": 2, "v_min": 2, "v_max": 2}],
        "n_values": [100, 400],
        "seeds": [1],
        "trials": 40,
        "estimator": {"enabled": False},
    },
    "k-augmented-grid": {
        "name": "k-augmented-grid",
        "description": "Random walk on an 8x8 grid augmented to hop distance k in {2, 3, 4}, n = 64",
        "models": [{"name": "random_walk", "graph": {"name": "k_augmented_grid", "m": 8, "k": k}}
                   for k in (2, 3, 4)],
        "n_values": [64],
        "seeds": [1],
        "trials": 60,
        "estimator": {"trials": 40},
    },
    "cycle-paths": {
        "name": "cycle-paths",
        "description": "Edge paths on the 3-cycle (exact analytics: P_NM = 1/3, eta = 1), n in {16, 32, 64}",
        "models": [{"name": "random_path", "graph": {"name": "cycle", "m": 3}, "paths": "edges"}],
        "n_values": [16, 32, 64],
        "seeds": [1],
        "trials": 100,
        "estimator": {"trials": 60},
    },
}


def presets() -> list[tuple[str, str]]:
    return [(name, doc["description"]) for name, doc in PRESETS.items()]


def preset_config(name: str, **overrides) -> ExperimentConfig:
    try:
        doc = copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(doc)
