"""Command-line entry point.

Subcommands wire declarative scenario configs to the samplers, estimators and
the transfer engine:

    pathineq transfer --config scenario.yaml [--out DIR]
    pathineq sample   --config scenario.yaml [--seed N] [--out DIR]
    pathineq estimate --config scenario.yaml [--out DIR] [--threads N]
    pathineq verify   SUITE [--out DIR]

Exit codes: 0 all pass, 1 criterion failure, 2 config or I/O error.  The
default output directory comes from $PATHINEQ_OUT.  Multiple --config flags
run scenarios (in parallel with --threads) and merge reports by scenario
name.  All outputs are UTF-8 JSON/CSV; ensembles use the columnar binary
format of the samplers module.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

REPORT_SCHEMA_VERSION = "pathineq.runreport.v1"

EXIT_OK = 0
EXIT_CRITERION = 1
EXIT_CONFIG = 2


def _versions():
    import scipy

    from . import __version__

    return {
        "pathineq": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _report(command, scenarios, t0):
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": command,
        "scenarios": sorted(scenarios, key=lambda s: s["name"]),
        "versions": _versions(),
        "elapsed_s": time.time() - t0,
    }


def _write_report(report, out_dir, name="report.json"):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    return path


def _out_dir(args):
    return args.out or os.environ.get("PATHINEQ_OUT") or "pathineq_out"


# ---------------------------------------------------------------------------
# transfer


def _run_transfer_scenario(path, out_dir, seed_override=None):
    from .config import Validator, load_config, validate_transfer
    from .pipeline import pipeline_report, run_transfer_pipeline

    data, linemap = load_config(path)
    validate_transfer(Validator(data, linemap, str(path)))
    t0 = time.time()
    results = run_transfer_pipeline(data, base_dir=os.path.dirname(os.path.abspath(path)))
    report = pipeline_report(results, grid_points=data.get("profile_grid", {}).get("points", 48))
    name = data["name"]
    out_json = os.path.join(out_dir, f"{name}.transfer.json")
    os.makedirs(out_dir, exist_ok=True)
    with open(out_json, "w") as fh:
        json.dump({"name": name, "stages": report}, fh, indent=1)
    _emit_profile_csv(out_dir, name, report)
    return {
        "name": name,
        "status": "ok",
        "outputs": [out_json],
        "elapsed_s": time.time() - t0,
        "final_kind": results[-1].kind,
    }


def _emit_profile_csv(out_dir, name, report):
    # CSV series for plotting elsewhere (profiles only; no plots here)
    for i, stage in enumerate(report):
        tab = stage.get("tabulated") or {}
        if "s" not in tab:
            continue
        ycol = "alpha" if "alpha" in tab else "beta"
        path = os.path.join(out_dir, f"{name}.stage{i}.{ycol}.csv")
        with open(path, "w") as fh:
            fh.write(f"s,{ycol}\n")
            for s, v in zip(tab["s"], tab[ycol]):
                fh.write(f"{s!r},{v!r}\n")


def cmd_transfer(args):
    t0 = time.time()
    out_dir = _out_dir(args)
    scenarios = _run_scenarios(args, _run_transfer_scenario, out_dir)
    report = _report("transfer", scenarios, t0)
    path = _write_report(report, out_dir, "transfer_report.json")
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sample


def _build_sampler_config(data, seed_override=None):
    from .samplers import SamplerConfig, TimeGrid

    T = float(data["T"])
    gspec = data["grid"]
    if data["sampler"] == "hyperbolic_bridge" or "tail" in gspec:
        tail = gspec.get("tail", {})
        grid = TimeGrid.with_geometric_tail(
            T, gspec["n_steps"], lam=tail.get("lam", 0.5), floor=tail.get("floor", 1e-6)
        )
    else:
        grid = TimeGrid.uniform(T, gspec["n_steps"])

    def point(spec, dim_plus):
        if spec is None or spec == "origin":
            return None
        return tuple(float(x) for x in spec)

    return SamplerConfig(
        seed=int(seed_override if seed_override is not None else data["seed"]),
        n_paths=int(data["n_paths"]),
        grid=grid,
        dim=int(data["dim"]),
        x0=point(data.get("x0"), data["dim"]),
        y0=point(data.get("y0"), data["dim"]),
        drift_cap=float(data.get("drift_cap", 4.0)),
    )


def _run_sample_scenario(path, out_dir, seed_override=None):
    from .config import Validator, load_config, validate_sample
    from .samplers import (
        ensemble_to_csv,
        sample_flat_bridge,
        sample_hyperbolic_bridge,
        sample_ou,
        sample_wiener,
        save_ensemble,
    )

    data, linemap = load_config(path)
    validate_sample(Validator(data, linemap, str(path)))
    cfg = _build_sampler_config(data, seed_override)
    t0 = time.time()
    sampler = {
        "wiener": sample_wiener,
        "flat_bridge": sample_flat_bridge,
        "ou": sample_ou,
        "hyperbolic_bridge": sample_hyperbolic_bridge,
    }[data["sampler"]]
    ens = sampler(cfg)
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, data["out"])
    if data.get("format", "binary") == "csv":
        ensemble_to_csv(out_path, ens)
    else:
        save_ensemble(out_path, ens)
    return {
        "name": data["name"],
        "status": "ok",
        "outputs": [out_path],
        "elapsed_s": time.time() - t0,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash,
        "measure_tag": ens.measure_tag,
        "diagnostics": {
            k: (float(v) if np.isscalar(v) or isinstance(v, float) else None)
            for k, v in ens.diagnostics.items()
            if not isinstance(v, np.ndarray)
        },
    }


def cmd_sample(args):
    t0 = time.time()
    out_dir = _out_dir(args)
    scenarios = _run_scenarios(args, _run_sample_scenario, out_dir)
    report = _report("sample", scenarios, t0)
    path = _write_report(report, out_dir, "sample_report.json")
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate


def _build_functions(specs, T):
    from .estimators import coordinate_function, exp_half_function, hermite_function

    out = []
    for spec in specs:
        kind = spec["type"]
        t = float(spec.get("time", T))
        if kind == "coordinate":
            out.append(coordinate_function(t, coord=int(spec.get("coord", 0)), label=spec.get("label")))
        elif kind == "hermite":
            out.append(
                hermite_function(int(spec["degree"]), t, coord=int(spec.get("coord", 0)), label=spec.get("label"))
            )
        elif kind == "exp_half":
            out.append(exp_half_function(float(spec["lam"]), t, label=spec.get("label")))
    return out


def _run_estimate_scenario(path, out_dir, seed_override=None):
    from .config import ConfigError, Validator, load_config, validate_estimate
    from .estimators import (
        GreenKernel,
        entropy,
        exp_square_moment,
        lsi_ratio,
        rayleigh_scan,
        sup_distance,
        variance,
        weight_tail,
    )
    from .samplers import load_ensemble

    data, linemap = load_config(path)
    v = Validator(data, linemap, str(path))
    validate_estimate(v)
    ens_path = data["ensemble"]
    if not os.path.isabs(ens_path):
        candidate = os.path.join(os.path.dirname(os.path.abspath(path)), ens_path)
        ens_path = candidate if os.path.exists(candidate) else os.path.join(out_dir, ens_path)
    if not os.path.exists(ens_path):
        raise ConfigError(f"ensemble file not found: {ens_path}", file=str(path), path="ensemble")
    t0 = time.time()
    ens = load_ensemble(ens_path)
    T = ens.grid.T
    kernel = None
    if data.get("kernel"):
        kernel = GreenKernel(variant=data["kernel"], T=T)
    family = _build_functions(data.get("functions", []), T)

    records = {"seed": ens.config.seed, "config_hash": ens.config.config_hash}
    results = {}
    csv_rows = None
    for est_name in data["estimators"]:
        if est_name in ("rayleigh", "lsi_ratio") and kernel is None:
            raise ConfigError(
                f"estimator {est_name!r} needs a 'kernel' entry", file=str(path), path="kernel"
            )
        if est_name == "rayleigh":
            scan = rayleigh_scan(family, ens, kernel)
            results["rayleigh"] = scan.to_dict()
            csv_rows = scan.rows
        elif est_name == "variance":
            results["variance"] = {F.label: _est_dict(variance(F, ens)) for F in family}
        elif est_name == "entropy":
            results["entropy"] = {F.label: _est_dict(entropy(F, ens)) for F in family}
        elif est_name == "lsi_ratio":
            results["lsi_ratio"] = {
                F.label: _est_dict(lsi_ratio(F, ens, kernel)) for F in family
            }
        elif est_name == "weight_tail":
            results["weight_tail"] = weight_tail(ens).to_dict()
        elif est_name == "exp_square_moment":
            u = sup_distance(ens)
            est = exp_square_moment(u, float(data.get("exp_square_c", 0.25)))
            results["exp_square_moment"] = _est_dict(est)

    os.makedirs(out_dir, exist_ok=True)
    out_json = os.path.join(out_dir, data["out"])
    with open(out_json, "w") as fh:
        json.dump({"name": data["name"], "provenance": records, "results": results}, fh, indent=1, default=_json_default)
    outputs = [out_json]
    if csv_rows is not None:
        csv_path = os.path.join(out_dir, f"{data['name']}.rayleigh.csv")
        with open(csv_path, "w") as fh:
            fh.write("label,variance,variance_se,energy,energy_se,ratio,ratio_se,seed,config_hash\n")
            for r in csv_rows:
                fh.write(
                    f"{r.label},{r.variance.value!r},{r.variance.std_error!r},"
                    f"{r.energy.value!r},{r.energy.std_error!r},"
                    f"{r.ratio.value!r},{r.ratio.std_error!r},"
                    f"{records['seed']},{records['config_hash']}\n"
                )
        outputs.append(csv_path)
    return {
        "name": data["name"],
        "status": "ok",
        "outputs": outputs,
        "elapsed_s": time.time() - t0,
        "seed": ens.config.seed,
        "config_hash": ens.config.config_hash,
    }


def _est_dict(est):
    return vars(est) | {"flags": list(est.flags)}


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, tuple):
        return list(v)
    raise TypeError(f"not JSON serializable: {type(v)}")


def cmd_estimate(args):
    t0 = time.time()
    out_dir = _out_dir(args)
    scenarios = _run_scenarios(args, _run_estimate_scenario, out_dir)
    report = _report("estimate", scenarios, t0)
    path = _write_report(report, out_dir, "estimate_report.json")
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args):
    from .acceptance import SUITES, run_suite

    t0 = time.time()
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {sorted(SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = _out_dir(args)
    os.makedirs(out_dir, exist_ok=True)
    results = run_suite(args.suite, out_dir=out_dir)
    scenarios = [
        {"name": r.cid, "status": "pass" if r.passed else "fail", **r.to_dict()}
        for r in results
    ]
    report = _report(f"verify:{args.suite}", scenarios, t0)
    path = _write_report(report, out_dir, "verify_report.json")
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} criteria passed; wrote {path}")
    return EXIT_OK if n_fail == 0 else EXIT_CRITERION


# ---------------------------------------------------------------------------
# shared plumbing


def _run_scenarios(args, runner, out_dir):
    configs = args.config
    seed = getattr(args, "seed", None)
    results = []
    errors = []

    def run_one(path):
        return runner(path, out_dir, seed_override=seed)

    if args.threads > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as ex:
            futs = {ex.submit(run_one, p): p for p in configs}
            for fut, p in futs.items():
                try:
                    results.append(fut.result())
                except Exception as exc:
                    errors.append((p, exc))
    else:
        for p in configs:
            try:
                results.append(run_one(p))
            except Exception as exc:
                errors.append((p, exc))
    if errors:
        for p, exc in errors:
            print(f"error: {exc}", file=sys.stderr)
        raise _ScenarioFailure()
    names = [r["name"] for r in results]
    if len(set(names)) != len(names):
        print("error: duplicate scenario names across configs", file=sys.stderr)
        raise _ScenarioFailure()
    return results


class _ScenarioFailure(Exception):
    pass


def make_parser():
    p = argparse.ArgumentParser(
        prog="pathineq",
        description="functional-inequality transfers and path-space Monte Carlo",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument(
                "--config", action="append", required=True, metavar="PATH",
                help="scenario config file (repeatable)",
            )
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out", default=None, metavar="DIR", help="output directory (default $PATHINEQ_OUT)")
        sp.add_argument("--threads", type=int, default=1, metavar="N", help="scenario-level parallelism")

    sp = sub.add_parser("transfer", help="run a chain of inequality transfers")
    common(sp)
    sp.set_defaults(fn=cmd_transfer)

    sp = sub.add_parser("sample", help="sample a path ensemble to a file")
    common(sp)
    sp.set_defaults(fn=cmd_sample)

    sp = sub.add_parser("estimate", help="run estimators over a stored ensemble")
    common(sp)
    sp.set_defaults(fn=cmd_estimate)

    sp = sub.add_parser("verify", help="run an acceptance suite")
    sp.add_argument("suite", help="suite name (e.g. gaussian, transfer, all)")
    common(sp, needs_config=False)
    sp.set_defaults(fn=cmd_verify)
    return p


def main(argv=None):
    from .config import ConfigError
    from .pipeline import PipelineError
    from .samplers import SamplerError

    args = make_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _ScenarioFailure:
        return EXIT_CONFIG
    except (ConfigError, PipelineError, SamplerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
