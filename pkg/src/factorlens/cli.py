"""Command-line pipeline driver: make-data, study, sweep, explain, serve.

Exit codes: 0 ok, 2 user error (bad flags, missing or invalid files),
3 environment error (e.g. port already in use).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bundle import BundleError, load_bundle, make_bundle, save_bundle
from .configs import SPLIT_FEATURE, builtin_config, write_config
from .datasets import DatasetError, load_config, load_dataset, make_split_plan
from .evaluation import run_modeling_study, threshold_sweep
from .forest import ForestConfig, train_forest
from .presentation import build_table
from .synth import GENERATORS


class UserError(Exception):
    pass


def _config_hash(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def _prepare_out(out: Path, names: list[str], force: bool):
    out.mkdir(parents=True, exist_ok=True)
    if not force:
        clashes = [n for n in names if (out / n).exists()]
        if clashes:
            raise UserError(f"output files exist (use --force): {clashes}")


def _forest_config(args, seed: int) -> ForestConfig:
    return ForestConfig(
        n_trees=args.n_trees, max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        features_per_split=args.features_per_split,
        bootstrap=not args.no_bootstrap, seed=seed,
    )


def cmd_make_data(args) -> int:
    out = Path(args.out)
    offsets = {"house_sales": 7, "heart_disease": 11, "auto_mpg": 13}
    for name, gen in GENERATORS.items():
        csv_path = gen(out / "data" / f"{name}.csv", seed=args.seed + offsets[name])
        cfg = builtin_config(name, f"../data/{name}.csv")
        write_config(cfg, out / "configs" / f"{name}.json")
        print(f"wrote {csv_path} and configs/{name}.json")
    return 0


def cmd_study(args) -> int:
    cfg_path = Path(args.dataset)
    if not cfg_path.exists():
        raise UserError(f"dataset config not found: {cfg_path}")
    cfg = load_config(cfg_path)
    dataset = load_dataset(cfg)
    out = Path(args.out)
    artifacts = ["table2.csv", "table2.json", "heldout.json", "bundle.json"]
    _prepare_out(out, artifacts, args.force)

    result = run_modeling_study(dataset, args.seed, _forest_config(args, args.seed))
    meta = {
        "version": __version__,
        "seed": args.seed,
        "config_hash": _config_hash(cfg_path),
        "dataset": dataset.name,
    }

    with open(out / "table2.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(
            ["dataset", "xai_type", "subspace", "kind", "mean", "std"]
            + [f"fold{i}" for i in range(5)]
            + ["version", "seed", "config_hash"]
        )
        for r in result["reports"]:
            w.writerow(
                [r["dataset"], r["xai_type"], r["subspace"], r["kind"],
                 repr(r["mean"]), repr(r["std"])]
                + [repr(v) for v in r["folds"]]
                + [meta["version"], meta["seed"], meta["config_hash"]]
            )

    models = result.pop("models")
    with open(out / "table2.json", "w", encoding="utf-8") as f:
        json.dump({"meta": meta, **result}, f, indent=2)
        f.write("\n")
    with open(out / "heldout.json", "w", encoding="utf-8") as f:
        json.dump({"meta": meta, **result["heldout"]}, f, indent=2)
        f.write("\n")

    bundle = make_bundle(
        dataset, args.seed, models["forest"], models["global"],
        models["subglobal"], models["incremental"],
    )
    save_bundle(bundle, out / "bundle.json")
    print(f"study complete: {out}/table2.csv, table2.json, heldout.json, bundle.json")
    return 0


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, step = (int(v) for v in spec.split(":"))
        if not (0 < lo <= hi < 100 and step > 0):
            raise ValueError
    except ValueError:
        raise UserError(f"bad grid spec {spec!r}; expected lo:hi:step like 10:90:5") from None
    return np.arange(lo, hi + 1, step)


def cmd_sweep(args) -> int:
    cfg_path = Path(args.dataset)
    if not cfg_path.exists():
        raise UserError(f"dataset config not found: {cfg_path}")
    cfg = load_config(cfg_path)
    dataset = load_dataset(cfg)
    grid = _parse_grid(args.grid)
    out = Path(args.out)
    _prepare_out(out, ["sweep.csv", "sweep_factors.csv"], args.force)

    plan = make_split_plan(dataset.n_rows, args.seed)
    tr = plan.train_indices
    forest = train_forest(dataset.X[tr], dataset.y[tr], _forest_config(args, args.seed), dataset.task)
    from .explainers import fit_subglobal

    feature_index = fit_subglobal(dataset.X[tr], forest.predict(dataset.X[tr])).rule.feature_index
    result = threshold_sweep(dataset, forest, feature_index, grid, train_indices=tr)

    meta = [__version__, args.seed, _config_hash(cfg_path)]
    ok = [p for p in result["points"] if p["status"] == "ok"]
    best_thr = min(ok, key=lambda p: p["subglobal_mae_combined"])["threshold"] if ok else None
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["threshold", "percentile", "series", "value", "status", "is_min",
                    "version", "seed", "config_hash"])
        for p in result["points"]:
            if p["status"] == "skipped":
                w.writerow([repr(p["threshold"]), p["percentile"], "", "", "skipped", "", *meta])
                continue
            for series in ("subglobal_mae_typical", "subglobal_mae_outlier",
                           "subglobal_mae_combined", "subglobal_mae_combined_norm",
                           "incremental_mae_typical", "incremental_mae_outlier",
                           "incremental_mae_combined", "incremental_mae_combined_norm"):
                w.writerow([repr(p["threshold"]), p["percentile"], series, repr(p[series]),
                            "ok", int(p["threshold"] == best_thr), *meta])

    names = ["adjustment"] + dataset.feature_names
    with open(out / "sweep_factors.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["threshold", "percentile", "model", "term", "value",
                    "version", "seed", "config_hash"])
        for p in ok:
            for model, key in (
                ("subglobal_typical", "subglobal_factors_typical"),
                ("subglobal_outlier", "subglobal_factors_outlier"),
                ("incremental_base", "incremental_base"),
                ("incremental_delta", "incremental_deltas"),
            ):
                for term, value in zip(names, p[key]):
                    w.writerow([repr(p["threshold"]), p["percentile"], model, term,
                                repr(value), *meta])
    print(f"sweep complete: {out}/sweep.csv, sweep_factors.csv "
          f"(feature={result['feature']}, lambda={result['lambda']:g})")
    return 0


def cmd_explain(args) -> int:
    try:
        bundle = load_bundle(args.bundle)
    except BundleError as e:
        raise UserError(str(e)) from None
    if args.xai not in ("global", "subglobal", "incremental", "local"):
        raise UserError(f"unknown xai type {args.xai!r}")
    try:
        values = [float(v) for v in args.values.split(",")]
    except ValueError:
        raise UserError(f"bad --values {args.values!r}") from None
    if len(values) != len(bundle.feature_names):
        raise UserError(f"expected {len(bundle.feature_names)} values")
    x = np.asarray(values)
    if not np.isfinite(x).all():
        raise UserError("values must be finite")

    prediction = bundle.forest.predict_one(x)
    if args.xai == "local":
        from .explainers import LocalConfig, fit_local
        from .service import instance_seed

        lc = bundle.local_config
        model = fit_local(
            x, bundle.forest.predict, bundle.feature_std,
            LocalConfig(lc.n_samples, lc.perturb_scale, lc.kernel_width,
                        instance_seed(bundle.seed, x)),
        )
    else:
        model = bundle.explainer_by_type(args.xai)
    table = build_table(
        model, args.xai, x, prediction, bundle.feature_names,
        bundle.feature_units, bundle.feature_ranges,
    )

    rows = table.rows
    name_w = max(len(r.name) for r in rows) + 2
    print(f"{'attribute':<{name_w}}{'value':>10}{'factor':>10}{'delta':>8}{'contribution':>14}")
    for r in rows:
        delta = r.delta_display if r.delta_display is not None else ""
        print(f"{r.name:<{name_w}}{r.value_display:>10}{r.factor_display:>10}"
              f"{delta:>8}{r.contribution_display:>14}")
    print(f"{'adjustment':<{name_w}}{'':>10}{'':>10}{'':>8}{table.adjustment_display:>14}")
    print(f"{'estimate':<{name_w}}{'':>10}{'':>10}{'':>8}{table.estimate_display:>14}")
    print(f"{'prediction':<{name_w}}{'':>10}{'':>10}{'':>8}{table.prediction_display:>14}")
    if table.rule_text:
        print(f"subspace: {table.subspace_label}  (outliers: {table.rule_text})")
    print()
    print(json.dumps(table.as_dict(), indent=2))
    return 0


def cmd_serve(args) -> int:
    try:
        bundle = load_bundle(args.bundle)
    except BundleError as e:
        raise UserError(str(e)) from None
    from .service import serve

    try:
        serve(bundle, host=args.host, port=args.port)
    except OSError as e:
        print(f"error: cannot bind {args.host}:{args.port}: {e}", file=sys.stderr)
        return 3
    return 0


def _add_forest_flags(p: argparse.ArgumentParser):
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--min-samples-leaf", type=int, default=5)
    p.add_argument("--features-per-split", type=int, default=2)
    p.add_argument("--no-bootstrap", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="factorlens")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-data", help="generate the stand-in benchmark CSVs and configs")
    p.add_argument("--out", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_data)

    p = sub.add_parser("study", help="cross-validated faithfulness study")
    p.add_argument("--dataset", required=True, help="dataset config JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    _add_forest_flags(p)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("sweep", help="partition-threshold sweep")
    p.add_argument("--dataset", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--grid", default="10:90:5")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    _add_forest_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("explain", help="explain one instance from a saved bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--xai", required=True)
    p.add_argument("--values", required=True, help="comma-separated feature values")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("serve", help="serve the HTTP API from a saved bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--port", type=int, default=8642)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UserError, DatasetError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
