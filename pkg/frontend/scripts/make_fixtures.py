"""Regenerate the JSON fixtures used by the frontend tests.

Captures real HTTP responses from the factorlens service over a small
deterministic bundle, so rendering tests compare against genuine server
output. Run from the repository root:

    python3 frontend/scripts/make_fixtures.py
"""
import json
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from factorlens import synth
from factorlens.bundle import make_bundle
from factorlens.configs import builtin_config
from factorlens.datasets import load_dataset, make_split_plan
from factorlens.evaluation import choose_lambda
from factorlens.explainers import fit_global, fit_incremental, fit_subglobal
from factorlens.forest import ForestConfig, train_forest
from factorlens.service import create_app

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def build_client():
    with tempfile.TemporaryDirectory() as tmp:
        csv_path = synth.generate_auto_mpg(Path(tmp) / "auto_mpg.csv")
        ds = load_dataset(builtin_config("auto_mpg", csv_path))
    plan = make_split_plan(ds.n_rows, 7)
    tr = plan.train_indices
    forest = train_forest(
        ds.X[tr], ds.y[tr], ForestConfig(n_trees=20, max_depth=8, seed=7), ds.task
    )
    yhat = forest.predict(ds.X[tr])
    g = fit_global(ds.X[tr], yhat)
    s = fit_subglobal(ds.X[tr], yhat)
    lam = choose_lambda(ds.X[tr], yhat, s.rule)
    inc = fit_incremental(ds.X[tr], yhat, lam, rule=s.rule)
    bundle = make_bundle(ds, 7, forest, g, s, inc)
    return TestClient(create_app(bundle)), bundle


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    client, bundle = build_client()
    mask = bundle.subglobal_model.rule.outlier_mask(bundle.instances)
    typical = [float(v) for v in bundle.instances[int(np.flatnonzero(~mask)[0])]]
    outlier = [float(v) for v in bundle.instances[int(np.flatnonzero(mask)[0])]]
    override_name = bundle.feature_names[0]
    base_factor = bundle.global_model.factors[0]

    fixtures = {
        "model.json": client.get("/api/model"),
        "instances_balanced.json": client.get(
            "/api/instances", params={"subspace": "balanced", "count": 10}
        ),
        "explain_global.json": client.post(
            "/api/explain", json={"xai_type": "global", "values": typical}
        ),
        "explain_global_override_double.json": client.post(
            "/api/explain",
            json={
                "xai_type": "global",
                "values": typical,
                "factor_overrides": {override_name: 2.0 * base_factor},
            },
        ),
        "explain_global_override_zero.json": client.post(
            "/api/explain",
            json={
                "xai_type": "global",
                "values": typical,
                "factor_overrides": {override_name: 0.0},
            },
        ),
        "explain_incremental_typical.json": client.post(
            "/api/explain", json={"xai_type": "incremental", "values": typical}
        ),
        "explain_incremental_outlier.json": client.post(
            "/api/explain", json={"xai_type": "incremental", "values": outlier}
        ),
        "explain_local.json": client.post(
            "/api/explain", json={"xai_type": "local", "values": typical}
        ),
    }
    for name, resp in fixtures.items():
        assert resp.status_code == 200, (name, resp.text)
        (OUT / name).write_text(json.dumps(resp.json(), indent=2) + "\n")
        print("wrote", OUT / name)
    meta = {"typical_values": typical, "outlier_values": outlier,
            "override_name": override_name, "base_factor": base_factor}
    (OUT / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print("wrote", OUT / "meta.json")


if __name__ == "__main__":
    main()
