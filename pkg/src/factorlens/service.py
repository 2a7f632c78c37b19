"""Local HTTP JSON API over a trained model bundle.

Endpoints: GET /api/health, GET /api/model, POST /api/explain,
GET /api/instances.  The bundle is immutable after load; every response is
a pure function of (bundle, request), so concurrent requests are safe and
identical requests produce identical bodies.
"""
from __future__ import annotations

import hashlib
import math

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .bundle import ModelBundle
from .explainers import LocalConfig, fit_local
from .presentation import build_table

XAI_TYPES = ("global", "subglobal", "incremental", "local")


class ExplainRequest(BaseModel):
    xai_type: str
    values: list[float]
    factor_overrides: dict[str, float] | None = None
    adjustment_override: float | None = None


def instance_seed(bundle_seed: int, values) -> int:
    """Bundle seed XOR a stable hash of the instance, so identical instances
    get identical local factors."""
    key = ",".join(repr(float(v)) for v in values).encode()
    h = int.from_bytes(hashlib.sha256(key).digest()[:4], "big")
    return (bundle_seed ^ h) & 0x7FFFFFFF


def _check_values(bundle: ModelBundle, values: list[float]) -> np.ndarray:
    if len(values) != len(bundle.feature_names):
        raise HTTPException(400, f"expected {len(bundle.feature_names)} values")
    x = np.asarray(values, dtype=float)
    if not np.isfinite(x).all():
        raise HTTPException(400, "values must be finite")
    ranges = bundle.feature_ranges
    span = np.maximum(ranges[:, 1] - ranges[:, 0], 1.0)
    lo = ranges[:, 0] - 10.0 * span
    hi = ranges[:, 1] + 10.0 * span
    if ((x < lo) | (x > hi)).any():
        raise HTTPException(400, "value outside 10x the feature range")
    return x


def create_app(bundle: ModelBundle | None = None) -> FastAPI:
    app = FastAPI(title="factorlens", docs_url=None, redoc_url=None)
    app.state.bundle = bundle

    def need_bundle() -> ModelBundle:
        if app.state.bundle is None:
            raise HTTPException(503, "no model bundle loaded")
        return app.state.bundle

    @app.get("/api/health")
    def health():
        return {"status": "ok" if app.state.bundle is not None else "no-bundle"}

    @app.get("/api/model")
    def model_meta():
        b = need_bundle()
        sub = b.subglobal_model
        inc = b.incremental_model
        rule = sub.rule
        return {
            "version": b.version,
            "seed": b.seed,
            "dataset": b.dataset_meta["name"],
            "task": b.dataset_meta["task"],
            "target_unit": b.dataset_meta["target_unit"],
            "xai_types": list(XAI_TYPES),
            "features": b.dataset_meta["features"],
            "rule": {
                "feature_index": rule.feature_index,
                "threshold": rule.threshold,
                "typical_side": rule.typical_side,
                "text": rule.outlier_text(
                    b.feature_names[rule.feature_index],
                    b.feature_units[rule.feature_index],
                ),
            },
            "factors": {
                "global": {
                    "adjustment": b.global_model.intercept,
                    "factors": list(b.global_model.factors),
                },
                "subglobal": {
                    "typical": {"adjustment": sub.typical.intercept, "factors": list(sub.typical.factors)},
                    "outlier": {"adjustment": sub.outlier.intercept, "factors": list(sub.outlier.factors)},
                },
                "incremental": {
                    "base": {"adjustment": inc.base.intercept, "factors": list(inc.base.factors)},
                    "deltas": {"adjustment": inc.delta_intercept, "factors": list(inc.delta_factors)},
                    "lambda": inc.lam,
                },
            },
        }

    @app.post("/api/explain")
    def explain(req: ExplainRequest):
        b = need_bundle()
        if req.xai_type not in XAI_TYPES:
            raise HTTPException(400, f"unknown xai_type {req.xai_type!r}")
        x = _check_values(b, req.values)
        if req.factor_overrides:
            unknown = set(req.factor_overrides) - set(b.feature_names)
            if unknown:
                raise HTTPException(400, f"overrides for unknown attributes: {sorted(unknown)}")
        prediction = b.forest.predict_one(x)
        if req.xai_type == "local":
            lc = b.local_config
            model = fit_local(
                x,
                b.forest.predict,
                b.feature_std,
                LocalConfig(
                    n_samples=lc.n_samples,
                    perturb_scale=lc.perturb_scale,
                    kernel_width=lc.kernel_width,
                    seed=instance_seed(b.seed, x),
                ),
            )
        else:
            model = b.explainer_by_type(req.xai_type)
        table = build_table(
            model,
            req.xai_type,
            x,
            prediction,
            b.feature_names,
            b.feature_units,
            b.feature_ranges,
            factor_overrides=req.factor_overrides,
            adjustment_override=req.adjustment_override,
        )
        return table.as_dict()

    @app.get("/api/instances")
    def instances(subspace: str = "", count: int = 20):
        b = need_bundle()
        if count < 0:
            raise HTTPException(400, "count must be >= 0")
        if subspace not in ("", "typical", "outlier", "balanced"):
            raise HTTPException(400, f"unknown subspace filter {subspace!r}")
        rule = b.subglobal_model.rule
        out = rule.outlier_mask(b.instances)
        rng = np.random.default_rng(np.random.SeedSequence([b.seed, 4242]))
        order = rng.permutation(len(b.instances))

        def take(mask, k):
            pool = [i for i in order if mask[i]]
            return pool[:k]

        if subspace == "balanced":
            half = count // 2
            idx = take(~out, count - half) + take(out, half)
        elif subspace == "typical":
            idx = take(~out, count)
        elif subspace == "outlier":
            idx = take(out, count)
        else:
            idx = list(order[:count])
        return {
            "instances": [
                {
                    "values": [float(v) for v in b.instances[i]],
                    "prediction": float(b.instance_predictions[i]),
                    "subspace": "outlier" if out[i] else "typical",
                }
                for i in idx
            ]
        }

    return app


def serve(bundle: ModelBundle, host: str = "127.0.0.1", port: int = 8642):
    import uvicorn

    uvicorn.run(create_app(bundle), host=host, port=port, log_level="warning")
