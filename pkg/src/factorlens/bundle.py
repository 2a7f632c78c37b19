"""Single-JSON model bundle: forest + explainers + dataset metadata.

The bundle is what `study` writes and what `serve` / `explain` load, so a
trained pipeline can be reused without retraining.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import Dataset
from .explainers import (
    IncrementalModel,
    LinearFactorModel,
    LocalConfig,
    PartitionRule,
    SubglobalModel,
)
from .forest import Forest, forest_from_dict, forest_to_dict

BUNDLE_VERSION = "1"
INSTANCE_SAMPLE_CAP = 2000  # rows kept in the bundle for instance browsing


class BundleError(Exception):
    """Raised when a bundle file is missing, malformed, or wrong-versioned."""


def _lfm_to_dict(m: LinearFactorModel) -> dict:
    return {"intercept": m.intercept, "factors": list(m.factors)}


def _lfm_from_dict(d: dict) -> LinearFactorModel:
    return LinearFactorModel(float(d["intercept"]), tuple(float(v) for v in d["factors"]))


def _rule_to_dict(r: PartitionRule) -> dict:
    return {
        "feature_index": r.feature_index,
        "threshold": r.threshold,
        "typical_side": r.typical_side,
    }


def _rule_from_dict(d: dict) -> PartitionRule:
    return PartitionRule(int(d["feature_index"]), float(d["threshold"]), d["typical_side"])


@dataclass
class ModelBundle:
    version: str
    seed: int
    dataset_meta: dict
    forest: Forest
    global_model: LinearFactorModel
    subglobal_model: SubglobalModel
    incremental_model: IncrementalModel
    local_config: LocalConfig
    instances: np.ndarray  # (m, 4) sampled rows
    instance_predictions: np.ndarray  # (m,)

    @property
    def feature_names(self) -> list[str]:
        return [f["name"] for f in self.dataset_meta["features"]]

    @property
    def feature_units(self) -> list[str]:
        return [f["unit"] for f in self.dataset_meta["features"]]

    @property
    def feature_ranges(self) -> np.ndarray:
        return np.array([[f["min"], f["max"]] for f in self.dataset_meta["features"]])

    @property
    def feature_std(self) -> np.ndarray:
        return np.array([f["std"] for f in self.dataset_meta["features"]])

    def explainer_by_type(self, xai_type: str):
        return {
            "global": self.global_model,
            "subglobal": self.subglobal_model,
            "incremental": self.incremental_model,
        }[xai_type]


def make_bundle(
    dataset: Dataset,
    seed: int,
    forest: Forest,
    global_model: LinearFactorModel,
    subglobal_model: SubglobalModel,
    incremental_model: IncrementalModel,
    local_config: LocalConfig | None = None,
) -> ModelBundle:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2024]))
    n = dataset.n_rows
    pick = (
        np.sort(rng.choice(n, INSTANCE_SAMPLE_CAP, replace=False))
        if n > INSTANCE_SAMPLE_CAP else np.arange(n)
    )
    X = dataset.X[pick]
    meta = {
        "name": dataset.name,
        "task": dataset.task,
        "target_unit": dataset.target_unit,
        "n_rows": dataset.n_rows,
        "features": [
            {
                "name": f.name,
                "unit": f.unit,
                "min": float(dataset.X[:, i].min()),
                "max": float(dataset.X[:, i].max()),
                "std": float(dataset.X[:, i].std()),
            }
            for i, f in enumerate(dataset.features)
        ],
    }
    return ModelBundle(
        version=BUNDLE_VERSION,
        seed=seed,
        dataset_meta=meta,
        forest=forest,
        global_model=global_model,
        subglobal_model=subglobal_model,
        incremental_model=incremental_model,
        local_config=local_config or LocalConfig(seed=seed),
        instances=X,
        instance_predictions=forest.predict(X),
    )


def save_bundle(bundle: ModelBundle, path: str | Path) -> Path:
    doc = {
        "version": bundle.version,
        "seed": bundle.seed,
        "dataset_meta": bundle.dataset_meta,
        "forest": forest_to_dict(bundle.forest),
        "explainers": {
            "global": _lfm_to_dict(bundle.global_model),
            "subglobal": {
                "rule": _rule_to_dict(bundle.subglobal_model.rule),
                "typical": _lfm_to_dict(bundle.subglobal_model.typical),
                "outlier": _lfm_to_dict(bundle.subglobal_model.outlier),
            },
            "incremental": {
                "rule": _rule_to_dict(bundle.incremental_model.rule),
                "base": _lfm_to_dict(bundle.incremental_model.base),
                "delta_intercept": bundle.incremental_model.delta_intercept,
                "delta_factors": list(bundle.incremental_model.delta_factors),
                "lambda": bundle.incremental_model.lam,
            },
            "local_config": {
                "n_samples": bundle.local_config.n_samples,
                "perturb_scale": bundle.local_config.perturb_scale,
                "kernel_width": bundle.local_config.kernel_width,
                "seed": bundle.local_config.seed,
            },
        },
        "instances": [[float(v) for v in row] for row in bundle.instances],
        "instance_predictions": [float(v) for v in bundle.instance_predictions],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)
        f.write("\n")
    return path


def load_bundle(path: str | Path) -> ModelBundle:
    path = Path(path)
    if not path.exists():
        raise BundleError(f"bundle file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise BundleError(f"bundle is not valid JSON: {e}") from None
    try:
        if doc["version"] != BUNDLE_VERSION:
            raise BundleError(f"unsupported bundle version {doc['version']!r}")
        ex = doc["explainers"]
        sub = SubglobalModel(
            rule=_rule_from_dict(ex["subglobal"]["rule"]),
            typical=_lfm_from_dict(ex["subglobal"]["typical"]),
            outlier=_lfm_from_dict(ex["subglobal"]["outlier"]),
        )
        inc = IncrementalModel(
            rule=_rule_from_dict(ex["incremental"]["rule"]),
            base=_lfm_from_dict(ex["incremental"]["base"]),
            delta_intercept=float(ex["incremental"]["delta_intercept"]),
            delta_factors=tuple(float(v) for v in ex["incremental"]["delta_factors"]),
            lam=float(ex["incremental"]["lambda"]),
        )
        lc = ex["local_config"]
        return ModelBundle(
            version=doc["version"],
            seed=int(doc["seed"]),
            dataset_meta=doc["dataset_meta"],
            forest=forest_from_dict(doc["forest"]),
            global_model=_lfm_from_dict(ex["global"]),
            subglobal_model=sub,
            incremental_model=inc,
            local_config=LocalConfig(
                n_samples=int(lc["n_samples"]),
                perturb_scale=float(lc["perturb_scale"]),
                kernel_width=float(lc["kernel_width"]),
                seed=int(lc["seed"]),
            ),
            instances=np.array(doc["instances"], dtype=float),
            instance_predictions=np.array(doc["instance_predictions"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise BundleError(f"malformed bundle: {e}") from None
