"""Built-in dataset configurations for the three benchmark tables."""
from __future__ import annotations

import json
from pathlib import Path

from .datasets import DatasetConfig, FeatureSpec, TargetSpec


def _house(csv_path: str) -> DatasetConfig:
    return DatasetConfig(
        name="house_sales",
        task="regression",
        csv_path=csv_path,
        target=TargetSpec(column="price", unit="$k", scale=0.001),
        features=(
            FeatureSpec("# Bathrooms", "count", "bathrooms"),
            FeatureSpec("Living Area", "ksqft", "sqft_living", "scale", scale=0.001),
            FeatureSpec("Grade", "grade", "grade"),
            FeatureSpec("Age", "years", "yr_built", "derive_age", reference_column="date"),
        ),
    )


def _heart(csv_path: str) -> DatasetConfig:
    return DatasetConfig(
        name="heart_disease",
        task="classification",
        csv_path=csv_path,
        target=TargetSpec(column="target", unit="risk"),
        features=(
            FeatureSpec("Age", "years", "age"),
            FeatureSpec("Resting BP", "mmHg", "trestbps"),
            FeatureSpec("Cholesterol", "mg/dl", "chol"),
            FeatureSpec("Max Heart Rate", "bpm", "thalach"),
        ),
    )


def _mpg(csv_path: str) -> DatasetConfig:
    return DatasetConfig(
        name="auto_mpg",
        task="regression",
        csv_path=csv_path,
        target=TargetSpec(column="mpg", unit="mpg"),
        features=(
            FeatureSpec("Cylinders", "count", "cylinders"),
            FeatureSpec("Displacement", "cu in", "displacement"),
            FeatureSpec("Horsepower", "hp", "horsepower"),
            FeatureSpec("Weight", "lb", "weight"),
        ),
    )


BUILTIN = {"house_sales": _house, "heart_disease": _heart, "auto_mpg": _mpg}

# expected tree-chosen split feature index per dataset (for sweeps)
SPLIT_FEATURE = {"house_sales": 1, "heart_disease": 0, "auto_mpg": 2}


def builtin_config(name: str, csv_path: str | Path) -> DatasetConfig:
    if name not in BUILTIN:
        raise KeyError(f"unknown builtin dataset {name!r}; have {sorted(BUILTIN)}")
    return BUILTIN[name](str(csv_path))


def config_to_json(cfg: DatasetConfig) -> dict:
    feats = []
    for f in cfg.features:
        tr: dict = {"type": f.transform}
        if f.transform == "scale":
            tr["c"] = f.scale
        if f.transform == "derive_age":
            tr["reference_column"] = f.reference_column
        feats.append(
            {"name": f.name, "unit": f.unit, "source_column": f.source_column, "transform": tr}
        )
    return {
        "name": cfg.name,
        "task": cfg.task,
        "csv": cfg.csv_path,
        "target": {"column": cfg.target.column, "unit": cfg.target.unit, "scale": cfg.target.scale},
        "features": feats,
        "missing_values": list(cfg.missing_values),
    }


def write_config(cfg: DatasetConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config_to_json(cfg), f, indent=2)
        f.write("\n")
    return path
