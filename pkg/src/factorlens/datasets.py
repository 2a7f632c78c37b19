"""Dataset ingestion, feature derivation, and deterministic splits.

A dataset is described by a declarative JSON config naming the CSV file,
the target column, and exactly four feature specs.  Each feature is taken
from a source column and passed through one of three transforms:

* ``identity``            -- use the numeric value as-is
* ``scale``               -- multiply by a positive constant (unit change)
* ``derive_age``          -- ``year(reference_column) - source_column``,
                             clamped at 0 (e.g. sale year minus year built)

Rows whose selected cells carry a missing marker are dropped and counted.
Any other non-numeric cell is an error, reported with row and column.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_MISSING = ("", "?", "NA", "nan")


class DatasetError(Exception):
    """Raised for malformed configs or unusable CSV contents."""


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    unit: str
    source_column: str
    transform: str = "identity"  # identity | scale | derive_age
    scale: float = 1.0
    reference_column: str | None = None

    def __post_init__(self):
        if self.transform not in ("identity", "scale", "derive_age"):
            raise DatasetError(f"unknown transform {self.transform!r}")
        if self.transform == "scale" and not self.scale > 0:
            raise DatasetError("scale constant must be > 0")
        if self.transform == "derive_age" and not self.reference_column:
            raise DatasetError("derive_age requires a reference_column")


@dataclass(frozen=True)
class TargetSpec:
    column: str
    unit: str
    scale: float = 1.0


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    task: str  # regression | classification
    csv_path: str
    target: TargetSpec
    features: tuple[FeatureSpec, ...]
    missing_values: tuple[str, ...] = DEFAULT_MISSING

    def __post_init__(self):
        if self.task not in ("regression", "classification"):
            raise DatasetError(f"unknown task {self.task!r}")
        if len(self.features) != 4:
            raise DatasetError("config must declare exactly 4 features")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise DatasetError("feature names must be unique")


def load_config(path: str | Path) -> DatasetConfig:
    """Parse a dataset config JSON file; relative csv path resolves against it."""
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    feats = tuple(
        FeatureSpec(
            name=fr["name"],
            unit=fr["unit"],
            source_column=fr["source_column"],
            transform=fr.get("transform", {}).get("type", "identity"),
            scale=fr.get("transform", {}).get("c", 1.0),
            reference_column=fr.get("transform", {}).get("reference_column"),
        )
        for fr in raw["features"]
    )
    csv_path = raw["csv"]
    if not Path(csv_path).is_absolute():
        csv_path = str(path.parent / csv_path)
    return DatasetConfig(
        name=raw["name"],
        task=raw["task"],
        csv_path=csv_path,
        target=TargetSpec(
            column=raw["target"]["column"],
            unit=raw["target"].get("unit", ""),
            scale=raw["target"].get("scale", 1.0),
        ),
        features=feats,
        missing_values=tuple(raw.get("missing_values", DEFAULT_MISSING)),
    )


@dataclass
class Dataset:
    name: str
    features: tuple[FeatureSpec, ...]
    X: np.ndarray  # (N, 4) in declared feature units
    y: np.ndarray  # (N,) target in declared unit
    task: str
    target_unit: str
    n_source_rows: int = 0
    n_dropped: int = 0

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    def feature_ranges(self) -> np.ndarray:
        """Per-feature (min, max), shape (4, 2)."""
        return np.stack([self.X.min(axis=0), self.X.max(axis=0)], axis=1)


def _year_of(cell: str) -> float:
    """Leading 4-digit year of a date-ish cell like '20141013T000000' or '2014-10-13'."""
    head = cell.strip()[:4]
    if len(head) == 4 and head.isdigit():
        return float(head)
    raise ValueError(f"cannot extract year from {cell!r}")


def load_dataset(config: DatasetConfig) -> Dataset:
    """Read the CSV and produce the 4-feature matrix and target vector.

    Rows with a missing marker in any used cell are dropped (counted in
    ``n_dropped``); non-numeric cells that are not missing markers raise
    DatasetError with row and column.
    """
    csv_path = Path(config.csv_path)
    if not csv_path.exists():
        raise FileNotFoundError(f"dataset CSV not found: {csv_path}")

    used_columns = {config.target.column}
    for f in config.features:
        used_columns.add(f.source_column)
        if f.reference_column:
            used_columns.add(f.reference_column)

    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing_cols = used_columns - set(header)
        if missing_cols:
            raise DatasetError(f"CSV missing required columns: {sorted(missing_cols)}")

        missing = set(config.missing_values)
        rows_X: list[list[float]] = []
        rows_y: list[float] = []
        n_source = 0
        n_dropped = 0
        for i, row in enumerate(reader):
            n_source += 1
            try:
                cells = {c: row[c].strip() for c in used_columns}
            except AttributeError:
                raise DatasetError(f"row {i + 2}: malformed record") from None
            if any(cells[c] in missing for c in used_columns):
                n_dropped += 1
                continue
            try:
                feats = [_transform_cell(f, cells) for f in config.features]
                target = float(cells[config.target.column]) * config.target.scale
            except ValueError as e:
                raise DatasetError(f"row {i + 2}: {e}") from None
            rows_X.append(feats)
            rows_y.append(target)

    if not rows_X:
        raise DatasetError(f"{config.name}: all {n_source} rows dropped")
    return Dataset(
        name=config.name,
        features=config.features,
        X=np.array(rows_X, dtype=float),
        y=np.array(rows_y, dtype=float),
        task=config.task,
        target_unit=config.target.unit,
        n_source_rows=n_source,
        n_dropped=n_dropped,
    )


def _transform_cell(spec: FeatureSpec, cells: dict[str, str]) -> float:
    raw = cells[spec.source_column]
    if spec.transform == "identity":
        return float(raw)
    if spec.transform == "scale":
        return float(raw) * spec.scale
    # derive_age: reference year minus source value, clamped at 0
    age = _year_of(cells[spec.reference_column]) - float(raw)
    return max(age, 0.0)


# ---------------------------------------------------------------------------
# Deterministic splits
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """One step of SplitMix64; returns (next_state, output).

    Fixed-width 64-bit arithmetic so the shuffle reproduces across languages.
    """
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def seeded_permutation(n: int, seed: int) -> np.ndarray:
    """Fisher-Yates shuffle of range(n) driven by SplitMix64(seed).

    Iterates i from n-1 down to 1, drawing j = next_output mod (i+1)
    and swapping positions i and j.
    """
    order = list(range(n))
    state = seed & _MASK64
    for i in range(n - 1, 0, -1):
        state, z = _splitmix64(state)
        j = z % (i + 1)
        order[i], order[j] = order[j], order[i]
    return np.array(order, dtype=int)


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    test_fraction: float
    folds: int
    fold_id: np.ndarray = field(repr=False)  # (N,), -1 for test rows
    is_test: np.ndarray = field(repr=False)  # (N,) bool

    @property
    def train_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.is_test)

    @property
    def test_indices(self) -> np.ndarray:
        return np.flatnonzero(self.is_test)

    def fold_train_validation(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train, validation) row indices for one CV fold over the training rows."""
        val = np.flatnonzero(self.fold_id == fold)
        train = np.flatnonzero((self.fold_id >= 0) & (self.fold_id != fold))
        return train, val


def make_split_plan(
    n_rows: int, seed: int, test_fraction: float = 0.2, folds: int = 5
) -> SplitPlan:
    """Shuffle rows with the documented seeded Fisher-Yates, mark the first
    round(test_fraction * N) as test, and deal the remaining rows into folds
    round-robin (the k-th training row in shuffle order gets fold k mod folds).
    """
    if n_rows < folds:
        raise DatasetError(f"need at least {folds} rows, got {n_rows}")
    order = seeded_permutation(n_rows, seed)
    n_test = int(round(test_fraction * n_rows))
    fold_id = np.full(n_rows, -1, dtype=int)
    is_test = np.zeros(n_rows, dtype=bool)
    is_test[order[:n_test]] = True
    for k, row in enumerate(order[n_test:]):
        fold_id[row] = k % folds
    return SplitPlan(
        seed=seed, test_fraction=test_fraction, folds=folds,
        fold_id=fold_id, is_test=is_test,
    )
