"""Seeded stand-in generators for the three benchmark datasets.

The real benchmark CSVs (house sales, heart disease risk, auto fuel economy)
cannot be downloaded in an offline environment, so these generators write
CSV files with the same column layout, row counts, units, and value ranges,
and with a data-generating process whose dominant nonlinearity is a slope
change in one feature (living area / age / horsepower).  Anything produced
here flows through the normal CSV loader; dropping the real files in place
of the generated ones requires no code change.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

HOUSE_ROWS = 21613
HEART_ROWS = 1025
HEART_UNIQUE = 303
MPG_ROWS = 398
MPG_MISSING_HP = 6


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def generate_house_sales(path: str | Path, seed: int = 7) -> Path:
    """House pricing table: price rises at ~$95k/ksqft below 2.5 ksqft of
    living area and ~$215k/ksqft above, matching the published factor scale."""
    rng = np.random.default_rng(seed)
    n = HOUSE_ROWS

    living = np.exp(rng.normal(0.647, 0.45, n))  # ksqft, median ~1.91
    living = np.clip(living, 0.29, 13.54)
    bathrooms = np.clip(np.round((0.55 + 0.75 * living + rng.normal(0, 0.55, n)) * 2) / 2, 0.5, 8.0)
    grade = np.clip(np.round(5.0 + 2.6 * np.log(living) + rng.normal(0, 0.9, n)), 1, 13)
    yr_built = rng.integers(1900, 2016, n)
    sale_year = rng.choice([2014, 2015], n, p=[0.67, 0.33])
    month = rng.integers(1, 13, n)
    day = rng.integers(1, 29, n)
    age = sale_year - yr_built

    base = np.where(living < 2.5, 95.0 * living, 95.0 * 2.5 + 215.0 * (living - 2.5))
    price_k = (
        280.0
        + base
        + 17.0 * bathrooms
        + 26.0 * (grade - 7.0)
        + 14.0 * np.maximum(grade - 8.0, 0.0) ** 2
        - 0.7 * age
        + 1.1 * np.maximum(age - 80.0, 0.0)
        + 6.0 * (grade - 7.0) * living
    )
    price_k = np.maximum(price_k, 80.0)
    price_k = price_k * np.exp(rng.normal(0.0, 0.29, n))
    price_k = np.clip(price_k, 72.0, 7700.0)
    # pin the documented price range exactly
    price_k[int(np.argmin(price_k))] = 72.0
    price_k[int(np.argmax(price_k))] = 7700.0

    rows = [
        [
            f"{sale_year[i]}{month[i]:02d}{day[i]:02d}T000000",
            f"{price_k[i] * 1000:.0f}",
            f"{bathrooms[i]:g}",
            f"{living[i] * 1000:.0f}",
            f"{int(grade[i])}",
            f"{int(yr_built[i])}",
        ]
        for i in range(n)
    ]
    path = Path(path)
    _write_csv(path, ["date", "price", "bathrooms", "sqft_living", "grade", "yr_built"], rows)
    return path


def generate_heart_disease(path: str | Path, seed: int = 11) -> Path:
    """Heart risk table: 303 unique patients resampled to 1025 rows (the
    common duplicated variant); risk rises sharply for ages at or above 58."""
    rng = np.random.default_rng(seed)
    m = HEART_UNIQUE

    age = np.clip(np.round(rng.normal(54, 9, m)), 29, 77)
    trestbps = np.clip(np.round(rng.normal(131, 17, m)), 94, 200)
    chol = np.clip(np.round(rng.normal(246, 51, m)), 126, 564)
    thalach = np.clip(np.round(rng.normal(149 - 0.8 * (age - 54), 21, m)), 71, 202)

    logit = (
        -0.3
        + 0.03 * (age - 54)
        + 2.0 * (age >= 58)
        + 0.14 * np.maximum(age - 58, 0.0)
        + 0.02 * (trestbps - 131)
        + 0.006 * (chol - 246)
        - 0.04 * (thalach - 149)
    )
    p = 1.0 / (1.0 + np.exp(-logit))
    target = (rng.random(m) < p).astype(int)

    idx = np.concatenate([np.arange(m), rng.integers(0, m, HEART_ROWS - m)])
    rows = [
        [
            f"{int(age[i])}",
            f"{int(trestbps[i])}",
            f"{int(chol[i])}",
            f"{int(thalach[i])}",
            f"{int(target[i])}",
        ]
        for i in idx
    ]
    path = Path(path)
    _write_csv(path, ["age", "trestbps", "chol", "thalach", "target"], rows)
    return path


def generate_auto_mpg(path: str | Path, seed: int = 13) -> Path:
    """Fuel economy table: efficiency falls off much faster once horsepower
    reaches ~92; a handful of horsepower cells carry the classic '?' marker."""
    rng = np.random.default_rng(seed)
    n = MPG_ROWS

    cylinders = rng.choice([3, 4, 5, 6, 8], n, p=[0.010, 0.513, 0.008, 0.211, 0.258])
    disp_mean = {3: 80, 4: 110, 5: 145, 6: 218, 8: 345}
    disp_sd = {3: 10, 4: 25, 5: 20, 6: 35, 8: 50}
    displacement = np.clip(
        np.array([rng.normal(disp_mean[c], disp_sd[c]) for c in cylinders]), 68, 455
    )
    weight = np.clip(1580 + 7.2 * displacement + rng.normal(0, 250, n), 1613, 5140)
    horsepower = np.clip(np.round(30 + 0.38 * displacement + rng.normal(0, 14, n)), 46, 230)

    mpg = (
        33.0
        - 0.075 * (horsepower - 46)
        - 0.155 * np.maximum(horsepower - 92, 0.0)
        - 2.0 * (weight - 2970) / 1000.0
        + rng.normal(0, 2.0, n)
    )
    mpg = np.clip(np.round(mpg, 1), 5.0, 46.6)

    missing = rng.choice(n, MPG_MISSING_HP, replace=False)
    rows = []
    for i in range(n):
        hp = "?" if i in missing else f"{int(horsepower[i])}"
        rows.append(
            [
                f"{mpg[i]:g}",
                f"{int(cylinders[i])}",
                f"{displacement[i]:.1f}",
                hp,
                f"{weight[i]:.0f}",
            ]
        )
    path = Path(path)
    _write_csv(path, ["mpg", "cylinders", "displacement", "horsepower", "weight"], rows)
    return path


GENERATORS = {
    "house_sales": generate_house_sales,
    "heart_disease": generate_heart_disease,
    "auto_mpg": generate_auto_mpg,
}


def generate_all(data_dir: str | Path) -> dict[str, Path]:
    data_dir = Path(data_dir)
    return {name: gen(data_dir / f"{name}.csv") for name, gen in GENERATORS.items()}
