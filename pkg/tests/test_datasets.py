"""Config validation, CSV ingestion, and the deterministic split plan."""
import numpy as np
import pytest

from factorlens.datasets import (
    DatasetConfig,
    DatasetError,
    FeatureSpec,
    TargetSpec,
    load_config,
    load_dataset,
    make_split_plan,
    seeded_permutation,
)

MASK64 = (1 << 64) - 1


def _specs(n=4):
    return tuple(FeatureSpec(f"f{i}", "u", f"c{i}") for i in range(n))


def _config(tmp_path, csv_text, **kw):
    p = tmp_path / "d.csv"
    p.write_text(csv_text)
    defaults = dict(
        name="t", task="regression", csv_path=str(p),
        target=TargetSpec("y", "u"), features=_specs(),
    )
    defaults.update(kw)
    return DatasetConfig(**defaults)


def test_config_requires_four_features(tmp_path):
    with pytest.raises(DatasetError):
        _config(tmp_path, "", features=_specs(3))


def test_config_rejects_duplicate_names(tmp_path):
    feats = (*_specs(3), FeatureSpec("f0", "u", "c9"))
    with pytest.raises(DatasetError):
        _config(tmp_path, "", features=feats)


def test_config_rejects_unknown_task(tmp_path):
    with pytest.raises(DatasetError):
        _config(tmp_path, "", task="ranking")


def test_feature_spec_rejects_bad_transform():
    with pytest.raises(DatasetError):
        FeatureSpec("f", "u", "c", transform="log")
    with pytest.raises(DatasetError):
        FeatureSpec("f", "u", "c", transform="scale", scale=0.0)
    with pytest.raises(DatasetError):
        FeatureSpec("f", "u", "c", transform="derive_age")


def test_load_config_resolves_relative_csv(tmp_path):
    (tmp_path / "x.csv").write_text("c0,c1,c2,c3,y\n1,2,3,4,5\n")
    cfg_json = {
        "name": "t", "task": "regression", "csv": "x.csv",
        "target": {"column": "y", "unit": "u"},
        "features": [
            {"name": f"f{i}", "unit": "u", "source_column": f"c{i}"} for i in range(4)
        ],
    }
    import json
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg_json))
    cfg = load_config(cfg_path)
    assert cfg.csv_path == str(tmp_path / "x.csv")
    ds = load_dataset(cfg)
    assert ds.n_rows == 1
    assert list(ds.X[0]) == [1, 2, 3, 4]
    assert ds.y[0] == 5


def test_missing_markers_drop_and_count(tmp_path):
    csv_text = "c0,c1,c2,c3,y\n1,2,3,4,10\n?,2,3,4,10\n1,2,3,,10\n5,6,7,8,20\n"
    ds = load_dataset(_config(tmp_path, csv_text))
    assert ds.n_source_rows == 4
    assert ds.n_dropped == 2
    assert ds.n_rows == 2


def test_non_numeric_cell_reports_row(tmp_path):
    csv_text = "c0,c1,c2,c3,y\n1,2,3,4,10\n1,abc,3,4,10\n"
    with pytest.raises(DatasetError, match="row 3"):
        load_dataset(_config(tmp_path, csv_text))


def test_all_rows_dropped_is_error(tmp_path):
    csv_text = "c0,c1,c2,c3,y\n?,2,3,4,10\n"
    with pytest.raises(DatasetError, match="dropped"):
        load_dataset(_config(tmp_path, csv_text))


def test_missing_column_is_error(tmp_path):
    csv_text = "c0,c1,c2,y\n1,2,3,10\n"
    with pytest.raises(DatasetError, match="c3"):
        load_dataset(_config(tmp_path, csv_text))


def test_scale_and_target_scale(tmp_path):
    feats = (
        FeatureSpec("f0", "u", "c0", "scale", scale=0.5),
        *_specs()[1:],
    )
    csv_text = "c0,c1,c2,c3,y\n10,2,3,4,2000\n"
    ds = load_dataset(
        _config(tmp_path, csv_text, features=feats, target=TargetSpec("y", "u", scale=0.001))
    )
    assert ds.X[0, 0] == 5.0
    assert ds.y[0] == 2.0


def test_derive_age_clamps_at_zero(tmp_path):
    feats = (
        FeatureSpec("Age", "years", "c0", "derive_age", reference_column="date"),
        *_specs()[1:],
    )
    csv_text = (
        "date,c0,c1,c2,c3,y\n"
        "20141013T000000,2000,2,3,4,10\n"
        "2014-06-01,2020,2,3,4,10\n"
    )
    ds = load_dataset(_config(tmp_path, csv_text, features=feats))
    assert ds.X[0, 0] == 14.0
    assert ds.X[1, 0] == 0.0  # built after the sale year, clamped


def test_bad_date_cell_is_error(tmp_path):
    feats = (
        FeatureSpec("Age", "years", "c0", "derive_age", reference_column="date"),
        *_specs()[1:],
    )
    csv_text = "date,c0,c1,c2,c3,y\nxx,2000,2,3,4,10\n"
    with pytest.raises(DatasetError, match="row 2"):
        load_dataset(_config(tmp_path, csv_text, features=feats))


def test_feature_ranges(tmp_path):
    csv_text = "c0,c1,c2,c3,y\n1,2,3,4,10\n5,1,3,8,20\n"
    ds = load_dataset(_config(tmp_path, csv_text))
    ranges = ds.feature_ranges()
    assert ranges.shape == (4, 2)
    assert list(ranges[0]) == [1, 5]
    assert list(ranges[1]) == [1, 2]


# ---------------------------------------------------------------------------
# Shuffle and split plan
# ---------------------------------------------------------------------------


def _oracle_permutation(n, seed):
    """Independent re-derivation of the documented SplitMix64 Fisher-Yates."""
    state = seed & MASK64
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        z = z ^ (z >> 31)
        j = z % (i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def test_seeded_permutation_matches_oracle():
    for n, seed in [(1, 0), (7, 42), (50, 123456789), (128, 2**63)]:
        assert list(seeded_permutation(n, seed)) == _oracle_permutation(n, seed)


def test_seeded_permutation_is_permutation():
    p = seeded_permutation(100, 5)
    assert sorted(p) == list(range(100))
    assert list(p) != list(range(100))


def test_seeded_permutation_varies_with_seed():
    assert list(seeded_permutation(30, 1)) != list(seeded_permutation(30, 2))


def test_split_plan_counts_and_round_robin():
    n, seed = 103, 9
    plan = make_split_plan(n, seed)
    order = seeded_permutation(n, seed)
    n_test = round(0.2 * n)
    assert plan.test_indices.size == n_test
    assert set(plan.test_indices) == set(order[:n_test])
    for k, row in enumerate(order[n_test:]):
        assert plan.fold_id[row] == k % 5


def test_split_plan_folds_partition_training_rows():
    plan = make_split_plan(83, 3)
    seen = np.zeros(83, dtype=int)
    for fold in range(5):
        tr, val = plan.fold_train_validation(fold)
        assert np.intersect1d(tr, val).size == 0
        assert not plan.is_test[val].any()
        seen[val] += 1
    assert (seen[~plan.is_test] == 1).all()
    assert (seen[plan.is_test] == 0).all()


def test_split_plan_rejects_tiny_datasets():
    with pytest.raises(DatasetError):
        make_split_plan(4, 0)
