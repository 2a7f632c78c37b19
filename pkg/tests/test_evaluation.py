"""Study harness: unfaithfulness accounting, lambda selection, glassbox fits,
and the threshold sweep, exercised on a small synthetic dataset."""
import numpy as np
import pytest

from factorlens.datasets import Dataset, FeatureSpec
from factorlens.evaluation import (
    LAMBDA_GRID_BASE,
    choose_lambda,
    combined_weighted,
    glassbox_fit,
    glassbox_performance,
    local_seed_for,
    run_modeling_study,
    threshold_sweep,
    unfaithfulness_mae,
)
from factorlens.explainers import LocalConfig, fit_incremental, fit_subglobal, make_rule
from factorlens.forest import ForestConfig, train_forest


def _tiny_dataset(rng, n=250, task="regression"):
    X = rng.normal(size=(n, 4)) * np.array([1.0, 2.0, 0.5, 3.0]) + 5.0
    y = 1.0 + X @ np.array([1.5, 0.2, -1.0, 0.1]) + 4.0 * np.maximum(X[:, 0] - 5.5, 0)
    if task == "classification":
        y = (y > np.median(y)).astype(float)
    feats = tuple(FeatureSpec(f"f{i}", "u", f"c{i}") for i in range(4))
    return Dataset("tiny", feats, X, y, task, "u")


_FCFG = ForestConfig(n_trees=15, max_depth=8, seed=0)
_LCFG = LocalConfig(n_samples=200, seed=0)


@pytest.fixture(scope="module")
def tiny_study():
    ds = _tiny_dataset(np.random.default_rng(3))
    return ds, run_modeling_study(ds, 11, _FCFG, _LCFG)


def test_unfaithfulness_mae_hand_loop(rng):
    est = rng.normal(size=20)
    pred = rng.normal(size=20)
    manual = sum(abs(a - b) for a, b in zip(est, pred)) / 20
    assert unfaithfulness_mae(est, pred) == pytest.approx(manual)
    with pytest.raises(ValueError):
        unfaithfulness_mae(np.empty(0), np.empty(0))


def test_combined_weighted_equals_full_set_mae(rng):
    est = rng.normal(size=30)
    pred = rng.normal(size=30)
    mask = rng.random(30) < 0.4
    m_t = unfaithfulness_mae(est[~mask], pred[~mask])
    m_o = unfaithfulness_mae(est[mask], pred[mask])
    combined = combined_weighted(m_t, int((~mask).sum()), m_o, int(mask.sum()))
    assert combined == pytest.approx(unfaithfulness_mae(est, pred))


def test_local_seed_for_is_stable():
    assert local_seed_for(5, 1, 2) == local_seed_for(5, 1, 2)
    assert local_seed_for(5, 1, 2) != local_seed_for(5, 1, 3)


def test_choose_lambda_satisfies_its_own_rule(rng):
    ds = _tiny_dataset(rng)
    rule = make_rule(ds.X, 0, float(np.percentile(ds.X[:, 0], 60)))
    lam = choose_lambda(ds.X, ds.y, rule)
    scale = rule.outlier_mask(ds.X).mean()
    grid = [0.0] + [g * scale for g in LAMBDA_GRID_BASE]
    assert any(lam == pytest.approx(g) for g in grid)
    base = fit_incremental(ds.X, ds.y, 0.0, rule=rule)
    base_mae = unfaithfulness_mae(base.estimate_many(ds.X), ds.y)
    picked = fit_incremental(ds.X, ds.y, lam, rule=rule)
    assert unfaithfulness_mae(picked.estimate_many(ds.X), ds.y) <= 1.05 * base_mae + 1e-12
    # every larger grid point violates the budget
    for g in grid:
        if g <= lam:
            continue
        worse = fit_incremental(ds.X, ds.y, g, rule=rule)
        assert unfaithfulness_mae(worse.estimate_many(ds.X), ds.y) > 1.05 * base_mae


def test_glassbox_regression_matches_direct_fit(rng):
    ds = _tiny_dataset(rng)
    rule = make_rule(ds.X, 0, float(np.percentile(ds.X[:, 0], 60)))
    predict, ok = glassbox_fit("subglobal", ds.X, ds.y, "regression", rule, 0.0)
    direct = fit_subglobal(ds.X, ds.y, rule=rule)
    assert ok
    assert np.allclose(predict(ds.X), direct.estimate_many(ds.X))
    out = glassbox_performance("subglobal", ds.X, ds.y, ds.X, ds.y, "regression", rule, 0.0)
    assert out["metric"] == "mae"
    assert out["value"] == pytest.approx(np.mean(np.abs(predict(ds.X) - ds.y)))


def test_glassbox_classification_probabilities(rng):
    ds = _tiny_dataset(rng, task="classification")
    rule = make_rule(ds.X, 0, float(np.percentile(ds.X[:, 0], 60)))
    for fam in ("global", "subglobal", "incremental"):
        predict, _ = glassbox_fit(fam, ds.X, ds.y, "classification", rule, 0.1)
        p = predict(ds.X)
        assert ((p >= 0) & (p <= 1)).all()
        acc = np.mean((p >= 0.5) == (ds.y == 1))
        assert acc > 0.7
    with pytest.raises(ValueError):
        glassbox_fit("local", ds.X, ds.y, "classification", rule, 0.0)


def test_study_report_shape(tiny_study):
    ds, res = tiny_study
    kinds = {(r["xai_type"], r["subspace"], r["kind"]) for r in res["reports"]}
    for xai in ("global", "subglobal", "incremental", "local"):
        for sub in ("combined", "typical", "outlier"):
            assert (xai, sub, "unfaithfulness") in kinds
    for fam in ("global", "subglobal", "incremental"):
        assert (fam, "combined", "glassbox") in kinds
    assert ("predictor", "combined", "predictor") in kinds
    for r in res["reports"]:
        assert len(r["folds"]) == 5
        assert r["mean"] == pytest.approx(np.mean(r["folds"]))
        assert r["std"] == pytest.approx(np.std(r["folds"], ddof=1))
    assert len(res["fold_rules"]) == 5
    assert len(res["fold_lambdas"]) == 5
    assert "predictor" in res["heldout"]


def test_study_combined_accounting_identity(tiny_study):
    _, res = tiny_study
    by_key = {(r["xai_type"], r["subspace"], r["kind"]): r for r in res["reports"]}
    for xai in ("global", "subglobal", "incremental", "local"):
        prefix = "local_" if xai == "local" else ""
        for k in range(5):
            n_t = res["fold_counts"][k][f"{prefix}typical"]
            n_o = res["fold_counts"][k][f"{prefix}outlier"]
            c = by_key[(xai, "combined", "unfaithfulness")]["folds"][k]
            t = by_key[(xai, "typical", "unfaithfulness")]["folds"][k]
            o = by_key[(xai, "outlier", "unfaithfulness")]["folds"][k]
            assert c == pytest.approx(combined_weighted(t, n_t, o, n_o), rel=1e-12)


def test_study_is_deterministic():
    ds = _tiny_dataset(np.random.default_rng(3))
    a = run_modeling_study(ds, 11, _FCFG, _LCFG)
    b = run_modeling_study(ds, 11, _FCFG, _LCFG)
    for ra, rb in zip(a["reports"], b["reports"]):
        assert ra == rb
    assert a["heldout"]["unfaithfulness"] == b["heldout"]["unfaithfulness"]


def test_classification_study_reports_percent_scale():
    ds = _tiny_dataset(np.random.default_rng(4), task="classification")
    res = run_modeling_study(ds, 11, _FCFG, _LCFG)
    combined = {
        r["xai_type"]: r["mean"]
        for r in res["reports"]
        if r["subspace"] == "combined" and r["kind"] == "unfaithfulness"
    }
    # probability MAEs land on a 0-100 scale, not 0-1
    assert 0.5 < combined["global"] < 100.0
    assert "accuracy" in res["heldout"]["predictor"]


def test_threshold_sweep_shape_and_minima(tiny_study):
    ds, _ = tiny_study
    forest = train_forest(ds.X, ds.y, _FCFG, ds.task)
    res = threshold_sweep(ds, forest, 0)
    assert res["feature"] == "f0"
    ok = [p for p in res["points"] if p["status"] == "ok"]
    assert len(ok) >= 10
    for p in ok:
        n_t, n_o = p["n_typical"], p["n_outlier"]
        for tag in ("subglobal", "incremental"):
            assert p[f"{tag}_mae_combined"] == pytest.approx(
                combined_weighted(p[f"{tag}_mae_typical"], n_t, p[f"{tag}_mae_outlier"], n_o)
            )
            assert 0.0 <= p[f"{tag}_mae_combined_norm"] <= 1.0
        assert len(p["incremental_deltas"]) == 5
        assert len(p["subglobal_factors_typical"]) == 5
    best = min(ok, key=lambda p: p["subglobal_mae_combined"])
    assert res["min_combined_subglobal"] == best["threshold"]
    norms = [p["subglobal_mae_combined_norm"] for p in ok]
    assert min(norms) == 0.0 and max(norms) == 1.0
