"""Forest training, prediction, metrics, and serialization."""
import itertools

import numpy as np
import pytest

from factorlens.forest import (
    Forest,
    ForestConfig,
    Tree,
    auc_score,
    evaluate_predictor,
    forest_from_dict,
    forest_to_dict,
    train_forest,
)


def _single_tree_config(depth=1, leaf=1, d=4):
    return ForestConfig(
        n_trees=1, max_depth=depth, min_samples_leaf=leaf,
        features_per_split=d, bootstrap=False, seed=0,
    )


def _brute_force_stump(X, y, min_leaf):
    """Exhaustive depth-1 CART: best (feature, threshold, left mean, right mean)."""
    best = None
    n, d = X.shape
    for f in range(d):
        u = np.unique(X[:, f])
        for lo, hi in zip(u[:-1], u[1:]):
            thr = (lo + hi) / 2
            left = X[:, f] < thr
            if left.sum() < min_leaf or (~left).sum() < min_leaf:
                continue
            sse = float(((y[left] - y[left].mean()) ** 2).sum()
                        + ((y[~left] - y[~left].mean()) ** 2).sum())
            if best is None or sse < best[0] - 1e-12:
                best = (sse, f, thr)
    return best


def test_depth1_tree_matches_brute_force(rng):
    for _ in range(10):
        X = rng.normal(size=(40, 4))
        y = rng.normal(size=40) + 2.0 * (X[:, 2] > 0)
        forest = train_forest(X, y, _single_tree_config(leaf=3), "regression")
        tree = forest.trees[0]
        _, f, thr = _brute_force_stump(X, y, 3)
        assert tree.feature[0] == f
        assert tree.threshold[0] == pytest.approx(thr)
        left = X[:, f] < thr
        assert tree.value[tree.left[0]] == pytest.approx(y[left].mean())
        assert tree.value[tree.right[0]] == pytest.approx(y[~left].mean())


def test_deeper_tree_beats_stump(rng):
    X = rng.normal(size=(200, 4))
    y = np.sign(X[:, 0]) + np.sign(X[:, 1])
    shallow = train_forest(X, y, _single_tree_config(depth=1), "regression")
    deep = train_forest(X, y, _single_tree_config(depth=4), "regression")
    mse = lambda f: float(np.mean((f.predict(X) - y) ** 2))
    assert mse(deep) < mse(shallow)


def test_min_samples_leaf_respected(rng):
    X = rng.normal(size=(60, 4))
    y = rng.normal(size=60)
    leaf = 10
    forest = train_forest(X, y, _single_tree_config(depth=12, leaf=leaf), "regression")
    tree = forest.trees[0]
    node = np.zeros(60, dtype=int)
    # walk every row down and count rows per leaf
    for _ in range(20):
        feat = tree.feature[node]
        active = feat >= 0
        if not active.any():
            break
        idx = np.flatnonzero(active)
        goes_left = X[idx, feat[idx]] < tree.threshold[node[idx]]
        node[idx] = np.where(goes_left, tree.left[node[idx]], tree.right[node[idx]])
    counts = np.bincount(node)
    assert (counts[counts > 0] >= leaf).all()


def test_forest_prediction_is_mean_of_trees(rng):
    X = rng.normal(size=(80, 4))
    y = rng.normal(size=80)
    forest = train_forest(X, y, ForestConfig(n_trees=7, seed=3), "regression")
    Xq = rng.normal(size=(10, 4))
    manual = np.mean([t.predict(Xq) for t in forest.trees], axis=0)
    assert np.allclose(forest.predict(Xq), manual)
    assert forest.predict_one(Xq[0]) == pytest.approx(manual[0])


def test_forest_determinism(rng):
    X = rng.normal(size=(100, 4))
    y = rng.normal(size=100)
    a = train_forest(X, y, ForestConfig(n_trees=10, seed=5), "regression")
    b = train_forest(X, y, ForestConfig(n_trees=10, seed=5), "regression")
    c = train_forest(X, y, ForestConfig(n_trees=10, seed=6), "regression")
    Xq = rng.normal(size=(20, 4))
    assert np.array_equal(a.predict(Xq), b.predict(Xq))
    assert not np.array_equal(a.predict(Xq), c.predict(Xq))


def test_classification_outputs_probabilities(rng):
    X = rng.normal(size=(120, 4))
    y = (X[:, 0] + 0.3 * rng.normal(size=120) > 0).astype(float)
    forest = train_forest(X, y, ForestConfig(n_trees=20, seed=1), "classification")
    p = forest.predict(X)
    assert ((p >= 0) & (p <= 1)).all()
    assert np.mean((p >= 0.5) == (y == 1)) > 0.8


def test_predict_rejects_non_finite(rng):
    X = rng.normal(size=(30, 4))
    forest = train_forest(X, X[:, 0], ForestConfig(n_trees=2, seed=0), "regression")
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        forest.predict(bad)


def test_empty_training_raises():
    with pytest.raises(ValueError):
        train_forest(np.empty((0, 4)), np.empty(0), ForestConfig(n_trees=1), "regression")


def test_config_validation():
    with pytest.raises(ValueError):
        ForestConfig(n_trees=0)
    with pytest.raises(ValueError):
        ForestConfig(min_samples_leaf=0)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def _auc_oracle(y, s):
    """Pairwise Mann-Whitney count with half credit for ties."""
    pos = [si for yi, si in zip(y, s) if yi == 1]
    neg = [si for yi, si in zip(y, s) if yi != 1]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0
               for p, q in itertools.product(pos, neg))
    return wins / (len(pos) * len(neg))


def test_auc_hand_cases():
    assert auc_score([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert auc_score([0, 0, 1, 1], [0.9, 0.8, 0.2, 0.1]) == 0.0
    assert auc_score([0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5]) == 0.5


def test_auc_matches_pairwise_oracle(rng):
    for _ in range(10):
        y = rng.integers(0, 2, 30)
        if y.min() == y.max():
            continue
        s = np.round(rng.random(30), 1)  # coarse grid to force ties
        assert auc_score(y, s) == pytest.approx(_auc_oracle(y, s))


def test_auc_degenerate_is_nan():
    assert np.isnan(auc_score([1, 1], [0.1, 0.2]))


def test_evaluate_predictor_regression(rng):
    X = rng.normal(size=(50, 4))
    y = X @ np.array([1.0, 2.0, 0.0, 0.0])
    forest = train_forest(X, y, ForestConfig(n_trees=30, seed=2), "regression")
    out = evaluate_predictor(forest, X, y)
    pred = forest.predict(X)
    assert out["mae"] == pytest.approx(np.mean(np.abs(pred - y)))
    assert out["r2"] == pytest.approx(
        1 - np.sum((y - pred) ** 2) / np.sum((y - y.mean()) ** 2)
    )


def test_evaluate_predictor_empty_raises(rng):
    X = rng.normal(size=(10, 4))
    forest = train_forest(X, X[:, 0], ForestConfig(n_trees=1), "regression")
    with pytest.raises(ValueError):
        evaluate_predictor(forest, np.empty((0, 4)), np.empty(0))


def test_forest_round_trip(rng):
    X = rng.normal(size=(60, 4))
    y = rng.normal(size=60)
    forest = train_forest(X, y, ForestConfig(n_trees=5, seed=9), "regression")
    clone = forest_from_dict(forest_to_dict(forest))
    Xq = rng.normal(size=(15, 4))
    assert np.array_equal(forest.predict(Xq), clone.predict(Xq))
    assert clone.task == "regression"
    assert clone.config == forest.config
