"""From-scratch random forest: the blackbox predictor that all explainers approximate.

Trees are exact CART stumps-to-depth-d: at every node the split search scans
all candidate thresholds (midpoints between consecutive distinct sorted values)
for a random feature subset and keeps the split with the lowest summed SSE of
child means.  Classification trees use the same criterion on 0/1 labels and
store the class-1 fraction at leaves, so predictions are probabilities.

Per-feature sort orders are computed once per tree and partitioned stably down
the recursion, so no re-sorting happens at inner nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 12
    min_samples_leaf: int = 5
    features_per_split: int = 2
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass
class Tree:
    """Flat array representation; feature == -1 marks a leaf."""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                break
            idx = np.flatnonzero(active)
            f = feat[idx]
            goes_left = X[idx, f] < self.threshold[node[idx]]
            node[idx] = np.where(goes_left, self.left[node[idx]], self.right[node[idx]])
        return self.value[node]


@dataclass
class Forest:
    trees: list[Tree]
    task: str  # regression | classification
    config: ForestConfig = field(default=None)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Mean of tree outputs; probabilities in [0,1] for classification."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not np.isfinite(X).all():
            raise ValueError("non-finite feature value passed to predict")
        out = np.zeros(X.shape[0])
        for t in self.trees:
            out += t.predict(X)
        return out / len(self.trees)

    def predict_one(self, x) -> float:
        return float(self.predict(np.asarray(x, dtype=float)[None, :])[0])


class _TreeBuilder:
    def __init__(self, X, y, config: ForestConfig, rng: np.random.Generator):
        self.X = X
        self.y = y
        self.cfg = config
        self.rng = rng
        self.nodes: list[list] = []  # [feature, threshold, left, right, value]

    def build(self) -> Tree:
        n, d = self.X.shape
        sorted_idx = [np.argsort(self.X[:, f], kind="stable") for f in range(d)]
        self._grow(sorted_idx, depth=0)
        return Tree(
            feature=np.array([r[0] for r in self.nodes], dtype=int),
            threshold=np.array([r[1] for r in self.nodes], dtype=float),
            left=np.array([r[2] for r in self.nodes], dtype=int),
            right=np.array([r[3] for r in self.nodes], dtype=int),
            value=np.array([r[4] for r in self.nodes], dtype=float),
        )

    def _grow(self, sorted_idx: list[np.ndarray], depth: int) -> int:
        node_id = len(self.nodes)
        idx = sorted_idx[0]
        y_node = self.y[idx]
        mean = float(y_node.mean())
        self.nodes.append([-1, 0.0, -1, -1, mean])

        n = idx.size
        cfg = self.cfg
        if depth >= cfg.max_depth or n < 2 * cfg.min_samples_leaf:
            return node_id
        if y_node.max() == y_node.min():
            return node_id

        d = self.X.shape[1]
        k = min(cfg.features_per_split, d)
        feats = np.sort(self.rng.choice(d, size=k, replace=False))
        best = None  # (cost, feature, threshold)
        for f in feats:
            found = self._best_split_on(sorted_idx[f], f)
            if found is None:
                continue
            cost, thr = found
            if best is None or cost < best[0] - 1e-12 * max(1.0, abs(best[0])):
                best = (cost, f, thr)
        if best is None:
            return node_id

        _, f, thr = best
        left_sorted, right_sorted = [], []
        for g in range(d):
            arr = sorted_idx[g]
            goes_left = self.X[arr, f] < thr
            left_sorted.append(arr[goes_left])
            right_sorted.append(arr[~goes_left])

        self.nodes[node_id][0] = int(f)
        self.nodes[node_id][1] = float(thr)
        self.nodes[node_id][2] = self._grow(left_sorted, depth + 1)
        self.nodes[node_id][3] = self._grow(right_sorted, depth + 1)
        return node_id

    def _best_split_on(self, order: np.ndarray, f: int):
        """Lowest-SSE split of this node along feature f, or None.

        Candidate thresholds are midpoints between consecutive distinct sorted
        values; ties resolve to the lowest threshold (first in scan order).
        """
        xs = self.X[order, f]
        ys = self.y[order]
        n = xs.size
        m = self.cfg.min_samples_leaf
        c1 = np.cumsum(ys)
        c2 = np.cumsum(ys * ys)
        tot1, tot2 = c1[-1], c2[-1]
        # split after position i: left = [0..i], right = [i+1..]
        i = np.arange(n - 1)
        valid = (xs[:-1] < xs[1:]) & (i + 1 >= m) & (n - i - 1 >= m)
        if not valid.any():
            return None
        nl = (i + 1).astype(float)
        nr = n - nl
        sse_l = c2[:-1] - c1[:-1] ** 2 / nl
        sse_r = (tot2 - c2[:-1]) - (tot1 - c1[:-1]) ** 2 / nr
        cost = np.where(valid, sse_l + sse_r, np.inf)
        j = int(np.argmin(cost))
        if not np.isfinite(cost[j]):
            return None
        return float(cost[j]), float((xs[j] + xs[j + 1]) / 2.0)


def train_forest(X: np.ndarray, y: np.ndarray, config: ForestConfig, task: str) -> Forest:
    """Train a deterministic forest; per-tree RNG streams derive from config.seed."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("empty training partition")
    children = np.random.SeedSequence(config.seed).spawn(config.n_trees)
    trees = []
    n = X.shape[0]
    for ss in children:
        rng = np.random.default_rng(ss)
        if config.bootstrap:
            idx = rng.integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        trees.append(_TreeBuilder(Xb, yb, config, rng).build())
    return Forest(trees=trees, task=task, config=config)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def auc_score(y_true: np.ndarray, scores: np.ndarray) -> float:
    """Mann-Whitney AUC with midrank handling of tied scores."""
    y_true = np.asarray(y_true, dtype=float)
    scores = np.asarray(scores, dtype=float)
    pos = y_true == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty_like(scores)
    s = scores[order]
    r = np.arange(1, len(s) + 1, dtype=float)
    # midranks for ties
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        r[i : j + 1] = (i + 1 + j + 1) / 2.0
        i = j + 1
    ranks[order] = r
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def evaluate_predictor(forest: Forest, X: np.ndarray, y: np.ndarray) -> dict:
    """Heldout metrics: MAE + R2 for regression, accuracy/AUC/MAE for classification."""
    if len(y) == 0:
        raise ValueError("empty test partition")
    pred = forest.predict(X)
    out = {"mae": float(np.mean(np.abs(pred - y)))}
    if forest.task == "regression":
        ss_res = float(np.sum((y - pred) ** 2))
        ss_tot = float(np.sum((y - np.mean(y)) ** 2))
        out["r2"] = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    else:
        out["accuracy"] = float(np.mean((pred >= 0.5) == (y == 1)))
        out["auc"] = auc_score(y, pred)
    return out


# ---------------------------------------------------------------------------
# Serialization (model bundle format)
# ---------------------------------------------------------------------------

def forest_to_dict(forest: Forest) -> dict:
    return {
        "task": forest.task,
        "n_trees": len(forest.trees),
        "config": {
            "n_trees": forest.config.n_trees,
            "max_depth": forest.config.max_depth,
            "min_samples_leaf": forest.config.min_samples_leaf,
            "features_per_split": forest.config.features_per_split,
            "bootstrap": forest.config.bootstrap,
            "seed": forest.config.seed,
        } if forest.config else None,
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "value": t.value.tolist(),
            }
            for t in forest.trees
        ],
    }


def forest_from_dict(d: dict) -> Forest:
    trees = [
        Tree(
            feature=np.array(t["feature"], dtype=int),
            threshold=np.array(t["threshold"], dtype=float),
            left=np.array(t["left"], dtype=int),
            right=np.array(t["right"], dtype=int),
            value=np.array(t["value"], dtype=float),
        )
        for t in d["trees"]
    ]
    cfg = ForestConfig(**d["config"]) if d.get("config") else None
    return Forest(trees=trees, task=d["task"], config=cfg)
