"""Faithfulness study: per-subspace unfaithfulness, glassbox performance,
5-fold statistics, and the partition-threshold sweep.

Unfaithfulness is the mean absolute error between an explainer's estimate and
the predictor's prediction.  For the classification dataset the predictor
output is a probability; unfaithfulness MAEs are reported on a 0-100
percentage scale.  Combined subspace figures are always the sample-weighted
mean of the typical and outlier figures.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset, make_split_plan
from .explainers import (
    LocalConfig,
    PartitionRule,
    fit_global,
    fit_incremental,
    fit_local,
    fit_subglobal,
    incremental_design,
    _standardize,
)
from .forest import Forest, ForestConfig, evaluate_predictor, train_forest
from .optimize import logistic_smooth, prox_gradient, sigmoid

XAI_TYPES = ("global", "subglobal", "incremental", "local")
SUBSPACES = ("combined", "typical", "outlier")
LAMBDA_GRID_BASE = (1.0, 10.0, 100.0, 1000.0)
LOCAL_EVAL_CAP = 300  # per-fold cap on rows given a fresh local fit each


def local_seed_for(seed: int, *context: int) -> int:
    """Stable per-instance seed derivation for local fits."""
    return int(np.random.SeedSequence([seed, *context]).generate_state(1)[0])


def unfaithfulness_mae(estimates: np.ndarray, predictions: np.ndarray) -> float:
    if len(estimates) == 0:
        raise ValueError("empty evaluation set")
    return float(np.mean(np.abs(np.asarray(estimates) - np.asarray(predictions))))


def explainer_estimates(model, X: np.ndarray) -> np.ndarray:
    return model.estimate_many(X)


def local_estimates(
    X: np.ndarray, forest: Forest, feature_std: np.ndarray, base_config: LocalConfig, seed: int
) -> np.ndarray:
    """Fresh local model per row; each row's factors depend only on (row, seed)."""
    out = np.empty(X.shape[0])
    for i, x in enumerate(X):
        cfg = LocalConfig(
            n_samples=base_config.n_samples,
            perturb_scale=base_config.perturb_scale,
            kernel_width=base_config.kernel_width,
            seed=local_seed_for(seed, i),
        )
        out[i] = fit_local(x, forest.predict, feature_std, cfg).estimate(x)
    return out


def combined_weighted(mae_typ: float, n_typ: int, mae_out: float, n_out: int) -> float:
    return (n_typ * mae_typ + n_out * mae_out) / (n_typ + n_out)


def choose_lambda(
    X: np.ndarray, y_hat: np.ndarray, rule: PartitionRule, grid_base=LAMBDA_GRID_BASE
) -> float:
    """Largest grid lambda whose combined training MAE stays within 5% of
    the unregularized fit.  Grid points scale with the outlier share."""
    out = rule.outlier_mask(X)
    scale = out.mean()
    base_model = fit_incremental(X, y_hat, 0.0, rule=rule)
    base_mae = unfaithfulness_mae(base_model.estimate_many(X), y_hat)
    chosen = 0.0
    for g in grid_base:
        lam = g * scale
        m = fit_incremental(X, y_hat, lam, rule=rule)
        if unfaithfulness_mae(m.estimate_many(X), y_hat) <= 1.05 * base_mae:
            chosen = lam
    return float(chosen)


# ---------------------------------------------------------------------------
# Glassbox fits (trained on ground truth, not predictor output)
# ---------------------------------------------------------------------------

LOGISTIC_MAX_ITER = 20_000


def _fit_logistic(X, y, l1_lam=0.0, rule: PartitionRule | None = None, incremental=False):
    """Logistic-activation linear model(s) trained with binary cross-entropy.

    Returns (predict_proba callable, converged flag).  With ``incremental``
    the design has base + outlier-delta columns and L1 applies to the deltas.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Xs, _, mu, sd, _, _ = _standardize(X, y)
    d = X.shape[1]
    if incremental:
        Z = incremental_design(Xs, rule.outlier_mask(X))
        l1 = np.arange(d + 1, 2 * (d + 1))
    else:
        Z = np.column_stack([np.ones(X.shape[0]), Xs])
        l1 = None
    theta, info = prox_gradient(
        logistic_smooth(Z, y), np.zeros(Z.shape[1]), lam=l1_lam,
        l1_indices=l1, max_iter=LOGISTIC_MAX_ITER, tol=1e-10,
    )
    converged = info["iterations"] < LOGISTIC_MAX_ITER

    def predict_proba(Xq):
        Xq = np.asarray(Xq, dtype=float)
        Xqs = (Xq - mu) / sd
        if incremental:
            Zq = incremental_design(Xqs, rule.outlier_mask(Xq))
        else:
            Zq = np.column_stack([np.ones(Xq.shape[0]), Xqs])
        return sigmoid(Zq @ theta)

    return predict_proba, converged


def glassbox_fit(family: str, X_train, y_train, task: str, rule: PartitionRule, lam: float):
    """Train an explainer family directly on ground truth.

    Returns (predict callable, converged flag).  Regression predictions are
    target estimates; classification predictions are logistic probabilities
    trained with binary cross-entropy.
    """
    if family not in ("global", "subglobal", "incremental"):
        raise ValueError(f"no glassbox variant for family {family!r}")
    if task == "regression":
        if family == "global":
            model = fit_global(X_train, y_train)
        elif family == "subglobal":
            model = fit_subglobal(X_train, y_train, rule=rule)
        else:
            model = fit_incremental(X_train, y_train, lam, rule=rule)
        return model.estimate_many, True

    if family == "global":
        return _fit_logistic(X_train, y_train)
    if family == "subglobal":
        out_tr = rule.outlier_mask(np.asarray(X_train, dtype=float))
        p_typ, ok1 = _fit_logistic(np.asarray(X_train)[~out_tr], np.asarray(y_train)[~out_tr])
        p_out, ok2 = _fit_logistic(np.asarray(X_train)[out_tr], np.asarray(y_train)[out_tr])

        def proba(Xq):
            Xq = np.asarray(Xq, dtype=float)
            o = rule.outlier_mask(Xq)
            res = np.empty(Xq.shape[0])
            if (~o).any():
                res[~o] = p_typ(Xq[~o])
            if o.any():
                res[o] = p_out(Xq[o])
            return res

        return proba, ok1 and ok2
    return _fit_logistic(X_train, y_train, l1_lam=lam, rule=rule, incremental=True)


def glassbox_performance(
    family: str, X_train, y_train, X_eval, y_eval, task: str, rule: PartitionRule, lam: float
) -> dict:
    """Glassbox metric on one evaluation set: MAE for regression, accuracy
    (0.5 threshold) for classification, with a non-convergence flag."""
    predict, ok = glassbox_fit(family, X_train, y_train, task, rule, lam)
    if task == "regression":
        return {"metric": "mae",
                "value": float(np.mean(np.abs(predict(X_eval) - y_eval))),
                "converged": ok}
    acc = float(np.mean((predict(X_eval) >= 0.5) == (np.asarray(y_eval) == 1)))
    return {"metric": "accuracy", "value": acc, "converged": ok}


# ---------------------------------------------------------------------------
# The modeling study
# ---------------------------------------------------------------------------

@dataclass
class FaithfulnessReport:
    dataset: str
    xai_type: str
    subspace: str
    kind: str  # "unfaithfulness" | "glassbox" | "predictor"
    folds: list[float] = field(default_factory=list)

    @property
    def mae_mean(self) -> float:
        return float(np.mean(self.folds))

    @property
    def mae_std(self) -> float:
        return float(np.std(self.folds, ddof=1)) if len(self.folds) > 1 else 0.0

    def as_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "xai_type": self.xai_type,
            "subspace": self.subspace,
            "kind": self.kind,
            "mean": self.mae_mean,
            "std": self.mae_std,
            "folds": list(self.folds),
        }


def _report_scale(task: str) -> float:
    # probabilities are reported on a 0-100 percentage scale
    return 100.0 if task == "classification" else 1.0


def run_modeling_study(
    dataset: Dataset,
    seed: int,
    forest_config: ForestConfig | None = None,
    local_config: LocalConfig | None = None,
    folds: int = 5,
) -> dict:
    """Cross-validated faithfulness table plus a heldout-test summary.

    Per fold: train the forest on the fold-train rows, fit all four explainer
    families against its predictions, and evaluate per subspace on the fold's
    validation rows.  Every number is deterministic given the seed.
    """
    forest_config = forest_config or ForestConfig()
    local_config = local_config or LocalConfig()
    plan = make_split_plan(dataset.n_rows, seed, folds=folds)
    scale = _report_scale(dataset.task)
    feature_std = dataset.X[plan.train_indices].std(axis=0)

    reports: dict[tuple, FaithfulnessReport] = {}

    def rep(xai_type: str, subspace: str, kind: str) -> FaithfulnessReport:
        key = (xai_type, subspace, kind)
        if key not in reports:
            reports[key] = FaithfulnessReport(dataset.name, xai_type, subspace, kind)
        return reports[key]

    fold_rules = []
    fold_lambdas = []
    fold_counts = []
    for k in range(folds):
        tr, val = plan.fold_train_validation(k)
        X_tr, y_tr = dataset.X[tr], dataset.y[tr]
        X_val, y_val = dataset.X[val], dataset.y[val]
        cfg = ForestConfig(
            n_trees=forest_config.n_trees, max_depth=forest_config.max_depth,
            min_samples_leaf=forest_config.min_samples_leaf,
            features_per_split=forest_config.features_per_split,
            bootstrap=forest_config.bootstrap, seed=forest_config.seed + k,
        )
        forest = train_forest(X_tr, y_tr, cfg, dataset.task)
        yhat_tr = forest.predict(X_tr)
        yhat_val = forest.predict(X_val)

        g = fit_global(X_tr, yhat_tr)
        s = fit_subglobal(X_tr, yhat_tr)
        rule = s.rule
        lam = choose_lambda(X_tr, yhat_tr, rule)
        inc = fit_incremental(X_tr, yhat_tr, lam, rule=rule)
        fold_rules.append(rule)
        fold_lambdas.append(lam)

        out_val = rule.outlier_mask(X_val)
        subsets = {
            "combined": np.ones(len(val), dtype=bool),
            "typical": ~out_val,
            "outlier": out_val,
        }

        # local estimates on a capped, seeded sample of validation rows
        rng = np.random.default_rng(np.random.SeedSequence([seed, k, 7]))
        if len(val) > LOCAL_EVAL_CAP:
            pick = np.sort(rng.choice(len(val), LOCAL_EVAL_CAP, replace=False))
        else:
            pick = np.arange(len(val))
        loc_est = local_estimates(X_val[pick], forest, feature_std, local_config, seed + k)
        loc_pred = yhat_val[pick]
        loc_out = out_val[pick]

        for name, model in (("global", g), ("subglobal", s), ("incremental", inc)):
            est = model.estimate_many(X_val)
            for sub, mask in subsets.items():
                if mask.any():
                    rep(name, sub, "unfaithfulness").folds.append(
                        scale * unfaithfulness_mae(est[mask], yhat_val[mask])
                    )
        loc_subsets = {"combined": np.ones(len(pick), dtype=bool), "typical": ~loc_out, "outlier": loc_out}
        for sub, mask in loc_subsets.items():
            if mask.any():
                rep("local", sub, "unfaithfulness").folds.append(
                    scale * unfaithfulness_mae(loc_est[mask], loc_pred[mask])
                )

        # predictor performance vs ground truth, per subspace
        for sub, mask in subsets.items():
            if not mask.any():
                continue
            if dataset.task == "regression":
                rep("predictor", sub, "predictor").folds.append(
                    float(np.mean(np.abs(yhat_val[mask] - y_val[mask])))
                )
            else:
                rep("predictor", sub, "predictor").folds.append(
                    100.0 * float(np.mean((yhat_val[mask] >= 0.5) == (y_val[mask] == 1)))
                )

        # glassbox performance (trained on ground truth)
        for fam in ("global", "subglobal", "incremental"):
            predict, _ = glassbox_fit(fam, X_tr, y_tr, dataset.task, rule, lam)
            pred_val = predict(X_val)
            for sub, mask in subsets.items():
                if not mask.any():
                    continue
                if dataset.task == "regression":
                    value = float(np.mean(np.abs(pred_val[mask] - y_val[mask])))
                else:
                    value = 100.0 * float(np.mean((pred_val[mask] >= 0.5) == (y_val[mask] == 1)))
                rep(fam, sub, "glassbox").folds.append(value)

        fold_counts.append({
            "typical": int((~out_val).sum()), "outlier": int(out_val.sum()),
            "local_typical": int((~loc_out).sum()), "local_outlier": int(loc_out.sum()),
        })

    # heldout summary: forest on the full training partition, scored on test
    tr, te = plan.train_indices, plan.test_indices
    forest = train_forest(dataset.X[tr], dataset.y[tr], forest_config, dataset.task)
    yhat_tr = forest.predict(dataset.X[tr])
    yhat_te = forest.predict(dataset.X[te])
    g = fit_global(dataset.X[tr], yhat_tr)
    s = fit_subglobal(dataset.X[tr], yhat_tr)
    lam = choose_lambda(dataset.X[tr], yhat_tr, s.rule)
    inc = fit_incremental(dataset.X[tr], yhat_tr, lam, rule=s.rule)
    predictor_metrics = evaluate_predictor(forest, dataset.X[te], dataset.y[te])

    rng = np.random.default_rng(np.random.SeedSequence([seed, 99]))
    n_te = len(te)
    pick = (
        np.sort(rng.choice(n_te, LOCAL_EVAL_CAP, replace=False))
        if n_te > LOCAL_EVAL_CAP else np.arange(n_te)
    )
    loc_est = local_estimates(
        dataset.X[te][pick], forest, feature_std, local_config, seed + 99
    )
    heldout = {
        "predictor": predictor_metrics,
        "unfaithfulness": {
            "global": scale * unfaithfulness_mae(g.estimate_many(dataset.X[te]), yhat_te),
            "subglobal": scale * unfaithfulness_mae(s.estimate_many(dataset.X[te]), yhat_te),
            "incremental": scale * unfaithfulness_mae(inc.estimate_many(dataset.X[te]), yhat_te),
            "local": scale * unfaithfulness_mae(loc_est, yhat_te[pick]),
        },
        "rule": {
            "feature_index": s.rule.feature_index,
            "feature": dataset.feature_names[s.rule.feature_index],
            "threshold": s.rule.threshold,
            "typical_side": s.rule.typical_side,
        },
        "lambda": lam,
    }

    return {
        "dataset": dataset.name,
        "seed": seed,
        "task": dataset.task,
        "evaluation_rows": "fold-validation (heldout summary separate)",
        "reports": [r.as_dict() for r in reports.values()],
        "fold_rules": [
            {"feature_index": r.feature_index, "threshold": r.threshold, "typical_side": r.typical_side}
            for r in fold_rules
        ],
        "fold_lambdas": fold_lambdas,
        "fold_counts": fold_counts,
        "heldout": heldout,
        "models": {"forest": forest, "global": g, "subglobal": s, "incremental": inc},
    }


# ---------------------------------------------------------------------------
# Threshold sweep
# ---------------------------------------------------------------------------

def threshold_sweep(
    dataset: Dataset,
    forest: Forest,
    feature_index: int,
    percentiles: np.ndarray | None = None,
    train_indices: np.ndarray | None = None,
    lam: float | None = None,
) -> dict:
    """Fix the partition threshold at each percentile of the split feature,
    fit Subglobal and Incremental under that rule, and record per-subspace
    MAE, the sample-weighted combined MAE, and every factor and delta."""
    if percentiles is None:
        percentiles = np.arange(10, 91, 5)
    idx = train_indices if train_indices is not None else np.arange(dataset.n_rows)
    X = dataset.X[idx]
    yhat = forest.predict(X)
    scale = _report_scale(dataset.task)
    col = X[:, feature_index]
    from .explainers import make_rule, min_subspace_rows

    min_rows = min_subspace_rows(len(idx))
    if lam is None:
        base_rule = make_rule(X, feature_index, float(np.percentile(col, 50)))
        lam = choose_lambda(X, yhat, base_rule)

    points = []
    for p in percentiles:
        thr = float(np.percentile(col, p))
        rule = make_rule(X, feature_index, thr)
        out = rule.outlier_mask(X)
        n_out, n_typ = int(out.sum()), int((~out).sum())
        if min(n_out, n_typ) < min_rows:
            points.append({"percentile": int(p), "threshold": thr, "status": "skipped"})
            continue
        s = fit_subglobal(X, yhat, rule=rule)
        inc = fit_incremental(X, yhat, lam, rule=rule)
        est_s = s.estimate_many(X)
        est_i = inc.estimate_many(X)
        rec = {"percentile": int(p), "threshold": thr, "status": "ok",
               "n_typical": n_typ, "n_outlier": n_out}
        for tag, est in (("subglobal", est_s), ("incremental", est_i)):
            m_t = scale * unfaithfulness_mae(est[~out], yhat[~out])
            m_o = scale * unfaithfulness_mae(est[out], yhat[out])
            rec[f"{tag}_mae_typical"] = m_t
            rec[f"{tag}_mae_outlier"] = m_o
            rec[f"{tag}_mae_combined"] = combined_weighted(m_t, n_typ, m_o, n_out)
        rec["subglobal_factors_typical"] = [s.typical.intercept, *s.typical.factors]
        rec["subglobal_factors_outlier"] = [s.outlier.intercept, *s.outlier.factors]
        rec["incremental_base"] = [inc.base.intercept, *inc.base.factors]
        rec["incremental_deltas"] = [inc.delta_intercept, *inc.delta_factors]
        points.append(rec)

    ok = [r for r in points if r["status"] == "ok"]
    for tag in ("subglobal", "incremental"):
        vals = np.array([r[f"{tag}_mae_combined"] for r in ok])
        lo, hi = vals.min(), vals.max()
        span = hi - lo if hi > lo else 1.0
        for r, v in zip(ok, vals):
            r[f"{tag}_mae_combined_norm"] = float((v - lo) / span)
    best = min(ok, key=lambda r: r["incremental_mae_combined"]) if ok else None
    best_sub = min(ok, key=lambda r: r["subglobal_mae_combined"]) if ok else None
    return {
        "dataset": dataset.name,
        "feature_index": feature_index,
        "feature": dataset.feature_names[feature_index],
        "lambda": lam,
        "points": points,
        "min_combined_subglobal": best_sub["threshold"] if best_sub else None,
        "min_combined_incremental": best["threshold"] if best else None,
    }
