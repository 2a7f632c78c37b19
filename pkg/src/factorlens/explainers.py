"""Sparse linear factor explainers: Global, Subglobal, Incremental, Local.

All four families share the same payload: an intercept (the "adjustment")
plus one factor per attribute, in target-units per feature-unit.  Subglobal
and Incremental additionally carry a single-attribute partition rule whose
majority side is "typical" and minority side "outlier"; the boundary value
belongs to the at-or-above side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .optimize import prox_gradient, quadratic_smooth

RIDGE_EPS = 1e-8
DELTA_SNAP = 1e-6


class DegenerateSplitError(Exception):
    """No admissible split exists (e.g. constant feature matrix)."""


@dataclass(frozen=True)
class LinearFactorModel:
    intercept: float
    factors: tuple[float, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def estimate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.intercept + np.dot(self.factors, x))

    def estimate_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.intercept + X @ np.asarray(self.factors)


@dataclass(frozen=True)
class PartitionRule:
    feature_index: int
    threshold: float
    typical_side: str  # "below" | "at_or_above"

    def is_outlier(self, x) -> bool:
        return bool(self.outlier_mask(np.asarray(x, dtype=float)[None, :])[0])

    def outlier_mask(self, X: np.ndarray) -> np.ndarray:
        at_or_above = X[:, self.feature_index] >= self.threshold
        return at_or_above if self.typical_side == "below" else ~at_or_above

    def subspace_of(self, x) -> str:
        return "outlier" if self.is_outlier(x) else "typical"

    def outlier_text(self, feature_name: str, unit: str) -> str:
        op = ">=" if self.typical_side == "below" else "<"
        return f"{feature_name} {op} {self.threshold:g} {unit}".strip()


@dataclass(frozen=True)
class SubglobalModel:
    rule: PartitionRule
    typical: LinearFactorModel
    outlier: LinearFactorModel

    def active_model(self, x) -> LinearFactorModel:
        return self.outlier if self.rule.is_outlier(x) else self.typical

    def estimate(self, x) -> float:
        return self.active_model(x).estimate(x)

    def estimate_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = self.rule.outlier_mask(X)
        return np.where(out, self.outlier.estimate_many(X), self.typical.estimate_many(X))


@dataclass(frozen=True)
class IncrementalModel:
    rule: PartitionRule
    base: LinearFactorModel
    delta_intercept: float
    delta_factors: tuple[float, ...]
    lam: float
    meta: dict = field(default_factory=dict, compare=False)

    def outlier_model(self) -> LinearFactorModel:
        return LinearFactorModel(
            intercept=self.base.intercept + self.delta_intercept,
            factors=tuple(b + d for b, d in zip(self.base.factors, self.delta_factors)),
        )

    def active_model(self, x) -> LinearFactorModel:
        return self.outlier_model() if self.rule.is_outlier(x) else self.base

    def estimate(self, x) -> float:
        return self.active_model(x).estimate(x)

    def estimate_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = self.rule.outlier_mask(X)
        return np.where(
            out, self.outlier_model().estimate_many(X), self.base.estimate_many(X)
        )


def estimate(model, x) -> float:
    """Full-precision estimate of any explainer on one instance."""
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all():
        raise ValueError("non-finite feature value")
    return model.estimate(x)


# ---------------------------------------------------------------------------
# Global: exact OLS via normal equations
# ---------------------------------------------------------------------------

def fit_global(X: np.ndarray, y_hat: np.ndarray) -> LinearFactorModel:
    """Ordinary least squares of the predictor outputs on [1, X].

    Rank-deficient designs fall back to ridge (eps=1e-8) and are flagged in
    ``meta["ridge_fallback"]``.
    """
    X = np.asarray(X, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if X.shape[0] < 6:
        raise ValueError("need at least 6 rows to fit a global model")
    A = np.column_stack([np.ones(X.shape[0]), X])
    G = A.T @ A
    b = A.T @ y_hat
    ridge = False
    if np.linalg.matrix_rank(G) < G.shape[0]:
        ridge = True
        G = G + RIDGE_EPS * np.eye(G.shape[0])
    w = np.linalg.solve(G, b)
    return LinearFactorModel(
        intercept=float(w[0]),
        factors=tuple(float(v) for v in w[1:]),
        meta={"ridge_fallback": ridge},
    )


# ---------------------------------------------------------------------------
# Split search shared by Subglobal and Incremental
# ---------------------------------------------------------------------------

PERCENTILE_GRID_ABOVE = 5000  # row count beyond which candidates are percentile points


def min_subspace_rows(n: int) -> int:
    return max(6, math.ceil(0.05 * n))


def candidate_thresholds(col: np.ndarray, n_rows: int) -> np.ndarray:
    """Midpoints between consecutive distinct values, or a 1..99 percentile
    grid for large datasets."""
    if n_rows > PERCENTILE_GRID_ABOVE:
        return np.unique(np.percentile(col, np.arange(1, 100)))
    u = np.unique(col)
    if u.size < 2:
        return np.array([])
    return (u[:-1] + u[1:]) / 2.0


def _ols_sse_from_gram(M: np.ndarray) -> float:
    """SSE of the OLS fit from the (d+2)x(d+2) Gram of [1, X, y]."""
    G = M[:-1, :-1]
    b = M[:-1, -1]
    yy = M[-1, -1]
    try:
        w = np.linalg.solve(G, b)
    except np.linalg.LinAlgError:
        w = np.linalg.solve(G + RIDGE_EPS * np.eye(G.shape[0]), b)
    return float(max(yy - b @ w, 0.0))


def split_search(X: np.ndarray, y_hat: np.ndarray):
    """Best (feature, threshold) minimizing SSE(OLS below) + SSE(OLS at-or-above).

    Scans every feature's candidate grid with prefix-summed Gram matrices so
    each threshold costs one small linear solve.  Ties break to the lowest
    feature index, then the lowest threshold.  Raises DegenerateSplitError if
    no candidate leaves both sides with at least max(6, 5% of rows) rows.
    """
    X = np.asarray(X, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    n, d = X.shape
    min_rows = min_subspace_rows(n)
    A = np.column_stack([np.ones(n), X, y_hat])  # (n, d+2)
    best = None  # (cost, feature, threshold)
    for f in range(d):
        thresholds = candidate_thresholds(X[:, f], n)
        if thresholds.size == 0:
            continue
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        As = A[order]
        outer = As[:, :, None] * As[:, None, :]
        prefix = np.cumsum(outer, axis=0)
        total = prefix[-1]
        for thr in thresholds:
            p = int(np.searchsorted(xs, thr, side="left"))  # rows strictly below
            if p < min_rows or n - p < min_rows:
                continue
            M_lo = prefix[p - 1]
            cost = _ols_sse_from_gram(M_lo) + _ols_sse_from_gram(total - M_lo)
            if best is None or cost < best[0] * (1 - 1e-12) - 1e-12:
                best = (cost, f, float(thr))
    if best is None:
        raise DegenerateSplitError("no admissible split")
    return best[1], best[2]


def make_rule(X: np.ndarray, feature: int, threshold: float) -> PartitionRule:
    """Attach the majority-side-is-typical convention to a raw split."""
    n_above = int(np.sum(X[:, feature] >= threshold))
    n_below = X.shape[0] - n_above
    typical_side = "below" if n_below >= n_above else "at_or_above"
    return PartitionRule(feature_index=feature, threshold=threshold, typical_side=typical_side)


def fit_subglobal(X: np.ndarray, y_hat: np.ndarray, rule: PartitionRule | None = None) -> SubglobalModel:
    """Decision stump over OLS leaves: search the split, then fit each side."""
    X = np.asarray(X, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if rule is None:
        feature, threshold = split_search(X, y_hat)
        rule = make_rule(X, feature, threshold)
    out = rule.outlier_mask(X)
    return SubglobalModel(
        rule=rule,
        typical=fit_global(X[~out], y_hat[~out]),
        outlier=fit_global(X[out], y_hat[out]),
    )


# ---------------------------------------------------------------------------
# Incremental: base + L1-regularized deltas (proximal gradient descent)
# ---------------------------------------------------------------------------

def _standardize(X, y):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    muy = y.mean()
    sdy = y.std()
    if sdy == 0:
        sdy = 1.0
    return (X - mu) / sd, (y - muy) / sdy, mu, sd, muy, sdy


def incremental_design(Xs: np.ndarray, outlier: np.ndarray) -> np.ndarray:
    """[1, Xs | outlier*(1, Xs)]: base columns then delta columns."""
    n, d = Xs.shape
    A = np.column_stack([np.ones(n), Xs])
    return np.column_stack([A, A * outlier[:, None].astype(float)])


def fit_incremental(
    X: np.ndarray,
    y_hat: np.ndarray,
    lam: float,
    rule: PartitionRule | None = None,
    max_iter: int = 50_000,
    tol: float = 1e-9,
) -> IncrementalModel:
    """Base factors for the typical subspace plus sparse additive deltas for
    the outlier subspace, trained by proximal gradient descent on the summed
    squared error with an L1 penalty on the deltas.

    Optimization runs on standardized features and target; the learned
    weights are de-standardized afterwards, which is an exact reparametrization.
    The L1 penalty therefore acts on the standardized deltas (each a fixed
    positive multiple of its raw delta).  Deltas below 1e-6 snap to exact 0.
    """
    X = np.asarray(X, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if rule is None:
        feature, threshold = split_search(X, y_hat)
        rule = make_rule(X, feature, threshold)
    out = rule.outlier_mask(X)

    Xs, ys, mu, sd, muy, sdy = _standardize(X, y_hat)
    Z = incremental_design(Xs, out)
    H = Z.T @ Z
    c = Z.T @ ys
    yy = float(ys @ ys)
    d = X.shape[1]
    lam_std = lam / (sdy * sdy)  # raw SSE scales by sdy^2 under standardization
    theta0 = np.zeros(2 * (d + 1))
    theta, info = prox_gradient(
        quadratic_smooth(H, c, yy),
        theta0,
        lam=lam_std,
        l1_indices=np.arange(d + 1, 2 * (d + 1)),
        max_iter=max_iter,
        tol=tol,
    )
    base_s = theta[: d + 1]
    delta_s = theta[d + 1 :]
    delta_s = np.where(np.abs(delta_s) < DELTA_SNAP, 0.0, delta_s)

    # de-standardize: w_r = sdy*b_r/sd_r ; w_0 = muy + sdy*(b_0 - sum b_r*mu_r/sd_r)
    base_f = sdy * base_s[1:] / sd
    base_0 = muy + sdy * (base_s[0] - float(np.sum(base_s[1:] * mu / sd)))
    delta_f = sdy * delta_s[1:] / sd
    delta_0 = sdy * (delta_s[0] - float(np.sum(delta_s[1:] * mu / sd)))

    return IncrementalModel(
        rule=rule,
        base=LinearFactorModel(float(base_0), tuple(float(v) for v in base_f)),
        delta_intercept=float(delta_0),
        delta_factors=tuple(float(v) for v in delta_f),
        lam=float(lam),
        meta={"iterations": info["iterations"], "final_loss": info["loss"]},
    )


def incremental_smooth_loss(X, y_hat, rule: PartitionRule):
    """Standardized smooth part of the Incremental training loss, for gradient
    checks: returns (smooth callable over theta of size 2(d+1), theta size)."""
    X = np.asarray(X, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    out = rule.outlier_mask(X)
    Xs, ys, *_ = _standardize(X, y_hat)
    Z = incremental_design(Xs, out)
    return quadratic_smooth(Z.T @ Z, Z.T @ ys, float(ys @ ys)), 2 * (X.shape[1] + 1)


# ---------------------------------------------------------------------------
# Local: perturbation sampling around one instance (LIME-style)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalConfig:
    n_samples: int = 1000
    perturb_scale: float = 0.3
    kernel_width: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 50:
            raise ValueError("n_samples must be >= 50")
        if self.kernel_width <= 0:
            raise ValueError("kernel_width must be > 0")


def fit_local(
    instance,
    predict_fn,
    feature_std: np.ndarray,
    config: LocalConfig,
) -> LinearFactorModel:
    """Weighted OLS on perturbations of the instance.

    Perturbations are Normal(instance, perturb_scale * feature_std); sample
    weights are exp(-(d/kernel_width)^2) of the standardized Euclidean
    distance d.  Constant features (std 0) get factor 0 and are flagged.
    """
    x0 = np.asarray(instance, dtype=float)
    if not np.isfinite(x0).all():
        raise ValueError("non-finite target instance")
    feature_std = np.asarray(feature_std, dtype=float)
    d = x0.size
    rng = np.random.default_rng(config.seed)
    sigma = config.perturb_scale * feature_std
    Xp = x0 + rng.standard_normal((config.n_samples, d)) * sigma
    yp = np.asarray(predict_fn(Xp), dtype=float)

    safe_std = np.where(feature_std > 0, feature_std, 1.0)
    dist = np.sqrt(np.sum(((Xp - x0) / safe_std) ** 2, axis=1))
    w = np.exp(-((dist / config.kernel_width) ** 2))

    degenerate = feature_std <= 0
    cols = np.flatnonzero(~degenerate)
    A = np.column_stack([np.ones(config.n_samples), Xp[:, cols]])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], yp * sw, rcond=None)
    factors = np.zeros(d)
    factors[cols] = coef[1:]
    return LinearFactorModel(
        intercept=float(coef[0]),
        factors=tuple(float(v) for v in factors),
        meta={"degenerate_features": [int(i) for i in np.flatnonzero(degenerate)]},
    )
