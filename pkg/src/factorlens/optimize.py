"""Proximal gradient descent with backtracking line search.

Minimizes  f(theta) + lam * sum(|theta[i]| for i in l1_indices)  where f is
smooth and supplied as a callable returning (loss, gradient).  The proximal
soft-threshold step produces exact zeros on the regularized coordinates.
"""
from __future__ import annotations

import numpy as np


class DivergenceError(Exception):
    def __init__(self, step: float):
        super().__init__(f"optimization diverged (loss became non-finite at step size {step})")
        self.step = step


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def prox_gradient(
    smooth,  # theta -> (loss, grad)
    theta0: np.ndarray,
    lam: float = 0.0,
    l1_indices: np.ndarray | None = None,
    max_iter: int = 50_000,
    tol: float = 1e-9,
    step0: float = 1.0,
):
    """Returns (theta, info dict with iterations and final loss).

    Stops when the relative decrease of the full objective falls below
    ``tol`` or after ``max_iter`` iterations.
    """
    theta = np.asarray(theta0, dtype=float).copy()
    mask = np.zeros(theta.size, dtype=bool)
    if l1_indices is not None:
        mask[np.asarray(l1_indices, dtype=int)] = True

    def penalty(t):
        return lam * float(np.abs(t[mask]).sum()) if lam > 0 else 0.0

    f, g = smooth(theta)
    total = f + penalty(theta)
    step = step0
    it = 0
    for it in range(1, max_iter + 1):
        # backtracking on the smooth majorization
        while True:
            cand = theta - step * g
            if lam > 0:
                cand[mask] = soft_threshold(cand[mask], step * lam)
            f_cand, g_cand = smooth(cand)
            if not np.isfinite(f_cand):
                step *= 0.5
                if step < 1e-30:
                    raise DivergenceError(step)
                continue
            diff = cand - theta
            if f_cand <= f + g @ diff + (diff @ diff) / (2.0 * step) + 1e-12:
                break
            step *= 0.5
            if step < 1e-30:
                raise DivergenceError(step)
        new_total = f_cand + penalty(cand)
        theta, f, g = cand, f_cand, g_cand
        if not np.isfinite(new_total):
            raise DivergenceError(step)
        if total - new_total <= tol * max(1.0, abs(total)):
            total = new_total
            break
        total = new_total
        step *= 1.25  # allow the step to grow back between backtracks
    return theta, {"iterations": it, "loss": float(total), "step": float(step)}


def quadratic_smooth(H: np.ndarray, c: np.ndarray, yy: float):
    """Smooth part ||Z theta - y||^2 given H = Z'Z, c = Z'y, yy = y'y."""
    def f(theta):
        Ht = H @ theta
        loss = float(theta @ Ht - 2.0 * (c @ theta) + yy)
        grad = 2.0 * (Ht - c)
        return loss, grad
    return f


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Overflow-safe logistic function."""
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_smooth(Z: np.ndarray, y: np.ndarray):
    """Binary cross-entropy of sigmoid(Z theta) against y in {0,1} (sum form)."""
    def f(theta):
        z = Z @ theta
        # log(1 + e^z) - y*z, numerically stable
        loss = float(np.sum(np.logaddexp(0.0, z) - y * z))
        grad = Z.T @ (sigmoid(z) - y)
        return loss, grad
    return f
