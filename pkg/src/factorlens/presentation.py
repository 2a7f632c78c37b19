"""Tabular explanation payloads with the display-rounding conventions.

All arithmetic stays full-precision; display strings are derived once here
and never feed back into computation.  Factors, values, and contributions
round to two significant figures; the adjustment (intercept) rounds to
three.  Rounding is half-away-from-zero.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .explainers import IncrementalModel, LinearFactorModel, SubglobalModel

SCHEMA_VERSION = "1"

_SIG_FIGS = {"factor": 2, "value": 2, "contribution": 2, "estimate": 2, "adjustment": 3}


def round_sig(value: float, sig: int) -> float:
    """Round to ``sig`` significant figures, half-away-from-zero.

    Works on the shortest decimal representation of the float, so 0.0345
    rounds up to 0.035 the way a reader of the printed value expects, and
    extreme magnitudes (including subnormals) stay exact in the Decimal
    domain instead of overflowing a power-of-ten scale factor.
    """
    value = float(value)
    if value == 0 or not math.isfinite(value):
        return value
    d = Decimal(repr(value))
    exp = d.adjusted()  # floor of log10(|value|)
    q = d.scaleb(-exp).quantize(Decimal(1).scaleb(1 - sig), rounding=ROUND_HALF_UP)
    return float(q.scaleb(exp))


def _format_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return f"{v:.10f}".rstrip("0").rstrip(".")


def round_display(value: float, role: str) -> str:
    """Display string for a value in a given role (factor, value,
    contribution, estimate, or adjustment)."""
    if not math.isfinite(value):
        raise ValueError(f"cannot display non-finite value {value!r}")
    if role not in _SIG_FIGS:
        raise ValueError(f"unknown display role {role!r}")
    return _format_number(round_sig(value, _SIG_FIGS[role]))


@dataclass
class TableRow:
    name: str
    unit: str
    value: float
    value_display: str
    value_meter: float  # position of the value in the dataset range, 0..1
    factor_full: float  # factor actually multiplied (effective for outliers)
    factor_display: str  # base factor display
    delta_display: str | None  # incremental delta, outliers only
    effective_factor_display: str
    partial_contribution: float
    contribution_display: str


@dataclass
class ExplanationTable:
    version: str
    xai_type: str
    rows: list[TableRow]
    adjustment: float
    adjustment_display: str
    explainer_estimate: float
    estimate_display: str
    predictor_prediction: float
    prediction_display: str
    percent_difference: float  # signed (estimate - prediction) / prediction
    subspace_label: str | None
    rule_text: str | None
    what_if: bool = False

    def as_dict(self) -> dict:
        d = asdict(self)
        d["rows"] = [asdict(r) for r in self.rows]
        return d


def _meter(value: float, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    return float(min(max((value - lo) / (hi - lo), 0.0), 1.0))


def build_table(
    model,
    xai_type: str,
    instance,
    prediction: float,
    feature_names: list[str],
    feature_units: list[str],
    feature_ranges: np.ndarray,
    factor_overrides: dict[str, float] | None = None,
    adjustment_override: float | None = None,
) -> ExplanationTable:
    """Assemble the per-attribute explanation rows for one instance.

    ``model`` is any explainer.  For Incremental models on outlier instances
    the delta column is populated and the contribution uses the effective
    (base + delta) factor.  Overrides substitute user-supplied factors
    (what-if mode); the predictor prediction is never affected by them.
    """
    x = np.asarray(instance, dtype=float)
    rule = getattr(model, "rule", None)
    subspace = rule.subspace_of(x) if rule is not None else None

    deltas = None
    if isinstance(model, IncrementalModel):
        base = model.base
        if subspace == "outlier":
            deltas = (model.delta_intercept, *model.delta_factors)
            active = model.outlier_model()
        else:
            active = base
        base_factors = base.factors
        base_intercept = base.intercept
    elif isinstance(model, SubglobalModel):
        active = model.active_model(x)
        base_factors = active.factors
        base_intercept = active.intercept
    else:
        active = model
        base_factors = active.factors
        base_intercept = active.intercept

    overrides = factor_overrides or {}
    what_if = bool(overrides) or adjustment_override is not None

    rows = []
    total = 0.0
    for i, name in enumerate(feature_names):
        base_f = base_factors[i]
        delta_f = deltas[i + 1] if deltas is not None else None
        effective = active.factors[i]
        used = overrides.get(name, effective)
        contribution = used * x[i]
        total += contribution
        if delta_f is not None:
            eff_disp = _format_number(round_sig(base_f, 2) + round_sig(delta_f, 2))
        else:
            eff_disp = round_display(used, "factor")
        rows.append(
            TableRow(
                name=name,
                unit=feature_units[i],
                value=float(x[i]),
                value_display=round_display(float(x[i]), "value"),
                value_meter=_meter(x[i], feature_ranges[i][0], feature_ranges[i][1]),
                factor_full=float(used),
                factor_display=round_display(overrides.get(name, base_f), "factor"),
                delta_display=(round_display(delta_f, "factor") if delta_f is not None else None),
                effective_factor_display=eff_disp,
                partial_contribution=float(contribution),
                contribution_display=round_display(contribution, "contribution"),
            )
        )

    adjustment = active.intercept if deltas is None else base_intercept + deltas[0]
    if adjustment_override is not None:
        adjustment = adjustment_override
    estimate = adjustment + total
    pct = (estimate - prediction) / prediction if prediction != 0 else float("inf")

    return ExplanationTable(
        version=SCHEMA_VERSION,
        xai_type=xai_type,
        rows=rows,
        adjustment=float(adjustment),
        adjustment_display=round_display(adjustment, "adjustment"),
        explainer_estimate=float(estimate),
        estimate_display=round_display(estimate, "estimate"),
        predictor_prediction=float(prediction),
        prediction_display=round_display(prediction, "estimate"),
        percent_difference=float(pct),
        subspace_label=subspace,
        rule_text=(
            rule.outlier_text(
                feature_names[rule.feature_index], feature_units[rule.feature_index]
            )
            if rule is not None else None
        ),
        what_if=what_if,
    )
