/**
 * Pure HTML-string renderers for the explanation table and instance picker.
 *
 * No arithmetic happens on model numbers here: every displayed figure is a
 * server-provided display string, and full-precision values appear only in
 * hover titles. Keeping these functions string-in string-out lets tests run
 * without a DOM.
 */
import type { ExplanationTable, Instance, TableRow } from "./schema.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Inequality glyph relating the explainer estimate to the prediction. */
export function comparisonGlyph(percentDifference: number): string {
  if (percentDifference === 0) return "=";
  return percentDifference > 0 ? "&gt;" : "&lt;";
}

function meter(fraction: number): string {
  const pct = (fraction * 100).toFixed(1);
  return `<span class="meter"><span class="meter-fill" style="width:${pct}%"></span></span>`;
}

function valueCell(row: TableRow): string {
  return (
    `<td class="value" title="${row.value}">` +
    `${escapeHtml(row.value_display)} ${meter(row.value_meter)}</td>`
  );
}

function factorCells(row: TableRow, showDelta: boolean): string {
  let html = `<td class="factor" title="${row.factor_full}">${escapeHtml(row.factor_display)}</td>`;
  if (showDelta) {
    const delta = row.delta_display === null ? "" : escapeHtml(row.delta_display);
    html += `<td class="delta">${delta}</td>`;
  }
  return html;
}

export function renderTable(table: ExplanationTable): string {
  const showDelta = table.rows.some((r) => r.delta_display !== null);
  const span = showDelta ? 4 : 3;
  const head =
    "<tr><th>attribute</th><th>value</th><th>factor</th>" +
    (showDelta ? "<th>delta</th>" : "") +
    "<th>contribution</th></tr>";
  const body = table.rows
    .map(
      (row) =>
        `<tr class="attribute-row" data-attribute="${escapeHtml(row.name)}">` +
        `<td class="name">${escapeHtml(row.name)} <span class="unit">(${escapeHtml(row.unit)})</span></td>` +
        valueCell(row) +
        factorCells(row, showDelta) +
        `<td class="contribution" title="${row.partial_contribution}">` +
        `${escapeHtml(row.contribution_display)}</td></tr>`
    )
    .join("");
  const banner = table.what_if
    ? `<div class="what-if-banner">what-if mode: factors overridden</div>`
    : "";
  const subspace =
    table.rule_text !== null
      ? `<div class="subspace">subspace: ${escapeHtml(table.subspace_label ?? "")}` +
        ` <span class="rule">(outliers: ${escapeHtml(table.rule_text)})</span></div>`
      : "";
  const footer =
    `<tr class="adjustment-row"><td>adjustment</td><td></td><td></td>` +
    (showDelta ? "<td></td>" : "") +
    `<td class="adjustment" title="${table.adjustment}">${escapeHtml(table.adjustment_display)}</td></tr>` +
    `<tr class="estimate-row"><td>estimate</td><td></td><td></td>` +
    (showDelta ? "<td></td>" : "") +
    `<td class="estimate" title="${table.explainer_estimate}">${escapeHtml(table.estimate_display)}</td></tr>` +
    `<tr class="prediction-row"><td>prediction <span class="glyph">estimate ${comparisonGlyph(table.percent_difference)} prediction</span></td>` +
    `<td></td><td></td>` +
    (showDelta ? "<td></td>" : "") +
    `<td class="prediction" title="${table.predictor_prediction}">${escapeHtml(table.prediction_display)}</td></tr>`;
  return (
    banner +
    subspace +
    `<table class="explain" data-xai="${escapeHtml(table.xai_type)}" data-columns="${span + 1}">` +
    `<thead>${head}</thead><tbody>${body}${footer}</tbody></table>`
  );
}

export function renderError(message: string): string {
  return `<div class="error-panel">${escapeHtml(message)}</div>`;
}

export function renderInstances(instances: Instance[]): string {
  const items = instances
    .map(
      (inst, i) =>
        `<li class="instance" data-index="${i}">` +
        `<span class="badge badge-${inst.subspace}">${inst.subspace}</span> ` +
        `${inst.values.map((v) => escapeHtml(String(v))).join(", ")}</li>`
    )
    .join("");
  return `<ul class="instances">${items}</ul>`;
}
