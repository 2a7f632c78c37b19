/**
 * DOM entry point: wires the explorer state machine to the page controls.
 *
 * Layout: an instance picker (with subspace filter), one numeric input per
 * attribute value, one per factor override, an explainer-type selector, and
 * the rendered explanation table.
 */
import { HttpClient } from "./client.js";
import { renderError, renderInstances } from "./render.js";
import type { Instance } from "./schema.js";
import { Explorer } from "./state.js";

const DEBOUNCE_MS = 200;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = ""
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

function debounce(fn: () => void, ms: number): () => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return () => {
    clearTimeout(timer);
    timer = setTimeout(fn, ms);
  };
}

async function boot(root: HTMLElement): Promise<void> {
  const client = new HttpClient();
  const tableHost = el("div", { id: "table-host" });
  const explorer = new Explorer(client, (html) => {
    tableHost.innerHTML = html;
  });
  try {
    await explorer.init();
  } catch (err) {
    root.innerHTML = renderError(
      `cannot reach the model service: ${err instanceof Error ? err.message : err}`
    );
    return;
  }
  const meta = explorer.model;

  root.appendChild(el("h1", {}, `${meta.dataset} explorer`));

  // explainer type selector
  const typeSelect = el("select", { id: "xai-type" });
  for (const t of meta.xai_types) typeSelect.appendChild(el("option", { value: t }, t));
  typeSelect.addEventListener("change", () => void explorer.setXaiType(typeSelect.value));
  const controls = el("div", { class: "controls" });
  controls.appendChild(el("label", {}, "explanation type "));
  controls.appendChild(typeSelect);
  root.appendChild(controls);

  // value and factor inputs
  const valueInputs: HTMLInputElement[] = [];
  const form = el("div", { class: "inputs" });
  const readValues = () => valueInputs.map((inp) => Number(inp.value));
  const pushValues = debounce(() => void explorer.setValues(readValues()), DEBOUNCE_MS);
  for (const f of meta.features) {
    const row = el("div", { class: "input-row" });
    row.appendChild(el("label", {}, `${f.name} (${f.unit}) `));
    const value = el("input", { type: "number", step: "any", class: "value-input" });
    value.addEventListener("input", pushValues);
    valueInputs.push(value);
    row.appendChild(value);

    const factor = el("input", {
      type: "number",
      step: "any",
      class: "factor-input",
      placeholder: "factor override",
    });
    factor.addEventListener(
      "input",
      debounce(() => {
        const raw = factor.value.trim();
        void explorer.setFactorOverride(f.name, raw === "" ? null : Number(raw));
      }, DEBOUNCE_MS)
    );
    row.appendChild(factor);
    form.appendChild(row);
  }
  root.appendChild(form);

  const resetBtn = el("button", {}, "clear overrides");
  resetBtn.addEventListener("click", () => {
    for (const inp of root.querySelectorAll<HTMLInputElement>(".factor-input")) inp.value = "";
    void explorer.clearOverrides();
  });
  root.appendChild(resetBtn);

  // instance picker
  const pickerHost = el("div", { id: "picker-host" });
  const filterSelect = el("select", { id: "subspace-filter" });
  for (const s of ["", "typical", "outlier", "balanced"]) {
    filterSelect.appendChild(el("option", { value: s }, s === "" ? "all" : s));
  }
  let shown: Instance[] = [];
  const loadInstances = async () => {
    try {
      const resp = await client.instances(filterSelect.value, 20);
      shown = resp.instances;
      pickerHost.innerHTML = renderInstances(shown);
    } catch (err) {
      pickerHost.innerHTML = renderError(
        `cannot load instances: ${err instanceof Error ? err.message : err}`
      );
    }
  };
  filterSelect.addEventListener("change", () => void loadInstances());
  pickerHost.addEventListener("click", (ev) => {
    const item = (ev.target as HTMLElement).closest<HTMLElement>(".instance");
    if (!item) return;
    const inst = shown[Number(item.dataset.index)];
    if (!inst) return;
    inst.values.forEach((v, i) => {
      const inp = valueInputs[i];
      if (inp) inp.value = String(v);
    });
    void explorer.setValues(inst.values);
  });
  root.appendChild(el("h2", {}, "instances"));
  root.appendChild(filterSelect);
  root.appendChild(pickerHost);
  root.appendChild(el("h2", {}, "explanation"));
  root.appendChild(tableHost);
  await loadInstances();
  if (shown.length > 0 && shown[0]) {
    shown[0].values.forEach((v, i) => {
      const inp = valueInputs[i];
      if (inp) inp.value = String(v);
    });
    await explorer.setValues(shown[0].values);
  }
}

const rootEl = document.getElementById("app");
if (rootEl) void boot(rootEl);
