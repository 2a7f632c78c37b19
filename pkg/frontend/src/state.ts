/**
 * View state for the explorer: selected explainer type, entered instance
 * values, factor overrides, and the last table response.
 *
 * Every state change triggers one explain round trip; responses are applied
 * latest-wins so a stale reply never overwrites a newer one. The DOM layer
 * subscribes via the onRender callback and receives ready-made HTML.
 */
import type { ApiClient } from "./client.js";
import type { ExplanationTable, ModelMeta } from "./schema.js";
import { renderError, renderTable } from "./render.js";

export class Explorer {
  private meta: ModelMeta | null = null;
  private xaiType = "global";
  private values: number[] = [];
  private overrides = new Map<string, number>();
  private generation = 0;
  lastTable: ExplanationTable | null = null;
  lastError: string | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly onRender: (html: string) => void
  ) {}

  async init(): Promise<void> {
    this.meta = await this.client.model();
    this.xaiType = this.meta.xai_types[0] ?? "global";
  }

  get model(): ModelMeta {
    if (this.meta === null) throw new Error("explorer not initialized");
    return this.meta;
  }

  get currentXaiType(): string {
    return this.xaiType;
  }

  get currentValues(): number[] {
    return [...this.values];
  }

  get whatIf(): boolean {
    return this.overrides.size > 0;
  }

  setXaiType(xaiType: string): Promise<void> {
    this.xaiType = xaiType; // entered values survive the switch
    return this.refresh();
  }

  setValues(values: number[]): Promise<void> {
    if (values.some((v) => !Number.isFinite(v))) {
      this.fail("values must be numeric");
      return Promise.resolve();
    }
    this.values = [...values];
    return this.refresh();
  }

  setFactorOverride(attribute: string, factor: number | null): Promise<void> {
    if (factor === null) {
      this.overrides.delete(attribute);
    } else if (!Number.isFinite(factor)) {
      this.fail("factor must be numeric");
      return Promise.resolve();
    } else {
      this.overrides.set(attribute, factor);
    }
    return this.refresh();
  }

  clearOverrides(): Promise<void> {
    this.overrides.clear();
    return this.refresh();
  }

  async refresh(): Promise<void> {
    if (this.values.length === 0) return;
    const gen = ++this.generation;
    const req = {
      xai_type: this.xaiType,
      values: this.values,
      ...(this.overrides.size > 0
        ? { factor_overrides: Object.fromEntries(this.overrides) }
        : {}),
    };
    try {
      const table = await this.client.explain(req);
      if (gen !== this.generation) return; // a newer edit superseded this one
      this.lastTable = table;
      this.lastError = null;
      this.onRender(renderTable(table));
    } catch (err) {
      if (gen !== this.generation) return;
      this.fail(err instanceof Error ? err.message : String(err));
    }
  }

  private fail(message: string): void {
    this.lastError = message;
    this.onRender(renderError(message));
  }
}
