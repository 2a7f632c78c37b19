/**
 * HTTP client for the explanation service, with schema validation and
 * latest-wins cancellation of in-flight explain requests.
 */
import {
  ExplainRequest,
  ExplanationTable,
  ExplanationTableSchema,
  InstancesResponse,
  InstancesResponseSchema,
  ModelMeta,
  ModelMetaSchema,
} from "./schema.js";

export interface ApiClient {
  model(): Promise<ModelMeta>;
  explain(req: ExplainRequest): Promise<ExplanationTable>;
  instances(subspace: string, count: number): Promise<InstancesResponse>;
}

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

async function parseResponse<T>(resp: Response, schema: { parse(v: unknown): T }): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(detail, resp.status);
  }
  return schema.parse(await resp.json());
}

export class HttpClient implements ApiClient {
  private inFlight: AbortController | null = null;

  constructor(private readonly baseUrl: string = "") {}

  async model(): Promise<ModelMeta> {
    const resp = await fetch(`${this.baseUrl}/api/model`);
    return parseResponse(resp, ModelMetaSchema);
  }

  async explain(req: ExplainRequest): Promise<ExplanationTable> {
    // only the newest edit matters; abort any request still running
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    const resp = await fetch(`${this.baseUrl}/api/explain`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
      signal: controller.signal,
    });
    if (this.inFlight === controller) this.inFlight = null;
    return parseResponse(resp, ExplanationTableSchema);
  }

  async instances(subspace: string, count: number): Promise<InstancesResponse> {
    const params = new URLSearchParams({ subspace, count: String(count) });
    const resp = await fetch(`${this.baseUrl}/api/instances?${params}`);
    return parseResponse(resp, InstancesResponseSchema);
  }
}
