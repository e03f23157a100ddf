/** Typed client for the curation service.
 *
 * Every request the UI makes goes through this module, so the set of
 * endpoints touched is exactly the documented one. The fetch function is
 * injectable for tests.
 */

export interface EntitySummary {
  entity_id: string;
  display_name: string;
  sample_count: number;
  reference_set: boolean;
}

export interface FaceRow {
  face_id: string;
  crop_url: string;
  similarity_to_current_target: number;
}

export interface FilterReport {
  entity_id: string;
  strategy: string;
  threshold: number;
  kept: string[];
  removed: string[];
}

export interface FilterMetrics {
  precision: number;
  recall: number;
  f1: number;
  degenerate: boolean;
}

export interface PreviewResponse {
  report: FilterReport;
  metrics: FilterMetrics | null;
}

export interface GraphNode {
  id: string;
  label: string;
  weight: number;
}

export interface GraphEdge {
  source: string;
  target: string;
  weight: number;
}

export interface GraphDoc {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export type Strategy = "mean" | "reference";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
  } catch {
    // non-JSON error body; the status line is all we have
  }
  return `request failed with status ${response.status}`;
}

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listEntities(): Promise<EntitySummary[]> {
    return this.request("/api/entities");
  }

  listFaces(entityId: string): Promise<FaceRow[]> {
    return this.request(`/api/entities/${encodeURIComponent(entityId)}/faces`);
  }

  setReference(entityId: string, faceId: string): Promise<unknown> {
    return this.post(`/api/entities/${encodeURIComponent(entityId)}/reference`, {
      face_id: faceId,
    });
  }

  previewFilter(
    entityId: string,
    strategy: Strategy,
    lambda1: number,
  ): Promise<PreviewResponse> {
    return this.post(
      `/api/entities/${encodeURIComponent(entityId)}/filter-preview`,
      { strategy, lambda1 },
    );
  }

  fetchGraph(): Promise<GraphDoc> {
    return this.request("/api/graph");
  }
}
