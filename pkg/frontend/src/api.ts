/** Typed client for the /v1 query service. */

export interface CountResult {
  count: number;
  per_shard: number[];
  latency_ms: number;
}

export interface DocumentHit {
  doc_id: number;
  shard_id: number;
  match_offset: number;
  doc_text: string;
  metadata: Record<string, string>;
}

export interface SearchResult {
  count: number;
  docs: DocumentHit[];
  latency_ms: number;
}

export interface IndexInfo {
  name: string;
  shard_count: number;
  doc_count: number;
  total_text_bytes: number;
  total_index_bytes: number;
  ratio: number;
}

/** Non-2xx response, carrying the server's own error message. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function reject(response: Response): Promise<never> {
  let message = response.statusText || `HTTP ${response.status}`;
  try {
    const payload = await response.json();
    if (payload && typeof payload.error === "string") message = payload.error;
  } catch {
    // no JSON body; keep the status text
  }
  throw new ApiError(response.status, message);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) await reject(response);
    return response.json() as Promise<T>;
  }

  private async query<T>(body: Record<string, unknown>): Promise<T> {
    const response = await fetch(this.base + "/v1/query", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await reject(response);
    return response.json() as Promise<T>;
  }

  count(index: string, query: string): Promise<CountResult> {
    return this.query({ index, query_type: "count", query });
  }

  search(index: string, query: string, maxDocs: number):
      Promise<SearchResult> {
    return this.query(
      { index, query_type: "search", query, max_docs: maxDocs });
  }

  async indexes(): Promise<IndexInfo[]> {
    const payload =
      await this.get<{ indexes: IndexInfo[] }>("/v1/indexes");
    return payload.indexes;
  }
}
