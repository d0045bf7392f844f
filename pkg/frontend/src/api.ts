// Thin typed client for the review service. Every mutation goes through
// a documented POST endpoint; the client keeps no state of its own.

import type {
  Candidate,
  Dimensions,
  FunnelResponse,
  OntologyTree,
  PaperDetail,
  PaperPage,
  SolutionTable,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const code = body && typeof body.code === "string" ? body.code : "error";
      const message =
        body && typeof body.message === "string" ? body.message : `HTTP ${response.status}`;
      throw new ApiRequestError(response.status, code, message);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  funnel(): Promise<FunnelResponse> {
    return this.request("/api/funnel");
  }

  papers(stage: string, page = 1, pageSize = 25): Promise<PaperPage> {
    const params = new URLSearchParams({
      stage,
      page: String(page),
      page_size: String(pageSize),
    });
    return this.request(`/api/papers?${params}`);
  }

  paper(id: string): Promise<PaperDetail> {
    return this.request(`/api/papers/${encodeURIComponent(id)}`);
  }

  decide(
    id: string,
    verdict: "INCLUDE" | "EXCLUDE",
    reason?: string,
    note?: string,
    override?: boolean,
  ): Promise<{ paper_id: string; stages: string[] }> {
    const payload: Record<string, unknown> = { verdict };
    if (reason) payload.reason = reason;
    if (note) payload.note = note;
    if (override) payload.override = true;
    return this.post(`/api/papers/${encodeURIComponent(id)}/decision`, payload);
  }

  candidates(): Promise<{ candidates: Candidate[] }> {
    return this.request("/api/candidates");
  }

  adjudicate(
    index: number,
    surfaceForm: string,
    action: "accept_new" | "accept_synonym" | "reject",
    ref?: { parent?: string; anchor?: string },
  ): Promise<{ surface_form: string; action: string; pending_rebuild: boolean }> {
    return this.post(`/api/candidates/${index}/adjudicate`, {
      action,
      surface_form: surfaceForm,
      ...ref,
    });
  }

  dimensions(): Promise<Dimensions> {
    return this.request("/api/dimensions");
  }

  ontologyTree(): Promise<OntologyTree> {
    return this.request("/api/ontology/tree");
  }

  classify(
    id: string,
    payload: {
      purposes: string[];
      targets: string[];
      ai_types: string[];
      level: number;
      topics: string[];
    },
  ): Promise<unknown> {
    return this.post(`/api/papers/${encodeURIComponent(id)}/classification`, payload);
  }

  query(text: string): Promise<SolutionTable> {
    return this.post("/api/query", { query: text });
  }
}
