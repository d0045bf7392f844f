// Application state. The store owns every number the widgets display:
// counts always come from the latest /api/funnel response, never from
// client-side arithmetic over stages.

import { Api } from "./api.js";
import type { Candidate, Dimensions, FunnelResponse, PaperPage } from "./types.js";

export type Listener = () => void;

export class Store {
  funnel: FunnelResponse | null = null;
  page: PaperPage | null = null;
  candidates: Candidate[] = [];
  dimensions: Dimensions | null = null;
  stage = "ai-candidate";
  pageNumber = 1;
  error: string | null = null;

  private listeners: Listener[] = [];

  constructor(readonly api: Api) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  async refreshFunnel(): Promise<void> {
    this.funnel = await this.api.funnel();
    this.emit();
  }

  async loadQueue(stage = this.stage, page = this.pageNumber): Promise<void> {
    this.stage = stage;
    this.pageNumber = page;
    this.page = await this.api.papers(stage, page);
    this.emit();
  }

  async loadCandidates(): Promise<void> {
    this.candidates = (await this.api.candidates()).candidates;
    this.emit();
  }

  async loadDimensions(): Promise<void> {
    this.dimensions = await this.api.dimensions();
    this.emit();
  }

  /** Post a decision, then refresh the queue item and the funnel widget
   * from the server (no local counting). */
  async submitDecision(
    paperId: string,
    verdict: "INCLUDE" | "EXCLUDE",
    reason?: string,
    note?: string,
  ): Promise<void> {
    await this.api.decide(paperId, verdict, reason, note);
    await this.refreshFunnel();
    if (this.page) {
      await this.loadQueue();
    }
  }

  async submitAdjudication(
    candidate: Candidate,
    action: "accept_new" | "accept_synonym" | "reject",
    ref?: { parent?: string; anchor?: string },
  ): Promise<void> {
    await this.api.adjudicate(candidate.index, candidate.surface_form, action, ref);
    await this.loadCandidates();
    await this.refreshFunnel();
  }

  setError(message: string | null): void {
    this.error = message;
    this.emit();
  }
}
