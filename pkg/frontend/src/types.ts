// JSON contracts of the taxoscope review service. The UI never invents
// values for any of these shapes; everything selectable comes from the
// API responses.

export interface FunnelStats {
  total: number;
  with_st_term: number;
  with_exactly_one_st_term: number;
  with_variation: number;
  with_exactly_one_variation: number;
  candidates: number;
  ai_candidates: number;
  included: number;
}

export interface FunnelResponse {
  stats: FunnelStats;
  breakdown: Record<string, number>;
  ontology_version: string;
  pending_adjudications: number;
}

export interface Decision {
  verdict: "INCLUDE" | "EXCLUDE";
  reason: string;
  reviewer: string;
  timestamp: string;
  note?: string;
}

export interface TermHitSpan {
  concept: string;
  category: "EXACT" | "SYNONYM" | "VARIATION";
  matched_form: string;
  field: "TITLE" | "ABSTRACT";
  start: number;
  end: number;
  char_start?: number;
  char_end?: number;
}

export interface PaperSummary {
  id: string;
  title: string;
  year: number | null;
  venue: string | null;
  stages: string[];
  decision: Decision | null;
  n_st_concepts: number;
  n_ai_hits: number;
}

export interface PaperDetail extends PaperSummary {
  abstract: string | null;
  doi: string | null;
  url: string | null;
  st_hits: TermHitSpan[];
  ai_hits: TermHitSpan[];
}

export interface PaperPage {
  stage: string;
  total: number;
  page: number;
  page_size: number;
  items: PaperSummary[];
}

export interface Candidate {
  index: number;
  surface_form: string;
  kind: "NEW_TERM" | "SYNONYM" | "EITHER";
  frequency: number;
  nearest_concept: string | null;
  similarity: number | null;
  example_paper_ids: string[];
  adjudicated: string | null;
  pending_rebuild: boolean;
}

export interface DimensionValue {
  iri: string;
  name: string;
}

export interface LevelValue extends DimensionValue {
  ordinal: number;
}

export interface AiTypeNode {
  iri: string;
  name: string;
  children: AiTypeNode[];
}

export interface TargetValue {
  iri: string;
  label: string;
}

export interface Dimensions {
  purposes: DimensionValue[];
  levels: LevelValue[];
  ai_types: AiTypeNode[];
  targets: TargetValue[];
}

export interface OntologyNode {
  iri: string;
  label: string;
  synonyms: string[];
  source: string;
  children: OntologyNode[];
}

export interface OntologyTree {
  roots: OntologyNode[];
}

export interface SolutionTable {
  columns: string[];
  rows: { type: "iri" | "literal"; value: string }[][];
}

export interface ApiError {
  code: string;
  message: string;
}

export const EXCLUSION_REASONS = [
  "META_RESEARCH",
  "SYSTEM_UNDER_TEST_NOT_METHOD",
  "ST_FOR_AI",
  "POSTER_OR_TUTORIAL",
  "NOT_AVAILABLE",
  "NOT_PEER_REVIEWED",
  "OTHER",
] as const;

export type ExclusionReason = (typeof EXCLUSION_REASONS)[number];
