// Form model for the five-dimension classification. Options come from
// GET /api/dimensions and nothing else is selectable; submission stays
// blocked until every mandatory dimension is non-empty and a level is
// chosen. Kept free of DOM so the gating rules are unit-testable.

import type { AiTypeNode, Dimensions } from "./types.js";

export function flattenAiTypes(nodes: AiTypeNode[]): { iri: string; name: string; depth: number }[] {
  const out: { iri: string; name: string; depth: number }[] = [];
  const walk = (node: AiTypeNode, depth: number) => {
    out.push({ iri: node.iri, name: node.name, depth });
    for (const child of node.children) walk(child, depth + 1);
  };
  for (const node of nodes) walk(node, 0);
  return out;
}

export class ClassificationForm {
  readonly purposes = new Set<string>();
  readonly targets = new Set<string>();
  readonly aiTypes = new Set<string>();
  level: number | null = null;
  topics: string[] = [];

  private readonly purposeOptions: Set<string>;
  private readonly targetOptions: Set<string>;
  private readonly aiTypeOptions: Set<string>;
  private readonly levelOptions: Set<number>;

  constructor(readonly dimensions: Dimensions) {
    this.purposeOptions = new Set(dimensions.purposes.map((p) => p.iri));
    this.targetOptions = new Set(dimensions.targets.map((t) => t.iri));
    this.aiTypeOptions = new Set(flattenAiTypes(dimensions.ai_types).map((a) => a.iri));
    this.levelOptions = new Set(dimensions.levels.map((l) => l.ordinal));
  }

  togglePurpose(iri: string): void {
    this.toggle(this.purposes, this.purposeOptions, iri, "purpose");
  }

  toggleTarget(iri: string): void {
    this.toggle(this.targets, this.targetOptions, iri, "target");
  }

  toggleAiType(iri: string): void {
    this.toggle(this.aiTypes, this.aiTypeOptions, iri, "ai type");
  }

  setLevel(ordinal: number): void {
    if (!this.levelOptions.has(ordinal)) {
      throw new Error(`level ${ordinal} is not a catalog value`);
    }
    this.level = ordinal;
  }

  setTopics(raw: string): void {
    this.topics = raw
      .split(/[;,\n]/)
      .map((t) => t.trim())
      .filter((t) => t.length > 0);
  }

  private toggle(selected: Set<string>, options: Set<string>, iri: string, what: string): void {
    if (!options.has(iri)) {
      throw new Error(`${iri} is not a catalog ${what}`);
    }
    if (selected.has(iri)) {
      selected.delete(iri);
    } else {
      selected.add(iri);
    }
  }

  /** Mandatory dimensions: purposes, targets, AI types, level. Topics are
   * free text and optional. */
  canSubmit(): boolean {
    return (
      this.purposes.size > 0 &&
      this.targets.size > 0 &&
      this.aiTypes.size > 0 &&
      this.level !== null
    );
  }

  missingDimensions(): string[] {
    const missing: string[] = [];
    if (this.purposes.size === 0) missing.push("purpose");
    if (this.targets.size === 0) missing.push("target");
    if (this.aiTypes.size === 0) missing.push("ai type");
    if (this.level === null) missing.push("level");
    return missing;
  }

  payload(): {
    purposes: string[];
    targets: string[];
    ai_types: string[];
    level: number;
    topics: string[];
  } {
    if (!this.canSubmit() || this.level === null) {
      throw new Error(`form incomplete: missing ${this.missingDimensions().join(", ")}`);
    }
    return {
      purposes: [...this.purposes].sort(),
      targets: [...this.targets].sort(),
      ai_types: [...this.aiTypes].sort(),
      level: this.level,
      topics: this.topics,
    };
  }
}
