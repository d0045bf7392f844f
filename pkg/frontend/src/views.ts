// DOM rendering. Views are plain functions from state to elements; all
// data flows in from the store and every mutation goes back through it.

import { ApiRequestError } from "./api.js";
import { ClassificationForm, flattenAiTypes } from "./classification.js";
import { segmentText } from "./highlight.js";
import { Store } from "./store.js";
import type {
  Candidate,
  FunnelStats,
  OntologyNode,
  PaperDetail,
  PaperSummary,
  SolutionTable,
  TermHitSpan,
} from "./types.js";
import { EXCLUSION_REASONS } from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

const FUNNEL_ROWS: [keyof FunnelStats, string][] = [
  ["total", "total papers"],
  ["with_st_term", "with ST term"],
  ["with_exactly_one_st_term", "exactly one term"],
  ["with_variation", "with variation"],
  ["with_exactly_one_variation", "exactly one variation"],
  ["candidates", "candidates"],
  ["ai_candidates", "AI-candidates"],
  ["included", "included"],
];

export function renderFunnelWidget(store: Store): HTMLElement {
  const box = el("div", { class: "funnel card" }, el("h2", {}, "Screening funnel"));
  if (!store.funnel) {
    box.append(el("p", { class: "muted" }, "loading…"));
    return box;
  }
  const table = el("table");
  for (const [key, label] of FUNNEL_ROWS) {
    table.append(
      el(
        "tr",
        {},
        el("td", {}, label),
        el("td", { class: "num", "data-stat": key }, String(store.funnel.stats[key])),
      ),
    );
  }
  box.append(table);
  box.append(
    el(
      "p",
      { class: "muted" },
      `ontology ${store.funnel.ontology_version}`,
      store.funnel.pending_adjudications > 0
        ? ` · ${store.funnel.pending_adjudications} accepted term(s) pending ontology rebuild`
        : "",
    ),
  );
  return box;
}

function hitBadge(hit: TermHitSpan): HTMLElement {
  const short = hit.concept.split("#").pop() ?? hit.concept;
  return el("span", { class: `badge ${hit.category.toLowerCase()}`, title: hit.concept },
    `${short} (${hit.category})`);
}

export function renderHighlighted(
  text: string,
  hits: TermHitSpan[],
  field: "TITLE" | "ABSTRACT",
): HTMLElement {
  const host = el("span");
  for (const segment of segmentText(text, hits, field)) {
    if (segment.hits.length === 0) {
      host.append(segment.text);
    } else {
      const mark = el("mark", {
        title: segment.hits.map((h) => `${h.concept} [${h.category}]`).join("\n"),
      });
      mark.textContent = segment.text;
      host.append(mark);
    }
  }
  return host;
}

export function renderQueueItem(
  paper: PaperSummary,
  onOpen: (id: string) => void,
): HTMLElement {
  const row = el(
    "div",
    { class: "queue-item card", "data-paper": paper.id },
    el("h3", {}, `${paper.id} — ${paper.title}`),
    el(
      "p",
      { class: "muted" },
      [paper.venue, paper.year].filter(Boolean).join(", ") || "no venue",
      ` · stages: ${paper.stages.join(", ") || "none"}`,
    ),
  );
  if (paper.decision) {
    row.append(
      el(
        "p",
        { class: `decision ${paper.decision.verdict.toLowerCase()}` },
        `${paper.decision.verdict} (${paper.decision.reason})`,
      ),
    );
  }
  const open = el("button", {}, "review");
  open.addEventListener("click", () => onOpen(paper.id));
  row.append(open);
  return row;
}

export function renderPaperDetail(
  paper: PaperDetail,
  store: Store,
  onDone: () => void,
): HTMLElement {
  const view = el("div", { class: "paper-detail card" });
  view.append(el("h2", {}, paper.id));
  view.append(el("h3", {}, renderHighlighted(paper.title, [...paper.st_hits, ...paper.ai_hits], "TITLE")));
  if (paper.abstract) {
    view.append(
      el("p", {}, renderHighlighted(paper.abstract, [...paper.st_hits, ...paper.ai_hits], "ABSTRACT")),
    );
  }
  const hits = el("p", { class: "hits" });
  for (const hit of [...paper.st_hits, ...paper.ai_hits]) hits.append(hitBadge(hit), " ");
  view.append(hits);

  if (paper.decision) {
    view.append(
      el("p", { class: "decision" },
        `decided: ${paper.decision.verdict} (${paper.decision.reason}) — submitting again overwrites`),
    );
  }

  const reasonSelect = el("select");
  for (const reason of EXCLUSION_REASONS) {
    reasonSelect.append(el("option", { value: reason }, reason));
  }
  const noteInput = el("input", { type: "text", placeholder: "note (needed for OTHER)" });
  const includeButton = el("button", { class: "include" }, "INCLUDE");
  const excludeButton = el("button", { class: "exclude" }, "EXCLUDE");
  const submit = async (verdict: "INCLUDE" | "EXCLUDE") => {
    if (
      paper.decision &&
      !window.confirm(
        `${paper.id} is already decided (${paper.decision.verdict}). Overwrite with ${verdict}?`,
      )
    ) {
      return;
    }
    try {
      await store.submitDecision(
        paper.id,
        verdict,
        verdict === "EXCLUDE" ? reasonSelect.value : undefined,
        noteInput.value || undefined,
      );
      store.setError(null);
      onDone();
    } catch (error) {
      store.setError(describeError(error));
    }
  };
  includeButton.addEventListener("click", () => void submit("INCLUDE"));
  excludeButton.addEventListener("click", () => void submit("EXCLUDE"));
  view.append(
    el("div", { class: "decision-controls" },
      includeButton, excludeButton, reasonSelect, noteInput),
  );
  return view;
}

export function renderCandidates(
  store: Store,
  targetOptions: { iri: string; label: string }[],
): HTMLElement {
  const view = el("div", { class: "candidates" }, el("h2", {}, "Term candidates"));
  if (store.candidates.length === 0) {
    view.append(el("p", { class: "muted" }, "no candidates above the discovery threshold"));
    return view;
  }
  for (const candidate of store.candidates) {
    view.append(renderCandidateRow(candidate, store, targetOptions));
  }
  return view;
}

function renderCandidateRow(
  candidate: Candidate,
  store: Store,
  targetOptions: { iri: string; label: string }[],
): HTMLElement {
  const row = el("div", { class: "candidate card", "data-candidate": candidate.surface_form });
  const title = el("h3", {}, `"${candidate.surface_form}"`);
  if (candidate.adjudicated === "reject") title.classList.add("struck");
  row.append(title);
  row.append(
    el("p", { class: "muted" },
      `${candidate.kind} · in ${candidate.frequency} papers` +
      (candidate.nearest_concept
        ? ` · nearest ${candidate.nearest_concept.split("#").pop()}` +
          (candidate.similarity !== null ? ` (${candidate.similarity.toFixed(2)})` : "")
        : "") +
      ` · e.g. ${candidate.example_paper_ids.slice(0, 4).join(", ")}`),
  );
  if (candidate.pending_rebuild) {
    row.append(el("p", { class: "pending" }, "accepted — pending ontology rebuild (run screen)"));
    return row;
  }
  if (candidate.adjudicated) {
    row.append(el("p", { class: "muted" }, `adjudicated: ${candidate.adjudicated}`));
    return row;
  }

  const conceptPicker = el("select");
  conceptPicker.append(el("option", { value: "" }, "— pick a concept —"));
  for (const target of targetOptions) {
    conceptPicker.append(el("option", { value: target.iri }, target.label));
  }
  const acceptNew = el("button", {}, "accept as new term (parent ↑)");
  const acceptSynonym = el("button", {}, "accept as synonym (anchor ↑)");
  const reject = el("button", { class: "exclude" }, "reject");
  const act = async (action: "accept_new" | "accept_synonym" | "reject") => {
    if (action !== "reject" && !conceptPicker.value) {
      store.setError("pick a parent/anchor concept first");
      return;
    }
    try {
      await store.submitAdjudication(candidate, action, {
        parent: action === "accept_new" ? conceptPicker.value : undefined,
        anchor: action === "accept_synonym" ? conceptPicker.value : undefined,
      });
      store.setError(null);
    } catch (error) {
      store.setError(describeError(error));
    }
  };
  acceptNew.addEventListener("click", () => void act("accept_new"));
  acceptSynonym.addEventListener("click", () => void act("accept_synonym"));
  reject.addEventListener("click", () => void act("reject"));
  row.append(el("div", { class: "adjudicate-controls" }, conceptPicker, acceptNew, acceptSynonym, reject));
  return row;
}

export function renderClassificationForm(
  form: ClassificationForm,
  paperId: string,
  store: Store,
  onSubmitted: () => void,
): HTMLElement {
  const view = el("div", { class: "classify card" }, el("h2", {}, `Classify ${paperId}`));
  const submitButton = el("button", { class: "include" }, "submit classification");

  const sync = () => {
    submitButton.toggleAttribute("disabled", !form.canSubmit());
    submitButton.title = form.canSubmit()
      ? ""
      : `missing: ${form.missingDimensions().join(", ")}`;
  };

  const checkboxGroup = (
    heading: string,
    options: { iri: string; label: string; depth?: number }[],
    toggle: (iri: string) => void,
    group: string,
  ) => {
    const box = el("fieldset", { class: group }, el("legend", {}, heading));
    for (const option of options) {
      const input = el("input", { type: "checkbox", value: option.iri });
      input.addEventListener("change", () => {
        toggle(option.iri);
        sync();
      });
      const label = el("label", { style: `margin-left:${(option.depth ?? 0) * 14}px` });
      label.append(input, ` ${option.label}`);
      box.append(label);
    }
    return box;
  };

  view.append(
    checkboxGroup(
      "Solution purpose",
      form.dimensions.purposes.map((p) => ({ iri: p.iri, label: p.name })),
      (iri) => form.togglePurpose(iri),
      "purposes",
    ),
  );
  view.append(
    checkboxGroup(
      "ST target (punned hierarchy)",
      form.dimensions.targets.map((t) => ({ iri: t.iri, label: t.label })),
      (iri) => form.toggleTarget(iri),
      "targets",
    ),
  );
  view.append(
    checkboxGroup(
      "AI type",
      flattenAiTypes(form.dimensions.ai_types).map((a) => ({
        iri: a.iri,
        label: a.name.replace(/_/g, " "),
        depth: a.depth,
      })),
      (iri) => form.toggleAiType(iri),
      "ai-types",
    ),
  );

  const levels = el("fieldset", { class: "levels" }, el("legend", {}, "Automation level"));
  for (const level of form.dimensions.levels) {
    const input = el("input", { type: "radio", name: "level", value: String(level.ordinal) });
    input.addEventListener("change", () => {
      form.setLevel(level.ordinal);
      sync();
    });
    const label = el("label", {});
    label.append(input, ` ${level.ordinal} — ${level.name.replace(/_/g, " ")}`);
    levels.append(label);
  }
  view.append(levels);

  const topics = el("input", { type: "text", placeholder: "research topics (comma separated)" });
  topics.addEventListener("input", () => form.setTopics(topics.value));
  view.append(el("fieldset", {}, el("legend", {}, "Research topics"), topics));

  submitButton.addEventListener("click", () => {
    void (async () => {
      try {
        await store.api.classify(paperId, form.payload());
        store.setError(null);
        onSubmitted();
      } catch (error) {
        store.setError(describeError(error));
      }
    })();
  });
  view.append(submitButton);
  sync();
  return view;
}

export function renderOntologyTree(roots: OntologyNode[]): HTMLElement {
  const render = (node: OntologyNode): HTMLElement => {
    const item = el("li", {}, el("span", { title: node.iri }, node.label));
    if (node.synonyms.length > 0) {
      item.append(el("span", { class: "muted" }, ` (${node.synonyms.join(", ")})`));
    }
    if (node.children.length > 0) {
      const list = el("ul");
      for (const child of node.children) list.append(render(child));
      item.append(list);
    }
    return item;
  };
  const list = el("ul", { class: "tree" });
  for (const root of roots) list.append(render(root));
  return list;
}

export function renderSolutionTable(table: SolutionTable): HTMLElement {
  const out = el("table", { class: "solutions" });
  const head = el("tr");
  for (const column of table.columns) head.append(el("th", {}, `?${column}`));
  out.append(head);
  for (const row of table.rows) {
    const tr = el("tr");
    for (const cell of row) tr.append(el("td", {}, cell.value));
    out.append(tr);
  }
  if (table.rows.length === 0) {
    out.append(el("tr", {}, el("td", { class: "muted" }, "no rows")));
  }
  return out;
}

export function describeError(error: unknown): string {
  if (error instanceof ApiRequestError) {
    return `${error.status} ${error.code}: ${error.message}`;
  }
  return error instanceof Error ? error.message : String(error);
}
