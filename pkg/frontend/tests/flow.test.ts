// Live-API flow tests: a real service over the fixture project backs
// every call here. Covers the two review flows end to end — decisions
// moving the funnel widget and the classification form being fed by the
// dimension catalog.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Api, ApiRequestError } from "../src/api.js";
import { ClassificationForm, flattenAiTypes } from "../src/classification.js";
import { Store } from "../src/store.js";
import { startServer, type LiveServer } from "./helpers.js";

let server: LiveServer;
let api: Api;

beforeAll(async () => {
  server = await startServer();
  api = new Api(server.baseUrl);
});

afterAll(async () => {
  await server.stop();
});

describe("decision flow", () => {
  it("INCLUDE on a fixture AI-candidate increments the funnel widget count by exactly 1", async () => {
    const store = new Store(api);
    await store.refreshFunnel();
    await store.loadQueue("ai-candidate", 1);
    const before = store.funnel!.stats.included;

    const target = store.page!.items.find((p) => p.decision === null);
    expect(target).toBeDefined();
    await store.submitDecision(target!.id, "INCLUDE");

    // the widget renders store.funnel verbatim, refreshed from the API
    expect(store.funnel!.stats.included).toBe(before + 1);
    const fresh = await api.funnel();
    expect(fresh.stats.included).toBe(before + 1);
    const item = store.page!.items.find((p) => p.id === target!.id);
    expect(item?.decision?.verdict).toBe("INCLUDE");
  });

  it("stage violations surface as 409 without changing the funnel", async () => {
    const store = new Store(api);
    await store.refreshFunnel();
    const before = store.funnel!.stats;
    // P11 has no hits at all, so no decision is allowed
    await expect(api.decide("P11", "INCLUDE")).rejects.toMatchObject({
      status: 409,
      code: "stage-violation",
    });
    await store.refreshFunnel();
    expect(store.funnel!.stats).toEqual(before);
  });

  it("EXCLUDE marks the item and leaves included unchanged", async () => {
    const store = new Store(api);
    await store.refreshFunnel();
    await store.loadQueue("ai-candidate", 1);
    const before = store.funnel!.stats.included;
    const target = store.page!.items.find((p) => p.decision === null);
    expect(target).toBeDefined();
    await store.submitDecision(target!.id, "EXCLUDE", "POSTER_OR_TUTORIAL");
    expect(store.funnel!.stats.included).toBe(before);
    const item = store.page!.items.find((p) => p.id === target!.id);
    expect(item?.decision?.verdict).toBe("EXCLUDE");
  });
});

describe("classification form against the live catalog", () => {
  it("offers exactly the catalog values: 3 purposes, 5 levels, the AI-type tree, the punned targets", async () => {
    const dimensions = await api.dimensions();
    expect(dimensions.purposes.map((p) => p.name)).toEqual([
      "Understand",
      "Generate",
      "Improve",
    ]);
    expect(dimensions.levels.map((l) => l.ordinal)).toEqual([1, 2, 3, 4, 5]);
    expect(dimensions.levels.map((l) => l.name)).toContain("AI-assisted_options");
    const aiTypes = flattenAiTypes(dimensions.ai_types);
    expect(aiTypes).toHaveLength(10);
    expect(aiTypes.filter((t) => t.depth === 1)).toHaveLength(5); // subsymbolic children
    expect(dimensions.targets).toHaveLength(12);

    const tree = await api.ontologyTree();
    expect(tree.roots).toHaveLength(1);
    const treeIris = new Set<string>();
    const walk = (node: { iri: string; children: { iri: string; children: never[] }[] }) => {
      treeIris.add(node.iri);
      for (const child of node.children) walk(child as never);
    };
    walk(tree.roots[0] as never);
    // the target picker and the punned hierarchy show the same concepts
    expect(new Set(dimensions.targets.map((t) => t.iri))).toEqual(treeIris);
  });

  it("blocks submission until every mandatory dimension is filled, then posts successfully", async () => {
    const dimensions = await api.dimensions();
    const store = new Store(api);
    await store.loadQueue("included", 1);
    const paper = store.page!.items[0];
    expect(paper).toBeDefined();

    const form = new ClassificationForm(dimensions);
    expect(form.canSubmit()).toBe(false);
    expect(() => form.payload()).toThrow();

    form.togglePurpose(dimensions.purposes[0]!.iri);
    form.toggleTarget(dimensions.targets[0]!.iri);
    expect(form.canSubmit()).toBe(false);
    form.toggleAiType(flattenAiTypes(dimensions.ai_types).find((t) => t.depth === 1)!.iri);
    expect(form.canSubmit()).toBe(false);
    form.setLevel(3);
    expect(form.canSubmit()).toBe(true);

    form.setTopics("testing and debugging");
    await api.classify(paper!.id, form.payload());

    const table = await api.query(
      "PREFIX ai4st: <http://purl.org/ai4st/ontology#>\n" +
        "SELECT ?p WHERE { ?p ai4st:hasLevel ai4st:AI-assisted_selections . }",
    );
    expect(table.rows.some((row) => row[0]!.value.endsWith(encodeURIComponent(paper!.id)))).toBe(
      true,
    );
  });

  it("server-side validation agrees: imaginary values are 422", async () => {
    const store = new Store(api);
    await store.loadQueue("included", 1);
    const paper = store.page!.items[0]!;
    await expect(
      api.classify(paper.id, {
        purposes: ["http://purl.org/ai4st/ontology#Understand"],
        targets: ["http://purl.org/stc/ontology#Not_a_term"],
        ai_types: ["http://purl.org/ai4st/ontology#Deep_learning"],
        level: 3,
        topics: [],
      }),
    ).rejects.toMatchObject({ status: 422, code: "unknown-dimension-value" });
  });
});

describe("candidate adjudication flow", () => {
  it("accepting a synonym flags it pending until the next screen run", async () => {
    const store = new Store(api);
    await store.loadCandidates();
    const flaky = store.candidates.find((c) => c.surface_form === "flaky test");
    expect(flaky).toBeDefined();
    expect(flaky!.pending_rebuild).toBe(false);

    await store.submitAdjudication(flaky!, "accept_synonym", {
      anchor: flaky!.nearest_concept!,
    });
    const updated = store.candidates.find((c) => c.surface_form === "flaky test");
    expect(updated!.pending_rebuild).toBe(true);
    expect(store.funnel!.pending_adjudications).toBe(1);
  });
});

describe("error surfaces", () => {
  it("unknown paper is a 404 ApiRequestError", async () => {
    await expect(api.paper("GHOST")).rejects.toBeInstanceOf(ApiRequestError);
    await expect(api.paper("GHOST")).rejects.toMatchObject({ status: 404 });
  });

  it("query syntax errors are 400 with a message", async () => {
    await expect(api.query("SELECT nothing")).rejects.toMatchObject({ status: 400 });
  });
});
