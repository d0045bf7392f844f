// Entry point: tab navigation between the review queue, candidates,
// ontology browser and query console, with the funnel widget always live.

import { Api } from "./api.js";
import { ClassificationForm } from "./classification.js";
import { Store } from "./store.js";
import {
  describeError,
  el,
  renderCandidates,
  renderClassificationForm,
  renderFunnelWidget,
  renderOntologyTree,
  renderPaperDetail,
  renderQueueItem,
  renderSolutionTable,
} from "./views.js";

const STAGES = ["ai-candidate", "candidate", "st-related", "variation-related",
  "included", "excluded", "undecided", "all"];

type Tab = "queue" | "candidates" | "ontology" | "query";

class App {
  private readonly store = new Store(new Api(""));
  private tab: Tab = "queue";
  private openPaper: string | null = null;
  private classifying: string | null = null;

  constructor(private readonly root: HTMLElement) {
    this.store.subscribe(() => this.render());
  }

  async start(): Promise<void> {
    this.render();
    try {
      await this.store.refreshFunnel();
      await this.store.loadDimensions();
      await this.store.loadQueue();
    } catch (error) {
      this.store.setError(describeError(error));
    }
  }

  private switchTab(tab: Tab): void {
    this.tab = tab;
    this.openPaper = null;
    this.classifying = null;
    void (async () => {
      try {
        if (tab === "candidates") await this.store.loadCandidates();
        if (tab === "queue") await this.store.loadQueue();
        this.render();
      } catch (error) {
        this.store.setError(describeError(error));
      }
    })();
  }

  private render(): void {
    this.root.replaceChildren();
    const tabs = el("nav", {});
    for (const tab of ["queue", "candidates", "ontology", "query"] as Tab[]) {
      const button = el("button", { class: tab === this.tab ? "active" : "" }, tab);
      button.addEventListener("click", () => this.switchTab(tab));
      tabs.append(button);
    }
    this.root.append(el("header", {}, el("h1", {}, "taxoscope review"), tabs));

    if (this.store.error) {
      const banner = el("div", { class: "error" }, this.store.error, " ");
      const retry = el("button", {}, "dismiss");
      retry.addEventListener("click", () => this.store.setError(null));
      banner.append(retry);
      this.root.append(banner);
    }

    const main = el("main", {});
    main.append(renderFunnelWidget(this.store));
    const content = el("section", { class: "content" });
    if (this.tab === "queue") this.renderQueue(content);
    if (this.tab === "candidates") {
      content.append(renderCandidates(this.store, this.store.dimensions?.targets ?? []));
    }
    if (this.tab === "ontology") this.renderOntology(content);
    if (this.tab === "query") this.renderQuery(content);
    main.append(content);
    this.root.append(main);
  }

  private renderQueue(content: HTMLElement): void {
    const picker = el("select");
    for (const stage of STAGES) {
      const option = el("option", { value: stage }, stage);
      if (stage === this.store.stage) option.setAttribute("selected", "");
      picker.append(option);
    }
    picker.addEventListener("change", () => {
      void this.store.loadQueue(picker.value, 1).catch((e) =>
        this.store.setError(describeError(e)));
    });
    content.append(el("div", { class: "stage-picker" }, "stage: ", picker));

    if (this.openPaper && this.classifying) {
      const dimensions = this.store.dimensions;
      if (dimensions) {
        content.append(
          renderClassificationForm(new ClassificationForm(dimensions), this.classifying,
            this.store, () => {
              this.classifying = null;
              this.render();
            }),
        );
      }
      return;
    }

    if (this.openPaper) {
      void this.store.api.paper(this.openPaper).then(
        (paper) => {
          const detail = renderPaperDetail(paper, this.store, () => {
            this.openPaper = null;
          });
          if (paper.decision?.verdict === "INCLUDE" || paper.stages.includes("included")) {
            const classify = el("button", {}, "classify this paper");
            classify.addEventListener("click", () => {
              this.classifying = paper.id;
              this.render();
            });
            detail.append(classify);
          }
          const back = el("button", {}, "back to queue");
          back.addEventListener("click", () => {
            this.openPaper = null;
            this.render();
          });
          detail.append(back);
          content.replaceChildren(detail);
        },
        (error) => this.store.setError(describeError(error)),
      );
      content.append(el("p", { class: "muted" }, "loading paper…"));
      return;
    }

    const page = this.store.page;
    if (!page) {
      content.append(el("p", { class: "muted" }, "loading queue…"));
      return;
    }
    if (page.items.length === 0) {
      content.append(el("p", { class: "empty" }, `no papers in stage "${page.stage}"`));
      return;
    }
    for (const paper of page.items) {
      content.append(renderQueueItem(paper, (id) => {
        this.openPaper = id;
        this.render();
      }));
    }
    const pager = el("div", { class: "pager" });
    const total_pages = Math.max(1, Math.ceil(page.total / page.page_size));
    const prev = el("button", {}, "prev");
    const next = el("button", {}, "next");
    prev.toggleAttribute("disabled", page.page <= 1);
    next.toggleAttribute("disabled", page.page >= total_pages);
    prev.addEventListener("click", () => void this.store.loadQueue(page.stage, page.page - 1));
    next.addEventListener("click", () => void this.store.loadQueue(page.stage, page.page + 1));
    pager.append(prev, ` page ${page.page}/${total_pages} (${page.total} papers) `, next);
    content.append(pager);
  }

  private renderOntology(content: HTMLElement): void {
    void this.store.api.ontologyTree().then(
      (tree) => content.replaceChildren(
        el("h2", {}, "Punned target hierarchy"), renderOntologyTree(tree.roots)),
      (error) => this.store.setError(describeError(error)),
    );
    content.append(el("p", { class: "muted" }, "loading ontology…"));
  }

  private renderQuery(content: HTMLElement): void {
    const textarea = el("textarea", { rows: "8", spellcheck: "false" });
    textarea.value = [
      "PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>",
      "PREFIX ai4st: <http://purl.org/ai4st/ontology#>",
      "SELECT DISTINCT ?target",
      "WHERE {",
      "  ?paper rdf:type ai4st:ResearchPaper .",
      "  ?paper ai4st:hasTarget ?target .",
      "}",
    ].join("\n");
    const run = el("button", {}, "run query");
    const results = el("div", { class: "query-results" });
    run.addEventListener("click", () => {
      void this.store.api.query(textarea.value).then(
        (table) => results.replaceChildren(renderSolutionTable(table)),
        (error) => results.replaceChildren(el("p", { class: "error" }, describeError(error))),
      );
    });
    content.append(el("h2", {}, "Query console"), textarea, run, results);
  }
}

const rootElement = document.getElementById("app");
if (rootElement) {
  void new App(rootElement).start();
}
