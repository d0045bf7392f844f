"""Project state: config, file layout, append-only logs and replay.

Both the CLI and the HTTP service drive a Session; every mutation appends
to a log (decisions.jsonl / adjudications.jsonl / classifications.jsonl)
and the in-memory state is always re-derivable by replaying those logs
over the screen snapshot. Accepted term adjudications take effect on the
*next* screen run — the snapshot records how much of the adjudication log
it has seen, so all numbers stay attributable to one ontology version.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from . import classify as cl
from . import corpus as cp
from . import screening as sc
from .conceptmap import derive_concept_map
from .errors import TaxoscopeError
from .ns import AI4ST, PAPERS
from .ontology import DimensionCatalog, extend_taxonomy, load_taxonomy, pun
from .rdf import Graph, Iri
from .reports import export_annex, render_coverage_report, render_funnel_report
from .sparql import SolutionTable, evaluate, parse_query
from .turtle import parse_turtle, serialize_turtle


class ProjectError(TaxoscopeError):
    code = "project-error"


# --- flat key/value config ---------------------------------------------------

_SECTION_RE = re.compile(r"^\[([A-Za-z0-9_\-]+)\]$")
_KEY_RE = re.compile(r"^([A-Za-z0-9_\-]+)\s*=\s*(.+)$")


def parse_flat_config(text: str) -> dict:
    """Minimal section/key=value reader for taxoscope.toml.

    Values: quoted strings, integers, floats, true/false. Nothing nested.
    """
    out: dict = {}
    section = ""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1)
            out.setdefault(section, {})
            continue
        m = _KEY_RE.match(line)
        if not m:
            raise ProjectError(f"config line {line_no}: cannot parse {raw!r}")
        key, value = m.group(1), m.group(2).strip()
        if "#" in value and not value.startswith('"'):
            value = value.split("#", 1)[0].strip()
        if value.startswith('"') and value.endswith('"') and len(value) >= 2:
            parsed = value[1:-1]
        elif value in ("true", "false"):
            parsed = value == "true"
        else:
            try:
                parsed = int(value)
            except ValueError:
                try:
                    parsed = float(value)
                except ValueError:
                    parsed = value
        out.setdefault(section, {})[key] = parsed
    return out


@dataclass
class ProjectConfig:
    reviewer: str = "reviewer"
    port: int = 8714
    st_ontology: str = "ontologies/stc.ttl"
    ai_ontology: str = "ontologies/ai_types.ttl"
    ai4st_namespace: str = AI4ST
    papers_namespace: str = PAPERS
    min_papers: int = 3
    synonym_threshold: Fraction = Fraction(1, 2)
    new_term_threshold: Fraction = Fraction(1, 4)

    @classmethod
    def load(cls, root: Path) -> "ProjectConfig":
        config = cls()
        path = root / "taxoscope.toml"
        if not path.exists():
            return config
        data = parse_flat_config(path.read_text(encoding="utf-8"))
        project = data.get("project", {})
        config.reviewer = str(project.get("reviewer", config.reviewer))
        server = data.get("server", {})
        config.port = int(server.get("port", config.port))
        onto = data.get("ontology", {})
        config.st_ontology = str(onto.get("st", config.st_ontology))
        config.ai_ontology = str(onto.get("ai", config.ai_ontology))
        config.ai4st_namespace = str(onto.get("ai4st_namespace", config.ai4st_namespace))
        config.papers_namespace = str(onto.get("papers_namespace", config.papers_namespace))
        disc = data.get("discovery", {})
        config.min_papers = int(disc.get("min_papers", config.min_papers))
        if "synonym_threshold" in disc:
            config.synonym_threshold = Fraction(str(disc["synonym_threshold"])).limit_denominator(1000)
        if "new_term_threshold" in disc:
            config.new_term_threshold = Fraction(str(disc["new_term_threshold"])).limit_denominator(1000)
        return config


def _read_jsonl(path: Path) -> list:
    if not path.exists():
        return []
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out


def _append_jsonl(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")


class Session:
    """One open project. Mutations go through the append-only logs; any
    state is reproducible by replaying them. Not thread-safe by itself —
    the HTTP service serializes mutations behind a lock."""

    def __init__(self, root, config: Optional[ProjectConfig] = None):
        self.root = Path(root)
        self.config = config or ProjectConfig.load(self.root)

    # --- paths ---

    @property
    def corpus_path(self) -> Path:
        return self.root / "corpus.jsonl"

    @property
    def screen_path(self) -> Path:
        return self.root / "screen.json"

    @property
    def decisions_path(self) -> Path:
        return self.root / "decisions.jsonl"

    @property
    def adjudications_path(self) -> Path:
        return self.root / "adjudications.jsonl"

    @property
    def classifications_path(self) -> Path:
        return self.root / "classifications.jsonl"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    def now(self) -> str:
        fixed = os.environ.get("TAXOSCOPE_NOW")
        if fixed:
            return fixed
        return datetime.now(timezone.utc).isoformat(timespec="seconds")

    # --- corpus ---

    def corpus(self) -> cp.Corpus:
        return cp.load_jsonl(self.corpus_path)

    def ingest(self, paths, format: str, column_map: Optional[dict] = None) -> cp.Corpus:
        records = list(self.corpus().records.values())
        for path in paths:
            text = Path(path).read_text(encoding="utf-8")
            if format == "bibtex":
                records.extend(cp.import_bibtex(text))
            elif format == "csv":
                mapping = column_map
                if mapping is None:
                    # bind whichever standard columns the header offers
                    import csv as _csv
                    import io as _io
                    header = next(_csv.reader(_io.StringIO(text)), []) or []
                    mapping = {name: name for name in
                               ("id", "title", "abstract", "year", "venue", "doi", "url")
                               if name in header}
                    if "title" not in mapping:
                        raise cp.MissingColumnError("title")
                records.extend(cp.import_csv(text, mapping))
            elif format == "jsonl":
                records.extend(cp.load_jsonl(path).records.values())
            else:
                raise ProjectError(f"unknown ingest format: {format!r}")
        merged = cp.dedup(records)
        cp.save_jsonl(merged, self.corpus_path)
        return merged

    # --- ontology state ---

    def adjudication_log(self) -> List[sc.AdjudicationRecord]:
        return [sc.adjudication_from_json(obj) for obj in _read_jsonl(self.adjudications_path)]

    def base_taxonomies(self, st_path: Optional[str] = None,
                        ai_path: Optional[str] = None) -> tuple:
        st_file = self.root / (st_path or self.config.st_ontology)
        ai_file = self.root / (ai_path or self.config.ai_ontology)
        for f in (st_file, ai_file):
            if not f.exists():
                raise ProjectError(f"ontology file not found: {f}")
        st = load_taxonomy(parse_turtle(st_file.read_text(encoding="utf-8")))
        ai = load_taxonomy(parse_turtle(ai_file.read_text(encoding="utf-8")))
        return st, ai

    def effective_taxonomies(self, upto: Optional[int] = None,
                             st_path: Optional[str] = None,
                             ai_path: Optional[str] = None) -> tuple:
        """Base ontologies plus the accepted adjudications (first ``upto``
        log entries; None = all)."""
        st, ai = self.base_taxonomies(st_path, ai_path)
        log = self.adjudication_log()
        if upto is not None:
            log = log[:upto]
        for record in log:
            if record.accepted:
                st = extend_taxonomy(st, record)
        return st, ai

    # --- screening ---

    def screen(self, st_path: Optional[str] = None, ai_path: Optional[str] = None) -> sc.FunnelState:
        """(Re)run the prescreen over the whole corpus and snapshot it."""
        n_seen = len(_read_jsonl(self.adjudications_path))
        st_tax, ai_tax = self.effective_taxonomies(upto=n_seen, st_path=st_path, ai_path=ai_path)
        st_map = derive_concept_map(st_tax)
        ai_map = derive_concept_map(ai_tax)
        state = sc.run_prescreen(self.corpus(), st_map, ai_map)
        snapshot = sc.state_to_json(state)
        snapshot["st_ontology"] = st_path or self.config.st_ontology
        snapshot["ai_ontology"] = ai_path or self.config.ai_ontology
        snapshot["n_adjudications_applied"] = n_seen
        self.screen_path.write_text(
            json.dumps(snapshot, sort_keys=True, ensure_ascii=False, indent=1) + "\n",
            encoding="utf-8")
        return self.state()

    def _snapshot(self) -> dict:
        if not self.screen_path.exists():
            raise ProjectError("no screen snapshot yet; run `taxoscope screen` first")
        return json.loads(self.screen_path.read_text(encoding="utf-8"))

    def state(self) -> sc.FunnelState:
        """Screen snapshot with the decision log replayed on top."""
        state = sc.state_from_json(self._snapshot())
        for obj in _read_jsonl(self.decisions_path):
            paper_id, decision, override = sc.decision_from_json(obj)
            # stage rules were enforced when the decision was logged; a
            # replay over a newer screen snapshot must not refuse them
            state = sc.record_decision(state, paper_id, decision, override,
                                       validate_stage=False)
        return state

    def snapshot_taxonomies(self) -> tuple:
        snap = self._snapshot()
        return self.effective_taxonomies(upto=snap.get("n_adjudications_applied", 0),
                                         st_path=snap.get("st_ontology"),
                                         ai_path=snap.get("ai_ontology"))

    def decide(self, paper_id: str, verdict: str, reason: Optional[str] = None,
               note: Optional[str] = None, override: bool = False) -> sc.FunnelState:
        verdict_enum = sc.Verdict(verdict.upper())
        if verdict_enum is sc.Verdict.INCLUDE:
            reason_enum = sc.DecisionReason.PEER_REVIEWED_ORIGINAL
        else:
            if not reason:
                raise ProjectError("EXCLUDE needs a reason")
            reason_enum = sc.DecisionReason(reason.upper())
        decision = sc.Decision(verdict_enum, reason_enum, self.config.reviewer,
                               self.now(), note)
        state = sc.record_decision(self.state(), paper_id, decision, override)
        _append_jsonl(self.decisions_path, sc.decision_to_json(paper_id, decision, override))
        return state

    # --- discovery / adjudication ---

    def discovery_config(self, min_papers: Optional[int] = None) -> sc.DiscoveryConfig:
        return sc.DiscoveryConfig(
            min_papers=min_papers if min_papers is not None else self.config.min_papers,
            synonym_threshold=self.config.synonym_threshold,
            new_term_threshold=self.config.new_term_threshold)

    def discover(self, min_papers: Optional[int] = None) -> List[sc.TermCandidate]:
        st_tax, _ = self.snapshot_taxonomies()
        return sc.discover_candidates(self.state(), self.corpus(), st_tax,
                                      self.discovery_config(min_papers))

    def adjudicate(self, candidate: sc.TermCandidate, action: str,
                   parent: Optional[Iri] = None, anchor: Optional[Iri] = None,
                   source: Optional[str] = None) -> sc.AdjudicationRecord:
        st_tax, _ = self.effective_taxonomies()
        record = sc.adjudicate_candidate(candidate, action, self.config.reviewer, st_tax,
                                         parent=parent, anchor=anchor, source=source,
                                         timestamp=self.now())
        _append_jsonl(self.adjudications_path, sc.adjudication_to_json(record))
        return record

    def pending_adjudications(self) -> List[sc.AdjudicationRecord]:
        """Accepted adjudications the current screen snapshot has not seen."""
        try:
            n_applied = self._snapshot().get("n_adjudications_applied", 0)
        except ProjectError:
            n_applied = 0
        return [r for r in self.adjudication_log()[n_applied:] if r.accepted]

    # --- classification ---

    def catalog(self) -> DimensionCatalog:
        st_tax, _ = self.snapshot_taxonomies()
        return DimensionCatalog.default(st_tax, namespace=self.config.ai4st_namespace)

    def included_ids(self) -> frozenset:
        state = self.state()
        return frozenset(pid for pid, screen in state.papers.items() if sc.is_included(screen))

    def classification_log(self) -> List[cl.ClassificationRecord]:
        return [cl.classification_from_json(obj) for obj in _read_jsonl(self.classifications_path)]

    def classifications(self) -> List[cl.ClassificationRecord]:
        return cl.effective_records(self.classification_log())

    def classify(self, paper_id: str, topics, purposes, targets, ai_types, level) -> cl.ClassificationRecord:
        record = cl.create_classification(paper_id, topics, purposes, targets, ai_types,
                                          level, self.catalog(), self.included_ids(),
                                          reviewer=self.config.reviewer, timestamp=self.now())
        _append_jsonl(self.classifications_path, cl.classification_to_json(record))
        return record

    # --- knowledge base / query ---

    def knowledge_base(self) -> Graph:
        try:
            st_tax, _ = self.snapshot_taxonomies()
        except ProjectError:
            st_tax, _ = self.effective_taxonomies()
        graph = pun(st_tax)
        catalog = DimensionCatalog.default(st_tax, namespace=self.config.ai4st_namespace)
        for record in self.classifications():
            graph = graph.union(cl.emit_triples(record, catalog, self.config.papers_namespace))
        prefixes = graph.prefixes
        prefixes["paper"] = self.config.papers_namespace
        return graph.with_prefixes(prefixes)

    def query(self, text: str) -> SolutionTable:
        return evaluate(self.knowledge_base(), parse_query(text))

    def export_kb(self, path) -> None:
        Path(path).write_text(serialize_turtle(self.knowledge_base()), encoding="utf-8")

    # --- reports ---

    def funnel_report(self):
        state = self.state()
        return render_funnel_report(sc.funnel_counts(state),
                                    ontology_version=state.ontology_version,
                                    generated_at=self.now(), state=state)

    def coverage_report(self):
        stats = cl.coverage(self.classifications(), self.catalog())
        version = self._snapshot().get("ontology_version", "")
        return render_coverage_report(stats, ontology_version=version,
                                      generated_at=self.now())

    def annex(self) -> dict:
        return export_annex(self.state(), self.classifications(), self.corpus(),
                            self.adjudication_log(), self.reports_dir)
