"""The screening funnel: prescreen matching, stage arithmetic, human
decisions with inclusion/exclusion reasons, and new-term / synonym
candidate discovery.

Stage definitions (a paper may sit in several):

* ST-related        — at least one EXACT or SYNONYM term hit
* variation-related — at least one VARIATION hit
* candidate         — two or more distinct concepts across all categories
* AI-candidate      — candidate with at least one AI-map hit
* included          — an INCLUDE decision recorded

States are immutable values; decisions are replayed from an append-only
log, so any state is re-derivable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, List, Mapping, Optional, Tuple

from .conceptmap import (Category, ConceptMap, DEFAULT_RULES, TermHit, TextField,
                         derive_concept_map, match_text, normalize)
from .corpus import Corpus
from .errors import TaxoscopeError
from .ontology import Taxonomy, UnknownAnchorError
from .rdf import Iri


class ScreeningError(TaxoscopeError):
    code = "screening-error"


class UnknownPaperError(ScreeningError):
    code = "unknown-paper"

    def __init__(self, paper_id: str):
        super().__init__(f"unknown paper: {paper_id}")
        self.paper_id = paper_id


class StageViolationError(ScreeningError):
    code = "stage-violation"


class StaleMapError(ScreeningError):
    code = "stale-map"


# --- decisions ---------------------------------------------------------------


class Verdict(Enum):
    INCLUDE = "INCLUDE"
    EXCLUDE = "EXCLUDE"


class DecisionReason(Enum):
    PEER_REVIEWED_ORIGINAL = "PEER_REVIEWED_ORIGINAL"
    META_RESEARCH = "META_RESEARCH"
    SYSTEM_UNDER_TEST_NOT_METHOD = "SYSTEM_UNDER_TEST_NOT_METHOD"
    ST_FOR_AI = "ST_FOR_AI"
    POSTER_OR_TUTORIAL = "POSTER_OR_TUTORIAL"
    NOT_AVAILABLE = "NOT_AVAILABLE"
    NOT_PEER_REVIEWED = "NOT_PEER_REVIEWED"
    OTHER = "OTHER"


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    reason: DecisionReason
    reviewer: str
    timestamp: str
    note: Optional[str] = None

    def __post_init__(self):
        if self.verdict is Verdict.INCLUDE and self.reason is not DecisionReason.PEER_REVIEWED_ORIGINAL:
            raise ScreeningError("INCLUDE decisions carry reason PEER_REVIEWED_ORIGINAL")
        if self.verdict is Verdict.EXCLUDE and self.reason is DecisionReason.PEER_REVIEWED_ORIGINAL:
            raise ScreeningError("EXCLUDE decisions need an exclusion reason")
        if self.reason is DecisionReason.OTHER and not self.note:
            raise ScreeningError("reason OTHER needs a note")


@dataclass(frozen=True)
class PaperScreen:
    st_hits: frozenset = frozenset()
    ai_hits: frozenset = frozenset()
    decision: Optional[Decision] = None


@dataclass(frozen=True)
class FunnelState:
    papers: Mapping[str, PaperScreen]
    ontology_version: str = ""
    map_version: str = ""
    audit: tuple = ()  # ((paper_id, Decision), ...) in recording order


# --- stage arithmetic ---------------------------------------------------------


def st_concepts(screen: PaperScreen) -> frozenset:
    return frozenset(h.concept for h in screen.st_hits)


def exact_or_synonym_concepts(screen: PaperScreen) -> frozenset:
    return frozenset(h.concept for h in screen.st_hits
                     if h.category in (Category.EXACT, Category.SYNONYM))


def variation_concepts(screen: PaperScreen) -> frozenset:
    return frozenset(h.concept for h in screen.st_hits if h.category is Category.VARIATION)


def is_st_related(screen: PaperScreen) -> bool:
    return bool(exact_or_synonym_concepts(screen))


def is_variation_related(screen: PaperScreen) -> bool:
    return bool(variation_concepts(screen))


def is_candidate(screen: PaperScreen) -> bool:
    return len(st_concepts(screen)) >= 2


def is_ai_candidate(screen: PaperScreen) -> bool:
    return is_candidate(screen) and bool(screen.ai_hits)


def is_included(screen: PaperScreen) -> bool:
    return screen.decision is not None and screen.decision.verdict is Verdict.INCLUDE


def stages_of(screen: PaperScreen) -> tuple:
    out = []
    if is_st_related(screen):
        out.append("st-related")
    if is_variation_related(screen):
        out.append("variation-related")
    if is_candidate(screen):
        out.append("candidate")
    if is_ai_candidate(screen):
        out.append("ai-candidate")
    if is_included(screen):
        out.append("included")
    if screen.decision is not None and screen.decision.verdict is Verdict.EXCLUDE:
        out.append("excluded")
    return tuple(out)


@dataclass(frozen=True)
class FunnelStats:
    total: int
    with_st_term: int
    with_exactly_one_st_term: int
    with_variation: int
    with_exactly_one_variation: int
    candidates: int
    ai_candidates: int
    included: int

    def __post_init__(self):
        checks = (
            0 <= self.included <= self.ai_candidates <= self.candidates <= self.total,
            self.with_st_term <= self.total,
            self.with_variation <= self.total,
            self.with_exactly_one_st_term <= self.with_st_term,
            self.with_exactly_one_variation <= self.with_variation,
        )
        if not all(checks):
            raise ScreeningError(f"funnel stats violate the stage ordering: {self}")


def run_prescreen(corpus: Corpus, st_map: ConceptMap, ai_map: ConceptMap,
                  expected_version: Optional[str] = None) -> FunnelState:
    """Match every paper against both maps and compute stage memberships.

    Pure in (corpus, maps); papers are processed in sorted id order so
    repeated runs are identical. ``expected_version`` guards against maps
    derived from a different ontology state than the caller believes
    current.
    """
    version = f"{st_map.ontology_version}+{ai_map.ontology_version}"
    if expected_version is not None and version != expected_version:
        raise StaleMapError(
            f"maps carry ontology version {version!r} but {expected_version!r} is current; "
            "re-derive the concept maps")
    papers = {}
    for paper_id in sorted(corpus.records):
        record = corpus.records[paper_id]
        papers[paper_id] = PaperScreen(
            st_hits=match_text(st_map, record.title, record.abstract),
            ai_hits=match_text(ai_map, record.title, record.abstract),
        )
    return FunnelState(papers, ontology_version=version, map_version=version)


def funnel_counts(state: FunnelState) -> FunnelStats:
    screens = list(state.papers.values())
    return FunnelStats(
        total=len(screens),
        with_st_term=sum(1 for s in screens if is_st_related(s)),
        with_exactly_one_st_term=sum(1 for s in screens if len(exact_or_synonym_concepts(s)) == 1),
        with_variation=sum(1 for s in screens if is_variation_related(s)),
        with_exactly_one_variation=sum(1 for s in screens if len(variation_concepts(s)) == 1),
        candidates=sum(1 for s in screens if is_candidate(s)),
        ai_candidates=sum(1 for s in screens if is_ai_candidate(s)),
        included=sum(1 for s in screens if is_included(s)),
    )


def single_term_breakdown(state: FunnelState) -> dict:
    """Both readings of the "referred to only one term / variation"
    counts: unrestricted (exactly one concept in the category) and
    restricted (exactly one concept in the category and none in the
    other)."""
    screens = list(state.papers.values())
    return {
        "one_term": sum(1 for s in screens if len(exact_or_synonym_concepts(s)) == 1),
        "one_term_only": sum(1 for s in screens
                             if len(exact_or_synonym_concepts(s)) == 1
                             and not variation_concepts(s)),
        "one_variation": sum(1 for s in screens if len(variation_concepts(s)) == 1),
        "one_variation_only": sum(1 for s in screens
                                  if len(variation_concepts(s)) == 1
                                  and not exact_or_synonym_concepts(s)),
    }


def record_decision(state: FunnelState, paper_id: str, decision: Decision,
                    override: bool = False, validate_stage: bool = True) -> FunnelState:
    """Record (or overwrite) a human decision.

    Decisions belong on AI-candidates; ``override`` admits plain
    candidates. INCLUDE always requires the AI-candidate stage so the
    funnel ordering included <= AI-candidates can never break.
    ``validate_stage=False`` is for log replay, where the decision was
    already validated against the state it was recorded on.
    """
    screen = state.papers.get(paper_id)
    if screen is None:
        raise UnknownPaperError(paper_id)
    if validate_stage:
        if decision.verdict is Verdict.INCLUDE:
            if not is_ai_candidate(screen):
                raise StageViolationError(
                    f"{paper_id} is not an AI-candidate; INCLUDE not applicable")
        elif not is_ai_candidate(screen):
            if not (override and is_candidate(screen)):
                raise StageViolationError(
                    f"{paper_id} is not in the AI-candidate stage"
                    + ("" if is_candidate(screen) else " nor the candidate stage")
                    + ("; pass override to decide a plain candidate" if is_candidate(screen) else ""))
    papers = dict(state.papers)
    papers[paper_id] = replace(screen, decision=decision)
    return FunnelState(papers, state.ontology_version, state.map_version,
                       state.audit + ((paper_id, decision),))


# --- candidate discovery -------------------------------------------------------


class CandidateKind(Enum):
    NEW_TERM = "NEW_TERM"
    SYNONYM = "SYNONYM"
    EITHER = "EITHER"


@dataclass(frozen=True)
class TermCandidate:
    surface_form: str
    kind: CandidateKind
    frequency: int
    nearest_concept: Optional[Iri]
    similarity: Optional[Fraction]
    example_paper_ids: tuple


# candidate phrases never start or end on these; keeps "testing and" or
# "the flaky test" out of the review queue while "flaky test" stays in
DEFAULT_EDGE_STOPWORDS = frozenset(
    "a an the and or of for with in on to by as at from into over under "
    "we our their its is are this that these those each using toward".split())


@dataclass(frozen=True)
class DiscoveryConfig:
    min_papers: int = 3
    synonym_threshold: Fraction = Fraction(1, 2)
    new_term_threshold: Fraction = Fraction(1, 4)
    ngram_min: int = 2
    ngram_max: int = 4
    rules: tuple = DEFAULT_RULES
    edge_stopwords: frozenset = DEFAULT_EDGE_STOPWORDS


def token_overlap(a: Iterable[str], b: Iterable[str]) -> Fraction:
    """|shared tokens| / |union tokens| on token sets."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return Fraction(0)
    return Fraction(len(sa & sb), len(union))


def discover_candidates(state: FunnelState, corpus: Corpus, taxonomy: Taxonomy,
                        config: DiscoveryConfig = DiscoveryConfig()) -> List[TermCandidate]:
    """Mine the ST-related papers for term candidates.

    Normalized n-grams (2..4 by default) qualify when they contain the
    token ``test``/``testing`` or touch a known hit span, are not already
    map forms, and occur in at least ``min_papers`` distinct papers. Each
    candidate is scored by token overlap against the preferred labels;
    the score decides SYNONYM / NEW_TERM / EITHER.
    """
    cmap = derive_concept_map(taxonomy, config.rules)
    map_forms = {e.form for e in cmap.entries}
    papers_per_gram: dict = {}
    for paper_id in sorted(state.papers):
        screen = state.papers[paper_id]
        if not is_st_related(screen):
            continue
        record = corpus.records.get(paper_id)
        if record is None:
            raise UnknownPaperError(paper_id)
        for text_field, text in ((TextField.TITLE, record.title),
                                 (TextField.ABSTRACT, record.abstract or "")):
            tokens = normalize(text)
            spans = [(h.start, h.end) for h in (screen.st_hits | screen.ai_hits)
                     if h.field is text_field]
            for n in range(config.ngram_min, config.ngram_max + 1):
                for i in range(len(tokens) - n + 1):
                    gram = tokens[i:i + n]
                    if gram in map_forms:
                        continue
                    if gram[0] in config.edge_stopwords or gram[-1] in config.edge_stopwords:
                        continue
                    if ("test" not in gram and "testing" not in gram
                            and not any(end == i or start == i + n for start, end in spans)):
                        continue
                    papers_per_gram.setdefault(gram, set()).add(paper_id)

    label_tokens = [(iri, frozenset(normalize(taxonomy.concepts[iri].preferred_label)))
                    for iri in sorted(taxonomy.concepts, key=lambda i: i.value)]
    out = []
    for gram in sorted(papers_per_gram):
        papers = papers_per_gram[gram]
        if len(papers) < config.min_papers:
            continue
        nearest: Optional[Iri] = None
        best = Fraction(0)
        for iri, toks in label_tokens:
            sim = token_overlap(gram, toks)
            if sim > best:
                best, nearest = sim, iri
        if nearest is None:
            kind = CandidateKind.NEW_TERM
            similarity = None
        else:
            similarity = best
            if best >= config.synonym_threshold:
                kind = CandidateKind.SYNONYM
            elif best <= config.new_term_threshold:
                kind = CandidateKind.NEW_TERM
            else:
                kind = CandidateKind.EITHER
        out.append(TermCandidate(" ".join(gram), kind, len(papers), nearest,
                                 similarity, tuple(sorted(papers))))
    out.sort(key=lambda c: (-c.frequency, c.surface_form))
    return out


# --- adjudication ---------------------------------------------------------------


@dataclass(frozen=True)
class AdjudicationRecord:
    surface_form: str
    action: str  # accept_new | accept_synonym | reject
    parent: Optional[Iri] = None
    anchor: Optional[Iri] = None
    source: Optional[str] = None
    reviewer: str = ""
    timestamp: str = ""

    @property
    def accepted(self) -> bool:
        return self.action in ("accept_new", "accept_synonym")


def adjudicate_candidate(candidate: TermCandidate, action: str, reviewer: str,
                         taxonomy: Taxonomy, *, parent: Optional[Iri] = None,
                         anchor: Optional[Iri] = None, source: Optional[str] = None,
                         timestamp: str = "") -> AdjudicationRecord:
    """Turn a reviewer verdict on a candidate into a persistable record.

    Accepted records feed ``ontology.extend_taxonomy``, closing the
    SLR-to-ontology loop on the next screen run.
    """
    if action == "accept_new":
        if parent is None:
            raise UnknownAnchorError("accept_new needs a parent concept")
        if parent not in taxonomy.concepts:
            raise UnknownAnchorError(f"unknown parent concept: {parent.value}")
    elif action == "accept_synonym":
        if anchor is None:
            raise UnknownAnchorError("accept_synonym needs an anchor concept")
        if anchor not in taxonomy.concepts:
            raise UnknownAnchorError(f"unknown anchor concept: {anchor.value}")
    elif action != "reject":
        raise ScreeningError(f"unknown adjudication action: {action!r}")
    return AdjudicationRecord(candidate.surface_form, action, parent, anchor,
                              source, reviewer, timestamp)


# --- (de)serialization helpers ---------------------------------------------------


def hit_to_json(hit: TermHit) -> dict:
    return {"concept": hit.concept.value, "category": hit.category.value,
            "matched_form": hit.matched_form, "field": hit.field.value,
            "start": hit.start, "end": hit.end}


def hit_from_json(obj: Mapping) -> TermHit:
    return TermHit(Iri(obj["concept"]), Category(obj["category"]), obj["matched_form"],
                   TextField(obj["field"]), int(obj["start"]), int(obj["end"]))


def decision_to_json(paper_id: str, decision: Decision, override: bool = False) -> dict:
    out = {"paper_id": paper_id, "verdict": decision.verdict.value,
           "reason": decision.reason.value, "reviewer": decision.reviewer,
           "timestamp": decision.timestamp}
    if decision.note:
        out["note"] = decision.note
    if override:
        out["override"] = True
    return out


def decision_from_json(obj: Mapping) -> Tuple[str, Decision, bool]:
    decision = Decision(Verdict(obj["verdict"]), DecisionReason(obj["reason"]),
                        obj.get("reviewer", ""), obj.get("timestamp", ""),
                        obj.get("note"))
    return obj["paper_id"], decision, bool(obj.get("override"))


def adjudication_to_json(record: AdjudicationRecord) -> dict:
    out = {"surface_form": record.surface_form, "action": record.action,
           "reviewer": record.reviewer, "timestamp": record.timestamp}
    if record.parent:
        out["parent"] = record.parent.value
    if record.anchor:
        out["anchor"] = record.anchor.value
    if record.source:
        out["source"] = record.source
    return out


def adjudication_from_json(obj: Mapping) -> AdjudicationRecord:
    return AdjudicationRecord(
        obj["surface_form"], obj["action"],
        Iri(obj["parent"]) if obj.get("parent") else None,
        Iri(obj["anchor"]) if obj.get("anchor") else None,
        obj.get("source"), obj.get("reviewer", ""), obj.get("timestamp", ""))


def state_to_json(state: FunnelState) -> dict:
    return {
        "ontology_version": state.ontology_version,
        "map_version": state.map_version,
        "papers": {pid: {"st_hits": [hit_to_json(h) for h in sorted(
                             screen.st_hits, key=lambda h: (h.field.value, h.start, h.end,
                                                            h.concept.value, h.category.value))],
                         "ai_hits": [hit_to_json(h) for h in sorted(
                             screen.ai_hits, key=lambda h: (h.field.value, h.start, h.end,
                                                            h.concept.value, h.category.value))]}
                   for pid, screen in sorted(state.papers.items())},
    }


def state_from_json(obj: Mapping) -> FunnelState:
    papers = {}
    for pid, data in obj.get("papers", {}).items():
        papers[pid] = PaperScreen(
            st_hits=frozenset(hit_from_json(h) for h in data.get("st_hits", ())),
            ai_hits=frozenset(hit_from_json(h) for h in data.get("ai_hits", ())),
        )
    return FunnelState(papers, obj.get("ontology_version", ""), obj.get("map_version", ""))
