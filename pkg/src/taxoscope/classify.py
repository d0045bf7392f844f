"""Five-dimension classification of included papers and its triple form.

A record holds the research topics (free text), solution purposes, ST
targets (punned term individuals), AI types and exactly one automation
level — the highest the approach achieves. ``emit_triples`` materializes
a record into the knowledge base; ``extract_classification`` reads it
back, so emitted graphs are lossless for the dimension fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Collection, Iterable, Mapping

from .errors import TaxoscopeError
from .ns import AI4ST, PAPERS, STANDARD_PREFIXES
from .ontology import DimensionCatalog
from .rdf import Graph, Iri, Literal, Triple
from .turtle import RDF_TYPE

RESEARCH_PAPER_CLASS = Iri(AI4ST + "ResearchPaper")
HAS_PURPOSE = Iri(AI4ST + "hasPurpose")
HAS_TARGET = Iri(AI4ST + "hasTarget")
HAS_AI_TYPE = Iri(AI4ST + "hasAIType")
HAS_LEVEL = Iri(AI4ST + "hasLevel")
HAS_RESEARCH_TOPIC = Iri(AI4ST + "hasResearchTopic")


class ClassificationError(TaxoscopeError):
    code = "classification-error"


class NotIncludedError(ClassificationError):
    code = "not-included"


class EmptyDimensionError(ClassificationError):
    code = "empty-dimension"

    def __init__(self, dimension: str):
        super().__init__(f"dimension {dimension!r} must not be empty")
        self.dimension = dimension


@dataclass(frozen=True)
class ClassificationRecord:
    paper_id: str
    topics: frozenset  # free-text research topics
    purposes: frozenset
    targets: frozenset
    ai_types: frozenset
    level: int
    reviewer: str = field(default="", compare=False)
    timestamp: str = field(default="", compare=False)


def create_classification(paper_id: str, topics: Iterable[str], purposes: Iterable,
                          targets: Iterable, ai_types: Iterable, level,
                          catalog: DimensionCatalog, included: Collection[str],
                          reviewer: str = "", timestamp: str = "") -> ClassificationRecord:
    """Validate dimension values against the catalog and build a record.

    ``included`` is the set of paper ids with an INCLUDE decision — only
    those may be classified. Values may be IRIs or resolvable names
    ("deep learning", "AI-assisted_selections", 3, ...).
    """
    if paper_id not in included:
        raise NotIncludedError(f"paper {paper_id} has no INCLUDE decision")
    purposes = frozenset(catalog.resolve_purpose(p) for p in purposes)
    targets = frozenset(catalog.resolve_target(t) for t in targets)
    ai_types = frozenset(catalog.resolve_ai_type(a) for a in ai_types)
    if not purposes:
        raise EmptyDimensionError("purpose")
    if not targets:
        raise EmptyDimensionError("target")
    if not ai_types:
        raise EmptyDimensionError("ai-type")
    level = catalog.resolve_level(level)
    topics = frozenset(t.strip() for t in topics if t and t.strip())
    return ClassificationRecord(paper_id, topics, purposes, targets, ai_types,
                                level, reviewer, timestamp)


def paper_iri(paper_id: str, namespace: str = PAPERS) -> Iri:
    from urllib.parse import quote

    return Iri(namespace + quote(paper_id, safe=""))


def emit_triples(record: ClassificationRecord, catalog: DimensionCatalog,
                 papers_namespace: str = PAPERS) -> Graph:
    """One type triple plus one triple per dimension value; exactly one
    hasLevel. Deterministic by graph construction."""
    subject = paper_iri(record.paper_id, papers_namespace)
    triples = [Triple(subject, RDF_TYPE, RESEARCH_PAPER_CLASS),
               Triple(subject, HAS_LEVEL, catalog.level_iri(record.level))]
    for purpose in record.purposes:
        triples.append(Triple(subject, HAS_PURPOSE, purpose))
    for target in record.targets:
        triples.append(Triple(subject, HAS_TARGET, target))
    for ai_type in record.ai_types:
        triples.append(Triple(subject, HAS_AI_TYPE, ai_type))
    for topic in record.topics:
        triples.append(Triple(subject, HAS_RESEARCH_TOPIC, Literal(topic)))
    prefixes = dict(STANDARD_PREFIXES)
    prefixes["paper"] = papers_namespace
    return Graph(triples, prefixes)


def extract_classification(graph: Graph, paper_id: str, catalog: DimensionCatalog,
                           papers_namespace: str = PAPERS) -> ClassificationRecord:
    """Rebuild a record from its emitted triples (dimension fields only;
    reviewer and timestamp do not participate in record equality)."""
    subject = paper_iri(paper_id, papers_namespace)
    if Triple(subject, RDF_TYPE, RESEARCH_PAPER_CLASS) not in graph:
        raise ClassificationError(f"{paper_id} is not typed as a research paper in this graph")
    levels = [o for o in graph.objects(subject, HAS_LEVEL) if isinstance(o, Iri)]
    if len(levels) != 1:
        raise ClassificationError(f"{paper_id} carries {len(levels)} hasLevel triples, expected 1")
    return ClassificationRecord(
        paper_id=paper_id,
        topics=frozenset(o.lexical for o in graph.objects(subject, HAS_RESEARCH_TOPIC)
                         if isinstance(o, Literal)),
        purposes=frozenset(o for o in graph.objects(subject, HAS_PURPOSE) if isinstance(o, Iri)),
        targets=frozenset(o for o in graph.objects(subject, HAS_TARGET) if isinstance(o, Iri)),
        ai_types=frozenset(o for o in graph.objects(subject, HAS_AI_TYPE) if isinstance(o, Iri)),
        level=catalog.level_ordinal(levels[0]),
    )


# --- coverage -----------------------------------------------------------------


@dataclass(frozen=True)
class CoverageStats:
    classified_paper_count: int
    distinct_targets: int
    target_fraction: Fraction
    purpose_histogram: Mapping[Iri, int]
    level_histogram: Mapping[int, int]
    ai_type_histogram: Mapping[Iri, int]

    def __post_init__(self):
        if not (0 <= self.target_fraction <= 1):
            raise ClassificationError(f"target fraction out of range: {self.target_fraction}")


def effective_records(records: Iterable[ClassificationRecord]) -> list:
    """Latest record per paper (supersede-by-timestamp, then log order)."""
    latest: dict = {}
    for i, record in enumerate(records):
        old = latest.get(record.paper_id)
        if old is None or (record.timestamp, i) >= (old[0].timestamp, old[1]):
            latest[record.paper_id] = (record, i)
    return [latest[pid][0] for pid in sorted(latest)]


def coverage(records: Iterable[ClassificationRecord], catalog: DimensionCatalog) -> CoverageStats:
    """Distinct-target union, its fraction of the punned term count, and
    per-dimension histograms (zero entries included so reports can flag
    unused values)."""
    records = effective_records(records)
    purposes = {p: 0 for p in catalog.purposes}
    levels = {i: 0 for i in range(1, 6)}
    ai_types = {a: 0 for a in sorted(catalog.ai_types, key=lambda i: i.value)}
    target_union = set()
    for record in records:
        target_union.update(record.targets)
        for p in record.purposes:
            purposes[p] = purposes.get(p, 0) + 1
        levels[record.level] = levels.get(record.level, 0) + 1
        for a in record.ai_types:
            ai_types[a] = ai_types.get(a, 0) + 1
    n_targets = len(catalog.targets)
    fraction = Fraction(len(target_union), n_targets) if n_targets else Fraction(0)
    return CoverageStats(len(records), len(target_union), fraction,
                         purposes, levels, ai_types)


# --- persistence ----------------------------------------------------------------


def classification_to_json(record: ClassificationRecord) -> dict:
    return {"paper_id": record.paper_id,
            "topics": sorted(record.topics),
            "purposes": sorted(p.value for p in record.purposes),
            "targets": sorted(t.value for t in record.targets),
            "ai_types": sorted(a.value for a in record.ai_types),
            "level": record.level,
            "reviewer": record.reviewer,
            "timestamp": record.timestamp}


def classification_from_json(obj: Mapping) -> ClassificationRecord:
    return ClassificationRecord(
        paper_id=obj["paper_id"],
        topics=frozenset(obj.get("topics", ())),
        purposes=frozenset(Iri(p) for p in obj["purposes"]),
        targets=frozenset(Iri(t) for t in obj["targets"]),
        ai_types=frozenset(Iri(a) for a in obj["ai_types"]),
        level=int(obj["level"]),
        reviewer=obj.get("reviewer", ""),
        timestamp=obj.get("timestamp", ""),
    )
