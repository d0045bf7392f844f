"""Taxonomy view over a graph, class-to-individual punning, and the
classification dimension catalog.

A Taxonomy is the validated shape of an ontology file: one concept per
``owl:Class`` with a preferred label, synonyms, a term source and its
parents from ``rdfs:subClassOf``. Punning reuses each class IRI as an
individual so concepts can serve as classification targets, with the
subclass hierarchy mirrored into a plain object property (``hasParent``)
on the individuals.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

from .errors import TaxoscopeError
from .ns import AI4ST, OWL, RDF, RDFS, STANDARD_PREFIXES, STC
from .rdf import Graph, Iri, Literal, Triple
from .turtle import RDF_TYPE


class TaxonomyError(TaxoscopeError):
    code = "taxonomy-error"


class TaxonomyCycleError(TaxonomyError):
    code = "taxonomy-cycle"

    def __init__(self, iris):
        self.iris = frozenset(iris)
        names = ", ".join(sorted(i.value for i in self.iris))
        super().__init__(f"subclass hierarchy contains a cycle through: {names}")


class DanglingParentError(TaxonomyError):
    code = "dangling-parent"


class MissingLabelError(TaxonomyError):
    code = "missing-label"


class DuplicateLabelError(TaxonomyError):
    code = "duplicate-label"


class UnknownAnchorError(TaxonomyError):
    code = "unknown-anchor"


class UnknownDimensionValueError(TaxoscopeError):
    code = "unknown-dimension-value"

    def __init__(self, dimension: str, value):
        super().__init__(f"unknown {dimension} value: {value!r}")
        self.dimension = dimension
        self.value = value


class TermSource(Enum):
    ISTQB = "ISTQB"
    SEVOCAB = "SEVOCAB"
    PROPRIETARY = "PROPRIETARY"


OWL_CLASS = Iri(OWL + "Class")
OWL_OBJECT_PROPERTY = Iri(OWL + "ObjectProperty")
RDFS_SUBCLASS_OF = Iri(RDFS + "subClassOf")
RDFS_LABEL = Iri(RDFS + "label")
SYNONYM_PROP = Iri(STC + "synonym")
DEFINED_BY_PROP = Iri(STC + "definedBy")

ST_TARGET_CLASS = Iri(AI4ST + "STTarget")
HAS_PARENT = Iri(AI4ST + "hasParent")


@dataclass(frozen=True)
class Concept:
    iri: Iri
    preferred_label: str
    synonyms: frozenset = frozenset()
    source: TermSource = TermSource.PROPRIETARY
    parents: frozenset = frozenset()

    def __post_init__(self):
        if not self.preferred_label:
            raise MissingLabelError(f"concept {self.iri.value} has no preferred label")


@dataclass(frozen=True)
class Taxonomy:
    concepts: Mapping[Iri, Concept]
    roots: frozenset
    object_properties: frozenset = frozenset()

    @classmethod
    def build(cls, concepts: Iterable[Concept], object_properties: Iterable[Iri] = ()) -> "Taxonomy":
        by_iri = {}
        labels = {}
        for c in concepts:
            if c.iri in by_iri:
                raise DuplicateLabelError(f"concept IRI declared twice: {c.iri.value}")
            if c.preferred_label in labels:
                raise DuplicateLabelError(
                    f"label {c.preferred_label!r} used by both {labels[c.preferred_label].value} "
                    f"and {c.iri.value}")
            by_iri[c.iri] = c
            labels[c.preferred_label] = c.iri
        for c in by_iri.values():
            for parent in c.parents:
                if parent not in by_iri:
                    raise DanglingParentError(
                        f"{c.iri.value} names parent {parent.value} which is not a concept")
        _check_acyclic(by_iri)
        roots = frozenset(i for i, c in by_iri.items() if not c.parents)
        return cls(by_iri, roots, frozenset(object_properties))

    def subclass_edges(self) -> frozenset:
        return frozenset((c.iri, p) for c in self.concepts.values() for p in c.parents)

    def children(self, iri: Iri) -> list:
        return sorted((c.iri for c in self.concepts.values() if iri in c.parents),
                      key=lambda i: i.value)

    def by_label(self, label: str) -> Optional[Concept]:
        for c in self.concepts.values():
            if c.preferred_label == label:
                return c
        return None


def _check_acyclic(by_iri: Mapping[Iri, Concept]):
    # iterative DFS with colors; report every node on a detected cycle
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {i: WHITE for i in by_iri}
    for start in sorted(by_iri, key=lambda i: i.value):
        if color[start] != WHITE:
            continue
        stack = [(start, iter(sorted(by_iri[start].parents, key=lambda i: i.value)))]
        color[start] = GRAY
        path = [start]
        while stack:
            node, parents = stack[-1]
            advanced = False
            for parent in parents:
                if color[parent] == GRAY:
                    cycle = path[path.index(parent):]
                    raise TaxonomyCycleError(cycle)
                if color[parent] == WHITE:
                    color[parent] = GRAY
                    path.append(parent)
                    stack.append((parent, iter(sorted(by_iri[parent].parents,
                                                      key=lambda i: i.value))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                path.pop()
                stack.pop()


def load_taxonomy(graph: Graph) -> Taxonomy:
    """Read every ``owl:Class`` of a parsed ontology into a Taxonomy.

    Parents come from ``rdfs:subClassOf``, synonyms from ``stc:synonym``,
    the term source from ``stc:definedBy`` (defaulting to PROPRIETARY).
    Validation (labels present, parents resolve, hierarchy acyclic) runs
    before the taxonomy is returned.
    """
    class_iris = sorted({t.subject for t in graph.match(None, RDF_TYPE, OWL_CLASS)},
                        key=lambda i: i.value)
    concepts = []
    for iri in class_iris:
        labels = sorted(o.lexical for o in graph.objects(iri, RDFS_LABEL)
                        if isinstance(o, Literal))
        if not labels:
            raise MissingLabelError(f"class {iri.value} has no rdfs:label")
        synonyms = frozenset(o.lexical for o in graph.objects(iri, SYNONYM_PROP)
                             if isinstance(o, Literal))
        sources = [o.lexical for o in graph.objects(iri, DEFINED_BY_PROP)
                   if isinstance(o, Literal)]
        if sources:
            try:
                source = TermSource(sources[0])
            except ValueError:
                raise TaxonomyError(
                    f"{iri.value} has unknown term source {sources[0]!r}") from None
        else:
            source = TermSource.PROPRIETARY
        parents = frozenset(o for o in graph.objects(iri, RDFS_SUBCLASS_OF)
                            if isinstance(o, Iri))
        concepts.append(Concept(iri, labels[0], synonyms, source, parents))
    props = frozenset(t.subject for t in graph.match(None, RDF_TYPE, OWL_OBJECT_PROPERTY))
    return Taxonomy.build(concepts, props)


def taxonomy_to_graph(taxonomy: Taxonomy, prefixes: Optional[Mapping[str, str]] = None) -> Graph:
    """Serialize a taxonomy back to its ontology graph form."""
    triples = []
    for c in taxonomy.concepts.values():
        triples.append(Triple(c.iri, RDF_TYPE, OWL_CLASS))
        triples.append(Triple(c.iri, RDFS_LABEL, Literal(c.preferred_label)))
        triples.append(Triple(c.iri, DEFINED_BY_PROP, Literal(c.source.value)))
        for syn in c.synonyms:
            triples.append(Triple(c.iri, SYNONYM_PROP, Literal(syn)))
        for parent in c.parents:
            triples.append(Triple(c.iri, RDFS_SUBCLASS_OF, parent))
    for prop in taxonomy.object_properties:
        triples.append(Triple(prop, RDF_TYPE, OWL_OBJECT_PROPERTY))
    return Graph(triples, prefixes or STANDARD_PREFIXES)


def taxonomy_version(*taxonomies: Taxonomy) -> str:
    """Stable content hash used to stamp maps and funnel states."""
    h = hashlib.sha256()
    for taxonomy in taxonomies:
        for iri in sorted(taxonomy.concepts, key=lambda i: i.value):
            c = taxonomy.concepts[iri]
            h.update(iri.value.encode())
            h.update(b"\x00" + c.preferred_label.encode())
            for syn in sorted(c.synonyms):
                h.update(b"\x01" + syn.encode())
            h.update(b"\x02" + c.source.value.encode())
            for parent in sorted(c.parents, key=lambda i: i.value):
                h.update(b"\x03" + parent.value.encode())
        h.update(b"\xff")
    return h.hexdigest()[:12]


def pun(taxonomy: Taxonomy) -> Graph:
    """Reify every concept as an individual (OWL punning).

    Emits one ``rdf:type ai4st:STTarget`` triple per concept, reusing the
    class IRI as the individual IRI, and one ``ai4st:hasParent`` triple
    per subclass edge — the hasParent edge set equals the subclass edge
    set by construction.
    """
    triples = []
    for c in taxonomy.concepts.values():
        triples.append(Triple(c.iri, RDF_TYPE, ST_TARGET_CLASS))
        for parent in c.parents:
            triples.append(Triple(c.iri, HAS_PARENT, parent))
    return Graph(triples, STANDARD_PREFIXES)


def _mint_concept_iri(label: str, namespace: str) -> Iri:
    token = "_".join(label.split())
    if token and token[0].islower():
        token = token[0].upper() + token[1:]
    return Iri(namespace + token)


def extend_taxonomy(taxonomy: Taxonomy, verdict) -> Taxonomy:
    """Apply an accepted term-candidate adjudication.

    ``verdict`` is an accepted adjudication record: ``action`` is either
    ``accept_new`` (with ``parent`` and optional ``source``) or
    ``accept_synonym`` (with ``anchor``); ``surface_form`` carries the
    term text. Returns a re-validated taxonomy.
    """
    action = verdict.action
    if action == "accept_new":
        parent = verdict.parent
        if parent not in taxonomy.concepts:
            raise UnknownAnchorError(f"unknown parent concept: {parent.value}")
        label = verdict.surface_form
        for c in taxonomy.concepts.values():
            if c.preferred_label == label:
                raise DuplicateLabelError(f"label {label!r} already names {c.iri.value}")
        source = TermSource(getattr(verdict, "source", None) or "PROPRIETARY")
        namespace = parent.value.rsplit("#", 1)[0] + "#" if "#" in parent.value else STC
        iri = _mint_concept_iri(label, namespace)
        if iri in taxonomy.concepts:
            raise DuplicateLabelError(f"minted IRI already exists: {iri.value}")
        new = Concept(iri, label, frozenset(), source, frozenset({parent}))
        return Taxonomy.build(list(taxonomy.concepts.values()) + [new],
                              taxonomy.object_properties)
    if action == "accept_synonym":
        anchor = verdict.anchor
        concept = taxonomy.concepts.get(anchor)
        if concept is None:
            raise UnknownAnchorError(f"unknown anchor concept: {anchor.value}")
        updated = Concept(concept.iri, concept.preferred_label,
                          concept.synonyms | {verdict.surface_form},
                          concept.source, concept.parents)
        concepts = [updated if c.iri == anchor else c for c in taxonomy.concepts.values()]
        return Taxonomy.build(concepts, taxonomy.object_properties)
    raise TaxonomyError(f"not an accepted adjudication: {action!r}")


# --- classification dimensions ------------------------------------------

PURPOSE_TOKENS = ("Understand", "Generate", "Improve")

LEVEL_TOKENS = (
    "No_AI_support",
    "AI-assisted_options",
    "AI-assisted_selections",
    "AI-driven_partial_automation",
    "AI-driven_full_automation",
)

# child token -> parent token (None marks a top-level AI type)
AI_TYPE_TREE = {
    "Symbolic_AI": None,
    "Subsymbolic_AI": None,
    "Statistical_AI": "Subsymbolic_AI",
    "Classical_machine_learning": "Subsymbolic_AI",
    "Evolutionary_algorithms": "Subsymbolic_AI",
    "Swarm_intelligence": "Subsymbolic_AI",
    "Deep_learning": "Subsymbolic_AI",
    "Generative_AI": None,
    "Agentic_AI": None,
    "General_AI": None,
}

_EXTRA_AI_TYPE_ALIASES = {
    "classicalml": "Classical_machine_learning",
    "ml": "Classical_machine_learning",
}


def _dim_key(value: str) -> str:
    return "".join(ch for ch in value.lower() if ch.isalnum())


@dataclass(frozen=True)
class DimensionCatalog:
    """The five classification dimensions: purposes, ordered automation
    levels 1..5, the AI-type tree, and the punned term individuals that
    serve as targets (research topic stays free text)."""

    purposes: tuple
    levels: tuple  # index i holds the IRI of ordinal i+1
    ai_types: Mapping[Iri, Optional[Iri]]
    targets: frozenset
    target_aliases: Mapping[str, Iri] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.levels) != 5:
            raise TaxonomyError("automation levels must be exactly the ordinals 1..5")
        if not self.targets:
            raise TaxonomyError("target dimension is empty; pun a taxonomy first")

    @classmethod
    def default(cls, targets: Union[Taxonomy, Iterable[Iri]],
                namespace: str = AI4ST,
                level_tokens: tuple = LEVEL_TOKENS) -> "DimensionCatalog":
        purposes = tuple(Iri(namespace + t) for t in PURPOSE_TOKENS)
        levels = tuple(Iri(namespace + t) for t in level_tokens)
        ai_types = {Iri(namespace + child): (Iri(namespace + parent) if parent else None)
                    for child, parent in AI_TYPE_TREE.items()}
        aliases: dict = {}
        if isinstance(targets, Taxonomy):
            taxonomy = targets
            target_set = frozenset(taxonomy.concepts)
            for iri in sorted(target_set, key=lambda i: i.value):
                concept = taxonomy.concepts[iri]
                names = [iri.value.rsplit("#", 1)[-1], concept.preferred_label]
                names.extend(sorted(concept.synonyms))
                for name in names:
                    aliases.setdefault(_dim_key(name), iri)
        else:
            target_set = frozenset(targets)
            for iri in sorted(target_set, key=lambda i: i.value):
                aliases.setdefault(_dim_key(iri.value.rsplit("#", 1)[-1]), iri)
        return cls(purposes, levels, ai_types, target_set, aliases)

    # --- resolution helpers (accept IRIs, tokens, labels, ordinals) ---

    def resolve_purpose(self, value) -> Iri:
        return self._resolve("purpose", value, {i: [i.value.rsplit("#", 1)[-1]]
                                                for i in self.purposes})

    def resolve_ai_type(self, value) -> Iri:
        names = {i: [i.value.rsplit("#", 1)[-1]] for i in self.ai_types}
        for alias, token in _EXTRA_AI_TYPE_ALIASES.items():
            for iri in self.ai_types:
                if iri.value.endswith("#" + token):
                    names[iri].append(alias)
        return self._resolve("ai-type", value, names)

    def resolve_target(self, value) -> Iri:
        if isinstance(value, Iri):
            if value in self.targets:
                return value
            raise UnknownDimensionValueError("target", value.value)
        if isinstance(value, str):
            try:
                as_iri = Iri(value)
            except TaxoscopeError:
                as_iri = None
            if as_iri is not None and as_iri in self.targets:
                return as_iri
            hit = self.target_aliases.get(_dim_key(value))
            if hit is not None:
                return hit
        raise UnknownDimensionValueError("target", value)

    def resolve_level(self, value) -> int:
        if isinstance(value, bool):
            raise UnknownDimensionValueError("level", value)
        if isinstance(value, int):
            if 1 <= value <= 5:
                return value
            raise UnknownDimensionValueError("level", value)
        if isinstance(value, Iri):
            if value in self.levels:
                return self.levels.index(value) + 1
            raise UnknownDimensionValueError("level", value.value)
        if isinstance(value, str):
            if value.strip().isdigit():
                return self.resolve_level(int(value.strip()))
            key = _dim_key(value)
            for i, iri in enumerate(self.levels):
                if _dim_key(iri.value.rsplit("#", 1)[-1]) == key:
                    return i + 1
        raise UnknownDimensionValueError("level", value)

    def level_iri(self, ordinal: int) -> Iri:
        return self.levels[self.resolve_level(ordinal) - 1]

    def level_ordinal(self, iri: Iri) -> int:
        return self.resolve_level(iri)

    def _resolve(self, dimension: str, value, names: Mapping[Iri, list]) -> Iri:
        if isinstance(value, Iri):
            if value in names:
                return value
            raise UnknownDimensionValueError(dimension, value.value)
        if isinstance(value, str):
            try:
                as_iri = Iri(value)
            except TaxoscopeError:
                as_iri = None
            if as_iri is not None and as_iri in names:
                return as_iri
            key = _dim_key(value)
            for iri in sorted(names, key=lambda i: i.value):
                if any(_dim_key(n) == key for n in names[iri]):
                    return iri
        raise UnknownDimensionValueError(dimension, value)

    def ai_type_children(self, parent: Optional[Iri]) -> list:
        return sorted((i for i, p in self.ai_types.items() if p == parent),
                      key=lambda i: i.value)
