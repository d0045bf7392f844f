"""Triple data model and the in-memory graph store.

Graphs have set semantics and are immutable once built: every "mutation"
returns a new Graph value, so graphs can be shared read-only across
threads. Equality is triple-set equality; the prefix map is presentation
metadata and does not participate in comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union

from .errors import TaxoscopeError

_BAD_IRI_CHARS = set(' \t\n\r<>"{}|\\`')


class BadTermError(TaxoscopeError):
    code = "bad-term"


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self):
        v = self.value
        if not v or ":" not in v:
            raise BadTermError(f"not an absolute IRI: {v!r}")
        if any(c in _BAD_IRI_CHARS for c in v):
            raise BadTermError(f"IRI contains forbidden characters: {v!r}")

    def __repr__(self):
        return f"<{self.value}>"


@dataclass(frozen=True)
class Literal:
    lexical: str
    language: Optional[str] = None
    datatype: Optional[Iri] = None

    def __post_init__(self):
        if self.language is not None and self.datatype is not None:
            raise BadTermError("literal cannot carry both a language tag and a datatype")

    def __repr__(self):
        if self.language:
            return f'"{self.lexical}"@{self.language}'
        if self.datatype:
            return f'"{self.lexical}"^^{self.datatype!r}'
        return f'"{self.lexical}"'


Term = Union[Iri, Literal]


@dataclass(frozen=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, Iri) or not isinstance(self.predicate, Iri):
            raise BadTermError("subject and predicate must be IRIs")
        if not isinstance(self.object, (Iri, Literal)):
            raise BadTermError("object must be an IRI or a literal")


def term_key(term: Term) -> tuple:
    """Total order over terms: IRIs before literals, then lexicographic."""
    if isinstance(term, Iri):
        return (0, term.value, "", "")
    return (1, term.lexical, term.language or "", term.datatype.value if term.datatype else "")


def triple_key(t: Triple) -> tuple:
    return (t.subject.value, t.predicate.value, term_key(t.object))


class Graph:
    """Immutable set of triples plus a prefix map for serialization."""

    __slots__ = ("_triples", "_prefixes", "_sorted", "_by_s", "_by_p", "_by_o")

    def __init__(self, triples: Iterable[Triple] = (), prefixes: Optional[Mapping[str, str]] = None):
        self._triples = frozenset(triples)
        self._prefixes = dict(prefixes) if prefixes else {}
        self._sorted = None
        self._by_s = None
        self._by_p = None
        self._by_o = None

    @property
    def triples(self) -> frozenset:
        return self._triples

    @property
    def prefixes(self) -> dict:
        return dict(self._prefixes)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.sorted_triples())

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self):
        return f"Graph({len(self._triples)} triples, {len(self._prefixes)} prefixes)"

    def sorted_triples(self) -> list:
        if self._sorted is None:
            self._sorted = sorted(self._triples, key=triple_key)
        return list(self._sorted)

    def add(self, triple: Triple) -> "Graph":
        if triple in self._triples:
            return self
        return Graph(self._triples | {triple}, self._prefixes)

    def union(self, other: "Graph") -> "Graph":
        prefixes = dict(other._prefixes)
        prefixes.update(self._prefixes)
        return Graph(self._triples | other._triples, prefixes)

    def with_prefixes(self, prefixes: Mapping[str, str]) -> "Graph":
        merged = dict(self._prefixes)
        merged.update(prefixes)
        return Graph(self._triples, merged)

    def _indexes(self):
        if self._by_s is None:
            by_s, by_p, by_o = {}, {}, {}
            for t in self._triples:
                by_s.setdefault(t.subject, []).append(t)
                by_p.setdefault(t.predicate, []).append(t)
                by_o.setdefault(t.object, []).append(t)
            self._by_s, self._by_p, self._by_o = by_s, by_p, by_o
        return self._by_s, self._by_p, self._by_o

    def match(self, subject: Optional[Iri] = None, predicate: Optional[Iri] = None,
              object: Optional[Term] = None) -> list:
        """Triples agreeing with every bound component, in sorted order."""
        by_s, by_p, by_o = self._indexes()
        candidates = None
        if subject is not None:
            candidates = by_s.get(subject, [])
        if predicate is not None:
            pool = by_p.get(predicate, [])
            candidates = pool if candidates is None else (
                pool if len(pool) < len(candidates) else candidates)
        if object is not None:
            pool = by_o.get(object, [])
            candidates = pool if candidates is None else (
                pool if len(pool) < len(candidates) else candidates)
        if candidates is None:
            return self.sorted_triples()
        out = [t for t in candidates
               if (subject is None or t.subject == subject)
               and (predicate is None or t.predicate == predicate)
               and (object is None or t.object == object)]
        out.sort(key=triple_key)
        return out

    def objects(self, subject: Iri, predicate: Iri) -> list:
        return [t.object for t in self.match(subject, predicate, None)]

    def subjects(self, predicate: Iri, object: Term) -> list:
        return [t.subject for t in self.match(None, predicate, object)]

    def terms(self) -> set:
        """Every term occurring in any triple position."""
        out = set()
        for t in self._triples:
            out.add(t.subject)
            out.add(t.predicate)
            out.add(t.object)
        return out


def match_pattern(graph: Graph, subject: Optional[Iri] = None,
                  predicate: Optional[Iri] = None, object: Optional[Term] = None) -> list:
    """Triples agreeing with every bound component, in sorted order."""
    return graph.match(subject, predicate, object)
