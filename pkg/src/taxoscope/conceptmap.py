"""Concept maps: the searchable surface forms of a taxonomy.

A concept map flattens a taxonomy into normalized token sequences —
preferred labels (EXACT), synonyms (SYNONYM) and mechanically generated
alternations such as "unit test" for "unit-level test" (VARIATION) —
and matches them against paper titles and abstracts. Matching is purely
lexical and longest-match so results stay auditable.
"""

from __future__ import annotations

import csv
import io
import re
from array import array
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional, Tuple

from . import _kernels
from .errors import TaxoscopeError
from .ontology import Taxonomy, taxonomy_version
from .rdf import Iri


class Category(Enum):
    EXACT = "EXACT"
    SYNONYM = "SYNONYM"
    VARIATION = "VARIATION"


_CATEGORY_RANK = {Category.EXACT: 0, Category.SYNONYM: 1, Category.VARIATION: 2}


class TextField(Enum):
    TITLE = "TITLE"
    ABSTRACT = "ABSTRACT"


def normalize_with_offsets(text: str) -> list:
    """Tokenize: case-folded, every non-alphanumeric character separates.

    Returns ``[(token, char_start, char_end), ...]`` with offsets into the
    original text, so hit spans can be highlighted verbatim.
    """
    out = []
    chars = []
    start = None
    for idx, ch in enumerate(text):
        if ch.isalnum():
            if start is None:
                start = idx
            chars.append(ch.casefold())
        elif start is not None:
            out.append(("".join(chars), start, idx))
            chars = []
            start = None
    if start is not None:
        out.append(("".join(chars), start, len(text)))
    return out


def normalize(text: str) -> tuple:
    """Normalized token sequence of a text."""
    return tuple(tok for tok, _, _ in normalize_with_offsets(text))


def normalize_join(text: str) -> str:
    return " ".join(normalize(text))


# --- variation generation -------------------------------------------------

VariationRule = Callable[[str], Iterable[str]]


def _rule_hyphen_space(text: str):
    """Hyphen/space alternation."""
    if "-" in text:
        yield text.replace("-", " ")
    if " " in text:
        yield text.replace(" ", "-")


def _rule_plural_toggle(text: str):
    """Append or strip a trailing 's' on the final token."""
    tokens = list(normalize(text))
    if not tokens:
        return
    last = tokens[-1]
    toggled = last[:-1] if last.endswith("s") else last + "s"
    if toggled:
        yield " ".join(tokens[:-1] + [toggled])


_LEVEL_RE = re.compile(r"^(\S+)-level(\s+\S.*)$", re.IGNORECASE)


def _rule_drop_level(text: str):
    """'unit-level test' -> 'unit test'."""
    m = _LEVEL_RE.match(text)
    if m:
        yield m.group(1) + m.group(2)


def _rule_based_spacing(text: str):
    if "-based" in text:
        yield text.replace("-based", " based")
    if " based" in text:
        yield text.replace(" based", "-based")


DEFAULT_RULES: Tuple[VariationRule, ...] = (
    _rule_hyphen_space,
    _rule_plural_toggle,
    _rule_drop_level,
    _rule_based_spacing,
)


def generate_variations(label: str, rules: Tuple[VariationRule, ...] = DEFAULT_RULES) -> frozenset:
    """Closure of the rewrite rules over a label, as normalized forms.

    The original form is excluded. Rules run on surface text (hyphens
    matter to them) but identity is decided on the normalized tokens.
    """
    origin = normalize(label)
    seen = {origin}
    queue = [label]
    results = set()
    while queue:
        text = queue.pop(0)
        for rule in rules:
            for alt in rule(text):
                norm = normalize(alt)
                if not norm or norm in seen:
                    continue
                seen.add(norm)
                queue.append(alt)
                results.add(" ".join(norm))
    return frozenset(results)


# --- the map itself --------------------------------------------------------


@dataclass(frozen=True)
class MapEntry:
    form: tuple  # normalized token sequence
    concept: Iri
    category: Category


@dataclass(frozen=True)
class TermHit:
    concept: Iri
    category: Category
    matched_form: str
    field: TextField
    start: int  # token offsets into the normalized field, end exclusive
    end: int


class ConceptMapError(TaxoscopeError):
    code = "concept-map"


class ConceptMap:
    """Immutable, pre-compiled for the scan kernel."""

    __slots__ = ("entries", "ontology_version", "_vocab", "_forms",
                 "_entries_by_form", "_form_flat", "_form_off", "_first_index")

    def __init__(self, entries: Iterable[MapEntry], ontology_version: str = ""):
        dedup = {}
        for e in entries:
            if not e.form:
                raise ConceptMapError("empty surface form in concept map")
            key = (e.form, e.concept)
            old = dedup.get(key)
            if old is None or _CATEGORY_RANK[e.category] < _CATEGORY_RANK[old.category]:
                dedup[key] = e
        self.entries = tuple(sorted(
            dedup.values(), key=lambda e: (e.form, e.concept.value, _CATEGORY_RANK[e.category])))
        self.ontology_version = ontology_version
        self._compile()

    def _compile(self):
        forms = sorted({e.form for e in self.entries})
        form_idx = {f: i for i, f in enumerate(forms)}
        entries_by_form = [[] for _ in forms]
        for e in self.entries:
            entries_by_form[form_idx[e.form]].append(e)
        vocab = {}
        for f in forms:
            for tok in f:
                if tok not in vocab:
                    vocab[tok] = -1
        for i, tok in enumerate(sorted(vocab)):
            vocab[tok] = i
        flat = array("i")
        off = array("i", [0])
        for f in forms:
            flat.extend(vocab[t] for t in f)
            off.append(len(flat))
        first: dict = {}
        for i, f in enumerate(forms):
            first.setdefault(vocab[f[0]], []).append(i)
        for tid, idxs in first.items():
            idxs.sort(key=lambda i: (-(off[i + 1] - off[i]), i))
            first[tid] = tuple(idxs)
        self._vocab = vocab
        self._forms = forms
        self._entries_by_form = entries_by_form
        self._form_flat = flat
        self._form_off = off
        self._first_index = first

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, ConceptMap):
            return NotImplemented
        return self.entries == other.entries and self.ontology_version == other.ontology_version

    def __hash__(self):
        return hash((self.entries, self.ontology_version))

    def match_tokens(self, tokens: tuple, scan=None) -> list:
        """All longest matches over a normalized token sequence.

        Returns ``[(start, end, entry), ...]`` in scan order.
        """
        if not self.entries or not tokens:
            return []
        scan = scan or _kernels.scan
        vocab = self._vocab
        ids = [vocab.get(t, -1) for t in tokens]
        out = []
        for pos, fidx in scan(ids, self._first_index, self._form_flat, self._form_off):
            end = pos + (self._form_off[fidx + 1] - self._form_off[fidx])
            for entry in self._entries_by_form[fidx]:
                out.append((pos, end, entry))
        return out


def derive_concept_map(taxonomy: Taxonomy,
                       rules: Tuple[VariationRule, ...] = DEFAULT_RULES,
                       ontology_version: Optional[str] = None) -> ConceptMap:
    """One EXACT entry per preferred label, one SYNONYM entry per synonym,
    one VARIATION entry per generated alternation of either; collisions
    on (form, concept) keep the strongest category."""
    entries = []
    for iri in sorted(taxonomy.concepts, key=lambda i: i.value):
        concept = taxonomy.concepts[iri]
        label_form = normalize(concept.preferred_label)
        if label_form:
            entries.append(MapEntry(label_form, iri, Category.EXACT))
        for syn in sorted(concept.synonyms):
            form = normalize(syn)
            if form:
                entries.append(MapEntry(form, iri, Category.SYNONYM))
        for base in [concept.preferred_label, *sorted(concept.synonyms)]:
            for variation in sorted(generate_variations(base, rules)):
                entries.append(MapEntry(tuple(variation.split(" ")), iri, Category.VARIATION))
    version = ontology_version if ontology_version is not None else taxonomy_version(taxonomy)
    return ConceptMap(entries, version)


def match_text(cmap: ConceptMap, title: str, abstract: Optional[str]) -> frozenset:
    """All term hits across the title and abstract of one paper."""
    hits = set()
    for field, text in ((TextField.TITLE, title or ""), (TextField.ABSTRACT, abstract or "")):
        tokens = normalize(text)
        for start, end, entry in cmap.match_tokens(tokens):
            hits.add(TermHit(entry.concept, entry.category, " ".join(entry.form),
                             field, start, end))
    return frozenset(hits)


# --- CSV exchange -----------------------------------------------------------


def export_csv(cmap: ConceptMap) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["surface_form", "concept_iri", "category"])
    for e in cmap.entries:
        writer.writerow([" ".join(e.form), e.concept.value, e.category.value])
    return buf.getvalue()


def import_csv(text: str, ontology_version: str = "") -> ConceptMap:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["surface_form", "concept_iri", "category"]:
        raise ConceptMapError("unexpected concept map CSV header")
    entries = []
    for row in reader:
        if not row:
            continue
        if len(row) != 3:
            raise ConceptMapError(f"concept map row has {len(row)} cells, expected 3")
        form, concept, category = row
        entries.append(MapEntry(tuple(form.split(" ")), Iri(concept), Category(category)))
    return ConceptMap(entries, ontology_version)
