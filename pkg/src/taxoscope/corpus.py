"""Bibliographic ingestion: BibTeX / CSV / JSON-Lines import, normalization
and deterministic deduplication.

Author lists are deliberately not modelled: title/abstract screening does
not need them and library exports disagree on their format.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, List, Mapping, Optional

from .conceptmap import normalize_join
from .errors import TaxoscopeError


class CorpusError(TaxoscopeError):
    code = "corpus-error"


class MalformedEntryError(CorpusError):
    code = "malformed-entry"

    def __init__(self, index: int, message: str):
        super().__init__(f"entry {index}: {message}")
        self.index = index


class DuplicateKeyError(CorpusError):
    code = "duplicate-key"

    def __init__(self, key: str):
        super().__init__(f"duplicate citation key: {key}")
        self.key = key


class MissingColumnError(CorpusError):
    code = "missing-column"

    def __init__(self, column: str):
        super().__init__(f"required column missing: {column}")
        self.column = column


class RowArityError(CorpusError):
    code = "row-arity"

    def __init__(self, row: int, expected: int, got: int):
        super().__init__(f"row {row} has {got} cells, header has {expected}")
        self.row = row


@dataclass(frozen=True)
class PaperRecord:
    id: str
    title: str
    abstract: Optional[str] = None
    year: Optional[int] = None
    venue: Optional[str] = None
    doi: Optional[str] = None
    url: Optional[str] = None
    source_library: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise CorpusError("paper record needs an id")
        if not self.title:
            raise CorpusError(f"paper record {self.id!r} has an empty title")
        if self.year is not None and not (1900 <= self.year <= 2100):
            raise CorpusError(f"paper record {self.id!r} has implausible year {self.year}")

    def populated_fields(self) -> int:
        return sum(1 for f in fields(self) if getattr(self, f.name) not in (None, ""))

    def to_json_obj(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)
                if getattr(self, f.name) is not None}

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "PaperRecord":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in obj.items() if k in known})


@dataclass(frozen=True)
class MergeEvent:
    kept_id: str
    dropped_id: str
    rule: str  # "doi" or "title"


@dataclass
class Corpus:
    records: dict  # id -> PaperRecord
    merge_log: list = field(default_factory=list, compare=False)

    def __len__(self):
        return len(self.records)

    def sorted_records(self) -> List[PaperRecord]:
        return [self.records[i] for i in sorted(self.records)]


# --- BibTeX -----------------------------------------------------------------

_ACCENT_RE = re.compile(r"\\[`'\"^~=.uvHc]\s*\{?([a-zA-Z])\}?")
_MACRO_RE = re.compile(r"\\[a-zA-Z]+\s*")


def _strip_latex(text: str) -> str:
    text = text.replace(r"\&", "&").replace(r"\%", "%").replace(r"\_", "_")
    text = _ACCENT_RE.sub(r"\1", text)
    text = _MACRO_RE.sub("", text)
    text = text.replace("{", "").replace("}", "")
    text = text.replace("~", " ")
    return re.sub(r"\s+", " ", text).strip()


def _read_braced(text: str, pos: int) -> tuple:
    """Read a {...} group starting at pos; returns (content, next_pos)."""
    depth = 0
    start = pos + 1
    i = pos
    while i < len(text):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return text[start:i], i + 1
        i += 1
    raise ValueError("unbalanced braces")


def _parse_bib_fields(body: str, index: int) -> dict:
    out = {}
    i = 0
    n = len(body)
    while i < n:
        while i < n and (body[i].isspace() or body[i] == ","):
            i += 1
        if i >= n:
            break
        m = re.match(r"([A-Za-z][A-Za-z0-9_\-]*)\s*=\s*", body[i:])
        if not m:
            raise MalformedEntryError(index, f"cannot read field near {body[i:i+25]!r}")
        name = m.group(1).lower()
        i += m.end()
        if i >= n:
            raise MalformedEntryError(index, f"field {name!r} has no value")
        c = body[i]
        if c == "{":
            try:
                value, i = _read_braced(body, i)
            except ValueError:
                raise MalformedEntryError(index, f"unbalanced braces in field {name!r}") from None
        elif c == '"':
            j = body.find('"', i + 1)
            if j < 0:
                raise MalformedEntryError(index, f"unterminated string in field {name!r}")
            value = body[i + 1:j]
            i = j + 1
        else:
            m = re.match(r"[^,}\s]+", body[i:])
            value = m.group()
            i += m.end()
        out[name] = value
    return out


def import_bibtex(text: str) -> List[PaperRecord]:
    """Parse BibTeX entries into paper records.

    Maps title/abstract/year/doi/url directly, booktitle-or-journal to
    venue, and the citation key to the id. Braces and LaTeX accent macros
    are stripped from text fields.
    """
    records = []
    seen = set()
    index = 0
    pos = 0
    while True:
        at = text.find("@", pos)
        if at < 0:
            break
        m = re.match(r"@\s*([A-Za-z]+)\s*", text[at:])
        if not m:
            raise MalformedEntryError(index, "cannot read entry type")
        etype = m.group(1).lower()
        brace = at + m.end()
        if etype in ("comment", "string", "preamble"):
            try:
                _, pos = _read_braced(text, brace)
            except ValueError:
                raise MalformedEntryError(index, "unbalanced braces") from None
            continue
        index += 1
        if brace >= len(text) or text[brace] != "{":
            raise MalformedEntryError(index, "expected '{' after entry type")
        try:
            body, pos = _read_braced(text, brace)
        except ValueError:
            raise MalformedEntryError(index, "unbalanced braces") from None
        comma = body.find(",")
        if comma < 0:
            raise MalformedEntryError(index, "entry has no citation key")
        key = body[:comma].strip()
        if not key:
            raise MalformedEntryError(index, "empty citation key")
        if key in seen:
            raise DuplicateKeyError(key)
        seen.add(key)
        raw = _parse_bib_fields(body[comma + 1:], index)
        title = _strip_latex(raw.get("title", ""))
        if not title:
            raise MalformedEntryError(index, f"entry {key!r} has no title")
        year = None
        ym = re.search(r"\d{4}", raw.get("year", ""))
        if ym:
            year = int(ym.group())
        venue = raw.get("booktitle") or raw.get("journal")
        abstract = raw.get("abstract")
        records.append(PaperRecord(
            id=key,
            title=title,
            abstract=_strip_latex(abstract) if abstract else None,
            year=year,
            venue=_strip_latex(venue) if venue else None,
            doi=raw.get("doi") or None,
            url=raw.get("url") or None,
            source_library="bibtex",
        ))
    return records


# --- CSV --------------------------------------------------------------------


def import_csv(text: str, column_map: Mapping[str, str],
               source_library: str = "csv") -> List[PaperRecord]:
    """One record per data row; ``column_map`` binds record fields to
    header names and must bind at least the title. Ids are minted as
    ``csv-<row#>`` when no id column is bound."""
    if "title" not in column_map:
        raise MissingColumnError("title")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise MissingColumnError(column_map["title"])
    positions = {}
    for field_name, column in column_map.items():
        if column not in header:
            raise MissingColumnError(column)
        positions[field_name] = header.index(column)
    records = []
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise RowArityError(row_no, len(header), len(row))
        values = {f: row[i].strip() for f, i in positions.items()}
        paper_id = values.get("id") or f"csv-{row_no - 1}"
        year = None
        if values.get("year"):
            ym = re.search(r"\d{4}", values["year"])
            if ym:
                year = int(ym.group())
        records.append(PaperRecord(
            id=paper_id,
            title=values.get("title", ""),
            abstract=values.get("abstract") or None,
            year=year,
            venue=values.get("venue") or None,
            doi=values.get("doi") or None,
            url=values.get("url") or None,
            source_library=source_library,
        ))
    return records


# --- deduplication ----------------------------------------------------------


def dedup(records: Iterable[PaperRecord]) -> Corpus:
    """Collapse records equal on DOI or on normalized title.

    The record with more populated fields wins, ties go to the
    lexicographically smaller id; one merge-log event per dropped record,
    so ``len(corpus) + len(merge_log) == len(input)``. Idempotent.
    """
    records = list(records)
    by_doi: dict = {}
    by_title: dict = {}
    kept: dict = {}
    log: list = []

    def better(a: PaperRecord, b: PaperRecord) -> PaperRecord:
        pa, pb = a.populated_fields(), b.populated_fields()
        if pa != pb:
            return a if pa > pb else b
        return a if a.id <= b.id else b

    for record in records:
        doi_key = record.doi.lower() if record.doi else None
        title_key = normalize_join(record.title)
        rule = None
        existing = None
        if doi_key is not None and doi_key in by_doi:
            existing = by_doi[doi_key]
            rule = "doi"
        elif title_key in by_title:
            existing = by_title[title_key]
            rule = "title"
        if existing is None:
            kept[record.id] = record
            if doi_key is not None:
                by_doi[doi_key] = record
            by_title.setdefault(title_key, record)
            continue
        winner = better(existing, record)
        loser = record if winner is existing else existing
        log.append(MergeEvent(winner.id, loser.id, rule))
        if winner is not existing:
            kept.pop(existing.id, None)
            kept[winner.id] = winner
            # re-point every key the loser held
            for key, rec in list(by_doi.items()):
                if rec is existing:
                    by_doi[key] = winner
            for key, rec in list(by_title.items()):
                if rec is existing:
                    by_title[key] = winner
            if doi_key is not None:
                by_doi.setdefault(doi_key, winner)
            by_title.setdefault(title_key, winner)
    return Corpus(kept, log)


# --- persistence ------------------------------------------------------------


def save_jsonl(corpus: Corpus, path) -> None:
    path = Path(path)
    lines = [json.dumps(r.to_json_obj(), sort_keys=True, ensure_ascii=False)
             for r in corpus.sorted_records()]
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_jsonl(path) -> Corpus:
    path = Path(path)
    records = {}
    if path.exists():
        for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{line_no}: not valid JSON ({exc})") from None
            record = PaperRecord.from_json_obj(obj)
            if record.id in records:
                raise DuplicateKeyError(record.id)
            records[record.id] = record
    return Corpus(records)
