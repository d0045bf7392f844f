"""Funnel, coverage and annex rendering.

Reports are data first (ReportDocument) and Markdown second; every number
in a rendered table comes straight from the stats object passed in, so
there is no cached drift to audit.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .classify import ClassificationRecord, CoverageStats, classification_to_json
from .corpus import Corpus
from .errors import TaxoscopeError
from .screening import (AdjudicationRecord, FunnelState, FunnelStats,
                        single_term_breakdown)


class ReportError(TaxoscopeError):
    code = "report-error"


@dataclass(frozen=True)
class Table:
    headers: tuple
    rows: tuple
    declared_rows: Optional[int] = None

    def __post_init__(self):
        if self.declared_rows is not None and len(self.rows) != self.declared_rows:
            raise ReportError(
                f"table declares {self.declared_rows} rows but holds {len(self.rows)}")


@dataclass(frozen=True)
class ReportDocument:
    title: str
    generated_at: str
    ontology_version: str
    sections: tuple  # (heading, Table | str)

    def to_markdown(self) -> str:
        lines = [f"# {self.title}", ""]
        if self.generated_at:
            lines.append(f"- generated at: {self.generated_at}")
        if self.ontology_version:
            lines.append(f"- ontology version: {self.ontology_version}")
        if len(lines) > 2:
            lines.append("")
        for heading, body in self.sections:
            lines.append(f"## {heading}")
            lines.append("")
            if isinstance(body, Table):
                widths = [len(h) for h in body.headers]
                for row in body.rows:
                    for i, cell in enumerate(row):
                        widths[i] = max(widths[i], len(str(cell)))
                header = "| " + " | ".join(h.ljust(widths[i]) for i, h in enumerate(body.headers)) + " |"
                rule = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
                lines.append(header)
                lines.append(rule)
                for row in body.rows:
                    lines.append("| " + " | ".join(
                        str(cell).ljust(widths[i]) for i, cell in enumerate(row)) + " |")
            else:
                lines.append(str(body))
            lines.append("")
        return "\n".join(lines)


STAGE_DEFINITIONS = (
    "ST-related: at least one EXACT or SYNONYM term hit. "
    "Variation-related: at least one VARIATION hit. "
    "Candidate: two or more distinct concepts across all hit categories "
    "(original and alternative terms counted jointly). "
    "AI-candidate: candidate with at least one AI-map hit. "
    "Included: papers with an INCLUDE decision."
)

FUNNEL_ROWS = (
    ("total papers", "total"),
    ("with ST term (exact/synonym)", "with_st_term"),
    ("with exactly one ST term", "with_exactly_one_st_term"),
    ("with term variation", "with_variation"),
    ("with exactly one variation", "with_exactly_one_variation"),
    ("candidates (>=2 distinct concepts)", "candidates"),
    ("AI-candidates", "ai_candidates"),
    ("included", "included"),
)


def funnel_to_csv(stats: FunnelStats) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["stage", "papers"])
    for label, attr in FUNNEL_ROWS:
        writer.writerow([label, getattr(stats, attr)])
    return buf.getvalue()


def funnel_to_json_obj(stats: FunnelStats, state: Optional[FunnelState] = None,
                       ontology_version: str = "") -> dict:
    out = {"ontology_version": ontology_version,
           "stats": {attr: getattr(stats, attr) for _, attr in FUNNEL_ROWS}}
    if state is not None:
        out["breakdown"] = single_term_breakdown(state)
    return out


def render_funnel_report(stats: FunnelStats, *, ontology_version: str = "",
                         generated_at: str = "",
                         state: Optional[FunnelState] = None) -> ReportDocument:
    """The eight funnel counts in narrative order plus the stage
    definitions; when the state is supplied, the restricted variants of
    the single-term/single-variation counts are reported alongside."""
    rows = tuple((label, getattr(stats, attr)) for label, attr in FUNNEL_ROWS)
    sections = [("Funnel", Table(("stage", "papers"), rows, declared_rows=8)),
                ("Stage definitions", STAGE_DEFINITIONS)]
    if state is not None:
        b = single_term_breakdown(state)
        sections.append((
            "Single-term readings",
            Table(("count", "exactly one in category", "and none in the other"),
                  (("one ST term", b["one_term"], b["one_term_only"]),
                   ("one variation", b["one_variation"], b["one_variation_only"])),
                  declared_rows=2)))
    return ReportDocument("Screening funnel", generated_at, ontology_version,
                          tuple(sections))


def _short(iri) -> str:
    return iri.value.rsplit("#", 1)[-1]


def render_coverage_report(stats: CoverageStats, *, ontology_version: str = "",
                           generated_at: str = "") -> ReportDocument:
    """Per-dimension histograms, the distinct-target fraction, and flags
    for every dimension value that no classified paper uses."""
    zero_flags = []
    purpose_rows = []
    for iri in sorted(stats.purpose_histogram, key=lambda i: i.value):
        n = stats.purpose_histogram[iri]
        purpose_rows.append((_short(iri), n))
        if n == 0:
            zero_flags.append(f"purpose {_short(iri)}")
    level_rows = []
    for ordinal in sorted(stats.level_histogram):
        n = stats.level_histogram[ordinal]
        level_rows.append((str(ordinal), n))
        if n == 0:
            zero_flags.append(f"level {ordinal}")
    ai_rows = []
    for iri in sorted(stats.ai_type_histogram, key=lambda i: i.value):
        n = stats.ai_type_histogram[iri]
        ai_rows.append((_short(iri), n))
        if n == 0:
            zero_flags.append(f"ai-type {_short(iri)}")
    fraction = stats.target_fraction
    summary = Table(
        ("metric", "value"),
        (("classified papers", stats.classified_paper_count),
         ("distinct targets", stats.distinct_targets),
         ("target fraction", f"{fraction.numerator}/{fraction.denominator}"
          f" ({float(fraction):.1%})" if fraction.denominator else "0")),
        declared_rows=3)
    sections = [
        ("Coverage", summary),
        ("Purposes", Table(("purpose", "papers"), tuple(purpose_rows))),
        ("Automation levels", Table(("level", "papers"), tuple(level_rows))),
        ("AI types", Table(("ai type", "papers"), tuple(ai_rows))),
        ("Unused dimension values",
         "; ".join(zero_flags) if zero_flags else "none — every dimension value occurs"),
    ]
    return ReportDocument("Classification coverage", generated_at, ontology_version,
                          tuple(sections))


# --- annex exports -----------------------------------------------------------


def export_annex(state: FunnelState, records: Iterable[ClassificationRecord],
                 corpus: Corpus, adjudications: Iterable[AdjudicationRecord],
                 out_dir) -> dict:
    """Write the annex CSV set; returns {name: path}.

    ``annex_term_usage.csv`` has one row per (paper, hit); the
    classification table carries the paper title so it re-imports through
    the corpus CSV reader.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["paper_id", "field", "concept_iri", "category",
                     "matched_form", "start", "end"])
    for pid in sorted(state.papers):
        screen = state.papers[pid]
        for hit in sorted(screen.st_hits | screen.ai_hits,
                          key=lambda h: (h.field.value, h.start, h.end,
                                         h.concept.value, h.category.value)):
            writer.writerow([pid, hit.field.value, hit.concept.value, hit.category.value,
                             hit.matched_form, hit.start, hit.end])
    paths["term_usage"] = out_dir / "annex_term_usage.csv"
    paths["term_usage"].write_text(buf.getvalue(), encoding="utf-8")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["surface_form", "action", "parent", "anchor", "source",
                     "reviewer", "timestamp"])
    for record in adjudications:
        writer.writerow([record.surface_form, record.action,
                         record.parent.value if record.parent else "",
                         record.anchor.value if record.anchor else "",
                         record.source or "", record.reviewer, record.timestamp])
    paths["adjudications"] = out_dir / "annex_adjudications.csv"
    paths["adjudications"].write_text(buf.getvalue(), encoding="utf-8")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["paper_id", "title", "topics", "purposes", "targets",
                     "ai_types", "level", "reviewer", "timestamp"])
    for record in records:
        obj = classification_to_json(record)
        paper = corpus.records.get(record.paper_id)
        writer.writerow([record.paper_id,
                         paper.title if paper else "",
                         "; ".join(obj["topics"]),
                         "; ".join(_short_iri(v) for v in obj["purposes"]),
                         "; ".join(_short_iri(v) for v in obj["targets"]),
                         "; ".join(_short_iri(v) for v in obj["ai_types"]),
                         record.level, record.reviewer, record.timestamp])
    paths["classifications"] = out_dir / "annex_classifications.csv"
    paths["classifications"].write_text(buf.getvalue(), encoding="utf-8")
    return paths


def _short_iri(value: str) -> str:
    return value.rsplit("#", 1)[-1]
