"""Local HTTP/JSON service consumed by the review UI.

Single-user: no authentication, mutations serialized behind one lock and
appended to the project logs, so a restart replays to the same state.
Every endpoint calls the same Session operations as the CLI.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import screening as sc
from .classify import EmptyDimensionError, NotIncludedError
from .conceptmap import normalize_with_offsets
from .errors import TaxoscopeError
from .ontology import UnknownAnchorError, UnknownDimensionValueError
from .project import Session
from .rdf import Iri
from .sparql import QueryError


class MalformedBodyError(TaxoscopeError):
    code = "malformed-body"


_STATUS = (
    (sc.UnknownPaperError, 404),
    (sc.StageViolationError, 409),
    (NotIncludedError, 409),
    (UnknownDimensionValueError, 422),
    (EmptyDimensionError, 422),
    (UnknownAnchorError, 422),
    (sc.StaleMapError, 409),
    (MalformedBodyError, 400),
    (QueryError, 400),
)


def _status_for(exc: TaxoscopeError) -> int:
    for klass, status in _STATUS:
        if isinstance(exc, klass):
            return status
    return 400


def _error(exc: TaxoscopeError) -> JSONResponse:
    return JSONResponse({"code": exc.code, "message": str(exc)},
                        status_code=_status_for(exc))


async def _body(request: Request) -> dict:
    try:
        data = await request.json()
    except Exception:
        raise MalformedBodyError("request body is not valid JSON") from None
    if not isinstance(data, dict):
        raise MalformedBodyError("request body must be a JSON object")
    return data


_STAGE_FILTERS = {
    "all": lambda s: True,
    "st-related": sc.is_st_related,
    "variation-related": sc.is_variation_related,
    "candidate": sc.is_candidate,
    "ai-candidate": sc.is_ai_candidate,
    "included": sc.is_included,
    "excluded": lambda s: s.decision is not None and s.decision.verdict is sc.Verdict.EXCLUDE,
    "undecided": lambda s: s.decision is None,
}


def _char_span(text: str, start: int, end: int) -> Optional[tuple]:
    offsets = normalize_with_offsets(text or "")
    if 0 <= start < end <= len(offsets):
        return offsets[start][1], offsets[end - 1][2]
    return None


def _hit_json(hit, record) -> dict:
    out = sc.hit_to_json(hit)
    text = record.title if hit.field.value == "TITLE" else (record.abstract or "")
    span = _char_span(text, hit.start, hit.end)
    if span:
        out["char_start"], out["char_end"] = span
    return out


def _decision_json(decision) -> Optional[dict]:
    if decision is None:
        return None
    out = {"verdict": decision.verdict.value, "reason": decision.reason.value,
           "reviewer": decision.reviewer, "timestamp": decision.timestamp}
    if decision.note:
        out["note"] = decision.note
    return out


def _paper_json(record, screen, detail: bool = False) -> dict:
    out = {
        "id": record.id,
        "title": record.title,
        "year": record.year,
        "venue": record.venue,
        "stages": list(sc.stages_of(screen)),
        "decision": _decision_json(screen.decision),
        "n_st_concepts": len(sc.st_concepts(screen)),
        "n_ai_hits": len(screen.ai_hits),
    }
    if detail:
        out["abstract"] = record.abstract
        out["doi"] = record.doi
        out["url"] = record.url
        key = lambda h: (h.field.value, h.start, h.end, h.concept.value)
        out["st_hits"] = [_hit_json(h, record) for h in sorted(screen.st_hits, key=key)]
        out["ai_hits"] = [_hit_json(h, record) for h in sorted(screen.ai_hits, key=key)]
    return out


def create_app(session: Session, frontend_dir=None) -> FastAPI:
    app = FastAPI(title="taxoscope review service", docs_url=None, redoc_url=None)
    lock = threading.Lock()

    @app.exception_handler(TaxoscopeError)
    async def _taxoscope_error(request: Request, exc: TaxoscopeError):
        return _error(exc)

    from fastapi.exceptions import RequestValidationError

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse({"code": "malformed-body", "message": str(exc)},
                            status_code=400)

    # --- reads ---

    @app.get("/api/funnel")
    def funnel():
        state = session.state()
        stats = sc.funnel_counts(state)
        return {
            "stats": {k: getattr(stats, k) for k in (
                "total", "with_st_term", "with_exactly_one_st_term", "with_variation",
                "with_exactly_one_variation", "candidates", "ai_candidates", "included")},
            "breakdown": sc.single_term_breakdown(state),
            "ontology_version": state.ontology_version,
            "pending_adjudications": len(session.pending_adjudications()),
        }

    @app.get("/api/papers")
    def papers(stage: str = "all", page: int = 1, page_size: int = 25):
        if stage not in _STAGE_FILTERS:
            raise MalformedBodyError(
                f"unknown stage {stage!r}; expected one of {', '.join(sorted(_STAGE_FILTERS))}")
        if page < 1 or page_size < 1 or page_size > 500:
            raise MalformedBodyError("page must be >= 1 and page_size in 1..500")
        state = session.state()
        corpus = session.corpus()
        keep = _STAGE_FILTERS[stage]
        ids = [pid for pid in sorted(state.papers) if keep(state.papers[pid])]
        window = ids[(page - 1) * page_size: page * page_size]
        return {
            "stage": stage, "total": len(ids), "page": page, "page_size": page_size,
            "items": [_paper_json(corpus.records[pid], state.papers[pid]) for pid in window],
        }

    @app.get("/api/papers/{paper_id}")
    def paper(paper_id: str):
        state = session.state()
        screen = state.papers.get(paper_id)
        if screen is None:
            raise sc.UnknownPaperError(paper_id)
        return _paper_json(session.corpus().records[paper_id], screen, detail=True)

    @app.get("/api/candidates")
    def candidates():
        items = session.discover()
        pending = {r.surface_form for r in session.pending_adjudications()}
        decided = {r.surface_form: r.action for r in session.adjudication_log()}
        return {"candidates": [{
            "index": i,
            "surface_form": c.surface_form,
            "kind": c.kind.value,
            "frequency": c.frequency,
            "nearest_concept": c.nearest_concept.value if c.nearest_concept else None,
            "similarity": float(c.similarity) if c.similarity is not None else None,
            "example_paper_ids": list(c.example_paper_ids),
            "adjudicated": decided.get(c.surface_form),
            "pending_rebuild": c.surface_form in pending,
        } for i, c in enumerate(items)]}

    @app.get("/api/ontology/tree")
    def ontology_tree():
        st_tax, _ = session.snapshot_taxonomies()

        def node(iri):
            concept = st_tax.concepts[iri]
            return {"iri": iri.value, "label": concept.preferred_label,
                    "synonyms": sorted(concept.synonyms),
                    "source": concept.source.value,
                    "children": [node(c) for c in st_tax.children(iri)]}

        return {"roots": [node(i) for i in sorted(st_tax.roots, key=lambda i: i.value)]}

    @app.get("/api/dimensions")
    def dimensions():
        catalog = session.catalog()
        st_tax, _ = session.snapshot_taxonomies()

        def ai_node(iri):
            return {"iri": iri.value, "name": iri.value.rsplit("#", 1)[-1],
                    "children": [ai_node(c) for c in catalog.ai_type_children(iri)]}

        return {
            "purposes": [{"iri": p.value, "name": p.value.rsplit("#", 1)[-1]}
                         for p in catalog.purposes],
            "levels": [{"ordinal": i + 1, "iri": iri.value,
                        "name": iri.value.rsplit("#", 1)[-1]}
                       for i, iri in enumerate(catalog.levels)],
            "ai_types": [ai_node(i) for i in catalog.ai_type_children(None)],
            "targets": [{"iri": iri.value,
                         "label": st_tax.concepts[iri].preferred_label}
                        for iri in sorted(catalog.targets, key=lambda i: i.value)],
        }

    # --- mutations ---

    @app.post("/api/papers/{paper_id}/decision")
    async def post_decision(paper_id: str, request: Request):
        data = await _body(request)
        verdict = data.get("verdict")
        if verdict not in ("INCLUDE", "EXCLUDE"):
            raise MalformedBodyError("verdict must be INCLUDE or EXCLUDE")
        reason = data.get("reason")
        if verdict == "EXCLUDE":
            try:
                sc.DecisionReason(reason)
            except ValueError:
                raise MalformedBodyError(f"unknown exclusion reason {reason!r}") from None
        with lock:
            session.decide(paper_id, verdict, reason, data.get("note"),
                           bool(data.get("override")))
            state = session.state()
        return {"paper_id": paper_id,
                "decision": _decision_json(state.papers[paper_id].decision),
                "stages": list(sc.stages_of(state.papers[paper_id]))}

    @app.post("/api/candidates/{index}/adjudicate")
    async def post_adjudicate(index: int, request: Request):
        data = await _body(request)
        action = data.get("action")
        if action not in ("accept_new", "accept_synonym", "reject"):
            raise MalformedBodyError("action must be accept_new, accept_synonym or reject")
        with lock:
            items = session.discover()
            if index < 0 or index >= len(items):
                raise sc.UnknownPaperError(f"candidate #{index}")
            candidate = items[index]
            stated = data.get("surface_form")
            if stated is not None and stated != candidate.surface_form:
                raise MalformedBodyError(
                    f"candidate #{index} is {candidate.surface_form!r}, not {stated!r}")
            record = session.adjudicate(
                candidate, action,
                parent=Iri(data["parent"]) if data.get("parent") else None,
                anchor=Iri(data["anchor"]) if data.get("anchor") else None,
                source=data.get("source"))
        return {"surface_form": record.surface_form, "action": record.action,
                "pending_rebuild": record.accepted}

    @app.post("/api/papers/{paper_id}/classification")
    async def post_classification(paper_id: str, request: Request):
        data = await _body(request)
        for key in ("purposes", "targets", "ai_types"):
            if not isinstance(data.get(key), list):
                raise MalformedBodyError(f"{key} must be a list")
        if "level" not in data:
            raise MalformedBodyError("level is required")
        topics = data.get("topics", [])
        if not isinstance(topics, list):
            raise MalformedBodyError("topics must be a list")
        with lock:
            record = session.classify(paper_id, topics, data["purposes"],
                                      data["targets"], data["ai_types"], data["level"])
        return {"paper_id": paper_id, "level": record.level,
                "purposes": sorted(p.value for p in record.purposes),
                "targets": sorted(t.value for t in record.targets),
                "ai_types": sorted(a.value for a in record.ai_types),
                "topics": sorted(record.topics)}

    @app.post("/api/query")
    async def post_query(request: Request):
        data = await _body(request)
        text = data.get("query")
        if not isinstance(text, str) or not text.strip():
            raise MalformedBodyError("query must be a non-empty string")
        return session.query(text).to_json_obj()

    # --- static frontend ---

    root = frontend_dir or os.environ.get("TAXOSCOPE_FRONTEND")
    if root is None:
        # editable install layout: <repo>/src/taxoscope/service.py
        guess = Path(__file__).resolve().parents[2] / "frontend"
        root = guess if (guess / "index.html").is_file() else None
    if root and Path(root).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(root), html=True), name="ui")

    return app
