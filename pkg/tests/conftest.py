import json
import shutil
from pathlib import Path

import pytest

from taxoscope.conceptmap import derive_concept_map
from taxoscope.corpus import load_jsonl
from taxoscope.ontology import load_taxonomy
from taxoscope.screening import decision_from_json, record_decision, run_prescreen
from taxoscope.turtle import parse_turtle

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def stc_graph():
    return parse_turtle((FIXTURES / "stc.ttl").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def ai_graph():
    return parse_turtle((FIXTURES / "ai_types.ttl").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def stc_taxonomy(stc_graph):
    return load_taxonomy(stc_graph)


@pytest.fixture(scope="session")
def ai_taxonomy(ai_graph):
    return load_taxonomy(ai_graph)


@pytest.fixture(scope="session")
def st_map(stc_taxonomy):
    return derive_concept_map(stc_taxonomy)


@pytest.fixture(scope="session")
def ai_map(ai_taxonomy):
    return derive_concept_map(ai_taxonomy)


@pytest.fixture(scope="session")
def corp20():
    return load_jsonl(FIXTURES / "corp20.jsonl")


@pytest.fixture(scope="session")
def oracle():
    return json.loads((FIXTURES / "corp20_oracle.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def prescreened(corp20, st_map, ai_map):
    """CORP-20 state before any decision."""
    return run_prescreen(corp20, st_map, ai_map)


@pytest.fixture(scope="session")
def decided(prescreened):
    """CORP-20 state with the five fixture decisions replayed."""
    state = prescreened
    for line in (FIXTURES / "corp20_decisions.jsonl").read_text().splitlines():
        paper_id, decision, override = decision_from_json(json.loads(line))
        state = record_decision(state, paper_id, decision, override)
    return state


@pytest.fixture()
def project_dir(tmp_path) -> Path:
    """A ready-to-run project: config + ontologies + corpus, nothing screened."""
    root = tmp_path / "project"
    (root / "ontologies").mkdir(parents=True)
    shutil.copy(FIXTURES / "stc.ttl", root / "ontologies" / "stc.ttl")
    shutil.copy(FIXTURES / "ai_types.ttl", root / "ontologies" / "ai_types.ttl")
    shutil.copy(FIXTURES / "corp20.jsonl", root / "corpus.jsonl")
    (root / "taxoscope.toml").write_text(
        '[project]\nreviewer = "fixture-reviewer"\n\n'
        '[ontology]\nst = "ontologies/stc.ttl"\nai = "ontologies/ai_types.ttl"\n\n'
        '[server]\nport = 8714\n\n'
        '[discovery]\nmin_papers = 3\n',
        encoding="utf-8")
    return root


@pytest.fixture()
def screened_project(project_dir) -> Path:
    """Project with the screen snapshot and the five fixture decisions."""
    from taxoscope.project import Session

    session = Session(project_dir)
    session.screen()
    shutil.copy(FIXTURES / "corp20_decisions.jsonl", project_dir / "decisions.jsonl")
    return project_dir
