import json
import os
import re
import shutil
import subprocess
import sys

import pytest

from taxoscope.project import ProjectError, Session, parse_flat_config
from taxoscope.rdf import Iri
from taxoscope.screening import funnel_counts

FIXED_NOW = "2026-08-10T12:00:00+00:00"


def run_cli(project, *args, check=True):
    env = dict(os.environ, TAXOSCOPE_NOW=FIXED_NOW)
    proc = subprocess.run([sys.executable, "-m", "taxoscope",
                           "--project", str(project), *args],
                          capture_output=True, text=True, env=env)
    if check and proc.returncode != 0:
        raise AssertionError(f"cli failed ({proc.returncode}): {proc.stderr}")
    return proc


class TestConfig:
    def test_flat_parser(self):
        data = parse_flat_config(
            '# comment\n[project]\nreviewer = "ada"\n\n[server]\nport = 9000\n'
            '[discovery]\nmin_papers = 2\nsynonym_threshold = 0.5\nflag = true\n')
        assert data["project"]["reviewer"] == "ada"
        assert data["server"]["port"] == 9000
        assert data["discovery"]["flag"] is True

    def test_session_reads_config(self, project_dir):
        session = Session(project_dir)
        assert session.config.reviewer == "fixture-reviewer"
        assert session.config.port == 8714

    def test_bad_line_rejected(self):
        with pytest.raises(ProjectError):
            parse_flat_config("what is this")


class TestSessionFlow:
    def test_screen_then_decide_then_counts(self, project_dir, oracle):
        session = Session(project_dir)
        session.screen()
        session.decide("P01", "INCLUDE")
        session.decide("P04", "EXCLUDE", "META_RESEARCH")
        stats = funnel_counts(session.state())
        assert stats.included == 1
        assert stats.candidates == oracle["stats"]["candidates"]

    def test_replay_reproduces_state(self, screened_project):
        first = Session(screened_project).state()
        again = Session(screened_project).state()  # fresh session = restart
        assert again.papers == first.papers
        assert funnel_counts(again) == funnel_counts(first)

    def test_decide_before_screen_fails(self, project_dir):
        with pytest.raises(ProjectError):
            Session(project_dir).decide("P01", "INCLUDE")

    def test_adjudication_loop_via_session(self, screened_project, oracle):
        session = Session(screened_project)
        before = funnel_counts(session.state())
        (flaky,) = session.discover()
        session.adjudicate(flaky, "accept_new",
                           parent=Iri("http://purl.org/stc/ontology#Test_technique"))
        assert [r.surface_form for r in session.pending_adjudications()] == ["flaky test"]
        session.screen()
        after = funnel_counts(session.state())
        assert after.candidates == before.candidates + len(oracle["flaky_test_papers"])
        assert session.pending_adjudications() == []

    def test_classify_requires_include(self, screened_project):
        from taxoscope.classify import NotIncludedError

        session = Session(screened_project)
        with pytest.raises(NotIncludedError):
            session.classify("P06", [], ["Understand"], ["test case"], ["Symbolic_AI"], 1)

    def test_knowledge_base_holds_punned_terms_and_classifications(self, screened_project):
        session = Session(screened_project)
        session.classify("P01", ["t"], ["Improve"], ["regression testing"],
                         ["Deep_learning"], 3)
        kb = session.knowledge_base()
        table = session.query("PREFIX ai4st: <http://purl.org/ai4st/ontology#>\n"
                              "SELECT ?t WHERE { ?p ai4st:hasTarget ?t . }")
        assert len(table.rows) == 1
        assert len(kb.match(None, Iri("http://purl.org/ai4st/ontology#hasParent"),
                            None)) == 11


class TestCli:
    def test_full_walkthrough_matches_oracle(self, project_dir, oracle, fixtures_dir):
        run_cli(project_dir, "screen")
        for pid in ("P01", "P02", "P03"):
            run_cli(project_dir, "decide", pid, "--include")
        run_cli(project_dir, "decide", "P04", "--exclude", "META_RESEARCH")
        run_cli(project_dir, "decide", "P05", "--exclude", "META_RESEARCH", "--override")
        proc = run_cli(project_dir, "report", "funnel")
        numbers = [int(m.group(1)) for m in
                   re.finditer(r"\|\s+(\d+)\s+\|$", proc.stdout, re.MULTILINE)]
        want = oracle["stats"]
        assert numbers[:8] == [
            want["total"], want["with_st_term"], want["with_exactly_one_st_term"],
            want["with_variation"], want["with_exactly_one_variation"],
            want["candidates"], want["ai_candidates"], want["included"]]
        # snapshot exports land next to the markdown
        snapshot = json.loads((project_dir / "reports" / "funnel.json").read_text())
        assert snapshot["stats"] == want
        csv_lines = (project_dir / "reports" / "funnel.csv").read_text().splitlines()
        assert len(csv_lines) == 9

    def test_screen_with_explicit_ontology_flags(self, project_dir, fixtures_dir):
        proc = run_cli(project_dir, "screen",
                       "--st-ontology", str(fixtures_dir / "stc.ttl"),
                       "--ai-ontology", str(fixtures_dir / "ai_types.ttl"))
        assert "9 candidates" in proc.stdout
        # later commands reuse the paths recorded in the snapshot
        proc = run_cli(project_dir, "discover")
        assert "flaky test" in proc.stdout

    def test_ingest_bibtex_and_csv(self, project_dir, tmp_path):
        bib = tmp_path / "extra.bib"
        bib.write_text("@article{extra1, title={Brand New Study}, year={2024}}")
        proc = run_cli(project_dir, "ingest", "--format", "bibtex", str(bib))
        assert "21 records" in proc.stdout
        table = tmp_path / "extra.csv"
        table.write_text("title,year\nYet Another Study,2023\n")
        proc = run_cli(project_dir, "ingest", "--format", "csv", str(table))
        assert "22 records" in proc.stdout

    def test_query_one_id_per_line(self, screened_project, fixtures_dir):
        session = Session(screened_project)
        session.classify("P01", [], ["Improve"], ["test case"], ["Deep_learning"], 2)
        session.classify("P02", [], ["Generate"], ["unit-level test"], ["Deep_learning"], 3)
        proc = run_cli(screened_project, "query", "--file",
                       str(fixtures_dir / "query_level_options.rq"))
        lines = proc.stdout.strip().splitlines()
        assert lines == ["http://purl.org/ai4st/papers#P01"]

    def test_query_csv_flag(self, screened_project, fixtures_dir):
        session = Session(screened_project)
        session.classify("P01", [], ["Improve"], ["test case"], ["Deep_learning"], 2)
        proc = run_cli(screened_project, "query", "--file",
                       str(fixtures_dir / "query_distinct_targets.rq"), "--csv")
        lines = proc.stdout.strip().splitlines()
        assert lines[0] == "target"
        assert lines[1:] == ["http://purl.org/stc/ontology#Test_case"]

    def test_pun_subcommand(self, project_dir, fixtures_dir, tmp_path):
        out = tmp_path / "punned.ttl"
        run_cli(project_dir, "pun", "--in", str(fixtures_dir / "stc.ttl"),
                "--out", str(out))
        from taxoscope.turtle import parse_turtle

        g = parse_turtle(out.read_text())
        assert len(g) == 23

    def test_discover_json(self, screened_project):
        proc = run_cli(screened_project, "discover", "--json")
        data = json.loads(proc.stdout)
        assert [c["surface_form"] for c in data] == ["flaky test"]

    def test_exit_codes(self, project_dir):
        proc = run_cli(project_dir, "no-such-command", check=False)
        assert proc.returncode == 2
        proc = run_cli(project_dir, "decide", "P01", "--include", check=False)
        assert proc.returncode == 1  # no screen snapshot yet -> domain error
        assert "error:" in proc.stderr
        proc = run_cli(project_dir, "decide", "P01", check=False)
        assert proc.returncode == 2  # neither --include nor --exclude

    def test_decide_other_requires_note(self, screened_project):
        proc = run_cli(screened_project, "decide", "P13", "--exclude", "OTHER",
                       check=False)
        assert proc.returncode == 1
        proc = run_cli(screened_project, "decide", "P13", "--exclude", "OTHER",
                       "--note", "paywalled appendix")
        assert proc.returncode == 0


class TestCliHttpEquivalence:
    def test_decision_logs_byte_identical(self, screened_project, tmp_path):
        from fastapi.testclient import TestClient

        from taxoscope.service import create_app

        cli_root = tmp_path / "via-cli"
        http_root = tmp_path / "via-http"
        shutil.copytree(screened_project, cli_root)
        shutil.copytree(screened_project, http_root)

        run_cli(cli_root, "decide", "P13", "--include")
        run_cli(cli_root, "classify", "P13", "--purpose", "Generate",
                "--target", "test case", "--ai-type", "GenerativeAI", "--level", "2",
                "--topic", "test generation")

        os.environ["TAXOSCOPE_NOW"] = FIXED_NOW
        try:
            client = TestClient(create_app(Session(http_root)))
            r = client.post("/api/papers/P13/decision", json={"verdict": "INCLUDE"})
            assert r.status_code == 200
            r = client.post("/api/papers/P13/classification",
                            json={"purposes": ["Generate"], "targets": ["test case"],
                                  "ai_types": ["GenerativeAI"], "level": 2,
                                  "topics": ["test generation"]})
            assert r.status_code == 200
        finally:
            del os.environ["TAXOSCOPE_NOW"]

        for name in ("decisions.jsonl", "classifications.jsonl"):
            assert (cli_root / name).read_bytes() == (http_root / name).read_bytes()

    def test_service_restart_replays_to_same_funnel(self, screened_project):
        from fastapi.testclient import TestClient

        from taxoscope.service import create_app

        client = TestClient(create_app(Session(screened_project)))
        client.post("/api/papers/P13/decision", json={"verdict": "INCLUDE"})
        before = client.get("/api/funnel").json()

        restarted = TestClient(create_app(Session(screened_project)))
        after = restarted.get("/api/funnel").json()
        assert after["stats"] == before["stats"]
