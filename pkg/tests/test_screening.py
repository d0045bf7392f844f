import json

import pytest

from taxoscope.conceptmap import derive_concept_map
from taxoscope.corpus import Corpus, PaperRecord
from taxoscope.ns import STC
from taxoscope.ontology import Concept, Taxonomy, extend_taxonomy
from taxoscope.rdf import Iri
from taxoscope.screening import (CandidateKind, Decision,
                                 DecisionReason, DiscoveryConfig, FunnelStats,
                                 ScreeningError, StageViolationError, StaleMapError,
                                 UnknownPaperError, Verdict, adjudicate_candidate,
                                 decision_from_json, discover_candidates, funnel_counts,
                                 is_ai_candidate, is_candidate, is_included,
                                 is_st_related, is_variation_related, record_decision,
                                 run_prescreen, single_term_breakdown, st_concepts,
                                 stages_of, state_from_json, state_to_json,
                                 token_overlap)


def stc_iri(local):
    return Iri(STC + local)


def make_decision(verdict=Verdict.INCLUDE, reason=DecisionReason.PEER_REVIEWED_ORIGINAL,
                  note=None, ts="2026-08-01T00:00:00+00:00"):
    return Decision(verdict, reason, "tester", ts, note)


class TestPrescreenOracle:
    """CORP-20 against the hand-computed membership table."""

    def test_stage_memberships(self, prescreened, oracle):
        predicates = {"st-related": is_st_related, "variation-related": is_variation_related,
                      "candidate": is_candidate, "ai-candidate": is_ai_candidate}
        for stage, predicate in predicates.items():
            got = sorted(pid for pid, s in prescreened.papers.items() if predicate(s))
            assert got == oracle["stages"][stage], stage

    def test_per_paper_concepts(self, prescreened, oracle):
        for pid, screen in prescreened.papers.items():
            got = sorted(c.value.rsplit("#", 1)[-1] for c in st_concepts(screen))
            assert got == oracle["st_concepts"][pid], pid

    def test_ai_hits(self, prescreened, oracle):
        got = sorted(pid for pid, s in prescreened.papers.items() if s.ai_hits)
        assert got == oracle["papers_with_ai_hit"]

    def test_empty_corpus_all_zero(self, st_map, ai_map):
        stats = funnel_counts(run_prescreen(Corpus({}), st_map, ai_map))
        assert stats == FunnelStats(0, 0, 0, 0, 0, 0, 0, 0)

    def test_single_exact_term_is_st_related_not_candidate(self, st_map, ai_map):
        corpus = Corpus({"solo": PaperRecord(id="solo", title="About the test oracle")})
        state = run_prescreen(corpus, st_map, ai_map)
        screen = state.papers["solo"]
        assert is_st_related(screen) and not is_candidate(screen)

    def test_determinism_byte_identical(self, corp20, st_map, ai_map):
        a = state_to_json(run_prescreen(corp20, st_map, ai_map))
        b = state_to_json(run_prescreen(corp20, st_map, ai_map))
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_state_round_trip(self, prescreened):
        again = state_from_json(state_to_json(prescreened))
        assert again.papers == prescreened.papers
        assert again.ontology_version == prescreened.ontology_version

    def test_stale_map_error(self, corp20, st_map, ai_map):
        with pytest.raises(StaleMapError):
            run_prescreen(corp20, st_map, ai_map, expected_version="somethingelse")


class TestFunnelCounts:
    def test_oracle_stats(self, decided, oracle):
        stats = funnel_counts(decided)
        assert {k: getattr(stats, k) for k in oracle["stats"]} == oracle["stats"]

    def test_breakdown_both_readings(self, decided, oracle):
        assert single_term_breakdown(decided) == oracle["breakdown"]

    def test_no_decisions_included_zero(self, prescreened):
        assert funnel_counts(prescreened).included == 0

    def test_paper_scale_shape(self):
        # the published funnel satisfies every FunnelStats invariant
        stats = FunnelStats(total=1643, with_st_term=1150, with_exactly_one_st_term=735,
                            with_variation=1337, with_exactly_one_variation=460,
                            candidates=949, ai_candidates=656, included=38)
        assert stats.included <= stats.ai_candidates <= stats.candidates <= stats.total

    def test_ordering_violations_rejected(self):
        with pytest.raises(ScreeningError):
            FunnelStats(total=10, with_st_term=5, with_exactly_one_st_term=3,
                        with_variation=4, with_exactly_one_variation=2,
                        candidates=3, ai_candidates=4, included=0)


class TestDecisions:
    def test_include_increments(self, prescreened):
        state = record_decision(prescreened, "P13", make_decision())
        assert funnel_counts(state).included == funnel_counts(prescreened).included + 1
        assert is_included(state.papers["P13"])

    def test_exclude_with_reason(self, prescreened):
        decision = make_decision(Verdict.EXCLUDE, DecisionReason.META_RESEARCH)
        state = record_decision(prescreened, "P04", decision)
        assert state.papers["P04"].decision.reason is DecisionReason.META_RESEARCH
        assert "excluded" in stages_of(state.papers["P04"])

    def test_unknown_paper(self, prescreened):
        with pytest.raises(UnknownPaperError):
            record_decision(prescreened, "P99", make_decision())

    def test_include_requires_ai_candidate(self, prescreened):
        with pytest.raises(StageViolationError):
            record_decision(prescreened, "P06", make_decision())
        # P05 is a plain candidate: INCLUDE stays forbidden even with override
        with pytest.raises(StageViolationError):
            record_decision(prescreened, "P05", make_decision(), override=True)

    def test_exclude_plain_candidate_needs_override(self, prescreened):
        decision = make_decision(Verdict.EXCLUDE, DecisionReason.META_RESEARCH)
        with pytest.raises(StageViolationError):
            record_decision(prescreened, "P05", decision)
        state = record_decision(prescreened, "P05", decision, override=True)
        assert state.papers["P05"].decision is decision

    def test_rerecord_overwrites_latest_wins(self, prescreened):
        first = make_decision(Verdict.EXCLUDE, DecisionReason.NOT_AVAILABLE,
                              ts="2026-08-01T00:00:00+00:00")
        second = make_decision(ts="2026-08-02T00:00:00+00:00")
        state = record_decision(prescreened, "P13", first)
        state = record_decision(state, "P13", second)
        assert state.papers["P13"].decision is second
        assert len(state.audit) == 2

    def test_decision_invariants(self):
        with pytest.raises(ScreeningError):
            Decision(Verdict.INCLUDE, DecisionReason.META_RESEARCH, "r", "t")
        with pytest.raises(ScreeningError):
            Decision(Verdict.EXCLUDE, DecisionReason.PEER_REVIEWED_ORIGINAL, "r", "t")
        with pytest.raises(ScreeningError):
            Decision(Verdict.EXCLUDE, DecisionReason.OTHER, "r", "t")  # note required
        ok = Decision(Verdict.EXCLUDE, DecisionReason.OTHER, "r", "t", note="why not")
        assert ok.note == "why not"

    def test_json_round_trip(self):
        from taxoscope.screening import decision_to_json

        decision = make_decision(Verdict.EXCLUDE, DecisionReason.ST_FOR_AI)
        pid, again, override = decision_from_json(decision_to_json("P04", decision, True))
        assert (pid, again, override) == ("P04", decision, True)


class TestDiscovery:
    def test_flaky_test_found_in_corp20(self, prescreened, corp20, stc_taxonomy, oracle):
        candidates = discover_candidates(prescreened, corp20, stc_taxonomy)
        assert [c.surface_form for c in candidates] == ["flaky test"]
        (flaky,) = candidates
        assert flaky.frequency == 4
        assert list(flaky.example_paper_ids) == oracle["flaky_test_papers"]
        # max overlap against FIX-STC labels is 1/3 ("test X" labels), so
        # the kind lands between the two cut points
        assert flaky.kind is CandidateKind.EITHER

    def test_flaky_test_new_term_without_two_token_test_labels(self):
        """With labels overlapping 'flaky test' by at most 1/4, the kind is
        NEW_TERM."""
        taxonomy = Taxonomy.build([
            Concept(stc_iri("Software_testing"), "software testing"),
            Concept(stc_iri("Regression_testing"), "regression testing",
                    parents=frozenset({stc_iri("Software_testing")})),
            Concept(stc_iri("Unit-level_test"), "unit-level test",
                    parents=frozenset({stc_iri("Software_testing")})),
        ])
        papers = {}
        for i in range(4):
            papers[f"F{i}"] = PaperRecord(
                id=f"F{i}", title=f"Study {i} of software testing",
                abstract="We measure the flaky test rate in builds.")
        corpus = Corpus(papers)
        st_map = derive_concept_map(taxonomy)
        state = run_prescreen(corpus, st_map, derive_concept_map(Taxonomy.build([
            Concept(Iri("urn:ai:AI"), "never matching ai label")])))
        candidates = discover_candidates(state, corpus, taxonomy)
        flaky = next(c for c in candidates if c.surface_form == "flaky test")
        assert flaky.similarity == pytest.approx(1 / 4)
        assert flaky.kind is CandidateKind.NEW_TERM

    def test_unit_test_similarity_synonym(self, stc_taxonomy):
        """Planted "unit test" scored against label "unit-level test" is
        2/3, hence SYNONYM — reproducible with variation rules off (with
        the default rules "unit test" is already a map form)."""
        assert token_overlap(("unit", "test"), ("unit", "level", "test")) == \
            pytest.approx(2 / 3)
        papers = {f"U{i}": PaperRecord(id=f"U{i}", title="About the test oracle",
                                       abstract="We rely on a unit test per method.")
                  for i in range(3)}
        corpus = Corpus(papers)
        config = DiscoveryConfig(rules=())
        st_map = derive_concept_map(stc_taxonomy, rules=())
        ai_map = derive_concept_map(Taxonomy.build([
            Concept(Iri("urn:ai:AI"), "never matching ai label")]))
        state = run_prescreen(corpus, st_map, ai_map)
        candidates = discover_candidates(state, corpus, stc_taxonomy, config)
        unit = next(c for c in candidates if c.surface_form == "unit test")
        assert unit.kind is CandidateKind.SYNONYM
        assert unit.nearest_concept == stc_iri("Unit-level_test")

    def test_threshold_filters(self, prescreened, corp20, stc_taxonomy):
        config = DiscoveryConfig(min_papers=5)
        assert discover_candidates(prescreened, corp20, stc_taxonomy, config) == []

    def test_nothing_to_find(self, st_map, ai_map, stc_taxonomy):
        corpus = Corpus({"a": PaperRecord(id="a", title="Entirely unrelated work",
                                          abstract="Nothing here at all.")})
        state = run_prescreen(corpus, st_map, ai_map)
        assert discover_candidates(state, corpus, stc_taxonomy) == []

    def test_existing_map_forms_excluded(self, prescreened, corp20, stc_taxonomy):
        for candidate in discover_candidates(prescreened, corp20, stc_taxonomy,
                                             DiscoveryConfig(min_papers=1)):
            cmap = derive_concept_map(stc_taxonomy)
            assert tuple(candidate.surface_form.split(" ")) not in {e.form for e in cmap.entries}


class TestAdjudication:
    def make_candidate(self, prescreened, corp20, stc_taxonomy):
        return discover_candidates(prescreened, corp20, stc_taxonomy)[0]

    def test_accept_new_consumable(self, prescreened, corp20, stc_taxonomy):
        candidate = self.make_candidate(prescreened, corp20, stc_taxonomy)
        record = adjudicate_candidate(candidate, "accept_new", "tester", stc_taxonomy,
                                      parent=stc_iri("Test_technique"))
        extended = extend_taxonomy(stc_taxonomy, record)
        assert len(extended.concepts) == len(stc_taxonomy.concepts) + 1

    def test_accept_synonym_consumable(self, prescreened, corp20, stc_taxonomy):
        candidate = self.make_candidate(prescreened, corp20, stc_taxonomy)
        record = adjudicate_candidate(candidate, "accept_synonym", "tester", stc_taxonomy,
                                      anchor=stc_iri("Test_case"))
        extended = extend_taxonomy(stc_taxonomy, record)
        assert "flaky test" in extended.concepts[stc_iri("Test_case")].synonyms

    def test_reject_touches_nothing(self, prescreened, corp20, stc_taxonomy):
        candidate = self.make_candidate(prescreened, corp20, stc_taxonomy)
        record = adjudicate_candidate(candidate, "reject", "tester", stc_taxonomy)
        assert not record.accepted

    def test_unknown_parent_or_anchor(self, prescreened, corp20, stc_taxonomy):
        from taxoscope.ontology import UnknownAnchorError

        candidate = self.make_candidate(prescreened, corp20, stc_taxonomy)
        with pytest.raises(UnknownAnchorError):
            adjudicate_candidate(candidate, "accept_new", "tester", stc_taxonomy,
                                 parent=stc_iri("Ghost"))
        with pytest.raises(UnknownAnchorError):
            adjudicate_candidate(candidate, "accept_synonym", "tester", stc_taxonomy,
                                 anchor=stc_iri("Ghost"))


class TestLoopSoundness:
    def test_accepted_synonym_reflects_in_next_screen(self, prescreened, corp20,
                                                      stc_taxonomy, ai_map):
        candidates = discover_candidates(prescreened, corp20, stc_taxonomy)
        record = adjudicate_candidate(candidates[0], "accept_synonym", "tester",
                                      stc_taxonomy, anchor=stc_iri("Test_case"))
        extended = extend_taxonomy(stc_taxonomy, record)
        rescreened = run_prescreen(corp20, derive_concept_map(extended), ai_map)
        for pid in candidates[0].example_paper_ids:
            gained = st_concepts(rescreened.papers[pid]) - st_concepts(prescreened.papers[pid])
            assert stc_iri("Test_case") in gained or \
                stc_iri("Test_case") in st_concepts(prescreened.papers[pid])
            assert set(stages_of(prescreened.papers[pid])) <= \
                set(stages_of(rescreened.papers[pid]))
