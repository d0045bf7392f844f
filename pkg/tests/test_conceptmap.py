import random

from hypothesis import given, settings
from hypothesis import strategies as st

from taxoscope.conceptmap import (Category, ConceptMap, MapEntry, TermHit, TextField,
                                  derive_concept_map, export_csv, generate_variations,
                                  import_csv, match_text, normalize,
                                  normalize_with_offsets)
from taxoscope.ns import STC
from taxoscope.ontology import Concept, Taxonomy
from taxoscope.rdf import Iri


def stc_iri(local):
    return Iri(STC + local)


class TestNormalize:
    def test_hyphens_separate(self):
        assert normalize("Unit-Level Test") == ("unit", "level", "test")

    def test_empty(self):
        assert normalize("") == ()

    def test_mixed_punctuation(self):
        assert normalize("AI-Driven Web API Testing") == ("ai", "driven", "web", "api", "testing")
        assert normalize("testing; debugging, and (more)!") == ("testing", "debugging", "and", "more")

    def test_offsets_point_into_original(self):
        text = "Unit-Level Test"
        for token, start, end in normalize_with_offsets(text):
            assert text[start:end].casefold() == token

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=40))
    def test_idempotence(self, text):
        once = normalize(text)
        assert normalize(" ".join(once)) == once


class TestVariations:
    def test_unit_level_test_yields_unit_test(self):
        assert "unit test" in generate_variations("unit-level test")

    def test_plural_toggle(self):
        assert "test cases" in generate_variations("test case")

    def test_single_token(self):
        assert generate_variations("x") == frozenset({"xs"})

    def test_original_excluded(self):
        assert "test case" not in generate_variations("test case")

    def test_strip_trailing_s(self):
        assert "evolutionary algorithm" in generate_variations("evolutionary algorithms")

    def test_based_spacing(self):
        variations = generate_variations("model-based testing")
        assert "model based testings" in variations  # composition of (d) and (b)

    def test_rules_pluggable(self):
        assert generate_variations("unit-level test", rules=()) == frozenset()


class TestDeriveMap:
    def test_fixture_entries(self, stc_taxonomy, st_map):
        unit = stc_iri("Unit-level_test")
        by_form = {(e.form, e.concept): e.category for e in st_map.entries}
        assert by_form[("unit", "level", "test"), unit] is Category.EXACT
        assert by_form[("unit", "test"), unit] is Category.VARIATION
        assert by_form[("automated", "testing"), stc_iri("Test_automation")] is Category.SYNONYM

    def test_synonym_entry_after_extension(self, stc_taxonomy):
        from taxoscope.ontology import extend_taxonomy
        from taxoscope.screening import AdjudicationRecord

        extended = extend_taxonomy(
            stc_taxonomy, AdjudicationRecord("test architecture", "accept_synonym",
                                             anchor=stc_iri("Test_approach")))
        cmap = derive_concept_map(extended)
        entries = {(e.form, e.category) for e in cmap.entries
                   if e.concept == stc_iri("Test_approach")}
        assert (("test", "architecture"), Category.SYNONYM) in entries

    def test_empty_taxonomy_empty_map(self):
        cmap = derive_concept_map(Taxonomy.build([]))
        assert len(cmap) == 0

    def test_precedence_exact_over_variation(self):
        # two concepts whose label/variation collide on the same form
        a = Concept(stc_iri("Unit_test"), "unit test")
        b = Concept(stc_iri("Unit-level_test"), "unit-level test")
        cmap = derive_concept_map(Taxonomy.build([a, b]))
        categories = {e.concept: e.category for e in cmap.entries
                      if e.form == ("unit", "test")}
        assert categories[a.iri] is Category.EXACT
        assert categories[b.iri] is Category.VARIATION


class TestMatch:
    def test_title_variation_hit(self, st_map):
        hits = match_text(st_map, "Automated unit test generation", "")
        assert TermHit(stc_iri("Unit-level_test"), Category.VARIATION, "unit test",
                       TextField.TITLE, 1, 3) in hits

    def test_empty_text_no_hits(self, st_map):
        assert match_text(st_map, "", "") == frozenset()
        assert match_text(st_map, "", None) == frozenset()

    def test_two_concepts_in_abstract(self, st_map):
        hits = match_text(st_map, "", "regression testing of test cases")
        concepts = {h.concept for h in hits}
        assert concepts == {stc_iri("Regression_testing"), stc_iri("Test_case")}
        categories = {h.concept: h.category for h in hits}
        assert categories[stc_iri("Test_case")] is Category.VARIATION

    def test_longest_match_suppresses_inner(self, ai_map):
        hits = match_text(ai_map, "classical machine learning", "")
        assert len(hits) == 1
        (hit,) = hits
        assert hit.matched_form == "classical machine learning"

    def test_determinism(self, st_map, corp20):
        for record in corp20.records.values():
            assert match_text(st_map, record.title, record.abstract) == \
                match_text(st_map, record.title, record.abstract)

    def test_soundness_hits_occur_at_span(self, st_map, ai_map, corp20):
        forms = {e.form for e in st_map.entries} | {e.form for e in ai_map.entries}
        for record in corp20.records.values():
            for cmap in (st_map, ai_map):
                for hit in match_text(cmap, record.title, record.abstract):
                    text = record.title if hit.field is TextField.TITLE else record.abstract
                    tokens = normalize(text or "")
                    assert tuple(hit.matched_form.split(" ")) in forms
                    assert tokens[hit.start:hit.end] == tuple(hit.matched_form.split(" "))

    def test_monotonicity_non_overlapping_hits_survive(self, stc_taxonomy):
        """Adding a map entry never removes hits whose spans stay clear of
        the new form's occurrences."""
        rng = random.Random(42)
        base = derive_concept_map(stc_taxonomy)
        vocabulary = ["alpha", "beta", "test", "case", "unit", "level", "regression",
                      "testing", "gamma", "delta"]
        new_form = ("gamma", "delta")
        extended = ConceptMap(list(base.entries)
                              + [MapEntry(new_form, stc_iri("Test_case"), Category.SYNONYM)],
                              base.ontology_version)
        for _ in range(60):
            words = [rng.choice(vocabulary) for _ in range(rng.randint(0, 25))]
            text = " ".join(words)
            before = match_text(base, text, "")
            after = match_text(extended, text, "")
            occurrences = [i for i in range(len(words) - 1)
                           if tuple(words[i:i + 2]) == new_form]
            for hit in before:
                overlaps = any(not (hit.end <= i or i + 2 <= hit.start) for i in occurrences)
                if not overlaps:
                    assert hit in after


class TestCsv:
    def test_round_trip(self, st_map):
        text = export_csv(st_map)
        again = import_csv(text, st_map.ontology_version)
        assert again == st_map

    def test_header_row(self, st_map):
        assert export_csv(st_map).splitlines()[0] == "surface_form,concept_iri,category"
