from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banglabot.corpus import EntitySpan
from banglabot.joint_model import IntentRanking
from banglabot.postprocess import (FallbackConfig, SynonymTable, apply_fallback,
                                   map_synonyms)


class TestSynonyms:
    def test_casefold_lookup(self):
        table = SynonymTable.build({"dhaka": "DAC"})
        spans = [EntitySpan(0, 5, "city", "Dhaka")]
        assert map_synonyms(spans, table)[0].value == "DAC"

    def test_absent_value_unchanged(self):
        table = SynonymTable.build({"dhaka": "DAC"})
        spans = [EntitySpan(0, 3, "city", "ctg")]
        assert map_synonyms(spans, table)[0].value == "ctg"

    def test_empty_list(self):
        assert map_synonyms([], SynonymTable.build({})) == []

    def test_spans_and_types_untouched(self):
        table = SynonymTable.build({"dhaka": "DAC"})
        out = map_synonyms([EntitySpan(3, 8, "city", "dhaka")], table)[0]
        assert (out.start, out.end, out.entity) == (3, 8, "city")

    def test_canonicals_are_fixed_points(self):
        table = SynonymTable.build({"dhk": "ঢাকা", "dhaka": "ঢাকা"})
        assert table.canonical("ঢাকা") == "ঢাকা"

    @given(st.dictionaries(st.text(min_size=1, max_size=6), st.text(min_size=1, max_size=6),
                           max_size=6),
           st.lists(st.text(min_size=1, max_size=8), max_size=6))
    @settings(max_examples=120)
    def test_idempotent(self, pairs, values):
        table = SynonymTable.build(pairs)
        spans = [EntitySpan(0, max(1, len(v)), "t", v) for v in values]
        once = map_synonyms(spans, table)
        twice = map_synonyms(once, table)
        assert once == twice


def ranking(*pairs):
    return IntentRanking([(name, conf) for name, conf in pairs])


class TestFallback:
    def test_confident_unambiguous_passes_through(self):
        r, reason = apply_fallback(ranking(("greet", 0.55), ("bye", 0.20)), FallbackConfig())
        assert reason is None
        assert r.ranked[0] == ("greet", 0.55)

    def test_low_confidence_falls_back(self):
        r, reason = apply_fallback(ranking(("greet", 0.25), ("bye", 0.10)), FallbackConfig())
        assert reason == "threshold"
        assert r.ranked[0] == ("nlu_fallback", 0.25)

    def test_ambiguous_falls_back(self):
        r, reason = apply_fallback(ranking(("greet", 0.40), ("bye", 0.35)), FallbackConfig())
        assert reason == "ambiguity"
        assert r.ranked[0] == ("nlu_fallback", 0.40)

    def test_original_order_preserved_after_fallback(self):
        r, _ = apply_fallback(ranking(("a", 0.22), ("b", 0.2), ("c", 0.1)), FallbackConfig())
        assert [n for n, _ in r.ranked] == ["nlu_fallback", "a", "b", "c"]

    def test_single_intent_no_ambiguity_rule(self):
        r, reason = apply_fallback(ranking(("a", 0.9)), FallbackConfig())
        assert reason is None

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=6))
    @settings(max_examples=150)
    def test_zero_thresholds_are_identity(self, confidences):
        confidences = sorted(confidences, reverse=True)
        r = ranking(*[(f"i{k}", c) for k, c in enumerate(confidences)])
        out, reason = apply_fallback(r, FallbackConfig(threshold=0.0, ambiguity_threshold=0.0))
        assert reason is None and out.ranked == r.ranked

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            FallbackConfig(threshold=1.5)
