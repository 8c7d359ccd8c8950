from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from banglabot.tokenizers import (TokenizerKind, bangla_tokenize, tokenize,
                                  whitespace_tokenize)


class TestWhitespace:
    def test_basic_offsets(self):
        tokens = whitespace_tokenize("ami bhalo achi")
        assert [t.text for t in tokens] == ["ami", "bhalo", "achi"]
        assert [t.start for t in tokens] == [0, 4, 10]

    def test_whitespace_runs(self):
        assert [t.text for t in whitespace_tokenize("  a  b ")] == ["a", "b"]

    def test_empty(self):
        assert whitespace_tokenize("") == []

    def test_offsets_slice_back(self):
        text = "ঢাকা theke  chittagong"
        for tok in whitespace_tokenize(text):
            assert text[tok.start:tok.end] == tok.text

    @given(st.text(max_size=60))
    @settings(max_examples=150)
    def test_rejoin_idempotent(self, text):
        tokens = [t.text for t in whitespace_tokenize(text)]
        rejoined = " ".join(tokens)
        assert [t.text for t in whitespace_tokenize(rejoined)] == tokens


class TestBangla:
    def test_danda_detached(self):
        assert [t.text for t in bangla_tokenize("আপনি কেমন আছেন।")] == \
            ["আপনি", "কেমন", "আছেন", "।"]

    def test_ascii_punctuation_detached(self):
        assert [t.text for t in bangla_tokenize("dam koto?")] == ["dam", "koto", "?"]

    def test_zero_width_stripped_offsets_preserved(self):
        tokens = bangla_tokenize("ক‌খ")
        assert len(tokens) == 1
        assert tokens[0].text == "কখ"
        assert (tokens[0].start, tokens[0].end) == (0, 3)

    def test_zero_width_only_run_skipped(self):
        assert [t.text for t in bangla_tokenize("a ‌ b")] == ["a", "b"]

    def test_double_danda(self):
        assert [t.text for t in bangla_tokenize("শেষ॥")] == ["শেষ", "॥"]

    @given(st.text(max_size=60))
    @settings(max_examples=150)
    def test_no_whitespace_or_mixed_danda_tokens(self, text):
        for tok in bangla_tokenize(text):
            assert not any(ch.isspace() for ch in tok.text)
            if any(ch in "।॥" for ch in tok.text):
                assert tok.text in ("।", "॥")

    @given(st.text(max_size=60))
    @settings(max_examples=150)
    def test_first_visible_char_matches_source(self, text):
        for tok in bangla_tokenize(text):
            assert tok.text
            visible = [ch for ch in text[tok.start:tok.end] if ch not in ("‌", "‍")]
            assert visible and visible[0] == tok.text[0]


def test_dispatch():
    assert tokenize(TokenizerKind.WHITESPACE, "ami achi")[0].text == "ami"
    assert tokenize(TokenizerKind.BANGLA_CUSTOM, "achi।")[-1].text == "।"
