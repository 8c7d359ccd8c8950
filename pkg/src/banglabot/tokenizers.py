"""Offset-bearing tokenizers: plain whitespace and the Bangla-aware variant.

The Bangla tokenizer additionally detaches punctuation (ASCII plus the danda
and double danda) into separate tokens and drops zero-width joiners from
token text while keeping the original character span, so downstream entity
offsets still point into the raw message.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum

DANDA = "।"
DOUBLE_DANDA = "॥"
ZERO_WIDTH = ("‌", "‍")  # ZWNJ, ZWJ

_PUNCT = set(string.punctuation) | {DANDA, DOUBLE_DANDA}


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


class TokenizerKind(str, Enum):
    WHITESPACE = "whitespace"
    BANGLA_CUSTOM = "bangla_custom"


def whitespace_tokenize(text: str) -> list[Token]:
    """Maximal runs of non-whitespace characters, with code-point offsets."""
    tokens: list[Token] = []
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                tokens.append(Token(text[start:i], start, i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        tokens.append(Token(text[start:], start, len(text)))
    return tokens


def bangla_tokenize(text: str) -> list[Token]:
    """Whitespace split plus punctuation/danda detachment and ZWJ/ZWNJ stripping."""
    tokens: list[Token] = []

    def flush(start: int, end: int) -> None:
        if start >= end:
            return
        raw = text[start:end]
        visible = "".join(ch for ch in raw if ch not in ZERO_WIDTH)
        if visible:
            tokens.append(Token(visible, start, end))

    run_start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if run_start is not None:
                flush(run_start, i)
                run_start = None
        elif ch in _PUNCT:
            if run_start is not None:
                flush(run_start, i)
                run_start = None
            tokens.append(Token(ch, i, i + 1))
        elif run_start is None:
            run_start = i
    if run_start is not None:
        flush(run_start, len(text))
    return tokens


def tokenize(kind: TokenizerKind, text: str) -> list[Token]:
    if kind is TokenizerKind.WHITESPACE:
        return whitespace_tokenize(text)
    if kind is TokenizerKind.BANGLA_CUSTOM:
        return bangla_tokenize(text)
    raise ValueError(f"unknown tokenizer kind: {kind!r}")
