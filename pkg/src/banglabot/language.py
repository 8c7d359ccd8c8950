"""Script-based language detection and pluggable transliteration.

Incoming messages are either Bangla script, Latin-script transliteration,
or neither; detection counts alphabetic code points in the Bangla block
(U+0980-U+09FF) against the rest.  Latin messages are routed through a
transliteration client before NLU; the identity stub keeps things exact
offline, while the rule table gives the Latin path observable behavior.
"""

from __future__ import annotations

from dataclasses import dataclass

BANGLA_BLOCK = ("ঀ", "৿")


class TransliterationFailure(Exception):
    pass


@dataclass(frozen=True)
class LanguageTag:
    kind: str            # "bangla" | "latin" | "other"
    bangla_ratio: float  # share of alphabetic code points in the Bangla block

    BANGLA = "bangla"
    LATIN = "latin"
    OTHER = "other"


def detect_language(text: str) -> LanguageTag:
    alphabetic = 0
    bangla = 0
    for ch in text:
        if ch.isalpha():
            alphabetic += 1
            if BANGLA_BLOCK[0] <= ch <= BANGLA_BLOCK[1]:
                bangla += 1
    if alphabetic == 0:
        return LanguageTag(LanguageTag.OTHER, 0.0)
    ratio = bangla / alphabetic
    kind = LanguageTag.BANGLA if ratio >= 0.5 else LanguageTag.LATIN
    return LanguageTag(kind, ratio)


class TransliterationClient:
    """Maps Latin-script transliteration back toward Bangla script."""

    def transliterate(self, text: str) -> str:
        raise NotImplementedError


class IdentityStub(TransliterationClient):
    """No-op client: the NLU pipeline is trained on both scripts anyway."""

    def transliterate(self, text: str) -> str:
        return text


# Longest-match-first digraph table; unmapped characters pass through.
_DEFAULT_RULES = {
    "kh": "খ", "gh": "ঘ", "ch": "চ", "jh": "ঝ", "th": "থ", "dh": "ধ",
    "ph": "ফ", "bh": "ভ", "sh": "শ", "aa": "আ", "ee": "ঈ", "oo": "ঊ",
    "oi": "ঐ", "ou": "ঔ",
    "a": "আ", "b": "ব", "c": "ক", "d": "দ", "e": "এ", "f": "ফ", "g": "গ",
    "h": "হ", "i": "ই", "j": "জ", "k": "ক", "l": "ল", "m": "ম", "n": "ন",
    "o": "ও", "p": "প", "q": "ক", "r": "র", "s": "স", "t": "ত", "u": "উ",
    "v": "ভ", "w": "ও", "x": "ক্স", "y": "য়", "z": "য",
}


class RuleTable(TransliterationClient):
    """Static digraph map applied greedily left to right."""

    def __init__(self, rules: dict[str, str] | None = None):
        self.rules = dict(_DEFAULT_RULES if rules is None else rules)
        self._lengths = sorted({len(k) for k in self.rules}, reverse=True)

    def transliterate(self, text: str) -> str:
        out: list[str] = []
        i = 0
        lower = text.lower()
        while i < len(text):
            for n in self._lengths:
                chunk = lower[i:i + n]
                if len(chunk) == n and chunk in self.rules:
                    out.append(self.rules[chunk])
                    i += n
                    break
            else:
                out.append(text[i])
                i += 1
        return "".join(out)


@dataclass(frozen=True)
class RoutedMessage:
    text: str
    language: LanguageTag
    transliterated: bool = False
    warning: str | None = None


def route_message(text: str, client: TransliterationClient) -> RoutedMessage:
    """Bangla passes through; Latin goes via the client; other is flagged."""
    tag = detect_language(text)
    if tag.kind == LanguageTag.BANGLA:
        return RoutedMessage(text, tag)
    if tag.kind == LanguageTag.OTHER:
        return RoutedMessage(text, tag, warning="no alphabetic content")
    try:
        return RoutedMessage(client.transliterate(text), tag, transliterated=True)
    except Exception as exc:
        return RoutedMessage(text, tag, warning=f"transliteration failed: {exc}")
