"""Sparse and dense featurizers and their assembly into message features.

Sparse side: count vectors over character n-grams or words, regex pattern
indicators, and windowed lexical features.  Dense side: a pretrained
word-vector table (fastText text format) or a seeded hashed-n-gram encoder
that stands in for a heavyweight language-model featurizer.  All featurizers
are fitted on training data only and are immutable afterwards.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .tokenizers import Token

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def stable_hash64(text: str, seed: int = 0) -> int:
    """Seeded FNV-1a over UTF-8 bytes; stable across runs and platforms."""
    h = _FNV_OFFSET
    for b in seed.to_bytes(8, "little", signed=True):
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    for b in text.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


class FeatureError(Exception):
    pass


class TokenCountMismatch(FeatureError):
    pass


class HeaderMismatch(FeatureError):
    pass


class NonFiniteValue(FeatureError):
    pass


@dataclass(frozen=True)
class SparseVector:
    dim: int
    indices: np.ndarray  # int64, strictly increasing
    values: np.ndarray   # float64, no stored zeros

    def __post_init__(self):
        assert self.indices.shape == self.values.shape
        if len(self.indices) and (self.indices[-1] >= self.dim or self.indices[0] < 0):
            raise FeatureError("sparse index out of range")

    @classmethod
    def from_counts(cls, dim: int, counts: dict[int, float]) -> SparseVector:
        items = sorted((i, v) for i, v in counts.items() if v != 0.0)
        idx = np.array([i for i, _ in items], dtype=np.int64)
        val = np.array([v for _, v in items], dtype=np.float64)
        return cls(dim, idx, val)

    @classmethod
    def zeros(cls, dim: int) -> SparseVector:
        return cls(dim, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


def sparse_sum(vectors: list[SparseVector], dim: int) -> SparseVector:
    counts: dict[int, float] = {}
    for vec in vectors:
        for i, v in zip(vec.indices.tolist(), vec.values.tolist()):
            counts[i] = counts.get(i, 0.0) + v
    return SparseVector.from_counts(dim, counts)


def sparse_concat(blocks: list[SparseVector]) -> SparseVector:
    """Concatenate sparse blocks, shifting indices by the preceding dims."""
    dim = sum(b.dim for b in blocks)
    idx_parts, val_parts = [], []
    offset = 0
    for b in blocks:
        idx_parts.append(b.indices + offset)
        val_parts.append(b.values)
        offset += b.dim
    if not blocks:
        return SparseVector.zeros(0)
    return SparseVector(dim, np.concatenate(idx_parts), np.concatenate(val_parts))


@dataclass
class MessageFeatures:
    tokens: list[Token]
    token_sparse: list[SparseVector]
    token_dense: list[np.ndarray]
    sentence_sparse: SparseVector
    sentence_dense: np.ndarray

    @property
    def sparse_dim(self) -> int:
        return self.sentence_sparse.dim

    @property
    def dense_dim(self) -> int:
        return int(self.sentence_dense.shape[0])


# ---------------------------------------------------------------------------
# Count vectors
# ---------------------------------------------------------------------------

def char_wb_ngrams(token_text: str, min_ngram: int, max_ngram: int) -> list[str]:
    """All character n-grams of the space-padded token, in scan order.

    The token is padded with exactly one space on each side; n-grams made of
    padding only are included here (vocabulary building) but skipped when
    counting features.
    """
    padded = f" {token_text} "
    grams: list[str] = []
    for n in range(min_ngram, max_ngram + 1):
        for i in range(len(padded) - n + 1):
            grams.append(padded[i:i + n])
    return grams


@dataclass
class CountVectorVocab:
    analyzer: str  # "char_wb" | "word"
    min_ngram: int
    max_ngram: int
    index: dict[str, int] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.index)


def fit_count_vocab(corpus_tokens: list[list[str]], analyzer: str = "char_wb",
                    min_ngram: int = 1, max_ngram: int = 4) -> CountVectorVocab:
    if analyzer not in ("char_wb", "word"):
        raise FeatureError(f"unknown analyzer {analyzer!r}")
    if not (1 <= min_ngram <= max_ngram):
        raise FeatureError(f"bad ngram bounds [{min_ngram}, {max_ngram}]")
    seen: set[str] = set()
    for tokens in corpus_tokens:
        for tok in tokens:
            if analyzer == "word":
                seen.add(tok)
            else:
                seen.update(char_wb_ngrams(tok, min_ngram, max_ngram))
    index = {gram: i for i, gram in enumerate(sorted(seen))}
    return CountVectorVocab(analyzer, min_ngram, max_ngram, index)


def _token_counts(token_text: str, vocab: CountVectorVocab) -> dict[int, float]:
    counts: dict[int, float] = {}
    if vocab.analyzer == "word":
        idx = vocab.index.get(token_text)
        if idx is not None:
            counts[idx] = 1.0
        return counts
    for gram in char_wb_ngrams(token_text, vocab.min_ngram, vocab.max_ngram):
        if gram.isspace():
            continue
        idx = vocab.index.get(gram)
        if idx is not None:
            counts[idx] = counts.get(idx, 0.0) + 1.0
    return counts


def count_vector_featurize(tokens: list[Token],
                           vocab: CountVectorVocab) -> tuple[list[SparseVector], SparseVector]:
    token_vecs = [SparseVector.from_counts(vocab.dim, _token_counts(t.text, vocab)) for t in tokens]
    return token_vecs, sparse_sum(token_vecs, vocab.dim)


# ---------------------------------------------------------------------------
# Regex features
# ---------------------------------------------------------------------------

@dataclass
class RegexPatternSet:
    patterns: list[tuple[str, re.Pattern]]

    @classmethod
    def compile(cls, named: list[tuple[str, str]]) -> RegexPatternSet:
        names = [n for n, _ in named]
        if len(set(names)) != len(names):
            raise FeatureError("duplicate regex pattern name")
        return cls([(name, re.compile(expr)) for name, expr in named])

    @property
    def dim(self) -> int:
        return len(self.patterns)


DEFAULT_PATTERNS = [
    ("number", r"[0-9০-৯]+"),
    ("currency", r"(?:৳|taka|টাকা|tk)"),
    ("question", r"(?:\?|কি\b|ki\b)"),
]


def parse_regex_file(contents: str) -> RegexPatternSet:
    """One `name<TAB>pattern` per line; blank lines and # comments skipped."""
    named = []
    for no, raw in enumerate(contents.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise FeatureError(f"regex file line {no}: expected 'name<TAB>pattern'")
        name, expr = line.split("\t", 1)
        named.append((name.strip(), expr))
    return RegexPatternSet.compile(named)


def regex_featurize(text: str, tokens: list[Token],
                    patterns: RegexPatternSet) -> tuple[list[SparseVector], SparseVector]:
    dim = patterns.dim
    token_counts: list[dict[int, float]] = [{} for _ in tokens]
    sentence_counts: dict[int, float] = {}
    for p, (_, pattern) in enumerate(patterns.patterns):
        spans = [m.span() for m in pattern.finditer(text)]
        if spans:
            sentence_counts[p] = 1.0
        for ti, tok in enumerate(tokens):
            if any(s < tok.end and tok.start < e for s, e in spans):
                token_counts[ti][p] = 1.0
    token_vecs = [SparseVector.from_counts(dim, c) for c in token_counts]
    return token_vecs, SparseVector.from_counts(dim, sentence_counts)


# ---------------------------------------------------------------------------
# Lexical/syntactic window features
# ---------------------------------------------------------------------------

_LEX_FLAGS = 5          # BOS, EOS, digit, title-or-upper, bangla script
_LEX_BUCKETS = 64       # prefix2 and suffix2 hash buckets each
_LEX_PER_POSITION = _LEX_FLAGS + 2 * _LEX_BUCKETS
LEXICAL_DIM = 3 * _LEX_PER_POSITION  # window positions -1, 0, +1


def _is_bangla(text: str) -> bool:
    return any("ঀ" <= ch <= "৿" for ch in text)


def lexical_syntactic_featurize(tokens: list[Token]) -> list[SparseVector]:
    """Binary window features over each token and its immediate neighbors."""
    n = len(tokens)
    out: list[SparseVector] = []
    for i in range(n):
        counts: dict[int, float] = {}
        for w, offset in enumerate((-1, 0, 1)):
            j = i + offset
            if j < 0 or j >= n:
                continue
            base = w * _LEX_PER_POSITION
            text = tokens[j].text
            if j == 0:
                counts[base + 0] = 1.0
            if j == n - 1:
                counts[base + 1] = 1.0
            if text.isdigit():
                counts[base + 2] = 1.0
            if text.istitle() or text.isupper():
                counts[base + 3] = 1.0
            if _is_bangla(text):
                counts[base + 4] = 1.0
            prefix = text[:2]
            suffix = text[-2:]
            counts[base + _LEX_FLAGS + stable_hash64(prefix, seed=1) % _LEX_BUCKETS] = 1.0
            counts[base + _LEX_FLAGS + _LEX_BUCKETS + stable_hash64(suffix, seed=2) % _LEX_BUCKETS] = 1.0
        out.append(SparseVector.from_counts(LEXICAL_DIM, counts))
    return out


# ---------------------------------------------------------------------------
# Dense features
# ---------------------------------------------------------------------------

@dataclass
class PretrainedTable:
    dim: int
    table: dict[str, np.ndarray]

    def lookup(self, word: str) -> np.ndarray:
        vec = self.table.get(word)
        return np.zeros(self.dim) if vec is None else vec


@dataclass(frozen=True)
class HashedNGram:
    dim: int = 96
    seed: int = 0

    def encode(self, word: str) -> np.ndarray:
        grams = [word[i:i + 3] for i in range(len(word) - 2)] if len(word) >= 3 else [word]
        vec = np.zeros(self.dim)
        for gram in grams:
            vec[stable_hash64(gram, seed=self.seed) % self.dim] += 1.0
        norm = math.sqrt(float(vec @ vec))
        return vec / norm if norm > 0 else vec


DenseSource = PretrainedTable | HashedNGram


def load_pretrained_vectors(contents: str) -> PretrainedTable:
    """Parse the plain-text word-vector format: header 'count dim', then rows."""
    lines = [ln for ln in contents.split("\n") if ln.strip()]
    if not lines:
        raise HeaderMismatch("empty vector file")
    header = lines[0].split()
    if len(header) != 2:
        raise HeaderMismatch(f"expected 'count dim' header, got {lines[0]!r}")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError as exc:
        raise HeaderMismatch(f"non-integer header {lines[0]!r}") from exc
    if len(lines) - 1 != count:
        raise HeaderMismatch(f"header declares {count} rows, file has {len(lines) - 1}")
    table: dict[str, np.ndarray] = {}
    for row in lines[1:]:
        parts = row.split(" ")
        if len(parts) != dim + 1:
            raise HeaderMismatch(f"row for {parts[0]!r} has {len(parts) - 1} values, expected {dim}")
        vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        if not np.all(np.isfinite(vec)):
            raise NonFiniteValue(f"non-finite value in row for {parts[0]!r}")
        table[parts[0]] = vec
    return PretrainedTable(dim, table)


def dense_featurize(tokens: list[Token],
                    source: DenseSource) -> tuple[list[np.ndarray], np.ndarray]:
    if isinstance(source, PretrainedTable):
        token_vecs = [source.lookup(t.text) for t in tokens]
    else:
        token_vecs = [source.encode(t.text) for t in tokens]
    dim = source.dim
    if token_vecs:
        sentence = np.mean(np.stack(token_vecs), axis=0)
    else:
        sentence = np.zeros(dim)
    return token_vecs, sentence


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

@dataclass
class SparseBlock:
    dim: int
    token_vectors: list[SparseVector]
    sentence: SparseVector | None  # None = featurizer has no sentence features


@dataclass
class DenseBlock:
    dim: int
    token_vectors: list[np.ndarray]
    sentence: np.ndarray


def assemble_features(tokens: list[Token], sparse_blocks: list[SparseBlock],
                      dense_blocks: list[DenseBlock]) -> MessageFeatures:
    """Concatenate featurizer outputs in pipeline order.

    A block without sentence features contributes a zero block of its own
    dimension so token and sentence features stay aligned for a single
    projection matrix.
    """
    n = len(tokens)
    for block in sparse_blocks:
        if len(block.token_vectors) != n:
            raise TokenCountMismatch(f"sparse block has {len(block.token_vectors)} vectors for {n} tokens")
    for block in dense_blocks:
        if len(block.token_vectors) != n:
            raise TokenCountMismatch(f"dense block has {len(block.token_vectors)} vectors for {n} tokens")

    token_sparse = [sparse_concat([b.token_vectors[i] for b in sparse_blocks]) for i in range(n)]
    sentence_sparse = sparse_concat([
        b.sentence if b.sentence is not None else SparseVector.zeros(b.dim)
        for b in sparse_blocks
    ])

    dense_dim = sum(b.dim for b in dense_blocks)
    token_dense = [np.concatenate([b.token_vectors[i] for b in dense_blocks]) if dense_blocks
                   else np.empty(0) for i in range(n)]
    sentence_dense = (np.concatenate([b.sentence for b in dense_blocks])
                      if dense_blocks else np.empty(0))
    assert sentence_dense.shape[0] == dense_dim

    return MessageFeatures(tokens, token_sparse, token_dense, sentence_sparse, sentence_dense)
