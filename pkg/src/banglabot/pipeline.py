"""Pipeline configuration, fitting, and message parsing.

A pipeline is one tokenizer, an ordered list of featurizers, the joint
classifier, and optional synonym/fallback post-processing.  Eight presets
ship with the package (see ``presets/``); a pipeline can also be described
by a flat ``key=value`` config file.  Featurizers are fitted on training
data only; the fitted pipeline is immutable and safe to share.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

from . import joint_model as jm
from .corpus import TrainingSet
from .features import (DEFAULT_PATTERNS, CountVectorVocab, DenseBlock, HashedNGram,
                       MessageFeatures, PretrainedTable, RegexPatternSet, SparseBlock,
                       LEXICAL_DIM, assemble_features, count_vector_featurize,
                       dense_featurize, fit_count_vocab, lexical_syntactic_featurize,
                       regex_featurize)
from .postprocess import FallbackConfig, SynonymTable, apply_fallback, map_synonyms
from .tokenizers import TokenizerKind, tokenize

FEATURIZER_NAMES = ("regex", "lexical_syntactic", "count_vectors",
                    "dense_pretrained", "dense_hashed")

PRESET_NAMES = ("P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8")


class PipelineConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    name: str
    tokenizer: TokenizerKind = TokenizerKind.WHITESPACE
    featurizers: list[str] = field(default_factory=lambda: ["count_vectors"])
    count_analyzer: str = "char_wb"
    count_min_ngram: int = 1
    count_max_ngram: int = 4
    dense_dim: int = 96
    dense_seed: int = 13
    synonyms: bool = False
    fallback: FallbackConfig | None = None
    model: jm.JointModelConfig = field(default_factory=jm.JointModelConfig)
    regex_patterns: list[tuple[str, str]] = field(default_factory=lambda: list(DEFAULT_PATTERNS))
    reference_metrics: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.featurizers:
            raise PipelineConfigError("a pipeline needs at least one featurizer")
        for f in self.featurizers:
            if f not in FEATURIZER_NAMES:
                raise PipelineConfigError(f"unknown featurizer {f!r} (expected one of {FEATURIZER_NAMES})")
        dense = [f for f in self.featurizers if f.startswith("dense_")]
        if len(dense) > 1:
            raise PipelineConfigError("at most one dense featurizer per pipeline")


_BOOL = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def parse_pipeline_config(contents: str, name_hint: str = "pipeline") -> PipelineConfig:
    """Parse the flat key=value pipeline format (see any preset for a template)."""
    values: dict[str, str] = {}
    for no, raw in enumerate(contents.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise PipelineConfigError(f"line {no}: expected key=value, found {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in values:
            raise PipelineConfigError(f"line {no}: duplicate key {key!r}")
        values[key] = value

    def pop_bool(key: str, default: bool) -> bool:
        raw = values.pop(key, None)
        if raw is None:
            return default
        if raw.lower() not in _BOOL:
            raise PipelineConfigError(f"{key}: expected a boolean, found {raw!r}")
        return _BOOL[raw.lower()]

    def pop_int(key: str, default: int) -> int:
        raw = values.pop(key, None)
        return default if raw is None else int(raw)

    def pop_float(key: str, default: float) -> float:
        raw = values.pop(key, None)
        return default if raw is None else float(raw)

    name = values.pop("name", name_hint)
    tokenizer_raw = values.pop("tokenizer", "whitespace")
    try:
        tokenizer = TokenizerKind(tokenizer_raw)
    except ValueError:
        raise PipelineConfigError(f"unknown tokenizer {tokenizer_raw!r}") from None
    featurizers = [f.strip() for f in values.pop("featurizers", "count_vectors").split(",") if f.strip()]

    fallback = None
    if pop_bool("fallback", False):
        fallback = FallbackConfig(threshold=pop_float("fallback_threshold", 0.3),
                                  ambiguity_threshold=pop_float("fallback_ambiguity_threshold", 0.1))
    else:
        values.pop("fallback_threshold", None)
        values.pop("fallback_ambiguity_threshold", None)

    model = jm.JointModelConfig(
        embed_dim=pop_int("embed_dim", 128),
        transformer_layers=pop_int("transformer_layers", 2),
        attention_heads=pop_int("attention_heads", 4),
        label_embed_dim=pop_int("label_embed_dim", 20),
        epochs=pop_int("epochs", 500),
        learning_rate=pop_float("learning_rate", 0.05),
        batch_size=pop_int("batch_size", 32),
        seed=pop_int("seed", 0),
    )

    config = PipelineConfig(
        name=name,
        tokenizer=tokenizer,
        featurizers=featurizers,
        count_analyzer=values.pop("count_analyzer", "char_wb"),
        count_min_ngram=pop_int("count_min_ngram", 1),
        count_max_ngram=pop_int("count_max_ngram", 4),
        dense_dim=pop_int("dense_dim", 96),
        dense_seed=pop_int("dense_seed", 13),
        synonyms=pop_bool("synonyms", False),
        fallback=fallback,
        model=model,
        reference_metrics={k.removeprefix("reference_"): float(v)
                           for k, v in values.items() if k.startswith("reference_")},
    )
    leftovers = [k for k in values if not k.startswith("reference_")]
    if leftovers:
        raise PipelineConfigError(f"unknown config keys: {sorted(leftovers)}")
    return config


def load_preset(name: str) -> PipelineConfig:
    key = name.upper()
    if key not in PRESET_NAMES:
        raise PipelineConfigError(f"unknown preset {name!r} (have {', '.join(PRESET_NAMES)})")
    text = importlib.resources.files("banglabot.presets").joinpath(f"{key.lower()}.cfg").read_text("utf-8")
    return parse_pipeline_config(text, name_hint=key)


def load_presets(spec: str) -> list[PipelineConfig]:
    """'all' or a comma-separated subset like 'P1,P5,P8'."""
    if spec.strip().lower() == "all":
        return [load_preset(n) for n in PRESET_NAMES]
    return [load_preset(part) for part in spec.split(",") if part.strip()]


# ---------------------------------------------------------------------------
# Fitted pipeline
# ---------------------------------------------------------------------------

@dataclass
class FittedPipeline:
    config: PipelineConfig
    vocab: CountVectorVocab | None
    patterns: RegexPatternSet | None
    dense_source: PretrainedTable | HashedNGram | None
    synonym_table: SynonymTable | None
    model: jm.JointModel

    def featurize(self, text: str) -> MessageFeatures:
        tokens = tokenize(self.config.tokenizer, text)
        sparse_blocks: list[SparseBlock] = []
        dense_blocks: list[DenseBlock] = []
        for name in self.config.featurizers:
            if name == "regex":
                tv, sv = regex_featurize(text, tokens, self.patterns)
                sparse_blocks.append(SparseBlock(self.patterns.dim, tv, sv))
            elif name == "lexical_syntactic":
                sparse_blocks.append(SparseBlock(LEXICAL_DIM, lexical_syntactic_featurize(tokens), None))
            elif name == "count_vectors":
                tv, sv = count_vector_featurize(tokens, self.vocab)
                sparse_blocks.append(SparseBlock(self.vocab.dim, tv, sv))
            else:
                tv, sv = dense_featurize(tokens, self.dense_source)
                dense_blocks.append(DenseBlock(self.dense_source.dim, tv, sv))
        return assemble_features(tokens, sparse_blocks, dense_blocks)

    def parse(self, text: str) -> jm.Prediction:
        features = self.featurize(text)
        prediction = jm.predict(self.model, features, text)
        if self.synonym_table is not None:
            prediction.entities = map_synonyms(prediction.entities, self.synonym_table)
        if self.config.fallback is not None:
            prediction.ranking, reason = apply_fallback(prediction.ranking, self.config.fallback)
            prediction.fallback = reason is not None
            prediction.fallback_reason = reason
        return prediction


def _fit_components(config: PipelineConfig, train: TrainingSet,
                    vectors: PretrainedTable | None):
    token_lists = [[t.text for t in tokenize(config.tokenizer, ex.text)] for ex in train.examples]
    vocab = None
    if "count_vectors" in config.featurizers:
        vocab = fit_count_vocab(token_lists, config.count_analyzer,
                                config.count_min_ngram, config.count_max_ngram)
    patterns = RegexPatternSet.compile(config.regex_patterns) if "regex" in config.featurizers else None
    dense_source = None
    if "dense_pretrained" in config.featurizers:
        # Falls back to the hashed encoder when no vector table is supplied.
        dense_source = vectors if vectors is not None else HashedNGram(config.dense_dim, config.dense_seed)
    elif "dense_hashed" in config.featurizers:
        dense_source = HashedNGram(config.dense_dim, config.dense_seed)
    synonym_table = SynonymTable.build(train.synonyms) if config.synonyms else None
    return vocab, patterns, dense_source, synonym_table


def train_pipeline(config: PipelineConfig, train: TrainingSet,
                   vectors: PretrainedTable | None = None, seed: int | None = None,
                   backend=None) -> FittedPipeline:
    """Fit featurizers on the training set, then train the joint model."""
    vocab, patterns, dense_source, synonym_table = _fit_components(config, train, vectors)
    model_config = jm.JointModelConfig(**{**config.model.__dict__})
    if seed is not None:
        model_config.seed = seed

    tags = jm.bio_tags_for(train.entity_types)
    intent_ids = {name: i for i, name in enumerate(train.intents)}
    shell = FittedPipeline(config, vocab, patterns, dense_source, synonym_table,
                           model=None)  # featurize() needs no model
    instances = []
    for ex in train.examples:
        features = shell.featurize(ex.text)
        tag_ids = jm.tags_for_tokens(features.tokens, ex.entities, tags)
        instances.append(jm.TrainingInstance(features, intent_ids[ex.intent], tag_ids))

    model = jm.train(instances, model_config, train.intents, tags, backend=backend)
    shell.model = model
    return shell
