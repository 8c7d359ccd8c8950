"""Single-file model archive: pipeline, joint model, policy, domain, stories.

Layout: magic line, big-endian 8-byte header length, UTF-8 JSON header,
then raw float64 little-endian tensor bytes in manifest order.  The bytes
are a pure function of the trained artifacts (no timestamps, sorted keys),
so identical training runs produce hash-identical archives.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from . import joint_model as jm
from .corpus import Domain, Story, StorySet, Step, TrainingSet
from .dialogue import DialogueEngine
from .features import CountVectorVocab, HashedNGram, PretrainedTable, RegexPatternSet
from .pipeline import FittedPipeline, PipelineConfig, train_pipeline
from .postprocess import FallbackConfig, SynonymTable
from .ted import PolicyConfig, TedModel, train_ted
from .tokenizers import TokenizerKind

MAGIC = b"BANGLABOT-MODEL\n"
FORMAT_VERSION = 1


class ModelArchiveError(Exception):
    pass


@dataclass
class TrainedBot:
    pipeline: FittedPipeline
    domain: Domain
    stories: StorySet
    ted_model: TedModel
    policy_config: PolicyConfig

    def engine(self) -> DialogueEngine:
        return DialogueEngine(domain=self.domain, stories=self.stories,
                              ted_model=self.ted_model, policy_config=self.policy_config)


def train_bot(pipeline_config: PipelineConfig, data: TrainingSet, domain: Domain,
              stories: StorySet, policy_config: PolicyConfig | None = None,
              vectors: PretrainedTable | None = None, seed: int | None = None,
              backend=None) -> TrainedBot:
    policy_config = policy_config or PolicyConfig(seed=seed if seed is not None else 0)
    fitted = train_pipeline(pipeline_config, data, vectors=vectors, seed=seed, backend=backend)
    ted_model = train_ted(stories, domain, policy_config)
    return TrainedBot(fitted, domain, stories, ted_model, policy_config)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _pipeline_header(p: FittedPipeline) -> dict:
    cfg = p.config
    header: dict = {
        "name": cfg.name,
        "tokenizer": cfg.tokenizer.value,
        "featurizers": cfg.featurizers,
        "count_analyzer": cfg.count_analyzer,
        "count_min_ngram": cfg.count_min_ngram,
        "count_max_ngram": cfg.count_max_ngram,
        "dense_dim": cfg.dense_dim,
        "dense_seed": cfg.dense_seed,
        "synonyms": cfg.synonyms,
        "fallback": None if cfg.fallback is None else {
            "threshold": cfg.fallback.threshold,
            "ambiguity_threshold": cfg.fallback.ambiguity_threshold,
            "fallback_intent_name": cfg.fallback.fallback_intent_name,
        },
        "regex_patterns": cfg.regex_patterns,
        "reference_metrics": cfg.reference_metrics,
        "model_config": vars(cfg.model).copy(),
        "vocab": None if p.vocab is None else {
            "analyzer": p.vocab.analyzer, "min_ngram": p.vocab.min_ngram,
            "max_ngram": p.vocab.max_ngram, "index": p.vocab.index,
        },
        "synonym_table": None if p.synonym_table is None else p.synonym_table.mapping,
    }
    if p.dense_source is None:
        header["dense_source"] = None
    elif isinstance(p.dense_source, HashedNGram):
        header["dense_source"] = {"kind": "hashed", "dim": p.dense_source.dim,
                                  "seed": p.dense_source.seed}
    else:
        header["dense_source"] = {"kind": "table", "dim": p.dense_source.dim,
                                  "words": sorted(p.dense_source.table)}
    return header


def _stories_header(stories: StorySet) -> dict:
    def enc(items: list[Story]) -> list[dict]:
        return [{"name": s.name, "steps": [[st.kind, st.name] for st in s.steps]} for s in items]
    return {"stories": enc(stories.stories), "rules": enc(stories.rules)}


def save_bot(bot: TrainedBot, path: str) -> None:
    tensors: list[tuple[str, np.ndarray]] = []
    for name, arr in bot.pipeline.model.params.items():
        tensors.append((f"joint/{name}", arr))
    for name, arr in bot.ted_model.params.items():
        tensors.append((f"ted/{name}", arr))
    if isinstance(bot.pipeline.dense_source, PretrainedTable):
        words = sorted(bot.pipeline.dense_source.table)
        matrix = np.stack([bot.pipeline.dense_source.table[w] for w in words])
        tensors.append(("dense/table", matrix))

    manifest = []
    offset = 0
    for name, arr in tensors:
        nbytes = arr.size * 8
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += nbytes

    header = {
        "version": FORMAT_VERSION,
        "pipeline": _pipeline_header(bot.pipeline),
        "joint": {
            "config": vars(bot.pipeline.model.config).copy(),
            "intents": bot.pipeline.model.intents,
            "tags": bot.pipeline.model.tags,
            "sparse_dim": bot.pipeline.model.sparse_dim,
            "dense_dim": bot.pipeline.model.dense_dim,
            "loss_curve": bot.pipeline.model.loss_curve,
        },
        "ted": {
            "config": vars(bot.ted_model.config).copy(),
            "intents": bot.ted_model.intents,
            "entity_types": bot.ted_model.entity_types,
            "actions": bot.ted_model.actions,
            "embed_dim": bot.ted_model.embed_dim,
            "heads": bot.ted_model.heads,
            "loss_curve": bot.ted_model.loss_curve,
        },
        "policy": vars(bot.policy_config).copy(),
        "domain": {
            "responses": bot.domain.responses,
            "actions": bot.domain.actions,
            "intents": bot.domain.intents,
            "entity_types": bot.domain.entity_types,
        },
        "stories": _stories_header(bot.stories),
        "tensors": manifest,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack(">Q", len(blob)))
        fh.write(blob)
        for _, arr in tensors:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_bot(path: str) -> TrainedBot:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ModelArchiveError(f"{path}: not a model archive")
        (header_len,) = struct.unpack(">Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        if header.get("version") != FORMAT_VERSION:
            raise ModelArchiveError(f"unsupported archive version {header.get('version')!r}")
        payload = fh.read()

    def tensor(entry: dict) -> np.ndarray:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(payload, dtype="<f8", count=size, offset=start)
        return arr.reshape(shape).copy()  # frombuffer views are read-only

    by_name = {entry["name"]: entry for entry in header["tensors"]}

    ph = header["pipeline"]
    fallback = None
    if ph["fallback"] is not None:
        fallback = FallbackConfig(**ph["fallback"])
    config = PipelineConfig(
        name=ph["name"],
        tokenizer=TokenizerKind(ph["tokenizer"]),
        featurizers=list(ph["featurizers"]),
        count_analyzer=ph["count_analyzer"],
        count_min_ngram=ph["count_min_ngram"],
        count_max_ngram=ph["count_max_ngram"],
        dense_dim=ph["dense_dim"],
        dense_seed=ph["dense_seed"],
        synonyms=ph["synonyms"],
        fallback=fallback,
        model=jm.JointModelConfig(**ph["model_config"]),
        regex_patterns=[tuple(p) for p in ph["regex_patterns"]],
        reference_metrics=ph.get("reference_metrics", {}),
    )
    vocab = None
    if ph["vocab"] is not None:
        vocab = CountVectorVocab(ph["vocab"]["analyzer"], ph["vocab"]["min_ngram"],
                                 ph["vocab"]["max_ngram"], dict(ph["vocab"]["index"]))
    patterns = RegexPatternSet.compile(config.regex_patterns) if "regex" in config.featurizers else None
    dense_source = None
    if ph["dense_source"] is not None:
        ds = ph["dense_source"]
        if ds["kind"] == "hashed":
            dense_source = HashedNGram(ds["dim"], ds["seed"])
        else:
            matrix = tensor(by_name["dense/table"])
            dense_source = PretrainedTable(ds["dim"], dict(zip(ds["words"], matrix)))
    synonym_table = None
    if ph["synonym_table"] is not None:
        synonym_table = SynonymTable(dict(ph["synonym_table"]))

    jh = header["joint"]
    joint = jm.JointModel(
        config=jm.JointModelConfig(**jh["config"]),
        intents=list(jh["intents"]), tags=list(jh["tags"]),
        sparse_dim=jh["sparse_dim"], dense_dim=jh["dense_dim"],
        params={e["name"].split("/", 1)[1]: tensor(e)
                for e in header["tensors"] if e["name"].startswith("joint/")},
        loss_curve=list(jh["loss_curve"]),
    )
    pipeline = FittedPipeline(config, vocab, patterns, dense_source, synonym_table, joint)

    th = header["ted"]
    ted_model = TedModel(
        config=PolicyConfig(**th["config"]),
        intents=list(th["intents"]), entity_types=list(th["entity_types"]),
        actions=list(th["actions"]), embed_dim=th["embed_dim"], heads=th["heads"],
        params={e["name"].split("/", 1)[1]: tensor(e)
                for e in header["tensors"] if e["name"].startswith("ted/")},
        loss_curve=list(th["loss_curve"]),
    )

    dh = header["domain"]
    domain = Domain(responses={k: list(v) for k, v in dh["responses"].items()},
                    actions=list(dh["actions"]), intents=list(dh["intents"]),
                    entity_types=list(dh["entity_types"]))
    sh = header["stories"]

    def dec(items: list[dict]) -> list[Story]:
        return [Story(s["name"], [Step(k, n) for k, n in s["steps"]]) for s in items]

    stories = StorySet(dec(sh["stories"]), dec(sh["rules"]))
    return TrainedBot(pipeline, domain, stories, ted_model, PolicyConfig(**header["policy"]))
