"""Joint intent classifier and entity tagger over assembled message features.

One network does both jobs: sparse and dense feature blocks are projected
into a shared embedding, a transformer encoder contextualizes the token
sequence plus a synthetic sentence slot, the sentence state is scored
against learned intent-label embeddings (softmax over dot products), and
each token state is classified into BIO tags that decode back into entity
spans.  Training is plain Adam with seeded shuffling; gradients are all
hand-derived and checked against finite differences in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, nn
from .corpus import EntitySpan
from .features import MessageFeatures
from .tokenizers import Token


class DimensionMismatch(ValueError):
    pass


class EmptyTrainingSet(ValueError):
    pass


@dataclass
class JointModelConfig:
    embed_dim: int = 128
    transformer_layers: int = 2
    attention_heads: int = 4
    label_embed_dim: int = 20
    epochs: int = 500
    learning_rate: float = 0.05
    batch_size: int = 32
    seed: int = 0
    # Intent logits are scaled cosine similarities; a bounded scale keeps
    # softmax confidences away from hard 0/1 so the fallback thresholds
    # still see usable numbers on out-of-distribution input.
    similarity_scale: float = 4.0

    def __post_init__(self):
        if self.embed_dim % self.attention_heads != 0:
            raise ValueError("embed_dim must be divisible by attention_heads")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


@dataclass
class IntentRanking:
    ranked: list[tuple[str, float]]

    @property
    def top(self) -> tuple[str, float]:
        return self.ranked[0]


@dataclass
class Prediction:
    ranking: IntentRanking
    tags: list[str]
    entities: list[EntitySpan]
    fallback: bool = False
    fallback_reason: str | None = None


@dataclass
class TrainingInstance:
    features: MessageFeatures
    intent_id: int
    tag_ids: np.ndarray  # int64 per token


@dataclass
class JointModel:
    config: JointModelConfig
    intents: list[str]
    tags: list[str]
    sparse_dim: int
    dense_dim: int
    params: dict[str, np.ndarray] = field(default_factory=dict)
    loss_curve: list[float] = field(default_factory=list)


def bio_tags_for(entity_types: list[str]) -> list[str]:
    tags = ["O"]
    for ent in entity_types:
        tags.extend((f"B-{ent}", f"I-{ent}"))
    return tags


def tags_for_tokens(tokens: list[Token], spans: tuple[EntitySpan, ...] | list[EntitySpan],
                    tags: list[str]) -> np.ndarray:
    """Align gold entity spans onto tokens as BIO tag ids (overlap counts)."""
    tag_index = {t: i for i, t in enumerate(tags)}
    out = np.zeros(len(tokens), dtype=np.int64)
    for span in spans:
        first = True
        for i, tok in enumerate(tokens):
            if tok.start < span.end and span.start < tok.end:
                name = f"B-{span.entity}" if first else f"I-{span.entity}"
                if name in tag_index:
                    out[i] = tag_index[name]
                first = False
    return out


def decode_bio(tags: list[str], tokens: list[Token], text: str) -> list[EntitySpan]:
    """Maximal B-e (I-e)* runs become spans; orphan I-e is repaired to B-e."""
    if len(tags) != len(tokens):
        raise DimensionMismatch(f"{len(tags)} tags for {len(tokens)} tokens")
    spans: list[EntitySpan] = []
    current: tuple[str, int, int] | None = None  # (entity, start, end)
    for tag, tok in zip(tags, tokens):
        if tag == "O":
            if current:
                spans.append(EntitySpan(current[1], current[2], current[0], text[current[1]:current[2]]))
                current = None
            continue
        kind, entity = tag.split("-", 1)
        if kind == "I" and current and current[0] == entity:
            current = (entity, current[1], tok.end)
        else:
            # B- starts a run; orphan I- repairs to B-.
            if current:
                spans.append(EntitySpan(current[1], current[2], current[0], text[current[1]:current[2]]))
            current = (entity, tok.start, tok.end)
    if current:
        spans.append(EntitySpan(current[1], current[2], current[0], text[current[1]:current[2]]))
    return spans


# ---------------------------------------------------------------------------
# Batch packing
# ---------------------------------------------------------------------------

@dataclass
class _Packed:
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    dense: np.ndarray          # [rows, D]
    rows: int
    row_b: np.ndarray          # [rows] batch index per row
    row_s: np.ndarray          # [rows] sequence position per row
    mask: np.ndarray           # [B, S]
    sent_pos: np.ndarray       # [B]
    token_row_ids: np.ndarray  # row indices that are tokens (for the entity head)
    n_tokens: np.ndarray       # [B]


def _pack(batch: list[MessageFeatures], sparse_dim: int, dense_dim: int) -> _Packed:
    for f in batch:
        if f.sparse_dim != sparse_dim or f.dense_dim != dense_dim:
            raise DimensionMismatch(
                f"features ({f.sparse_dim}, {f.dense_dim}) do not match model ({sparse_dim}, {dense_dim})")
    b = len(batch)
    n_tokens = np.array([len(f.tokens) for f in batch], dtype=np.int64)
    seq = int(n_tokens.max() if b else 0) + 1
    indptr = [0]
    indices: list[np.ndarray] = []
    data: list[np.ndarray] = []
    dense_rows: list[np.ndarray] = []
    row_b: list[int] = []
    row_s: list[int] = []
    token_row_ids: list[int] = []
    row = 0
    for i, f in enumerate(batch):
        for t, vec in enumerate(f.token_sparse):
            indices.append(vec.indices)
            data.append(vec.values)
            indptr.append(indptr[-1] + len(vec.indices))
            dense_rows.append(f.token_dense[t])
            row_b.append(i)
            row_s.append(t)
            token_row_ids.append(row)
            row += 1
        indices.append(f.sentence_sparse.indices)
        data.append(f.sentence_sparse.values)
        indptr.append(indptr[-1] + len(f.sentence_sparse.indices))
        dense_rows.append(f.sentence_dense)
        row_b.append(i)
        row_s.append(len(f.tokens))
        row += 1
    mask = np.zeros((b, seq))
    for i, n in enumerate(n_tokens):
        mask[i, :n + 1] = 1.0
    return _Packed(
        indptr=np.array(indptr, dtype=np.int64),
        indices=np.concatenate(indices) if indices else np.empty(0, dtype=np.int64),
        data=np.concatenate(data) if data else np.empty(0),
        dense=np.stack(dense_rows) if dense_dim else np.empty((row, 0)),
        rows=row,
        row_b=np.array(row_b, dtype=np.int64),
        row_s=np.array(row_s, dtype=np.int64),
        mask=mask,
        sent_pos=n_tokens,
        token_row_ids=np.array(token_row_ids, dtype=np.int64),
        n_tokens=n_tokens,
    )


# ---------------------------------------------------------------------------
# Forward / backward
# ---------------------------------------------------------------------------

_NORM_EPS = 1e-12


def _row_normalize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.maximum(np.sqrt((x * x).sum(axis=-1, keepdims=True)), _NORM_EPS)
    return x / norms, norms


def _row_normalize_backward(dxhat: np.ndarray, xhat: np.ndarray, norms: np.ndarray) -> np.ndarray:
    return (dxhat - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)) / norms


def _forward(model: JointModel, packed: _Packed, backend):
    p = model.params
    cfg = model.config
    proj = np.zeros((packed.rows, cfg.embed_dim))
    backend.csr_dense_matmul(packed.indptr, packed.indices, packed.data, p["sparse_w"], proj)
    if model.dense_dim:
        proj += packed.dense @ p["dense_w"]
    proj += p["embed_b"]

    b = packed.mask.shape[0]
    seq = packed.mask.shape[1]
    x = np.zeros((b, seq, cfg.embed_dim))
    x[packed.row_b, packed.row_s] = proj
    y, caches = nn.encoder_forward(p, cfg.transformer_layers, cfg.attention_heads, x, packed.mask)

    sent = y[np.arange(b), packed.sent_pos]                   # [B, E]
    u = sent @ p["intent_w"] + p["intent_b"]                  # [B, L]
    u_hat, u_norms = _row_normalize(u)
    m_hat, m_norms = _row_normalize(p["labels"])
    intent_logits = cfg.similarity_scale * (u_hat @ m_hat.T)  # [B, C]

    tok_states = y[packed.row_b[packed.token_row_ids], packed.row_s[packed.token_row_ids]]
    tag_logits = tok_states @ p["entity_w"] + p["entity_b"]   # [N_tok, num_tags]
    head_cache = (u_hat, u_norms, m_hat, m_norms)
    return proj, x, y, caches, sent, u, head_cache, intent_logits, tok_states, tag_logits


def loss_and_gradients(model: JointModel, batch: list[TrainingInstance], backend=None):
    """Joint loss (mean intent CE + mean token BIO CE) and analytic gradients."""
    if not batch:
        raise EmptyTrainingSet("empty batch")
    backend = backend if backend is not None else kernels.ACTIVE
    packed = _pack([inst.features for inst in batch], model.sparse_dim, model.dense_dim)
    p = model.params
    cfg = model.config
    proj, x, y, caches, sent, u, head_cache, intent_logits, tok_states, tag_logits = _forward(
        model, packed, backend)

    intent_targets = np.array([inst.intent_id for inst in batch], dtype=np.int64)
    intent_loss, dintent_logits, _ = nn.softmax_xent(intent_logits, intent_targets)

    tag_targets = (np.concatenate([inst.tag_ids for inst in batch])
                   if packed.token_row_ids.size else np.empty(0, dtype=np.int64))
    if tag_targets.size:
        tag_loss, dtag_logits, _ = nn.softmax_xent(tag_logits, tag_targets)
    else:
        tag_loss, dtag_logits = 0.0, np.zeros_like(tag_logits)
    loss = intent_loss + tag_loss
    if not math.isfinite(loss):
        raise nn.NonFiniteLoss(f"loss is not finite: {loss}")

    grads: dict[str, np.ndarray] = {}

    # Intent head: logits = scale * u_hat @ m_hat^T with row-normalized u, labels.
    u_hat, u_norms, m_hat, m_norms = head_cache
    du_hat = cfg.similarity_scale * (dintent_logits @ m_hat)
    dm_hat = cfg.similarity_scale * (dintent_logits.T @ u_hat)
    du = _row_normalize_backward(du_hat, u_hat, u_norms)
    grads["labels"] = _row_normalize_backward(dm_hat, m_hat, m_norms)
    grads["intent_w"] = sent.T @ du
    grads["intent_b"] = du.sum(axis=0)
    dsent = du @ p["intent_w"].T

    # Entity head.
    grads["entity_w"] = tok_states.T @ dtag_logits
    grads["entity_b"] = dtag_logits.sum(axis=0)
    dtok_states = dtag_logits @ p["entity_w"].T

    b, seq = packed.mask.shape
    dy = np.zeros_like(y)
    dy[np.arange(b), packed.sent_pos] += dsent
    dy[packed.row_b[packed.token_row_ids], packed.row_s[packed.token_row_ids]] += dtok_states

    dx, enc_grads = nn.encoder_backward(p, cfg.transformer_layers, cfg.attention_heads, caches, dy)
    grads.update(enc_grads)

    dproj = np.ascontiguousarray(dx[packed.row_b, packed.row_s])
    grads["sparse_w"] = np.zeros_like(p["sparse_w"])
    backend.csr_t_dense_accum(packed.indptr, packed.indices, packed.data, dproj, grads["sparse_w"])
    if model.dense_dim:
        grads["dense_w"] = packed.dense.T @ dproj
    grads["embed_b"] = dproj.sum(axis=0)
    return loss, grads


def encode(model: JointModel, features: MessageFeatures, backend=None):
    """Contextual (per-token embeddings, sentence embedding) for one message."""
    backend = backend if backend is not None else kernels.ACTIVE
    packed = _pack([features], model.sparse_dim, model.dense_dim)
    _, _, y, _, sent, _, _, _, tok_states, _ = _forward(model, packed, backend)
    return tok_states, sent[0]


def predict(model: JointModel, features: MessageFeatures, text: str, backend=None) -> Prediction:
    backend = backend if backend is not None else kernels.ACTIVE
    packed = _pack([features], model.sparse_dim, model.dense_dim)
    *_, intent_logits, _, tag_logits = _forward(model, packed, backend)
    probs = nn.softmax(intent_logits[0])
    order = sorted(range(len(model.intents)), key=lambda i: (-probs[i], i))
    ranking = IntentRanking([(model.intents[i], float(probs[i])) for i in order])
    tag_ids = tag_logits.argmax(axis=1) if tag_logits.size else np.empty(0, dtype=np.int64)
    tags = [model.tags[i] for i in tag_ids]
    entities = decode_bio(tags, features.tokens, text)
    return Prediction(ranking=ranking, tags=tags, entities=entities)


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def init_model(config: JointModelConfig, intents: list[str], tags: list[str],
               sparse_dim: int, dense_dim: int) -> JointModel:
    rng = np.random.default_rng(config.seed)
    params: dict[str, np.ndarray] = {}
    params["sparse_w"] = nn.init_uniform(rng, sparse_dim, config.embed_dim)
    if dense_dim:
        params["dense_w"] = nn.init_uniform(rng, dense_dim, config.embed_dim)
    params["embed_b"] = nn.init_uniform(rng, config.embed_dim)
    params.update(nn.init_encoder_params(rng, config.transformer_layers, config.embed_dim))
    params["intent_w"] = nn.init_uniform(rng, config.embed_dim, config.label_embed_dim)
    params["intent_b"] = nn.init_uniform(rng, config.label_embed_dim)
    params["labels"] = nn.init_uniform(rng, len(intents), config.label_embed_dim)
    params["entity_w"] = nn.init_uniform(rng, config.embed_dim, len(tags))
    params["entity_b"] = nn.init_uniform(rng, len(tags))
    return JointModel(config=config, intents=list(intents), tags=list(tags),
                      sparse_dim=sparse_dim, dense_dim=dense_dim, params=params)


def train(instances: list[TrainingInstance], config: JointModelConfig,
          intents: list[str], tags: list[str], backend=None) -> JointModel:
    """Adam training with seeded per-epoch shuffling; records the loss curve."""
    if not instances:
        raise EmptyTrainingSet("no training instances")
    backend = backend if backend is not None else kernels.ACTIVE
    sparse_dim = instances[0].features.sparse_dim
    dense_dim = instances[0].features.dense_dim
    model = init_model(config, intents, tags, sparse_dim, dense_dim)
    optimizer = nn.Adam(model.params, lr=config.learning_rate, backend=backend)
    shuffle_rng = np.random.default_rng(config.seed + 1)

    n = len(instances)
    batch_size = min(config.batch_size, n)
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, batch_size):
            batch = [instances[i] for i in order[start:start + batch_size]]
            try:
                loss, grads = loss_and_gradients(model, batch, backend=backend)
            except nn.NonFiniteLoss as exc:
                raise nn.NonFiniteLoss(f"epoch {epoch}: {exc}") from exc
            optimizer.step(grads)
            epoch_loss += loss
            n_batches += 1
        model.loss_curve.append(epoch_loss / n_batches)
    return model
