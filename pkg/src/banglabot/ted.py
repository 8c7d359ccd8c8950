"""Learned next-action policy: a small transformer over recent dialogue turns.

Each turn (a user intent with its entity types, or an executed bot action)
becomes one multi-hot vector; the last `max_history` turn vectors run
through an encoder and the final state is scored against learned action
embeddings, with `action_listen` as an explicit class so the policy learns
to hand the floor back after answering.  Training mirrors the joint
classifier: Adam, softmax cross-entropy, seeded and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .corpus import Domain, StorySet

ACTION_LISTEN = "action_listen"


class EmptyStorySet(ValueError):
    pass


@dataclass
class PolicyConfig:
    max_history: int = 5
    ted_epochs: int = 200
    ted_learning_rate: float = 0.05
    ted_transformer_layers: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.max_history < 1:
            raise ValueError("max_history must be >= 1")


@dataclass(frozen=True)
class TurnElement:
    kind: str                         # "intent" | "action"
    name: str
    entity_types: tuple[str, ...] = ()

    @property
    def key(self) -> tuple[str, str]:
        return (self.kind, self.name)


@dataclass
class TedModel:
    config: PolicyConfig
    intents: list[str]
    entity_types: list[str]
    actions: list[str]        # domain actions + action_listen, in this order
    embed_dim: int
    heads: int
    params: dict[str, np.ndarray] = field(default_factory=dict)
    loss_curve: list[float] = field(default_factory=list)

    @property
    def turn_dim(self) -> int:
        # kind flags + intent one-hot + entity-type multi-hot + action one-hot
        return 2 + len(self.intents) + len(self.entity_types) + len(self.actions)

    def featurize_turn(self, element: TurnElement) -> np.ndarray:
        vec = np.zeros(self.turn_dim)
        intent_base, entity_base = 2, 2 + len(self.intents)
        action_base = entity_base + len(self.entity_types)
        if element.kind == "intent":
            vec[0] = 1.0
            if element.name in self.intents:
                vec[intent_base + self.intents.index(element.name)] = 1.0
            for ent in element.entity_types:
                if ent in self.entity_types:
                    vec[entity_base + self.entity_types.index(ent)] = 1.0
        else:
            vec[1] = 1.0
            if element.name in self.actions:
                vec[action_base + self.actions.index(element.name)] = 1.0
        return vec

    def featurize_window(self, elements: list[TurnElement]) -> tuple[np.ndarray, np.ndarray]:
        """Left-padded [max_history, turn_dim] window and its mask."""
        k = self.config.max_history
        window = elements[-k:]
        x = np.zeros((k, self.turn_dim))
        mask = np.zeros(k)
        offset = k - len(window)
        for i, el in enumerate(window):
            x[offset + i] = self.featurize_turn(el)
            mask[offset + i] = 1.0
        if not window:
            mask[-1] = 1.0  # empty history still needs one attendable slot
        return x, mask


def story_training_pairs(stories: StorySet, max_history: int):
    """(context elements, target action) pairs, with listen targets at the
    end of every bot turn."""
    pairs: list[tuple[list[TurnElement], str]] = []
    for story in stories.stories:
        elements = [TurnElement(kind, name) for kind, name in story.elements()]
        for p, element in enumerate(elements):
            context = elements[max(0, p - (2 * max_history - 1)):p]
            if element.kind == "action":
                pairs.append((context, element.name))
            elif p > 0:
                pairs.append((context, ACTION_LISTEN))
        if elements and elements[-1].kind == "action":
            pairs.append((elements[max(0, len(elements) - (2 * max_history - 1)):], ACTION_LISTEN))
    return pairs


def _forward(model: TedModel, x: np.ndarray, mask: np.ndarray):
    p = model.params
    h = x @ p["turn_w"] + p["turn_b"]
    y, caches = nn.encoder_forward(p, model.config.ted_transformer_layers, model.heads, h, mask)
    final = y[:, -1, :]
    u = final @ p["head_w"] + p["head_b"]
    logits = u @ p["labels"].T
    return h, y, caches, final, u, logits


def train_ted(stories: StorySet, domain: Domain, config: PolicyConfig,
              embed_dim: int = 32, heads: int = 2) -> TedModel:
    if not stories.stories:
        raise EmptyStorySet("no stories to train on")
    actions = list(domain.actions) + [ACTION_LISTEN]
    model = TedModel(config=config, intents=list(domain.intents),
                     entity_types=list(domain.entity_types), actions=actions,
                     embed_dim=embed_dim, heads=heads)

    rng = np.random.default_rng(config.seed)
    label_dim = 16
    params: dict[str, np.ndarray] = {}
    params["turn_w"] = nn.init_uniform(rng, model.turn_dim, embed_dim)
    params["turn_b"] = nn.init_uniform(rng, embed_dim)
    params.update(nn.init_encoder_params(rng, config.ted_transformer_layers, embed_dim))
    params["head_w"] = nn.init_uniform(rng, embed_dim, label_dim)
    params["head_b"] = nn.init_uniform(rng, label_dim)
    params["labels"] = nn.init_uniform(rng, len(actions), label_dim)
    model.params = params

    pairs = story_training_pairs(stories, config.max_history)
    action_index = {a: i for i, a in enumerate(actions)}
    xs, masks, targets = [], [], []
    for context, target in pairs:
        x, mask = model.featurize_window(context)
        xs.append(x)
        masks.append(mask)
        targets.append(action_index[target])
    x = np.stack(xs)
    mask = np.stack(masks)
    y_true = np.array(targets, dtype=np.int64)

    optimizer = nn.Adam(params, lr=config.ted_learning_rate)
    for epoch in range(config.ted_epochs):
        h, y, caches, final, u, logits = _forward(model, x, mask)
        loss, dlogits, _ = nn.softmax_xent(logits, y_true)
        model.loss_curve.append(loss)

        grads: dict[str, np.ndarray] = {}
        du = dlogits @ params["labels"]
        grads["labels"] = dlogits.T @ u
        grads["head_w"] = final.T @ du
        grads["head_b"] = du.sum(axis=0)
        dfinal = du @ params["head_w"].T
        dy = np.zeros_like(y)
        dy[:, -1, :] = dfinal
        dh, enc_grads = nn.encoder_backward(params, config.ted_transformer_layers,
                                            model.heads, caches, dy)
        grads.update(enc_grads)
        flat_x = x.reshape(-1, model.turn_dim)
        grads["turn_w"] = flat_x.T @ dh.reshape(-1, embed_dim)
        grads["turn_b"] = dh.reshape(-1, embed_dim).sum(axis=0)
        optimizer.step(grads)
    return model


def ted_predict(model: TedModel, elements: list[TurnElement]) -> tuple[str, float]:
    x, mask = model.featurize_window(elements)
    *_, logits = _forward(model, x[None, :, :], mask[None, :])
    probs = nn.softmax(logits[0])
    best = int(np.argmax(probs))
    return model.actions[best], float(probs[best])
