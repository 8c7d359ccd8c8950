"""Post-classification steps: entity synonym mapping and the fallback intent.

Synonym mapping canonicalizes extracted entity values through a case-folded
lookup table whose canonical values are fixed points.  The fallback step
replaces the winning intent when the classifier is unsure, either because
the top confidence is below the threshold or because the top two are too
close to call.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .corpus import EntitySpan
from .joint_model import IntentRanking

FALLBACK_INTENT = "nlu_fallback"


@dataclass
class FallbackConfig:
    threshold: float = 0.3
    ambiguity_threshold: float = 0.1
    fallback_intent_name: str = FALLBACK_INTENT

    def __post_init__(self):
        if not (0.0 <= self.threshold <= 1.0 and 0.0 <= self.ambiguity_threshold <= 1.0):
            raise ValueError("fallback thresholds must lie in [0, 1]")


@dataclass
class SynonymTable:
    mapping: dict[str, str] = field(default_factory=dict)  # case-folded surface -> canonical

    @classmethod
    def build(cls, pairs: dict[str, str]) -> SynonymTable:
        mapping: dict[str, str] = {}
        for surface, canon in pairs.items():
            mapping[surface.casefold()] = canon
        # Canonicals map to themselves, even against a conflicting surface
        # entry; this keeps the table idempotent.
        for canon in pairs.values():
            mapping[canon.casefold()] = canon
        return cls(mapping)

    def canonical(self, value: str) -> str:
        return self.mapping.get(value.casefold(), value)


def map_synonyms(entities: list[EntitySpan], table: SynonymTable) -> list[EntitySpan]:
    return [replace(span, value=table.canonical(span.value)) for span in entities]


def apply_fallback(ranking: IntentRanking, config: FallbackConfig) -> tuple[IntentRanking, str | None]:
    """Prepend the fallback intent when the prediction is weak or ambiguous.

    Returns (ranking, reason) with reason None when nothing fired; the
    fallback entry carries the confidence it displaced so downstream
    thresholds keep working.
    """
    if not ranking.ranked:
        return ranking, None
    top_conf = ranking.ranked[0][1]
    reason = None
    if top_conf < config.threshold:
        reason = "threshold"
    elif len(ranking.ranked) >= 2 and (top_conf - ranking.ranked[1][1]) < config.ambiguity_threshold:
        reason = "ambiguity"
    if reason is None:
        return ranking, None
    promoted = [(config.fallback_intent_name, top_conf)] + list(ranking.ranked)
    return IntentRanking(promoted), reason
