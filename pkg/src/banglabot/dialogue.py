"""Dialogue core: session tracker, policies, arbitration, turn orchestration.

A tracker is an append-only event log per session; slots derive from it by
replay.  Three policies propose the next action: the rule policy (fallback
intent and single-turn rules), the memoization policy (exact match of the
recent intent/action history against a training story) and the learned
policy from `ted`.  Arbitration is fixed priority Rule > Memoization > Ted;
`run_turn` executes actions until the winner is `action_listen`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .corpus import Domain, StorySet
from .joint_model import Prediction
from .ted import ACTION_LISTEN, PolicyConfig, TedModel, TurnElement, ted_predict

ACTION_DEFAULT_FALLBACK = "action_default_fallback"
DEFAULT_FALLBACK_TEXT = "দুঃখিত, আমি প্রশ্নটা বুঝতে পারিনি। Sorry, I could not understand that."
MAX_ACTIONS_PER_TURN = 10


class NonMonotonicTimestamp(ValueError):
    pass


class ActionLoopLimit(RuntimeError):
    pass


@dataclass(frozen=True)
class Event:
    kind: str       # "session_started" | "user" | "bot" | "action"
    timestamp: int
    payload: dict

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "timestamp": self.timestamp,
                           "payload": self.payload}, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> Event:
        raw = json.loads(line)
        return cls(raw["kind"], raw["timestamp"], raw["payload"])


def session_started(ts: int) -> Event:
    return Event("session_started", ts, {})


def user_uttered(ts: int, text: str, intent: str, confidence: float,
                 entities: list[tuple[str, str]], ranking: list[tuple[str, float]],
                 language: str = "", fallback: bool = False) -> Event:
    return Event("user", ts, {
        "text": text, "intent": intent, "confidence": confidence,
        "entities": [{"entity": e, "value": v} for e, v in entities],
        "ranking": [{"intent": i, "confidence": c} for i, c in ranking],
        "language": language, "fallback": fallback,
    })


def bot_uttered(ts: int, action: str, text: str) -> Event:
    return Event("bot", ts, {"action": action, "text": text})


def action_executed(ts: int, action: str) -> Event:
    return Event("action", ts, {"action": action})


@dataclass
class Tracker:
    session_id: str
    events: list[Event] = field(default_factory=list)
    slots: dict[str, str] = field(default_factory=dict)

    def next_timestamp(self) -> int:
        return self.events[-1].timestamp + 1 if self.events else 0

    def apply(self, event: Event) -> None:
        if self.events and event.timestamp <= self.events[-1].timestamp:
            raise NonMonotonicTimestamp(
                f"timestamp {event.timestamp} not after {self.events[-1].timestamp}")
        self.events.append(event)
        if event.kind == "user":
            for ent in event.payload.get("entities", []):
                self.slots[ent["entity"]] = ent["value"]

    def elements(self) -> list[TurnElement]:
        """Alternating intent/action history since the last session start,
        excluding listen (it is implicit between turns)."""
        out: list[TurnElement] = []
        for event in self.events:
            if event.kind == "session_started":
                out = []
            elif event.kind == "user":
                entities = tuple(sorted({e["entity"] for e in event.payload.get("entities", [])}))
                out.append(TurnElement("intent", event.payload["intent"], entities))
            elif event.kind == "action" and event.payload["action"] != ACTION_LISTEN:
                out.append(TurnElement("action", event.payload["action"]))
        return out

    def export(self) -> str:
        """One JSON event per line; replayable via Tracker.replay."""
        return "\n".join(e.to_json() for e in self.events) + ("\n" if self.events else "")

    @classmethod
    def replay(cls, session_id: str, exported: str) -> Tracker:
        tracker = cls(session_id)
        for line in exported.splitlines():
            if line.strip():
                tracker.apply(Event.from_json(line))
        return tracker


@dataclass
class PolicyPrediction:
    action: str
    confidence: float
    policy: str  # "rule" | "memoization" | "ted"


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------

def memoization_predict(tracker: Tracker, stories: StorySet,
                        max_history: int) -> PolicyPrediction | None:
    """Exact match of the recent (intent, action) history against story windows."""
    capacity = 2 * max_history - 1
    index: dict[tuple, str] = {}
    for story in stories.stories:
        seq = story.elements()
        for p, (kind, name) in enumerate(seq):
            if kind != "action":
                continue
            window = tuple(seq[max(0, p - capacity):p])
            index.setdefault(window, name)  # first story in file order wins
    key = tuple(el.key for el in tracker.elements())[-capacity:]
    action = index.get(key)
    if action is None:
        return None
    return PolicyPrediction(action, 1.0, "memoization")


def rule_predict(tracker: Tracker, rules: list, fallback_intent: str) -> PolicyPrediction | None:
    """Fallback handling plus exact single-turn rule matches.

    Rules are fixed behavior: once the rule's action has run, the same rule
    closes the turn by predicting listen, so the learned policy never gets
    to improvise after a fallback answer.
    """
    def rule_pairs():
        yield ("intent", fallback_intent), ("action", ACTION_DEFAULT_FALLBACK)
        for rule in rules:
            seq = rule.elements()
            if len(seq) == 2 and seq[0][0] == "intent" and seq[1][0] == "action":
                yield seq[0], seq[1]

    elements = tracker.elements()
    if not elements:
        return None
    if elements[-1].kind == "intent":
        for intent_step, action_step in rule_pairs():
            if elements[-1].key == intent_step:
                return PolicyPrediction(action_step[1], 1.0, "rule")
        return None
    if len(elements) >= 2 and elements[-2].kind == "intent":
        recent = (elements[-2].key, elements[-1].key)
        for pair in rule_pairs():
            if recent == pair:
                return PolicyPrediction(ACTION_LISTEN, 1.0, "rule")
    return None


def select_action(predictions: list[PolicyPrediction | None]) -> PolicyPrediction:
    """Fixed priority rule > memoization > ted; listen when nothing fires."""
    priority = {"rule": 0, "memoization": 1, "ted": 2}
    live = [p for p in predictions if p is not None and p.confidence > 0.0]
    if not live:
        return PolicyPrediction(ACTION_LISTEN, 0.0, "none")
    live.sort(key=lambda p: priority.get(p.policy, 99))
    return live[0]


# ---------------------------------------------------------------------------
# Turn orchestration
# ---------------------------------------------------------------------------

class ActionRunner:
    """Custom (non-utterance) action interface; override run() to integrate."""

    def run(self, action: str, tracker: Tracker) -> list[str]:
        raise NotImplementedError


class EchoActionRunner(ActionRunner):
    def run(self, action: str, tracker: Tracker) -> list[str]:
        return [f"[{action}]"]


@dataclass
class DialogueEngine:
    domain: Domain
    stories: StorySet
    ted_model: TedModel
    policy_config: PolicyConfig
    fallback_intent: str = "nlu_fallback"
    action_runner: ActionRunner = field(default_factory=EchoActionRunner)

    def plan_next_action(self, tracker: Tracker) -> PolicyPrediction:
        rule = rule_predict(tracker, self.stories.rules, self.fallback_intent)
        memo = memoization_predict(tracker, self.stories, self.policy_config.max_history)
        action, confidence = ted_predict(self.ted_model, tracker.elements())
        return select_action([rule, memo, PolicyPrediction(action, confidence, "ted")])

    def response_text(self, tracker: Tracker, action: str) -> list[str]:
        if action == ACTION_DEFAULT_FALLBACK:
            return [DEFAULT_FALLBACK_TEXT]
        if action in self.domain.responses:
            variants = self.domain.responses[action]
            occurrences = sum(1 for e in tracker.events
                              if e.kind == "bot" and e.payload["action"] == action)
            return [variants[occurrences % len(variants)]]
        return self.action_runner.run(action, tracker)

    def run_turn(self, tracker: Tracker, prediction: Prediction, text: str,
                 language: str = "") -> list[str]:
        """Apply one user message and execute actions until the bot listens."""
        if not tracker.events:
            tracker.apply(session_started(tracker.next_timestamp()))
        intent, confidence = prediction.ranking.top
        entities = [(s.entity, s.value) for s in prediction.entities]
        tracker.apply(user_uttered(
            tracker.next_timestamp(), text, intent, confidence, entities,
            prediction.ranking.ranked, language=language, fallback=prediction.fallback))

        responses: list[str] = []
        for _ in range(MAX_ACTIONS_PER_TURN):
            chosen = self.plan_next_action(tracker)
            if chosen.action == ACTION_LISTEN:
                return responses
            tracker.apply(action_executed(tracker.next_timestamp(), chosen.action))
            for reply in self.response_text(tracker, chosen.action):
                tracker.apply(bot_uttered(tracker.next_timestamp(), chosen.action, reply))
                responses.append(reply)
        raise ActionLoopLimit(
            f"no listen after {MAX_ACTIONS_PER_TURN} actions (policy cycle?)")
