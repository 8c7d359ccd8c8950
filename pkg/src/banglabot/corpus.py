"""Training-data model and file formats.

Three text files describe a bot: the NLU file (intent blocks with annotated
example utterances plus synonym blocks), the domain file (intents, entities,
responses, actions) and the stories file (alternating intent/action scripts,
plus rules).  The format is a restricted, 2-space-indented subset of the
usual YAML layout; it is parsed here directly so errors carry line numbers
and no general YAML machinery is involved.

Entity annotations use the inline markup ``[surface](entity)``; offsets are
unicode code-point offsets into the markup-stripped text.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

RESERVED_INTENTS = ("nlu_fallback",)
RESERVED_ACTIONS = ("action_listen", "action_default_fallback")


class CorpusError(Exception):
    """Base class for data-file problems."""


class MarkupError(CorpusError):
    pass


class UnbalancedMarkup(MarkupError):
    pass


class EmptyEntityName(MarkupError):
    pass


class CorpusSyntaxError(CorpusError):
    """Malformed file content; carries a 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateIntentBlock(CorpusSyntaxError):
    pass


class IntentWithNoExamples(CorpusSyntaxError):
    pass


class UnknownIntentInStory(CorpusSyntaxError):
    pass


class UnknownActionInStory(CorpusSyntaxError):
    pass


class IntentTooSmall(CorpusError):
    def __init__(self, intent: str, count: int):
        super().__init__(f"intent {intent!r} has {count} example(s); need at least 2 to split")
        self.intent = intent


@dataclass(frozen=True)
class EntitySpan:
    start: int
    end: int
    entity: str
    value: str

    def validate(self, text: str) -> None:
        if not (0 <= self.start < self.end <= len(text)):
            raise MarkupError(f"span [{self.start}, {self.end}) out of bounds for text of length {len(text)}")
        if text[self.start:self.end] != self.value:
            raise MarkupError(f"span value {self.value!r} != text[{self.start}:{self.end}]")


@dataclass(frozen=True)
class TrainingExample:
    text: str
    intent: str
    entities: tuple[EntitySpan, ...] = ()


@dataclass
class TrainingSet:
    examples: list[TrainingExample]
    intents: list[str]
    entity_types: list[str]
    synonyms: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_examples(cls, examples: list[TrainingExample],
                      synonyms: dict[str, str] | None = None) -> TrainingSet:
        intents = sorted({ex.intent for ex in examples})
        entity_types = sorted({sp.entity for ex in examples for sp in ex.entities})
        return cls(examples, intents, entity_types, dict(synonyms or {}))

    def by_intent(self) -> dict[str, list[TrainingExample]]:
        out: dict[str, list[TrainingExample]] = {name: [] for name in self.intents}
        for ex in self.examples:
            out[ex.intent].append(ex)
        return out


@dataclass
class Domain:
    responses: dict[str, list[str]]
    actions: list[str]
    intents: list[str]
    entity_types: list[str]


@dataclass(frozen=True)
class Step:
    kind: str  # "intent" | "action"
    name: str


@dataclass
class Story:
    name: str
    steps: list[Step]

    def elements(self) -> list[tuple[str, str]]:
        return [(s.kind, s.name) for s in self.steps]


@dataclass
class StorySet:
    stories: list[Story]
    rules: list[Story] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Entity markup
# ---------------------------------------------------------------------------

def parse_entity_markup(raw: str) -> tuple[str, list[EntitySpan]]:
    """Strip ``[surface](entity)`` annotations, returning plain text and spans."""
    out: list[str] = []
    spans: list[EntitySpan] = []
    pos = 0
    out_len = 0
    n = len(raw)
    while pos < n:
        ch = raw[pos]
        if ch != "[":
            out.append(ch)
            out_len += 1
            pos += 1
            continue
        close = raw.find("]", pos + 1)
        if close == -1:
            raise UnbalancedMarkup(f"dangling '[' at offset {pos}")
        surface = raw[pos + 1:close]
        if close + 1 >= n or raw[close + 1] != "(":
            raise UnbalancedMarkup(f"annotation at offset {pos} is missing '](entity)'")
        paren = raw.find(")", close + 2)
        if paren == -1:
            raise UnbalancedMarkup(f"annotation at offset {pos} has an unclosed entity name")
        entity = raw[close + 2:paren]
        if not entity.strip():
            raise EmptyEntityName(f"annotation at offset {pos} has an empty entity name")
        if not surface:
            raise UnbalancedMarkup(f"annotation at offset {pos} has an empty surface")
        spans.append(EntitySpan(out_len, out_len + len(surface), entity.strip(), surface))
        out.append(surface)
        out_len += len(surface)
        pos = paren + 1
    text = "".join(out)
    for span in spans:
        span.validate(text)
    return text, spans


def render_entity_markup(text: str, spans: tuple[EntitySpan, ...] | list[EntitySpan]) -> str:
    """Inverse of parse_entity_markup for non-overlapping, in-order spans."""
    parts: list[str] = []
    cursor = 0
    for span in sorted(spans, key=lambda s: s.start):
        parts.append(text[cursor:span.start])
        parts.append(f"[{text[span.start:span.end]}]({span.entity})")
        cursor = span.end
    parts.append(text[cursor:])
    return "".join(parts)


# ---------------------------------------------------------------------------
# Line-level scaffolding shared by the three parsers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Line:
    no: int      # 1-based
    indent: int  # number of leading spaces
    body: str    # stripped content


def _significant_lines(contents: str) -> list[_Line]:
    lines = []
    for i, raw in enumerate(contents.split("\n"), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip(" "))
        if raw.lstrip(" ").startswith("\t") or "\t" in raw[:indent]:
            raise CorpusSyntaxError(i, "tabs are not allowed in indentation")
        lines.append(_Line(i, indent, stripped))
    return lines


def _expect_key(line: _Line, key: str) -> None:
    if line.body != f"{key}:":
        raise CorpusSyntaxError(line.no, f"expected '{key}:', found {line.body!r}")


def _item_value(line: _Line) -> str:
    if not line.body.startswith("- "):
        raise CorpusSyntaxError(line.no, f"expected a '- ' list item, found {line.body!r}")
    value = line.body[2:].strip()
    if not value:
        raise CorpusSyntaxError(line.no, "empty list item")
    return value


def _keyed_item(line: _Line, *keys: str) -> tuple[str, str]:
    """Parse '- key: value' items, returning (key, value)."""
    value = _item_value(line)
    for key in keys:
        prefix = f"{key}:"
        if value.startswith(prefix):
            name = value[len(prefix):].strip()
            if not name:
                raise CorpusSyntaxError(line.no, f"'{key}:' item with no value")
            return key, name
    raise CorpusSyntaxError(line.no, f"expected one of {', '.join(repr(k) + ':' for k in keys)} in list item")


# ---------------------------------------------------------------------------
# NLU file
# ---------------------------------------------------------------------------

def parse_nlu_file(contents: str) -> TrainingSet:
    lines = _significant_lines(contents)
    if not lines:
        raise CorpusSyntaxError(1, "empty nlu file")
    _expect_key(lines[0], "nlu")
    if lines[0].indent != 0:
        raise CorpusSyntaxError(lines[0].no, "'nlu:' must not be indented")

    examples: list[TrainingExample] = []
    synonyms: dict[str, str] = {}
    seen_intents: set[str] = set()

    i = 1
    while i < len(lines):
        line = lines[i]
        if line.indent != 2:
            raise CorpusSyntaxError(line.no, "expected an intent or synonym block at indent 2")
        kind, name = _keyed_item(line, "intent", "synonym")
        i += 1
        if i >= len(lines) or lines[i].indent != 4:
            raise CorpusSyntaxError(line.no, f"block {name!r} is missing its 'examples:' section")
        _expect_key(lines[i], "examples")
        i += 1
        items: list[tuple[int, str]] = []
        while i < len(lines) and lines[i].indent == 6:
            items.append((lines[i].no, _item_value(lines[i])))
            i += 1
        if kind == "intent":
            if name in seen_intents:
                raise DuplicateIntentBlock(line.no, f"intent {name!r} declared twice")
            seen_intents.add(name)
            if not items:
                raise IntentWithNoExamples(line.no, f"intent {name!r} has no examples")
            for no, raw in items:
                try:
                    text, spans = parse_entity_markup(raw)
                except MarkupError as exc:
                    raise CorpusSyntaxError(no, str(exc)) from exc
                if not text.strip():
                    raise CorpusSyntaxError(no, "example text is empty after markup stripping")
                examples.append(TrainingExample(text, name, tuple(spans)))
        else:
            if not items:
                raise CorpusSyntaxError(line.no, f"synonym block {name!r} has no examples")
            for no, variant in items:
                if variant in synonyms and synonyms[variant] != name:
                    raise CorpusSyntaxError(
                        no, f"synonym {variant!r} maps to both {synonyms[variant]!r} and {name!r}")
                synonyms[variant] = name

    if not examples:
        raise CorpusSyntaxError(lines[0].no, "nlu file declares no intents")
    return TrainingSet.from_examples(examples, synonyms)


def serialize_nlu(ts: TrainingSet) -> str:
    """Canonical text form; parse_nlu_file(serialize_nlu(ts)) reproduces ts."""
    grouped: dict[str, list[TrainingExample]] = {}
    order: list[str] = []
    for ex in ts.examples:
        if ex.intent not in grouped:
            grouped[ex.intent] = []
            order.append(ex.intent)
        grouped[ex.intent].append(ex)
    out = ["nlu:"]
    for intent in order:
        out.append(f"  - intent: {intent}")
        out.append("    examples:")
        for ex in grouped[intent]:
            out.append(f"      - {render_entity_markup(ex.text, ex.entities)}")
    canon_to_variants: dict[str, list[str]] = {}
    for variant, canon in ts.synonyms.items():
        canon_to_variants.setdefault(canon, []).append(variant)
    for canon in sorted(canon_to_variants):
        out.append(f"  - synonym: {canon}")
        out.append("    examples:")
        for variant in sorted(canon_to_variants[canon]):
            out.append(f"      - {variant}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Domain file
# ---------------------------------------------------------------------------

def parse_domain_file(contents: str) -> Domain:
    lines = _significant_lines(contents)
    if not lines:
        raise CorpusSyntaxError(1, "empty domain file")

    intents: list[str] = []
    entities: list[str] = []
    responses: dict[str, list[str]] = {}
    actions: list[str] = []
    seen_sections: set[str] = set()

    i = 0
    while i < len(lines):
        line = lines[i]
        if line.indent != 0:
            raise CorpusSyntaxError(line.no, "expected a top-level section")
        section = line.body.rstrip(":")
        if f"{section}:" != line.body or section not in ("intents", "entities", "responses", "actions"):
            raise CorpusSyntaxError(line.no, f"unknown domain section {line.body!r}")
        if section in seen_sections:
            raise CorpusSyntaxError(line.no, f"section '{section}:' declared twice")
        seen_sections.add(section)
        i += 1
        if section in ("intents", "entities", "actions"):
            target = {"intents": intents, "entities": entities, "actions": actions}[section]
            while i < len(lines) and lines[i].indent == 2:
                target.append(_item_value(lines[i]))
                i += 1
        else:
            while i < len(lines) and lines[i].indent == 2:
                name_line = lines[i]
                if not name_line.body.endswith(":") or " " in name_line.body[:-1]:
                    raise CorpusSyntaxError(name_line.no, f"expected a response name, found {name_line.body!r}")
                name = name_line.body[:-1]
                if not name.startswith("utter_"):
                    raise CorpusSyntaxError(name_line.no, f"response name {name!r} must start with 'utter_'")
                if name in responses:
                    raise CorpusSyntaxError(name_line.no, f"response {name!r} declared twice")
                i += 1
                variants: list[str] = []
                while i < len(lines) and lines[i].indent == 4:
                    variants.append(_item_value(lines[i]))
                    i += 1
                if not variants:
                    raise CorpusSyntaxError(name_line.no, f"response {name!r} has no text variants")
                responses[name] = variants

    for name in responses:
        count = actions.count(name)
        if count != 1:
            raise CorpusSyntaxError(
                1, f"actions list must contain response {name!r} exactly once (found {count})")
    return Domain(responses=responses, actions=actions, intents=intents, entity_types=entities)


def serialize_domain(domain: Domain) -> str:
    out: list[str] = []
    out.append("intents:")
    out.extend(f"  - {name}" for name in domain.intents)
    out.append("entities:")
    out.extend(f"  - {name}" for name in domain.entity_types)
    out.append("responses:")
    for name in domain.responses:
        out.append(f"  {name}:")
        out.extend(f"    - {text}" for text in domain.responses[name])
    out.append("actions:")
    out.extend(f"  - {name}" for name in domain.actions)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Stories file
# ---------------------------------------------------------------------------

def _parse_story_block(lines: list[_Line], i: int, head_key: str,
                       domain: Domain, ts: TrainingSet) -> tuple[Story, int]:
    head = lines[i]
    _, name = _keyed_item(head, head_key)
    i += 1
    if i >= len(lines) or lines[i].indent != 4:
        raise CorpusSyntaxError(head.no, f"{head_key} {name!r} is missing its 'steps:' section")
    _expect_key(lines[i], "steps")
    i += 1
    steps: list[Step] = []
    known_intents = set(ts.intents) | set(RESERVED_INTENTS)
    known_actions = set(domain.actions) | set(RESERVED_ACTIONS)
    while i < len(lines) and lines[i].indent == 6:
        kind, value = _keyed_item(lines[i], "intent", "action")
        if kind == "intent":
            if value not in known_intents:
                raise UnknownIntentInStory(lines[i].no, f"story references unknown intent {value!r}")
        else:
            if value not in known_actions:
                raise UnknownActionInStory(lines[i].no, f"story references unknown action {value!r}")
        expected = "intent" if len(steps) % 2 == 0 else "action"
        if kind != expected:
            raise CorpusSyntaxError(
                lines[i].no, f"steps must alternate intent/action starting with an intent; expected {expected}")
        steps.append(Step(kind, value))
        i += 1
    if not steps:
        raise CorpusSyntaxError(head.no, f"{head_key} {name!r} has no steps")
    return Story(name, steps), i


def parse_stories_file(contents: str, domain: Domain, ts: TrainingSet) -> StorySet:
    lines = _significant_lines(contents)
    if not lines:
        raise CorpusSyntaxError(1, "empty stories file")
    _expect_key(lines[0], "stories")

    stories: list[Story] = []
    rules: list[Story] = []
    names: set[str] = set()

    i = 1
    section_key = "story"
    target = stories
    while i < len(lines):
        line = lines[i]
        if line.indent == 0:
            _expect_key(line, "rules")
            if section_key == "rule":
                raise CorpusSyntaxError(line.no, "'rules:' declared twice")
            section_key, target = "rule", rules
            i += 1
            continue
        if line.indent != 2:
            raise CorpusSyntaxError(line.no, f"expected a '- {section_key}:' block at indent 2")
        story, i = _parse_story_block(lines, i, section_key, domain, ts)
        if story.name in names:
            raise CorpusSyntaxError(line.no, f"duplicate story name {story.name!r}")
        names.add(story.name)
        target.append(story)

    return StorySet(stories=stories, rules=rules)


def serialize_stories(story_set: StorySet) -> str:
    out = ["stories:"]
    for story in story_set.stories:
        out.append(f"  - story: {story.name}")
        out.append("    steps:")
        out.extend(f"      - {s.kind}: {s.name}" for s in story.steps)
    if story_set.rules:
        out.append("rules:")
        for rule in story_set.rules:
            out.append(f"  - rule: {rule.name}")
            out.append("    steps:")
            out.extend(f"      - {s.kind}: {s.name}" for s in rule.steps)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Train/test split
# ---------------------------------------------------------------------------

def split_train_test(ts: TrainingSet, test_fraction: float, seed: int) -> tuple[TrainingSet, TrainingSet]:
    """Stratified per-intent split: max(1, floor(n*fraction)) examples to test."""
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    per_intent = ts.by_intent()
    for intent in ts.intents:
        if len(per_intent[intent]) < 2:
            raise IntentTooSmall(intent, len(per_intent[intent]))

    rng = random.Random(seed)
    test_ids: set[int] = set()
    index_of = {id(ex): i for i, ex in enumerate(ts.examples)}
    for intent in sorted(ts.intents):
        idxs = [index_of[id(ex)] for ex in per_intent[intent]]
        shuffled = idxs[:]
        rng.shuffle(shuffled)
        n_test = max(1, math.floor(len(idxs) * test_fraction))
        test_ids.update(shuffled[:n_test])

    train_examples = [ex for i, ex in enumerate(ts.examples) if i not in test_ids]
    test_examples = [ex for i, ex in enumerate(ts.examples) if i in test_ids]
    train = replace(ts, examples=train_examples, intents=list(ts.intents),
                    entity_types=list(ts.entity_types), synonyms=dict(ts.synonyms))
    test = replace(ts, examples=test_examples, intents=list(ts.intents),
                   entity_types=list(ts.entity_types), synonyms=dict(ts.synonyms))
    return train, test
