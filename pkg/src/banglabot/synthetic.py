"""Deterministic synthetic FAQ corpus in Bangla script and Latin transliteration.

The generator stands in for a private client dataset: templated utterances
per intent, each carrying at least one intent-specific keyword (so the data
is separable by construction), with entity values embedded via
``[surface](entity)`` markup, one response per intent, one story per intent
plus a single multi-turn story, and one fallback rule.

Identical arguments produce byte-identical files.
"""

from __future__ import annotations

import random

from .corpus import Domain, Story, StorySet, Step

# Keywords are unique to their intent and carry all the class signal; the
# sentence shells below are shared by every intent so they stay neutral.
_INTENT_CATALOG: list[tuple[str, list[str]]] = [
    ("greet", ["হ্যালো", "নমস্কার", "hello", "salam"]),
    ("goodbye", ["বিদায়", "biday", "bye", "টাটা"]),
    ("thanks", ["ধন্যবাদ", "dhonnobad", "thanks", "শুকরিয়া"]),
    ("ask_price", ["দাম", "dam", "price", "মূল্য"]),
    ("ask_discount", ["ছাড়", "discount", "chhar", "অফার"]),
    ("ask_course_list", ["তালিকা", "talika", "list", "কোর্সসমূহ"]),
    ("ask_course_details", ["বিস্তারিত", "bistarito", "details", "সিলেবাস"]),
    ("ask_duration", ["মেয়াদ", "meyad", "duration", "কতদিন"]),
    ("ask_location", ["ঠিকানা", "thikana", "address", "কোথায়"]),
    ("ask_contact", ["নম্বর", "number", "contact", "ফোন"]),
    ("ask_delivery", ["ডেলিভারি", "delivery", "courier", "কুরিয়ার"]),
    ("ask_payment", ["পেমেন্ট", "payment", "bkash", "বিকাশ"]),
    ("ask_refund", ["রিফান্ড", "refund", "ferot", "ফেরত"]),
    ("ask_admission", ["ভর্তি", "vorti", "admission", "enroll"]),
    ("affirm", ["হ্যাঁ", "hae", "yes", "অবশ্যই"]),
    ("deny", ["না", "nah", "no", "nite"]),
]

# Intent-neutral sentence shells; every intent draws from the same pool so a
# shell never identifies a class on its own.  Each example interpolates TWO
# keywords of its intent, which keeps the class signal dominant even when a
# particular keyword/shell combination only occurs in the test split.
_SHELLS = [
    "{kw}",
    "{kw}?",
    "bhai {kw}",
    "{kw} janan",
    "{kw} বলুন।",
    "apnader {kw}",
]

_ENTITY_CATALOG: list[tuple[str, list[str]]] = [
    ("city", ["ঢাকা", "dhaka", "চট্টগ্রাম", "chittagong", "সিলেট", "sylhet", "cox bazar"]),
    ("course", ["পাইথন", "python", "graphics", "গ্রাফিক্স", "data science", "ইংরেজি"]),
    ("item", ["বই", "boi", "laptop", "ল্যাপটপ", "gift box", "মোবাইল"]),
]

# How an entity phrase attaches to a base utterance.
_ENTITY_WRAPPERS = [
    "[{val}]({typ}) {base}",
    "{base} [{val}]({typ})",
    "[{val}]({typ}) niye {base}",
]

# Latin-script variants mapped onto a Bangla canonical value, emitted as
# synonym blocks so the synonym mapper has something real to do.
_SYNONYM_SEEDS = [
    ("ঢাকা", ["dhaka", "dhk"]),
    ("চট্টগ্রাম", ["chittagong", "ctg"]),
    ("পাইথন", ["python"]),
]


def _intent_defs(n_intents: int) -> list[tuple[str, list[str]]]:
    defs = list(_INTENT_CATALOG[:n_intents])
    for i in range(len(defs), n_intents):
        defs.append((f"topic_{i}", [f"bishoy{i}", f"বিষয়{i}", f"jinis{i}", f"mokam{i}"]))
    return defs


def _entity_defs(n_entity_types: int) -> list[tuple[str, list[str]]]:
    defs = list(_ENTITY_CATALOG[:n_entity_types])
    for i in range(len(defs), n_entity_types):
        defs.append((f"thing{i}", [f"mal{i}a", f"mal{i}b", f"mal{i}c"]))
    return defs


def generate_synthetic_corpus(seed: int, n_intents: int, examples_per_intent: int,
                              n_entity_types: int) -> tuple[str, str, str]:
    """Return (nlu, domain, stories) file contents for a synthetic bot."""
    if n_intents < 2:
        raise ValueError("n_intents must be >= 2")
    if examples_per_intent < 4:
        raise ValueError("examples_per_intent must be >= 4")
    if n_entity_types < 0:
        raise ValueError("n_entity_types must be >= 0")

    rng = random.Random(seed)
    intents = _intent_defs(n_intents)
    entities = _entity_defs(n_entity_types)

    nlu_lines = ["nlu:"]
    for intent_idx, (name, keywords) in enumerate(intents):
        # One candidate pool per leading keyword; selection round-robins over
        # the pools so every keyword shows up several times per intent.
        pools: list[list[str]] = []
        for kw_idx, kw in enumerate(keywords):
            pool: list[str] = []
            others = [k for k in keywords if k != kw]
            for pair_idx, other in enumerate(others):
                for shell_idx, shell in enumerate(_SHELLS):
                    base = shell.format(kw=f"{kw} {other}")
                    if entities and (pair_idx + shell_idx) % 3 == 2:
                        typ, values = entities[(intent_idx + kw_idx + shell_idx) % len(entities)]
                        val = values[(shell_idx + 2 * pair_idx + intent_idx) % len(values)]
                        wrapper = _ENTITY_WRAPPERS[(shell_idx + pair_idx) % len(_ENTITY_WRAPPERS)]
                        base = wrapper.format(val=val, typ=typ, base=base)
                    pool.append(base)
            rng.shuffle(pool)
            pools.append(pool)
        if sum(len(p) for p in pools) < examples_per_intent:
            raise ValueError(
                f"cannot produce {examples_per_intent} unique examples for intent {name!r} "
                f"(only {sum(len(p) for p in pools)} template combinations)")
        chosen: list[str] = []
        kw_cursor = 0
        while len(chosen) < examples_per_intent:
            pool = pools[kw_cursor % len(pools)]
            kw_cursor += 1
            if pool:
                chosen.append(pool.pop())
        nlu_lines.append(f"  - intent: {name}")
        nlu_lines.append("    examples:")
        nlu_lines.extend(f"      - {text}" for text in chosen)

    included_values = {val for _, values in entities for val in values}
    for canon, variants in _SYNONYM_SEEDS:
        if canon not in included_values:
            continue
        nlu_lines.append(f"  - synonym: {canon}")
        nlu_lines.append("    examples:")
        nlu_lines.extend(f"      - {v}" for v in variants)
    nlu_contents = "\n".join(nlu_lines) + "\n"

    responses = {}
    for name, _ in intents:
        responses[f"utter_{name}"] = [
            f"({name}) apnar proshner uttor ekhane.",
            f"({name}) এই যে আপনার উত্তর।",
        ]
    domain = Domain(
        responses=responses,
        actions=list(responses),
        intents=[name for name, _ in intents],
        entity_types=[typ for typ, _ in entities],
    )

    stories = [
        Story(f"story_{name}", [Step("intent", name), Step("action", f"utter_{name}")])
        for name, _ in intents
    ]
    first, second = intents[0][0], intents[1][0]
    stories.append(Story("story_follow_up", [
        Step("intent", first), Step("action", f"utter_{first}"),
        Step("intent", second), Step("action", f"utter_{second}"),
    ]))
    rules = [Story("rule_fallback", [
        Step("intent", "nlu_fallback"), Step("action", "action_default_fallback"),
    ])]

    from .corpus import serialize_domain, serialize_stories
    return nlu_contents, serialize_domain(domain), serialize_stories(StorySet(stories, rules))
