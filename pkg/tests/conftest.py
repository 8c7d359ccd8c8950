from __future__ import annotations

import pytest

from banglabot.corpus import parse_domain_file, parse_nlu_file, parse_stories_file
from banglabot.pipeline import load_preset
from banglabot.synthetic import generate_synthetic_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """6 intents x 6 examples, 2 entity types: fast but structurally complete."""
    nlu, dom, sto = generate_synthetic_corpus(42, 6, 6, 2)
    ts = parse_nlu_file(nlu)
    domain = parse_domain_file(dom)
    stories = parse_stories_file(sto, domain, ts)
    return ts, domain, stories


@pytest.fixture(scope="session")
def small_bot(small_corpus):
    """A fully trained bot on the small corpus, shared across tests."""
    from banglabot.modelio import train_bot

    ts, domain, stories = small_corpus
    config = load_preset("P8")
    config.model.epochs = 120
    config.model.embed_dim = 32
    return train_bot(config, ts, domain, stories, seed=7)
