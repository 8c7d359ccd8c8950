from __future__ import annotations

import hashlib

import numpy as np
import pytest

from banglabot.dialogue import Tracker
from banglabot.modelio import ModelArchiveError, load_bot, save_bot, train_bot
from banglabot.pipeline import load_preset


@pytest.fixture(scope="module")
def saved(small_bot, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "model.bbm"
    save_bot(small_bot, str(path))
    return path


class TestArchive:
    def test_round_trip_predictions_identical(self, small_bot, small_corpus, saved):
        ts, _, _ = small_corpus
        loaded = load_bot(str(saved))
        for ex in ts.examples[:8]:
            a = small_bot.pipeline.parse(ex.text)
            b = loaded.pipeline.parse(ex.text)
            assert a.ranking.ranked == b.ranking.ranked
            assert a.entities == b.entities

    def test_round_trip_parameters_bitwise(self, small_bot, saved):
        loaded = load_bot(str(saved))
        for name, arr in small_bot.pipeline.model.params.items():
            assert np.array_equal(arr, loaded.pipeline.model.params[name]), name
        for name, arr in small_bot.ted_model.params.items():
            assert np.array_equal(arr, loaded.ted_model.params[name]), name

    def test_save_is_deterministic(self, small_bot, tmp_path):
        p1, p2 = tmp_path / "a.bbm", tmp_path / "b.bbm"
        save_bot(small_bot, str(p1))
        save_bot(small_bot, str(p2))
        assert hashlib.sha256(p1.read_bytes()).digest() == hashlib.sha256(p2.read_bytes()).digest()

    def test_retrain_same_seed_same_bytes(self, small_corpus, tmp_path):
        ts, domain, stories = small_corpus
        config = load_preset("P1")
        config.model.epochs = 15
        config.model.embed_dim = 16
        paths = []
        for name in ("a.bbm", "b.bbm"):
            bot = train_bot(config, ts, domain, stories, seed=3)
            path = tmp_path / name
            save_bot(bot, str(path))
            paths.append(path.read_bytes())
        assert paths[0] == paths[1]

    def test_loaded_bot_converses(self, small_corpus, saved):
        ts, _, _ = small_corpus
        loaded = load_bot(str(saved))
        engine = loaded.engine()
        tracker = Tracker("t")
        text = ts.examples[0].text
        replies = engine.run_turn(tracker, loaded.pipeline.parse(text), text)
        assert replies

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bbm"
        path.write_bytes(b"NOT-A-MODEL" * 4)
        with pytest.raises(ModelArchiveError):
            load_bot(str(path))
