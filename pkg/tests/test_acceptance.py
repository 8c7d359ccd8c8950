"""Acceptance suite: the release gates, each at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to get one PASS/FAIL line
per criterion.  The expensive fixture (the full eight-preset ablation on the
reference synthetic corpus) runs once and is shared.
"""

from __future__ import annotations

import hashlib
import random
import string
import subprocess
import sys
import time

import numpy as np
import pytest

from banglabot import joint_model as jm
from banglabot.corpus import parse_domain_file, parse_nlu_file, parse_stories_file
from banglabot.dialogue import Tracker, action_executed, memoization_predict, \
    session_started, user_uttered
from banglabot.evaluation import ConfusionMatrix, run_ablation, weighted_metrics
from banglabot.features import (DenseBlock, HashedNGram, LEXICAL_DIM, SparseBlock,
                                assemble_features, char_wb_ngrams, count_vector_featurize,
                                dense_featurize, fit_count_vocab,
                                lexical_syntactic_featurize)
from banglabot.joint_model import IntentRanking
from banglabot.language import LanguageTag, detect_language
from banglabot.pipeline import PRESET_NAMES, load_preset, load_presets
from banglabot.postprocess import FallbackConfig, apply_fallback
from banglabot.reports import metrics_csv
from banglabot.synthetic import generate_synthetic_corpus
from banglabot.tokenizers import whitespace_tokenize
from tests.test_evaluation import brute_force_weighted
from tests.test_features import brute_force_char_wb

SEED = 42
ABLATION_TIME_BUDGET_S = 600.0


def report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {name}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def reference_corpus():
    nlu, dom, sto = generate_synthetic_corpus(SEED, 12, 10, 3)
    ts = parse_nlu_file(nlu)
    domain = parse_domain_file(dom)
    stories = parse_stories_file(sto, domain, ts)
    return ts, domain, stories


@pytest.fixture(scope="module")
def ablation(reference_corpus):
    """All eight presets on one identical 80-20 split of the reference corpus."""
    ts, _, _ = reference_corpus
    configs = load_presets("all")
    start = time.perf_counter()
    rows = run_ablation(configs, ts, seed=SEED, test_fraction=0.2)
    elapsed = time.perf_counter() - start
    return rows, elapsed


def test_paper_numbers_ship_as_metadata_only():
    presets = {name: load_preset(name) for name in PRESET_NAMES}
    have_refs = all(
        set(p.reference_metrics) >= {"accuracy", "precision", "recall", "f1"}
        for p in presets.values())
    best = presets["P8"].reference_metrics
    report("reference-metadata", have_refs and best["accuracy"] == 83.02
           and best["precision"] == 80.82 and best["f1"] == 80.0,
           "original-study results are preset metadata, never assertion targets")


def test_end_to_end_accuracy_gate(ablation):
    rows, elapsed = ablation
    by_name = {row.name: row for row in rows}
    failures = [row.name for row in rows if row.error]
    p8 = by_name["P8"].metrics.accuracy
    p1 = by_name["P1"].metrics.accuracy
    csv_text = metrics_csv(rows)
    lines = csv_text.strip().split("\n")
    shape_ok = len(lines) == 9 and all(len(line.split(",")) == 5 for line in lines)
    hashes = {row.split_hash for row in rows}
    ok = (not failures and p8 >= 0.90 and p1 >= 0.80
          and elapsed < ABLATION_TIME_BUDGET_S and shape_ok and len(hashes) == 1)
    report("end-to-end-gate", ok,
           f"P8 acc {p8:.3f} >= 0.90, P1 acc {p1:.3f} >= 0.80, "
           f"8 presets in {elapsed:.0f}s < {ABLATION_TIME_BUDGET_S:.0f}s, one split {hashes}")


def test_metric_identity_and_oracle():
    rng = np.random.default_rng(SEED)
    worst_identity = 0.0
    worst_oracle = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 11))
        counts = rng.integers(0, 7, size=(n, n))
        if counts.sum() == 0:
            counts[n - 1, 0] = 3
        cm = ConfusionMatrix([f"c{i}" for i in range(n)], counts)
        mine = weighted_metrics(cm)
        oracle = brute_force_weighted(cm)
        worst_identity = max(worst_identity, abs(mine.weighted_recall - mine.accuracy))
        worst_oracle = max(worst_oracle,
                           max(abs(a - b) for a, b in zip(mine.as_tuple(), oracle.as_tuple())))
    report("metric-identity", worst_identity < 1e-12 and worst_oracle < 1e-12,
           f"|recall-accuracy| <= {worst_identity:.2e}, oracle gap <= {worst_oracle:.2e} "
           "over 100 random matrices")


def test_gradient_correctness():
    vocab = fit_count_vocab([["dam", "koto"], ["dhaka", "theke"], ["hello"]], "char_wb", 1, 3)
    hashed = HashedNGram(dim=12, seed=5)

    def features(text):
        tokens = whitespace_tokenize(text)
        tv, sv = count_vector_featurize(tokens, vocab)
        lex = lexical_syntactic_featurize(tokens)
        dv, ds = dense_featurize(tokens, hashed)
        return assemble_features(
            tokens,
            [SparseBlock(vocab.dim, tv, sv), SparseBlock(LEXICAL_DIM, lex, None)],
            [DenseBlock(hashed.dim, dv, ds)])

    tags = ["O", "B-city", "I-city"]
    f1, f2 = features("dhaka theke dam koto"), features("hello dam")
    batch = [jm.TrainingInstance(f1, 0, np.array([1, 2, 0, 0], dtype=np.int64)),
             jm.TrainingInstance(f2, 1, np.array([0, 0], dtype=np.int64))]
    config = jm.JointModelConfig(embed_dim=16, transformer_layers=2, attention_heads=2,
                                 label_embed_dim=6, seed=9)
    model = jm.init_model(config, ["a", "b"], tags, f1.sparse_dim, f1.dense_dim)
    _, grads = jm.loss_and_gradients(model, batch)

    rng = np.random.default_rng(1)
    step = 1e-4
    worst = 0.0
    worst_name = ""
    for name, param in model.params.items():
        flat = param.reshape(-1)
        gflat = grads[name].reshape(-1)
        for _ in range(20):
            i = int(rng.integers(len(flat)))
            orig = flat[i]
            flat[i] = orig + step
            up, _ = jm.loss_and_gradients(model, batch)
            flat[i] = orig - step
            down, _ = jm.loss_and_gradients(model, batch)
            flat[i] = orig
            fd = (up - down) / (2 * step)
            if abs(fd) < 1e-10 and abs(gflat[i]) < 1e-10:
                continue
            rel = abs(fd - gflat[i]) / max(abs(fd), abs(gflat[i]))
            if rel > worst:
                worst, worst_name = rel, name
    report("gradient-correctness", worst < 1e-3,
           f"20 samples x {len(model.params)} blocks, worst rel err {worst:.2e} ({worst_name})")


def test_fallback_exactness():
    config = FallbackConfig(threshold=0.3, ambiguity_threshold=0.1)
    confident, r1 = apply_fallback(IntentRanking([("greet", 0.55), ("bye", 0.20)]), config)
    low, r2 = apply_fallback(IntentRanking([("greet", 0.25), ("bye", 0.10)]), config)
    ambiguous, r3 = apply_fallback(IntentRanking([("greet", 0.40), ("bye", 0.35)]), config)
    ok = (r1 is None and confident.ranked[0] == ("greet", 0.55)
          and r2 == "threshold" and low.ranked[0] == ("nlu_fallback", 0.25)
          and r3 == "ambiguity" and ambiguous.ranked[0] == ("nlu_fallback", 0.40))
    report("fallback-exactness", ok, "top<0.3, gap<0.1, and pass-through all behave per config")


def test_memoization_story_recall(reference_corpus):
    _, _, stories = reference_corpus
    total = recalled = 0
    for story in stories.stories:
        tracker = Tracker(f"replay-{story.name}")
        tracker.apply(session_started(0))
        for kind, name in story.elements():
            if kind == "intent":
                tracker.apply(user_uttered(tracker.next_timestamp(), name, name, 1.0, [],
                                           [(name, 1.0)]))
            else:
                total += 1
                prediction = memoization_predict(tracker, stories, max_history=5)
                if (prediction is not None and prediction.action == name
                        and prediction.confidence == 1.0):
                    recalled += 1
                tracker.apply(action_executed(tracker.next_timestamp(), name))
    report("memoization-recall", total > 0 and recalled == total,
           f"{recalled}/{total} story actions reproduced at confidence 1.0")


def test_char_wb_brute_force_oracle():
    rng = random.Random(SEED)
    alphabet = string.ascii_lowercase + "অআইকখগঢ়ামিল "
    mismatches = 0
    for _ in range(1000):
        token = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))
        if sorted(char_wb_ngrams(token, 1, 4)) != sorted(brute_force_char_wb(token, 1, 4)):
            mismatches += 1
    report("char-wb-oracle", mismatches == 0, "1000 random strings, exact multiset equality")


def test_cli_determinism(tmp_path):
    data_dir = tmp_path / "data"
    run = lambda *args: subprocess.run([sys.executable, "-m", "banglabot.cli", *args],
                                       capture_output=True, text=True, timeout=540)
    gen = run("gen-corpus", "--out", str(data_dir), "--seed", "42",
              "--intents", "6", "--examples", "6", "--entity-types", "2")
    assert gen.returncode == 0, gen.stderr

    digests = []
    for tag in ("one", "two"):
        out = tmp_path / f"train-{tag}"
        proc = run("train", "--data", str(data_dir), "--pipeline", "P8",
                   "--out", str(out), "--seed", "42")
        assert proc.returncode == 0, proc.stderr
        digests.append(hashlib.sha256((out / "model.bbm").read_bytes()).hexdigest())
    train_ok = digests[0] == digests[1]

    csv_digests = []
    for tag in ("one", "two"):
        out = tmp_path / f"ablate-{tag}"
        proc = run("ablate", "--data", str(data_dir), "--presets", "P1,P2",
                   "--out", str(out), "--seed", "42")
        assert proc.returncode == 0, proc.stderr
        combined = hashlib.sha256()
        for csv_file in sorted(out.glob("*.csv")):
            combined.update(csv_file.name.encode())
            combined.update(csv_file.read_bytes())
        csv_digests.append(combined.hexdigest())
    ablate_ok = csv_digests[0] == csv_digests[1]

    report("determinism", train_ok and ablate_ok,
           f"model archive {digests[0][:12]}.. and report CSVs hash-identical across reruns")


def test_language_routing_exactness():
    rng = random.Random(SEED)
    bangla_chars = "অআইঈউঊএঐওঔকখগঘচছজঝটঠডঢণতথদধনপফবভমযরলশষসহ"
    latin_words = ["ami", "tumi", "bhalo", "achen", "dam", "koto", "dhaka", "please",
                   "thanks", "kemon"]
    errors = 0
    for _ in range(50):
        text = " ".join("".join(rng.choice(bangla_chars) for _ in range(rng.randint(1, 8)))
                        for _ in range(rng.randint(1, 5)))
        tag = detect_language(text)
        errors += tag.kind != LanguageTag.BANGLA or tag.bangla_ratio != 1.0
    for _ in range(50):
        text = " ".join(rng.choice(latin_words) for _ in range(rng.randint(1, 6)))
        tag = detect_language(text)
        errors += tag.kind != LanguageTag.LATIN or tag.bangla_ratio != 0.0
    for _ in range(20):
        text = "".join(rng.choice("0123456789!?.,;:()[] ৳$#@%")
                       for _ in range(rng.randint(1, 12)))
        errors += detect_language(text).kind != LanguageTag.OTHER
    report("language-routing", errors == 0, "50 Bangla + 50 Latin + 20 other, zero errors")
