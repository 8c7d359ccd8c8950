from __future__ import annotations

import numpy as np
import pytest

from banglabot.corpus import split_train_test
from banglabot.evaluation import (AblationRow, ConfusionMatrix, EmptyMatrix, MetricsRow,
                                  UnknownLabel, confidence_histogram, confusion,
                                  entity_span_scores, evaluate_pipeline, run_ablation,
                                  weighted_metrics)
from banglabot.pipeline import load_preset
from banglabot.reports import (confusion_csv, confusion_svg, histogram_csv, histogram_svg,
                               metrics_csv)


def brute_force_weighted(cm: ConfusionMatrix) -> MetricsRow:
    """Independent per-class oracle: explicit loops, no vectorization."""
    n = len(cm.labels)
    total = sum(int(cm.counts[i, j]) for i in range(n) for j in range(n))
    acc = sum(int(cm.counts[i, i]) for i in range(n)) / total
    wp = wr = wf = 0.0
    for i in range(n):
        support = sum(int(cm.counts[i, j]) for j in range(n))
        predicted = sum(int(cm.counts[g, i]) for g in range(n))
        tp = int(cm.counts[i, i])
        p = tp / predicted if predicted else 0.0
        r = tp / support if support else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        weight = support / total
        wp += weight * p
        wr += weight * r
        wf += weight * f
    return MetricsRow(acc, wp, wr, wf)


class TestConfusion:
    def test_direct_count(self):
        cm = confusion(["A", "A", "B"], ["A", "B", "B"], ["A", "B"])
        assert cm.counts.tolist() == [[1, 1], [0, 1]]

    def test_all_correct_diagonal(self):
        cm = confusion(["A", "B"], ["A", "B"], ["A", "B"])
        assert cm.counts.tolist() == [[1, 0], [0, 1]]

    def test_empty_input_zero_matrix(self):
        cm = confusion([], [], ["A", "B"])
        assert cm.counts.sum() == 0

    def test_unknown_label(self):
        with pytest.raises(UnknownLabel):
            confusion(["A"], ["C"], ["A", "B"])


class TestWeightedMetrics:
    def test_hand_computed_case(self):
        cm = ConfusionMatrix(["A", "B"], np.array([[1, 1], [0, 1]]))
        m = weighted_metrics(cm)
        assert abs(m.accuracy - 2 / 3) < 1e-12
        assert abs(m.weighted_precision - 5 / 6) < 1e-12
        assert abs(m.weighted_recall - 2 / 3) < 1e-12
        assert abs(m.weighted_f1 - 2 / 3) < 1e-12

    def test_diagonal_all_ones(self):
        cm = ConfusionMatrix(["A", "B"], np.array([[3, 0], [0, 2]]))
        assert weighted_metrics(cm).as_tuple() == (1.0, 1.0, 1.0, 1.0)

    def test_single_class(self):
        cm = ConfusionMatrix(["A"], np.array([[4]]))
        assert weighted_metrics(cm).as_tuple() == (1.0, 1.0, 1.0, 1.0)

    def test_empty_matrix_rejected(self):
        with pytest.raises(EmptyMatrix):
            weighted_metrics(ConfusionMatrix(["A"], np.array([[0]])))

    def test_recall_equals_accuracy_and_oracle_agrees(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(2, 11))
            counts = rng.integers(0, 9, size=(n, n))
            if counts.sum() == 0:
                counts[0, 0] = 1
            cm = ConfusionMatrix([f"c{i}" for i in range(n)], counts)
            mine = weighted_metrics(cm)
            oracle = brute_force_weighted(cm)
            assert abs(mine.weighted_recall - mine.accuracy) < 1e-12
            for a, b in zip(mine.as_tuple(), oracle.as_tuple()):
                assert abs(a - b) < 1e-12


class TestHistogram:
    def test_top_bin_right_inclusive(self):
        hist = confidence_histogram([(True, 0.99), (True, 1.0)])
        assert hist.correct_counts[-1] == 2

    def test_zero_confidence_first_bin(self):
        hist = confidence_histogram([(False, 0.0)])
        assert hist.wrong_counts[0] == 1

    def test_totals_conserved(self):
        rng = np.random.default_rng(1)
        results = [(bool(rng.integers(2)), float(rng.random())) for _ in range(10)]
        hist = confidence_histogram(results)
        assert hist.correct_counts.sum() + hist.wrong_counts.sum() == 10

    def test_confidence_out_of_range(self):
        with pytest.raises(Exception):
            confidence_histogram([(True, 1.5)])


class TestEntityScores:
    def test_perfect(self):
        keys = {(0, 1, 2, "city")}
        m = entity_span_scores(keys, set(keys))
        assert m.weighted_f1 == 1.0

    def test_no_predictions(self):
        m = entity_span_scores({(0, 1, 2, "city")}, set())
        assert m.weighted_precision == 0.0 and m.weighted_recall == 0.0


@pytest.fixture(scope="module")
def eval_setup(request):
    ts = request.getfixturevalue("small_corpus")[0]
    train, test = split_train_test(ts, 0.2, 42)
    config = load_preset("P1")
    config.model.epochs = 100
    config.model.embed_dim = 32
    return ts, train, test, config


class TestEvaluatePipeline:
    def test_report_shape_and_determinism(self, eval_setup):
        _, train, test, config = eval_setup
        r1 = evaluate_pipeline(config, train, test, seed=1)
        r2 = evaluate_pipeline(config, train, test, seed=1)
        assert r1.metrics == r2.metrics
        assert np.array_equal(r1.confusion.counts, r2.confusion.counts)
        assert r1.split_hash == r2.split_hash
        assert r1.confusion.total == len(test.examples)
        assert len(r1.loss_curve) == config.model.epochs

    def test_empty_test_set_rejected(self, eval_setup):
        ts, train, _, config = eval_setup
        empty = type(ts)(examples=[], intents=ts.intents,
                         entity_types=ts.entity_types, synonyms={})
        with pytest.raises(EmptyMatrix):
            evaluate_pipeline(config, train, empty, seed=1)

    def test_fallback_label_present_when_configured(self, eval_setup):
        ts, train, test, _ = eval_setup
        config = load_preset("P3")
        config.model.epochs = 60
        config.model.embed_dim = 32
        report = evaluate_pipeline(config, train, test, seed=1)
        assert "nlu_fallback" in report.confusion.labels


class TestAblation:
    def test_rows_share_split_and_match_single_eval(self, eval_setup):
        ts, train, test, config = eval_setup
        rows = run_ablation([config], ts, seed=42)
        assert len(rows) == 1
        single = evaluate_pipeline(config, train, test, seed=42)
        assert rows[0].metrics == single.metrics
        assert rows[0].split_hash == single.split_hash

    def test_failing_config_reported_not_raised(self, eval_setup):
        ts, *_ , config = eval_setup
        bad = load_preset("P1")
        bad.count_analyzer = "bogus"  # breaks at fit time
        bad.model.epochs = 10
        rows = run_ablation([bad, config], ts, seed=42)
        assert rows[0].error is not None and rows[0].metrics is None
        assert rows[1].error is None and rows[1].metrics is not None


class TestReports:
    def _report(self, eval_setup):
        ts, train, test, config = eval_setup
        return evaluate_pipeline(config, train, test, seed=3)

    def test_metrics_csv_format(self, eval_setup):
        report = self._report(eval_setup)
        text = metrics_csv([AblationRow(report.pipeline, report.metrics, report.split_hash)])
        lines = text.strip().split("\n")
        assert lines[0] == "pipeline,accuracy,precision,recall,f1"
        fields = lines[1].split(",")
        assert fields[0] == "P1" and len(fields) == 5
        assert all(len(f.split(".")[1]) == 4 for f in fields[1:])

    def test_failed_row_has_empty_fields(self):
        text = metrics_csv([AblationRow("P9", None, "x", error="boom")])
        assert text.strip().split("\n")[1] == "P9,,,,"

    def test_confusion_csv_round_shape(self, eval_setup):
        report = self._report(eval_setup)
        lines = confusion_csv(report.confusion).strip().split("\n")
        assert len(lines) == len(report.confusion.labels) + 1

    def test_histogram_csv_has_20_bins(self, eval_setup):
        report = self._report(eval_setup)
        lines = histogram_csv(report.histogram).strip().split("\n")
        assert len(lines) == 21

    def test_svg_outputs_are_valid_ish(self, eval_setup):
        report = self._report(eval_setup)
        for text in (confusion_svg(report.confusion), histogram_svg(report.histogram)):
            assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
