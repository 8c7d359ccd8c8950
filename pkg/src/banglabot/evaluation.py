"""Evaluation harness: metrics, confusion matrices, confidence histograms,
and the eight-pipeline ablation runner.

Metrics use support-weighted averaging, under which weighted recall equals
plain accuracy exactly; that identity is asserted by the tests.  All
pipelines in one ablation run share the identical train/test split (the
split is hashed into each row so reports can prove it).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .corpus import TrainingSet, split_train_test
from .features import PretrainedTable
from .pipeline import PipelineConfig, train_pipeline

HISTOGRAM_BINS = 20


class EvaluationError(Exception):
    pass


class UnknownLabel(EvaluationError):
    pass


class EmptyMatrix(EvaluationError):
    pass


@dataclass
class ConfusionMatrix:
    labels: list[str]
    counts: np.ndarray  # [gold, predicted]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class MetricsRow:
    accuracy: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.accuracy, self.weighted_precision, self.weighted_recall, self.weighted_f1)


@dataclass
class ConfidenceHistogram:
    edges: np.ndarray           # HISTOGRAM_BINS + 1 uniform edges over [0, 1]
    correct_counts: np.ndarray  # per bin
    wrong_counts: np.ndarray


@dataclass
class EvaluationReport:
    pipeline: str
    metrics: MetricsRow
    confusion: ConfusionMatrix
    histogram: ConfidenceHistogram
    loss_curve: list[float]
    split_hash: str
    entity_metrics: MetricsRow | None = None
    per_example: list[dict] = field(default_factory=list)


def confusion(golds: list[str], preds: list[str], labels: list[str]) -> ConfusionMatrix:
    if len(golds) != len(preds):
        raise EvaluationError(f"{len(golds)} golds vs {len(preds)} predictions")
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for g, p in zip(golds, preds):
        if g not in index:
            raise UnknownLabel(f"gold label {g!r} not in label set")
        if p not in index:
            raise UnknownLabel(f"predicted label {p!r} not in label set")
        counts[index[g], index[p]] += 1
    return ConfusionMatrix(list(labels), counts)


def weighted_metrics(cm: ConfusionMatrix) -> MetricsRow:
    """Support-weighted precision/recall/F1 with the 0-if-undefined convention."""
    total = cm.total
    if total == 0:
        raise EmptyMatrix("confusion matrix has no observations")
    counts = cm.counts.astype(np.float64)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    diag = np.diag(counts)

    precision = np.divide(diag, predicted, out=np.zeros_like(diag), where=predicted > 0)
    recall = np.divide(diag, support, out=np.zeros_like(diag), where=support > 0)
    pr_sum = precision + recall
    f1 = np.divide(2.0 * precision * recall, pr_sum, out=np.zeros_like(diag), where=pr_sum > 0)

    weights = support / total
    return MetricsRow(
        accuracy=float(diag.sum() / total),
        weighted_precision=float((weights * precision).sum()),
        weighted_recall=float((weights * recall).sum()),
        weighted_f1=float((weights * f1).sum()),
    )


def confidence_histogram(results: list[tuple[bool, float]]) -> ConfidenceHistogram:
    """20 uniform bins over [0, 1]; the last bin includes its right edge."""
    edges = np.linspace(0.0, 1.0, HISTOGRAM_BINS + 1)
    correct = np.zeros(HISTOGRAM_BINS, dtype=np.int64)
    wrong = np.zeros(HISTOGRAM_BINS, dtype=np.int64)
    for ok, conf in results:
        if not (0.0 <= conf <= 1.0):
            raise EvaluationError(f"confidence {conf} outside [0, 1]")
        bin_i = min(int(conf * HISTOGRAM_BINS), HISTOGRAM_BINS - 1)
        (correct if ok else wrong)[bin_i] += 1
    return ConfidenceHistogram(edges, correct, wrong)


# ---------------------------------------------------------------------------
# Pipeline evaluation
# ---------------------------------------------------------------------------

def split_fingerprint(train: TrainingSet, test: TrainingSet) -> str:
    h = hashlib.sha256()
    for tag, ts in (("train", train), ("test", test)):
        h.update(tag.encode())
        for ex in ts.examples:
            h.update(ex.intent.encode("utf-8"))
            h.update(b"\x00")
            h.update(ex.text.encode("utf-8"))
            h.update(b"\x01")
    return h.hexdigest()[:16]


def entity_span_scores(gold_keys: set[tuple], pred_keys: set[tuple]) -> MetricsRow:
    """Span-exact entity P/R/F1 folded into a MetricsRow (reported without a
    reference baseline; accuracy is recall here)."""
    tp = len(gold_keys & pred_keys)
    precision = tp / len(pred_keys) if pred_keys else 0.0
    recall = tp / len(gold_keys) if gold_keys else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsRow(accuracy=recall, weighted_precision=precision,
                      weighted_recall=recall, weighted_f1=f1)


def evaluate_pipeline(config: PipelineConfig, train: TrainingSet, test: TrainingSet,
                      seed: int, vectors: PretrainedTable | None = None,
                      backend=None) -> EvaluationReport:
    """Fit on train only, score intent predictions on test.

    When the pipeline has a fallback step, fallback predictions are scored
    as-is (they count against accuracy unless the gold label is the fallback
    intent itself).
    """
    if not test.examples:
        raise EmptyMatrix("test set is empty")
    fitted = train_pipeline(config, train, vectors=vectors, seed=seed, backend=backend)

    labels = list(train.intents)
    if config.fallback is not None and config.fallback.fallback_intent_name not in labels:
        labels.append(config.fallback.fallback_intent_name)

    golds, preds, outcomes, per_example = [], [], [], []
    gold_keys: set[tuple] = set()
    pred_keys: set[tuple] = set()
    for i, ex in enumerate(test.examples):
        prediction = fitted.parse(ex.text)
        top_intent, top_conf = prediction.ranking.top
        golds.append(ex.intent)
        preds.append(top_intent)
        outcomes.append((top_intent == ex.intent, top_conf))
        gold_keys.update((i, s.start, s.end, s.entity) for s in ex.entities)
        pred_keys.update((i, s.start, s.end, s.entity) for s in prediction.entities)
        per_example.append({
            "text": ex.text, "gold": ex.intent, "predicted": top_intent,
            "confidence": top_conf, "fallback": prediction.fallback,
        })

    cm = confusion(golds, preds, labels)
    entity_row = entity_span_scores(gold_keys, pred_keys)
    return EvaluationReport(
        pipeline=config.name,
        metrics=weighted_metrics(cm),
        confusion=cm,
        histogram=confidence_histogram(outcomes),
        loss_curve=list(fitted.model.loss_curve),
        split_hash=split_fingerprint(train, test),
        entity_metrics=entity_row,
        per_example=per_example,
    )


@dataclass
class AblationRow:
    name: str
    metrics: MetricsRow | None
    split_hash: str
    error: str | None = None
    report: EvaluationReport | None = None


def run_ablation(configs: list[PipelineConfig], data: TrainingSet, seed: int,
                 test_fraction: float = 0.2, vectors: PretrainedTable | None = None,
                 backend=None) -> list[AblationRow]:
    """Evaluate every config on one identical split; failures do not abort."""
    if not configs:
        raise EvaluationError("no pipeline configs given")
    train, test = split_train_test(data, test_fraction, seed)
    rows: list[AblationRow] = []
    for config in configs:
        try:
            report = evaluate_pipeline(config, train, test, seed, vectors=vectors, backend=backend)
            rows.append(AblationRow(config.name, report.metrics, report.split_hash, report=report))
        except Exception as exc:  # deliberate: one bad config must not sink the run
            rows.append(AblationRow(config.name, None, split_fingerprint(train, test),
                                    error=f"{type(exc).__name__}: {exc}"))
    return rows
