"""Command line driving the whole life cycle.

Subcommands: gen-corpus (synthetic data), data-validate, train, evaluate,
ablate (the eight-preset comparison), serve (HTTP gateway) and shell (local
chat loop).  Exit codes: 0 success, 1 data/validation errors, 2 usage.
Every source of randomness is governed by --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .corpus import (CorpusError, Domain, StorySet, TrainingSet, parse_domain_file,
                     parse_nlu_file, parse_stories_file, split_train_test)
from .evaluation import AblationRow, evaluate_pipeline, run_ablation
from .features import FeatureError, PretrainedTable, load_pretrained_vectors
from .gateway import GatewayConfig, serve as gateway_serve
from .modelio import ModelArchiveError, load_bot, save_bot, train_bot
from .pipeline import (PipelineConfig, PipelineConfigError, load_preset, load_presets,
                       parse_pipeline_config)
from .reports import metrics_csv, write_ablation_files, write_report_files
from .synthetic import generate_synthetic_corpus
from .ted import PolicyConfig

DATA_FILES = ("nlu.yml", "domain.yml", "stories.yml")


class CliError(Exception):
    def __init__(self, category: str, message: str, code: int = 1):
        super().__init__(message)
        self.category = category
        self.code = code


def load_corpus_dir(data_dir: str) -> tuple[TrainingSet, Domain, StorySet]:
    root = Path(data_dir)
    contents = []
    for name in DATA_FILES:
        path = root / name
        if not path.is_file():
            raise CliError("data", f"{path}: file not found")
        contents.append(path.read_text("utf-8"))
    ts = parse_nlu_file(contents[0])
    domain = parse_domain_file(contents[1])
    missing_intents = [i for i in ts.intents if i not in domain.intents]
    if missing_intents:
        raise CliError("data", f"intents missing from domain.yml: {missing_intents}")
    missing_entities = [e for e in ts.entity_types if e not in domain.entity_types]
    if missing_entities:
        raise CliError("data", f"entities missing from domain.yml: {missing_entities}")
    stories = parse_stories_file(contents[2], domain, ts)
    return ts, domain, stories


def _load_pipeline(args) -> PipelineConfig:
    ref = args.pipeline
    if ref is None:
        raise CliError("config", "--pipeline is required (a config file or preset name)")
    path = Path(ref)
    if path.is_file():
        return parse_pipeline_config(path.read_text("utf-8"), name_hint=path.stem)
    return load_preset(ref)


def _load_vectors(args) -> PretrainedTable | None:
    if not getattr(args, "vectors", None):
        return None
    path = Path(args.vectors)
    if not path.is_file():
        raise CliError("io", f"{path}: vectors file not found")
    return load_pretrained_vectors(path.read_text("utf-8"))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen_corpus(args) -> int:
    nlu, domain, stories = generate_synthetic_corpus(
        args.seed, args.intents, args.examples, args.entity_types)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in zip(DATA_FILES, (nlu, domain, stories)):
        (out / name).write_text(text, encoding="utf-8")
    print(f"wrote {', '.join(DATA_FILES)} to {out} "
          f"({args.intents} intents x {args.examples} examples, {args.entity_types} entity types)")
    return 0


def cmd_data_validate(args) -> int:
    ts, domain, stories = load_corpus_dir(args.data)
    print(f"ok: {len(ts.examples)} examples, {len(ts.intents)} intents, "
          f"{len(ts.entity_types)} entity types, {len(domain.responses)} responses, "
          f"{len(stories.stories)} stories, {len(stories.rules)} rules, "
          f"{len(ts.synonyms)} synonym entries")
    return 0


def cmd_train(args) -> int:
    ts, domain, stories = load_corpus_dir(args.data)
    config = _load_pipeline(args)
    vectors = _load_vectors(args)
    policy = PolicyConfig(seed=args.seed)
    bot = train_bot(config, ts, domain, stories, policy_config=policy,
                    vectors=vectors, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    archive = out / "model.bbm"
    save_bot(bot, str(archive))
    print(f"trained pipeline {config.name} on {len(ts.examples)} examples "
          f"(final loss {bot.pipeline.model.loss_curve[-1]:.6f}); wrote {archive}")
    return 0


def cmd_evaluate(args) -> int:
    ts, _, _ = load_corpus_dir(args.data)
    config = _load_pipeline(args)
    vectors = _load_vectors(args)
    train, test = split_train_test(ts, args.test_fraction, args.seed)
    report = evaluate_pipeline(config, train, test, args.seed, vectors=vectors)
    out = Path(args.out)
    written = write_report_files(report, out)
    print(metrics_csv([AblationRow(report.pipeline, report.metrics, report.split_hash)]), end="")
    if report.entity_metrics is not None:
        em = report.entity_metrics
        print(f"entities: precision={em.weighted_precision:.4f} "
              f"recall={em.weighted_recall:.4f} f1={em.weighted_f1:.4f}")
    print(f"wrote {len(written)} report files to {out}")
    return 0


def _ablate_worker(payload):
    config, train, test, seed, vectors = payload
    try:
        report = evaluate_pipeline(config, train, test, seed, vectors=vectors)
        return AblationRow(config.name, report.metrics, report.split_hash, report=report)
    except Exception as exc:
        return AblationRow(config.name, None, "", error=f"{type(exc).__name__}: {exc}")


def cmd_ablate(args) -> int:
    ts, _, _ = load_corpus_dir(args.data)
    configs = load_presets(args.presets)
    vectors = _load_vectors(args)
    if args.jobs > 1:
        train, test = split_train_test(ts, args.test_fraction, args.seed)
        payloads = [(c, train, test, args.seed, vectors) for c in configs]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_ablate_worker, payloads))
    else:
        rows = run_ablation(configs, ts, args.seed, test_fraction=args.test_fraction,
                            vectors=vectors)
    out = Path(args.out)
    write_ablation_files(rows, out)
    print(metrics_csv(rows), end="")
    failures = [r for r in rows if r.error]
    for row in failures:
        print(f"error:pipeline: {row.name} failed: {row.error}", file=sys.stderr)
    print(f"wrote ablation reports to {out}")
    return 0


def cmd_serve(args) -> int:
    config = GatewayConfig.load(args.config)
    if args.model:
        config.model_path = args.model
    if args.port is not None:
        config.port = args.port
    if args.static:
        config.static_dir = args.static
    if config.model_path and not Path(config.model_path).is_file():
        raise CliError("model", f"{config.model_path}: model archive not found")
    gateway_serve(config)
    return 0


def cmd_shell(args) -> int:
    from .dialogue import Tracker

    bot = load_bot(args.model)
    engine = bot.engine()
    tracker = Tracker("shell")
    print(f"banglabot shell ({bot.pipeline.config.name}); /parse <text> inspects, "
          "/quit exits")
    while True:
        try:
            line = input("you> ").strip()
        except EOFError:
            print()
            return 0
        if not line:
            continue
        if line in ("/quit", "/exit"):
            return 0
        if line.startswith("/parse "):
            text = line[len("/parse "):]
            prediction = bot.pipeline.parse(text)
            print(json.dumps({
                "intent_ranking": prediction.ranking.ranked[:5],
                "entities": [vars(s) for s in prediction.entities],
                "fallback": prediction.fallback,
            }, ensure_ascii=False, indent=2, default=str))
            continue
        prediction = bot.pipeline.parse(line)
        for reply in engine.run_turn(tracker, prediction, line):
            print(f"bot> {reply}")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="banglabot",
                                     description="Bangla FAQ assistant: NLU + dialogue engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, data=True, out=True):
        if data:
            p.add_argument("--data", required=True, help="directory with nlu.yml, domain.yml, stories.yml")
        if out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=42, help="seed for all randomness")

    p = sub.add_parser("gen-corpus", help="write a deterministic synthetic corpus")
    add_common(p, data=False)
    p.add_argument("--intents", type=int, default=12)
    p.add_argument("--examples", type=int, default=10, help="examples per intent")
    p.add_argument("--entity-types", type=int, default=3)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("data-validate", help="parse and cross-check the data files")
    add_common(p, out=False)
    p.set_defaults(func=cmd_data_validate)

    p = sub.add_parser("train", help="train a pipeline and write the model archive")
    add_common(p)
    p.add_argument("--pipeline", required=True, help="pipeline config file or preset name (P1..P8)")
    p.add_argument("--vectors", help="optional pretrained word-vector file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="hold-out evaluation of one pipeline")
    add_common(p)
    p.add_argument("--pipeline", required=True, help="pipeline config file or preset name")
    p.add_argument("--vectors", help="optional pretrained word-vector file")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="evaluate presets on one split and compare")
    add_common(p)
    p.add_argument("--presets", default="all", help="'all' or a list like P1,P5,P8")
    p.add_argument("--vectors", help="optional pretrained word-vector file")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--jobs", type=int, default=1, help="parallel evaluations (default 1)")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--config", help="gateway config file (key=value)")
    p.add_argument("--model", help="model archive path")
    p.add_argument("--port", type=int)
    p.add_argument("--static", help="directory with the chat console build")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("shell", help="chat with a trained model in the terminal")
    p.add_argument("--model", required=True, help="model archive path")
    p.set_defaults(func=cmd_shell)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return exc.code
    except CorpusError as exc:
        print(f"error:data: {exc}", file=sys.stderr)
        return 1
    except (PipelineConfigError, FeatureError) as exc:
        print(f"error:config: {exc}", file=sys.stderr)
        return 1
    except ModelArchiveError as exc:
        print(f"error:model: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
