"""Command-line interface: index, train, tune, run, score.

The SF_SEED environment variable overrides every RNG seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

log = logging.getLogger(__name__)

DEFAULT_SEED = 13


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    value = os.environ.get("SF_SEED")
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        log.warning("ignoring non-integer SF_SEED=%r", value)
        return default


def _cmd_index(args) -> int:
    from .corpus import ingest_documents
    from .retrieval import build_index, save_index

    store = ingest_documents(args.corpus)
    index = build_index(store)
    save_index(index, args.out)
    print(f"indexed {index.doc_count} documents, "
          f"{len(index.postings)} terms -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    from . import resources
    from .classify import canonicalize_slot
    from .corpus import ingest_documents
    from .traindata import SelectionConfig, load_examples, load_kb_instances
    from .trainer import (
        ModelTrainingConfig,
        apply_selection,
        build_distant_dataset,
        train_slot_model,
    )

    slot_configs = resources.default_slot_configs()
    canonical, _ = canonicalize_slot(args.slot, slot_configs)
    if slot_configs[canonical].classifier_less and args.model != "pattern":
        print(f"slot {args.slot} is classifier-less; only patterns apply")
        return 1
    if args.model == "pattern":
        patterns = resources.default_patterns().get(canonical, [])
        print(f"{len(patterns)} patterns on file for {canonical} "
              "(patterns are data; nothing to train)")
        return 0

    seed = seed_from_env(args.seed)
    if args.examples:
        examples = [ex for ex in load_examples(args.examples)
                    if ex.slot in (args.slot, canonical)]
    else:
        store = ingest_documents(args.corpus)
        kb = load_kb_instances(args.kb)
        triggers = resources.default_triggers()
        examples = build_distant_dataset(store, kb, canonical, slot_configs,
                                         resources.default_gazetteers(),
                                         triggers)
    if args.select:
        seed_data = load_examples(args.seed_data)
        examples = apply_selection(
            examples, seed_data, SelectionConfig(k=args.batches, tau=args.tau,
                                                 seed=seed))
    cfg = ModelTrainingConfig(
        dim=args.dim, filters=args.filters, cnn_hidden=args.cnn_hidden,
        rnn_hidden=args.rnn_hidden, epochs=args.epochs,
        learning_rate=args.learning_rate, seed=seed,
        embedding_file=args.embeddings)
    written = train_slot_model(examples, canonical, args.model, args.out_dir,
                               cfg)
    print(f"trained {args.model} for {canonical} on {len(examples)} examples")
    for path in written:
        print(f"  wrote {path}")
    return 0


def _cmd_tune(args) -> int:
    from . import resources
    from .classify import canonicalize_slot, combine_scores, match_patterns, svm_score
    from .pipeline import ModelRegistry, ModelMissingError
    from .nnets import rnn_ensemble_score
    from .traindata import load_examples, tune_interpolation_weights, tune_thresholds

    slot_configs = resources.default_slot_configs()
    patterns = resources.default_patterns()
    registry = ModelRegistry.from_dir(args.models)
    dev = load_examples(args.dev)
    if not dev:
        print("no dev examples", file=sys.stderr)
        return 1

    from dataclasses import replace as dc_replace

    scored_rows = []
    for ex in dev:
        canonical, swapped = canonicalize_slot(ex.slot, slot_configs)
        view = dc_replace(ex, entity_first=not ex.entity_first) if swapped else ex
        scores = {"pattern": match_patterns(ex, patterns.get(canonical, []),
                                            swapped=swapped)}
        try:
            scores["svm"] = svm_score(registry.svm_for(canonical), view)
        except ModelMissingError:
            pass
        try:
            scores["cnn"] = registry.cnn_for(canonical).forward(view)
        except ModelMissingError:
            pass
        try:
            variants = registry.rnns_for(canonical)
            scores["rnn"] = rnn_ensemble_score(
                p_uni=variants["uni"].forward(view) if "uni" in variants else None,
                p_bi=variants["bi"].forward(view) if "bi" in variants else None,
                p_multi=variants["multitask"].forward(view)
                if "multitask" in variants else None)
        except ModelMissingError:
            pass
        scored_rows.append((ex.slot, scores, ex.label))

    weights = tune_interpolation_weights([(s, y) for _, s, y in scored_rows])
    by_slot: dict[str, list[tuple[float, int]]] = {}
    for slot, scores, label in scored_rows:
        by_slot.setdefault(slot, []).append(
            (combine_scores(scores, weights), label))
    thresholds = tune_thresholds(by_slot)

    payload = {"weights": weights, "thresholds": thresholds}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"tuned weights {weights} -> {args.out}")
    return 0


def _cmd_run(args) -> int:
    from .pipeline import configure_run, load_queries, load_system, run_queries, write_answers

    state = load_system(args.corpus, coref_path=args.coref,
                        models_dir=args.models, weights_path=args.weights)
    if args.tuned:
        with open(args.tuned, encoding="utf-8") as fh:
            tuned = json.load(fh)
        if "weights" in tuned:
            state.weights = tuned["weights"]
        for slot, theta in tuned.get("thresholds", {}).items():
            if slot in state.slot_configs:
                from dataclasses import replace
                state.slot_configs[slot] = replace(state.slot_configs[slot],
                                                   threshold=float(theta))
    cfg = configure_run(args.run, coref_enabled=not args.no_coref)
    queries = load_queries(args.queries)
    answers = run_queries(state, queries, cfg)
    write_answers(answers, args.out)
    print(f"run {args.run}: {len(answers)} answers for {len(queries)} queries "
          f"-> {args.out}")
    return 0


def _cmd_score(args) -> int:
    from .pipeline import load_gold, read_answers, score_output

    answers = read_answers(args.system)
    gold = load_gold(args.gold)
    precision, recall, f1_frac, counts = score_output(answers, gold)
    print(f"tp={counts.tp} fp={counts.fp} fn={counts.fn}")
    print(f"P={100 * precision:.2f} R={100 * recall:.2f} F1={100 * f1_frac:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slotfill",
        description="Cold-start slot filling: index, train, tune, run, score.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build and persist an inverted index")
    p_index.add_argument("--corpus", required=True)
    p_index.add_argument("--out", required=True)
    p_index.set_defaults(func=_cmd_index)

    p_train = sub.add_parser("train", help="train one classifier for a slot")
    p_train.add_argument("--slot", required=True)
    p_train.add_argument("--model", required=True,
                         choices=["pattern", "svm", "cnn", "rnn"])
    p_train.add_argument("--corpus", help="training corpus (JSON Lines)")
    p_train.add_argument("--kb", help="relation instances TSV")
    p_train.add_argument("--examples", help="pre-built examples JSONL "
                                            "(skips distant supervision)")
    p_train.add_argument("--select", action="store_true",
                         help="run the batched training-data selection loop")
    p_train.add_argument("--seed-data", help="clean seed examples JSONL")
    p_train.add_argument("--batches", type=int, default=5)
    p_train.add_argument("--tau", type=float, default=0.8)
    p_train.add_argument("--out-dir", default="models")
    p_train.add_argument("--dim", type=int, default=50)
    p_train.add_argument("--filters", type=int, default=50)
    p_train.add_argument("--cnn-hidden", type=int, default=100)
    p_train.add_argument("--rnn-hidden", type=int, default=50)
    p_train.add_argument("--epochs", type=int, default=50)
    p_train.add_argument("--learning-rate", type=float, default=0.05)
    p_train.add_argument("--embeddings", help="pretrained embedding text file")
    p_train.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_train.set_defaults(func=_cmd_train)

    p_tune = sub.add_parser("tune", help="tune thresholds and weights on dev data")
    p_tune.add_argument("--dev", required=True)
    p_tune.add_argument("--models", required=True)
    p_tune.add_argument("--out", required=True)
    p_tune.set_defaults(func=_cmd_tune)

    p_run = sub.add_parser("run", help="answer queries end to end")
    p_run.add_argument("--queries", required=True)
    p_run.add_argument("--corpus", required=True)
    p_run.add_argument("--run", type=int, required=True, choices=[1, 2, 3, 4, 5])
    p_run.add_argument("--no-coref", action="store_true")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--models")
    p_run.add_argument("--coref")
    p_run.add_argument("--weights")
    p_run.add_argument("--tuned", help="JSON from the tune subcommand")
    p_run.set_defaults(func=_cmd_run)

    p_score = sub.add_parser("score", help="micro-averaged P/R/F1 against gold")
    p_score.add_argument("--system", required=True)
    p_score.add_argument("--gold", required=True)
    p_score.set_defaults(func=_cmd_score)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
