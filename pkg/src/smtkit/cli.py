"""Command-line surface: per-stage subcommands plus an end-to-end pipeline.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation. All stochastic choices run off a single --seed, and results are
independent of --jobs (stages run in a deterministic serialized order).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass

from . import __version__, align, corpus, deptree, evaluate, lm, phrasetab, ruletab, tune
from .decoder import (
    ChartConfig,
    ChartModels,
    DecodeConfig,
    DecodeError,
    FeatureWeights,
    PhraseModels,
    TreeConfig,
    TreeModels,
    decode_chart,
    decode_phrase,
    decode_tree,
    format_weights,
    parse_weights,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

DATA_ERRORS = (
    corpus.CorpusError,
    deptree.ConlluError,
    lm.LmError,
    align.AlignError,
    phrasetab.PhraseError,
    evaluate.EvalError,
    DecodeError,
    FileNotFoundError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def _read(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    return corpus.read_text(path)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_tokenized(path: str) -> list[list[str]]:
    return [line.split() for line in corpus.read_text(path).splitlines()]


def _format_sentences(sentences: list[list[str]]) -> str:
    return "".join(" ".join(s) + "\n" for s in sentences)


# ---------------------------------------------------------------------------
# pipeline configuration
# ---------------------------------------------------------------------------


@dataclass
class PipelineConfig:
    train_source: str = ""
    train_target: str = ""
    dev_source: str = ""
    dev_target: str = ""
    test_source: str = ""
    test_target: str = ""
    mono_target: str = ""
    train_trees: str = ""
    dev_trees: str = ""
    test_trees: str = ""
    model_dir: str = "model"
    source_profile: str = "english"
    target_profile: str = "devanagari"
    max_len: int = 80
    lm_order: int = 3
    lm_discount_mode: str = "counts_of_counts"
    align_iterations: int = 5
    align_model: int = 1
    align_symmetrization: str = "grow-diag-final-and"
    phrase_max_len: int = 7
    reorder_enabled: bool = False
    reorder_orientation_set: str = "msd"
    decoder_kind: str = "phrase"
    decoder_stack_size: int = 100
    decoder_distortion_limit: int = 6
    decoder_nbest: int = 1
    tune_enabled: bool = True
    tune_iterations: int = 2
    tune_nbest: int = 50
    eval_metrics: str = "bleu,wer,prf,meteor"

    _KEYS = {
        "paths.train_source": ("train_source", str),
        "paths.train_target": ("train_target", str),
        "paths.dev_source": ("dev_source", str),
        "paths.dev_target": ("dev_target", str),
        "paths.test_source": ("test_source", str),
        "paths.test_target": ("test_target", str),
        "paths.mono_target": ("mono_target", str),
        "paths.train_trees": ("train_trees", str),
        "paths.dev_trees": ("dev_trees", str),
        "paths.test_trees": ("test_trees", str),
        "paths.model_dir": ("model_dir", str),
        "corpus.source_profile": ("source_profile", str),
        "corpus.target_profile": ("target_profile", str),
        "corpus.max_len": ("max_len", int),
        "lm.order": ("lm_order", int),
        "lm.discount_mode": ("lm_discount_mode", str),
        "align.iterations": ("align_iterations", int),
        "align.model": ("align_model", int),
        "align.symmetrization": ("align_symmetrization", str),
        "phrase.max_len": ("phrase_max_len", int),
        "reorder.enabled": ("reorder_enabled", bool),
        "reorder.orientation_set": ("reorder_orientation_set", str),
        "decoder.kind": ("decoder_kind", str),
        "decoder.stack_size": ("decoder_stack_size", int),
        "decoder.distortion_limit": ("decoder_distortion_limit", int),
        "decoder.nbest": ("decoder_nbest", int),
        "tune.enabled": ("tune_enabled", bool),
        "tune.iterations": ("tune_iterations", int),
        "tune.nbest": ("tune_nbest", int),
        "eval.metrics": ("eval_metrics", str),
    }

    @classmethod
    def parse(cls, text: str) -> "PipelineConfig":
        config = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise corpus.CorpusError(f"config line {lineno}: expected 'section.key = value'")
            key, _, value = (part.strip() for part in line.partition("="))
            if key not in cls._KEYS:
                raise corpus.CorpusError(f"config line {lineno}: unknown key {key!r}")
            attr, kind = cls._KEYS[key]
            if kind is bool:
                if value.lower() not in ("true", "false", "0", "1", "yes", "no"):
                    raise corpus.CorpusError(f"config line {lineno}: bad boolean {value!r}")
                parsed = value.lower() in ("true", "1", "yes")
            elif kind is int:
                parsed = int(value)
            else:
                parsed = value
            setattr(config, attr, parsed)
        config.validate()
        return config

    def validate(self) -> None:
        closed = {
            "lm_discount_mode": ("counts_of_counts", "fixed"),
            "align_symmetrization": ("intersection", "union", "grow-diag-final-and"),
            "reorder_orientation_set": ("msd", "mslr"),
            "decoder_kind": ("phrase", "hier", "tree"),
            "source_profile": ("english", "devanagari"),
            "target_profile": ("english", "devanagari"),
        }
        for attr, values in closed.items():
            if getattr(self, attr) not in values:
                raise corpus.CorpusError(f"config: {attr} must be one of {values}")
        for attr in ("train_source", "train_target", "dev_source", "dev_target",
                     "test_source", "test_target", "mono_target", "train_trees",
                     "dev_trees", "test_trees"):
            path = getattr(self, attr)
            if path and not os.path.exists(path):
                raise corpus.CorpusError(f"config: {attr} path does not exist: {path}")
        if self.decoder_kind == "tree":
            if not (self.train_trees and self.test_trees):
                raise corpus.CorpusError("config: tree decoding needs train_trees and test_trees")
            if self.tune_enabled and not self.dev_trees:
                raise corpus.CorpusError("config: tuning a tree decoder needs dev_trees")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_tokenize(args) -> int:
    sentences = corpus.tokenize(_read(args.input), args.lang)
    _write(args.output, _format_sentences(sentences))
    return EXIT_OK


def cmd_clean(args) -> int:
    src = _read_tokenized(args.source)
    tgt = _read_tokenized(args.target)
    if len(src) != len(tgt):
        raise corpus.CorpusError(
            f"line count mismatch: {args.source} has {len(src)}, {args.target} has {len(tgt)}"
        )
    pairs = corpus.clean([corpus.SentencePair(s, t) for s, t in zip(src, tgt)], args.max_len)
    _write(args.out_source, _format_sentences([p.source for p in pairs]))
    _write(args.out_target, _format_sentences([p.target for p in pairs]))
    return EXIT_OK


def cmd_train_lm(args) -> int:
    sentences = _read_tokenized(args.input)
    model = lm.train_lm(sentences, order=args.order, discount_mode=args.discount_mode)
    _write(args.output, lm.write_arpa(model))
    return EXIT_OK


def _train_directional(pairs, iterations, model_kind):
    t1, _ = align.train_ibm1(pairs, iterations=iterations)
    if model_kind == 2:
        t2, dist, _ = align.train_ibm2(pairs, t1, iterations=iterations)
        return t2, dist
    return t1, None


def _alignments_for(pairs, iterations, model_kind, heuristic):
    fwd_table, fwd_dist = _train_directional(pairs, iterations, model_kind)
    swapped = [corpus.SentencePair(p.target, p.source) for p in pairs]
    bwd_table, bwd_dist = _train_directional(swapped, iterations, model_kind)
    links = []
    for pair, swap in zip(pairs, swapped):
        forward = align.viterbi_align(fwd_table, pair, fwd_dist)
        backward_raw = align.viterbi_align(bwd_table, swap, bwd_dist)
        backward = {(i, j) for j, i in backward_raw}
        links.append(align.symmetrize(forward, backward, heuristic))
    return fwd_table, bwd_table, links


def cmd_train_align(args) -> int:
    src = _read_tokenized(args.source)
    tgt = _read_tokenized(args.target)
    pairs = [corpus.SentencePair(s, t) for s, t in zip(src, tgt)]
    fwd, bwd, links = _alignments_for(pairs, args.iterations, args.model, args.symmetrization)
    _write(args.output, "".join(align.format_links(l) + "\n" for l in links))
    if args.ttable_fwd:
        _write(args.ttable_fwd, align.write_ttable(fwd))
    if args.ttable_bwd:
        _write(args.ttable_bwd, align.write_ttable(bwd))
    return EXIT_OK


def _read_alignments(path: str) -> list[set[tuple[int, int]]]:
    return [align.parse_links(line) for line in corpus.read_text(path).splitlines()]


def cmd_extract_phrases(args) -> int:
    pairs = [
        corpus.SentencePair(s, t)
        for s, t in zip(_read_tokenized(args.source), _read_tokenized(args.target))
    ]
    links = _read_alignments(args.alignments)
    fwd = align.read_ttable(corpus.read_text(args.ttable_fwd))
    bwd = align.read_ttable(corpus.read_text(args.ttable_bwd))
    entries = phrasetab.build_phrase_table(pairs, links, fwd, bwd, args.max_phrase_len)
    _write(args.output, phrasetab.write_phrase_table(entries))
    return EXIT_OK


def cmd_extract_rules(args) -> int:
    pairs = [
        corpus.SentencePair(s, t)
        for s, t in zip(_read_tokenized(args.source), _read_tokenized(args.target))
    ]
    links = _read_alignments(args.alignments)
    if args.kind == "hier":
        fwd = align.read_ttable(corpus.read_text(args.ttable_fwd))
        bwd = align.read_ttable(corpus.read_text(args.ttable_bwd))
        table = ruletab.build_rule_table(pairs, links, fwd, bwd)
        _write(args.output, ruletab.write_rule_table(table))
    else:
        trees = deptree.parse_conllu(corpus.read_text(args.trees))
        if len(trees) != len(pairs):
            raise deptree.ConlluError(
                f"{args.trees}: {len(trees)} trees for {len(pairs)} sentence pairs"
            )
        for pair, tree in zip(pairs, trees):
            pair.source_tree = tree
        table, skipped = ruletab.build_tree_rule_table(pairs, links)
        if skipped:
            print(f"warning: skipped {skipped} non-projective sentences", file=sys.stderr)
        _write(args.output, ruletab.write_tree_rule_table(table))
    return EXIT_OK


def cmd_train_reorder(args) -> int:
    pairs = [
        corpus.SentencePair(s, t)
        for s, t in zip(_read_tokenized(args.source), _read_tokenized(args.target))
    ]
    links = _read_alignments(args.alignments)
    entries = phrasetab.extract_reordering(
        pairs, links, args.orientation_set, args.sigma, args.max_phrase_len
    )
    _write(args.output, phrasetab.write_reordering_table(entries))
    return EXIT_OK


def _load_weights(path: str | None) -> FeatureWeights:
    if not path:
        return FeatureWeights()
    return parse_weights(corpus.read_text(path))


def _phrase_models(args) -> PhraseModels:
    table = phrasetab.read_phrase_table(corpus.read_text(args.phrase_table))
    model = lm.read_arpa(corpus.read_text(args.lm))
    reorder = None
    if getattr(args, "reordering", None):
        reorder = phrasetab.read_reordering_table(corpus.read_text(args.reordering))
    return PhraseModels(table, model, reorder)


def _decode_sentences(sentences, args, weights, nbest) -> list[list]:
    """Decode a list of sources with the configured backend; n-best each."""
    if args.kind == "phrase":
        models = _phrase_models(args)
        config = DecodeConfig(args.stack_size, args.distortion_limit, nbest)
        return [decode_phrase(s, models, weights, config) for s in sentences]
    if args.kind == "hier":
        table = ruletab.read_rule_table(corpus.read_text(args.rule_table))
        models = ChartModels(table, lm.read_arpa(corpus.read_text(args.lm)))
        config = ChartConfig(cell_beam=args.stack_size, nbest=nbest)
        return [decode_chart(s, models, weights, config) for s in sentences]
    table = ruletab.read_tree_rule_table(corpus.read_text(args.rule_table))
    models = TreeModels(table, lm.read_arpa(corpus.read_text(args.lm)))
    config = TreeConfig(k_best_per_node=args.stack_size, nbest=nbest)
    return [decode_tree(s, models, weights, config) for s in sentences]


def _parse_trees(text: str) -> list:
    stripped = text.lstrip()
    if stripped.startswith("<tree"):
        return deptree.parse_nested_tree_file(text)
    return deptree.parse_conllu(text)


def _decode_inputs(args) -> list:
    if args.kind == "tree":
        return _parse_trees(_read(args.input))
    return [line.split() for line in _read(args.input).splitlines()]


def cmd_decode(args) -> int:
    sentences = _decode_inputs(args)
    weights = _load_weights(args.weights)
    results = _decode_sentences(sentences, args, weights, args.nbest)
    lines = []
    for index, hyps in enumerate(results):
        for hyp in hyps:
            features = " ".join(f"{k}={hyp.features[k]!r}" for k in sorted(hyp.features))
            lines.append(f"{index} ||| {' '.join(hyp.tokens)} ||| {features} ||| {hyp.score!r}")
    _write(args.output, "\n".join(lines) + "\n" if lines else "")
    return EXIT_OK


def cmd_translate(args) -> int:
    text = _read(args.input)
    if not text.strip():
        _write(args.output, "")
        return EXIT_OK
    if args.kind == "tree":
        sentences = _parse_trees(text)
    else:
        sentences = corpus.tokenize(text, args.lang)
    weights = _load_weights(args.weights)
    out_lines = []
    for sent, hyps in zip(sentences, _decode_sentences(sentences, args, weights, 1)):
        out_lines.append(corpus.detokenize(list(hyps[0].tokens), args.target_lang))
    _write(args.output, "\n".join(out_lines) + "\n")
    return EXIT_OK


def cmd_tune(args) -> int:
    dev_refs = _read_tokenized(args.dev_target)
    weights = _load_weights(args.weights)
    config = tune.MertConfig(
        nbest=args.nbest,
        max_iterations=args.iterations,
        seed=args.seed,
    )
    if args.kind == "tree":
        dev_sources = deptree.parse_conllu(corpus.read_text(args.dev_source))
    else:
        dev_sources = _read_tokenized(args.dev_source)

    def decoder_fn(index, source, current_weights, nbest):
        hyps = _decode_sentences([source], args, current_weights, nbest)[0]
        return [(h.tokens, h.features) for h in hyps]

    result = tune.mert(dev_sources, dev_refs, decoder_fn, weights, config)
    _write(args.output, format_weights(result.weights, result.history))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    lines = []
    if args.human_scores:
        table = evaluate.parse_human_scores(corpus.read_text(args.human_scores))
        summary = evaluate.aggregate_human(table)
        lines.append(f"fluency_mean\t{summary.fluency_mean:.6f}")
        lines.append(f"adequacy_mean\t{summary.adequacy_mean:.6f}")
        lines.append(f"fluency_pct\t{summary.fluency_pct:.6f}")
        lines.append(f"adequacy_pct\t{summary.adequacy_pct:.6f}")
        for name, dist in (("fluency", summary.fluency_dist), ("adequacy", summary.adequacy_dist)):
            for score in sorted(dist):
                lines.append(f"{name}_share_{score}\t{dist[score]:.6f}")
        _write(args.output, "\n".join(lines) + "\n")
        return EXIT_OK
    hyps = _read_tokenized(args.hyp)
    refs = _read_tokenized(args.ref)
    if len(hyps) != len(refs):
        raise evaluate.EvalError(f"{args.hyp}: {len(hyps)} lines vs {args.ref}: {len(refs)}")
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    lines.extend(_metric_lines(hyps, refs, metrics))
    _write(args.output, "\n".join(lines) + "\n")
    return EXIT_OK


def _metric_lines(hyps, refs, metrics) -> list[str]:
    lines = []
    for metric in metrics:
        if metric == "bleu":
            result = evaluate.bleu(hyps, refs)
            lines.append(f"bleu\t{result.score:.6f}")
            lines.append(f"brevity_penalty\t{result.brevity_penalty:.6f}")
            for n, p in enumerate(result.precisions, start=1):
                lines.append(f"bleu_p{n}\t{p:.6f}")
        elif metric == "wer":
            rates = [evaluate.wer(h, r) for h, r in zip(hyps, refs) if r]
            lines.append(f"wer\t{sum(rates) / len(rates):.6f}")
        elif metric == "prf":
            scored = [evaluate.precision_recall_f(h, r) for h, r in zip(hyps, refs)]
            n = len(scored)
            lines.append(f"precision\t{sum(s[0] for s in scored) / n:.6f}")
            lines.append(f"recall\t{sum(s[1] for s in scored) / n:.6f}")
            lines.append(f"f_measure\t{sum(s[2] for s in scored) / n:.6f}")
        elif metric == "meteor":
            scores = [evaluate.meteor_lite(h, r).score for h, r in zip(hyps, refs)]
            lines.append(f"meteor\t{sum(scores) / len(scores):.6f}")
        else:
            raise evaluate.EvalError(f"unknown metric {metric!r}")
    return lines


def cmd_compare(args) -> int:
    hyps_a = _read_tokenized(args.hyp_a)
    hyps_b = _read_tokenized(args.hyp_b)
    refs = _read_tokenized(args.ref)
    report = evaluate.compare_systems(hyps_a, hyps_b, refs, top_k=args.top_k)
    _write(args.output, evaluate.format_comparison(report))
    return EXIT_OK


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def _pipeline_tokenize(config: PipelineConfig, path: str, profile: str) -> list[list[str]]:
    return corpus.tokenize(corpus.read_text(path), profile)


def cmd_pipeline(args) -> int:
    config_text = corpus.read_text(args.config)
    config = PipelineConfig.parse(config_text)
    model_dir = config.model_dir
    os.makedirs(model_dir, exist_ok=True)

    def out(name: str) -> str:
        return os.path.join(model_dir, name)

    # corpus preparation; trees attach before cleaning so filtering keeps
    # pairs and their parses aligned
    train_src = _pipeline_tokenize(config, config.train_source, config.source_profile)
    train_tgt = _pipeline_tokenize(config, config.train_target, config.target_profile)
    raw_pairs = [corpus.SentencePair(s, t) for s, t in zip(train_src, train_tgt)]
    if config.decoder_kind == "tree":
        trees = deptree.parse_conllu(corpus.read_text(config.train_trees))
        if len(trees) != len(raw_pairs):
            raise deptree.ConlluError(
                f"{config.train_trees}: {len(trees)} trees for {len(raw_pairs)} pairs"
            )
        for pair, tree in zip(raw_pairs, trees):
            pair.source_tree = tree
    pairs = corpus.clean(raw_pairs, config.max_len)
    artifacts: dict[str, str] = {}

    # language model over target side plus optional monolingual data
    lm_corpus = [p.target for p in pairs]
    if config.mono_target:
        lm_corpus += _pipeline_tokenize(config, config.mono_target, config.target_profile)
    model = lm.train_lm(lm_corpus, order=config.lm_order, discount_mode=config.lm_discount_mode)
    arpa = lm.write_arpa(model)
    _write(out("lm.arpa"), arpa)
    artifacts["lm"] = "lm.arpa"

    # word alignment
    fwd, bwd, links = _alignments_for(
        pairs, config.align_iterations, config.align_model, config.align_symmetrization
    )
    _write(out("alignments.txt"), "".join(align.format_links(l) + "\n" for l in links))
    _write(out("ttable-fwd.txt"), align.write_ttable(fwd))
    _write(out("ttable-bwd.txt"), align.write_ttable(bwd))
    artifacts["alignments"] = "alignments.txt"

    # translation model
    if config.decoder_kind == "phrase":
        table = phrasetab.build_phrase_table(pairs, links, fwd, bwd, config.phrase_max_len)
        _write(out("phrase-table.txt"), phrasetab.write_phrase_table(table))
        artifacts["phrase_table"] = "phrase-table.txt"
        phrase_models = PhraseModels(
            table,
            model,
            _pipeline_reordering(config, pairs, links, out, artifacts),
        )
    elif config.decoder_kind == "hier":
        rule_table = ruletab.build_rule_table(pairs, links, fwd, bwd)
        _write(out("rule-table.txt"), ruletab.write_rule_table(rule_table))
        artifacts["rule_table"] = "rule-table.txt"
        chart_models = ChartModels(rule_table, model)
    else:
        tree_table, skipped = ruletab.build_tree_rule_table(pairs, links)
        if skipped:
            print(f"warning: skipped {skipped} non-projective sentences", file=sys.stderr)
        _write(out("tree-rule-table.txt"), ruletab.write_tree_rule_table(tree_table))
        artifacts["rule_table"] = "tree-rule-table.txt"
        tree_models = TreeModels(tree_table, model)

    def decode_fn(source, weights, nbest):
        if config.decoder_kind == "phrase":
            cfg = DecodeConfig(config.decoder_stack_size, config.decoder_distortion_limit, nbest)
            return decode_phrase(source, phrase_models, weights, cfg)
        if config.decoder_kind == "hier":
            return decode_chart(source, chart_models, weights, ChartConfig(nbest=nbest))
        return decode_tree(source, tree_models, weights, TreeConfig(nbest=nbest))

    # tuning
    weights = FeatureWeights()
    if config.tune_enabled:
        dev_refs = _pipeline_tokenize(config, config.dev_target, config.target_profile)
        if config.decoder_kind == "tree":
            dev_sources = deptree.parse_conllu(corpus.read_text(config.dev_trees))
        else:
            dev_sources = _pipeline_tokenize(config, config.dev_source, config.source_profile)

        def mert_decoder(index, source, current_weights, nbest):
            return [(h.tokens, h.features) for h in decode_fn(source, current_weights, nbest)]

        result = tune.mert(
            dev_sources,
            dev_refs,
            mert_decoder,
            weights,
            tune.MertConfig(
                nbest=config.tune_nbest,
                max_iterations=config.tune_iterations,
                seed=args.seed,
            ),
        )
        weights = result.weights
        _write(out("weights.txt"), format_weights(weights, result.history))
    else:
        _write(out("weights.txt"), format_weights(weights, ["untuned defaults"]))
    artifacts["weights"] = "weights.txt"

    # decode the test split
    if config.decoder_kind == "tree":
        test_sources = deptree.parse_conllu(corpus.read_text(config.test_trees))
    else:
        test_sources = _pipeline_tokenize(config, config.test_source, config.source_profile)
    test_refs = _pipeline_tokenize(config, config.test_target, config.target_profile)
    hyps = []
    nbest_lines = []
    for index, source in enumerate(test_sources):
        results = decode_fn(source, weights, config.decoder_nbest)
        hyps.append(list(results[0].tokens))
        for hyp in results:
            features = " ".join(f"{k}={hyp.features[k]!r}" for k in sorted(hyp.features))
            nbest_lines.append(
                f"{index} ||| {' '.join(hyp.tokens)} ||| {features} ||| {hyp.score!r}"
            )
    _write(out("test.nbest"), "\n".join(nbest_lines) + "\n")
    _write(out("test.hyp"), _format_sentences(hyps))
    _write(
        out("test.detok"),
        "".join(corpus.detokenize(h, config.target_profile) + "\n" for h in hyps),
    )
    artifacts["translations"] = "test.hyp"

    # evaluation report
    metrics = [m.strip() for m in config.eval_metrics.split(",") if m.strip()]
    report = _metric_lines(hyps, test_refs, metrics)
    _write(out("report.txt"), "\n".join(report) + "\n")
    artifacts["report"] = "report.txt"

    manifest = {
        "format_version": 1,
        "toolkit_version": __version__,
        "config_sha256": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
        "seed": args.seed,
        "artifacts": {k: artifacts[k] for k in sorted(artifacts)},
    }
    _write(out("manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _pipeline_reordering(config, pairs, links, out, artifacts):
    if not config.reorder_enabled:
        return None
    entries = phrasetab.extract_reordering(
        pairs, links, config.reorder_orientation_set, max_phrase_len=config.phrase_max_len
    )
    _write(out("reordering-table.txt"), phrasetab.write_reordering_table(entries))
    artifacts["reordering"] = "reordering-table.txt"
    return entries


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _add_decoder_args(parser, kinds=("phrase", "hier", "tree")):
    parser.add_argument("--kind", choices=kinds, default="phrase")
    parser.add_argument("--phrase-table")
    parser.add_argument("--rule-table")
    parser.add_argument("--reordering")
    parser.add_argument("--lm", required=True)
    parser.add_argument("--weights")
    parser.add_argument("--stack-size", type=int, default=100)
    parser.add_argument("--distortion-limit", type=int, default=6)


def build_parser() -> _Parser:
    parser = _Parser(prog="smtkit", description=__doc__)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--jobs", type=int, default=1, help="worker count; results never depend on it")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("tokenize", help="tokenize raw text, one sentence per line")
    p.add_argument("--lang", choices=("english", "devanagari"), default="english")
    p.add_argument("--input")
    p.add_argument("--output")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("clean", help="drop empty or over-long sentence pairs")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--max-len", type=int, default=80)
    p.add_argument("--out-source", required=True)
    p.add_argument("--out-target", required=True)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("train-lm", help="train a Kneser-Ney n-gram model, ARPA output")
    p.add_argument("--input", required=True)
    p.add_argument("--order", type=int, default=3, choices=(2, 3, 4, 5))
    p.add_argument("--discount-mode", choices=("counts_of_counts", "fixed"), default="counts_of_counts")
    p.add_argument("--output")
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("train-align", help="IBM 1/2 EM + symmetrized alignments")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--model", type=int, choices=(1, 2), default=1)
    p.add_argument("--symmetrization", choices=("intersection", "union", "grow-diag-final-and"),
                   default="grow-diag-final-and")
    p.add_argument("--output")
    p.add_argument("--ttable-fwd")
    p.add_argument("--ttable-bwd")
    p.set_defaults(func=cmd_train_align)

    p = sub.add_parser("extract-phrases", help="consistent phrase pairs with scores")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--alignments", required=True)
    p.add_argument("--ttable-fwd", required=True)
    p.add_argument("--ttable-bwd", required=True)
    p.add_argument("--max-phrase-len", type=int, default=7)
    p.add_argument("--output")
    p.set_defaults(func=cmd_extract_phrases)

    p = sub.add_parser("extract-rules", help="hierarchical or tree-to-string rules")
    p.add_argument("--kind", choices=("hier", "tree"), default="hier")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--alignments", required=True)
    p.add_argument("--ttable-fwd")
    p.add_argument("--ttable-bwd")
    p.add_argument("--trees", help="CoNLL-U source trees (tree kind)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_extract_rules)

    p = sub.add_parser("train-reorder", help="lexicalized reordering model")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--alignments", required=True)
    p.add_argument("--orientation-set", choices=("msd", "mslr"), default="msd")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--max-phrase-len", type=int, default=7)
    p.add_argument("--output")
    p.set_defaults(func=cmd_train_reorder)

    p = sub.add_parser("decode", help="decode tokenized input to the n-best format")
    _add_decoder_args(p)
    p.add_argument("--input")
    p.add_argument("--nbest", type=int, default=1)
    p.add_argument("--output")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("translate", help="translate raw text to detokenized output")
    _add_decoder_args(p)
    p.add_argument("--lang", choices=("english", "devanagari"), default="english")
    p.add_argument("--target-lang", choices=("english", "devanagari"), default="devanagari")
    p.add_argument("--input")
    p.add_argument("--output")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("tune", help="minimum-error-rate training of feature weights")
    _add_decoder_args(p)
    p.add_argument("--dev-source", required=True)
    p.add_argument("--dev-target", required=True)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--nbest", type=int, default=100)
    p.add_argument("--output")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("evaluate", help="score hypotheses against references")
    p.add_argument("--hyp")
    p.add_argument("--ref")
    p.add_argument("--metrics", default="bleu,wer,prf,meteor")
    p.add_argument("--human-scores", help="sentence_id,fluency,adequacy file instead")
    p.add_argument("--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="two-system comparison report")
    p.add_argument("--hyp-a", required=True)
    p.add_argument("--hyp-b", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="end-to-end train/tune/decode/evaluate run")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"smtkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"smtkit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # internal invariant violations
        print(f"smtkit: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
