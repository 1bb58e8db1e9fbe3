"""Stack-based beam search for phrase models.

Hypotheses are organized into stacks by the number of covered source words.
Recombination keys on (coverage, LM context, end of last phrase); with a
lexicalized reordering model the identity and span of the last phrase join
the key, because the pending backward orientation depends on them. With an
unlimited stack and no distortion limit the search is exhaustive dynamic
programming, which is what the oracle-equivalence tests rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..corpus import BOS, EOS
from ..lm import NGramModel
from ..phrasetab import MSD, MSLR, PhraseEntry, ReorderingEntry
from .weights import FeatureWeights, add_features

SCORE_NAMES = ("phi_s_given_t", "lex_s_given_t", "phi_t_given_s", "lex_t_given_s")


class DecodeError(ValueError):
    """Raised for unusable decoder input or missing models."""


@dataclass
class PhraseModels:
    phrase_table: list[PhraseEntry]
    lm: NGramModel
    reordering: list[ReorderingEntry] | None = None

    def __post_init__(self):
        self._options: dict[tuple[str, ...], list[PhraseEntry]] = {}
        self.max_src_len = 1
        for entry in self.phrase_table:
            self._options.setdefault(entry.src, []).append(entry)
            self.max_src_len = max(self.max_src_len, len(entry.src))
        for options in self._options.values():
            options.sort(key=lambda e: (e.tgt, e.scores))
        self._reorder: dict[tuple[tuple[str, ...], tuple[str, ...]], ReorderingEntry] = {}
        if self.reordering:
            for entry in self.reordering:
                self._reorder[(entry.src, entry.tgt)] = entry

    def options(self, src: tuple[str, ...]) -> list[PhraseEntry]:
        return self._options.get(src, [])

    def reordering_entry(self, src, tgt) -> ReorderingEntry | None:
        return self._reorder.get((src, tgt))


@dataclass
class DecodeConfig:
    stack_size: int | None = 100
    distortion_limit: int | None = 6
    nbest: int = 1


@dataclass(frozen=True)
class Step:
    """One derivation step: a source span translated by one option."""

    start: int
    end: int  # exclusive
    tgt: tuple[str, ...]
    features: tuple[tuple[str, float], ...]  # phrase-local features
    entry_key: tuple | None  # (src, tgt) of the phrase entry; None for OOV


@dataclass
class Hypothesis:
    coverage: int  # bit mask
    covered: int
    last_start: int
    last_end: int  # exclusive source position after last phrase
    ctx: tuple[str, ...]
    tokens: tuple[str, ...]
    score: float  # accumulated weighted score
    future: float
    steps: tuple[Step, ...]
    last_key: tuple | None

    def sort_key(self):
        return (-(self.score + self.future), self.tokens, self.coverage, self.last_end)


@dataclass
class DecodedHypothesis:
    tokens: tuple[str, ...]
    score: float
    features: dict[str, float]
    steps: tuple[Step, ...]


def _entry_features(entry: PhraseEntry) -> tuple[tuple[str, float], ...]:
    feats = [(name, math.log10(max(s, 1e-30))) for name, s in zip(SCORE_NAMES, entry.scores)]
    feats.append(("phrase_penalty", -1.0))
    feats.append(("word_penalty", -float(len(entry.tgt))))
    return tuple(feats)


def _oov_features() -> tuple[tuple[str, float], ...]:
    return (("oov", -1.0), ("word_penalty", -1.0))


def build_options(
    sentence: list[str], models: PhraseModels
) -> dict[tuple[int, int], list[Step]]:
    """Translation options per source span, with OOV pass-through filling."""
    n = len(sentence)
    options: dict[tuple[int, int], list[Step]] = {}
    covered = [False] * n
    for i in range(n):
        for j in range(i + 1, min(i + models.max_src_len, n) + 1):
            src = tuple(sentence[i:j])
            entries = models.options(src)
            if entries:
                options[(i, j)] = [
                    Step(i, j, e.tgt, _entry_features(e), (e.src, e.tgt)) for e in entries
                ]
                for k in range(i, j):
                    covered[k] = True
    for i in range(n):
        if not covered[i]:
            options.setdefault((i, i + 1), []).append(
                Step(i, i + 1, (sentence[i],), _oov_features(), None)
            )
    return options


def lm_prefix_score(lm: NGramModel, tokens: tuple[str, ...]) -> float:
    """Boundary-free log10 LM score of a token sequence."""
    total = 0.0
    for i in range(len(tokens)):
        history = tokens[max(0, i - lm.order + 1) : i]
        total += lm.score_word(history, tokens[i])
    return total


def future_cost_table(
    sentence: list[str],
    options: dict[tuple[int, int], list[Step]],
    models: PhraseModels,
    weights: FeatureWeights,
) -> dict[tuple[int, int], float]:
    """Best-case span estimates: phrase-local features plus context-free LM."""
    n = len(sentence)
    table: dict[tuple[int, int], float] = {}
    for width in range(1, n + 1):
        for i in range(0, n - width + 1):
            j = i + width
            best = -math.inf
            for step in options.get((i, j), []):
                score = sum(weights.get(name) * v for name, v in step.features)
                score += weights.lm * lm_prefix_score(models.lm, step.tgt)
                best = max(best, score)
            for k in range(i + 1, j):
                combined = table[(i, k)] + table[(k, j)]
                best = max(best, combined)
            table[(i, j)] = best
    return table


def _uncovered_future(
    coverage: int, n: int, table: dict[tuple[int, int], float]
) -> float:
    total = 0.0
    i = 0
    while i < n:
        if coverage >> i & 1:
            i += 1
            continue
        j = i
        while j < n and not coverage >> j & 1:
            j += 1
        total += table[(i, j)]
        i = j
    return total


def _orientation_name(
    prev_start: int, prev_end: int, start: int, end: int, orientations: tuple[str, ...]
) -> str:
    if prev_end == start:
        return "monotone"
    if end == prev_start:
        return "swap"
    if len(orientations) == 3:
        return "discontinuous"
    return "disc-left" if start >= prev_end else "disc-right"


def _reordering_increment(
    models: PhraseModels,
    weights: FeatureWeights,
    prev_key: tuple | None,
    prev_start: int,
    prev_end: int,
    step: Step,
) -> float:
    """Forward orientation of the new phrase plus backward of the previous."""
    if not models.reordering:
        return 0.0
    total = 0.0
    entry = models.reordering_entry(*step.entry_key) if step.entry_key else None
    orientations = MSD
    if entry is not None and len(entry.forward) == 4:
        orientations = MSLR
    orient = _orientation_name(prev_start, prev_end, step.start, step.end, orientations)
    if entry is not None:
        total += math.log10(max(entry.forward[orient], 1e-30))
    if prev_key is not None:
        prev_entry = models.reordering_entry(*prev_key)
        if prev_entry is not None:
            back_orients = MSD if len(prev_entry.backward) == 3 else MSLR
            back = _orientation_name(step.start, step.end, prev_start, prev_end, back_orients)
            total += math.log10(max(prev_entry.backward[back], 1e-30))
    return weights.reordering * total


def decode_phrase(
    sentence: list[str],
    models: PhraseModels,
    weights: FeatureWeights | None = None,
    config: DecodeConfig | None = None,
) -> list[DecodedHypothesis]:
    """Beam-search decode; returns up to nbest hypotheses, best first.

    Recombination keeps a single survivor per key; n-best variety comes
    from widening the per-stack beam to at least 2*nbest keys and from
    every distinct completed derivation encountered along the way.
    """
    weights = weights or FeatureWeights()
    config = config or DecodeConfig()
    if not sentence:
        raise DecodeError("cannot decode an empty sentence")
    if models.lm is None or models.phrase_table is None:
        raise DecodeError("phrase decoding needs a phrase table and a language model")

    n = len(sentence)
    lm = models.lm
    order_cut = lm.order - 1
    options = build_options(sentence, models)
    future = future_cost_table(sentence, options, models, weights)
    beam_width = config.stack_size
    if beam_width is not None and config.nbest > 1:
        beam_width = max(beam_width, 2 * config.nbest)

    # per-decode caches: weighted phrase-local increments, LM deltas, and
    # future costs by coverage mask
    step_inc: dict[int, float] = {}
    step_ids: dict[int, tuple[int, ...]] = {}
    for span_steps in options.values():
        for step in span_steps:
            step_inc[id(step)] = sum(weights.get(name) * v for name, v in step.features)
            step_ids[id(step)] = tuple(lm.vocab.id_of(w) for w in step.tgt)
    lm_cache: dict[tuple, tuple[float, tuple[int, ...]]] = {}
    future_cache: dict[int, float] = {}

    def future_of(coverage: int) -> float:
        cached = future_cache.get(coverage)
        if cached is None:
            cached = _uncovered_future(coverage, n, future)
            future_cache[coverage] = cached
        return cached

    def lm_delta(ctx: tuple[int, ...], step: Step) -> tuple[float, tuple[int, ...]]:
        key = (ctx, id(step))
        cached = lm_cache.get(key)
        if cached is None:
            total = 0.0
            cur = ctx
            for wid in step_ids[id(step)]:
                total += lm.score_ids(cur, wid)
                cur = (cur + (wid,))[-order_cut:]
            cached = (total, cur)
            lm_cache[key] = cached
        return cached

    bos_ctx = (lm.vocab.id_of(BOS),)
    eos_id = lm.vocab.id_of(EOS)
    init = Hypothesis(
        coverage=0,
        covered=0,
        last_start=0,
        last_end=0,
        ctx=bos_ctx,
        tokens=(),
        score=0.0,
        future=future_of(0),
        steps=(),
        last_key=None,
    )
    stacks: list[dict[tuple, Hypothesis]] = [dict() for _ in range(n + 1)]
    stacks[0][(0, bos_ctx, 0, None)] = init
    completed: dict[tuple[str, ...], DecodedHypothesis] = {}
    full_mask = (1 << n) - 1
    span_masks = [
        (i, j, ((1 << (j - i)) - 1) << i, steps) for (i, j), steps in sorted(options.items())
    ]
    track_reorder = bool(models.reordering)
    distortion_weight = weights.distortion
    limit = config.distortion_limit

    for count in range(n):
        stack = stacks[count]
        if not stack:
            continue
        survivors = sorted(stack.values(), key=Hypothesis.sort_key)
        if beam_width is not None:
            survivors = survivors[:beam_width]
        for hyp in survivors:
            coverage = hyp.coverage
            last_end = hyp.last_end
            for i, j, mask, span_steps in span_masks:
                if coverage & mask:
                    continue
                jump = i - last_end if i >= last_end else last_end - i
                if limit is not None and jump > limit:
                    continue
                base = hyp.score + distortion_weight * -float(jump)
                for step in span_steps:
                    inc = base + step_inc[id(step)]
                    delta, ctx = lm_delta(hyp.ctx, step)
                    inc += weights.lm * delta
                    if track_reorder:
                        inc += _reordering_increment(
                            models, weights, hyp.last_key, hyp.last_start, hyp.last_end, step
                        )
                    new_coverage = coverage | mask
                    if new_coverage == full_mask:
                        score = inc + weights.lm * lm.score_ids(ctx, eos_id)
                        steps = hyp.steps + (step,)
                        tokens = hyp.tokens + step.tgt
                        if track_reorder:
                            score += _final_reordering_for(models, weights, step, n)
                        existing = completed.get(tokens)
                        if existing is None or score > existing.score:
                            completed[tokens] = DecodedHypothesis(
                                tokens=tokens,
                                score=score,
                                features=derivation_features(steps, models, n),
                                steps=steps,
                            )
                        continue
                    key = (new_coverage, ctx, j, step.entry_key if track_reorder else None)
                    target_stack = stacks[hyp.covered + (j - i)]
                    other = target_stack.get(key)
                    if other is not None and other.score >= inc:
                        continue
                    target_stack[key] = Hypothesis(
                        coverage=new_coverage,
                        covered=hyp.covered + (j - i),
                        last_start=i,
                        last_end=j,
                        ctx=ctx,
                        tokens=hyp.tokens + step.tgt,
                        score=inc,
                        future=future_of(new_coverage),
                        steps=hyp.steps + (step,),
                        last_key=step.entry_key,
                    )

    if not completed:
        if config.distortion_limit == 0:
            raise DecodeError("monotone search failed to complete any hypothesis")
        fallback = DecodeConfig(stack_size=config.stack_size, distortion_limit=0, nbest=config.nbest)
        return decode_phrase(sentence, models, weights, fallback)

    ranked = sorted(completed.values(), key=lambda h: (-h.score, h.tokens))
    return ranked[: max(config.nbest, 1)]


def _final_reordering_for(
    models: PhraseModels, weights: FeatureWeights, step: Step, n: int
) -> float:
    if step.entry_key is None:
        return 0.0
    entry = models.reordering_entry(*step.entry_key)
    if entry is None:
        return 0.0
    orients = MSD if len(entry.backward) == 3 else MSLR
    back = _orientation_name(n, n + 1, step.start, step.end, orients)
    return weights.reordering * math.log10(max(entry.backward[back], 1e-30))


def derivation_features(
    steps: tuple[Step, ...], models: PhraseModels, n: int
) -> dict[str, float]:
    """Recompute the full feature vector of a derivation from scratch."""
    features: dict[str, float] = {}
    tokens: tuple[str, ...] = ()
    last_start, last_end = 0, 0
    prev_key = None
    distortion = 0.0
    reorder = 0.0
    for step in steps:
        add_features(features, dict(step.features))
        distortion += abs(step.start - last_end)
        if models.reordering:
            entry = models.reordering_entry(*step.entry_key) if step.entry_key else None
            orients = MSLR if entry is not None and len(entry.forward) == 4 else MSD
            orient = _orientation_name(last_start, last_end, step.start, step.end, orients)
            if entry is not None:
                reorder += math.log10(max(entry.forward[orient], 1e-30))
            if prev_key is not None:
                prev_entry = models.reordering_entry(*prev_key)
                if prev_entry is not None:
                    back_orients = MSD if len(prev_entry.backward) == 3 else MSLR
                    back = _orientation_name(step.start, step.end, last_start, last_end, back_orients)
                    reorder += math.log10(max(prev_entry.backward[back], 1e-30))
        tokens += step.tgt
        last_start, last_end = step.start, step.end
        prev_key = step.entry_key
    if models.reordering and prev_key is not None:
        prev_entry = models.reordering_entry(*prev_key)
        if prev_entry is not None:
            back_orients = MSD if len(prev_entry.backward) == 3 else MSLR
            back = _orientation_name(n, n + 1, last_start, last_end, back_orients)
            reorder += math.log10(max(prev_entry.backward[back], 1e-30))
    features["distortion"] = -distortion
    if models.reordering:
        features["reordering"] = reorder
    total_lm, _ = models.lm.score_sentence(list(tokens))
    features["lm"] = total_lm
    return features


def score_derivation(
    steps: tuple[Step, ...],
    models: PhraseModels,
    weights: FeatureWeights,
    n: int,
) -> float:
    return weights.dot(derivation_features(steps, models, n))
