"""CKY-style chart decoding over a hierarchical rule table with glue rules.

Items are LM-integrated and keyed per cell by (lhs, boundary words); each
cell keeps a beam. Compositions rescore only the junction words, so item
scores stay O(LM order) to combine. Glue derivations are left-anchored: S
covers a prefix and grows monotonically to the right. Sentences that fail
to parse fall back to glue-concatenating the best per-word lexical rules,
which cannot fail thanks to verbatim pass-through for uncovered words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..lm import NGramModel
from ..ruletab import NT, RuleEntry
from .phrase import SCORE_NAMES, DecodeError, DecodedHypothesis
from .weights import FeatureWeights, add_features


@dataclass
class ChartModels:
    rule_table: list[RuleEntry]
    lm: NGramModel

    def __post_init__(self):
        self.by_lhs: dict[str, list[RuleEntry]] = {}
        # rules grouped by their first terminal (or NT-initial) so a cell
        # only tries plausible candidates
        self.by_first_word: dict[str, list[RuleEntry]] = {}
        self.nt_initial: list[RuleEntry] = []
        has_glue = False
        for rule in self.rule_table:
            if rule.lhs == "S":
                has_glue = True
                continue  # glue applications are built in, not matched
            self.by_lhs.setdefault(rule.lhs, []).append(rule)
            if isinstance(rule.src_rhs[0], NT):
                self.nt_initial.append(rule)
            else:
                self.by_first_word.setdefault(rule.src_rhs[0], []).append(rule)
        if not has_glue:
            raise DecodeError("rule table is missing the glue rules")

    def candidates(self, first_word: str, width: int) -> list[RuleEntry]:
        found = [
            r for r in self.by_first_word.get(first_word, []) if len(r.src_rhs) <= width
        ]
        found.extend(r for r in self.nt_initial if len(r.src_rhs) <= width)
        return found


@dataclass
class ChartConfig:
    cell_beam: int = 100
    nbest: int = 1
    # sub-items tried per nonterminal when composing; keeps two-gap rules
    # from multiplying whole cell beams together (no cube pruning here)
    compose_beam: int | None = None

    def effective_compose_beam(self) -> int:
        if self.compose_beam is not None:
            return max(self.compose_beam, 1)
        return max(int(self.cell_beam ** 0.5), 1)


@dataclass
class ChartItem:
    lhs: str
    tokens: tuple[str, ...]
    features: dict[str, float]  # without lm
    rules: tuple[RuleEntry, ...]
    prefix_lm: float = 0.0  # boundary-free log10 LM score of tokens
    head_lm: float = 0.0  # portion contributed by the first order-1 words
    score: float = 0.0  # weights.dot(features) + lm weight * prefix_lm


def _rule_features(rule: RuleEntry) -> dict[str, float]:
    feats = {
        name: math.log10(max(score, 1e-30)) for name, score in zip(SCORE_NAMES, rule.scores)
    }
    feats["phrase_penalty"] = -1.0
    feats["word_penalty"] = -float(sum(1 for s in rule.tgt_rhs if not isinstance(s, NT)))
    return feats


class _ItemFactory:
    """Builds scored items, rescoring only junction words on composition."""

    def __init__(self, lm: NGramModel, weights: FeatureWeights):
        self.lm = lm
        self.weights = weights
        self.ctx_len = lm.order - 1

    def build(self, lhs, parts, features, rules) -> ChartItem:
        lm_model = self.lm
        tokens: tuple[str, ...] = ()
        total = 0.0
        head = 0.0
        for part in parts:
            if isinstance(part, str):
                delta = lm_model.score_word(tokens[-self.ctx_len:], part)
                if len(tokens) < self.ctx_len:
                    head += delta
                total += delta
                tokens += (part,)
            else:
                rescored = 0.0
                cur = tokens
                for word in part.tokens[: self.ctx_len]:
                    delta = lm_model.score_word(cur[-self.ctx_len:], word)
                    if len(cur) < self.ctx_len:
                        head += delta
                    rescored += delta
                    cur += (word,)
                total += part.prefix_lm - part.head_lm + rescored
                tokens += part.tokens
        score = self.weights.dot(features) + self.weights.lm * total
        return ChartItem(lhs, tokens, features, rules, total, head, score)

    def compose(self, rule: RuleEntry, sub_items: dict[int, "ChartItem"]) -> ChartItem:
        features = _rule_features(rule)
        rules: tuple[RuleEntry, ...] = (rule,)
        parts: list = []
        for symbol in rule.tgt_rhs:
            if isinstance(symbol, NT):
                sub = sub_items[symbol.index]
                add_features(features, sub.features)
                rules = rules + sub.rules
                parts.append(sub)
            else:
                parts.append(symbol)
        return self.build(rule.lhs, parts, features, rules)

    def glue_join(self, left: ChartItem, right: ChartItem) -> ChartItem:
        features = dict(left.features)
        add_features(features, right.features)
        features["glue"] = features.get("glue", 0.0) - 1.0
        return self.build("S", [left, right], features, left.rules + right.rules)

    def oov(self, word: str) -> ChartItem:
        return self.build("X", [word], {"oov": -1.0, "word_penalty": -1.0}, ())

    def as_glue(self, item: ChartItem) -> ChartItem:
        features = dict(item.features)
        features["glue"] = features.get("glue", 0.0) - 1.0
        return ChartItem(
            "S", item.tokens, features, item.rules, item.prefix_lm, item.head_lm,
            item.score + self.weights.glue * -1.0,
        )


def _match_positions(pattern: tuple, sentence: list[str], i: int, j: int):
    """Yield NT span assignments matching pattern to sentence[i:j]."""

    def rec(p: int, pos: int, spans: list[tuple[int, int]]):
        if p == len(pattern):
            if pos == j:
                yield list(spans)
            return
        symbol = pattern[p]
        if isinstance(symbol, NT):
            remaining = len(pattern) - p - 1
            for end in range(pos + 1, j - remaining + 1):
                spans.append((pos, end))
                yield from rec(p + 1, end, spans)
                spans.pop()
        else:
            if pos < j and sentence[pos] == symbol:
                yield from rec(p + 1, pos + 1, spans)

    yield from rec(0, i, [])


def _prune(items: list[ChartItem], order: int, beam: int) -> list[ChartItem]:
    # recombine by boundary words, keep the better survivor
    best: dict[tuple, ChartItem] = {}
    for item in items:
        key = (item.lhs, item.tokens[: order - 1], item.tokens[-(order - 1):])
        other = best.get(key)
        if other is None or item.score > other.score:
            best[key] = item
    survivors = sorted(best.values(), key=lambda it: (-it.score, it.tokens))
    return survivors[:beam]


def decode_chart(
    sentence: list[str],
    models: ChartModels,
    weights: FeatureWeights | None = None,
    config: ChartConfig | None = None,
) -> list[DecodedHypothesis]:
    weights = weights or FeatureWeights()
    config = config or ChartConfig()
    if not sentence:
        raise DecodeError("cannot decode an empty sentence")
    n = len(sentence)
    factory = _ItemFactory(models.lm, weights)
    order = models.lm.order

    cells: dict[tuple[int, int], dict[str, list[ChartItem]]] = {}
    glue: dict[int, list[ChartItem]] = {}  # S items over [0, j)
    compose_beam = config.effective_compose_beam()

    for width in range(1, n + 1):
        for i in range(0, n - width + 1):
            j = i + width
            found: list[ChartItem] = []
            for rule in models.candidates(sentence[i], width):
                for spans in _match_positions(rule.src_rhs, sentence, i, j):
                    nts = [s for s in rule.src_rhs if isinstance(s, NT)]
                    combos = [[]]
                    for nt, (a, b) in zip(nts, spans):
                        sub_lists = cells.get((a, b), {}).get(nt.label, [])[:compose_beam]
                        if not sub_lists:
                            combos = []
                            break
                        combos = [c + [(nt.index, s)] for c in combos for s in sub_lists]
                    for combo in combos:
                        found.append(factory.compose(rule, dict(combo)))
            if width == 1 and not any(item.lhs == "X" for item in found):
                found.append(factory.oov(sentence[i]))
            if found:
                pruned = _prune(found, order, config.cell_beam)
                by_label: dict[str, list[ChartItem]] = {}
                for item in pruned:
                    by_label.setdefault(item.lhs, []).append(item)
                cells[(i, j)] = by_label

    # left-anchored glue pass: S(0,j) = X(0,j) | S(0,k) + X(k,j)
    for j in range(1, n + 1):
        candidates: list[ChartItem] = []
        for item in cells.get((0, j), {}).get("X", []):
            candidates.append(factory.as_glue(item))
        for k in range(1, j):
            for left in glue.get(k, []):
                for right in cells.get((k, j), {}).get("X", []):
                    candidates.append(factory.glue_join(left, right))
        if candidates:
            glue[j] = _prune(candidates, order, config.cell_beam)

    finals = list(glue.get(n, []))
    if not finals:
        finals = [_fallback(sentence, models, factory)]

    ranked: dict[tuple[str, ...], DecodedHypothesis] = {}
    for item in finals:
        features = dict(item.features)
        features["lm"], _ = models.lm.score_sentence(list(item.tokens))
        score = weights.dot(features)
        existing = ranked.get(item.tokens)
        if existing is None or score > existing.score:
            ranked[item.tokens] = DecodedHypothesis(item.tokens, score, features, item.rules)
    ordered = sorted(ranked.values(), key=lambda h: (-h.score, h.tokens))
    return ordered[: max(config.nbest, 1)]


def _fallback(sentence: list[str], models: ChartModels, factory: _ItemFactory) -> ChartItem:
    """Monotone concatenation of the best purely lexical rule per word."""
    item = None
    for word in sentence:
        best: ChartItem | None = None
        for rule in models.by_first_word.get(word, []):
            if rule.src_rhs == (word,) and not any(isinstance(s, NT) for s in rule.tgt_rhs):
                candidate = factory.compose(rule, {})
                if best is None or candidate.score > best.score:
                    best = candidate
        if best is None:
            best = factory.oov(word)
        best = factory.as_glue(best)
        item = best if item is None else factory.glue_join(item, best)
    assert item is not None
    return item
