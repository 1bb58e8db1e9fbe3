"""Interpolated modified Kneser-Ney n-gram language models.

Probabilities and backoff weights are log10 throughout, matching the ARPA
text format. The model is exactly normalized: for every stored history h,
summing p(w|h) over the full vocabulary (through backoff) gives 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import BOS, EOS, NULL, UNK, Vocabulary

LOG10_ZERO = -99.0  # conventional ARPA stand-in for log10(0)

BINARY_MAGIC = b"KSLM1\n"


class LmError(ValueError):
    """Raised for invalid training input or malformed ARPA data."""


@dataclass
class Discounts:
    d1: float
    d2: float
    d3plus: float

    def for_count(self, count: float) -> float:
        if count >= 3:
            return self.d3plus
        if count >= 2:
            return self.d2
        return self.d1


def _closed_form_discounts(counts_of_counts: dict[int, int]) -> Discounts | None:
    """Standard closed-form discounts from n1..n4; None when undefined."""
    n1 = counts_of_counts.get(1, 0)
    n2 = counts_of_counts.get(2, 0)
    n3 = counts_of_counts.get(3, 0)
    n4 = counts_of_counts.get(4, 0)
    if min(n1, n2, n3, n4) == 0:
        return None
    y = n1 / (n1 + 2.0 * n2)
    d = Discounts(1.0 - 2.0 * y * n2 / n1, 2.0 - 3.0 * y * n3 / n2, 3.0 - 4.0 * y * n4 / n3)
    for bound, value in ((1.0, d.d1), (2.0, d.d2), (3.0, d.d3plus)):
        if not 0.0 < value <= bound:
            return None
    return d


@dataclass
class NGramModel:
    """n-gram tables keyed by token-id tuples holding (log10 p, log10 bow)."""

    order: int
    vocab: Vocabulary
    # tables[k] maps k-gram id tuples to log10 probability, for k = 1..order
    probs: list[dict[tuple[int, ...], float]] = field(default_factory=list)
    # backoffs[k] maps k-gram histories to log10 backoff weight, k = 1..order-1
    backoffs: list[dict[tuple[int, ...], float]] = field(default_factory=list)

    def __post_init__(self):
        if not self.probs:
            self.probs = [{} for _ in range(self.order + 1)]
        if not self.backoffs:
            self.backoffs = [{} for _ in range(self.order)]

    @property
    def unk_logprob(self) -> float:
        return self.probs[1][(self.vocab.id_of(UNK),)]

    def ngram_counts(self) -> list[int]:
        return [len(self.probs[k]) for k in range(1, self.order + 1)]

    def _ids(self, tokens: list[str] | tuple[str, ...]) -> tuple[int, ...]:
        return tuple(self.vocab.id_of(t) for t in tokens)

    def score_ids(self, history: tuple[int, ...], word: int) -> float:
        """log10 p(word | history) with interpolated-model backoff."""
        hist = history[-(self.order - 1):] if self.order > 1 else ()
        while True:
            gram = hist + (word,)
            stored = self.probs[len(gram)].get(gram)
            if stored is not None:
                return stored
            if not hist:
                return self.probs[1][(self.vocab.id_of(UNK),)]
            bow = self.backoffs[len(hist)].get(hist, 0.0)
            if bow:
                return bow + self.score_ids(hist[1:], word)
            hist = hist[1:]

    def score_word(self, history: list[str] | tuple[str, ...], word: str) -> float:
        return self.score_ids(self._ids(history), self.vocab.id_of(word))

    def score_sentence(self, tokens: list[str]) -> tuple[float, float]:
        """Total log10 probability including </s>, and perplexity."""
        bos = self.vocab.id_of(BOS)
        eos = self.vocab.id_of(EOS)
        ctx: tuple[int, ...] = (bos,)
        total = 0.0
        for tok in tokens:
            wid = self.vocab.id_of(tok)
            total += self.score_ids(ctx, wid)
            ctx = (ctx + (wid,))[-(self.order - 1):]
        total += self.score_ids(ctx, eos)
        ppl = 10.0 ** (-total / (len(tokens) + 1))
        return total, ppl

    def items(self, k: int) -> list[tuple[tuple[str, ...], float, float | None]]:
        """(words, log10 p, log10 bow or None) for order k, sorted by words."""
        out = []
        for gram, logp in self.probs[k].items():
            words = tuple(self.vocab.string_of(i) for i in gram)
            bow = self.backoffs[k].get(gram) if k < self.order else None
            out.append((words, logp, bow))
        out.sort(key=lambda item: item[0])
        return out


def train_lm(
    corpus: list[list[str]],
    order: int = 3,
    discount_mode: str = "counts_of_counts",
    fixed_discount: float = 0.75,
) -> NGramModel:
    """Estimate an interpolated modified Kneser-Ney model.

    The highest order uses raw counts; lower orders use continuation counts
    (number of distinct predecessors), except n-grams starting with <s>,
    which keep raw counts because nothing can precede <s>. Three discounts
    per order come from counts-of-counts, falling back to the fixed discount
    whenever the closed form is undefined on a tiny corpus.
    """
    if order < 2:
        raise LmError(f"order must be >= 2, got {order}")
    if discount_mode not in ("counts_of_counts", "fixed"):
        raise LmError(f"unknown discount mode: {discount_mode!r}")
    if not 0.0 < fixed_discount <= 1.0:
        raise LmError(f"fixed discount must be in (0, 1], got {fixed_discount}")
    sentences = [s for s in corpus if s]
    if not sentences:
        raise LmError("training corpus has zero tokens")

    vocab = Vocabulary()
    padded: list[list[int]] = []
    bos = vocab.id_of(BOS)
    unk_id = vocab.id_of(UNK)
    for sent in sentences:
        padded.append([bos] + [vocab.add(t) for t in sent] + [vocab.id_of(EOS)])

    # raw counts per order
    raw: list[dict[tuple[int, ...], int]] = [dict() for _ in range(order + 1)]
    for ids in padded:
        for k in range(1, order + 1):
            table = raw[k]
            for i in range(len(ids) - k + 1):
                gram = tuple(ids[i : i + k])
                table[gram] = table.get(gram, 0) + 1

    # adjusted counts: raw at the top, continuation below (raw for <s>-initial)
    adjusted: list[dict[tuple[int, ...], int]] = [dict() for _ in range(order + 1)]
    adjusted[order] = dict(raw[order])
    for k in range(order - 1, 0, -1):
        table: dict[tuple[int, ...], int] = {}
        for gram in raw[k + 1]:
            suffix = gram[1:]
            table[suffix] = table.get(suffix, 0) + 1
        for gram, count in raw[k].items():
            if gram[0] == bos:
                table[gram] = count
        table.pop((bos,), None)  # <s> is never predicted
        adjusted[k] = table

    discounts: list[Discounts] = [Discounts(0, 0, 0)]
    for k in range(1, order + 1):
        if discount_mode == "fixed":
            discounts.append(Discounts(fixed_discount, fixed_discount, fixed_discount))
            continue
        coc: dict[int, int] = {}
        for count in adjusted[k].values():
            if count <= 4:
                coc[count] = coc.get(count, 0) + 1
        d = _closed_form_discounts(coc)
        if d is None:
            d = Discounts(fixed_discount, fixed_discount, fixed_discount)
        discounts.append(d)

    # group each level by history
    model = NGramModel(order=order, vocab=vocab)
    prob: list[dict[tuple[int, ...], float]] = [dict() for _ in range(order + 1)]

    # predictable vocabulary: everything except <s> and NULL, plus <unk>
    vocab_size = sum(1 for t in vocab.strings() if t not in (BOS, NULL))

    for k in range(1, order + 1):
        by_history: dict[tuple[int, ...], list[tuple[int, int]]] = {}
        for gram, count in adjusted[k].items():
            by_history.setdefault(gram[:-1], []).append((gram[-1], count))
        d = discounts[k]
        for history, continuations in by_history.items():
            denom = float(sum(c for _, c in continuations))
            n_by_level = [0, 0, 0]
            for _, c in continuations:
                n_by_level[min(c, 3) - 1] += 1
            gamma = (
                d.d1 * n_by_level[0] + d.d2 * n_by_level[1] + d.d3plus * n_by_level[2]
            ) / denom
            for word, count in continuations:
                u = (count - d.for_count(count)) / denom
                if k == 1:
                    p = u + gamma / vocab_size
                else:
                    p = u + gamma * prob[k - 1][history[1:] + (word,)]
                prob[k][history + (word,)] = p
            if k == 1:
                # leftover unigram mass is spread uniformly; <unk> gets its share
                prob[1][(unk_id,)] = gamma / vocab_size
            else:
                model.backoffs[k - 1][history] = math.log10(gamma)

    for k in range(1, order + 1):
        for gram, p in prob[k].items():
            model.probs[k][gram] = math.log10(p) if p > 0 else LOG10_ZERO
    # <s> appears as context but is never predicted
    model.probs[1][(bos,)] = LOG10_ZERO
    model.backoffs[1].setdefault((bos,), 0.0)
    return model


def _fmt(value: float) -> str:
    return repr(round(value, 12))


def write_arpa(model: NGramModel) -> str:
    lines = ["\\data\\"]
    for k in range(1, model.order + 1):
        lines.append(f"ngram {k}={len(model.probs[k])}")
    for k in range(1, model.order + 1):
        lines.append("")
        lines.append(f"\\{k}-grams:")
        for words, logp, bow in model.items(k):
            gram = " ".join(words)
            if k < model.order:
                lines.append(f"{_fmt(logp)}\t{gram}\t{_fmt(bow or 0.0)}")
            else:
                lines.append(f"{_fmt(logp)}\t{gram}")
    lines.append("")
    lines.append("\\end\\")
    return "\n".join(lines) + "\n"


def read_arpa(text: str) -> NGramModel:
    lines = text.splitlines()
    pos = 0
    while pos < len(lines) and lines[pos].strip() != "\\data\\":
        if lines[pos].strip():
            raise LmError(f"line {pos + 1}: expected \\data\\ header")
        pos += 1
    if pos == len(lines):
        raise LmError("missing \\data\\ header")
    pos += 1
    declared: dict[int, int] = {}
    while pos < len(lines) and lines[pos].strip():
        part = lines[pos].strip()
        if not part.startswith("ngram "):
            raise LmError(f"line {pos + 1}: malformed count line {part!r}")
        spec_part = part[len("ngram "):]
        k_str, _, count_str = spec_part.partition("=")
        declared[int(k_str)] = int(count_str)
        pos += 1
    if not declared:
        raise LmError("empty \\data\\ section")
    order = max(declared)

    vocab = Vocabulary()
    model = NGramModel(order=order, vocab=vocab)
    seen: dict[int, int] = {k: 0 for k in declared}
    current_k = 0
    for lineno in range(pos, len(lines)):
        line = lines[lineno].strip()
        if not line:
            continue
        if line == "\\end\\":
            break
        if line.startswith("\\") and line.endswith("-grams:"):
            current_k = int(line[1:-len("-grams:")])
            if current_k not in declared:
                raise LmError(f"line {lineno + 1}: undeclared section {line!r}")
            continue
        if current_k == 0:
            raise LmError(f"line {lineno + 1}: data outside any n-gram section")
        cols = line.split("\t")
        expect = 2 if current_k == order else 3
        if len(cols) != expect:
            raise LmError(
                f"line {lineno + 1}: {current_k}-gram line has {len(cols)} fields, expected {expect}"
            )
        words = tuple(cols[1].split(" "))
        if len(words) != current_k:
            raise LmError(f"line {lineno + 1}: expected {current_k} tokens in {cols[1]!r}")
        gram = tuple(vocab.add(w) for w in words)
        model.probs[current_k][gram] = float(cols[0])
        if current_k < order:
            bow = float(cols[2])
            if bow != 0.0:
                model.backoffs[current_k][gram] = bow
        seen[current_k] += 1
    else:
        raise LmError("missing \\end\\ terminator")
    for k, count in declared.items():
        if seen[k] != count:
            raise LmError(
                f"\\{k}-grams: section declares {count} entries but contains {seen[k]}"
            )
    return model


def write_binary(model: NGramModel, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(write_arpa(model).encode("utf-8"))


def read_binary(path: str) -> NGramModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(BINARY_MAGIC):
        raise LmError(f"{path}: bad magic bytes, not a cached model")
    return read_arpa(blob[len(BINARY_MAGIC):].decode("utf-8"))
