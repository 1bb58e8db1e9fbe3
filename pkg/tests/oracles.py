"""Independent brute-force oracles the production code is checked against.

Everything here is deliberately naive: dense loops, textbook formulas, no
sharing with the implementations under test beyond input data structures.
"""

from __future__ import annotations

import math
from collections import Counter


# --- IBM Model 1 EM, dense reference implementation -----------------------


def ibm1_em_reference(pairs, iterations, null_word="<null>"):
    """(t table, per-iteration log-likelihoods) by direct EM."""
    t = {}
    for src_sent, tgt_sent in pairs:
        for e in list(src_sent) + [null_word]:
            for f in tgt_sent:
                t[(e, f)] = 1.0
    row_sizes = Counter(e for e, _ in t)
    for (e, f) in t:
        t[(e, f)] = 1.0 / row_sizes[e]

    likelihoods = []
    for _ in range(iterations):
        counts = Counter()
        totals = Counter()
        ll = 0.0
        for src_sent, tgt_sent in pairs:
            sources = list(src_sent) + [null_word]
            for f in tgt_sent:
                z = sum(t[(e, f)] for e in sources)
                ll += math.log(z / len(sources))
                for e in sources:
                    counts[(e, f)] += t[(e, f)] / z
                    totals[e] += t[(e, f)] / z
        for (e, f) in t:
            t[(e, f)] = counts[(e, f)] / totals[e] if totals[e] else 0.0
        likelihoods.append(ll)
    return t, likelihoods


# --- exhaustive consistent-phrase-pair enumeration -------------------------


def consistent_span_pairs(n_src, n_tgt, links, max_len):
    """Every ((i1,i2),(j1,j2)) span pair consistent with the alignment."""
    out = []
    for i1 in range(n_src):
        for i2 in range(i1, min(i1 + max_len, n_src)):
            for j1 in range(n_tgt):
                for j2 in range(j1, min(j1 + max_len, n_tgt)):
                    inside = [
                        (i, j) for i, j in links if i1 <= i <= i2 and j1 <= j <= j2
                    ]
                    if not inside:
                        continue
                    if any((i1 <= i <= i2) != (j1 <= j <= j2) for i, j in links):
                        continue
                    out.append(((i1, i2), (j1, j2)))
    return sorted(out)


# --- corpus BLEU by direct n-gram counting ---------------------------------


def corpus_bleu_reference(hyps, refs, max_n=4):
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for hyp, ref in zip(hyps, refs):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            hyp_grams = Counter(tuple(hyp[i : i + n]) for i in range(len(hyp) - n + 1))
            ref_grams = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
            matches[n - 1] += sum(min(c, ref_grams[g]) for g, c in hyp_grams.items())
            totals[n - 1] += max(len(hyp) - n + 1, 0)
    if any(m == 0 or t == 0 for m, t in zip(matches, totals)):
        return 0.0
    log_geo = sum(math.log(m / t) for m, t in zip(matches, totals)) / max_n
    bp = min(1.0, math.exp(1.0 - ref_len / hyp_len))
    return bp * math.exp(log_geo)


# --- interpolated modified Kneser-Ney, recursive evaluation ----------------


def kn_reference_prob(corpus, order, word, history, bos="<s>", eos="</s>", unk="<unk>"):
    """p(word | history) recomputed from raw counts, recursively."""
    padded = [[bos] + sent + [eos] for sent in corpus if sent]
    raw = [Counter() for _ in range(order + 1)]
    for sent in padded:
        for k in range(1, order + 1):
            for i in range(len(sent) - k + 1):
                raw[k][tuple(sent[i : i + k])] += 1
    adjusted = [Counter() for _ in range(order + 1)]
    adjusted[order] = Counter(raw[order])
    for k in range(order - 1, 0, -1):
        for gram in raw[k + 1]:
            adjusted[k][gram[1:]] += 1
        for gram, count in raw[k].items():
            if gram[0] == bos:
                adjusted[k][gram] = count
        adjusted[k].pop((bos,), None)

    def discounts(k):
        coc = Counter(c for c in adjusted[k].values() if c <= 4)
        n1, n2, n3, n4 = coc[1], coc[2], coc[3], coc[4]
        if min(n1, n2, n3, n4) == 0:
            return 0.75, 0.75, 0.75
        y = n1 / (n1 + 2 * n2)
        d = (1 - 2 * y * n2 / n1, 2 - 3 * y * n3 / n2, 3 - 4 * y * n4 / n3)
        for bound, value in zip((1, 2, 3), d):
            if not 0 < value <= bound:
                return 0.75, 0.75, 0.75
        return d

    vocab = {w for sent in padded for w in sent if w != bos} | {unk}
    seen = {w for sent in padded for w in sent}

    def prob(k, hist, w):
        d1, d2, d3 = discounts(k)
        conts = {g[-1]: c for g, c in adjusted[k].items() if g[:-1] == hist}
        denom = sum(conts.values())
        n1 = sum(1 for c in conts.values() if c == 1)
        n2 = sum(1 for c in conts.values() if c == 2)
        n3 = sum(1 for c in conts.values() if c >= 3)
        gamma = (d1 * n1 + d2 * n2 + d3 * n3) / denom
        c = conts.get(w, 0)
        disc = d1 if c == 1 else d2 if c == 2 else d3
        u = (c - disc) / denom if c else 0.0
        if k == 1:
            return u + gamma / len(vocab)
        return u + gamma * prob(k - 1, hist[1:], w)

    if word not in seen:
        word = unk
    hist = tuple(history)[-(order - 1):]
    # back off past histories with no continuations
    while hist and not any(g[:-1] == hist for g in adjusted[len(hist) + 1]):
        hist = hist[1:]
    return prob(len(hist) + 1, hist, word)


# --- projectivity via yield contiguity -------------------------------------


def projective_by_yields(heads):
    """heads: 1-based dict token -> head (0 root). True iff every subtree
    yield is a contiguous interval, i.e. nested-interval construction works."""
    children = {}
    for tok, head in heads.items():
        children.setdefault(head, []).append(tok)

    def yield_of(tok):
        out = {tok}
        for child in children.get(tok, []):
            out |= yield_of(child)
        return out

    for tok in heads:
        span = yield_of(tok)
        if max(span) - min(span) + 1 != len(span):
            return False
    return True
