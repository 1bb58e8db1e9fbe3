"""IBM Model 1/2 training by EM, Viterbi alignment and symmetrization.

Conventions: the NULL token occupies source position 0 and takes part in
both E-steps. Alignment functions map target positions to source positions.
Link sets are 0-based (source index, target index) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import SentencePair

PROB_FLOOR = 1e-12  # keeps later lexical weighting away from zero division

NULL_WORD = "<null>"


class AlignError(ValueError):
    """Raised for invalid training input."""


@dataclass
class TTable:
    """Lexical translation probabilities t(f|e), source word -> target word."""

    table: dict[str, dict[str, float]] = field(default_factory=dict)

    def prob(self, target: str, source: str) -> float:
        row = self.table.get(source)
        if row is None:
            return 0.0
        return row.get(target, 0.0)

    def row(self, source: str) -> dict[str, float]:
        return self.table.get(source, {})

    def sources(self) -> list[str]:
        return list(self.table)

    @classmethod
    def from_counts(
        cls,
        joint_counts: dict[str, dict[str, float]],
        source_totals: dict[str, float] | None = None,
    ) -> "TTable":
        """Single-pass MLE from co-occurrence counts, no EM.

        When source_totals is given it is used as the denominator even if it
        differs from the row sum, for tables whose totals include
        translations not listed row by row.
        """
        table: dict[str, dict[str, float]] = {}
        for src, row in joint_counts.items():
            denom = source_totals[src] if source_totals else sum(row.values())
            if denom <= 0:
                raise AlignError(f"non-positive denominator for source {src!r}")
            table[src] = {tgt: count / denom for tgt, count in row.items()}
        return cls(table)


@dataclass
class DistortionTable:
    """Model-2 position probabilities a(i | j, l_f, l_e); i = 0 is NULL."""

    table: dict[tuple[int, int, int], dict[int, float]] = field(default_factory=dict)

    def prob(self, i: int, j: int, l_f: int, l_e: int) -> float:
        row = self.table.get((j, l_f, l_e))
        if row is None:
            return 1.0 / (l_e + 1)  # unseen geometry: uniform
        return row.get(i, 0.0)


def _normalize_rows(counts: dict[str, dict[str, float]]) -> dict[str, dict[str, float]]:
    table: dict[str, dict[str, float]] = {}
    for src, row in counts.items():
        total = sum(row.values())
        floored = {tgt: max(c / total, PROB_FLOOR) for tgt, c in row.items()}
        # flooring may overshoot 1; renormalize so every row sums to exactly 1
        scale = sum(floored.values())
        table[src] = {tgt: v / scale for tgt, v in floored.items()}
    return table


def train_ibm1(
    pairs: list[SentencePair],
    iterations: int = 10,
    epsilon: float = 1e-6,
) -> tuple[TTable, list[float]]:
    """EM for IBM Model 1; returns the table and per-iteration log-likelihoods.

    Initialization is uniform over co-occurring pairs. Stops early once the
    log-likelihood gain drops below epsilon.
    """
    if iterations < 1:
        raise AlignError(f"iterations must be >= 1, got {iterations}")
    if not pairs:
        raise AlignError("empty training corpus")

    # uniform init over co-occurring (source+NULL, target) pairs
    t: dict[str, dict[str, float]] = {}
    for pair in pairs:
        for src in pair.source + [NULL_WORD]:
            row = t.setdefault(src, {})
            for tgt in pair.target:
                row[tgt] = 1.0
    for src, row in t.items():
        uniform = 1.0 / len(row)
        for tgt in row:
            row[tgt] = uniform

    likelihoods: list[float] = []
    for _ in range(iterations):
        counts: dict[str, dict[str, float]] = {}
        log_likelihood = 0.0
        for pair in pairs:
            sources = pair.source + [NULL_WORD]
            for tgt in pair.target:
                denom = sum(t[src][tgt] for src in sources)
                log_likelihood += math.log(denom) - math.log(len(sources))
                for src in sources:
                    counts.setdefault(src, {})[tgt] = (
                        counts.get(src, {}).get(tgt, 0.0) + t[src][tgt] / denom
                    )
        t = _normalize_rows(counts)
        likelihoods.append(log_likelihood)
        if len(likelihoods) >= 2 and likelihoods[-1] - likelihoods[-2] < epsilon:
            break
    return TTable(t), likelihoods


def train_ibm2(
    pairs: list[SentencePair],
    ibm1_init: TTable,
    iterations: int = 10,
    epsilon: float = 1e-6,
) -> tuple[TTable, DistortionTable, list[float]]:
    """Joint EM over lexical and absolute-position tables (IBM Model 2)."""
    if iterations < 1:
        raise AlignError(f"iterations must be >= 1, got {iterations}")
    if not pairs:
        raise AlignError("empty training corpus")
    for pair in pairs:
        for src in pair.source + [NULL_WORD]:
            if src not in ibm1_init.table:
                raise AlignError(f"model-1 table does not cover source word {src!r}")

    t = {src: dict(row) for src, row in ibm1_init.table.items()}
    a: dict[tuple[int, int, int], dict[int, float]] = {}
    for pair in pairs:
        l_f, l_e = len(pair.target), len(pair.source)
        for j in range(l_f):
            a.setdefault((j, l_f, l_e), {i: 1.0 / (l_e + 1) for i in range(l_e + 1)})

    likelihoods: list[float] = []
    for _ in range(iterations):
        t_counts: dict[str, dict[str, float]] = {}
        a_counts: dict[tuple[int, int, int], dict[int, float]] = {}
        log_likelihood = 0.0
        for pair in pairs:
            sources = [NULL_WORD] + pair.source
            l_f, l_e = len(pair.target), len(pair.source)
            for j, tgt in enumerate(pair.target):
                row = a[(j, l_f, l_e)]
                weights = [t[sources[i]].get(tgt, PROB_FLOOR) * row[i] for i in range(l_e + 1)]
                denom = sum(weights)
                log_likelihood += math.log(denom)
                for i in range(l_e + 1):
                    share = weights[i] / denom
                    t_counts.setdefault(sources[i], {})[tgt] = (
                        t_counts.get(sources[i], {}).get(tgt, 0.0) + share
                    )
                    a_counts.setdefault((j, l_f, l_e), {})[i] = (
                        a_counts.get((j, l_f, l_e), {}).get(i, 0.0) + share
                    )
        t = _normalize_rows(t_counts)
        a = {}
        for key, row in a_counts.items():
            total = sum(row.values())
            a[key] = {i: c / total for i, c in row.items()}
        likelihoods.append(log_likelihood)
        if len(likelihoods) >= 2 and likelihoods[-1] - likelihoods[-2] < epsilon:
            break
    return TTable(t), DistortionTable(a), likelihoods


def viterbi_align(
    ttable: TTable,
    pair: SentencePair,
    distortion: DistortionTable | None = None,
) -> set[tuple[int, int]]:
    """Best single source link per target word; NULL alignments drop the link.

    Ties go to the smallest source position (NULL, at position 0, wins ties).
    """
    links: set[tuple[int, int]] = set()
    sources = [NULL_WORD] + pair.source
    l_f, l_e = len(pair.target), len(pair.source)
    for j, tgt in enumerate(pair.target):
        best_i = 0
        best_score = -1.0
        for i, src in enumerate(sources):
            score = ttable.prob(tgt, src)
            if distortion is not None:
                score *= distortion.prob(i, j, l_f, l_e)
            if score > best_score:
                best_score = score
                best_i = i
        if best_i > 0 and best_score > 0.0:
            links.add((best_i - 1, j))
    return links


# diagonal neighbors take priority over orthogonal ones so that a diagonal
# continuation claims both endpoints before a same-row/column link can
_NEIGHBORS = ((-1, -1), (-1, 1), (1, -1), (1, 1), (-1, 0), (0, -1), (1, 0), (0, 1))


def grow_diag_final_and(
    forward: set[tuple[int, int]], backward: set[tuple[int, int]]
) -> set[tuple[int, int]]:
    union = forward | backward
    alignment = set(forward & backward)
    src_aligned = {i for i, _ in alignment}
    tgt_aligned = {j for _, j in alignment}

    # GROW-DIAG: union links neighboring an existing link, while an endpoint
    # is still uncovered
    added = True
    while added:
        added = False
        for i, j in sorted(alignment):
            for di, dj in _NEIGHBORS:
                cand = (i + di, j + dj)
                if cand not in union or cand in alignment:
                    continue
                if cand[0] not in src_aligned or cand[1] not in tgt_aligned:
                    alignment.add(cand)
                    src_aligned.add(cand[0])
                    tgt_aligned.add(cand[1])
                    added = True

    # FINAL-AND: union links whose endpoints are both still uncovered
    for cand in sorted(union - alignment):
        if cand[0] not in src_aligned and cand[1] not in tgt_aligned:
            alignment.add(cand)
            src_aligned.add(cand[0])
            tgt_aligned.add(cand[1])
    return alignment


def symmetrize(
    forward: set[tuple[int, int]],
    backward: set[tuple[int, int]],
    heuristic: str = "grow-diag-final-and",
) -> set[tuple[int, int]]:
    if heuristic == "intersection":
        return set(forward & backward)
    if heuristic == "union":
        return set(forward | backward)
    if heuristic == "grow-diag-final-and":
        return grow_diag_final_and(forward, backward)
    raise AlignError(f"unknown symmetrization heuristic: {heuristic!r}")


def format_links(links: set[tuple[int, int]]) -> str:
    """Pharaoh format: space-separated i-j pairs, source-target, 0-based."""
    return " ".join(f"{i}-{j}" for i, j in sorted(links))


def write_ttable(ttable: TTable) -> str:
    lines = []
    for src in sorted(ttable.table):
        for tgt in sorted(ttable.table[src]):
            lines.append(f"{src}\t{tgt}\t{ttable.table[src][tgt]!r}")
    return "\n".join(lines) + "\n"


def read_ttable(text: str) -> TTable:
    table: dict[str, dict[str, float]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise AlignError(f"line {lineno}: expected src<TAB>tgt<TAB>prob")
        table.setdefault(cols[0], {})[cols[1]] = float(cols[2])
    return TTable(table)


def parse_links(text: str) -> set[tuple[int, int]]:
    links = set()
    for part in text.split():
        i, _, j = part.partition("-")
        links.add((int(i), int(j)))
    return links
