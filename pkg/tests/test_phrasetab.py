import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import consistent_span_pairs
from smtkit.align import TTable
from smtkit.corpus import SentencePair, Token, parse_factored_line, project_factors
from smtkit.phrasetab import (
    PhraseError,
    build_generation_table,
    build_phrase_table,
    extract_phrases,
    extract_reordering,
    format_phrase_entry,
    parse_phrase_entry,
    read_phrase_table,
    read_reordering_table,
    write_phrase_table,
    write_reordering_table,
)


def make_pair(n_src, n_tgt):
    return SentencePair([f"s{i}" for i in range(n_src)], [f"t{j}" for j in range(n_tgt)])


class TestExtractPhrases:
    def test_monotone_identity(self):
        pair = make_pair(2, 2)
        spans = extract_phrases(pair, {(0, 0), (1, 1)})
        assert spans == [((0, 0), (0, 0)), ((0, 1), (0, 1)), ((1, 1), (1, 1))]

    def test_paper_reordering_matches_oracle(self):
        pair = make_pair(4, 4)
        links = {(0, 0), (1, 1), (2, 3), (3, 2)}
        assert extract_phrases(pair, links, 7) == consistent_span_pairs(4, 4, links, 7)

    def test_empty_links_empty_result(self):
        assert extract_phrases(make_pair(3, 3), set()) == []

    def test_max_len_enforced_both_sides(self):
        pair = make_pair(3, 3)
        links = {(0, 0), (1, 1), (2, 2)}
        spans = extract_phrases(pair, links, max_phrase_len=2)
        assert ((0, 2), (0, 2)) not in spans
        assert all(i2 - i1 < 2 and j2 - j1 < 2 for (i1, i2), (j1, j2) in spans)

    def test_bad_max_len(self):
        with pytest.raises(PhraseError):
            extract_phrases(make_pair(1, 1), {(0, 0)}, 0)

    @settings(max_examples=300, deadline=None)
    @given(st.data())
    def test_equals_exhaustive_oracle(self, data):
        n_src = data.draw(st.integers(1, 5))
        n_tgt = data.draw(st.integers(1, 5))
        links = data.draw(
            st.sets(
                st.tuples(st.integers(0, n_src - 1), st.integers(0, n_tgt - 1)),
                max_size=n_src * n_tgt,
            )
        )
        max_len = data.draw(st.integers(1, 5))
        pair = make_pair(n_src, n_tgt)
        assert extract_phrases(pair, links, max_len) == consistent_span_pairs(
            n_src, n_tgt, links, max_len
        )


def uniform_ttables(pairs):
    fwd = {}
    bwd = {}
    for pair in pairs:
        for s in pair.source + ["<null>"]:
            for t in pair.target:
                fwd.setdefault(s, {})[t] = 1.0
                bwd.setdefault(t, {})[s] = 1.0
    return TTable(fwd), TTable(bwd)


class TestPhraseTable:
    def test_single_occurrence_single_link_all_ones(self):
        pairs = [SentencePair(["a"], ["x"])]
        fwd = TTable({"a": {"x": 1.0}})
        bwd = TTable({"x": {"a": 1.0}})
        entries = build_phrase_table(pairs, [{(0, 0)}], fwd, bwd)
        assert len(entries) == 1
        assert entries[0].scores == (1.0, 1.0, 1.0, 1.0)

    def test_competing_targets_relative_frequency(self):
        pairs = [SentencePair(["a"], ["x"])] * 3 + [SentencePair(["a"], ["y"])]
        fwd, bwd = uniform_ttables(pairs)
        entries = build_phrase_table(pairs, [{(0, 0)}] * 4, fwd, bwd)
        by_tgt = {e.tgt: e for e in entries}
        assert by_tgt[("x",)].scores[2] == pytest.approx(0.75)
        assert by_tgt[("y",)].scores[2] == pytest.approx(0.25)
        assert by_tgt[("x",)].counts == (3.0, 4.0, 3.0)

    def test_phi_t_given_s_normalizes_per_source(self):
        rng = random.Random(5)
        pairs = []
        links = []
        for _ in range(40):
            n = rng.randint(1, 4)
            pair = SentencePair(
                [rng.choice("abc") for _ in range(n)],
                [rng.choice("xyz") for _ in range(n)],
            )
            pairs.append(pair)
            links.append({(i, i) for i in range(n)})
        fwd, bwd = uniform_ttables(pairs)
        entries = build_phrase_table(pairs, links, fwd, bwd)
        totals = {}
        for e in entries:
            totals[e.src] = totals.get(e.src, 0.0) + e.scores[2]
        for total in totals.values():
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_stored_alignment_consistent_with_span(self):
        pairs = [SentencePair(["a", "b"], ["x", "y"])]
        fwd, bwd = uniform_ttables(pairs)
        entries = build_phrase_table(pairs, [{(0, 0), (1, 1)}], fwd, bwd)
        for e in entries:
            for i, j in e.alignment:
                assert 0 <= i < len(e.src) and 0 <= j < len(e.tgt)

    def test_entries_sorted(self):
        pairs = [SentencePair(["b"], ["y"]), SentencePair(["a"], ["x"])]
        fwd, bwd = uniform_ttables(pairs)
        entries = build_phrase_table(pairs, [{(0, 0)}, {(0, 0)}], fwd, bwd)
        assert [(e.src, e.tgt) for e in entries] == sorted((e.src, e.tgt) for e in entries)

    def test_lexical_weight_unaligned_word_uses_null(self):
        pairs = [SentencePair(["a"], ["x", "pad"])]
        fwd = TTable({"a": {"x": 0.8, "pad": 0.1}, "<null>": {"x": 0.1, "pad": 0.5}})
        bwd = TTable({"x": {"a": 1.0}, "pad": {"a": 1.0}})
        entries = build_phrase_table(pairs, [{(0, 0)}], fwd, bwd)
        two_word = next(e for e in entries if e.tgt == ("x", "pad"))
        # lex(t|s): x aligned to a (0.8), pad unaligned -> NULL (0.5)
        assert two_word.scores[3] == pytest.approx(0.8 * 0.5)


class TestPhraseTableFormat:
    def test_figure_shaped_row_round_trips_bit_identically(self):
        line = "$ ||| $ ||| 1 1 0.5 0.428571 ||| 0-0 ||| 2 4 2"
        assert format_phrase_entry(parse_phrase_entry(line)) == line

    def test_scientific_notation_round_trips(self):
        line = "a b ||| x ||| 0.333333 4.35515e-09 0.333333 0.0483928 ||| 0-0 1-0 ||| 3 3 1"
        assert format_phrase_entry(parse_phrase_entry(line)) == line

    def test_table_round_trip(self):
        pairs = [SentencePair(["a", "b"], ["x", "y"])]
        fwd, bwd = uniform_ttables(pairs)
        entries = build_phrase_table(pairs, [{(0, 0), (1, 1)}], fwd, bwd)
        text = write_phrase_table(entries)
        assert read_phrase_table(text) == entries

    def test_malformed_line_rejected(self):
        with pytest.raises(PhraseError):
            parse_phrase_entry("too ||| few ||| fields")


class TestReordering:
    def test_monotone_corpus_prefers_monotone(self):
        pairs = []
        links = []
        for _ in range(10):
            pairs.append(make_pair(3, 3))
            links.append({(i, i) for i in range(3)})
        entries = extract_reordering(pairs, links, "msd")
        for e in entries:
            assert e.forward["monotone"] > e.forward["swap"]
            assert e.backward["monotone"] > e.backward["swap"]
            assert all(p > 0 for p in e.forward.values())

    def test_swap_event_recorded(self):
        # "the red ball" style crossing: second phrase swaps with the first
        pair = SentencePair(["red", "ball"], ["gend", "lal"])
        links = {(0, 1), (1, 0)}
        entries = extract_reordering([pair], [links], "msd", smoothing_sigma=0.0)
        red = next(e for e in entries if e.src == ("red",))
        assert red.forward["swap"] == 1.0

    def test_smoothing_formula_exact(self):
        pair = make_pair(2, 2)
        links = {(0, 0), (1, 1)}
        entries = extract_reordering([pair], [links], "msd", smoothing_sigma=0.5)
        # single monotone event: unseen orientation = sigma / (total + sigma*k)
        unseen = 0.5 / (1.0 + 0.5 * 3)
        for e in entries:
            assert e.forward["swap"] == pytest.approx(unseen)
            assert sum(e.forward.values()) == pytest.approx(1.0, abs=1e-9)
            assert sum(e.backward.values()) == pytest.approx(1.0, abs=1e-9)

    def test_mslr_has_four_orientations(self):
        pair = make_pair(2, 2)
        entries = extract_reordering([pair], [{(0, 0), (1, 1)}], "mslr")
        assert set(entries[0].forward) == {"monotone", "swap", "disc-left", "disc-right"}

    def test_round_trip(self):
        pair = make_pair(2, 2)
        for orientation in ("msd", "mslr"):
            entries = extract_reordering([pair], [{(0, 0), (1, 1)}], orientation)
            text = write_reordering_table(entries)
            again = read_reordering_table(text)
            assert len(again) == len(entries)
            for e1, e2 in zip(entries, again):
                assert e1.src == e2.src and e1.tgt == e2.tgt
                for o in e1.forward:
                    assert e2.forward[o] == pytest.approx(e1.forward[o])

    def test_unknown_orientation_set(self):
        with pytest.raises(PhraseError):
            extract_reordering([], [], "msdr")


class TestGenerationTable:
    def test_deterministic_tag(self):
        corpus = [[Token("अच्छा", ("अच्छा", "JJ"))]] * 4
        table = build_generation_table(corpus)
        assert table.prob("JJ", "अच्छा") == 1.0

    def test_split_counts(self):
        corpus = [[Token("w", ("w", "NN"))]] * 3 + [[Token("w", ("w", "JJ"))]]
        table = build_generation_table(corpus)
        assert table.prob("NN", "w") == pytest.approx(0.75)
        assert table.prob("JJ", "w") == pytest.approx(0.25)

    def test_rows_sum_to_one(self):
        rng = random.Random(2)
        corpus = [
            [Token(w, (w, rng.choice(["A", "B", "C"]))) for w in ("u", "v")]
            for _ in range(30)
        ]
        table = build_generation_table(corpus)
        for row in table.table.values():
            assert sum(row.values()) == pytest.approx(1.0, abs=1e-9)

    def test_empty_corpus(self):
        assert build_generation_table([]).table == {}

    def test_missing_factor_reported(self):
        with pytest.raises(PhraseError, match="position 0"):
            build_generation_table([[Token("bare")]])

    def test_rescoring_nbest_with_generation_probabilities(self):
        # generation probabilities re-rank factored candidates: a common
        # (word, tag) pairing beats a rare one at equal translation score
        corpus = [[Token("accha", ("accha", "JJ"))]] * 9 + [[Token("accha", ("accha", "NN"))]]
        table = build_generation_table(corpus)
        candidates = [("accha|NN", -1.0), ("accha|JJ", -1.0)]  # (tokens, base score)
        import math

        def rescored(cand):
            surface, tag = cand[0].split("|")
            return cand[1] + math.log10(max(table.prob(tag, surface), 1e-30))

        ranked = sorted(candidates, key=rescored, reverse=True)
        assert ranked[0][0] == "accha|JJ"


class TestFactoredPhraseTable:
    def test_factored_tokens_flow_through_extraction(self):
        # factored corpora use composite word|POS tokens end to end
        pairs = [SentencePair(["come", "here"], ["आवज|N_NN", "इहाँ|PR_PRP"])]
        links = {(0, 0), (1, 1)}
        fwd, bwd = uniform_ttables(pairs)
        entries = build_phrase_table(pairs, [links], fwd, bwd)
        targets = {e.tgt for e in entries}
        assert ("आवज|N_NN",) in targets
        line = format_phrase_entry(next(e for e in entries if e.tgt == ("आवज|N_NN",)))
        assert parse_phrase_entry(line).tgt == ("आवज|N_NN",)
        # surfaces recoverable by factor projection
        toks = parse_factored_line("आवज|N_NN इहाँ|PR_PRP")
        assert project_factors(toks, {0}) == ["आवज", "इहाँ"]
