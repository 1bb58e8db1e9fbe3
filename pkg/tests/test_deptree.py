import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import A_STONE_NESTED
from oracles import projective_by_yields
from smtkit.deptree import (
    ConlluError,
    DepSentence,
    DepToken,
    PD_INVENTORY,
    UD_LABELS,
    crossing_arcs,
    is_projective,
    map_pd_to_ud,
    nested_to_sentence,
    parse_conllu,
    parse_nested_tree,
    parse_nested_tree_file,
    scheme_stats,
    to_nested_tree,
    write_conllu,
)


def chain_sentence(n, deprel="dep"):
    """Token i attaches to i+1; the last token is the root."""
    toks = [
        DepToken(i, f"w{i}", head=(i + 1 if i < n else 0), deprel=(deprel if i < n else "root"), xpos="X")
        for i in range(1, n + 1)
    ]
    return DepSentence(sent_id="chain", tokens=toks)


class TestParseConllu:
    def test_fig_3_8(self, fig_3_8):
        assert len(fig_3_8.tokens) == 6
        root = fig_3_8.root()
        assert root.form == "came" and root.deprel == "root"
        anita = fig_3_8.tokens[0]
        assert anita.form == "Anita" and anita.head == 4 and anita.deprel == "nsubj"

    def test_single_token(self):
        sents = parse_conllu("1\tx\tx\tX\tX\t_\t0\troot\t_\t_\n")
        assert len(sents) == 1 and sents[0].tokens[0].id == 1

    def test_self_loop_is_cycle_error(self):
        with pytest.raises(ConlluError, match="cycle"):
            parse_conllu("1\tx\t_\t_\t_\t_\t1\tdep\t_\t_\n")

    def test_longer_cycle_detected(self):
        block = "1\ta\t_\t_\t_\t_\t2\tdep\t_\t_\n2\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n3\tc\t_\t_\t_\t_\t0\troot\t_\t_\n"
        with pytest.raises(ConlluError, match="cycle"):
            parse_conllu(block)

    def test_multiple_roots_rejected(self):
        block = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t0\troot\t_\t_\n"
        with pytest.raises(ConlluError, match="root"):
            parse_conllu(block)

    def test_dangling_head_rejected(self):
        with pytest.raises(ConlluError, match="dangling"):
            parse_conllu("1\tx\t_\t_\t_\t_\t9\tdep\t_\t_\n")

    def test_column_count_error_has_location(self):
        with pytest.raises(ConlluError, match="line 1"):
            parse_conllu("1\tx\tmissing\n")

    def test_multiword_ranges_kept_out_of_tree(self):
        block = (
            "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
            "1\tdo\t_\t_\t_\t_\t0\troot\t_\t_\n"
            "2\tnot\t_\t_\t_\t_\t1\tadvmod\t_\t_\n"
        )
        sent = parse_conllu(block)[0]
        assert len(sent.tokens) == 2
        assert sent.extra_rows == [(0, block.splitlines()[0])]

    def test_round_trip_token_fields(self, fig_3_8):
        text = write_conllu([fig_3_8])
        again = parse_conllu(text)[0]
        assert again.tokens == fig_3_8.tokens
        assert write_conllu([again]) == text


class TestProjectivity:
    def test_chain_projective(self):
        assert is_projective(chain_sentence(3))

    def test_fig_3_8_projective(self, fig_3_8):
        assert is_projective(fig_3_8)

    def test_crossing_arcs_detected(self):
        toks = [
            DepToken(1, "a", head=3, deprel="dep"),
            DepToken(2, "b", head=4, deprel="dep"),
            DepToken(3, "c", head=0, deprel="root"),
            DepToken(4, "d", head=3, deprel="dep"),
        ]
        sent = DepSentence(tokens=toks)
        assert not is_projective(sent)
        assert crossing_arcs(sent)

    @given(st.integers(min_value=2, max_value=7), st.data())
    def test_agrees_with_yield_contiguity_oracle(self, n, data):
        heads = {}
        root = data.draw(st.integers(min_value=1, max_value=n))
        for tok in range(1, n + 1):
            if tok == root:
                heads[tok] = 0
            else:
                heads[tok] = data.draw(
                    st.integers(min_value=1, max_value=n).filter(lambda h, t=tok: h != t)
                )
        # keep only valid trees (no cycles)
        def reaches_root(tok):
            seen = set()
            while tok != 0:
                if tok in seen:
                    return False
                seen.add(tok)
                tok = heads[tok]
            return True

        if not all(reaches_root(t) for t in heads):
            return
        toks = [
            DepToken(i, f"w{i}", head=heads[i], deprel="root" if heads[i] == 0 else "dep")
            for i in range(1, n + 1)
        ]
        sent = DepSentence(tokens=toks)
        assert is_projective(sent) == projective_by_yields(heads)


class TestNestedTree:
    def test_single_token(self):
        sent = parse_conllu("1\tx\tx\tX\tX\t_\t0\troot\t_\t_\n")[0]
        assert (
            to_nested_tree(sent)
            == '<tree label="sent"><tree label="root"><tree label="X">x</tree></tree></tree>'
        )

    def test_a_stone_fig_4_8_pattern(self, a_stone_sentence):
        rendered = to_nested_tree(a_stone_sentence)
        assert rendered == A_STONE_NESTED
        assert (
            '<tree label="nsubj"><tree label="det"><tree label="DT">A</tree></tree>'
            '<tree label="NN">stone</tree></tree>' in rendered
        )

    def test_round_trip_label_sequence(self, a_stone_sentence):
        rendered = to_nested_tree(a_stone_sentence)
        tree = parse_nested_tree(rendered)
        labels = tree.labels()
        assert labels[0] == "sent" and labels[1] == "root"
        assert tree.leaf_words() == [t.form for t in a_stone_sentence.tokens]
        # serializing the parse of our own output is stable
        assert parse_nested_tree(rendered).labels() == labels

    def test_leaf_per_token_in_surface_order(self, fig_3_8):
        tree = parse_nested_tree(to_nested_tree(fig_3_8))
        assert tree.leaf_words() == [t.form for t in fig_3_8.tokens]

    def test_non_projective_rejected_naming_arcs(self):
        toks = [
            DepToken(1, "a", head=3, deprel="dep"),
            DepToken(2, "b", head=4, deprel="dep"),
            DepToken(3, "c", head=0, deprel="root"),
            DepToken(4, "d", head=3, deprel="dep"),
        ]
        with pytest.raises(ConlluError, match="crosses"):
            to_nested_tree(DepSentence(tokens=toks))

    def test_xml_escaping(self):
        sent = parse_conllu('1\t<&">\tx\tX\tP&P\t_\t0\troot\t_\t_\n')[0]
        rendered = to_nested_tree(sent)
        assert "&lt;&amp;&quot;&gt;" in rendered
        assert 'label="P&amp;P"' in rendered
        assert parse_nested_tree(rendered).leaf_words() == ['<&">']

    def test_nested_to_sentence_round_trip(self, a_stone_sentence):
        rendered = to_nested_tree(a_stone_sentence)
        rebuilt = nested_to_sentence(parse_nested_tree(rendered))
        assert [t.form for t in rebuilt.tokens] == [t.form for t in a_stone_sentence.tokens]
        assert [t.head for t in rebuilt.tokens] == [t.head for t in a_stone_sentence.tokens]
        assert [t.deprel for t in rebuilt.tokens] == [t.deprel for t in a_stone_sentence.tokens]
        assert to_nested_tree(rebuilt) == rendered

    def test_nested_tree_file_reader(self, fig_3_8, a_stone_sentence):
        text = to_nested_tree(fig_3_8) + "\n" + to_nested_tree(a_stone_sentence) + "\n"
        sentences = parse_nested_tree_file(text)
        assert len(sentences) == 2
        assert sentences[1].root().form == "said"


class TestPdUdMapping:
    def test_k2(self):
        assert map_pd_to_ud("k2") == {"ccomp", "dobj", "xcomp"}

    def test_nmod_sources(self):
        for label in ("k3", "k7p", "k7t", "r6"):
            assert map_pd_to_ud(label) == {"nmod"}

    def test_nsubj_sources(self):
        for label in ("k1", "k4a", "pk1"):
            assert "nsubj" in map_pd_to_ud(label)

    def test_unmapped_label_empty(self):
        assert map_pd_to_ud("rsym") == frozenset()

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            map_pd_to_ud("not-a-label")

    def test_inventory_sizes(self):
        assert len(UD_LABELS) == 37
        for required in ("dummy-sub", "k*u", "ras-neg", "psp__cl", "nmod_emph"):
            assert required in PD_INVENTORY


class TestSchemeStats:
    def test_empty(self):
        table, warnings = scheme_stats([], "UD")
        assert table == {} and warnings == []

    def test_fig_3_8_counts(self, fig_3_8):
        table, warnings = scheme_stats([fig_3_8], "UD")
        assert dict(table) == {
            "nsubj": 1, "cc": 1, "conj": 1, "root": 1, "obl:tmod": 1, "punct": 1,
        }
        assert warnings == []
        assert sum(table.values()) == len(fig_3_8.tokens)

    def test_additive_over_concatenation(self, fig_3_8, a_stone_sentence):
        t1, _ = scheme_stats([fig_3_8], "UD")
        t2, _ = scheme_stats([a_stone_sentence], "UD")
        both, _ = scheme_stats([fig_3_8, a_stone_sentence], "UD")
        assert both == t1 + t2

    def test_out_of_inventory_goes_to_other(self, fig_3_8):
        fig_3_8.tokens[0].deprel = "made-up"
        table, warnings = scheme_stats([fig_3_8], "UD")
        assert table["OTHER"] == 1 and warnings == ["made-up"]
