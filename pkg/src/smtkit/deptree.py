"""CoNLL-U dependency trees: parsing, projectivity, nested-tree conversion.

Supports the two source-side annotation schemes used by the toolkit: the
karaka-based PD labels and the 37 UD relations, with the documented partial
mapping between them.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field


class ConlluError(ValueError):
    """Raised for structurally invalid CoNLL-U input."""


PD_LABELS = frozenset(
    {
        "k1", "k1s", "pk1", "jk1", "mk1",
        "k2", "k2p", "k2g", "k2s",
        "k3", "k4", "k4a", "k5", "k5prk",
        "k7t", "k7p", "k7", "k7a", "k*u",
        "r6", "r6-k1", "r6-k2", "r6v",
        "adv", "sent-adv", "rd", "rh", "rt",
        "ras-k*", "ras-neg", "rs", "rsp", "rad",
        "nmod__relc", "jjmod__relc", "rbmod__relc",
        "nmod", "nmod_emph", "vmod", "jjmod",
        "pof", "pof-phrv", "ccof", "fragof", "enm",
        "rsym", "psp__cl", "dummy-sub",
    }
)

UD_LABELS = frozenset(
    {
        "nsubj", "obj", "iobj", "csubj", "ccomp", "xcomp",
        "obl", "vocative", "expl", "dislocated", "advcl", "advmod",
        "discourse", "aux", "cop", "mark",
        "nmod", "appos", "nummod", "acl", "amod", "det",
        "clf", "case", "conj", "cc",
        "fixed", "flat", "compound", "list", "parataxis",
        "orphan", "goeswith", "reparandum", "punct", "root", "dep",
    }
)

# Partial PD -> UD correspondences. Labels without a documented mapping
# return the empty set.
_PD_TO_UD: dict[str, frozenset[str]] = {
    "k2": frozenset({"ccomp", "dobj", "xcomp"}),
    "k3": frozenset({"nmod"}),
    "k7p": frozenset({"nmod"}),
    "k7t": frozenset({"nmod"}),
    "r6": frozenset({"nmod"}),
    "k1": frozenset({"nsubj"}),
    "k4a": frozenset({"nsubj"}),
    "pk1": frozenset({"nsubj"}),
}


@dataclass(frozen=True)
class LabelInventory:
    scheme: str
    labels: frozenset[str]

    def __contains__(self, label: str) -> bool:
        # Subtyped labels like "obl:tmod" are valid when their bare prefix is.
        return label in self.labels or label.split(":", 1)[0] in self.labels


PD_INVENTORY = LabelInventory("PD", PD_LABELS)
UD_INVENTORY = LabelInventory("UD", UD_LABELS)


def inventory(scheme: str) -> LabelInventory:
    if scheme.upper() == "PD":
        return PD_INVENTORY
    if scheme.upper() == "UD":
        return UD_INVENTORY
    raise ValueError(f"unknown annotation scheme: {scheme!r}")


@dataclass
class DepToken:
    id: int
    form: str
    lemma: str = "_"
    upos: str = "_"
    xpos: str = "_"
    feats: str = "_"
    head: int = 0
    deprel: str = "_"
    deps: str = "_"
    misc: str = "_"

    def feat_list(self) -> list[str]:
        return [] if self.feats == "_" else self.feats.split("|")

    def to_conllu(self) -> str:
        return "\t".join(
            [
                str(self.id), self.form, self.lemma, self.upos, self.xpos,
                self.feats, str(self.head), self.deprel, self.deps, self.misc,
            ]
        )


@dataclass
class DepSentence:
    sent_id: str = ""
    text: str = ""
    tokens: list[DepToken] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)
    # Multiword-token ranges and empty nodes, preserved verbatim as
    # (index of the token line they precede, raw line).
    extra_rows: list[tuple[int, str]] = field(default_factory=list)

    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    def root(self) -> DepToken:
        return next(t for t in self.tokens if t.head == 0)

    def children(self, head_id: int) -> list[DepToken]:
        return [t for t in self.tokens if t.head == head_id]


def _validate_tree(sent: DepSentence, line_of: dict[int, int]) -> None:
    ident = sent.sent_id or "<unknown>"
    n = len(sent.tokens)
    for tok in sent.tokens:
        line = line_of.get(tok.id, 0)
        if tok.head == tok.id:
            raise ConlluError(f"sentence {ident}, line {line}: token {tok.id} heads itself (cycle)")
        if tok.head < 0 or tok.head > n:
            raise ConlluError(
                f"sentence {ident}, line {line}: head {tok.head} of token {tok.id} is dangling"
            )
    roots = [t for t in sent.tokens if t.head == 0]
    if len(roots) != 1:
        raise ConlluError(f"sentence {ident}: expected exactly 1 root, found {len(roots)}")
    # every token must reach the root without revisiting a node
    heads = {t.id: t.head for t in sent.tokens}
    for tok in sent.tokens:
        seen = set()
        cur = tok.id
        while cur != 0:
            if cur in seen:
                raise ConlluError(
                    f"sentence {ident}, line {line_of.get(tok.id, 0)}: "
                    f"cycle involving token {tok.id}"
                )
            seen.add(cur)
            cur = heads[cur]


def parse_conllu(text: str) -> list[DepSentence]:
    """Parse CoNLL-U text into validated dependency sentences."""
    sentences: list[DepSentence] = []
    current = DepSentence()
    line_of: dict[int, int] = {}

    def flush(lineno: int):
        nonlocal current, line_of
        if current.tokens:
            _validate_tree(current, line_of)
            sentences.append(current)
        elif current.comments:
            raise ConlluError(f"line {lineno}: comment block without token lines")
        current = DepSentence()
        line_of = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip():
            flush(lineno)
            continue
        if line.startswith("#"):
            current.comments.append(line)
            body = line[1:].strip()
            if body.startswith("sent_id"):
                current.sent_id = body.split("=", 1)[1].strip() if "=" in body else ""
            elif body.startswith("text"):
                current.text = body.split("=", 1)[1].strip() if "=" in body else ""
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(
                f"sentence {current.sent_id or '<unknown>'}, line {lineno}: "
                f"expected 10 tab-separated columns, found {len(cols)}"
            )
        if "-" in cols[0] or "." in cols[0]:
            current.extra_rows.append((len(current.tokens), line))
            continue
        try:
            tok_id = int(cols[0])
            head = int(cols[6])
        except ValueError as exc:
            raise ConlluError(
                f"sentence {current.sent_id or '<unknown>'}, line {lineno}: "
                f"non-integer id or head"
            ) from exc
        if tok_id < 1:
            raise ConlluError(
                f"sentence {current.sent_id or '<unknown>'}, line {lineno}: id must be >= 1"
            )
        current.tokens.append(
            DepToken(tok_id, cols[1], cols[2], cols[3], cols[4], cols[5], head, cols[7], cols[8], cols[9])
        )
        line_of[tok_id] = lineno
    flush(len(text.splitlines()) + 1)
    return sentences


def write_conllu(sentences: list[DepSentence]) -> str:
    blocks: list[str] = []
    for sent in sentences:
        lines = list(sent.comments)
        extra = dict(sent.extra_rows)
        for i, tok in enumerate(sent.tokens):
            if i in extra:
                lines.append(extra[i])
            lines.append(tok.to_conllu())
        if len(sent.tokens) in extra:
            lines.append(extra[len(sent.tokens)])
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _arcs(sent: DepSentence) -> list[tuple[int, int]]:
    # The root arc is anchored at virtual position 0.
    return [(min(t.head, t.id), max(t.head, t.id)) for t in sent.tokens]


def crossing_arcs(sent: DepSentence) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """All pairs of crossing arcs; arcs sharing an endpoint never cross."""
    arcs = _arcs(sent)
    bad = []
    for a in range(len(arcs)):
        lo1, hi1 = arcs[a]
        for b in range(a + 1, len(arcs)):
            lo2, hi2 = arcs[b]
            if len({lo1, hi1, lo2, hi2}) < 4:
                continue
            inside = (lo1 < lo2 < hi1) + (lo1 < hi2 < hi1)
            if inside == 1:
                bad.append((arcs[a], arcs[b]))
    return bad


def is_projective(sent: DepSentence) -> bool:
    return not crossing_arcs(sent)


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
        .replace("'", "&apos;")
    )


def _render_subtree(sent: DepSentence, tok: DepToken) -> str:
    """Head word in surface position among its dependents, each wrapped."""
    items = sorted(sent.children(tok.id) + [tok], key=lambda t: t.id)
    parts = []
    for item in items:
        if item.id == tok.id:
            parts.append(f'<tree label="{_escape(tok.xpos)}">{_escape(tok.form)}</tree>')
        else:
            parts.append(f'<tree label="{_escape(item.deprel)}">{_render_subtree(sent, item)}</tree>')
    return "".join(parts)


def to_nested_tree(sent: DepSentence) -> str:
    """Serialize a projective sentence to the nested-tree decoder input."""
    bad = crossing_arcs(sent)
    if bad:
        (a, b) = bad[0]
        raise ConlluError(
            f"sentence {sent.sent_id or '<unknown>'} is non-projective: "
            f"arc {a[0]}-{a[1]} crosses arc {b[0]}-{b[1]}"
        )
    root = sent.root()
    return f'<tree label="sent"><tree label="root">{_render_subtree(sent, root)}</tree></tree>'


@dataclass
class BracketNode:
    """A node of the nested-tree text format: a label plus children or a word."""

    label: str
    children: list["BracketNode"] = field(default_factory=list)
    word: str | None = None

    def labels(self) -> list[str]:
        out = [self.label]
        for child in self.children:
            out.extend(child.labels())
        return out

    def leaf_words(self) -> list[str]:
        if self.word is not None:
            return [self.word]
        out = []
        for child in self.children:
            out.extend(child.leaf_words())
        return out


def _unescape(text: str) -> str:
    return (
        text.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", '"')
        .replace("&apos;", "'")
        .replace("&amp;", "&")
    )


def parse_nested_tree(line: str) -> BracketNode:
    """Parse one nested-tree line back into a labeled bracket tree."""
    pos = 0
    open_tag = '<tree label="'

    def parse_node() -> BracketNode:
        nonlocal pos
        if not line.startswith(open_tag, pos):
            raise ConlluError(f"expected <tree> at offset {pos}")
        pos += len(open_tag)
        end = line.index('">', pos)
        label = _unescape(line[pos:end])
        pos = end + 2
        node = BracketNode(label)
        text_buf = []
        while not line.startswith("</tree>", pos):
            if line.startswith(open_tag, pos):
                node.children.append(parse_node())
            else:
                nxt = line.index("<", pos)
                text_buf.append(line[pos:nxt])
                pos = nxt
        pos += len("</tree>")
        text = "".join(text_buf)
        if text:
            node.word = _unescape(text)
        return node

    node = parse_node()
    if pos != len(line.strip()):
        raise ConlluError(f"trailing data after tree at offset {pos}")
    return node


def nested_to_sentence(tree: BracketNode, sent_id: str = "") -> DepSentence:
    """Rebuild a dependency sentence from one nested-tree line.

    Wrapper labels become deprels, leaf labels XPOS; ids follow leaf order.
    """
    if tree.label != "sent" or len(tree.children) != 1 or tree.children[0].label != "root":
        raise ConlluError("nested tree must be <tree label=\"sent\"><tree label=\"root\">...")
    tokens: list[DepToken] = []

    def walk(node: BracketNode, deprel: str) -> int:
        head_id = None
        sub_heads: list[int] = []
        for child in node.children:
            if child.word is not None:
                if head_id is not None:
                    raise ConlluError(f"two head words under one {node.label!r} node")
                tok = DepToken(
                    id=len(tokens) + 1, form=child.word, xpos=child.label, deprel=deprel
                )
                tokens.append(tok)
                head_id = tok.id
            else:
                sub_heads.append(walk(child, child.label))
        if head_id is None:
            raise ConlluError(f"node {node.label!r} has no head word")
        for sub in sub_heads:
            tokens[sub - 1].head = head_id
        return head_id

    root_id = walk(tree.children[0], "root")
    tokens[root_id - 1].head = 0
    sent = DepSentence(sent_id=sent_id, text=" ".join(t.form for t in tokens), tokens=tokens)
    _validate_tree(sent, {})
    return sent


def parse_nested_tree_file(text: str) -> list[DepSentence]:
    """One nested tree per line, converted back to dependency sentences."""
    sentences = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        sentences.append(nested_to_sentence(parse_nested_tree(line.strip()), str(lineno)))
    return sentences


def map_pd_to_ud(pd_label: str) -> frozenset[str]:
    """Documented UD candidates for a PD label; empty when unmapped."""
    if pd_label not in PD_INVENTORY:
        raise ValueError(f"unknown PD label: {pd_label!r}")
    return _PD_TO_UD.get(pd_label, frozenset())


def scheme_stats(
    sentences: list[DepSentence], scheme: str
) -> tuple[Counter[str], list[str]]:
    """Count deprel labels; out-of-inventory labels go under OTHER.

    Returns the frequency table and the list of unknown labels encountered.
    """
    inv = inventory(scheme)
    table: Counter[str] = Counter()
    warnings: list[str] = []
    for sent in sentences:
        for tok in sent.tokens:
            if tok.deprel in inv:
                table[tok.deprel] += 1
            else:
                warnings.append(tok.deprel)
                table["OTHER"] += 1
    return table, warnings
