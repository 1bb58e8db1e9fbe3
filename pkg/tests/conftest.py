import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from smtkit.corpus import SentencePair
from smtkit.deptree import parse_conllu

FIG_3_8_CONLLU = """\
# sent_id = 135
# text = Anita and Ravi came yesterday
1\tAnita\tAnita\tNOUN\tNN\tNumber=Sing\t4\tnsubj\t_\t_
2\tand\tand\tCCONJ\tCC\t_\t3\tcc\t_\t_
3\tRavi\tRavi\tPROPN\tNNP\tNumber=Sing\t1\tconj\t_\t_
4\tcame\tcome\tVERB\tVBD\tMood=Ind|Tense=Past|VerbForm=Fin\t0\troot\t_\t_
5\tyesterday\tyesterday\tNOUN\tNN\tNumber=Sing\t4\tobl:tmod\t_\tSpaceAfter=No
6\t.\t.\tPUNCT\t.\t_\t4\tpunct\t_\tSpaceAfter=No
"""

A_STONE_CONLLU = """\
# sent_id = stone-1
# text = A stone , said the young one .
1\tA\ta\tDET\tDT\t_\t2\tdet\t_\t_
2\tstone\tstone\tNOUN\tNN\t_\t4\tnsubj\t_\t_
3\t,\t,\tPUNCT\t,\t_\t4\tpunct\t_\t_
4\tsaid\tsay\tVERB\tVBD\t_\t0\troot\t_\t_
5\tthe\tthe\tDET\tDT\t_\t7\tdet\t_\t_
6\tyoung\tyoung\tADJ\tJJ\t_\t7\tamod\t_\t_
7\tone\tone\tNOUN\tNN\t_\t4\tobj\t_\t_
8\t.\t.\tPUNCT\t.\t_\t4\tpunct\t_\t_
"""

A_STONE_NESTED = (
    '<tree label="sent"><tree label="root">'
    '<tree label="nsubj"><tree label="det"><tree label="DT">A</tree></tree>'
    '<tree label="NN">stone</tree></tree>'
    '<tree label="punct"><tree label=",">,</tree></tree>'
    '<tree label="VBD">said</tree>'
    '<tree label="obj"><tree label="det"><tree label="DT">the</tree></tree>'
    '<tree label="amod"><tree label="JJ">young</tree></tree>'
    '<tree label="NN">one</tree></tree>'
    '<tree label="punct"><tree label=".">.</tree></tree>'
    "</tree></tree>"
)


@pytest.fixture
def fig_3_8():
    return parse_conllu(FIG_3_8_CONLLU)[0]


@pytest.fixture
def a_stone_sentence():
    return parse_conllu(A_STONE_CONLLU)[0]


@pytest.fixture
def toy_pairs():
    """The classic two-pair corpus whose EM fixed point is fully understood."""
    return [
        SentencePair(["the", "house"], ["das", "haus"]),
        SentencePair(["the"], ["das"]),
    ]
