"""Desk-scale statistical machine translation toolkit.

Covers the classic pipeline: corpus preparation, n-gram language modeling,
IBM word alignment, phrase / hierarchical / dependency tree-to-string
translation model estimation, beam-search decoding, MERT tuning and
automatic evaluation. Every probabilistic component is small enough to be
checked against brute-force oracles.
"""

__version__ = "0.1.0"
