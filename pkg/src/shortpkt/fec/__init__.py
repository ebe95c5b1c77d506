"""Channel coding: punctured K=7 convolutional code, RS(31, k), and their cascade."""
from .chain import CC_RATES, RS_KS, CodecChain, chain_decode, chain_encode
from .convolutional import cc_encode, viterbi_decode
from .reed_solomon import rs_decode, rs_encode

__all__ = [
    "CC_RATES",
    "RS_KS",
    "CodecChain",
    "cc_encode",
    "chain_decode",
    "chain_encode",
    "rs_decode",
    "rs_encode",
    "viterbi_decode",
]
