"""Temperley-Lieb calculus, Jones-Wenzl projections and Gram/commutator models for free orthogonal quantum groups."""

from .qnumerics import RecCoeffParams, ScalarContext, alpha_of_q, coeff_ABCD, coeff_D, q_from_N, qdim
from .tl_core import TLDiagram, TLElement, compose, enumerate_nc2, markov_trace, tensor
from .jones_wenzl import jw, jw_bilateral
from .gram_recursion import GramBlock, gram_recursive, norms, riesz_margin
from .commutator_model import CoeffGrid, commutator, left_mult_chi, right_mult_chi

__version__ = "0.1.0"

__all__ = [
    "RecCoeffParams",
    "ScalarContext",
    "alpha_of_q",
    "coeff_ABCD",
    "coeff_D",
    "q_from_N",
    "qdim",
    "TLDiagram",
    "TLElement",
    "compose",
    "enumerate_nc2",
    "markov_trace",
    "tensor",
    "jw",
    "jw_bilateral",
    "GramBlock",
    "gram_recursive",
    "norms",
    "riesz_margin",
    "CoeffGrid",
    "commutator",
    "left_mult_chi",
    "right_mult_chi",
]
