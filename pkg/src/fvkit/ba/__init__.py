"""Boolean-algebra side: the infinite-BA oracle, quantifier elimination and tightening."""

from .certify import certify_block
from .oracle import CardinalityState, OracleVerdict, infinite_ba_equivalent, infinite_ba_satisfiable, infinite_ba_valid
from .qe import ba_eliminate_quantifiers, eliminate_block
from .tight import (
    ESetForm,
    StepCertificate,
    TightDecomposition,
    absorb_and_strip,
    e_set_form,
    is_tight,
    tight_violations,
    tighten,
)

__all__ = [
    "CardinalityState",
    "ESetForm",
    "OracleVerdict",
    "StepCertificate",
    "TightDecomposition",
    "absorb_and_strip",
    "ba_eliminate_quantifiers",
    "certify_block",
    "e_set_form",
    "eliminate_block",
    "infinite_ba_equivalent",
    "infinite_ba_satisfiable",
    "infinite_ba_valid",
    "is_tight",
    "tight_violations",
    "tighten",
]
