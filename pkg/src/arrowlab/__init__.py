"""Finite clones, choice-function families and exhaustive checks of term identities."""
from .choice import (
    ChoiceFunction,
    Family,
    close_family,
    conjugate_choice,
    is_full,
    is_simple_averaging,
    seed_family,
)
from .clone import Clone, close, contains, r_of
from .indexed import IndexedOperation, dom1_profile, lift_simple, pm_partition
from .operations import (
    Operation,
    Permutation,
    compose,
    conjugate,
    make_f_rlk,
    make_g_r12,
    make_projection,
)
from .verify import VerificationReport

__version__ = "0.1.0"

__all__ = [
    "ChoiceFunction", "Clone", "Family", "IndexedOperation", "Operation", "Permutation",
    "VerificationReport", "close", "close_family", "compose", "conjugate", "conjugate_choice",
    "contains", "dom1_profile", "is_full", "is_simple_averaging", "lift_simple", "make_f_rlk",
    "make_g_r12", "make_projection", "pm_partition", "r_of", "seed_family",
]
