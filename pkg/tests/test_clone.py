import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arrowlab.clone import CloneError, close, contains, orbit, r_of
from arrowlab.io import serialize_clone
from arrowlab.operations import (
    Permutation,
    compose,
    conjugate,
    is_conservative,
    is_monarchy,
    make_f_rlk,
    make_g_r12,
    make_projection,
    per_generators,
)
from conftest import random_operation


def projections(n, cap):
    return {make_projection(n, r, t) for r in range(1, cap + 1) for t in range(1, r + 1)}


def test_empty_and_projection_generators():
    assert set(close([], 3, n=3).members) == projections(3, 3)
    assert set(close([make_projection(3, 2, 2)], 2).members) == projections(3, 2)
    with pytest.raises(CloneError):
        close([], 3)


def test_majority_on_two_elements_has_projection_binaries():
    c = close([make_g_r12(2, 3)], 2)
    assert set(c.of_arity(2)) == {make_projection(2, 2, 1), make_projection(2, 2, 2)}


def test_contains_examples():
    c = close([make_f_rlk(4, 3, 1, 2)], 3, symmetric=True)
    assert contains(c, make_projection(4, 3, 1))
    assert contains(c, make_f_rlk(4, 3, 2, 1))
    c5 = close([make_f_rlk(5, 4, 1, 2)], 3)
    assert contains(c5, make_f_rlk(5, 3, 1, 2)) is False
    assert all(is_monarchy(f) for f in c5.members)
    with pytest.raises(CloneError):
        contains(c5, make_f_rlk(5, 4, 1, 2))


def test_truncated_clone_answers_unknown():
    c = close([make_g_r12(3, 3)], 3, budget=5)
    assert not c.complete
    assert contains(c, make_g_r12(3, 3)) in (True, None)
    missing = [f for f in close([make_g_r12(3, 3)], 3).members if f not in c]
    assert contains(c, missing[0]) is None
    with pytest.raises(CloneError):
        r_of(c)


def test_r_of_examples():
    assert r_of(close([], 4, n=3)) == math.inf
    c = close([make_g_r12(3, 3)], 3)
    assert r_of(c) == 3
    assert all(is_monarchy(f) for f in c.of_arity(2))
    assert r_of(close([make_f_rlk(5, 4, 1, 2)], 4)) == 4


def test_orbit_examples():
    assert orbit(make_projection(3, 3, 1)) == {make_projection(3, 3, t) for t in (1, 2, 3)}
    assert orbit(make_g_r12(3, 3), variables=False, carrier=True) == {make_g_r12(3, 3)}
    assert len(orbit(make_f_rlk(3, 3, 1, 2))) == 6


def test_idempotence():
    c = close([make_g_r12(3, 3)], 3)
    again = close(c.members, 3)
    assert again.members == c.members


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 3), cap=st.integers(1, 3))
def test_monotone_in_generators(seed, n, cap):
    rng = np.random.default_rng(seed)
    gens = [random_operation(rng, n, int(rng.integers(1, 3)), conservative=True) for _ in range(2)]
    small = close(gens[:1], cap, budget=5000)
    big = close(gens, cap, budget=5000)
    if small.complete and big.complete:
        assert set(small.members) <= set(big.members)


@pytest.mark.parametrize("n", (2, 3, 4))
def test_conservative_generators_give_conservative_members(n):
    for gen in (make_g_r12(n, 3), make_f_rlk(n, 3, 1, 2), make_f_rlk(n, 3, 2, 3)):
        c = close([gen], 3, budget=20000)
        assert c.complete
        assert all(is_conservative(f) for f in c.members)


def test_symmetric_closure_is_conjugation_invariant():
    rng = np.random.default_rng(7)
    gen = random_operation(rng, 3, 2, conservative=True)
    c = close([gen], 2, symmetric=True)
    for f in c.members:
        for pi in per_generators(3):
            assert conjugate(f, pi) in c


def test_closed_under_compose_spot_check():
    c = close([make_g_r12(3, 3)], 3)
    rng = np.random.default_rng(3)
    ternary = c.of_arity(3)
    for _ in range(50):
        outer = ternary[rng.integers(len(ternary))]
        inners = [ternary[rng.integers(len(ternary))] for _ in range(3)]
        assert compose(outer, inners) in c


def test_worker_count_does_not_change_output():
    gens = [make_g_r12(3, 3)]
    outs = {serialize_clone(close(gens, 3, workers=w)) for w in (1, 2, 8)}
    assert len(outs) == 1


def test_generators_must_share_carrier():
    with pytest.raises(CloneError):
        close([make_g_r12(3, 3), make_g_r12(4, 3)], 3)


def test_member_order_is_canonical():
    c = close([make_f_rlk(4, 3, 1, 2)], 3, symmetric=True)
    keys = [f.key for f in c.members]
    assert keys == sorted(keys)
    assert all(a.r <= b.r for a, b in itertools.pairwise(c.members))


def test_symmetric_closure_matches_plain_closure_of_conjugates():
    gen = make_f_rlk(4, 3, 1, 2)
    conj = {conjugate(gen, Permutation(p)) for p in itertools.permutations(range(4))}
    assert set(close([gen], 3, symmetric=True).members) == set(close(conj, 3).members)
