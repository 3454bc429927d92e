import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arrowlab.choice import (
    AveragingError,
    ChoiceFunction,
    Family,
    FamilyError,
    apply_averaging,
    close_family,
    conjugate_choice,
    elements,
    improvement_search,
    is_full,
    is_simple_averaging,
    ksubsets,
    order_choice,
    seed_family,
    symmetric_close_family,
    to_mask,
)
from arrowlab.operations import (
    GuardError,
    Operation,
    Permutation,
    conjugate,
    from_function,
    make_g_r12,
    make_projection,
    permute_variables,
)
from conftest import random_operation, random_permutation
from oracles import as_family_set, brute_force_closure, g_r12_value, rational_family


def random_choice(rng, n, k):
    return ChoiceFunction(n, k, tuple(int(rng.choice(elements(m))) for m in ksubsets(n, k)))


def test_ksubsets_are_increasing_bitmasks():
    assert ksubsets(3, 2) == (0b011, 0b101, 0b110)
    assert all(bin(m).count("1") == 2 for m in ksubsets(5, 2))
    with pytest.raises(FamilyError):
        ksubsets(3, 0)
    with pytest.raises(FamilyError):
        ksubsets(3, 4)


def test_choice_function_validates_membership():
    with pytest.raises(FamilyError):
        ChoiceFunction(3, 2, (2, 0, 1))
    with pytest.raises(FamilyError):
        ChoiceFunction(3, 2, (0, 0))


def test_conjugate_choice_examples():
    c = order_choice(3, 2, (0, 1, 2))
    assert conjugate_choice(c, Permutation.identity(3)) == c
    swapped = conjugate_choice(c, Permutation.transposition(3, 0, 2))
    assert swapped == order_choice(3, 2, (2, 1, 0))
    assert all(swapped(m) == min(elements(m)) for m in ksubsets(3, 2))
    rng = np.random.default_rng(4)
    for _ in range(20):
        pi = random_permutation(rng, 4)
        d = random_choice(rng, 4, 2)
        assert conjugate_choice(conjugate_choice(d, pi), pi.inverse()) == d


def test_symmetric_close_examples():
    R = seed_family("rational", 3, 2)
    assert symmetric_close_family(R).members == R.members
    single = seed_family("singleton", 3, 2)
    assert len(symmetric_close_family(single)) == 6
    full = seed_family("full", 3, 2)
    assert symmetric_close_family(full).members == full.members


def test_apply_averaging_examples():
    rng = np.random.default_rng(5)
    g = make_g_r12(4, 3)
    c = random_choice(rng, 4, 2)
    assert apply_averaging(g, [c, c, c]) == c
    Y = to_mask((0, 1))
    cs = []
    for v in (0, 1, 1):
        base = list(random_choice(rng, 4, 2).choices)
        base[ksubsets(4, 2).index(Y)] = v
        cs.append(ChoiceFunction(4, 2, tuple(base)))
    assert apply_averaging(g, cs)(Y) == 1
    assert apply_averaging(make_projection(4, 3, 2), cs) == cs[1]


def test_apply_averaging_rejects_escape_with_subset():
    const = Operation(3, 2, np.zeros(9, dtype=int))
    c = order_choice(3, 2, (0, 1, 2))
    with pytest.raises(AveragingError) as err:
        apply_averaging(const, [c, c])
    assert err.value.subset is not None and not err.value.subset & 1


def test_is_simple_averaging_examples():
    R = seed_family("rational", 3, 2)
    assert is_simple_averaging(make_projection(3, 3, 2), R)
    assert is_simple_averaging(make_g_r12(3, 3), seed_family("full", 3, 2))
    assert not is_simple_averaging(make_g_r12(3, 3), R)


def test_condorcet_witness_is_cyclic():
    cyc = [order_choice(3, 2, o) for o in ((0, 1, 2), (1, 2, 0), (2, 0, 1))]
    c = apply_averaging(make_g_r12(3, 3), cyc)
    assert c not in seed_family("rational", 3, 2)


def test_close_family_examples():
    R = seed_family("rational", 3, 2)
    assert close_family(R, [make_projection(3, 2, 1)]).members == R.members
    closed = close_family(R, [make_g_r12(3, 3)])
    assert len(closed) == 8 and is_full(closed)
    full = seed_family("full", 3, 2)
    assert close_family(full, [make_g_r12(3, 3)]).members == full.members


def test_close_family_guards():
    with pytest.raises(GuardError):
        close_family(Family(9, 4), [make_g_r12(9, 3)])
    truncated = close_family(seed_family("rational", 3, 2), [make_g_r12(3, 3)], max_size=7)
    assert not truncated.complete and len(truncated) == 7
    with pytest.raises(FamilyError):
        close_family(seed_family("rational", 3, 2), [Operation(3, 2, np.zeros(9, dtype=int))])


def test_is_full_examples():
    assert is_full(seed_family("full", 3, 2))
    assert not is_full(seed_family("rational", 3, 2))
    assert not is_full(Family(3, 2))


def test_seed_examples():
    R = seed_family("rational", 3, 2)
    assert len(R) == 6
    S = seed_family("second_largest", 3, 2)
    assert len(S) == 6
    reverse = Permutation((2, 1, 0))
    assert S.members == Family(3, 2, tuple(conjugate_choice(c, reverse) for c in R)).members
    assert len(seed_family("median", 3, 3)) == 3
    with pytest.raises(FamilyError):
        seed_family("median", 4, 2)


def test_rational_seed_matches_oracle():
    for n, k in ((3, 2), (4, 2), (4, 3), (5, 2)):
        assert as_family_set(seed_family("rational", n, k)) == rational_family(n, k)


def test_brute_force_oracle_n3():
    want = brute_force_closure(rational_family(3, 2), g_r12_value, 3)
    got = close_family(seed_family("rational", 3, 2), [make_g_r12(3, 3)])
    assert as_family_set(got) == want


def test_improvement_examples():
    full = seed_family("full", 3, 2)
    c1 = order_choice(3, 2, (0, 1, 2))
    ystar = to_mask((0, 2))
    assert improvement_search(full, c1, ystar, 0).positive
    R = seed_family("rational", 3, 2)
    closed = close_family(R, [make_g_r12(3, 3)])
    assert improvement_search(closed, c1, ystar, 0, [make_g_r12(3, 3)]).positive
    out = improvement_search(R, c1, ystar, 0)
    assert not out.positive and out.blocked and out.transcript[-1] == "negative"


def test_improvement_reports_closure_violation():
    # f returns x_1 on repetitions and x_2 on one-to-one triples
    f = from_function(3, 3, lambda x, y, z: y if len({x, y, z}) == 3 else x)
    R = seed_family("rational", 3, 2)
    c1 = order_choice(3, 2, (0, 1, 2))
    out = improvement_search(R, c1, to_mask((0, 2)), 0, [f])
    assert not out.positive


def test_improvement_rejects_bad_arguments():
    R = seed_family("rational", 3, 2)
    c1 = order_choice(3, 2, (0, 1, 2))
    with pytest.raises(FamilyError):
        improvement_search(R, c1, to_mask((0, 2)), 2)
    with pytest.raises(FamilyError):
        improvement_search(R, c1, to_mask((0, 1, 2)), 0)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=80, deadline=None)
@given(seed=seeds, n=st.integers(2, 5), r=st.integers(1, 3))
def test_averaging_equivariance(seed, n, r):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n))
    f = random_operation(rng, n, r, conservative=True)
    cs = [random_choice(rng, n, k) for _ in range(r)]
    pi = random_permutation(rng, n)
    lhs = conjugate_choice(apply_averaging(f, cs), pi)
    rhs = apply_averaging(conjugate(f, pi), [conjugate_choice(c, pi) for c in cs])
    assert lhs == rhs


@settings(max_examples=80, deadline=None)
@given(seed=seeds, n=st.integers(2, 5), r=st.integers(1, 3))
def test_conservativity_transport(seed, n, r):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n))
    f = random_operation(rng, n, r, conservative=True)
    cs = [random_choice(rng, n, k) for _ in range(r)]
    out = apply_averaging(f, cs)
    for m in ksubsets(n, k):
        assert out(m) in {c(m) for c in cs}


@pytest.mark.parametrize("n", (3, 4))
def test_symmetric_family_stays_symmetric(n):
    F = symmetric_close_family(seed_family("singleton", n, 2))
    closed = close_family(F, [make_g_r12(n, 3)])
    assert symmetric_close_family(closed).members == closed.members


def test_close_family_idempotent_and_monotone():
    g = make_g_r12(4, 3)
    small = seed_family("singleton", 4, 2)
    big = Family(4, 2, small.members + seed_family("second_largest", 4, 2).members)
    cs, cb = close_family(small, [g]), close_family(big, [g])
    assert close_family(cs, [g]).members == cs.members
    assert set(cs.members) <= set(cb.members)


def test_fullness_monotone_in_ops():
    R = seed_family("rational", 3, 2)
    g = make_g_r12(3, 3)
    assert is_full(close_family(R, [g]))
    for extra in itertools.islice(itertools.permutations((1, 2, 3)), 3):
        assert is_full(close_family(R, [g, permute_variables(g, extra)]))


def test_close_family_worker_independent():
    R = seed_family("rational", 4, 2)
    g = make_g_r12(4, 3)
    assert close_family(R, [g], workers=1).members == close_family(R, [g], workers=4).members
