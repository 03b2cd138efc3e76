from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigmaschur.group import (
    GroupError,
    abelian_group,
    abelian_partition,
    center,
    check_conjugacy_representatives,
    check_fibers,
    check_product_bijection,
    check_twisted_representatives,
    commutator_subgroup,
    conjugacy_classes,
    cyclic_group,
    generator_rank,
    is_normal,
    is_sigma_invariant,
    is_totally_odd,
    minimal_generators,
    normal_closure,
    odd_even_conjugacy_representative,
    partition_from_torsion_counts,
    quotient,
    relation_rank,
    relation_subgroup,
    subgroup_generated,
    trivial_group,
    zassenhaus_type,
)
from sigmaschur.magnus import FreeWord


def test_small_constructors():
    Z9 = cyclic_group(3, 9)
    Z9.validate()
    assert is_totally_odd(Z9)
    assert abelian_partition(Z9) == (2,)
    A = abelian_group(3, [9, 3], [-1, 1])
    A.validate()
    assert int(A.odd_mask.sum()) == 9 and int(A.even_mask.sum()) == 3
    assert abelian_partition(A) == (2, 1)
    T = trivial_group(3)
    assert T.order == 1 and generator_rank(T) == 0


def test_partition_from_torsion_counts():
    # Z/9 x Z/3: |A[1]| = 1, |A[3]| = 9, |A[9]| = 27
    assert partition_from_torsion_counts(3, [1, 9, 27]) == (2, 1)


def test_subgroup_generated_and_closure(f23):
    x, y = f23.generators
    assert subgroup_generated(f23, [x]).order == 3
    N = normal_closure(f23, [x])
    assert N.order == 9 and is_normal(f23, N)
    assert is_sigma_invariant(f23, normal_closure(f23, [x, f23.sigma[x]]))


def test_frattini_and_ranks(f23, f24):
    assert f23.frattini.order == 3
    assert generator_rank(f23) == 2 and generator_rank(f24) == 2
    assert len(minimal_generators(f24)) == 2
    assert center(f23).order == 3
    assert relation_rank(f24, f24.full()) == 2


def test_commutator_subgroup(f23):
    assert commutator_subgroup(f23, f23.full()).order == 3


def test_quotient_requires_normal_invariant(f23):
    x, _ = f23.generators
    H = subgroup_generated(f23, [x])
    with pytest.raises(GroupError):
        quotient(f23, H)


def test_quotient_by_frattini(f24):
    Q, proj = quotient(f24, f24.frattini)
    assert Q.order == 9 and is_totally_odd(Q)
    assert (Q.mul[proj[:, None], proj[None, :]] == proj[f24.mul]).all()


def test_structure_checks_on_free_quotients(f23, f24):
    for G in (f23, f24):
        assert check_product_bijection(G)
        assert check_conjugacy_representatives(G)
        assert check_twisted_representatives(G)
    assert check_fibers(f24, f24.frattini)


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_structure_checks_on_random_quotients(f24, data):
    odd = f24.odd_elements
    idx = data.draw(st.lists(st.integers(0, odd.size - 1), min_size=1, max_size=2))
    N = normal_closure(f24, odd[idx])
    assert is_sigma_invariant(f24, N)
    Q, _ = quotient(f24, N)
    assert check_fibers(f24, N)
    assert check_product_bijection(Q)
    assert check_conjugacy_representatives(Q)
    assert check_twisted_representatives(Q)


def test_conjugacy_classes_abelian():
    A = abelian_group(3, [3, 3])
    cd = conjugacy_classes(A)
    assert len(set(cd.labels.tolist())) == 9


def test_odd_even_representative_precondition():
    Z3 = cyclic_group(3, 3, sigma_exponent=1)  # everything even
    with pytest.raises(GroupError):
        odd_even_conjugacy_representative(Z3, 1, -1)


@pytest.mark.parametrize("rel,depth,expected", [
    ("1 1 1", 4, (3,)),
    ("1 1 1 1 1 1 1 1 1", 10, (9,)),
    ("1 1 1 1 1 1 1 1 1", 6, (None,)),
])
def test_zassenhaus_type_one_generator(rel, depth, expected):
    assert zassenhaus_type(3, 1, [FreeWord.parse(rel)], depth) == expected


def test_zassenhaus_type_two_generators():
    rels = [FreeWord.parse("1 1 1"), FreeWord.parse("2 2 2")]
    assert zassenhaus_type(3, 2, rels, 4) == (3, 3)


def test_zassenhaus_rejects_bad_relations():
    with pytest.raises(GroupError):
        zassenhaus_type(3, 1, [FreeWord.parse("1")], 4)
    with pytest.raises(ValueError):
        zassenhaus_type(3, 2, [FreeWord.parse("1 1 1")], 4)


def test_relation_subgroup(f14):
    x = f14.generators[0]
    N = relation_subgroup(f14, [f14.power(np.array([x]), 3)[0]])
    assert N.order == 3
