from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigmaschur.freesub import (
    CyclicKernelBasis,
    NotInKernel,
    character_check,
    character_identity,
    index_formula_check,
    rewrite_in_kernel,
    structure_checks,
)
from sigmaschur.magnus import FreeWord

CASES = [(3, 2, 1), (3, 3, 1), (3, 2, 2), (5, 2, 1)]


def kernel_words(basis):
    """Random words whose x_1 exponent sum is divisible by p^r."""
    letters = st.lists(st.sampled_from([j for j in range(-basis.n, basis.n + 1) if j]), max_size=15)

    def fix(xs):
        s = sum(1 if x == 1 else -1 if x == -1 else 0 for x in xs)
        pad = (-s) % basis.index
        return FreeWord(tuple(xs) + (1,) * pad)
    return letters.map(fix)


def test_basis_words_rewrite_to_unit_vectors():
    b = CyclicKernelBasis(3, 2, 1)
    assert b.size == 4 and len(b.labels()) == 4
    for k in range(b.size):
        v = rewrite_in_kernel(b.word(k), b)
        assert v.tolist() == [int(j == k) for j in range(b.size)]


def test_not_in_kernel():
    with pytest.raises(NotInKernel):
        rewrite_in_kernel(FreeWord((1,)), CyclicKernelBasis(3, 2, 1))
    assert rewrite_in_kernel(FreeWord((2, -2)), CyclicKernelBasis(3, 2, 1)).tolist() == [0, 0, 0, 0]


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_rewrite_is_additive(data):
    b = CyclicKernelBasis(3, 2, 1)
    u = data.draw(kernel_words(b))
    v = data.draw(kernel_words(b))
    assert (rewrite_in_kernel(u * v, b) == rewrite_in_kernel(u, b) + rewrite_in_kernel(v, b)).all()
    assert (rewrite_in_kernel(u.inverse(), b) == -rewrite_in_kernel(u, b)).all()


@pytest.mark.parametrize("p,n,r", CASES)
def test_character_rows(p, n, r):
    b = CyclicKernelBasis(p, n, r)
    rows = character_check(b)
    assert [row.status for row in rows] == ["pass", "pass", "pass", "vacuous"]
    assert rows[0].computed == 1 + p ** r * (n - 1)
    assert rows[1].computed == 1
    assert rows[2].computed == -n
    assert character_identity(b)
    idx = index_formula_check(b)
    assert idx.ok and idx.i_n == -n


def test_values_at_321():
    rows = character_check(CyclicKernelBasis(3, 2, 1))
    assert [r.computed for r in rows[:3]] == [4, 1, -2]


@pytest.mark.parametrize("p,n,r", CASES)
def test_structure(p, n, r):
    assert all(structure_checks(CyclicKernelBasis(p, n, r)).values())


def test_invalid_basis():
    with pytest.raises(ValueError):
        CyclicKernelBasis(4, 2, 1)
    with pytest.raises(ValueError):
        CyclicKernelBasis(3, 0, 1)
