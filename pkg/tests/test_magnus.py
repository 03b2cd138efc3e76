from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigmaschur.fp import witt_graded_dims
from sigmaschur.magnus import (
    CapExceeded,
    FreeWord,
    TruncatedElement,
    enumerate_group,
    eval_word,
    is_odd,
    sigma,
    sigma_matrix,
)


def words(n, max_len=12):
    letters = st.sampled_from([j for j in range(-n, n + 1) if j])
    return st.lists(letters, max_size=max_len).map(lambda xs: FreeWord(tuple(xs)))


def test_parse_and_errors():
    assert FreeWord.parse("1 2 -1 -2").letters == (1, 2, -1, -2)
    with pytest.raises(ValueError):
        FreeWord.parse("0")
    with pytest.raises(ValueError):
        FreeWord.parse("1 x")
    with pytest.raises(ValueError):
        FreeWord.parse("3").check_rank(2)


def test_word_operations():
    w = FreeWord((1, 2))
    assert w.inverse().letters == (-2, -1)
    assert w.sigma().letters == (-1, -2)
    assert (w ** 2).letters == (1, 2, 1, 2)
    assert FreeWord((1, 1, -2, 1)).exponent_sums(2) == [3, -1]


@settings(max_examples=60, deadline=None)
@given(words(2), words(2))
def test_eval_is_homomorphism(u, v):
    for depth in (3, 4):
        assert eval_word(u * v, 3, 2, depth) == eval_word(u, 3, 2, depth) * eval_word(v, 3, 2, depth)


@settings(max_examples=60, deadline=None)
@given(words(2))
def test_inverse_and_sigma_involution(w):
    e = eval_word(w, 3, 2, 4)
    one = TruncatedElement.one(3, 2, 4)
    assert e * e.inverse() == one
    assert sigma(sigma(e)) == e
    assert sigma(e) == eval_word(w.sigma(), 3, 2, 4)


@settings(max_examples=40, deadline=None)
@given(words(2))
def test_truncation_compatible(w):
    assert eval_word(w, 3, 2, 5).truncate(3) == eval_word(w, 3, 2, 3)


def test_sigma_matrix_is_involution():
    S = sigma_matrix(3, 2, 4)
    assert ((S @ S) % 3 == np.eye(S.shape[0], dtype=S.dtype)).all()


def test_power_vanishes_at_depth():
    # x^3 = 1 + X^3 in characteristic 3, so it dies in F_{1,3} but not in F_{1,4}
    x3 = FreeWord((1, 1, 1))
    assert eval_word(x3, 3, 1, 3) == TruncatedElement.one(3, 1, 3)
    assert eval_word(x3, 3, 1, 4) != TruncatedElement.one(3, 1, 4)
    assert is_odd(eval_word(x3, 3, 1, 4))
    comm = FreeWord((1, 2, -1, -2))
    assert not is_odd(eval_word(comm, 3, 2, 3))


@pytest.mark.parametrize("n,i", [(1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (3, 3)])
def test_enumerated_order_matches_witt(n, i):
    G = enumerate_group(3, n, i)
    w = witt_graded_dims(3, n, i)
    assert G.order == w.order
    assert int(G.odd_mask.sum()) == w.odd_order


def test_enumerated_group_is_valid(f24):
    f24.validate()
    assert [s.order for s in f24.dimension_series] == [2187, 243, 81, 1]
    assert [s.order for s in f24.lower_central_series] == [2187, 27, 9, 1]


def test_word_index_matches_table(f23):
    x, y = f23.generators
    mag = f23.magnus
    assert mag.word_index(FreeWord((1,))) == x
    assert mag.word_index(FreeWord((1, 2))) == f23.mul[x, y]
    assert mag.word_index(FreeWord((-1,))) == f23.inv[x]


def test_size_cap():
    with pytest.raises(CapExceeded):
        enumerate_group(3, 2, 4, size_cap=100)


def test_p5():
    G = enumerate_group(5, 1, 3)
    assert G.order == 5 and int(G.odd_mask.sum()) == 5
