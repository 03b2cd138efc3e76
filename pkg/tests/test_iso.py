from __future__ import annotations

import numpy as np
import pytest

from sigmaschur.acceptance import sigma_normal_subgroups_within
from sigmaschur.fp import c_finite
from sigmaschur.group import abelian_group, cyclic_group, quotient
from sigmaschur.iso import (
    Classifier,
    classify,
    fingerprint,
    is_sigma_homomorphism,
    sigma_aut_group,
    sigma_aut_order,
    sigma_isomorphic,
    stabilizer_order,
)
from sigmaschur.magnus import CapExceeded, enumerate_group


def relabel(G, seed):
    """The same sigma-group with its elements shuffled (identity kept at 0)."""
    rng = np.random.default_rng(seed)
    perm = np.concatenate([[0], 1 + rng.permutation(G.order - 1)])
    inv = np.argsort(perm)
    from sigmaschur.group import SigmaGroup
    mul = perm[G.mul[inv[:, None], inv[None, :]]]
    return SigmaGroup(p=G.p, mul=mul.astype(np.int32), sigma=perm[G.sigma[inv]],
                      generators=[int(perm[g]) for g in G.generators], name=G.name + "'")


@pytest.mark.parametrize("n,i,expected", [(1, 3, 2), (1, 4, 6), (1, 5, 6), (2, 3, 48)])
def test_aut_order_free_quotients(n, i, expected):
    G = enumerate_group(3, n, i)
    a = sigma_aut_order(G)
    assert a == expected
    assert c_finite(3, n) * int(G.odd_mask.sum()) ** n == a


def test_aut_order_f33():
    assert sigma_aut_order(enumerate_group(3, 3, 3)) == 11232


def test_aut_order_abelian_brute():
    # Z/9 x Z/3 with sigma = -1: every automorphism commutes with inversion
    assert sigma_aut_order(abelian_group(3, [9, 3])) == 108
    # Z/3 even x Z/3 odd: sigma-automorphisms preserve both eigenspaces
    assert sigma_aut_order(abelian_group(3, [3, 3], [1, -1])) == 4


def test_aut_maps_are_homomorphisms(f23):
    A = sigma_aut_group(f23, keep_maps=True)
    assert A.maps.shape[0] == 48
    for phi in A.maps[:10]:
        assert is_sigma_homomorphism(f23, f23, phi)
        assert np.unique(phi).size == f23.order


def test_isomorphism_witness_under_relabelling(f23):
    H = relabel(f23, 5)
    phi = sigma_isomorphic(f23, H)
    assert phi is not None and is_sigma_homomorphism(f23, H, phi)
    assert sigma_isomorphic(cyclic_group(3, 9), abelian_group(3, [3, 3])) is None


def test_sigma_action_distinguishes():
    assert sigma_isomorphic(cyclic_group(3, 3, 1), cyclic_group(3, 3, -1)) is None


def test_classifier_labels_stable(f23):
    clf = Classifier()
    a = clf.label(f23)
    b = clf.label(relabel(f23, 11))
    c = clf.label(cyclic_group(3, 9))
    assert a == b != c
    assert clf.representative(a) is f23
    assert fingerprint(f23).serialize().startswith("27|+3-9|")
    out = classify([cyclic_group(3, 3), relabel(cyclic_group(3, 3), 1), cyclic_group(3, 3, 1)], clf)
    assert sorted(len(v) for v in out.values()) == [1, 2]


@pytest.mark.parametrize("n,i", [(1, 4), (1, 5), (2, 3)])
def test_stabilizer_formula(n, i):
    G = enumerate_group(3, n, i)
    for H in sigma_normal_subgroups_within(G, G.frattini):
        Q, _ = quotient(G, H)
        assert stabilizer_order(G, H) == sigma_aut_order(Q) * int(G.odd_mask[H.elements].sum()) ** n


def test_aut_cap(f24):
    with pytest.raises(CapExceeded):
        sigma_aut_order(f24, cap=100)
