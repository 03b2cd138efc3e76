from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigmaschur import classgroups as cg


def brute_reduced_forms(D):
    """Independent count of reduced forms: |b| <= a <= c, b >= 0 when |b| = a or a = c, gcd 1."""
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, abs(b)), c) == 1:
                out.append((a, b, c))
        a += 1
    return sorted(out)


@pytest.mark.parametrize("D,h", [(-3, 1), (-4, 1), (-23, 3), (-47, 5), (-71, 7), (-3299, 27), (-3896, 36)])
def test_class_numbers(D, h):
    assert cg.class_number(D) == h == len(brute_reduced_forms(D))


def test_reduced_forms_match_brute():
    for D in range(-3, -2000, -1):
        if cg.is_fundamental(D):
            assert sorted((f.a, f.b, f.c) for f in cg.reduced_forms(D)) == brute_reduced_forms(D)


def test_vectorized_class_numbers():
    hs = cg.class_numbers_upto(3000)
    assert all(cg.is_fundamental(D) for D in hs)
    assert all(h == len(brute_reduced_forms(D)) for D, h in list(hs.items())[::7])
    assert len(hs) == len(cg.fundamental_discriminants(3000))


def test_composition_examples():
    f = cg.QuadForm(2, 1, 3)
    assert cg.compose(f, f) == cg.QuadForm(2, -1, 3)
    assert cg.power(f, 3) == cg.principal_form(-23)
    assert cg.compose(f, f.inverse()) == cg.principal_form(-23)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([-23, -47, -71, -199, -3299, -3896, -4027]), st.integers(0, 1000))
def test_group_laws_random_labelling(D, seed):
    G = cg.FormClassGroup(D, shuffle_seed=seed)
    assert G.check_laws(triples=30, seed=seed)
    assert G.generated_order() == G.order


def test_sylow_methods_agree():
    for D, h in cg.class_numbers_upto(2500).items():
        G = cg.FormClassGroup(D)
        for p in (3, 5):
            assert cg.p_sylow_type(G, p) == cg.sylow_type_from_generators(D, h, p)
    assert cg.p_sylow_type(cg.FormClassGroup(-3299), 3) == (2, 1)
    assert cg.sylow_type_from_generators(-3299, 27, 3) == (2, 1)


@pytest.mark.parametrize("part", [(), (1,), (1, 1), (2,), (2, 1), (1, 1, 1), (3,)])
def test_aut_order_abelian(part):
    assert cg.aut_order_abelian(3, part) == cg.aut_order_abelian_bruteforce(3, part)


def test_aut_order_values():
    assert [cg.aut_order_abelian(3, p) for p in [(1,), (1, 1), (2,), (2, 1), (1, 1, 1), (3,)]] == \
        [2, 48, 6, 108, 11232, 18]


def test_survey_small():
    rep = cg.survey(3, 5000)
    total = sum(t.count for t in rep.types)
    assert total == len(cg.class_numbers_upto(5000))
    assert abs(sum(t.frequency for t in rep.types) - 1) < 1e-12
    triv = next(t for t in rep.types if t.partition == ())
    assert abs(triv.prediction - 0.5601260779) < 1e-9
    js = rep.to_json()
    assert "types_excluding_p_divides_D" in js
    lines = rep.csv_lines()
    assert lines[0] == "discriminant,h,partition" and len(lines) == total + 1
    ex = cg.survey(3, 5000, exclude_p_divides_D=True)
    assert all(D % 3 for D, _, _ in ex.rows)
    assert "types_all" in ex.to_json()
    res = cg.survey(3, 5000, residue_filter=(5, 8))
    assert all((D - 5) % 8 == 0 for D, _, _ in res.rows)


def test_cinf_reference():
    assert abs(cg.cinf_reference(3, 200) - 0.5601260779279) < 1e-12
