"""The acceptance suite: one function per criterion, shared by the CLI and the tests."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import classgroups as cg
from .experiments import ExperimentSpec, compare, compare_samplers, run_experiment
from .fp import FpMatrix, c_finite, c_infinity, rank, rank_count, witt_graded_dims
from .freesub import CyclicKernelBasis, character_check, character_identity, index_formula_check
from .group import (
    SigmaGroup,
    Subgroup,
    check_conjugacy_representatives,
    check_fibers,
    check_product_bijection,
    check_twisted_representatives,
    is_normal,
    is_sigma_invariant,
    normal_closure,
    product_subgroup,
    quotient,
)
from .iso import Classifier, sigma_aut_group, sigma_aut_order, stabilizer_order
from .magnus import enumerate_group
from .measure import (
    MeasureExpr,
    cyclic_series_partial,
    cyclic_series_sum,
    example_consistency,
    mu_inf_sch_n,
    zp_class_measure,
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] criterion {self.number:>2} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, str, dict]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, detail, data = fn()
    return CriterionResult(number, name, bool(ok), detail, time.perf_counter() - t0, data)


# ---- oracles ------------------------------------------------------------------------

def brute_rank_counts(p: int, n: int, l: int) -> list[int]:
    """Tally ranks of all n x l matrices over F_p.

    Matrices are built row by row; prefixes with the same row space are
    merged, so every one of the p^(n l) matrices is counted once without
    using any closed formula.
    """
    def reduce(space: tuple[tuple[int, ...], ...], v: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
        rows = [list(r) for r in space] + [list(v)]
        # Gaussian elimination to reduced row echelon form
        out = []
        for col in range(l):
            piv = next((r for r in rows if r[col] % p and r not in out), None)
            if piv is None:
                continue
            inv = pow(piv[col], -1, p)
            piv[:] = [(x * inv) % p for x in piv]
            for r in rows:
                if r is not piv and r[col] % p:
                    f = r[col]
                    r[:] = [(a - f * b) % p for a, b in zip(r, piv)]
            out.append(piv)
        return tuple(sorted(tuple(r) for r in out))

    states = {(): 1}
    vectors = list(itertools.product(range(p), repeat=l))
    for _ in range(n):
        nxt: dict = {}
        for space, mult in states.items():
            for v in vectors:
                key = reduce(space, v)
                nxt[key] = nxt.get(key, 0) + mult
        states = nxt
    counts = [0] * (min(n, l) + 1)
    for space, mult in states.items():
        counts[len(space)] += mult
    return counts


def brute_rank_counts_direct(p: int, n: int, l: int) -> list[int]:
    """Plain enumeration through `rank`; only feasible for tiny p^(n l)."""
    counts = [0] * (min(n, l) + 1)
    for entries in itertools.product(range(p), repeat=n * l):
        counts[rank(FpMatrix(p, n, l, entries))] += 1
    return counts


def sigma_normal_subgroups_within(G: SigmaGroup, S: Subgroup) -> list[Subgroup]:
    """All normal sigma-invariant subgroups of G contained in S."""
    atoms = {}
    for x in S.elements:
        N = normal_closure(G, [int(x), int(G.sigma[x])])
        atoms.setdefault(N.key(), N)
    found = {G.trivial().key(): G.trivial()}
    frontier = list(found.values())
    while frontier:
        nxt = []
        for A in frontier:
            for B in atoms.values():
                J = product_subgroup(G, A, B)
                if J.key() not in found:
                    found[J.key()] = J
                    nxt.append(J)
        frontier = nxt
    return sorted(found.values(), key=lambda s: (s.order, s.key()))


# ---- criteria -------------------------------------------------------------------------

def criterion_1() -> CriterionResult:
    def run():
        bad = []
        for p in (3, 5):
            for n in range(1, 4):
                for l in range(1, 4):
                    brute = brute_rank_counts(p, n, l)
                    formula = [rank_count(p, n, l, k) for k in range(min(n, l) + 1)]
                    if brute != formula:
                        bad.append((p, n, l, brute, formula))
        example = [rank_count(3, 2, 2, k) for k in range(3)]
        ok = not bad and example == [1, 32, 48] and brute_rank_counts_direct(3, 2, 2) == example
        return ok, f"18 shapes checked; p=3 n=l=2 counts {example}; mismatches {bad or 'none'}", {}
    return _timed(1, "rank-count lemma", run)


def criterion_2() -> CriterionResult:
    def run():
        rows = []
        ok = True
        for n, i in [(1, 3), (1, 4), (1, 5), (2, 3), (2, 4)]:
            G = enumerate_group(3, n, i)
            w = witt_graded_dims(3, n, i)
            odd = int(G.odd_mask.sum())
            ok &= G.order == w.order and odd == w.odd_order
            rows.append(f"({n},{i}):{G.order}/{odd}")
        return ok, "orders/odd sizes " + " ".join(rows), {}
    return _timed(2, "order oracle agreement", run)


def criterion_3() -> CriterionResult:
    def run():
        expected = {(1, 3): 2, (1, 4): 6, (2, 3): 48}
        got = {}
        ok = True
        for (n, i), want in expected.items():
            G = enumerate_group(3, n, i)
            a = sigma_aut_order(G)
            lemma = c_finite(3, n) * int(G.odd_mask.sum()) ** n
            got[(n, i)] = a
            ok &= a == want and Fraction(a) == lemma
        return ok, f"|Aut_sigma| = {list(got.values())} (expected 2, 6, 48)", {}
    return _timed(3, "sigma-automorphism count", run)


def criterion_4() -> CriterionResult:
    def run():
        G = enumerate_group(3, 2, 3)
        sigma_aut_group(G, keep_maps=True)
        subs = sigma_normal_subgroups_within(G, G.frattini)
        details = []
        ok = True
        for H in subs:
            Q, _ = quotient(G, H)
            lhs = stabilizer_order(G, H)
            rhs = sigma_aut_order(Q) * int(G.odd_mask[H.elements].sum()) ** 2
            ok &= lhs == rhs
            details.append(f"|H|={H.order}: {lhs}={rhs}")
        return ok, f"{len(subs)} subgroups; " + ", ".join(details), {}
    return _timed(4, "stabilizer formula", run)


def _exhaustive(n: int, i: int) -> tuple[bool, str, dict]:
    rep = run_experiment(ExperimentSpec(3, n, i))
    verdict = compare(rep)
    counts = sorted((c.observed for c in rep.classes), reverse=True)
    return verdict.passed, f"counts {counts}; {'; '.join(verdict.failures) or 'exact match'}", {"report": rep}


def criterion_5() -> CriterionResult:
    def run():
        ok, detail, data = _exhaustive(1, 4)
        counts = sorted((c.order, c.observed) for c in data["report"].classes)
        ok &= counts == [(1, 6), (3, 2), (9, 1)]
        return ok, detail, data
    return _timed(5, "exhaustive (3,1,4)", run)


def criterion_6() -> CriterionResult:
    def run():
        ok, detail, data = _exhaustive(2, 3)
        full = [c for c in data["report"].classes if c.order == 27]
        ok &= len(full) == 1 and full[0].observed == 1
        return ok, detail, data
    return _timed(6, "exhaustive (3,2,3)", run)


def criterion_7(samples: int = 100_000, seed: int = 42) -> CriterionResult:
    def run():
        clf, levels = Classifier(), {}
        reps = {}
        for sampler in ("odd-list", "twisted"):
            spec = ExperimentSpec(3, 2, 4, mode="monte-carlo", samples=samples, seed=seed, sampler=sampler)
            reps[sampler] = run_experiment(spec, clf, levels)
        v1 = compare(reps["odd-list"], 4.0)
        v2 = compare(reps["twisted"], 4.0)
        v3 = compare_samplers(reps["odd-list"], reps["twisted"], 4.0)
        worst = max(abs(c.sigma_dev) for r in reps.values() for c in r.classes if c.sigma_dev is not None)
        fails = v1.failures + v2.failures + v3.failures
        ok = v1.passed and v2.passed and v3.passed
        return ok, (f"{samples} samples x 2 samplers, seed {seed}, {len(reps['odd-list'].classes)} classes, "
                    f"max |dev| {worst:.2f} sigma; {'; '.join(fails) or 'all within 4 sigma'}"), {"reports": reps}
    return _timed(7, "Monte Carlo (3,2,4)", run)


def criterion_8() -> CriterionResult:
    def run():
        ok = True
        parts = []
        for p, n, r in [(3, 2, 1), (3, 3, 1), (3, 2, 2)]:
            b = CyclicKernelBasis(p, n, r)
            rows = character_check(b)
            idx = index_formula_check(b)
            ok &= idx.rank == 1 + p ** r * (n - 1)
            ok &= all(row.status == "pass" for row in rows[:3]) and rows[3].status == "vacuous"
            ok &= idx.ok and character_identity(b)
            vals = "/".join(str(row.computed) for row in rows[:3])
            parts.append(f"({p},{n},{r}) rank {idx.rank} chi {vals} i_N {idx.i_n} row4 {rows[3].status}")
        return ok, "; ".join(parts), {}
    return _timed(8, "kernel characters", run)


def criterion_9() -> CriterionResult:
    def run():
        p = 3
        ok = True
        for j in range(1, 6):
            lhs, rhs = example_consistency(p, j)
            ok &= lhs == rhs
        zp = zp_class_measure(p)
        ok &= zp.is_zero()
        ok &= cyclic_series_sum(p) - cyclic_series_partial(p, 60) < Fraction(1, 3 ** 55)
        total = sum((mu_inf_sch_n(p, n) for n in range(7)), MeasureExpr(Fraction(0), 1, p))
        val, err = total.evaluate(1e-12)
        ok &= abs(val - 1) < 1e-6
        return ok, f"sum_(n<=6) mu(Sch_n) = {val:.9f}; mu([Z_p]) coefficient {zp.coeff}", {}
    return _timed(9, "measure identities", run)


def criterion_10(X: int = 10 ** 6, laws_bound: int = 10 ** 4) -> CriterionResult:
    def run():
        hs = {D: cg.class_number(D) for D in (-3, -23, -47, -71)}
        ok = hs == {-3: 1, -23: 3, -47: 5, -71: 7}
        law_fail = []
        for D, h in cg.class_numbers_upto(laws_bound).items():
            G = cg.FormClassGroup(D)
            if G.order != h or not G.check_laws(triples=20) or G.generated_order() != h:
                law_fail.append(D)
        ok &= not law_fail
        cinf, _ = c_infinity(3, 1e-12)
        ref = cg.cinf_reference(3, 200)
        ok &= abs(cinf - ref) < 1e-8
        rep = cg.survey(3, X)
        triv = next((t for t in rep.types if t.partition == ()), None)
        freq = triv.frequency if triv else 0.0
        detail = (f"h = {list(hs.values())}; group laws on |D|<={laws_bound}: {len(law_fail)} failures; "
                  f"|C_inf - product| = {abs(cinf - ref):.1e}; survey |D|<={X}: trivial 3-part "
                  f"{freq:.4f} vs {cinf:.4f} (diff {freq - cinf:+.4f}, diagnostic)")
        return ok, detail, {"survey": rep}
    return _timed(10, "class groups", run)


def _structure_ok(G: SigmaGroup) -> bool:
    return check_product_bijection(G) and check_conjugacy_representatives(G) and check_twisted_representatives(G)


def criterion_11(random_quotients: int = 100, seed: int = 7) -> CriterionResult:
    def run():
        ok = True
        checked = 0
        G = enumerate_group(3, 2, 3)
        ok &= _structure_ok(G)
        seen = {}
        for tup in itertools.product(G.odd_elements.tolist(), repeat=2):
            N = normal_closure(G, tup)
            seen.setdefault(N.key(), N)
        for N in seen.values():
            Q, _ = quotient(G, N)
            ok &= is_normal(G, N) and is_sigma_invariant(G, N)
            ok &= check_fibers(G, N) and _structure_ok(Q)
            checked += 1
        H = enumerate_group(3, 2, 4)
        rng = np.random.default_rng(seed)
        for _ in range(random_quotients):
            r = rng.choice(H.odd_elements, size=2)
            N = normal_closure(H, r)
            Q, _ = quotient(H, N)
            ok &= check_fibers(H, N) and _structure_ok(Q)
            checked += 1
        return ok, f"{checked} quotients checked (plus F_2,3 itself)", {}
    return _timed(11, "sigma-structure identities", run)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_all(selected: list[int] | None = None, progress: Callable[[CriterionResult], None] | None = None,
            overrides: dict[int, dict] | None = None) -> list[CriterionResult]:
    """Run the chosen criteria in order; `overrides[k]` holds keyword arguments for criterion k."""
    overrides = overrides or {}
    out = []
    for k in selected or sorted(CRITERIA):
        if k not in CRITERIA:
            raise ValueError(f"no criterion {k}; choose from 1-{len(CRITERIA)}")
        kwargs = overrides.get(k, {})
        res = CRITERIA[k](**kwargs)
        if progress:
            progress(res)
        out.append(res)
    return out
