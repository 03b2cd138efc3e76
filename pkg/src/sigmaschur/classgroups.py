"""Class groups of imaginary quadratic discriminants via reduced binary quadratic forms."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fp import c_infinity, check_odd_prime


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not abs(b) <= a <= c:
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def inverse(self) -> "QuadForm":
        return reduce_form(QuadForm(self.a, -self.b, self.c))

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


def reduce_form(f: QuadForm) -> QuadForm:
    """Reduced representative of a positive definite form."""
    a, b, c = f.a, f.b, f.c
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise ValueError(f"{f} is not positive definite")
    while True:
        if b > a or b <= -a:
            # translate b into (-a, a]
            k = (a - b) // (2 * a)
            c = c + k * b + k * k * a
            b = b + 2 * k * a
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return QuadForm(a, b, c)


def principal_form(D: int) -> QuadForm:
    k = D % 2
    return QuadForm(1, k, (k - D) // 4)


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Dirichlet composition followed by reduction."""
    D = f.discriminant
    if g.discriminant != D:
        raise ValueError("discriminant mismatch")
    a1, b1, a2, b2 = f.a, f.b, g.a, g.b
    s = (b1 + b2) // 2
    e, u, v, w = _xgcd3(a1, a2, s)
    A = a1 * a2 // (e * e)
    B = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + D) // 2) // e
    B %= 2 * A
    C = (B * B - D) // (4 * A)
    return reduce_form(QuadForm(A, B, C))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _xgcd3(a: int, b: int, c: int) -> tuple[int, int, int, int]:
    g1, x1, y1 = _xgcd(a, b)
    g, x2, y2 = _xgcd(g1, c)
    if g < 0:
        g, x2, y2 = -g, -x2, -y2
    return g, x2 * x1, x2 * y1, y2


def power(f: QuadForm, e: int) -> QuadForm:
    out = principal_form(f.discriminant)
    base = f
    while e:
        if e & 1:
            out = compose(out, base)
        base = compose(base, base)
        e >>= 1
    return out


def is_fundamental(D: int) -> bool:
    if D >= 0:
        return False
    if D % 4 == 1:
        return _squarefree(-D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(-m)
    return False


def _squarefree(n: int) -> bool:
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


def reduced_forms(D: int) -> list[QuadForm]:
    """All reduced forms of the negative fundamental discriminant D."""
    if not is_fundamental(D):
        raise ValueError(f"{D} is not a negative fundamental discriminant")
    out = []
    amax = math.isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            f = QuadForm(a, b, c)
            if f.is_reduced():
                out.append(f)
    return out


def class_number(D: int) -> int:
    return len(reduced_forms(D))


def fundamental_discriminants(X: int) -> np.ndarray:
    """All negative fundamental discriminants D with |D| <= X, as a decreasing array."""
    m = np.arange(X + 1)
    sqf = np.ones(X + 1, dtype=bool)
    sqf[0] = False
    k = 2
    while k * k <= X:
        sqf[:: k * k] = False
        k += 1
    # D = -m with m = 3 mod 4 squarefree, or D = -4k with k = 1, 2 mod 4 squarefree
    odd = m[(m % 4 == 3) & sqf]
    even = 4 * m[(m % 4 == 1) | (m % 4 == 2)]
    even = even[(even <= X) & sqf[even // 4]]
    out = np.sort(np.concatenate([odd, even]))
    return -out


def class_numbers_upto(X: int) -> dict[int, int]:
    """h(D) for every negative fundamental D with |D| <= X by counting reduced forms."""
    Ds = set(int(d) for d in fundamental_discriminants(X))
    counts = np.zeros(X + 1, dtype=np.int64)
    amax = math.isqrt(X // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            # c >= a with c >= a, |D| = 4ac - b^2 <= X
            cmin = a
            cmax = (X + b * b) // (4 * a)
            if cmax < cmin:
                continue
            c = np.arange(cmin, cmax + 1)
            if b < 0:
                c = c[c > a]
            absd = 4 * a * c - b * b
            np.add.at(counts, absd, 1)
    return {D: int(counts[-D]) for D in sorted(Ds, reverse=True)}


class FormClassGroup:
    """Class group of D with elements indexed by reduced forms."""

    def __init__(self, D: int, shuffle_seed: int | None = None):
        self.D = D
        forms = reduced_forms(D)
        if shuffle_seed is not None:
            rng = np.random.default_rng(shuffle_seed)
            forms = [forms[i] for i in rng.permutation(len(forms))]
        self.forms = forms
        self.index = {f: i for i, f in enumerate(forms)}
        self.identity = self.index[principal_form(D)]

    @property
    def order(self) -> int:
        return len(self.forms)

    def mul(self, i: int, j: int) -> int:
        return self.index[compose(self.forms[i], self.forms[j])]

    def inv(self, i: int) -> int:
        return self.index[self.forms[i].inverse()]

    def pow(self, i: int, e: int) -> int:
        return self.index[power(self.forms[i], e)]

    def check_laws(self, triples: int = 50, seed: int = 0) -> bool:
        h = self.order
        e = self.identity
        for i in range(h):
            if self.mul(e, i) != i or self.mul(i, self.inv(i)) != e:
                return False
        rng = np.random.default_rng(seed)
        for _ in range(triples if h > 1 else 0):
            x, y, z = (int(v) for v in rng.integers(0, h, 3))
            if self.mul(self.mul(x, y), z) != self.mul(x, self.mul(y, z)):
                return False
            if self.mul(x, y) != self.mul(y, x):
                return False
        return True

    def generated_order(self, generators: Sequence[QuadForm] | None = None) -> int:
        """Order of the subgroup generated by the given forms (default: small prime forms)."""
        gens = list(generators) if generators is not None else prime_forms(self.D)
        gi = [self.index[reduce_form(g)] for g in gens]
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gi:
                    y = self.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return len(seen)


def _primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for k in range(2, math.isqrt(n) + 1):
        if sieve[k]:
            sieve[k * k::k] = False
    return [int(x) for x in np.flatnonzero(sieve)]


def prime_form(D: int, ell: int) -> QuadForm | None:
    """Reduced form (ell, b, c) for a prime ell not inert in Q(sqrt D), else None."""
    for b in range(ell + 1 if ell == 2 else ell):
        bb = b if (b - D) % 2 == 0 else b + ell
        if (bb * bb - D) % (4 * ell) == 0:
            return reduce_form(QuadForm(ell, bb, (bb * bb - D) // (4 * ell)))
    return None


def prime_forms(D: int) -> list[QuadForm]:
    """Prime forms of norm ell <= sqrt(|D|/3); they generate the class group."""
    out = []
    for ell in _primes_upto(math.isqrt(-D // 3)):
        f = prime_form(D, ell)
        if f is not None:
            out.append(f)
    return out


# ---- abelian p-groups ---------------------------------------------------------------

def v_p(n: int, p: int) -> int:
    k = 0
    while n and n % p == 0:
        n //= p
        k += 1
    return k


def partition_from_counts(p: int, counts: Sequence[int]) -> tuple[int, ...]:
    """Partition from t_k = #{x : x^(p^k) = 1}, k = 0, 1, ..."""
    from .group import partition_from_torsion_counts

    return partition_from_torsion_counts(p, list(counts))


def p_sylow_type(G: FormClassGroup, p: int) -> tuple[int, ...]:
    """Partition of the p-Sylow subgroup (empty when p does not divide h)."""
    check_odd_prime(p)
    h = G.order
    v = v_p(h, p)
    if v == 0:
        return ()
    cof = h // p ** v
    syl = {G.pow(i, cof) for i in range(h)}
    if len(syl) != p ** v:
        raise AssertionError("Sylow subgroup has the wrong order")
    counts = [1]
    cur = {s: s for s in syl}
    while counts[-1] < p ** v:
        cur = {s: G.pow(x, p) for s, x in cur.items()}
        counts.append(sum(1 for x in cur.values() if x == G.identity))
    return partition_from_counts(p, counts)


def sylow_type_from_generators(D: int, h: int, p: int) -> tuple[int, ...]:
    """p-Sylow partition without listing all forms: project prime forms into the Sylow subgroup."""
    v = v_p(h, p)
    if v == 0:
        return ()
    target = p ** v
    cof = h // target
    one = principal_form(D)
    sub = {one}
    for g in prime_forms(D):
        y = power(g, cof)
        if y in sub:
            continue
        # enlarge the subgroup by <y>
        cyc = [one]
        z = y
        while z != one:
            cyc.append(z)
            z = compose(z, y)
        sub = {compose(s, c) for s in sub for c in cyc}
        if len(sub) == target:
            break
    if len(sub) != target:
        raise AssertionError(f"Sylow subgroup for D={D} has order {len(sub)}, expected {target}")
    counts = [1]
    cur = {s: s for s in sub}
    while counts[-1] < target:
        cur = {s: power(x, p) for s, x in cur.items()}
        counts.append(sum(1 for x in cur.values() if x == one))
    return partition_from_counts(p, counts)


def abelian_type_of(p: int, moduli: Sequence[int]) -> tuple[int, ...]:
    """Oracle: partition of the p-part of Z/m_1 x ... x Z/m_k by direct element counting."""
    elems = list(itertools.product(*[range(m) for m in moduli]))
    psub = [x for x in elems if _is_p_power(_order(x, moduli), p)]
    counts = [1]
    k = 1
    while counts[-1] < len(psub):
        counts.append(sum(1 for x in psub if (p ** k) % _order(x, moduli) == 0))
        k += 1
    return partition_from_counts(p, counts)


def _order(x: Sequence[int], moduli: Sequence[int]) -> int:
    out = 1
    for xi, m in zip(x, moduli):
        o = m // math.gcd(xi, m)
        out = out * o // math.gcd(out, o)
    return out


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def aut_order_abelian(p: int, partition: Sequence[int]) -> int:
    """|Aut(A)| for A = sum Z/p^(lambda_k), by the Hillar-Rhea closed formula."""
    lam = sorted((int(x) for x in partition), reverse=True)
    if not lam:
        return 1
    lam_asc = sorted(lam)
    k = len(lam)
    # d_j = max{l : lam_l = lam_j}, c_j = min{l : lam_l = lam_j} with 1-based ascending indices
    d = [max(l + 1 for l in range(k) if lam_asc[l] == lam_asc[j]) for j in range(k)]
    c = [min(l + 1 for l in range(k) if lam_asc[l] == lam_asc[j]) for j in range(k)]
    prod = 1
    for j in range(k):
        prod *= p ** d[j] - p ** j
    e1 = sum(lam_asc[j] * (k - d[j]) for j in range(k))
    e2 = sum((lam_asc[j] - 1) * (k - c[j] + 1) for j in range(k))
    return prod * p ** e1 * p ** e2


def aut_order_abelian_bruteforce(p: int, partition: Sequence[int]) -> int:
    """|Aut(A)| by counting generator-image tuples that give automorphisms (small A only)."""
    mods = [p ** x for x in partition]
    if not mods:
        return 1
    elems = list(itertools.product(*[range(m) for m in mods]))
    size = len(elems)
    if size > 729:
        raise ValueError("group too large for exhaustive automorphism counting")
    k = len(mods)
    # generator e_i has order mods[i]; image must have order dividing mods[i]
    cands = [[x for x in elems if all((mods[i] * xi) % m == 0 for xi, m in zip(x, mods))] for i in range(k)]
    count = 0
    for imgs in itertools.product(*cands):
        span = set()
        for coeffs in itertools.product(*[range(m) for m in mods]):
            span.add(tuple(sum(c * img[t] for c, img in zip(coeffs, imgs)) % mods[t] for t in range(k)))
        if len(span) == size:
            count += 1
    return count


# ---- survey -------------------------------------------------------------------------

def _survey_chunk(args) -> list[tuple[int, int, tuple[int, ...]]]:
    p, items = args
    return [(D, h, sylow_type_from_generators(D, h, p)) for D, h in items]


@dataclass
class SurveyType:
    partition: tuple[int, ...]
    count: int
    frequency: float
    prediction: float


@dataclass
class SurveyReport:
    p: int
    X: int
    filters: dict
    types: list[SurveyType]
    rows: list[tuple[int, int, tuple[int, ...]]]
    excluded_types: list[SurveyType] | None = None

    def to_json(self) -> dict:
        def enc(ts):
            return [{"partition": list(t.partition), "count": t.count, "frequency": t.frequency,
                     "prediction": t.prediction} for t in ts]
        out = {"p": self.p, "X": self.X, "filters": self.filters, "types": enc(self.types)}
        if self.excluded_types is not None:
            key = "types_all" if self.filters.get("exclude_p_divides_D") else "types_excluding_p_divides_D"
            out[key] = enc(self.excluded_types)
        return out

    def csv_lines(self) -> list[str]:
        lines = ["discriminant,h,partition"]
        for D, h, part in self.rows:
            lines.append(f"{D},{h}," + " ".join(str(x) for x in part))
        return lines


def _tally(p: int, rows, cinf: float) -> list[SurveyType]:
    cnt = Counter(part for _, _, part in rows)
    total = len(rows)
    out = []
    for part, c in sorted(cnt.items(), key=lambda kv: (-kv[1], kv[0])):
        out.append(SurveyType(part, c, c / total if total else 0.0, cinf / aut_order_abelian(p, part)))
    return out


def survey(p: int, X: int, exclude_p_divides_D: bool = False, residue_filter: tuple[int, int] | None = None,
           workers: int = 1, chunk: int = 2000) -> SurveyReport:
    """p-Sylow types of class groups over negative fundamental D with |D| <= X.

    Both tallies (all D, and D with p not dividing D) are reported; the
    `exclude_p_divides_D` flag selects which one is the primary `types` list.
    `residue_filter=(r, M)` keeps only D = r mod M.
    """
    check_odd_prime(p)
    hs = class_numbers_upto(X)
    items = sorted(hs.items(), reverse=True)
    if residue_filter is not None:
        r, M = residue_filter
        items = [(D, h) for D, h in items if (D - r) % M == 0]
    jobs = [(p, items[i:i + chunk]) for i in range(0, len(items), chunk)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_survey_chunk, jobs))
    else:
        parts = [_survey_chunk(j) for j in jobs]
    rows = [r for part in parts for r in part]
    cinf = c_infinity(p, 1e-12)[0]
    all_types = _tally(p, rows, cinf)
    coprime = _tally(p, [r for r in rows if r[0] % p], cinf)
    filters = {"exclude_p_divides_D": exclude_p_divides_D,
               "residue_filter": list(residue_filter) if residue_filter else None}
    if exclude_p_divides_D:
        return SurveyReport(p, X, filters, coprime, [r for r in rows if r[0] % p], all_types)
    return SurveyReport(p, X, filters, all_types, rows, coprime)


def cinf_reference(p: int, terms: int = 200) -> float:
    """Independent plain product of the first `terms` factors (1 - p^-i)."""
    out = 1.0
    for i in range(1, terms + 1):
        out *= 1.0 - float(p) ** (-i)
    return out
