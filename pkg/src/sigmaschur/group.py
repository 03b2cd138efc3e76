"""Finite sigma-p-groups given by full multiplication tables.

Elements are indices 0..order-1 with 0 the identity. Subgroups are boolean
membership masks wrapped in :class:`Subgroup`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class GroupError(ValueError):
    """Invalid input to a group operation (not normal, not sigma-invariant, ...)."""


def _log_p(p: int, n: int) -> int:
    k = 0
    while n > 1:
        if n % p:
            raise ValueError(f"{n} is not a power of {p}")
        n //= p
        k += 1
    return k


def partition_from_torsion_counts(p: int, counts: Sequence[int]) -> tuple[int, ...]:
    """Partition of an abelian p-group from t_k = #{x : x^(p^k) = 1}, k = 0, 1, ...

    The number of cyclic factors of exponent >= k is log_p(t_k / t_{k-1}).
    """
    ge = []
    for k in range(1, len(counts)):
        r = _log_p(p, counts[k] // counts[k - 1])
        if r == 0:
            break
        ge.append(r)
    # ge[k-1] = #{parts >= k}; convert to the conjugate partition
    parts = []
    for k in range(len(ge)):
        nxt = ge[k + 1] if k + 1 < len(ge) else 0
        parts.extend([k + 1] * (ge[k] - nxt))
    return tuple(sorted(parts, reverse=True))


class Subgroup:
    """Subgroup of a SigmaGroup stored as a membership mask."""

    __slots__ = ("mask", "_elements")

    def __init__(self, mask: np.ndarray):
        self.mask = np.asarray(mask, dtype=bool)
        self.mask.setflags(write=False)
        self._elements = None

    @property
    def elements(self) -> np.ndarray:
        if self._elements is None:
            self._elements = np.flatnonzero(self.mask)
        return self._elements

    @property
    def order(self) -> int:
        return int(self.mask.sum())

    def __len__(self) -> int:
        return self.order

    def __contains__(self, a) -> bool:
        return bool(self.mask[a])

    def key(self) -> bytes:
        return np.packbits(self.mask).tobytes()

    def __eq__(self, other) -> bool:
        return isinstance(other, Subgroup) and np.array_equal(self.mask, other.mask)

    def __hash__(self) -> int:
        return hash(self.key())

    def issubset(self, other: "Subgroup") -> bool:
        return not (self.mask & ~other.mask).any()

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order})"


@dataclass(eq=False)
class SigmaGroup:
    """Finite p-group with an involutive automorphism sigma, as index tables."""

    p: int
    mul: np.ndarray
    sigma: np.ndarray
    generators: list[int]
    name: str = ""
    magnus: object = field(default=None, repr=False)
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.mul = np.ascontiguousarray(self.mul)
        self.sigma = np.asarray(self.sigma, dtype=np.int64)
        self.generators = [int(g) for g in self.generators]

    # ---- basic tables -------------------------------------------------
    @property
    def order(self) -> int:
        return self.mul.shape[0]

    def __len__(self) -> int:
        return self.order

    @cached_property
    def inv(self) -> np.ndarray:
        return np.argmax(self.mul == 0, axis=1).astype(np.int64)

    @cached_property
    def arange(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def m(self, a, b):
        return self.mul[a, b]

    def power(self, elems, e: int) -> np.ndarray:
        """Elementwise e-th powers (e >= 0) of an index array."""
        base = np.asarray(elems, dtype=np.int64)
        out = np.zeros_like(base)
        while e:
            if e & 1:
                out = self.mul[out, base].astype(np.int64)
            base = self.mul[base, base].astype(np.int64)
            e >>= 1
        return out

    @cached_property
    def element_orders(self) -> np.ndarray:
        orders = np.ones(self.order, dtype=np.int64)
        cur = self.arange.copy()
        pending = cur != 0
        while pending.any():
            orders[pending] *= self.p
            cur = self.power(cur, self.p)
            pending = cur != 0
        return orders

    @cached_property
    def conj_by_gen(self) -> list[np.ndarray]:
        """For each generator g, the map a -> g a g^-1."""
        out = []
        for g in self.generators:
            out.append(self.mul[self.mul[g, :], self.inv[g]].astype(np.int64))
        return out

    def conjugate(self, g: int, a):
        return self.mul[self.mul[g, a], self.inv[g]]

    def commutator(self, a, b):
        """[a, b] = a b a^-1 b^-1 (vectorized)."""
        return self.mul[self.mul[self.mul[a, b], self.inv[a]], self.inv[b]]

    # ---- sigma parts -----------------------------------------------------
    @cached_property
    def parity(self) -> np.ndarray:
        """+1 for even, -1 for odd, 0 for neither (both only for the identity)."""
        even = self.sigma == self.arange
        odd = self.sigma == self.inv
        out = np.zeros(self.order, dtype=np.int64)
        out[even] = 1
        out[odd & ~even] = -1
        return out

    @cached_property
    def even_mask(self) -> np.ndarray:
        return self.sigma == self.arange

    @cached_property
    def odd_mask(self) -> np.ndarray:
        return self.sigma == self.inv

    @cached_property
    def odd_elements(self) -> np.ndarray:
        return np.flatnonzero(self.odd_mask)

    @cached_property
    def even_elements(self) -> np.ndarray:
        return np.flatnonzero(self.even_mask)

    # ---- validation ----------------------------------------------------------
    def validate(self) -> None:
        n = self.order
        mul = self.mul.astype(np.int64)
        if (mul[0] != self.arange).any() or (mul[:, 0] != self.arange).any():
            raise GroupError("index 0 is not the identity")
        for row in (mul, mul.T):
            srt = np.sort(row, axis=1)
            if (srt != self.arange).any():
                raise GroupError("table is not a Latin square")
        if n <= 729:
            lhs = mul[mul[:, :, None], self.arange[None, None, :]]
            rhs = mul[self.arange[:, None, None], mul[None, :, :]]
            if (lhs != rhs).any():
                raise GroupError("multiplication is not associative")
        s = self.sigma
        if (s[s] != self.arange).any():
            raise GroupError("sigma is not an involution")
        if (s[mul] != mul[s[:, None], s[None, :]]).any():
            raise GroupError("sigma is not a homomorphism")
        if subgroup_generated(self, self.generators).order != n:
            raise GroupError("generators do not generate the group")
        _log_p(self.p, n)

    def full(self) -> Subgroup:
        return Subgroup(np.ones(self.order, dtype=bool))

    def trivial(self) -> Subgroup:
        m = np.zeros(self.order, dtype=bool)
        m[0] = True
        return Subgroup(m)

    def __repr__(self) -> str:
        return f"SigmaGroup({self.name or 'G'}, p={self.p}, order={self.order})"

    # cached derived data used by several modules
    @cached_property
    def lower_central_series(self) -> list[Subgroup]:
        series = [self.full()]
        while series[-1].order > 1:
            nxt = commutator_subgroup(self, series[-1])
            if nxt == series[-1]:
                break
            series.append(nxt)
        return series

    @cached_property
    def frattini(self) -> Subgroup:
        return dimension_subgroup(self, 2)

    @cached_property
    def dimension_series(self) -> list[Subgroup]:
        """D_1, D_2, ... down to and including the first trivial term."""
        out = [self.full()]
        i = 2
        while out[-1].order > 1:
            out.append(dimension_subgroup(self, i))
            i += 1
        return out


def trivial_group(p: int) -> SigmaGroup:
    return SigmaGroup(p=p, mul=np.zeros((1, 1), dtype=np.int32), sigma=np.zeros(1), generators=[], name="1")


def cyclic_group(p: int, order: int, sigma_exponent: int = -1) -> SigmaGroup:
    """Z/order with sigma acting as multiplication by sigma_exponent (+1 or -1)."""
    a = np.arange(order)
    mul = (a[:, None] + a[None, :]) % order
    sig = (sigma_exponent * a) % order
    return SigmaGroup(p=p, mul=mul.astype(np.int32), sigma=sig, generators=[1] if order > 1 else [],
                      name=f"Z/{order}")


def abelian_group(p: int, moduli: Sequence[int], sigma_signs: Sequence[int] | None = None) -> SigmaGroup:
    """Direct product of cyclic groups Z/m_k; sigma acts on factor k by sigma_signs[k]."""
    moduli = list(moduli)
    signs = list(sigma_signs) if sigma_signs is not None else [-1] * len(moduli)
    if not moduli:
        return trivial_group(p)
    coords = np.array(np.meshgrid(*[np.arange(m) for m in moduli], indexing="ij")).reshape(len(moduli), -1).T
    mods = np.array(moduli)
    weights = np.array([int(np.prod(moduli[k + 1:])) for k in range(len(moduli))])

    def encode(c):
        return (c % mods) @ weights

    n = coords.shape[0]
    mul = encode(coords[:, None, :] + coords[None, :, :])
    sig = encode(coords * np.array(signs))
    gens = []
    for k in range(len(moduli)):
        e = np.zeros(len(moduli), dtype=np.int64)
        e[k] = 1
        gens.append(int(encode(e)))
    return SigmaGroup(p=p, mul=mul.astype(np.int32), sigma=sig, generators=gens,
                      name="x".join(f"Z/{m}" for m in moduli))


# ---- subgroup machinery ---------------------------------------------------------

def subgroup_generated(G: SigmaGroup, gens: Iterable[int], start: np.ndarray | None = None,
                       start_gens: Iterable[int] | None = None) -> Subgroup:
    """Subgroup generated by `gens` together with the subgroup `start`.

    If `start_gens` (generators of `start`) is given, the closure only
    multiplies the old elements by the new generators in the first round.
    """
    new = np.unique(np.asarray(list(gens), dtype=np.int64))
    new = new[new != 0]
    if start is None:
        mask = np.zeros(G.order, dtype=bool)
        mask[0] = True
        old = np.zeros(0, dtype=np.int64)
    else:
        mask = np.array(start, dtype=bool)
        mask[0] = True
        if start_gens is None:
            old = np.flatnonzero(mask)
        else:
            old = np.asarray(list(start_gens), dtype=np.int64)
        new = new[~mask[new]] if start_gens is None else new
    if new.size == 0:
        return Subgroup(mask)
    allg = np.unique(np.concatenate([old, new]))
    allg = allg[allg != 0]
    frontier = np.flatnonzero(mask)
    step = new
    while frontier.size:
        prod = G.mul[frontier[:, None], step[None, :]].ravel()
        fresh = prod[~mask[prod]]
        if fresh.size == 0:
            break
        fresh = np.unique(fresh)
        mask[fresh] = True
        frontier = fresh.astype(np.int64)
        step = allg
    return Subgroup(mask)


def normal_closure(G: SigmaGroup, seeds: Iterable[int]) -> Subgroup:
    """Smallest normal subgroup containing the seeds.

    Keeps a generating set T and adds conjugates of T by the group generators
    until <T> is closed under them.
    """
    gens = np.unique(np.asarray(list(seeds), dtype=np.int64))
    gens = gens[gens != 0]
    if gens.size == 0:
        return G.trivial()
    sub = subgroup_generated(G, gens)
    conj = G.conj_by_gen
    todo = gens
    while True:
        imgs = np.unique(np.concatenate([c[todo] for c in conj])) if conj else todo[:0]
        missing = imgs[~sub.mask[imgs]]
        if missing.size == 0:
            return sub
        sub = subgroup_generated(G, missing, start=sub.mask, start_gens=gens)
        gens = np.concatenate([gens, missing])
        todo = missing


def is_normal(G: SigmaGroup, N: Subgroup) -> bool:
    elems = N.elements
    return all(N.mask[c[elems]].all() for c in G.conj_by_gen)


def is_sigma_invariant(G: SigmaGroup, N: Subgroup) -> bool:
    return bool(N.mask[G.sigma[N.elements]].all())


def product_subgroup(G: SigmaGroup, *subs: Subgroup) -> Subgroup:
    mask = np.zeros(G.order, dtype=bool)
    for s in subs:
        mask |= s.mask
    return subgroup_generated(G, np.flatnonzero(mask))


def commutator_subgroup(G: SigmaGroup, N: Subgroup, H: Subgroup | None = None) -> Subgroup:
    """[N, G] for normal N (or [N, H] with H normal: normal closure of commutators)."""
    if H is None:
        elems = N.elements
        seeds = [G.commutator(elems, g) for g in G.generators]
        if not seeds:
            return G.trivial()
        return normal_closure(G, np.concatenate(seeds))
    a, b = N.elements, H.elements
    comm = G.commutator(a[:, None], b[None, :]).ravel()
    return normal_closure(G, comm)


def power_subgroup(G: SigmaGroup, N: Subgroup, e: int) -> Subgroup:
    """Subgroup generated by e-th powers of elements of N."""
    return subgroup_generated(G, G.power(N.elements, e))


def dimension_subgroup(G: SigmaGroup, i: int) -> Subgroup:
    """Zassenhaus subgroup D_i = prod over j p^k >= i of gamma_j^(p^k)."""
    if i < 1:
        raise ValueError("i must be >= 1")
    if i == 1:
        return G.full()
    gammas = G.lower_central_series
    parts = []
    for j in range(1, i + 1):
        if j > len(gammas):
            break
        q = 1
        while j * q < i:
            q *= G.p
        parts.append(power_subgroup(G, gammas[j - 1], q))
    return product_subgroup(G, *parts)


def parts(G: SigmaGroup) -> tuple[Subgroup, np.ndarray]:
    """(G^+ as a subgroup, G^- as an index array)."""
    return Subgroup(G.even_mask), G.odd_elements


def quotient(G: SigmaGroup, N: Subgroup, check: bool = True) -> tuple[SigmaGroup, np.ndarray]:
    """G/N for a normal sigma-invariant N; returns (quotient, projection index map)."""
    if check:
        if not is_normal(G, N):
            raise GroupError("subgroup is not normal")
        if not is_sigma_invariant(G, N):
            raise GroupError("subgroup is not sigma-invariant")
    ids = np.full(G.order, -1, dtype=np.int64)
    nel = N.elements
    reps = []
    for g in range(G.order):
        if ids[g] < 0:
            ids[G.mul[g, nel]] = len(reps)
            reps.append(g)
    reps = np.array(reps, dtype=np.int64)
    qmul = ids[G.mul[reps[:, None], reps[None, :]]]
    dtype = np.int32
    Q = SigmaGroup(p=G.p, mul=qmul.astype(dtype), sigma=ids[G.sigma[reps]],
                   generators=[int(ids[g]) for g in G.generators],
                   name=f"{G.name or 'G'}/N{N.order}")
    return Q, ids


def relation_rank(G: SigmaGroup, N: Subgroup) -> int:
    """dim_Fp N / (N^p [G, N]): minimal number of normal generators of N."""
    if N.order == 1:
        return 0
    elems = N.elements
    seeds = [G.power(elems, G.p)]
    seeds += [G.commutator(g, elems) for g in G.generators]
    M = normal_closure(G, np.concatenate(seeds))
    return _log_p(G.p, N.order // M.order)


def generator_rank(G: SigmaGroup) -> int:
    """d_G = dim G/Fr(G)."""
    return _log_p(G.p, G.order // G.frattini.order)


def minimal_generators(G: SigmaGroup) -> list[int]:
    """Subset of G.generators forming a basis modulo the Frattini subgroup."""
    chosen: list[int] = []
    cur = G.frattini
    for g in G.generators:
        if not cur.mask[g]:
            chosen.append(g)
            cur = subgroup_generated(G, [g], start=cur.mask)
    if cur.order != G.order:
        raise GroupError("generators do not generate the group")
    return chosen


def is_totally_odd(G: SigmaGroup) -> bool:
    return bool(G.odd_mask.all())


def center(G: SigmaGroup) -> Subgroup:
    mask = np.ones(G.order, dtype=bool)
    for g in G.generators:
        mask &= G.mul[g, :] == G.mul[:, g]
    return Subgroup(mask)


# ---- conjugacy --------------------------------------------------------------

def conjugacy_class(G: SigmaGroup, a: int) -> np.ndarray:
    return np.unique(G.mul[G.mul[G.arange, a], G.inv])


@dataclass
class _ClassData:
    labels: np.ndarray
    sizes: np.ndarray


def conjugacy_classes(G: SigmaGroup) -> _ClassData:
    labels = np.full(G.order, -1, dtype=np.int64)
    sizes = []
    for a in range(G.order):
        if labels[a] < 0:
            cl = conjugacy_class(G, a)
            labels[cl] = len(sizes)
            sizes.append(cl.size)
    return _ClassData(labels, np.array(sizes, dtype=np.int64))


def twisted_class(G: SigmaGroup, a: int) -> np.ndarray:
    """Elements b with b*sigma conjugate to a*sigma under G: {c a sigma(c)^-1}."""
    return np.unique(G.mul[G.mul[G.arange, a], G.inv[G.sigma]])


def even_sigma_representative(G: SigmaGroup, a: int) -> int:
    """Some b in G^+ with a*sigma conjugate to b*sigma in G x| {1, sigma}."""
    cand = twisted_class(G, a)
    hits = cand[G.even_mask[cand]]
    if hits.size == 0:
        raise AssertionError("no even representative found")
    if G.even_mask[a]:
        return int(a)
    return int(hits[0])


def odd_even_conjugacy_representative(G: SigmaGroup, a: int, eps: int) -> int:
    """b in G^eps conjugate to a, given sigma(a) ~ a^eps."""
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    cl = conjugacy_class(G, a)
    target = a if eps == 1 else int(G.inv[a])
    if not np.isin(G.sigma[a], conjugacy_class(G, target)):
        raise GroupError("precondition sigma(a) ~ a^eps does not hold")
    mask = G.even_mask if eps == 1 else G.odd_mask
    if mask[a]:
        return int(a)
    hits = cl[mask[cl]]
    if hits.size == 0:
        raise AssertionError("no representative of the requested parity")
    return int(hits[0])


def even_conjugation_orbit(G: SigmaGroup, b: int) -> np.ndarray:
    ev = G.even_elements
    return np.unique(G.mul[G.mul[ev, b], G.inv[ev]])


def torsion_counts(G: SigmaGroup, elems: np.ndarray) -> list[int]:
    """t_k = #{x in elems : x^(p^k) = 1} until the count stops growing (elems a subgroup)."""
    elems = np.asarray(elems, dtype=np.int64)
    counts = [1]
    total = elems.size
    while counts[-1] < total:
        counts.append(int((G.element_orders[elems] <= G.p ** len(counts)).sum()))
    return counts


def abelian_partition(G: SigmaGroup, elems: np.ndarray | None = None) -> tuple[int, ...]:
    """Partition of the abelian group formed by `elems` (default: all of G)."""
    elems = G.arange if elems is None else elems
    return partition_from_torsion_counts(G.p, torsion_counts(G, elems))


def zassenhaus_depths(G: SigmaGroup) -> np.ndarray:
    """For each element, the largest i with a in D_i(G) (0 for the identity)."""
    out = np.zeros(G.order, dtype=np.int64)
    for i, D in enumerate(G.dimension_series, start=1):
        out[D.mask] = i
    out[0] = 0
    return out


# ---- Zassenhaus type --------------------------------------------------------------

def relation_subgroup(G: SigmaGroup, relations: Sequence[int]) -> Subgroup:
    """N_r: normal closure of the relation images."""
    return normal_closure(G, [int(r) for r in relations])


def zassenhaus_type(p: int, n: int, relations, max_depth: int,
                    size_cap: int | None = None) -> tuple[int | None, ...]:
    """Zassenhaus type (d_1, ..., d_n) from the jumps of m_i, i = 2..max_depth.

    m_i = relation_rank(F_{n,i}, N_r D_i / D_i) and #{j : d_j < i} = m_i.
    Entries not resolved by max_depth are None (meaning ">= max_depth").
    """
    from .magnus import DEFAULT_SIZE_CAP, FreeWord, enumerate_group

    words = [w if isinstance(w, FreeWord) else FreeWord(tuple(w)) for w in relations]
    if len(words) != n:
        raise ValueError(f"expected {n} relations, got {len(words)}")
    for w in words:
        w.check_rank(n)
        if any(s % p for s in w.exponent_sums(n)):
            raise GroupError(f"relation {w} is not in the Frattini subgroup")
    if max_depth < 2:
        raise ValueError("max_depth must be >= 2")
    cap = DEFAULT_SIZE_CAP if size_cap is None else size_cap
    G_top = enumerate_group(p, n, max_depth, cap)
    for w in words:
        r = G_top.magnus.word_index(w)
        if not G_top.odd_mask[r]:
            raise GroupError(f"relation {w} is not odd")
    ms = [0]
    for i in range(2, max_depth + 1):
        G = G_top if i == max_depth else enumerate_group(p, n, i, cap)
        N = relation_subgroup(G, [G.magnus.word_index(w) for w in words])
        ms.append(relation_rank(G, N))
    dtype: list[int | None] = []
    for i in range(2, max_depth + 1):
        jump = ms[i - 1] - ms[i - 2]
        if jump < 0:
            raise AssertionError("m_i decreased")
        dtype.extend([i - 1] * jump)
    dtype.extend([None] * (n - len(dtype)))
    return tuple(dtype)


# ---- structural identities of sigma-groups --------------------------------------

def check_fibers(G: SigmaGroup, N: Subgroup) -> bool:
    """G^eps -> (G/N)^eps is onto with all fibers of size |N^eps|, for eps = +1, -1."""
    Q, proj = quotient(G, N)
    for gm, qm, nm in ((G.even_mask, Q.even_mask, G.even_mask[N.elements]),
                       (G.odd_mask, Q.odd_mask, G.odd_mask[N.elements])):
        img = proj[np.flatnonzero(gm)]
        if not qm[img].all():
            return False
        fib = np.bincount(img, minlength=Q.order)[qm]
        if (fib != int(nm.sum())).any():
            return False
    return True


def check_product_bijection(G: SigmaGroup) -> bool:
    """(a, b) -> ab is a bijection G^+ x G^- -> G."""
    prods = G.mul[G.even_elements[:, None], G.odd_elements[None, :]].ravel()
    return prods.size == G.order and np.unique(prods).size == G.order


def check_conjugacy_representatives(G: SigmaGroup) -> bool:
    """Whenever sigma(a) ~ a^eps, the class of a meets G^eps in a single G^+-orbit."""
    data = conjugacy_classes(G)
    seen = set()
    for a in range(G.order):
        c = int(data.labels[a])
        if c in seen:
            continue
        seen.add(c)
        members = np.flatnonzero(data.labels == c)
        for eps, mask in ((1, G.even_mask), (-1, G.odd_mask)):
            target = a if eps == 1 else int(G.inv[a])
            if data.labels[G.sigma[a]] != data.labels[target]:
                continue
            hits = members[mask[members]]
            if hits.size == 0:
                return False
            if not np.array_equal(even_conjugation_orbit(G, int(hits[0])), hits):
                return False
    return True


def check_twisted_representatives(G: SigmaGroup) -> bool:
    """Every twisted class {c a sigma(c)^-1} meets G^+ in exactly one G^+-orbit."""
    done = np.zeros(G.order, dtype=bool)
    for a in range(G.order):
        if done[a]:
            continue
        tc = twisted_class(G, a)
        done[tc] = True
        hits = tc[G.even_mask[tc]]
        if hits.size == 0:
            return False
        if not np.array_equal(even_conjugation_orbit(G, int(hits[0])), hits):
            return False
    return True
