"""Sigma-isomorphism tests, sigma-automorphism groups and class labels.

Homomorphisms are searched by choosing images for a minimal generating tuple.
Candidate images must share a vector of element invariants with the source
generator; the map is then extended along a breadth-first word tree for a
whole batch of candidates at once and checked against every generator.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .group import (
    SigmaGroup,
    Subgroup,
    abelian_partition,
    commutator_subgroup,
    minimal_generators,
    quotient,
    subgroup_generated,
    zassenhaus_depths,
)
from .magnus import CapExceeded

DEFAULT_AUT_CAP = 3 ** 7
_BATCH = 4096


# ---- invariants -------------------------------------------------------------

def element_invariants(G: SigmaGroup) -> np.ndarray:
    """Per-element invariant rows.

    Columns: order, parity, centralizer size, odd elements in the centralizer,
    Zassenhaus depth, depth of a^p, depth of a*sigma(a), number of p-th roots.
    """
    if "elem_inv" in G.cache:
        return G.cache["elem_inv"]
    depth = zassenhaus_depths(G)
    cent = np.zeros(G.order, dtype=np.int64)
    cent_odd = np.zeros(G.order, dtype=np.int64)
    step = max(1, 2 ** 22 // max(G.order, 1))
    for lo in range(0, G.order, step):
        blk = slice(lo, min(G.order, lo + step))
        comm = G.mul[blk, :] == G.mul[:, blk].T
        cent[blk] = comm.sum(axis=1)
        cent_odd[blk] = comm[:, G.odd_mask].sum(axis=1)
    pw = G.power(G.arange, G.p)
    roots = np.bincount(pw, minlength=G.order)
    tw = G.mul[G.arange, G.sigma]
    inv = np.stack([G.element_orders, G.parity, cent, cent_odd, depth, depth[pw], depth[tw], roots], axis=1)
    G.cache["elem_inv"] = inv
    return inv


@dataclass(frozen=True)
class Fingerprint:
    order: int
    even_order: int
    odd_order: int
    ab_even: tuple[int, ...]
    ab_odd: tuple[int, ...]
    dimension_orders: tuple[int, ...]
    element_profile: tuple[tuple[tuple[int, ...], int], ...] = field(repr=False)

    def serialize(self) -> str:
        prof = hashlib.sha1(repr(self.element_profile).encode()).hexdigest()[:8]
        ab = f"ab+{_fmt(self.ab_even)}-{_fmt(self.ab_odd)}"
        dims = ",".join(str(d) for d in self.dimension_orders)
        return f"{self.order}|+{self.even_order}-{self.odd_order}|{ab}|D{dims}|{prof}"


def _fmt(part: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in part) + ")"


def fingerprint(G: SigmaGroup) -> Fingerprint:
    if "fingerprint" in G.cache:
        return G.cache["fingerprint"]
    comm = commutator_subgroup(G, G.full())
    A, _ = quotient(G, comm, check=False)
    inv = element_invariants(G)
    rows, counts = np.unique(inv, axis=0, return_counts=True)
    profile = tuple((tuple(int(x) for x in r), int(c)) for r, c in zip(rows, counts))
    fp = Fingerprint(
        order=G.order,
        even_order=int(G.even_mask.sum()),
        odd_order=int(G.odd_mask.sum()),
        ab_even=abelian_partition(A, A.even_elements),
        ab_odd=abelian_partition(A, A.odd_elements),
        dimension_orders=tuple(D.order for D in G.dimension_series[1:]),
        element_profile=profile,
    )
    G.cache["fingerprint"] = fp
    return fp


# ---- homomorphism search ----------------------------------------------------

def _word_tree(G: SigmaGroup, gens: Sequence[int]) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """BFS layers (targets, parents, generator slot) with target = parent * gens[slot]."""
    key = ("tree", tuple(gens))
    if key in G.cache:
        return G.cache[key]
    seen = np.zeros(G.order, dtype=bool)
    seen[0] = True
    frontier = np.array([0], dtype=np.int64)
    g = np.asarray(gens, dtype=np.int64)
    layers = []
    while frontier.size and g.size:
        prod = G.mul[frontier[:, None], g[None, :]].astype(np.int64)
        par = np.repeat(frontier, g.size)
        slot = np.tile(np.arange(g.size), frontier.size)
        flat = prod.ravel()
        fresh = ~seen[flat]
        flat, par, slot = flat[fresh], par[fresh], slot[fresh]
        tgt, first = np.unique(flat, return_index=True)
        seen[tgt] = True
        layers.append((tgt, par[first], slot[first]))
        frontier = tgt
    if not seen.all():
        raise ValueError("tuple does not generate the group")
    G.cache[key] = layers
    return layers


def _extend(G: SigmaGroup, H: SigmaGroup, gens: Sequence[int], Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Extend generator images Y (B x d) to maps G -> H; return (maps, ok mask).

    Maps come back element-major (|G| x B). ok[b] holds iff map b is an
    injective sigma-homomorphism.
    """
    N = H.order
    dt = np.int32 if N * N < 2 ** 31 else np.int64
    flat = H.cache.get(("flat", dt))
    if flat is None:
        flat = H.cache[("flat", dt)] = H.mul.ravel().astype(dt)
    B = Y.shape[0]
    Yt = np.ascontiguousarray(Y.T.astype(dt))
    phi = np.zeros((G.order, B), dtype=dt)
    for tgt, par, slot in _word_tree(G, gens):
        phi[tgt] = flat[phi[par] * N + Yt[slot]]
    ok = np.ones(B, dtype=bool)
    for k, g in enumerate(gens):
        ok &= phi[G.sigma[g]] == H.sigma[Yt[k]]
        ok &= (phi[G.mul[:, g]] == flat[phi * N + Yt[k][None, :]]).all(axis=0)
    if G.order > 1:
        ok &= ~(phi[1:] == 0).any(axis=0)
    return phi, ok


def _frattini_coords(H: SigmaGroup) -> tuple[SigmaGroup, np.ndarray]:
    if "frat_q" not in H.cache:
        H.cache["frat_q"] = quotient(H, H.frattini, check=False)
    return H.cache["frat_q"]


def _search(G: SigmaGroup, H: SigmaGroup, first_only: bool, keep_maps: bool) -> Iterator[tuple[np.ndarray, np.ndarray | None]]:
    """Yield (generator images, map or None) for every sigma-isomorphism G -> H."""
    if G.order != H.order:
        return
    gens = minimal_generators(G)
    d = len(gens)
    if d == 0:
        yield np.zeros(0, dtype=np.int64), (np.zeros(1, dtype=np.int64) if keep_maps else None)
        return
    if len(minimal_generators(H)) != d:
        return
    invG, invH = element_invariants(G), element_invariants(H)
    cands = [np.flatnonzero((invH == invG[g]).all(axis=1)) for g in gens]
    if any(c.size == 0 for c in cands):
        return
    Q, proj = _frattini_coords(H)

    def rec(prefix: list[int], span: np.ndarray):
        k = len(prefix)
        pool = cands[k]
        pool = pool[~span[proj[pool]]]
        if k < d - 1:
            for y in pool:
                new_span = subgroup_generated(Q, [proj[y]], start=span).mask.copy()
                yield from rec(prefix + [int(y)], new_span)
            return
        for lo in range(0, pool.size, _BATCH):
            chunk = pool[lo:lo + _BATCH]
            Y = np.empty((chunk.size, d), dtype=np.int64)
            Y[:, :k] = prefix
            Y[:, k] = chunk
            phi, ok = _extend(G, H, gens, Y)
            for b in np.flatnonzero(ok):
                yield Y[b].copy(), (phi[:, b].astype(np.int64) if keep_maps else None)
                if first_only:
                    return

    start = np.zeros(Q.order, dtype=bool)
    start[0] = True
    for res in rec([], start):
        yield res
        if first_only:
            return


def is_sigma_homomorphism(G: SigmaGroup, H: SigmaGroup, phi: np.ndarray) -> bool:
    """Full-table check of phi(ab) = phi(a)phi(b) and phi(sigma a) = sigma phi(a)."""
    phi = np.asarray(phi, dtype=np.int64)
    if phi.shape != (G.order,):
        return False
    if (phi[G.sigma] != H.sigma[phi]).any():
        return False
    step = max(1, 2 ** 22 // max(G.order, 1))
    for lo in range(0, G.order, step):
        blk = slice(lo, min(G.order, lo + step))
        if (phi[G.mul[blk, :]] != H.mul[phi[blk, None], phi[None, :]]).any():
            return False
    return True


def sigma_isomorphic(G: SigmaGroup, H: SigmaGroup) -> np.ndarray | None:
    """A sigma-isomorphism G -> H as an index array, or None if none exists."""
    if G.order != H.order:
        return None
    if G is not H and fingerprint(G) != fingerprint(H):
        return None
    for _, phi in _search(G, H, first_only=True, keep_maps=True):
        if not is_sigma_homomorphism(G, H, phi) or np.unique(phi).size != G.order:
            raise AssertionError("search returned an invalid isomorphism")
        return phi
    return None


@dataclass
class SigmaAutGroup:
    """All sigma-automorphisms, stored as images of a fixed generating tuple."""

    order: int
    generators: tuple[int, ...]
    elements: list[tuple[int, ...]]
    maps: np.ndarray | None = field(default=None, repr=False)


def sigma_aut_group(G: SigmaGroup, cap: int = DEFAULT_AUT_CAP, keep_maps: bool = False) -> SigmaAutGroup:
    if G.order > cap:
        raise CapExceeded(f"group of order {G.order} exceeds the automorphism cap {cap}")
    key = ("aut", keep_maps)
    if key in G.cache:
        return G.cache[key]
    imgs, maps = [], []
    for y, phi in _search(G, G, first_only=False, keep_maps=keep_maps):
        imgs.append(tuple(int(v) for v in y))
        if keep_maps:
            maps.append(phi)
    res = SigmaAutGroup(
        order=len(imgs),
        generators=tuple(minimal_generators(G)),
        elements=imgs,
        maps=np.stack(maps) if keep_maps and maps else None,
    )
    G.cache[key] = res
    if keep_maps:
        G.cache[("aut", False)] = SigmaAutGroup(res.order, res.generators, res.elements)
    return res


def sigma_aut_order(G: SigmaGroup, cap: int = DEFAULT_AUT_CAP) -> int:
    return sigma_aut_group(G, cap).order


def stabilizer_order(G: SigmaGroup, H: Subgroup) -> int:
    """|{phi in Aut_sigma(G) : phi(H) = H}|."""
    maps = sigma_aut_group(G, keep_maps=True).maps
    if maps is None:
        return 0
    return int(H.mask[maps[:, H.elements]].all(axis=1).sum())


# ---- classification ------------------------------------------------------------

class Classifier:
    """Assigns labels 'fingerprint#k' to groups, one label per sigma-isomorphism class.

    Within a fingerprint bucket the index k follows the order in which classes
    are first seen.
    """

    def __init__(self):
        self._buckets: dict[Fingerprint, list[tuple[SigmaGroup, str]]] = {}

    def label(self, G: SigmaGroup) -> str:
        fp = fingerprint(G)
        bucket = self._buckets.setdefault(fp, [])
        for rep, lab in bucket:
            if sigma_isomorphic(G, rep) is not None:
                return lab
        lab = f"{fp.serialize()}#{len(bucket)}"
        bucket.append((G, lab))
        return lab

    def representative(self, label: str) -> SigmaGroup:
        for bucket in self._buckets.values():
            for rep, lab in bucket:
                if lab == label:
                    return rep
        raise KeyError(label)

    def __len__(self) -> int:
        return sum(len(b) for b in self._buckets.values())


def classify(groups: Iterable[SigmaGroup], classifier: Classifier | None = None) -> dict[str, list[int]]:
    """Partition groups into sigma-isomorphism classes: label -> input positions."""
    clf = classifier or Classifier()
    out: dict[str, list[int]] = {}
    for idx, G in enumerate(groups):
        out.setdefault(clf.label(G), []).append(idx)
    return out
