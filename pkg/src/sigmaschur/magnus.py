"""Free groups mod dimension subgroups, via the truncated Magnus embedding.

x_j maps to 1 + X_j in the free associative F_p-algebra on X_1..X_n, truncated
in degrees >= depth. The kernel of this representation on the free pro-p group
is exactly D_depth, so the unit group generated by the 1 + X_j is F_n / D_depth.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .fp import check_odd_prime, witt_graded_dims


class CapExceeded(RuntimeError):
    """Raised when a group would exceed the configured size cap."""


DEFAULT_SIZE_CAP = 10 ** 6


@dataclass(frozen=True)
class FreeWord:
    """Word in x_1..x_n: letter j means x_j, -j means x_j^-1."""

    letters: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        if any(x == 0 for x in self.letters):
            raise ValueError("generator index 0 is not allowed")

    @classmethod
    def parse(cls, text: str) -> "FreeWord":
        try:
            return cls(tuple(int(tok) for tok in text.split()))
        except ValueError as exc:
            raise ValueError(f"malformed word {text!r}: {exc}") from None

    def check_rank(self, n: int) -> None:
        bad = [x for x in self.letters if abs(x) > n]
        if bad:
            raise ValueError(f"generator index {bad[0]} out of range for n = {n}")

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple(-x for x in reversed(self.letters)))

    def sigma(self) -> "FreeWord":
        return FreeWord(tuple(-x for x in self.letters))

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(self.letters + other.letters)

    def __pow__(self, e: int) -> "FreeWord":
        base = self if e >= 0 else self.inverse()
        return FreeWord(base.letters * abs(e))

    def exponent_sums(self, n: int) -> list[int]:
        out = [0] * n
        for x in self.letters:
            out[abs(x) - 1] += 1 if x > 0 else -1
        return out

    def __str__(self) -> str:
        return " ".join(str(x) for x in self.letters)


class _Layout:
    """Monomial indexing: degree blocks, base-n digits inside a block."""

    def __init__(self, n: int, depth: int):
        self.n = n
        self.depth = depth
        self.offsets = [0]
        for d in range(depth):
            self.offsets.append(self.offsets[-1] + n ** d)
        self.size = self.offsets[-1]
        # append[j][k] = index of monomial k * X_{j+1}, or -1 when degree overflows
        self.append = np.full((max(n, 1), self.size), -1, dtype=np.int64)
        for d in range(depth - 1):
            lo, hi = self.offsets[d], self.offsets[d + 1]
            base = np.arange(hi - lo, dtype=np.int64) * n
            for j in range(n):
                self.append[j, lo:hi] = self.offsets[d + 1] + base + j

    def word_of(self, index: int) -> tuple[int, ...]:
        d = max(k for k in range(self.depth) if self.offsets[k] <= index)
        code = index - self.offsets[d]
        letters = []
        for _ in range(d):
            code, r = divmod(code, self.n)
            letters.append(r + 1)
        return tuple(reversed(letters))

    def index_of(self, word: Sequence[int]) -> int:
        code = 0
        for j in word:
            code = code * self.n + (j - 1)
        return self.offsets[len(word)] + code


@lru_cache(maxsize=None)
def _layout(n: int, depth: int) -> _Layout:
    return _Layout(n, depth)


def _mul_vec(p: int, lay: _Layout, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(lay.size, dtype=np.int64)
    off = lay.offsets
    for da in range(lay.depth):
        blk_a = a[off[da]:off[da + 1]]
        if not blk_a.any():
            continue
        for db in range(lay.depth - da):
            blk_b = b[off[db]:off[db + 1]]
            if not blk_b.any():
                continue
            out[off[da + db]:off[da + db + 1]] += np.outer(blk_a, blk_b).ravel()
    return out % p


def _right_gen(p: int, lay: _Layout, v: np.ndarray, j: int, sign: int) -> np.ndarray:
    """v * (1 + X_j)^sign for j in 1..n."""
    tgt = lay.append[j - 1]
    ok = tgt >= 0
    if sign > 0:
        out = v.copy()
        np.add.at(out, tgt[ok], v[ok])
        return out % p
    out = v.copy()
    term = v
    for _ in range(lay.depth - 1):
        shifted = np.zeros_like(term)
        shifted[tgt[ok]] = -term[ok]
        term = shifted % p
        if not term.any():
            break
        out = out + term
    return out % p


class TruncatedElement:
    """A unit 1 + (higher terms) of the truncated free algebra over F_p."""

    __slots__ = ("p", "n", "depth", "_vec", "_key")

    def __init__(self, p: int, n: int, depth: int, vec: np.ndarray):
        self.p, self.n, self.depth = p, n, depth
        v = np.asarray(vec, dtype=np.int64) % p
        if v[0] != 1:
            raise ValueError("constant term of a unit in the group image must be 1")
        v.setflags(write=False)
        self._vec = v
        self._key = None

    @classmethod
    def one(cls, p: int, n: int, depth: int) -> "TruncatedElement":
        v = np.zeros(_layout(n, depth).size, dtype=np.int64)
        v[0] = 1
        return cls(p, n, depth, v)

    @property
    def vec(self) -> np.ndarray:
        return self._vec

    @property
    def coeffs(self) -> dict[tuple[int, ...], int]:
        lay = _layout(self.n, self.depth)
        return {lay.word_of(i): int(c) for i, c in enumerate(self._vec) if c}

    def key(self) -> bytes:
        if self._key is None:
            self._key = self._vec.astype(np.uint32 if self.p < 2 ** 32 else np.int64).tobytes()
        return self._key

    def _same_ring(self, other: "TruncatedElement") -> None:
        if (self.p, self.n, self.depth) != (other.p, other.n, other.depth):
            raise ValueError("elements live in different truncated algebras")

    def __mul__(self, other: "TruncatedElement") -> "TruncatedElement":
        self._same_ring(other)
        return TruncatedElement(self.p, self.n, self.depth,
                                _mul_vec(self.p, _layout(self.n, self.depth), self._vec, other._vec))

    def inverse(self) -> "TruncatedElement":
        lay = _layout(self.n, self.depth)
        y = self._vec.copy()
        y[0] = 0
        neg_y = (-y) % self.p
        out = np.zeros_like(y)
        out[0] = 1
        term = out.copy()
        for _ in range(self.depth - 1):
            term = _mul_vec(self.p, lay, term, neg_y)
            out = (out + term) % self.p
        return TruncatedElement(self.p, self.n, self.depth, out)

    def sigma(self) -> "TruncatedElement":
        mat = sigma_matrix(self.p, self.n, self.depth)
        return TruncatedElement(self.p, self.n, self.depth, (self._vec @ mat) % self.p)

    def truncate(self, depth: int) -> "TruncatedElement":
        if depth > self.depth:
            raise ValueError("can only truncate to a smaller depth")
        lay = _layout(self.n, depth)
        return TruncatedElement(self.p, self.n, depth, self._vec[:lay.size])

    def __eq__(self, other):
        return isinstance(other, TruncatedElement) and (self.p, self.n, self.depth) == (
            other.p, other.n, other.depth) and np.array_equal(self._vec, other._vec)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self) -> str:
        terms = []
        for word, c in sorted(self.coeffs.items(), key=lambda kv: (len(kv[0]), kv[0])):
            mono = "".join(f"X{j}" for j in word) or "1"
            terms.append(mono if c == 1 else f"{c}*{mono}")
        return f"TruncatedElement(p={self.p}, depth={self.depth}: " + " + ".join(terms) + ")"


def eval_word(word: FreeWord | Iterable[int], p: int, n: int, depth: int) -> TruncatedElement:
    """Image of a word under x_j -> 1 + X_j in the algebra truncated at `depth`."""
    check_odd_prime(p)
    if not isinstance(word, FreeWord):
        word = FreeWord(tuple(word))
    word.check_rank(n)
    lay = _layout(n, depth)
    v = np.zeros(lay.size, dtype=np.int64)
    v[0] = 1
    for x in word.letters:
        v = _right_gen(p, lay, v, abs(x), 1 if x > 0 else -1)
    return TruncatedElement(p, n, depth, v)


@lru_cache(maxsize=None)
def sigma_matrix(p: int, n: int, depth: int) -> np.ndarray:
    """Matrix of the algebra endomorphism X_j -> (1 + X_j)^-1 - 1 (row-vector convention)."""
    lay = _layout(n, depth)
    mat = np.zeros((lay.size, lay.size), dtype=np.int64)
    mat[0, 0] = 1
    ys = []
    for j in range(1, n + 1):
        y = eval_word(FreeWord((-j,)), p, n, depth).vec.copy()
        y[0] = 0
        ys.append(y)
    images = {0: mat[0].copy()}
    for d in range(1, depth):
        for idx in range(lay.offsets[d], lay.offsets[d + 1]):
            word = lay.word_of(idx)
            prefix = lay.index_of(word[:-1])
            images[idx] = _mul_vec(p, lay, images[prefix], ys[word[-1] - 1])
            mat[idx] = images[idx]
    mat.setflags(write=False)
    return mat


def sigma(e: TruncatedElement) -> TruncatedElement:
    return e.sigma()


def is_odd(e: TruncatedElement) -> bool:
    """True iff sigma(e) * e == 1."""
    prod = e.sigma() * e
    return bool(prod.vec[0] == 1 and not prod.vec[1:].any())


def enumerate_group(p: int, n: int, depth: int, size_cap: int = DEFAULT_SIZE_CAP):
    """Build F_n / D_depth(F_n) as a SigmaGroup by closing {1} under the generator images."""
    from .group import SigmaGroup

    check_odd_prime(p)
    if depth < 2:
        raise ValueError("depth must be >= 2")
    dims = witt_graded_dims(p, n, depth)
    predicted = dims.order
    if predicted > size_cap:
        raise CapExceeded(f"F_{{{n},{depth}}} at p={p} has order {predicted} > cap {size_cap}")
    lay = _layout(n, depth)
    one = np.zeros(lay.size, dtype=np.int64)
    one[0] = 1
    vecs = [one]
    index = {one.tobytes(): 0}
    letters = [s * j for j in range(1, n + 1) for s in (1, -1)]
    right = np.full((len(letters), predicted), -1, dtype=np.int64)
    parent = [-1]
    via = [-1]
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for li, x in enumerate(letters):
            w = _right_gen(p, lay, vecs[a], abs(x), 1 if x > 0 else -1)
            k = w.tobytes()
            b = index.get(k)
            if b is None:
                b = len(vecs)
                if b >= predicted:
                    raise RuntimeError("closure exceeded the predicted order: inconsistent enumeration")
                index[k] = b
                vecs.append(w)
                parent.append(a)
                via.append(li)
                queue.append(b)
            right[li, a] = b
    if len(vecs) != predicted:
        raise RuntimeError(f"closure has {len(vecs)} elements, expected {predicted}")
    order = predicted
    # full table: column b is obtained from column parent(b) by a right generator action
    dtype = np.int32
    mul = np.empty((order, order), dtype=dtype)
    mul[:, 0] = np.arange(order)
    for b in range(1, order):
        mul[:, b] = right[via[b], mul[:, parent[b]]]
    allv = np.stack(vecs)
    sig_vecs = (allv @ sigma_matrix(p, n, depth)) % p
    sig = np.array([index[v.tobytes()] for v in sig_vecs.astype(np.int64)], dtype=np.int64)
    gens = [right[2 * j, 0] for j in range(n)]
    group = SigmaGroup(p=p, mul=mul, sigma=sig, generators=[int(g) for g in gens],
                       name=f"F_{n},{depth}")
    group.magnus = MagnusData(p, n, depth, allv, index)
    return group


@dataclass
class MagnusData:
    """Link between group indices and truncated-algebra coefficient vectors."""

    p: int
    n: int
    depth: int
    vectors: np.ndarray
    index: dict

    def element(self, idx: int) -> TruncatedElement:
        return TruncatedElement(self.p, self.n, self.depth, self.vectors[idx])

    def lookup(self, e: TruncatedElement) -> int:
        return self.index[np.asarray(e.vec, dtype=np.int64).tobytes()]

    def word_index(self, word: FreeWord) -> int:
        return self.lookup(eval_word(word, self.p, self.n, self.depth))
