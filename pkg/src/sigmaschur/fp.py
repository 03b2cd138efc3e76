"""Arithmetic over F_p: matrix rank, rank counts and the constants C_k."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_odd_prime(p: int) -> None:
    if not (isinstance(p, int) and p >= 3 and is_prime(p)):
        raise ValueError(f"p must be an odd prime, got {p!r}")


@dataclass(frozen=True)
class FpMatrix:
    """Dense matrix over F_p stored row-major; entries are reduced mod p."""

    p: int
    rows: int
    cols: int
    entries: tuple[int, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entries length must equal rows * cols")
        object.__setattr__(self, "entries", tuple(e % self.p for e in self.entries))

    @classmethod
    def from_rows(cls, p: int, rows: Sequence[Sequence[int]]) -> "FpMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(p, len(rows), ncols, tuple(x for r in rows for x in r))

    def row_list(self) -> list[list[int]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def transpose(self) -> "FpMatrix":
        rl = self.row_list()
        return FpMatrix.from_rows(self.p, [list(col) for col in zip(*rl)]) if rl else FpMatrix(self.p, self.cols, 0, ())


def rank(m: FpMatrix) -> int:
    """Rank over F_p by Gaussian elimination."""
    p = m.p
    work = m.row_list()
    r = 0
    for col in range(m.cols):
        pivot = next((i for i in range(r, m.rows) if work[i][col]), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        inv = pow(work[r][col], -1, p)
        work[r] = [x * inv % p for x in work[r]]
        for i in range(m.rows):
            if i != r and work[i][col]:
                f = work[i][col]
                work[i] = [(a - f * b) % p for a, b in zip(work[i], work[r])]
        r += 1
        if r == m.rows:
            break
    return r


@lru_cache(maxsize=None)
def c_finite(p: int, k: int) -> Fraction:
    """C_k = prod_{i=1..k} (1 - p^-i) as an exact rational."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out = Fraction(1)
    for i in range(1, k + 1):
        out *= 1 - Fraction(1, p ** i)
    return out


def cinf_truncation_index(p: int, tolerance: float) -> int:
    # smallest I with p^-I / (1 - 1/p) < tolerance; the tail's log is below that
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    i = 0
    while Fraction(1, p ** i) / (1 - Fraction(1, p)) >= Fraction(tolerance):
        i += 1
    return i


def c_infinity(p: int, tolerance: float = 1e-12) -> tuple[float, float]:
    """Return (value, error_bound) for C_inf with error_bound < tolerance."""
    idx = cinf_truncation_index(p, tolerance)
    partial = c_finite(p, idx)
    bound = float(partial) * float(Fraction(1, p ** idx) / (1 - Fraction(1, p)))
    return float(partial), bound


def c_constant(p: int, k: int | float | None, tolerance: float = 1e-12) -> Fraction | float:
    """C_k for finite k (exact) or k = inf / None (float within tolerance)."""
    if k is None or (isinstance(k, float) and math.isinf(k)):
        return c_infinity(p, tolerance)[0]
    return c_finite(p, int(k))


def rank_count(p: int, n: int, l: int, k: int) -> int:
    """Number of n x l matrices over F_p of rank k, from the closed form."""
    if min(n, l, k) < 0:
        raise ValueError("dimensions must be non-negative")
    if n < l:
        n, l = l, n
    if k > l:
        raise ValueError(f"rank {k} exceeds min(n, l) = {l}")
    val = Fraction(p) ** ((n + l - k) * k) * c_finite(p, n) * c_finite(p, l) / (
        c_finite(p, n - k) * c_finite(p, l - k) * c_finite(p, k))
    if val.denominator != 1:
        raise ArithmeticError("rank count is not integral")
    return val.numerator


def gl_order(p: int, n: int) -> int:
    return rank_count(p, n, n, n)


def mobius(m: int) -> int:
    result, f = 1, 2
    while f * f <= m:
        if m % f == 0:
            m //= f
            if m % f == 0:
                return 0
            result = -result
        f += 1
    return -result if m > 1 else result


def necklace(m: int, n: int) -> int:
    """Witt number l_m(n): dimension of degree-m part of the free Lie algebra."""
    total = sum(mobius(d) * n ** (m // d) for d in range(1, m + 1) if m % d == 0)
    return total // m


@dataclass(frozen=True)
class GradedDims:
    p: int
    n: int
    dims: tuple[int, ...]

    @property
    def log_order(self) -> int:
        return sum(self.dims)

    @property
    def log_odd_order(self) -> int:
        # sigma acts on grade k by (-1)^k
        return sum(c for k, c in enumerate(self.dims, start=1) if k % 2 == 1)

    @property
    def order(self) -> int:
        return self.p ** self.log_order

    @property
    def odd_order(self) -> int:
        return self.p ** self.log_odd_order


def witt_graded_dims(p: int, n: int, i: int) -> GradedDims:
    """Graded dimensions c_1..c_{i-1} of the free restricted Lie algebra on n letters."""
    check_odd_prime(p)
    if i < 2 or n < 0:
        raise ValueError("need i >= 2 and n >= 0")
    dims = []
    for k in range(1, i):
        c = 0
        q = 1
        while k % q == 0:
            c += necklace(k // q, n) if n else 0
            q *= p
        dims.append(c)
    return GradedDims(p, n, tuple(dims))
