"""Kernels of cyclic quotients F_n -> Z/p^r and their abelianized actions.

The quotient sends x_1 to 1 and x_j (j >= 2) to 0. The kernel N is free on
x_1^(p^r) and the conjugates x_1^i x_j x_1^-i (0 <= i < p^r, 2 <= j <= n).
All matrices act on column vectors: column b is the image of basis vector b.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fp import check_odd_prime
from .magnus import FreeWord


@dataclass(frozen=True)
class CyclicKernelBasis:
    p: int
    n: int
    r: int

    def __post_init__(self):
        check_odd_prime(self.p)
        if self.n < 1 or self.r < 1:
            raise ValueError("need n >= 1 and r >= 1")

    @property
    def index(self) -> int:
        return self.p ** self.r

    @property
    def size(self) -> int:
        return 1 + self.index * (self.n - 1)

    def slot(self, j: int, i: int) -> int:
        """Position of x_1^i x_j x_1^-i."""
        return 1 + (j - 2) * self.index + i

    def word(self, b: int) -> FreeWord:
        P = self.index
        if b == 0:
            return FreeWord((1,) * P)
        j, i = divmod(b - 1, P)
        j += 2
        return FreeWord((1,) * i + (j,) + (-1,) * i)

    def labels(self) -> list[str]:
        out = [f"x1^{self.index}"]
        for j in range(2, self.n + 1):
            out += [f"x1^{i} x{j} x1^-{i}" for i in range(self.index)]
        return out


class NotInKernel(ValueError):
    pass


def rewrite_in_kernel(w: FreeWord | Sequence[int], basis: CyclicKernelBasis) -> np.ndarray:
    """Abelianized Reidemeister-Schreier rewrite of w in N (transversal x_1^t)."""
    w = w if isinstance(w, FreeWord) else FreeWord(tuple(w))
    w.check_rank(basis.n)
    P = basis.index
    vec = np.zeros(basis.size, dtype=np.int64)
    t = 0
    for x in w.letters:
        if x == 1:
            if t == P - 1:
                vec[0] += 1
            t = (t + 1) % P
        elif x == -1:
            if t == 0:
                vec[0] -= 1
            t = (t - 1) % P
        elif x > 0:
            vec[basis.slot(x, t)] += 1
        else:
            vec[basis.slot(-x, t)] -= 1
    if t != 0:
        raise NotInKernel(f"word {w} is not in the kernel (x_1 exponent sum not divisible by {P})")
    return vec


@dataclass
class AbelianizedAction:
    basis: CyclicKernelBasis
    conj: dict[int, np.ndarray]
    sigma: np.ndarray = field(repr=False)


def _matrix_of(basis: CyclicKernelBasis, image) -> np.ndarray:
    cols = [rewrite_in_kernel(image(basis.word(b)), basis) for b in range(basis.size)]
    return np.stack(cols, axis=1)


def action_matrices(basis: CyclicKernelBasis) -> AbelianizedAction:
    conj = {}
    for j in range(1, basis.n + 1):
        g = FreeWord((j,))
        conj[j] = _matrix_of(basis, lambda b, g=g: g * b * g.inverse())
    sig = _matrix_of(basis, lambda b: b.sigma())
    return AbelianizedAction(basis, conj, sig)


@dataclass
class CharacterRow:
    element: str
    computed: int | None
    predicted: int | None
    status: str  # "pass", "fail" or "vacuous"


def character_check(basis: CyclicKernelBasis) -> list[CharacterRow]:
    """Traces on N_ab compared with the table of character values.

    F_n has d^+ = 0 and d^- = n; G/N = Z/p^r with sigma acting by inversion,
    so (G/N)^+ is trivial and the [a]sigma row (a even, a not in N) is vacuous.
    """
    act = action_matrices(basis)
    n, P = basis.n, basis.index
    dplus, dminus = 0, n
    q_plus = 1  # fixed points of inversion on Z/p^r, p odd
    rows = []

    def row(name, computed, predicted):
        rows.append(CharacterRow(name, computed, predicted, "pass" if computed == predicted else "fail"))

    ident = np.eye(basis.size, dtype=np.int64)
    row("1", int(np.trace(ident)), 1 + P * (dplus - 1 + dminus))
    m1 = act.conj[1]
    power = ident
    traces = []
    for k in range(1, P):
        power = power @ m1
        traces.append(int(np.trace(power)))
    # all nontrivial [a] must give 1; report the worst offender if any
    bad = [t for t in traces if t != 1]
    row("[a], a not in N", bad[0] if bad else traces[0], 1)
    row("sigma", int(np.trace(act.sigma)), 1 + q_plus * (dplus - 1 - dminus))
    rows.append(CharacterRow("[a]sigma, a in G+ minus N", None, None, "vacuous"))
    return rows


def character_identity(basis: CyclicKernelBasis) -> bool:
    """chi_N + chi_+ = chi_0 + d^+ chi_+ + d^- chi_- on the non-vacuous rows."""
    rows = {r.element: r.computed for r in character_check(basis)}
    P, n = basis.index, basis.n
    dplus, dminus, q_plus = 0, n, 1
    chi_eps = {"1": lambda e: P, "[a], a not in N": lambda e: 0, "sigma": lambda e: e * q_plus}
    for name, chi in chi_eps.items():
        lhs = rows[name] + chi(1)
        rhs = 1 + dplus * chi(1) + dminus * chi(-1)
        if lhs != rhs:
            return False
    return True


@dataclass
class IndexCheck:
    i_n: int
    predicted: int
    rank: int

    @property
    def ok(self) -> bool:
        return self.i_n == self.predicted


def index_formula_check(basis: CyclicKernelBasis) -> IndexCheck:
    """i_N = tr(sigma | N_ab) against |(G/N)^+| (i_G - 1) + 1 with i_G = -n."""
    act = action_matrices(basis)
    i_g = -basis.n
    return IndexCheck(int(np.trace(act.sigma)), 1 * (i_g - 1) + 1, basis.size)


def structure_checks(basis: CyclicKernelBasis) -> dict[str, bool]:
    """Matrix identities: sigma^2 = 1, sigma M(x1) sigma = M(x1)^-1, M(x1)^(p^r) = 1, tr M(x1) = 1."""
    act = action_matrices(basis)
    S, M = act.sigma, act.conj[1]
    ident = np.eye(basis.size, dtype=np.int64)
    Mp = np.linalg.matrix_power(M, basis.index)
    return {
        "sigma_involution": bool((S @ S == ident).all()),
        "semidirect": bool((S @ M @ S @ M == ident).all()),
        "x1_order": bool((Mp == ident).all()),
        "x1_trace_one": int(np.trace(M)) == 1,
        "inner_trivial": all((act.conj[j] == ident).all() for j in range(2, basis.n + 1)),
        "twisted_traces": all(int(np.trace(np.linalg.matrix_power(M, k) @ S)) == -basis.n
                              for k in range(basis.index)),
    }
