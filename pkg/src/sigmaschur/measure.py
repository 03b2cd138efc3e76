"""Exact measure values of the form (rational) * C_inf^e and the finite-level counts."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_DOWN, Decimal
from fractions import Fraction

from .fp import c_finite, c_infinity, check_odd_prime


@dataclass(frozen=True)
class MeasureExpr:
    """coeff * C_inf(p)^cinf_power, compared exactly."""

    coeff: Fraction
    cinf_power: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))

    def _compatible(self, other: "MeasureExpr") -> None:
        if self.p != other.p:
            raise ValueError("measure values for different primes")

    def __add__(self, other: "MeasureExpr") -> "MeasureExpr":
        self._compatible(other)
        if self.coeff == 0:
            return other
        if other.coeff == 0:
            return self
        if self.cinf_power != other.cinf_power:
            raise ValueError("cannot add terms with different C_inf powers exactly")
        return MeasureExpr(self.coeff + other.coeff, self.cinf_power, self.p)

    def __sub__(self, other: "MeasureExpr") -> "MeasureExpr":
        return self + other.scale(-1)

    def __mul__(self, other: "MeasureExpr") -> "MeasureExpr":
        self._compatible(other)
        return MeasureExpr(self.coeff * other.coeff, self.cinf_power + other.cinf_power, self.p)

    def scale(self, q) -> "MeasureExpr":
        return MeasureExpr(self.coeff * Fraction(q), self.cinf_power, self.p)

    def is_zero(self) -> bool:
        return self.coeff == 0

    def evaluate(self, tolerance: float = 1e-12) -> tuple[float, float]:
        """(value, error bound) using the truncated C_inf."""
        c, err = c_infinity(self.p, tolerance)
        e = self.cinf_power
        val = float(self.coeff) * c ** e
        if e == 0:
            return val, 0.0
        # |(c+d)^e - c^e| <= e (c+|d|)^(e-1) |d| for e >= 1
        bound = abs(float(self.coeff)) * abs(e) * (c + err) ** (abs(e) - 1) * err
        if e < 0:
            bound = abs(float(self.coeff)) * abs(e) * err / (c - err) ** (abs(e) + 1)
        return val, bound

    def __float__(self) -> float:
        return self.evaluate()[0]

    def render(self) -> str:
        if self.cinf_power == 0:
            return str(self.coeff)
        pw = "C_inf" if self.cinf_power == 1 else f"C_inf^{self.cinf_power}"
        # six decimals, truncated toward zero
        shown = Decimal(repr(float(self))).quantize(Decimal("0.000001"), rounding=ROUND_DOWN)
        return f"{self.coeff}·{pw} ≈ {shown}"

    def __str__(self) -> str:
        return self.render()


def zero(p: int) -> MeasureExpr:
    return MeasureExpr(Fraction(0), 0, p)


def mu_inf_sch_n(p: int, n: int) -> MeasureExpr:
    """C_inf / C_n^2 * p^(-n^2)."""
    check_odd_prime(p)
    if n < 0:
        raise ValueError("n must be >= 0")
    return MeasureExpr(Fraction(1, p ** (n * n)) / c_finite(p, n) ** 2, 1, p)


def mu_inf_udg(p: int, n: int, m: int, aut_order: int) -> MeasureExpr:
    """C_inf / (C_{n-m} * |Aut_sigma(G_D)|)."""
    check_odd_prime(p)
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    if aut_order < 1:
        raise ValueError("aut_order must be >= 1")
    return MeasureExpr(1 / (c_finite(p, n - m) * aut_order), 1, p)


def mu_n_class_count(p: int, n: int, odd_size: int, m: int, aut_order: int) -> int:
    """Number of relation tuples in (F_{n,D}^-)^n whose quotient lies in the class.

    Equals |F_{n,D}^-|^n * C_n^2 / (C_{n-m} * |Aut_sigma|); the class must have d = n.
    """
    check_odd_prime(p)
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    val = Fraction(odd_size) ** n * c_finite(p, n) ** 2 / (c_finite(p, n - m) * aut_order)
    if val.denominator != 1 or val < 0:
        raise ValueError(f"class count {val} is not a non-negative integer: inconsistent inputs")
    return val.numerator


def mu_n_restriction_factor(p: int, n: int, m: int) -> Fraction:
    """C_n^2 / (C_m^2 C_{n-m}), relating mu_n on Sch_m to mu_m."""
    if not 0 <= m <= n:
        raise ValueError("need n >= m >= 0")
    return c_finite(p, n) ** 2 / (c_finite(p, m) ** 2 * c_finite(p, n - m))


def mu_inf_abelianization(p: int, aut_A_order: int) -> MeasureExpr:
    """C_inf / |Aut(A)|."""
    check_odd_prime(p)
    if aut_A_order < 1:
        raise ValueError("aut_A_order must be >= 1")
    return MeasureExpr(Fraction(1, aut_A_order), 1, p)


def cyclic_class_measure(p: int, j: int) -> MeasureExpr:
    """mu_inf of the class of Z/p^j (j >= 1): C_inf / (p^(j-1)(p-1))."""
    return mu_inf_udg(p, 1, 1, p ** (j - 1) * (p - 1))


def cyclic_series_sum(p: int) -> Fraction:
    """Exact value of sum_{j>=1} 1/(p^(j-1)(p-1)) = p/(p-1)^2."""
    return Fraction(1, p - 1) / (1 - Fraction(1, p))


def cyclic_series_partial(p: int, J: int) -> Fraction:
    return sum((Fraction(1, p ** (j - 1) * (p - 1)) for j in range(1, J + 1)), Fraction(0))


def zp_class_measure(p: int) -> MeasureExpr:
    """mu_inf([Z_p]) = mu_inf(Sch_1) - sum_j mu_inf([Z/p^j]), summed in closed form."""
    return mu_inf_sch_n(p, 1) - MeasureExpr(cyclic_series_sum(p), 1, p)


def example_consistency(p: int, j: int) -> tuple[MeasureExpr, MeasureExpr]:
    """Both sides of (C_inf/C_1^2) * p^-j C_1 = C_inf/(p^(j-1)(p-1))."""
    lhs = MeasureExpr(Fraction(1) / c_finite(p, 1) ** 2 * Fraction(1, p ** j) * c_finite(p, 1), 1, p)
    return lhs, cyclic_class_measure(p, j)
