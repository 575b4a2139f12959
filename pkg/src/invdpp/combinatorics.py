"""Exact composition sums and truncated bivariate power series.

Everything here works over :class:`fractions.Fraction`; no floats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, Iterator, Tuple

Composition = Tuple[int, ...]


def compositions(k: int) -> Iterator[Composition]:
    """All 2^(k-1) ordered compositions of k, in lexicographic order."""
    if k < 1:
        raise ValueError("k must be >= 1")

    def rec(rest):
        if rest == 0:
            yield ()
            return
        for first in range(1, rest + 1):
            for tail in rec(rest - first):
                yield (first, *tail)

    yield from rec(k)


def upsilon(k: int, weight: Callable[[int, Composition], Fraction | int]) -> Fraction:
    """sum_m (-1)^(m-1)/m  sum_{k_1+..+k_m=k} weight / (k_1! ... k_m!)."""
    total = Fraction(0)
    for c in compositions(k):
        m = len(c)
        denom = 1
        for part in c:
            denom *= factorial(part)
        total += Fraction((-1) ** (m - 1), m) * Fraction(weight(k, c)) / denom
    return total


def one(k: int, c: Composition) -> int:
    return 1


def tail_sum(k: int, c: Composition) -> int:
    """k_2 + ... + k_m."""
    return sum(c[1:])


def tail_squares(k: int, c: Composition) -> int:
    return sum(p * p for p in c[1:])


def tail_cross(k: int, c: Composition) -> int:
    """sum over 2 <= i < j <= m of k_i k_j."""
    t = c[1:]
    return sum(t[i] * t[j] for i in range(len(t)) for j in range(i + 1, len(t)))


def gff_weight(k: int, c: Composition) -> int:
    """sum_{i>=2} (k_i^2 - k k_i) + sum_{2<=i<j} k_i k_j."""
    if sum(c) != k or any(p < 1 for p in c):
        raise ValueError(f"{c} is not a composition of {k}")
    return sum(p * p - k * p for p in c[1:]) + tail_cross(k, c)


def verify_gff(k: int) -> Fraction:
    """Upsilon_k of the GFF weight: 1/2 for k = 2 and 0 for every k >= 3."""
    if k < 2:
        raise ValueError("k must be >= 2")
    return upsilon(k, gff_weight)


# -- truncated bivariate series -------------------------------------------------

@dataclass(frozen=True)
class RationalSeries:
    """Power series in x, y truncated to x-degree <= dx and y-degree <= dy."""

    dx: int
    dy: int
    coeffs: Dict[Tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {
            (i, j): Fraction(v)
            for (i, j), v in self.coeffs.items()
            if v != 0 and i <= self.dx and j <= self.dy
        }
        object.__setattr__(self, "coeffs", clean)

    # constructors
    @classmethod
    def constant(cls, c, dx, dy):
        return cls(dx, dy, {(0, 0): Fraction(c)})

    @classmethod
    def x(cls, dx, dy):
        return cls(dx, dy, {(1, 0): Fraction(1)})

    @classmethod
    def y(cls, dx, dy):
        return cls(dx, dy, {(0, 1): Fraction(1)})

    @classmethod
    def exp_x(cls, dx, dy, shift: int = 0):
        """x^shift e^x."""
        return cls(dx, dy, {(i + shift, 0): Fraction(1, factorial(i)) for i in range(dx + 1)})

    def __getitem__(self, key) -> Fraction:
        return self.coeffs.get(key, Fraction(0))

    def _like(self, coeffs):
        return RationalSeries(self.dx, self.dy, coeffs)

    def _coerce(self, other):
        if isinstance(other, RationalSeries):
            if (other.dx, other.dy) != (self.dx, self.dy):
                raise ValueError("truncation orders differ")
            return other
        return RationalSeries.constant(other, self.dx, self.dy)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RationalSeries):
            c = Fraction(other)
            return self._like({k: c * v for k, v in self.coeffs.items()})
        other = self._coerce(other)
        out: Dict[Tuple[int, int], Fraction] = {}
        for (i1, j1), a in self.coeffs.items():
            for (i2, j2), b in other.coeffs.items():
                i, j = i1 + i2, j1 + j2
                if i <= self.dx and j <= self.dy:
                    out[(i, j)] = out.get((i, j), 0) + a * b
        return self._like(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, RationalSeries):
            other = self._coerce(other)
        return (self.dx, self.dy, self.coeffs) == (other.dx, other.dy, other.coeffs)

    def __hash__(self):
        return hash((self.dx, self.dy, tuple(sorted(self.coeffs.items()))))

    def _nilpotency(self):
        return self.dx + self.dy + 1

    def _require_no_constant(self):
        if self[(0, 0)] != 0:
            raise ValueError("series must have zero constant term")

    def exp(self) -> "RationalSeries":
        """exp of a series with zero constant term."""
        self._require_no_constant()
        out = RationalSeries.constant(1, self.dx, self.dy)
        term = out
        for m in range(1, self._nilpotency()):
            term = term * self * Fraction(1, m)
            if not term.coeffs:
                break
            out = out + term
        return out

    def log(self) -> "RationalSeries":
        """log of a series with constant term 1."""
        if self[(0, 0)] != 1:
            raise ValueError("log needs constant term 1")
        u = self - 1
        return u.log1p_over_u() * u

    def log1p_over_u(self) -> "RationalSeries":
        """log(1 + u) / u = sum_m (-1)^(m-1) u^(m-1) / m for u = self."""
        self._require_no_constant()
        out = RationalSeries.constant(1, self.dx, self.dy)
        power = out
        for m in range(2, self._nilpotency() + 1):
            power = power * self
            if not power.coeffs:
                break
            out = out + power * Fraction((-1) ** (m - 1), m)
        return out

    def d_dx(self) -> "RationalSeries":
        return self._like({(i - 1, j): i * v for (i, j), v in self.coeffs.items() if i > 0})

    def d_dy(self) -> "RationalSeries":
        return self._like({(i, j - 1): j * v for (i, j), v in self.coeffs.items() if j > 0})

    def y_coefficient(self, j: int) -> "RationalSeries":
        """The coefficient series of y^j, i.e. (1/j!) d^j/dy^j at y = 0."""
        return self._like({(i, 0): v for (i, jj), v in self.coeffs.items() if jj == j})

    def x_coefficients(self, upto: int | None = None) -> list[Fraction]:
        """Coefficients of x^0..x^upto in the y^0 part."""
        upto = self.dx if upto is None else upto
        return [self[(i, 0)] for i in range(upto + 1)]


def _stripped_log(f: RationalSeries) -> RationalSeries:
    """(log f)(e^x - 1)/(f - 1), built without division."""
    u = f - 1
    ex1 = RationalSeries.exp_x(f.dx, f.dy) - 1
    return u.log1p_over_u() * ex1


def generating_series(order: int) -> dict[str, RationalSeries]:
    """s1, s2 and s11 from f = e^x + x y e^x and g = e^x + y (x e^x + x^2 e^x)."""
    dx, dy = order, 2
    ex = RationalSeries.exp_x(dx, dy)
    y = RationalSeries.y(dx, dy)
    f = ex + y * RationalSeries.exp_x(dx, dy, shift=1)
    g = ex + y * (RationalSeries.exp_x(dx, dy, shift=1) + RationalSeries.exp_x(dx, dy, shift=2))
    hf = _stripped_log(f)
    hg = _stripped_log(g)
    return {
        "f": f,
        "g": g,
        "s1": hf.y_coefficient(1),
        "s2": hg.y_coefficient(1),
        "s11": hf.y_coefficient(2),
    }


def series_identity_check(order: int) -> list[Fraction]:
    """Coefficients of -x s1' + s2 + s11 - x^2/2 for x^0..x^order; all zero."""
    if order < 3:
        raise ValueError("order must be >= 3")
    s = generating_series(order)
    x = RationalSeries.x(order, 2)
    lhs = -(x * s["s1"].d_dx()) + s["s2"] + s["s11"]
    target = RationalSeries(order, 2, {(2, 0): Fraction(1, 2)})
    return (lhs - target).x_coefficients(order)
