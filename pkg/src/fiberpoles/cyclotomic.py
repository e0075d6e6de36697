"""Exact arithmetic in the cyclotomic fields Q(zeta_M)."""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    # Integer polynomials, lowest degree first; den is monic.
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        q[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    return q, num[: len(den) - 1]


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, lowest degree first."""
    if n < 1:
        raise ValueError("n must be positive")
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly, rem = _poly_divmod(poly, list(cyclotomic_polynomial(d)))
            assert not any(rem)
    return tuple(poly)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


class CyclotomicField:
    """The field Q(zeta_M), zeta_M = exp(2 i pi / M), in the power basis."""

    _instances: dict[int, CyclotomicField] = {}

    def __new__(cls, order: int):
        if order in cls._instances:
            return cls._instances[order]
        self = super().__new__(cls)
        self.order = order
        self.modulus = cyclotomic_polynomial(order)
        self.degree = len(self.modulus) - 1
        cls._instances[order] = self
        return self

    def __repr__(self) -> str:
        return f"CyclotomicField({self.order})"

    def __reduce__(self):
        return (CyclotomicField, (self.order,))

    def _reduce(self, coeffs: list[Fraction]) -> tuple[Fraction, ...]:
        coeffs = list(coeffs)
        mod = self.modulus
        deg = self.degree
        for i in range(len(coeffs) - 1, deg - 1, -1):
            c = coeffs[i]
            if c:
                for j in range(deg + 1):
                    coeffs[i - deg + j] -= c * mod[j]
        coeffs = coeffs[:deg] + [Fraction(0)] * max(0, deg - len(coeffs))
        return tuple(coeffs)

    def zero(self) -> CyclotomicNumber:
        return CyclotomicNumber(self, (Fraction(0),) * self.degree)

    def one(self) -> CyclotomicNumber:
        return self.rational(1)

    def rational(self, q) -> CyclotomicNumber:
        coeffs = [Fraction(0)] * self.degree
        coeffs[0] = _as_fraction(q)
        return CyclotomicNumber(self, tuple(coeffs))

    def zeta(self, exponent: int = 1) -> CyclotomicNumber:
        """zeta_M ** exponent."""
        e = exponent % self.order
        coeffs = [Fraction(0)] * (e + 1)
        coeffs[e] = Fraction(1)
        return CyclotomicNumber(self, self._reduce(coeffs))

    def root_of_unity(self, numerator: int, denominator: int) -> CyclotomicNumber:
        """exp(2 i pi numerator / denominator); denominator must divide M."""
        if self.order % denominator:
            raise ValueError(f"{denominator} does not divide {self.order}")
        return self.zeta(numerator * (self.order // denominator))

    def imaginary_unit(self) -> CyclotomicNumber:
        if self.order % 4:
            raise ValueError(f"i is not in Q(zeta_{self.order})")
        return self.zeta(self.order // 4)

    def gaussian(self, re, im=0) -> CyclotomicNumber:
        out = self.rational(re)
        im = _as_fraction(im)
        if im:
            out = out + self.imaginary_unit() * im
        return out

    def coerce(self, value) -> CyclotomicNumber:
        """Map ints, Fractions, exact complex numbers or elements of subfields into this field."""
        if isinstance(value, CyclotomicNumber):
            if value.field is self:
                return value
            return value.embed(self)
        if isinstance(value, complex):
            return self.gaussian(value.real, value.imag)
        return self.rational(value)


class CyclotomicNumber:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: CyclotomicField, coeffs: tuple[Fraction, ...]):
        self.field = field
        self.coeffs = coeffs

    def _other(self, other) -> CyclotomicNumber | None:
        if isinstance(other, CyclotomicNumber):
            if other.field is self.field:
                return other
            return self.field.coerce(other)
        if isinstance(other, (int, Fraction, complex)):
            return self.field.coerce(other)
        return None

    def __add__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return CyclotomicNumber(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return CyclotomicNumber(self.field, tuple(a * q for a in self.coeffs))
        other = self._other(other)
        if other is None:
            return NotImplemented
        prod = [Fraction(0)] * (2 * self.field.degree - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        prod[i + j] += a * b
        return CyclotomicNumber(self.field, self.field._reduce(prod))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return CyclotomicNumber(self.field, tuple(a / q for a in self.coeffs))
        return NotImplemented

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise ValueError("negative powers are not supported")
        out = self.field.one()
        base = self
        while exponent:
            if exponent & 1:
                out = out * base
            base = base * base
            exponent >>= 1
        return out

    def __eq__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field.order, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def conjugate(self) -> CyclotomicNumber:
        M = self.field.order
        out = [Fraction(0)] * M
        for i, a in enumerate(self.coeffs):
            out[(-i) % M] += a
        return CyclotomicNumber(self.field, self.field._reduce(out))

    def embed(self, field: CyclotomicField) -> CyclotomicNumber:
        if field.order % self.field.order:
            raise ValueError(f"Q(zeta_{self.field.order}) does not embed in {field!r}")
        step = field.order // self.field.order
        out = [Fraction(0)] * (step * (len(self.coeffs) - 1) + 1)
        for i, a in enumerate(self.coeffs):
            out[i * step] = a
        return CyclotomicNumber(field, field._reduce(out))

    def __complex__(self) -> complex:
        z = cmath.exp(2j * math.pi / self.field.order)
        return complex(sum(float(a) * z**i for i, a in enumerate(self.coeffs) if a))

    def __repr__(self) -> str:
        terms = []
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            if i == 0:
                terms.append(str(a))
            else:
                z = "z" if i == 1 else f"z^{i}"
                terms.append(z if a == 1 else f"-{z}" if a == -1 else f"{a}*{z}")
        body = " + ".join(terms).replace("+ -", "- ") if terms else "0"
        return f"{body} (z = zeta_{self.field.order})"
