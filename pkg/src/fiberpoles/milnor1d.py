"""Exact model of the Milnor fiber of f = eps x^k, its monodromy and the cycles Gamma(A).

The fiber f^{-1}(s0) is k points.  Points are labelled p_j = rho0 * zeta^(-j),
zeta = e^{2 i pi / k}, with rho0 the root of smallest nonnegative argument, so
that the monodromy (transport along s0 e^{i theta}, theta: 0 -> 2 pi) acts on
0-chains, read cohomologically, by T p_j = p_{j+1}.  With that labelling the
eigenvalue e^{-2 i pi u} component controls the poles at lambda in -u - N.

Coefficients live in Q(zeta_M), M = lcm(4, k), so that Gaussian region
coefficients and every eigenvalue are exact.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cyclotomic import CyclotomicField, CyclotomicNumber
from .errors import BoundaryNotAtOrigin, DomainError, UnsupportedFamily
from .model import (
    ExponentLattice,
    Monomial1D,
    PhaseGerm,
    RegionCombination,
    boundary_at_origin,
)


@dataclass(frozen=True)
class FiniteFiber:
    k: int
    eps: int
    s0: Fraction = Fraction(1, 4)

    def __post_init__(self):
        if self.k < 2 or self.eps not in (1, -1):
            raise ValueError("need k >= 2 and eps = +-1")

    @classmethod
    def of(cls, phase: PhaseGerm) -> FiniteFiber:
        if not isinstance(phase.family, Monomial1D):
            raise UnsupportedFamily(f"the exact fiber model needs f = eps x^k, got {phase.family}")
        return cls(phase.family.k, phase.family.eps, Fraction(phase.s0).limit_denominator(10**9))

    @property
    def field(self) -> CyclotomicField:
        return CyclotomicField(math.lcm(4, self.k))

    @property
    def base_units(self) -> int:
        # arguments in units of pi/k: eps z^k = s0 > 0 needs k arg in 2 pi Z (eps = 1) or pi + 2 pi Z
        return 0 if self.eps == 1 else 1

    def label(self, units: int) -> int:
        """Index j of the fiber point with argument units * pi / k."""
        d = (units - self.base_units) % (2 * self.k)
        if d % 2:
            raise ValueError(f"argument {units} pi/{self.k} is not on the fiber")
        return (-(d // 2)) % self.k

    def point(self, j: int) -> complex:
        """Numerical position of p_j."""
        import cmath

        rho = float(self.s0) ** (1 / self.k)
        return rho * cmath.exp(1j * math.pi * (self.base_units - 2 * j) / self.k)

    def zeta(self, exponent: int = 1) -> CyclotomicNumber:
        """e^{2 i pi exponent / k} in the coefficient field."""
        return self.field.root_of_unity(exponent, self.k)

    def eigenvalue(self, u: Fraction) -> CyclotomicNumber:
        """e^{-2 i pi u} for u in (1/k) Z."""
        u = Fraction(u)
        if (u * self.k).denominator != 1:
            raise DomainError(f"u = {u} is not a multiple of 1/{self.k}")
        return self.zeta(-int(u * self.k))

    def zero(self) -> SpectralCycle:
        return SpectralCycle(self, tuple(self.field.zero() for _ in range(self.k)))

    def basis(self, j: int) -> SpectralCycle:
        return SpectralCycle(self, tuple(self.field.one() if i == j % self.k else self.field.zero()
                                         for i in range(self.k)))

    def monodromy_matrix(self) -> list[list[CyclotomicNumber]]:
        F = self.field
        return [[F.one() if i == (j + 1) % self.k else F.zero() for j in range(self.k)] for i in range(self.k)]


@dataclass(frozen=True)
class SpectralCycle:
    """A 0-chain sum_j c_j [p_j] with exact cyclotomic coefficients."""

    fiber: FiniteFiber
    coeffs: tuple[CyclotomicNumber, ...]

    def _same(self, other):
        if other.fiber != self.fiber:
            raise ValueError("cycles on different fibers")

    def __add__(self, other: SpectralCycle) -> SpectralCycle:
        self._same(other)
        return SpectralCycle(self.fiber, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: SpectralCycle) -> SpectralCycle:
        self._same(other)
        return SpectralCycle(self.fiber, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return SpectralCycle(self.fiber, tuple(-a for a in self.coeffs))

    def scale(self, c) -> SpectralCycle:
        c = self.fiber.field.coerce(c)
        return SpectralCycle(self.fiber, tuple(c * a for a in self.coeffs))

    def __eq__(self, other):
        return isinstance(other, SpectralCycle) and self.fiber == other.fiber and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.fiber, self.coeffs))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def T(self, power: int = 1) -> SpectralCycle:
        """Monodromy: T [p_j] = [p_{j+1}]."""
        k = self.fiber.k
        return SpectralCycle(self.fiber, tuple(self.coeffs[(j - power) % k] for j in range(k)))

    def apply(self, mu: CyclotomicNumber) -> SpectralCycle:
        """(T - mu) gamma."""
        return self.T() - self.scale(mu)

    def component(self, u) -> SpectralCycle:
        """Projection on the eigenvalue e^{-2 i pi u}: (1/k) sum_l mu^(-l) T^l."""
        F = self.fiber
        mu_inv = F.eigenvalue(-Fraction(u))
        acc = F.zero()
        w = F.field.one()
        for l in range(F.k):
            acc = acc + self.T(l).scale(w)
            w = w * mu_inv
        return acc.scale(Fraction(1, F.k))

    def components(self) -> dict[Fraction, SpectralCycle]:
        return {Fraction(m, self.fiber.k): self.component(Fraction(m, self.fiber.k)) for m in range(self.fiber.k)}

    def amplitude(self, u) -> CyclotomicNumber:
        """sum_j c_j mu^j with mu = e^{-2 i pi u}; zero iff the component vanishes."""
        mu = self.fiber.eigenvalue(u)
        out = self.fiber.field.zero()
        w = self.fiber.field.one()
        for c in self.coeffs:
            out = out + c * w
            w = w * mu
        return out

    def as_dict(self) -> dict[int, str]:
        return {j: f"{c!r} ~ {complex(c):.6g}" for j, c in enumerate(self.coeffs) if not c.is_zero()}

    def report(self) -> dict:
        table = {}
        for u, comp in self.components().items():
            table[str(u)] = {
                "eigenvalue": f"exp(-2 i pi {u})",
                "zero": comp.is_zero(),
                "amplitude": _cfloat(self.amplitude(u)),
            }
        return {"k": self.fiber.k, "eps": self.fiber.eps,
                "cycle": {str(j): {"exact": repr(c), "float": _cfloat(c)}
                          for j, c in enumerate(self.coeffs) if not c.is_zero()},
                "components": table}


def _cfloat(c: CyclotomicNumber) -> list[float]:
    z = complex(c)
    return [round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0]


# ---------------------------------------------------------------------------
# Gamma(A)


def _fiber_and_region(phase_or_fiber, A: RegionCombination) -> FiniteFiber:
    if isinstance(phase_or_fiber, PhaseGerm):
        fib = FiniteFiber.of(phase_or_fiber)
        A.validate(phase_or_fiber)
        return fib
    return phase_or_fiber


def gamma_parts(fiber: FiniteFiber | PhaseGerm, A: RegionCombination) -> tuple[SpectralCycle, SpectralCycle]:
    """(Gamma(A)^+, T^{1/2} Gamma(A)^-) as cycles on F = f^{-1}(s0).

    A real point q of A at level +s0 counts with sign(f'(q)) (boundary of
    {f < s0}).  At level -s0 the boundary orientation of {f > -s0} gives
    -sign(f'(q)), reversed once more by the change of orientation, and the
    point is carried to F by T^{1/2}, which rotates it by e^{i pi / k}.
    """
    fib = _fiber_and_region(fiber, A)
    F = fib.field
    k, eps = fib.k, fib.eps
    plus = [F.zero() for _ in range(k)]
    minus = [F.zero() for _ in range(k)]
    for sx in (1, -1):
        c = A.coefficient((sx,))
        if c == 0:
            continue
        c = F.coerce(_exact(c))
        units = 0 if sx > 0 else k
        fprime = eps * sx ** (k - 1)
        if eps * sx**k > 0:
            plus[fib.label(units)] += c * fprime
        else:
            o = -fprime  # boundary of {f > -s0}
            o = -o  # change of orientation
            minus[fib.label(units + 1)] += c * o
    return SpectralCycle(fib, tuple(plus)), SpectralCycle(fib, tuple(minus))


def _exact(c):
    # region coefficients arrive as complex numbers; keep them exact when possible
    if isinstance(c, (int, Fraction, CyclotomicNumber)):
        return c
    c = complex(c)
    return complex(Fraction(c.real).limit_denominator(10**9), Fraction(c.imag).limit_denominator(10**9))


def gamma_cycle(fiber: FiniteFiber | PhaseGerm, A: RegionCombination) -> SpectralCycle:
    """Gamma(A) = Gamma(A)^+ - T^{1/2} Gamma(A)^-."""
    plus, minus_t = gamma_parts(fiber, A)
    return plus - minus_t


def gamma_hat(fiber: FiniteFiber | PhaseGerm, A: RegionCombination, phase: PhaseGerm | None = None) -> SpectralCycle:
    """Closed-cycle lift of Gamma(A).

    In one variable the real zero set meets the sphere nowhere, so the
    correction term vanishes and the lift has the same coefficients.
    """
    ph = fiber if isinstance(fiber, PhaseGerm) else phase
    if ph is not None and not boundary_at_origin(ph, A):
        raise BoundaryNotAtOrigin("the boundary of A is not contained in {0}")
    return gamma_cycle(fiber, A)


def can(gamma: SpectralCycle) -> SpectralCycle:
    """Closed cycles to cycles with boundary in the collar: the identity on 0-chains."""
    return gamma


def variation(fiber: FiniteFiber, gamma: SpectralCycle) -> SpectralCycle:
    """var(gamma) = (T - 1) gamma."""
    return gamma.T() - gamma


# ---------------------------------------------------------------------------
# generic matrix helpers


def _matvec(M, v):
    return [sum((M[i][j] * v[j] for j in range(len(v))), v[0] * 0) for i in range(len(M))]


def theta_matrix(T: Sequence[Sequence], v: Sequence, max_terms: int | None = None) -> list:
    """sum_{m >= 0} (-1)^m / (m + 1) (T - 1)^m v for v in the eigenvalue-1 generalized eigenspace.

    Entries may be ints, Fractions or cyclotomic numbers.  The series stops at
    the first vanishing power; DomainError if (T - 1) is not nilpotent on v.
    """
    n = len(v)
    max_terms = n + 1 if max_terms is None else max_terms
    N = [[T[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    out = list(v)
    w = list(v)
    for m in range(1, max_terms + 1):
        w = _matvec(N, w)
        if all(x == 0 for x in w):
            return out
        coef = Fraction((-1) ** m, m + 1)
        out = [a + coef * b for a, b in zip(out, w)]
    raise DomainError("T - 1 is not nilpotent on this vector")


def theta(fiber: FiniteFiber, gamma: SpectralCycle) -> SpectralCycle:
    """Theta on the eigenvalue-1 part; T is semisimple here so Theta is the identity there."""
    if not (gamma - gamma.component(0)).is_zero():
        raise DomainError("theta expects a cycle in the eigenvalue-1 part")
    return SpectralCycle(fiber, tuple(theta_matrix(fiber.monodromy_matrix(), list(gamma.coeffs))))


def nilpotence_order(gamma: SpectralCycle, u) -> int:
    """Smallest q with (T - mu)^q gamma_u = 0 for the component at mu = e^{-2 i pi u}."""
    comp = gamma.component(u)
    mu = gamma.fiber.eigenvalue(u)
    q = 0
    while not comp.is_zero():
        comp = comp.apply(mu)
        q += 1
        if q > gamma.fiber.k:
            raise RuntimeError("nilpotence order exceeds the fiber dimension")
    return q


def predict_pole_cosets(fiber: FiniteFiber | PhaseGerm, A: RegionCombination,
                        which: str = "auto") -> dict[Fraction, int]:
    """Predicted pole order per coset u in (1/k) Z / Z.

    ``which="auto"`` reads u != 0 from Gamma(A) and u = 0 from the lift
    Gamma-hat(A); ``"gamma"`` or ``"hat"`` use one cycle throughout.
    """
    if which not in ("auto", "gamma", "hat"):
        raise ValueError("which must be 'auto', 'gamma' or 'hat'")
    g = gamma_cycle(fiber, A)
    h = gamma_hat(fiber, A) if which in ("auto", "hat") else g
    fib = g.fiber
    out = {}
    for m in range(fib.k):
        u = Fraction(m, fib.k)
        src = g if which == "gamma" or (which == "auto" and u != 0) else h
        out[u] = nilpotence_order(src, u)
    return out


# ---------------------------------------------------------------------------
# Brieskorn-Pham spectrum


def pham_eigenvalues(exponents: Sequence[int]) -> Counter:
    """Multiplicity of each u = frac(sum j_i / a_i), 1 <= j_i <= a_i - 1."""
    if not exponents or len(exponents) > 2 or any(a < 2 for a in exponents):
        raise DomainError("need 1 or 2 exponents, each >= 2")
    cnt: Counter = Counter()
    for js in itertools.product(*(range(1, a) for a in exponents)):
        s = sum(Fraction(j, a) for j, a in zip(js, exponents))
        cnt[s - math.floor(s)] += 1
    return cnt


def pham_spectrum(exponents: Sequence[int], nu_max: int = 3, integers: bool = False) -> ExponentLattice:
    """Candidate cosets from the Brieskorn-Pham monodromy spectrum.

    Order bounds: min(multiplicity, n + 1) for u != 0 and n + 1 for u = 0.
    ``integers=True`` adds coset 0 even when the spectrum lacks it, which is
    the right candidate set for regions with boundary away from the origin.
    """
    n1 = len(exponents)
    cnt = pham_eigenvalues(exponents)
    cos = {u: (n1 if u == 0 else min(m, n1)) for u, m in cnt.items()}
    lat = ExponentLattice(cos, nu_max)
    return lat.with_integers(n1) if integers else lat
