"""Signed two-sided Mellin transform and its meromorphic continuation.

For phi bounded with bounded support on R*,

    M phi(lambda) = 1/(i pi) [ int_0^inf x^lambda phi(x) dx/x
                               - e^{-i pi lambda} int_0^inf x^lambda phi(-x) dx/x ],

defined for Re(lambda) > 0.  The continuation works with the bracket

    F(lambda) = int_0^s0 (s/s0)^lambda phi(s) ds/s - e^{-i pi lambda} int_0^s0 (s/s0)^lambda phi(-s) ds/s

(plus the entire pieces beyond s0), so that M phi = s0^lambda F / (i pi).  The
expansion terms of phi at 0 are integrated in closed form on (0, s0]; the
remainder is integrated numerically and is analytic where it is used.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import integrate

from .errors import AccuracyError, DomainError, LatticeMismatch, NeedsExpansion
from .expansion import (
    AsymptoticExpansion,
    ExpansionTerm,
    PoleTable,
    pole_table_from_profile,
)
from .model import ExponentLattice

_QUAD = dict(limit=400, epsabs=0.0, epsrel=1e-11)
T_MAX = 80  # remainder integral truncated at x = e^-80
IM_MAX = 20.0
_PANEL_T, _PANEL_W = np.polynomial.legendre.leggauss(20)
_PANEL_T, _PANEL_W = 0.5 * (_PANEL_T + 1), 0.5 * _PANEL_W  # on [0, 1]
_PANEL_T2, _PANEL_W2 = np.polynomial.legendre.leggauss(30)


@dataclass
class TwoSidedFunction:
    """A function on R* given by one evaluator per side.

    ``pos(s)`` is evaluated at s > 0, ``neg(x)`` at s = -x for x > 0.  With
    ``kind="density"`` the values are a fiber density J and the Mellin integrand
    is phi(s) = s J(s); with ``kind="profile"`` the values are phi itself.
    """

    pos: Callable | None
    neg: Callable | None
    support: float
    s0: float | None = None
    expansion: AsymptoticExpansion | None = None
    kind: str = "profile"
    smooth: bool = False
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("density", "profile"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.s0 is None:
            self.s0 = self.support
        if not 0 < self.s0 <= self.support:
            raise ValueError("need 0 < s0 <= support")
        if self.expansion is not None and self.expansion.kind != self.kind:
            raise ValueError("expansion kind differs from the function kind")

    def raw(self, sigma: str, a) -> np.ndarray:
        """Evaluator values at s = sigma * a, a > 0 (zero outside the support)."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        fn = self.pos if sigma == "+" else self.neg
        if fn is None:
            return np.zeros(a.shape, dtype=complex)
        out = np.asarray(fn(a), dtype=complex) * np.ones(a.shape)
        out[a > self.support] = 0
        return out

    def phi(self, sigma: str, a) -> np.ndarray:
        """Mellin integrand phi(sigma * a) for a > 0."""
        v = self.raw(sigma, a)
        if self.kind == "density":
            sign = 1.0 if sigma == "+" else -1.0
            v = sign * np.asarray(a, dtype=float) * v
        return v

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros(s.shape, dtype=complex)
        out[s > 0] = self.raw("+", s[s > 0])
        out[s < 0] = self.raw("-", -s[s < 0])
        return out

    def profile_expansion(self) -> AsymptoticExpansion | None:
        if self.expansion is None:
            return None
        return self.expansion.as_profile(self.s0)

    def has_side(self, sigma: str) -> bool:
        return (self.pos if sigma == "+" else self.neg) is not None

    def combine(self, a: complex, other: TwoSidedFunction, b: complex) -> TwoSidedFunction:
        """a * self + b * other; both must share kind and s0."""
        if self.kind != other.kind or not math.isclose(self.s0, other.s0):
            raise ValueError("functions of different kind or normalization")

        def side(sigma):
            if not (self.has_side(sigma) or other.has_side(sigma)):
                return None
            return lambda x: a * self.raw(sigma, x) + b * other.raw(sigma, x)

        exp = None
        if self.expansion is not None and other.expansion is not None:
            exp = self.expansion.combine(a, other.expansion, b)
        return TwoSidedFunction(side("+"), side("-"), max(self.support, other.support), self.s0,
                                exp, self.kind, self.smooth and other.smooth,
                                tuple(sorted(set(self.breakpoints) | set(other.breakpoints))))


def indicator(s0: float, sides: str = "+-", value: complex = 1.0) -> TwoSidedFunction:
    """The profile value * 1_{0 < sigma s < s0} for the listed sides."""
    const = lambda x: np.full(np.shape(x), value, dtype=complex)  # noqa: E731
    terms = {s: [ExpansionTerm(Fraction(0), 0, complex(value))] for s in sides}
    exp = AsymptoticExpansion(terms.get("+", []), terms.get("-", []), "profile", s0, 1)
    return TwoSidedFunction(const if "+" in sides else None, const if "-" in sides else None,
                            s0, s0, exp, "profile")


# ---------------------------------------------------------------------------
# direct evaluation for Re(lambda) > 0


def _quad_complex(fn, a, b, **kw):
    # quad's own warning is redundant: the caller turns the error estimate into AccuracyError
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, e1 = integrate.quad(lambda x: fn(x).real, a, b, **kw)
        im, e2 = integrate.quad(lambda x: fn(x).imag, a, b, **kw)
    return complex(re, im), math.hypot(e1, e2)


def _side_integral(phi: TwoSidedFunction, sigma: str, lam: complex) -> tuple[complex, float]:
    """int_0^support x^lambda phi(sigma x) dx / x by graded quadrature."""
    if not phi.has_side(sigma):
        return 0j, 0.0
    edges = sorted({b for b in phi.breakpoints if 0 < b < phi.support} | {phi.support})
    first = min(edges[0], phi.s0)
    edges = sorted(set(edges) | {first})
    a_exp = lam.real - 1.0
    w = lam.imag

    def osc(x):
        x = np.maximum(np.atleast_1d(x), 1e-300)
        return (phi.phi(sigma, x) * np.exp(1j * w * np.log(x)))[0]

    # x^(Re lambda - 1) handled by the algebraic weight on the first panel
    total, err = _quad_complex(osc, 0.0, first, weight="alg", wvar=(a_exp, 0.0), **_QUAD)
    lo = first
    for hi in edges:
        if hi <= lo:
            continue
        v, e = _quad_complex(lambda x: osc(x) * x**a_exp, lo, hi, **_QUAD)
        total += v
        err += e
        lo = hi
    return total, err


def mellin_eval(phi: TwoSidedFunction, lam: complex, rtol: float = 1e-8) -> complex:
    """M phi(lambda) for Re(lambda) > 0 by adaptive quadrature."""
    lam = complex(lam)
    if lam.real <= 0:
        raise DomainError(f"Re(lambda) = {lam.real} <= 0; use mellin_continue")
    ip, ep = _side_integral(phi, "+", lam)
    im_, em = _side_integral(phi, "-", lam)
    rot = cmath.exp(-1j * math.pi * lam)
    value = (ip - rot * im_) / (1j * math.pi)
    err = (ep + abs(rot) * em) / math.pi
    if err > rtol * abs(value) + 1e-14:
        raise AccuracyError(f"Mellin quadrature reached only {err:.2e}", achieved=err)
    return value


# ---------------------------------------------------------------------------
# continuation


def _term_integral(t: ExpansionTerm, lam: complex) -> complex:
    # int_0^1 x^(lambda + r) log^j x dx / x
    mu = lam + float(t.r)
    return t.coef * (-1) ** t.j * factorial(t.j) / mu ** (t.j + 1)


@dataclass
class MellinContinuation:
    """The continued bracket F(lambda) together with its pole table."""

    phi: TwoSidedFunction
    profile: AsymptoticExpansion
    poles: PoleTable
    r_cut: Fraction
    noise_floor: float = 64 * np.finfo(float).eps
    _cache: dict = field(default_factory=dict, repr=False)

    def remainder(self, sigma: str, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        vals = self.phi.phi(sigma, x * self.phi.s0)
        terms = np.zeros(x.shape, dtype=complex)
        mag = np.abs(vals)
        for t in self.profile.side(sigma):
            v = t.coef * x ** float(t.r) * np.log(x) ** t.j
            terms += v
            mag = mag + np.abs(v)
        rem = vals - terms
        # pow() loses about |log x| ulps, so the floor grows with it
        rem[np.abs(rem) <= self.noise_floor * (1 + np.abs(np.log(x))) * mag] = 0
        return rem

    def _nodes(self, sigma: str):
        # lambda-independent quadrature data, computed once per side:
        # remainder on (0, 1] in t = -log x, unit panels up to t = T_MAX, and
        # the outer piece (1, support / s0] between breakpoints
        key = ("nodes", sigma)
        if key not in self._cache:
            t = (_PANEL_T[None, :] + np.arange(T_MAX)[:, None]).ravel()
            wt = np.tile(_PANEL_W, T_MAX)
            rem = self.remainder(sigma, np.exp(-t))
            top = self.phi.support / self.phi.s0
            xo = wo = np.zeros(0)
            fo = np.zeros(0, dtype=complex)
            if top > 1:
                edges = sorted({1.0, top} | {b / self.phi.s0 for b in self.phi.breakpoints
                                             if self.phi.s0 < b < self.phi.support})
                # panels no wider than 1/8 of the range so phi is well resolved
                edges = np.unique(np.concatenate([np.linspace(lo, hi, 9) for lo, hi in zip(edges[:-1], edges[1:])]))
                a_, b_ = edges[:-1, None], edges[1:, None]
                xo = (0.5 * (b_ - a_) * _PANEL_T2 + 0.5 * (a_ + b_)).ravel()
                wo = (0.5 * (b_ - a_) * _PANEL_W2).ravel()
                fo = self.phi.phi(sigma, xo * self.phi.s0)
            self._cache[key] = (t, wt * rem, xo, wo * fo)
        return self._cache[key]

    def _numeric(self, sigma: str, lam: complex) -> complex:
        t, wr, xo, wf = self._nodes(sigma)
        if abs(lam.imag) <= IM_MAX:
            v = np.sum(np.exp(-lam * t) * wr)
            if len(xo):
                v += np.sum(xo ** (lam - 1) * wf)
            return complex(v)
        # strongly oscillating kernels: adaptive quadrature
        fn = lambda u: (np.exp(-lam * u) * self.remainder(sigma, np.exp(-u)))[0]  # noqa: E731
        v, _ = _quad_complex(fn, 0.0, float(T_MAX), limit=1000, epsabs=1e-14, epsrel=1e-10)
        top = self.phi.support / self.phi.s0
        if top > 1:
            g = lambda x: (x ** (lam - 1) * self.phi.phi(sigma, np.atleast_1d(x) * self.phi.s0))[0]  # noqa: E731
            w, _ = _quad_complex(g, 1.0, top, limit=1000, epsabs=1e-14, epsrel=1e-10)
            v += w
        return v

    def __call__(self, lam: complex) -> complex:
        """F(lambda), valid for Re(lambda) > -r_next (r_next: first omitted exponent).

        The numeric parts use fixed composite Gauss rules for |Im lambda| <= 20
        and adaptive quadrature beyond.
        """
        lam = complex(lam)
        rot = cmath.exp(-1j * math.pi * lam)
        total = 0j
        for sigma, w in (("+", 1.0), ("-", -rot)):
            if not self.phi.has_side(sigma):
                continue
            part = sum((_term_integral(t, lam) for t in self.profile.side(sigma)), 0j)
            total += w * (part + self._numeric(sigma, lam))
        return total

    def mellin(self, lam: complex) -> complex:
        """M phi(lambda) = s0^lambda F(lambda) / (i pi) on the continued domain."""
        return self.phi.s0 ** complex(lam) * self(lam) / (1j * math.pi)

    def contour_residue(self, r, radius: float = 0.1, n: int = 64) -> complex:
        """(1 / 2 i pi) of the contour integral of F around lambda = -r."""
        r = float(r)
        th = 2 * np.pi * np.arange(n) / n
        vals = [self(-r + radius * cmath.exp(1j * t)) * radius * cmath.exp(1j * t) for t in th]
        return complex(np.mean(vals))


def _taylor_expansion(phi: TwoSidedFunction, degree: int) -> AsymptoticExpansion:
    # Both sides of a function smooth through 0 share one Taylor series.
    h = 0.5 * phi.s0
    nodes = h * np.cos(np.pi * (np.arange(4 * degree + 8) + 0.5) / (4 * degree + 8))
    vals = np.empty(nodes.shape, dtype=complex)
    pos = nodes > 0
    vals[pos] = phi.phi("+", nodes[pos])
    vals[~pos] = phi.phi("-", -nodes[~pos])
    coef = npoly.polyfit(nodes / phi.s0, vals, degree)
    plus = [ExpansionTerm(Fraction(m), 0, complex(c)) for m, c in enumerate(coef) if m > 0 or c]
    minus = [ExpansionTerm(Fraction(m), 0, complex(c) * (-1) ** m) for m, c in enumerate(coef)]
    plus = [t for t in plus if t.r > 0] + [ExpansionTerm(Fraction(0), 0, complex(coef[0]))]
    plus = [t for t in plus if t.r > 0 or t.coef]
    minus = [t for t in minus if t.r > 0 or t.coef]
    return AsymptoticExpansion(plus, minus, "profile", phi.s0, degree)


def mellin_continue(phi: TwoSidedFunction, lattice: ExponentLattice, *, rel_tol: float = 1e-4,
                    z: float = 5.0, validate: bool = True,
                    max_order: int | None = None) -> MellinContinuation:
    """Continue F meromorphically to Re(lambda) >= -(nu_max + max coset).

    Returns a :class:`MellinContinuation`; its ``poles`` attribute is the pole
    table.  Principal-part coefficients below ``rel_tol`` times the largest
    expansion coefficient, or within ``z`` propagated standard errors of 0, are
    treated as 0.
    """
    if phi.expansion is None:
        if not phi.smooth:
            raise NeedsExpansion("phi carries no expansion at 0; fit one first")
        profile = _taylor_expansion(phi, lattice.nu_max + 1)
    else:
        profile = phi.profile_expansion()
    r_cut = lattice.nu_max + max(lattice.cosets, default=Fraction(0))
    for t in profile.plus + profile.minus:
        if t.r != 0 and not lattice.contains(t.r):
            raise LatticeMismatch(f"exponent {t.r} is outside the lattice {lattice}")
    kept = AsymptoticExpansion(
        [t for t in profile.plus if t.r <= r_cut],
        [t for t in profile.minus if t.r <= r_cut],
        "profile", profile.s0, lattice.nu_max, profile.residual,
        _restrict_cov(profile, r_cut), profile.dim,
    )
    cont = MellinContinuation(phi, kept, PoleTable(), Fraction(r_cut))
    if validate:
        _validate_remainder(cont)
    cont.poles = pole_table_from_profile(kept, rel_tol=rel_tol, z=z, max_order=max_order)
    return cont


def _restrict_cov(profile, r_cut):
    out = {}
    for sigma, C in profile.covariance.items():
        idx = [n for n, t in enumerate(profile.side(sigma)) if t.r <= r_cut]
        out[sigma] = np.asarray(C)[np.ix_(idx, idx)]
    return out


def _validate_remainder(cont: MellinContinuation) -> None:
    # The remainder must be dominated by the expansion as x -> 0; otherwise the
    # function carries an exponent the lattice does not know about.
    xs = np.array([1e-5, 1e-6, 1e-7])
    probe = np.geomspace(1e-3, 1.0, 13)
    for sigma in ("+", "-"):
        if not cont.phi.has_side(sigma):
            continue
        big = float(np.max(np.abs(cont.phi.phi(sigma, probe * cont.phi.s0)))) or 1.0
        rem = np.abs(cont.remainder(sigma, xs))
        terms = np.abs(cont.phi.phi(sigma, xs * cont.phi.s0) - cont.remainder(sigma, xs))
        dominated = rem > 0.5 * (rem + terms)
        if np.all(dominated) and np.all(rem > 1e-12 * big):
            raise LatticeMismatch(
                f"side {sigma}: remainder dominates the expansion near 0 "
                f"(|R(1e-7)| = {rem[-1]:.3e}); an exponent is missing from the lattice"
            )


# ---------------------------------------------------------------------------
# Lemma: residue P(0) - Q(0)


def lemma1_function(P: Sequence, Q: Sequence, r, s0: float = 1.0) -> TwoSidedFunction:
    """phi(s) = (s/s0)^r P(Log(s/s0)) for 0 < s < s0 and (s/s0)^r Q(Log(s/s0)) for -s0 < s < 0,

    with the branch Im Log in ]-3 pi / 2, pi / 2[, so Log(-x) = log x - i pi.
    """
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    rf = float(r)
    rot = cmath.exp(-1j * math.pi * rf)

    def pos(s):
        x = s / s0
        return x**rf * npoly.polyval(np.log(x), P)

    def neg(a):
        x = a / s0
        return rot * x**rf * npoly.polyval(np.log(x) - 1j * math.pi, Q)

    plus = [ExpansionTerm(Fraction(r), j, complex(c)) for j, c in enumerate(P) if c]
    # Q(L - i pi) re-expanded in powers of L
    shifted = np.zeros(len(Q), dtype=complex)
    for j, q in enumerate(Q):
        for i in range(j + 1):
            shifted[i] += q * math.comb(j, i) * (-1j * math.pi) ** (j - i)
    minus = [ExpansionTerm(Fraction(r), i, complex(rot * c)) for i, c in enumerate(shifted) if c]
    exp = AsymptoticExpansion(plus, minus, "profile", s0, 0)
    return TwoSidedFunction(pos, neg, s0, s0, exp, "profile")


def residue_lemma1(P: Sequence, Q: Sequence, r, s0: float = 1.0, check: bool = True,
                   tol: float = 1e-6) -> complex:
    """Residue at lambda = -r of F for the lemma's phi: returns P(0) - Q(0).

    With ``check`` the value is confirmed against the continuation (Laurent
    algebra) and against a contour integral of the continued F.
    """
    P = list(P) or [0]
    Q = list(Q) or [0]
    value = complex(P[0]) - complex(Q[0])
    if not check:
        return value
    r = Fraction(r).limit_denominator(10**6) if not isinstance(r, Fraction) else r
    phi = lemma1_function(P, Q, r, s0)
    u = r - math.floor(r)
    lattice = ExponentLattice({u: max(len(P), len(Q))}, nu_max=math.floor(r) + 1)
    cont = mellin_continue(phi, lattice, rel_tol=0.0, z=0.0)
    pole = cont.poles.get(r)
    laurent = pole.residue if pole is not None else 0j
    contour = cont.contour_residue(r, radius=min(0.25, float(r) / 2))
    for name, got in (("Laurent", laurent), ("contour", contour)):
        if abs(got - value) > tol:
            raise AccuracyError(f"{name} residue {got} disagrees with P(0) - Q(0) = {value}",
                                achieved=abs(got - value))
    return value
