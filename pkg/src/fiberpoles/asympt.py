"""Dictionary between pole tables, fiber-integral expansions and oscillatory expansions.

An oscillatory expansion is a list of terms c |tau|^(-r) log^j |tau| describing
int e^{i tau s} J(s) ds as tau -> +inf or -inf.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError, IllConditioned, UnsupportedFamily
from .expansion import (
    SIDES,
    AsymptoticExpansion,
    ExpansionTerm,
    PoleTable,
    pole_table_from_profile,
    support_from_poles,
)
from .fiber import MAX_CONDITION, fit_expansion, level_set_samples, level_set_density
from .mellin import TwoSidedFunction
from .model import (
    BrieskornPham,
    ExponentLattice,
    Monomial1D,
    PhaseGerm,
    RegionCombination,
    TestDensity,
)


def poles_from_expansion(exp: AsymptoticExpansion, rel_tol: float = 1e-4, z: float = 5.0) -> PoleTable:
    """Pole table of the continued bracket F built from a two-sided expansion."""
    return pole_table_from_profile(exp.as_profile(), rel_tol=rel_tol, z=z)


def expansion_support(table: PoleTable) -> set[tuple[Fraction, int]]:
    """Inverse reading: a pole of order m at -r means log powers up to m - 1 at r."""
    return support_from_poles(table)


# ---------------------------------------------------------------------------
# oscillatory dictionary


@dataclass(frozen=True)
class OscTerm:
    r: Fraction
    j: int
    coef: complex
    stderr: float = 0.0

    def __call__(self, tau):
        t = np.abs(np.asarray(tau, dtype=float))
        return self.coef * t ** (-float(self.r)) * np.log(t) ** self.j


def _phase_derivs(r: Fraction, jmax: int, sign: int) -> list[complex]:
    # derivatives in r of Gamma(r) e^{sign i pi r / 2}, orders 0..jmax
    rf = mpmath.mpf(r.numerator) / r.denominator
    fn = lambda x: mpmath.gamma(x) * mpmath.exp(sign * 1j * mpmath.pi * x / 2)  # noqa: E731
    out = []
    for m in range(jmax + 1):
        if m == 0 and r.denominator == 1:
            # integer r: e^{i pi r / 2} = i^r exactly, so cancellations stay exact
            out.append(complex(math.factorial(int(r) - 1) * (1j * sign) ** int(r)))
        else:
            out.append(complex(mpmath.diff(fn, rf, m)))
    return out


def oscillatory_terms_from_expansion(exp: AsymptoticExpansion, direction: int = 1,
                                     tol: float = 1e-13) -> list[OscTerm]:
    """Map density terms c^sigma |s|^(r-1) log^j |s| to terms in |tau|^(-r) log^i |tau|.

    Uses int_0^inf s^(r-1) e^{i tau s} ds = Gamma(r) e^{i pi r / 2} tau^(-r) for
    tau > 0, log powers by differentiation in r.  The negative side and the
    direction tau -> -inf flip the sign of the phase.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if exp.kind != "density":
        raise ValueError("expected a density expansion")
    acc: dict[tuple[Fraction, int], complex] = {}
    var: dict[tuple[Fraction, int], float] = {}
    for sigma in SIDES:
        sign = direction * (1 if sigma == "+" else -1)
        for t in exp.side(sigma):
            if t.r <= 0:
                raise DomainError(f"exponent r = {t.r} <= 0 is not integrable at 0")
            G = _phase_derivs(Fraction(t.r), t.j, sign)
            # d^j/dr^j [G(r) e^{-r L}] = sum_i C(j, i) G^(j-i)(r) (-L)^i e^{-r L}
            for i in range(t.j + 1):
                w = math.comb(t.j, i) * G[t.j - i] * (-1) ** i
                key = (Fraction(t.r), i)
                acc[key] = acc.get(key, 0j) + w * t.coef
                var[key] = var.get(key, 0.0) + (abs(w) * t.stderr) ** 2
    scale = max((abs(v) for v in acc.values()), default=0.0)
    return [OscTerm(r, j, c, math.sqrt(var[(r, j)]))
            for (r, j), c in sorted(acc.items()) if abs(c) > tol * scale]


def evaluate_terms(terms: list[OscTerm], tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    out = np.zeros(tau.shape, dtype=complex)
    for t in terms:
        out = out + t(tau)
    return out


# ---------------------------------------------------------------------------
# oscillatory evaluation


def pushforward_1d(phase: PhaseGerm, A: RegionCombination, g: TestDensity) -> TwoSidedFunction:
    """J for f = eps x^k with the full test density (cutoff included).

    Supported on |s| <= radius^k; the exact expansion is valid for
    |s| < (radius/2)^k where the cutoff equals 1.
    """
    from .fiber import exact_fiber_1d

    fam = phase.family
    if not isinstance(fam, Monomial1D):
        raise UnsupportedFamily(f"needs f = eps x^k, got {fam}")
    k, eps = fam.k, fam.eps
    top = phase.radius**k
    inner = (phase.radius / 2) ** k
    exp = exact_fiber_1d(phase, A, g, s0=inner).expansion

    def side(sigma):
        sg = 1 if sigma == "+" else -1
        roots = [t for t in (1, -1) if t**k == eps * sg and A.coefficient((t,)) != 0]
        if not roots:
            return None

        def J(a):
            a = np.asarray(a, dtype=float)
            out = np.zeros(a.shape, dtype=complex)
            for t in roots:
                x = t * a ** (1.0 / k)
                out += complex(A.coefficient((t,))) * g(x.ravel()).reshape(a.shape) / (k * a ** ((k - 1) / k))
            return out
        return J

    return TwoSidedFunction(side("+"), side("-"), top, inner, exp, "density",
                            breakpoints=(inner,))


def _singular_integral(r: Fraction, j: int, tau: float, S: float) -> complex:
    # int_0^S s^(r-1) log^j s e^{i tau s} ds = d^j/dr^j [ (-i tau)^(-r) gamma(r, -i tau S) ]
    z = mpmath.mpc(0, -tau)

    def F(x):
        return mpmath.gammainc(x, 0, z * S) * mpmath.power(z, -x)

    rf = mpmath.mpf(r.numerator) / r.denominator
    return complex(F(rf) if j == 0 else mpmath.diff(F, rf, j))


def _oscillatory_remainder(fn, lo, hi, tau, points=()):
    # int_lo^hi fn(s) e^{i tau s} ds with QAWO on panels between breakpoints
    edges = sorted({lo, hi} | {p for p in points if lo < p < hi})
    total, err = 0j, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        for part, scale in ((lambda s: fn(s).real, 1.0), (lambda s: fn(s).imag, 1j)):
            c, ec = integrate.quad(part, a, b, weight="cos", wvar=tau, limit=400, epsabs=1e-13, epsrel=1e-11)
            s_, es = integrate.quad(part, a, b, weight="sin", wvar=tau, limit=400, epsabs=1e-13, epsrel=1e-11)
            total += scale * (c + 1j * s_)
            err += abs(ec) + abs(es)
    return total, err


def _evaluate_split(J: TwoSidedFunction, tau: float, S: float) -> complex:
    total = 0j
    for sigma in SIDES:
        if not J.has_side(sigma):
            continue
        t_sign = tau if sigma == "+" else -tau
        terms = J.expansion.side(sigma) if J.expansion is not None else []
        for t in terms:
            total += t.coef * _singular_integral(Fraction(t.r), t.j, t_sign, S)

        def rem(a, sigma=sigma, terms=terms):
            if a <= 0:
                return 0.0  # QAWO samples the endpoint; the remainder is o(1) there
            a = np.atleast_1d(a)
            v = J.raw(sigma, a)
            mag = np.abs(v)
            for t in terms:
                tv = t.coef * a ** (float(t.r) - 1) * np.log(a) ** t.j
                v = v - tv
                mag = mag + np.abs(tv)
            # cancellation noise is not signal
            v[np.abs(v) <= 64 * np.finfo(float).eps * (1 + np.abs(np.log(a))) * mag] = 0
            return v[0]

        v, _ = _oscillatory_remainder(rem, 0.0, S, t_sign, J.breakpoints)
        total += v
        v, _ = _oscillatory_remainder(lambda a, sigma=sigma: J.raw(sigma, np.atleast_1d(a))[0],
                                      S, J.support, t_sign, J.breakpoints)
        total += v
    return total


def fiber_function(phase: PhaseGerm, A: RegionCombination, g: TestDensity, nu_max: int = 3) -> TwoSidedFunction:
    """J with an expansion at 0, from the exact 1D formula or the 2D level-set oracle."""
    if isinstance(phase.family, Monomial1D):
        return pushforward_1d(phase, A, g)
    fam = phase.family
    if isinstance(fam, BrieskornPham) and len(set(fam.exponents)) == 1:
        from .milnor1d import pham_spectrum

        lat = pham_spectrum(fam.exponents, nu_max=nu_max)
        samples = level_set_samples(phase, A, g)
        exp = fit_expansion(samples, lat, dim=phase.dim, window=(0.0, phase.s0 / 10))
        top = phase.sup_abs()

        def side(sigma):
            sg = 1 if sigma == "+" else -1
            if not samples.select(sigma)[0].size:
                return None
            return lambda a: level_set_density(phase, A, g, sg * np.asarray(a, float).ravel()).reshape(np.shape(a))

        inner = phase.s0 / 10
        return TwoSidedFunction(side("+"), side("-"), top, phase.s0, exp, "density",
                                breakpoints=(inner,))
    raise UnsupportedFamily(f"oscillatory evaluation needs f = eps x^k or a homogeneous "
                            f"two-variable Brieskorn-Pham phase, got {fam}")


def oscillatory_eval(phase: PhaseGerm | None, A: RegionCombination | None, g: TestDensity | None,
                     tau: float, J: TwoSidedFunction | None = None, rtol: float = 1e-3) -> complex:
    """int_A e^{i tau f(x)} g(x) dx through the pushforward J(s).

    The expansion of J is integrated in closed form on (0, S); the remainder
    and the outer piece go through QAWO.  The whole computation is repeated
    with S halved and an AccuracyError is raised when the two estimates differ
    by more than ``rtol`` relative.
    """
    if tau == 0:
        raise DomainError("tau must be nonzero")
    if J is None:
        J = fiber_function(phase, A, g)
    S = J.breakpoints[0] if J.breakpoints else J.s0
    v1 = _evaluate_split(J, tau, S)
    v2 = _evaluate_split(J, tau, S / 2)
    diff = abs(v1 - v2)
    if diff > rtol * max(abs(v1), 1e-300) and diff > 1e-14:
        raise AccuracyError(f"split estimates disagree by {diff:.2e} at tau = {tau}", achieved=diff)
    return v1


def direct_oscillatory_1d(phase: PhaseGerm, A: RegionCombination, g: TestDensity, tau: float) -> complex:
    """x-space adaptive quadrature of int_A e^{i tau f} g dx (independent oracle)."""
    if phase.dim != 1:
        raise UnsupportedFamily("direct oracle is one-dimensional")
    R = phase.radius
    total = 0j
    for t, (lo, hi) in ((1, (0.0, R)), (-1, (-R, 0.0))):
        a = complex(A.coefficient((t,)))
        if a == 0:
            continue
        # split where the phase speeds up so panels stay resolvable
        n = max(8, int(abs(tau) * phase.sup_abs() / 2))
        edges = np.linspace(lo, hi, n + 1)
        for u, v in zip(edges[:-1], edges[1:]):
            fr = lambda x: (np.cos(tau * phase(np.array([x]))[0]) * g(np.array([x]))[0])  # noqa: E731
            fi = lambda x: (np.sin(tau * phase(np.array([x]))[0]) * g(np.array([x]))[0])  # noqa: E731
            re, _ = integrate.quad(fr, u, v, limit=200, epsabs=1e-14, epsrel=1e-12)
            im, _ = integrate.quad(fi, u, v, limit=200, epsabs=1e-14, epsrel=1e-12)
            total += a * complex(re, im)
    return total


# ---------------------------------------------------------------------------
# fitting oscillatory data


def fit_oscillatory(taus, values, lattice: ExponentLattice, dim: int = 1,
                    stderr=None, rel_tol: float = 1e-8, z: float = 5.0) -> list[OscTerm]:
    """Least squares for values ~ sum c |tau|^(-r) log^j |tau| on a geometric tau grid."""
    taus = np.abs(np.asarray(taus, dtype=float))
    values = np.asarray(values, dtype=complex)
    if math.log10(taus.max() / taus.min()) < 2 - 1e-9:
        raise DomainError("tau grid must span at least 2 decades")
    if not np.any(values):
        return []
    r_cut = lattice.nu_max + max(lattice.cosets, default=Fraction(0))
    exps = lattice.exponents(max_log=dim - 1, r_max=r_cut)
    sig = np.asarray(stderr, float) if stderr is not None else np.abs(values) + 1e-300
    X = np.stack([taus ** (-float(r)) * np.log(taus) ** j for r, j in exps], axis=1) / sig[:, None]
    y = values / sig
    norms = np.linalg.norm(X, axis=0)
    Xn = X / norms
    cond = np.linalg.cond(Xn)
    if cond > MAX_CONDITION:
        raise IllConditioned(f"design matrix condition {cond:.2e} exceeds 1e12", cond)
    beta, *_ = np.linalg.lstsq(Xn, y, rcond=None)
    cov = np.linalg.pinv(Xn.T @ Xn) / np.outer(norms, norms)
    beta = beta / norms
    if stderr is None:
        cov = np.zeros_like(cov)
    scale = np.max(np.abs(beta))
    out = []
    for (r, j), c, v in zip(exps, beta, np.diag(cov)):
        e = math.sqrt(max(v, 0.0))
        if abs(c) > rel_tol * scale and abs(c) > z * e:
            out.append(OscTerm(r, j, complex(c), e))
    return out


def paired_table(taus, values, terms: list[OscTerm]) -> str:
    """CSV with columns tau, re, im, predicted re, predicted im."""
    pred = evaluate_terms(terms, taus)
    lines = ["tau,re,im,pred_re,pred_im"]
    for t, v, p in zip(np.atleast_1d(taus), np.atleast_1d(values), np.atleast_1d(pred)):
        v, p = complex(v), complex(p)
        lines.append(f"{float(t)!r},{v.real!r},{v.imag!r},{p.real!r},{p.imag!r}")
    return "\n".join(lines) + "\n"
