"""Domain types: phases, region combinations, test densities, and component bookkeeping."""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import ParseError, UnsupportedFamily

VARIABLES = ("x", "y")

Polynomial = dict  # exponent tuple -> Fraction


# ---------------------------------------------------------------------------
# polynomial parsing and evaluation


def _poly_add(p, q, sign=1):
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + sign * c
        if out[e] == 0:
            del out[e]
    return out


def _poly_mul(p, q):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
            if out[e] == 0:
                del out[e]
    return out


def _poly_const(c, nvars):
    c = Fraction(c)
    return {(0,) * nvars: c} if c else {}


def parse_polynomial(text: str, nvars: int | None = None) -> tuple[Polynomial, int]:
    """Parse a polynomial in x (and y) with rational coefficients.

    Returns ``(poly, nvars)`` where ``poly`` maps exponent tuples to Fractions.
    ``nvars`` defaults to 2 when y occurs, else 1.
    """
    src = text.strip().replace("^", "**")
    if not src:
        raise ParseError("empty expression", text, 0)
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        pos = (exc.offset or 1) - 1
        raise ParseError(f"syntax error ({exc.msg})", text, pos) from None
    names = {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)}
    unknown = names - set(VARIABLES)
    if unknown:
        bad = sorted(unknown)[0]
        raise ParseError(f"unknown variable {bad!r}", text, text.find(bad))
    if nvars is None:
        nvars = 2 if "y" in names else 1
    if nvars == 1 and "y" in names:
        raise ParseError("y used in a one-variable expression", text, text.find("y"))

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return _poly_const(Fraction(str(node.value)), nvars)
        if isinstance(node, ast.Name):
            e = [0] * nvars
            e[VARIABLES.index(node.id)] = 1
            return {tuple(e): Fraction(1)}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            p = walk(node.operand)
            return {e: -c for e, c in p.items()} if isinstance(node.op, ast.USub) else p
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Add):
                return _poly_add(walk(node.left), walk(node.right))
            if isinstance(node.op, ast.Sub):
                return _poly_add(walk(node.left), walk(node.right), -1)
            if isinstance(node.op, ast.Mult):
                return _poly_mul(walk(node.left), walk(node.right))
            if isinstance(node.op, ast.Div):
                den = walk(node.right)
                if set(den) - {(0,) * nvars}:
                    raise ParseError("division by a non-constant", text, node.right.col_offset)
                c = den.get((0,) * nvars, 0)
                if c == 0:
                    raise ParseError("division by zero", text, node.right.col_offset)
                return {e: v / c for e, v in walk(node.left).items()}
            if isinstance(node.op, ast.Pow):
                base = walk(node.left)
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)
                        and node.right.value >= 0):
                    raise ParseError("exponent must be a nonnegative integer", text,
                                     node.right.col_offset)
                out = _poly_const(1, nvars)
                for _ in range(node.right.value):
                    out = _poly_mul(out, base)
                return out
        col = getattr(node, "col_offset", 0)
        raise ParseError(f"unsupported syntax {type(node).__name__}", text, col)

    return walk(tree), nvars


def format_polynomial(poly: Mapping[tuple, Fraction]) -> str:
    if not poly:
        return "0"
    parts = []
    for e in sorted(poly, key=lambda e: (sum(e), tuple(-a for a in e))):
        c = poly[e]
        mono = "*".join(
            v if k == 1 else f"{v}^{k}" for v, k in zip(VARIABLES, e) if k
        )
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append(f"-{mono}")
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def eval_polynomial(poly: Mapping[tuple, Fraction], points: np.ndarray) -> np.ndarray:
    """Evaluate at points of shape (N, d) (or (N,) when d = 1)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    out = np.zeros(pts.shape[0])
    for e, c in poly.items():
        term = np.full(pts.shape[0], float(c))
        for i, k in enumerate(e):
            if k:
                term = term * pts[:, i] ** k
        out += term
    return out


def poly_gradient(poly: Mapping[tuple, Fraction]) -> list[dict]:
    nvars = len(next(iter(poly))) if poly else 1
    grads = []
    for i in range(nvars):
        g = {}
        for e, c in poly.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                g[tuple(e2)] = c * e[i]
        grads.append(g)
    return grads


# ---------------------------------------------------------------------------
# phases


@dataclass(frozen=True)
class Monomial1D:
    k: int
    eps: int


@dataclass(frozen=True)
class BrieskornPham:
    exponents: tuple[int, ...]
    signs: tuple[int, ...]


@dataclass(frozen=True)
class GeneralPolynomial:
    pass


Family = Union[Monomial1D, BrieskornPham, GeneralPolynomial]


def _detect_family(poly, nvars) -> Family:
    if all(c in (1, -1) for c in poly.values()):
        terms = sorted(poly.items())
        pure = []
        for e, c in terms:
            nz = [i for i, k in enumerate(e) if k]
            if len(nz) != 1 or e[nz[0]] < 2:
                break
            pure.append((nz[0], e[nz[0]], int(c)))
        else:
            if len(pure) == nvars and sorted(v for v, _, _ in pure) == list(range(nvars)):
                pure.sort()
                if nvars == 1:
                    return Monomial1D(pure[0][1], pure[0][2])
                return BrieskornPham(tuple(a for _, a, _ in pure), tuple(s for _, _, s in pure))
    return GeneralPolynomial()


@dataclass(frozen=True, eq=False)
class PhaseGerm:
    """A polynomial phase f with f(0) = 0 on the ball of radius ``radius``."""

    dim: int
    poly: Mapping[tuple, Fraction]
    family: Family
    radius: float = 1.0
    s0: float = 0.0

    def __post_init__(self):
        zero = (0,) * self.dim
        if self.poly.get(zero, 0) != 0:
            raise ValueError("phase must vanish at the origin")
        if not self.poly:
            raise ValueError("phase must not be identically zero")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if not isinstance(self.family, GeneralPolynomial):
            if any(sum(e) == 1 for e in self.poly):
                raise ValueError("origin must be a critical point for this family")
        sup = self.sup_abs()
        if self.s0 == 0.0:
            object.__setattr__(self, "s0", min(0.25, 0.5 * sup))
        if not 0 < self.s0 < sup:
            raise ValueError(f"s0={self.s0} must lie in (0, sup|f| = {sup})")

    # constructors -------------------------------------------------------

    @classmethod
    def parse(cls, text: str, radius: float = 1.0, s0: float | None = None) -> PhaseGerm:
        poly, nvars = parse_polynomial(text)
        return cls(nvars, poly, _detect_family(poly, nvars), radius, s0 or 0.0)

    @classmethod
    def monomial(cls, k: int, eps: int = 1, radius: float = 1.0, s0: float | None = None):
        if k < 2 or eps not in (1, -1):
            raise ValueError("need k >= 2 and eps in {+1, -1}")
        return cls(1, {(k,): Fraction(eps)}, Monomial1D(k, eps), radius, s0 or 0.0)

    @classmethod
    def brieskorn_pham(cls, exponents: Sequence[int], signs: Sequence[int] | None = None,
                       radius: float = 1.0, s0: float | None = None):
        exponents = tuple(int(a) for a in exponents)
        signs = tuple(signs) if signs is not None else (1,) * len(exponents)
        if len(signs) != len(exponents) or any(a < 2 for a in exponents):
            raise ValueError("need one sign per exponent and exponents >= 2")
        d = len(exponents)
        poly = {}
        for i, (a, s) in enumerate(zip(exponents, signs)):
            e = [0] * d
            e[i] = a
            poly[tuple(e)] = Fraction(s)
        family = Monomial1D(exponents[0], signs[0]) if d == 1 else BrieskornPham(exponents, signs)
        return cls(d, poly, family, radius, s0 or 0.0)

    # evaluation ---------------------------------------------------------

    def __call__(self, points) -> np.ndarray:
        return eval_polynomial(self.poly, points)

    def gradient(self, points) -> np.ndarray:
        return np.stack([eval_polynomial(g, points) for g in poly_gradient(self.poly)], axis=-1)

    @property
    def n(self) -> int:
        return self.dim - 1

    @property
    def min_degree(self) -> int:
        return min(sum(e) for e in self.poly)

    def sup_abs(self) -> float:
        """sup |f| over the closed ball (grid estimate, exact for monomials)."""
        R = self.radius
        if isinstance(self.family, Monomial1D):
            return R ** self.family.k
        if self.dim == 1:
            xs = np.linspace(-R, R, 4001)
            return float(np.max(np.abs(self(xs))))
        r = np.linspace(0, R, 201)[:, None]
        th = np.linspace(0, 2 * np.pi, 721)[None, :]
        pts = np.stack([(r * np.cos(th)).ravel(), (r * np.sin(th)).ravel()], axis=1)
        return float(np.max(np.abs(self(pts))))

    def __str__(self) -> str:
        return format_polynomial(self.poly)

    def __repr__(self) -> str:
        return f"PhaseGerm({str(self)!r}, family={self.family}, radius={self.radius}, s0={self.s0})"


# ---------------------------------------------------------------------------
# components and region combinations

Descriptor = tuple  # tuple of signs in {-1, 0, +1}

_SIGN_CHARS = {"+": 1, "-": -1, "0": 0}


def descriptor_str(desc: Descriptor) -> str:
    return "".join("+" if s > 0 else "-" if s < 0 else "0" for s in desc)


def parse_descriptor(text: str) -> Descriptor:
    try:
        return tuple(_SIGN_CHARS[ch] for ch in text)
    except KeyError:
        bad = next(i for i, ch in enumerate(text) if ch not in _SIGN_CHARS)
        raise ParseError("sign vector must use '+', '-', '0'", text, bad) from None


@dataclass(frozen=True)
class Arc:
    """A component of the complement of f = 0, seen as an arc of a small circle."""

    descriptor: Descriptor
    start: float  # angle where the arc begins (counterclockwise), radians
    stop: float   # angle where it ends; stop > start, stop - start <= 2 pi
    full: bool = False


@lru_cache(maxsize=64)
def _circle_arcs(phase: PhaseGerm, n_samples: int) -> tuple[Arc, ...]:
    # Quasi-homogeneous phases: every component meets each small circle in one arc.
    rho = 0.5 * phase.radius
    th = (np.arange(n_samples) + 0.5) * (2 * np.pi / n_samples)
    pts = np.stack([rho * np.cos(th), rho * np.sin(th)], axis=1)
    fs = np.sign(phase(pts))
    if np.any(fs == 0):
        raise RuntimeError("sample hit the zero set; change n_samples")
    changes = np.nonzero(fs != np.roll(fs, 1))[0]
    if len(changes) == 0:
        return (Arc((0, 0, int(fs[0])), 0.0, 2 * np.pi, full=True),)
    arcs = []
    for i, start in enumerate(changes):
        stop = changes[(i + 1) % len(changes)]
        idx = np.arange(start, stop if stop > start else stop + n_samples) % n_samples
        sx = np.sign(pts[idx, 0])
        sy = np.sign(pts[idx, 1])
        desc = (
            int(sx[0]) if np.all(sx == sx[0]) else 0,
            int(sy[0]) if np.all(sy == sy[0]) else 0,
            int(fs[idx[0]]),
        )
        a0 = th[start] - np.pi / n_samples
        a1 = th[idx[-1]] + np.pi / n_samples
        if a1 < a0:
            a1 += 2 * np.pi
        arcs.append(Arc(desc, float(a0), float(a1)))
    return tuple(arcs)


def separating_family(phase: PhaseGerm) -> tuple[str, ...]:
    if isinstance(phase.family, Monomial1D):
        return ("x",)
    if isinstance(phase.family, BrieskornPham) and phase.dim == 2:
        return ("x", "y", "f")
    raise UnsupportedFamily(f"no fixed separating family for {phase.family}")


def component_arcs(phase: PhaseGerm, n_samples: int = 10_000) -> list[Arc]:
    if isinstance(phase.family, Monomial1D):
        return [Arc((1,), -0.5, 0.5), Arc((-1,), math.pi - 0.5, math.pi + 0.5)]
    if isinstance(phase.family, BrieskornPham) and phase.dim == 2:
        arcs = list(_circle_arcs(phase, n_samples))
        descs = [a.descriptor for a in arcs]
        if len(set(descs)) != len(descs):
            raise UnsupportedFamily("sign-vector descriptors do not separate the components")
        return arcs
    raise UnsupportedFamily(
        f"component enumeration needs a Monomial1D or 2-variable BrieskornPham phase, got {phase.family}"
    )


def enumerate_components(phase: PhaseGerm, n_samples: int = 10_000) -> list[Descriptor]:
    """Sign-vector descriptors of the connected components of the ball minus f = 0.

    For one-variable monomials the descriptor is (sign x,).  For two-variable
    Brieskorn-Pham phases it is (sign x, sign y, sign f) where a 0 entry means
    the coordinate changes sign inside the component.
    """
    return sorted((a.descriptor for a in component_arcs(phase, n_samples)), reverse=True)


def _parse_coefficient(text: str, where: str) -> complex:
    t = text.strip().replace(" ", "")
    try:
        if t.endswith("i") or t.endswith("j"):
            return complex(t[:-1].replace("i", "j") + "j") if t[:-1] not in ("", "+", "-") \
                else complex(t[:-1] + "1j")
        return complex(float(t))
    except ValueError:
        raise ParseError("bad coefficient", where, where.find(text)) from None


@dataclass(frozen=True)
class RegionCombination:
    """A complex linear combination of components, keyed by sign-vector descriptors."""

    terms: Mapping[Descriptor, object] = field(default_factory=dict)
    separators: tuple[str, ...] = ()

    def __post_init__(self):
        clean = {tuple(d): c for d, c in self.terms.items() if c != 0}
        lengths = {len(d) for d in clean}
        if len(lengths) > 1:
            raise ValueError("descriptors of different lengths")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def parse(cls, text: str, phase: PhaseGerm | None = None) -> RegionCombination:
        """Parse ``"+:1,-:1"``, ``"all:1"``, ``"+0+:1+2i"`` or ``""`` (zero)."""
        terms: dict = {}
        seps = separating_family(phase) if phase is not None and not isinstance(
            phase.family, GeneralPolynomial) else ("f",)
        for chunk in filter(None, (c.strip() for c in text.split(","))):
            if ":" not in chunk:
                raise ParseError("expected 'sign-vector:coefficient'", text, text.find(chunk))
            key, _, val = chunk.partition(":")
            coef = _parse_coefficient(val, text)
            if key == "all":
                if phase is None:
                    raise ParseError("'all' needs a phase", text, text.find(chunk))
                if isinstance(phase.family, GeneralPolynomial):
                    descs = [(1,), (-1,)]
                else:
                    descs = enumerate_components(phase)
                for d in descs:
                    terms[d] = terms.get(d, 0) + coef
            else:
                d = parse_descriptor(key)
                terms[d] = terms.get(d, 0) + coef
        return cls(terms, seps)

    def coefficient(self, desc: Descriptor):
        return self.terms.get(tuple(desc), 0)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: RegionCombination) -> RegionCombination:
        out = dict(self.terms)
        for d, c in other.terms.items():
            out[d] = out.get(d, 0) + c
        return RegionCombination(out, self.separators or other.separators)

    def scale(self, a) -> RegionCombination:
        return RegionCombination({d: a * c for d, c in self.terms.items()}, self.separators)

    def __str__(self) -> str:
        def fmt(c):
            c = complex(c)
            if c.imag == 0:
                return f"{c.real:g}"
            return f"{c.real:g}{c.imag:+g}i"
        return ",".join(f"{descriptor_str(d)}:{fmt(c)}" for d, c in sorted(self.terms.items(), reverse=True))

    def validate(self, phase: PhaseGerm) -> None:
        if isinstance(phase.family, GeneralPolynomial):
            return
        known = set(enumerate_components(phase))
        unknown = set(self.terms) - known
        if unknown:
            raise ValueError(
                f"descriptors {sorted(descriptor_str(d) for d in unknown)} are not components of {phase}; "
                f"components are {sorted(descriptor_str(d) for d in known)}"
            )

    def weights(self, phase: PhaseGerm, points: np.ndarray) -> np.ndarray:
        """Coefficient a(x) of the component containing each point (0 on f = 0)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        fam = phase.family
        out = np.zeros(pts.shape[0], dtype=complex)
        if isinstance(fam, Monomial1D):
            sx = np.sign(pts[:, 0])
            for d, c in self.terms.items():
                out[sx == d[0]] = complex(c)
            return out
        fv = phase(pts)
        if isinstance(fam, BrieskornPham) and phase.dim == 2:
            arcs = component_arcs(phase)
            coefs = {complex(self.terms.get(arc.descriptor, 0)) for arc in arcs}
            if len(coefs) == 1:
                # same coefficient everywhere: no need to locate the points
                out[:] = coefs.pop()
                out[fv == 0] = 0
                return out
            lab = _locate_in_arcs(phase, arcs, pts, fv)
            for i, arc in enumerate(arcs):
                c = self.terms.get(arc.descriptor, 0)
                if c:
                    out[lab == i] = complex(c)
            out[fv == 0] = 0
            return out
        # general polynomials: descriptors are signs of the separators (default: f)
        seps = self.separators or ("f",)
        signs = []
        for s in seps:
            if s == "f":
                signs.append(np.sign(fv))
            else:
                poly, _ = parse_polynomial(s, phase.dim)
                signs.append(np.sign(eval_polynomial(poly, pts)))
        sig = np.stack(signs, axis=1)
        for d, c in self.terms.items():
            mask = np.all(sig == np.asarray(d), axis=1)
            out[mask] = complex(c)
        return out


def _locate_in_arcs(phase, arcs, pts, fv):
    # Flow each point along the weighted dilation to the reference circle: the
    # dilation preserves sign(f) and the component, and for a Brieskorn-Pham
    # phase the angle on the circle is determined by the quasi-homogeneous flow.
    a, b = phase.family.exponents
    rho = 0.5 * phase.radius
    x, y = pts[:, 0], pts[:, 1]
    # solve |(t^(1/a) x, t^(1/b) y)| = rho for t by bisection in log t
    lo = np.full(len(x), -60.0)
    hi = np.full(len(x), 60.0)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        t = np.exp(mid)
        nrm = np.hypot(t ** (1 / a) * x, t ** (1 / b) * y)
        big = nrm > rho
        hi = np.where(big, mid, hi)
        lo = np.where(big, lo, mid)
    t = np.exp(0.5 * (lo + hi))
    ang = np.mod(np.arctan2(t ** (1 / b) * y, t ** (1 / a) * x), 2 * np.pi)
    lab = np.full(len(x), -1)
    for i, arc in enumerate(arcs):
        if arc.full:
            lab[:] = i
            continue
        rel = np.mod(ang - arc.start, 2 * np.pi)
        lab[(rel <= arc.stop - arc.start) & (lab < 0)] = i
    return lab


def boundary_at_origin(phase: PhaseGerm, A: RegionCombination) -> bool:
    """True when the boundary current of A is supported at the origin."""
    fam = phase.family
    if isinstance(fam, Monomial1D):
        return True
    if not (isinstance(fam, BrieskornPham) and phase.dim == 2):
        raise UnsupportedFamily(f"boundary test needs Monomial1D or 2-variable BrieskornPham, got {fam}")
    arcs = component_arcs(phase)
    if len(arcs) == 1:
        return True
    for i, arc in enumerate(arcs):
        nxt = arcs[(i + 1) % len(arcs)]
        if A.coefficient(arc.descriptor) != A.coefficient(nxt.descriptor):
            return False
    return True


# ---------------------------------------------------------------------------
# test densities


def smoothstep_cutoff(t: np.ndarray) -> np.ndarray:
    """1 on [0, 1/2], 0 on [1, inf), quintic smoothstep in between (C^2)."""
    t = np.asarray(t, dtype=float)
    u = np.clip(2.0 * t - 1.0, 0.0, 1.0)
    return 1.0 - u**3 * (10.0 - 15.0 * u + 6.0 * u**2)


@dataclass(frozen=True, eq=False)
class TestDensity:
    """g(x) = m(x) * b(|x| / radius) with m a polynomial and b the smoothstep cutoff."""

    __test__ = False  # not a pytest class

    poly: Mapping[tuple, Fraction]
    dim: int
    radius: float = 1.0

    @classmethod
    def parse(cls, text: str, dim: int, radius: float = 1.0) -> TestDensity:
        poly, _ = parse_polynomial(text, dim)
        return cls(poly, dim, radius)

    @classmethod
    def constant(cls, dim: int, value=1, radius: float = 1.0) -> TestDensity:
        return cls(_poly_const(value, dim), dim, radius)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        r = np.sqrt(np.sum(pts**2, axis=1))
        return eval_polynomial(self.poly, pts) * smoothstep_cutoff(r / self.radius)

    def polynomial_part(self, points) -> np.ndarray:
        return eval_polynomial(self.poly, points)

    def coefficients_1d(self) -> list[Fraction]:
        """Coefficients m_0, m_1, ... of a one-variable polynomial part."""
        if self.dim != 1:
            raise ValueError("not a one-variable density")
        deg = max((e[0] for e in self.poly), default=0)
        return [Fraction(self.poly.get((i,), 0)) for i in range(deg + 1)]

    def at_origin(self) -> float:
        return float(self.poly.get((0,) * self.dim, 0))

    def __str__(self) -> str:
        return format_polynomial(self.poly)


# ---------------------------------------------------------------------------
# exponent lattices


@dataclass(frozen=True)
class ExponentLattice:
    """Cosets u in [0, 1) of the exponents r = u + nu with per-coset order bounds."""

    cosets: Mapping[Fraction, int]
    nu_max: int = 3

    def __post_init__(self):
        clean = {}
        for u, m in self.cosets.items():
            u = Fraction(u)
            if not 0 <= u < 1:
                raise ValueError(f"coset {u} not in [0, 1)")
            clean[u] = int(m)
        object.__setattr__(self, "cosets", dict(sorted(clean.items())))

    @classmethod
    def from_denominator(cls, k: int, nu_max: int = 3, order: int = 1) -> ExponentLattice:
        return cls({Fraction(m, k): order for m in range(k)}, nu_max)

    def contains(self, r) -> bool:
        r = Fraction(r)
        return (r - math.floor(r)) in self.cosets

    def order_bound(self, r) -> int:
        r = Fraction(r)
        return self.cosets.get(r - math.floor(r), 0)

    def exponents(self, max_log: int | None = None, r_max=None) -> list[tuple[Fraction, int]]:
        """All (r, j) with r = u + nu > 0, nu <= nu_max, j < order bound of u."""
        out = []
        for u, m in self.cosets.items():
            for nu in range(self.nu_max + 1):
                r = u + nu
                if r <= 0 or (r_max is not None and r > r_max):
                    continue
                jm = m if max_log is None else min(m, max_log + 1)
                out.extend((r, j) for j in range(jm))
        return sorted(out)

    def with_integers(self, order: int) -> ExponentLattice:
        cos = dict(self.cosets)
        cos[Fraction(0)] = max(cos.get(Fraction(0), 0), order)
        return ExponentLattice(cos, self.nu_max)

    def __str__(self) -> str:
        return ",".join(f"{u}" + (f"^{m}" if m != 1 else "") for u, m in self.cosets.items())


def parse_lattice(text: str, nu_max: int = 3) -> ExponentLattice:
    """Parse ``"1/3,2/3,0^2"`` (optional ``^order`` per coset)."""
    cos = {}
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        m = re.fullmatch(r"(-?\d+(?:/\d+)?)(?:\^(\d+))?", chunk)
        if not m:
            raise ParseError("bad coset", text, text.find(chunk))
        u = Fraction(m.group(1))
        u -= math.floor(u)
        cos[u] = max(cos.get(u, 0), int(m.group(2) or 1))
    return ExponentLattice(cos, nu_max)
