"""Two-sided log-power expansions at s = 0 and the pole tables they induce."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb, factorial

import numpy as np

SIDES = ("+", "-")


@dataclass(frozen=True)
class ExpansionTerm:
    r: Fraction
    j: int
    coef: complex
    stderr: float = 0.0


@dataclass
class AsymptoticExpansion:
    """Per-side terms of an expansion at 0.

    ``kind="density"``: J(sigma |s|) ~ sum c |s|^(r-1) log^j |s| (fiber densities).
    ``kind="profile"``: phi(sigma s0 x) ~ sum c x^r log^j x for x in (0, 1]
    (the integrand of the signed Mellin transform, normalized by s0).
    """

    plus: list[ExpansionTerm] = field(default_factory=list)
    minus: list[ExpansionTerm] = field(default_factory=list)
    kind: str = "density"
    s0: float = 1.0
    nu_max: int = 0
    residual: float = 0.0
    covariance: dict = field(default_factory=dict)  # side -> (n_terms, n_terms) array
    dim: int | None = None

    def __post_init__(self):
        if self.kind not in ("density", "profile"):
            raise ValueError(f"unknown expansion kind {self.kind!r}")
        if self.dim is not None:
            for t in self.plus + self.minus:
                if t.j > self.dim - 1:
                    raise ValueError(f"log power {t.j} exceeds n = {self.dim - 1}")

    def side(self, sigma: str) -> list[ExpansionTerm]:
        return self.plus if sigma == "+" else self.minus

    def is_empty(self) -> bool:
        return not self.plus and not self.minus

    def support(self) -> dict[str, set]:
        return {s: {(t.r, t.j) for t in self.side(s)} for s in SIDES}

    def scale(self) -> float:
        return max((abs(t.coef) for t in self.plus + self.minus), default=0.0)

    def evaluate(self, s) -> np.ndarray:
        """Sum of the terms at signed points s != 0 (density kind: J(s); profile: phi(s))."""
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape, dtype=complex)
        for sigma, mask in (("+", s > 0), ("-", s < 0)):
            a = np.abs(s[mask])
            if self.kind == "profile":
                a = a / self.s0
            acc = np.zeros(a.shape, dtype=complex)
            for t in self.side(sigma):
                p = float(t.r) - (1.0 if self.kind == "density" else 0.0)
                acc += t.coef * a**p * np.log(a) ** t.j
            out[mask] = acc
        return out

    def as_profile(self, s0: float | None = None) -> AsymptoticExpansion:
        """Convert a density expansion of J to the profile phi(s) = s J(s) in x = |s| / s0."""
        if self.kind == "profile":
            if s0 is not None and not math.isclose(s0, self.s0):
                raise ValueError("profile already normalized with a different s0")
            return self
        s0 = self.s0 if s0 is None else s0
        L = math.log(s0)
        out = {}
        cov = {}
        for sigma in SIDES:
            terms = self.side(sigma)
            sign = 1.0 if sigma == "+" else -1.0
            keys = sorted({(t.r, i) for t in terms for i in range(t.j + 1)})
            index = {k: n for n, k in enumerate(keys)}
            M = np.zeros((len(keys), len(terms)))
            for n, t in enumerate(terms):
                base = sign * s0 ** float(t.r)
                for i in range(t.j + 1):
                    M[index[(t.r, i)], n] += base * comb(t.j, i) * L ** (t.j - i)
            c = np.array([t.coef for t in terms], dtype=complex)
            d = M @ c if len(terms) else np.zeros(0, dtype=complex)
            C = self._cov(sigma)
            Cd = M @ C @ M.T if len(terms) else np.zeros((0, 0))
            cov[sigma] = Cd
            out[sigma] = [
                ExpansionTerm(r, i, complex(d[n]), float(math.sqrt(max(Cd[n, n], 0.0))))
                for (r, i), n in index.items()
            ]
        return AsymptoticExpansion(out["+"], out["-"], "profile", s0, self.nu_max,
                                   self.residual, cov, self.dim)

    def _cov(self, sigma: str) -> np.ndarray:
        C = self.covariance.get(sigma)
        if C is not None:
            return np.asarray(C, dtype=float)
        return np.diag([t.stderr**2 for t in self.side(sigma)])

    def significant(self, z: float = 5.0, rel_tol: float = 1e-10) -> AsymptoticExpansion:
        """Drop terms indistinguishable from 0 (|c| <= z * stderr or below rel_tol * scale)."""
        scale = self.scale()
        keep = {}
        cov = {}
        for sigma in SIDES:
            terms = self.side(sigma)
            idx = [n for n, t in enumerate(terms)
                   if abs(t.coef) > z * t.stderr and abs(t.coef) > rel_tol * scale]
            keep[sigma] = [terms[n] for n in idx]
            C = self.covariance.get(sigma)
            if C is not None:
                cov[sigma] = np.asarray(C)[np.ix_(idx, idx)]
        return replace(self, plus=keep["+"], minus=keep["-"], covariance=cov)

    def combine(self, a: complex, other: AsymptoticExpansion, b: complex) -> AsymptoticExpansion:
        """a * self + b * other (same kind and s0); covariances are dropped."""
        if self.kind != other.kind or not math.isclose(self.s0, other.s0):
            raise ValueError("expansions of different kind or normalization")
        out = {}
        for sigma in SIDES:
            acc: dict = {}
            for w, terms in ((a, self.side(sigma)), (b, other.side(sigma))):
                for t in terms:
                    c, e = acc.get((t.r, t.j), (0j, 0.0))
                    acc[(t.r, t.j)] = (c + w * t.coef, math.hypot(e, abs(w) * t.stderr))
            out[sigma] = [ExpansionTerm(r, j, c, e) for (r, j), (c, e) in sorted(acc.items())]
        return AsymptoticExpansion(out["+"], out["-"], self.kind, self.s0,
                                   max(self.nu_max, other.nu_max), 0.0, {}, self.dim)


# ---------------------------------------------------------------------------
# pole tables


@dataclass(frozen=True)
class Pole:
    """F(lambda) ~ sum_l parts[l-1] / (lambda + r)^l near lambda = -r."""

    r: Fraction
    parts: tuple[complex, ...]
    sigmas: tuple[float, ...] = ()

    @property
    def location(self) -> Fraction:
        return -self.r

    @property
    def order(self) -> int:
        return len(self.parts)

    @property
    def residue(self) -> complex:
        return self.parts[0]

    @property
    def coset(self) -> Fraction:
        return self.r - math.floor(self.r)


@dataclass
class PoleTable:
    poles: list[Pole] = field(default_factory=list)
    prefactor_included: bool = False
    s0: float = 1.0          # F uses (s/s0)^lambda
    normalized: bool = True  # False once converted to plain s^lambda
    max_order: int | None = None

    def __post_init__(self):
        rs = [p.r for p in self.poles]
        if len(set(rs)) != len(rs):
            raise ValueError("pole locations must be distinct")
        self.poles.sort(key=lambda p: p.r)
        if self.max_order is not None:
            for p in self.poles:
                if p.order > self.max_order:
                    raise ValueError(f"pole at {p.location} has order {p.order} > {self.max_order}")

    def __len__(self):
        return len(self.poles)

    def __iter__(self):
        return iter(self.poles)

    def get(self, r) -> Pole | None:
        r = Fraction(r)
        return next((p for p in self.poles if p.r == r), None)

    def locations(self) -> list[Fraction]:
        return [p.location for p in self.poles]

    def orders(self) -> dict[Fraction, int]:
        return {p.location: p.order for p in self.poles}

    def cosets(self) -> dict[Fraction, int]:
        """Coset u -> maximal pole order among poles at -u - nu."""
        out: dict[Fraction, int] = {}
        for p in self.poles:
            out[p.coset] = max(out.get(p.coset, 0), p.order)
        return out

    def with_prefactor(self) -> PoleTable:
        """Multiply by 1/(i pi): the signed Mellin transform rather than the bracket F."""
        if self.prefactor_included:
            return self
        f = 1 / (1j * math.pi)
        poles = [Pole(p.r, tuple(f * c for c in p.parts), tuple(abs(f) * s for s in p.sigmas))
                 for p in self.poles]
        return PoleTable(poles, True, self.s0, self.normalized, self.max_order)

    def unnormalized(self) -> PoleTable:
        """Principal parts of s0^lambda F(lambda), i.e. with plain s^lambda in the integrand."""
        if not self.normalized:
            return self
        L = math.log(self.s0)
        poles = []
        for p in self.poles:
            m = p.order
            fac = self.s0 ** (-float(p.r))
            parts = tuple(
                fac * sum(p.parts[l + q] * L**q / factorial(q) for q in range(m - l))
                for l in range(m)
            )
            sig = tuple(
                fac * math.sqrt(sum((p.sigmas[l + q] * abs(L) ** q / factorial(q)) ** 2
                                    for q in range(m - l)))
                for l in range(m)
            ) if p.sigmas else ()
            poles.append(Pole(p.r, parts, sig))
        return PoleTable(poles, self.prefactor_included, self.s0, False, self.max_order)

    def to_records(self) -> list[dict]:
        return [
            {
                "location": str(p.location),
                "order": p.order,
                "principal_parts": [[c.real, c.imag] for c in map(complex, p.parts)],
                "prefactor_included": self.prefactor_included,
            }
            for p in self.poles
        ]

    @classmethod
    def from_records(cls, records: list[dict], s0: float = 1.0) -> PoleTable:
        prefactor = bool(records[0]["prefactor_included"]) if records else False
        poles = []
        for rec in records:
            parts = tuple(complex(a, b) for a, b in rec["principal_parts"])
            if len(parts) != rec["order"]:
                raise ValueError("order does not match the number of principal parts")
            poles.append(Pole(-Fraction(rec["location"]), parts))
        return cls(poles, prefactor, s0)


def laurent_parts(profile: AsymptoticExpansion, r_max=None) -> dict[Fraction, dict]:
    """Principal parts of F at lambda = -r from a profile expansion.

    F(lambda) = int_0^1 x^lambda phi(s0 x) dx/x - e^{-i pi lambda} int_0^1 x^lambda phi(-s0 x) dx/x.
    A term c x^r log^j x contributes c (-1)^j j! / (lambda + r)^(j+1) on the + side; on the
    - side the same times -e^{i pi r} e^{-i pi mu}, expanded in mu = lambda + r.

    Returns r -> {"weights": {(side, term index): array over l}, "parts": array}
    where parts[l-1] is the coefficient of mu^-l.
    """
    if profile.kind != "profile":
        raise ValueError("laurent_parts needs a profile expansion")
    out: dict[Fraction, dict] = {}
    for sigma in SIDES:
        for n, t in enumerate(profile.side(sigma)):
            if r_max is not None and t.r > r_max:
                continue
            entry = out.setdefault(t.r, {"weights": {}, "order": 0})
            w = np.zeros(t.j + 1, dtype=complex)  # w[l-1] multiplies mu^-l
            base = (-1) ** t.j * factorial(t.j)
            if sigma == "+":
                w[t.j] = base
            else:
                rot = -complex(np.exp(1j * math.pi * float(t.r)))
                for m in range(t.j + 1):
                    w[t.j - m] += base * rot * (-1j * math.pi) ** m / factorial(m)
            entry["weights"][(sigma, n)] = w
            entry["order"] = max(entry["order"], t.j + 1)
    for r, entry in out.items():
        parts = np.zeros(entry["order"], dtype=complex)
        for (sigma, n), w in entry["weights"].items():
            parts[: len(w)] += w * profile.side(sigma)[n].coef
        entry["parts"] = parts
    return out


def pole_table_from_profile(profile: AsymptoticExpansion, *, rel_tol: float = 1e-4,
                            z: float = 5.0, r_max=None, scale: float | None = None,
                            max_order: int | None = None) -> PoleTable:
    """Assemble and threshold the pole table of a profile expansion.

    A principal-part coefficient counts as zero when |p| < rel_tol * scale or when
    |p| <= z * sigma (sigma propagated from the term covariances).
    """
    scale = profile.scale() if scale is None else scale
    covs = {s: profile._cov(s) for s in SIDES}
    poles = []
    for r, entry in sorted(laurent_parts(profile, r_max).items()):
        parts = entry["parts"]
        var = np.zeros(len(parts))
        for sigma in SIDES:
            idx = [n for (s, n) in entry["weights"] if s == sigma]
            if not idx:
                continue
            W = np.zeros((len(parts), len(idx)), dtype=complex)
            for col, n in enumerate(idx):
                w = entry["weights"][(sigma, n)]
                W[: len(w), col] = w
            C = covs[sigma][np.ix_(idx, idx)]
            var += np.real(np.einsum("li,ij,lj->l", W, C, W.conj()))
        sig = np.sqrt(np.maximum(var, 0.0))
        nonzero = (np.abs(parts) >= rel_tol * scale) & (np.abs(parts) > z * sig)
        if not nonzero.any():
            continue
        m = int(np.max(np.nonzero(nonzero)[0])) + 1
        poles.append(Pole(r, tuple(complex(c) for c in parts[:m]), tuple(float(x) for x in sig[:m])))
    return PoleTable(poles, False, profile.s0, True, max_order)


def support_from_poles(table: PoleTable) -> set[tuple[Fraction, int]]:
    """Inverse reading: a pole of order m at -r means a log power m - 1 at exponent r."""
    return {(p.r, p.order - 1) for p in table}
