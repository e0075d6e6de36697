"""Fiber integrals J(s) with g dx = J(s) ds, exact in d = 1 and sampled in d <= 2.

Expansion terms of a density are read as c |s|^(r-1) log^j |s| on each side,
so a term with exponent r produces poles at lambda = -r.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import DomainError, EmptyRegion, IllConditioned, UnsupportedFamily
from .expansion import SIDES, AsymptoticExpansion, ExpansionTerm
from .mellin import TwoSidedFunction
from .model import (
    BrieskornPham,
    ExponentLattice,
    Monomial1D,
    PhaseGerm,
    RegionCombination,
    TestDensity,
)

BINS_PER_DECADE = 16
HALF_WIDTH = math.log(10) / BINS_PER_DECADE
MAX_CONDITION = 1e12

_SIGN = {"+": 1, "-": -1}


# ---------------------------------------------------------------------------
# exact oracle for f = eps x^k


def exact_fiber_1d(phase: PhaseGerm, A: RegionCombination, g: TestDensity,
                   s0: float | None = None) -> TwoSidedFunction:
    """Closed-form J for f = eps x^k using only the polynomial part of g.

    Roots of eps x^k = s are x = t |s|^(1/k) with t = +-1 and t^k = eps sign(s), so

        J(s) = sum_i [sum_t a(t) t^i] m_i / k * |s|^((i+1)/k - 1).

    The result is restricted to |s| <= s0, where the cutoff of g is inactive
    when s0 <= (radius/2)^k.
    """
    fam = phase.family
    if not isinstance(fam, Monomial1D):
        raise UnsupportedFamily(f"exact fiber integral needs f = eps x^k, got {fam}")
    k, eps = fam.k, fam.eps
    s0 = phase.s0 if s0 is None else s0
    m = g.coefficients_1d()
    terms = {}
    for sigma in SIDES:
        out = []
        for i, mi in enumerate(m):
            if not mi:
                continue
            c = 0j
            for t in (1, -1):
                if t**k == eps * _SIGN[sigma]:
                    c += complex(A.coefficient((t,))) * t**i
            if c:
                out.append(ExpansionTerm(Fraction(i + 1, k), 0, c * float(mi) / k))
        terms[sigma] = out
    exp = AsymptoticExpansion(terms["+"], terms["-"], "density", s0, 0, dim=1)

    def side(sigma):
        if not terms[sigma]:
            return None
        ts = terms[sigma]
        return lambda a: sum(t.coef * np.asarray(a, dtype=float) ** (float(t.r) - 1) for t in ts)

    return TwoSidedFunction(side("+"), side("-"), s0, s0, exp, "density")


# ---------------------------------------------------------------------------
# Monte Carlo sampling


@dataclass
class FiberSamples:
    """Binned estimates of J on geometric grids toward 0.

    ``halfwidth`` is the half-width in log|s| of the triangular kernel used for
    binning; 0 means the values are point evaluations.
    """

    side: np.ndarray
    s: np.ndarray
    J: np.ndarray
    stderr: np.ndarray
    halfwidth: float = HALF_WIDTH
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.side = np.asarray(self.side, dtype="<U1")
        self.s = np.asarray(self.s, dtype=float)
        self.J = np.asarray(self.J, dtype=complex)
        self.stderr = np.asarray(self.stderr, dtype=float)

    @property
    def sides(self) -> list[str]:
        return [s for s in SIDES if np.any(self.side == s)]

    def select(self, sigma: str):
        m = self.side == sigma
        return np.abs(self.s[m]), self.J[m], self.stderr[m]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        meta = dict(self.meta, halfwidth=self.halfwidth)
        buf.write("# " + json.dumps(meta, sort_keys=True, default=str) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["side", "s", "J", "stderr"])
        real = np.all(self.J.imag == 0)
        for sd, s, J, e in zip(self.side, self.s, self.J, self.stderr):
            w.writerow([sd, repr(float(s)), repr(float(J.real)) if real else repr(complex(J)), repr(float(e))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> FiberSamples:
        """Read the CSV layout written by :meth:`to_csv` (path or text)."""
        text = source
        if "\n" not in str(source):
            with open(source) as fh:
                text = fh.read()
        lines = text.splitlines()
        meta = {}
        if lines and lines[0].startswith("#"):
            meta = json.loads(lines[0][1:])
            lines = lines[1:]
        rows = list(csv.DictReader(lines))
        if not rows or set(rows[0]) != {"side", "s", "J", "stderr"}:
            raise ValueError("expected columns side,s,J,stderr")
        for r in rows:
            if r["side"] not in SIDES:
                raise ValueError(f"bad side {r['side']!r}")
        return cls(
            [r["side"] for r in rows],
            [float(r["s"]) for r in rows],
            [complex(r["J"]) for r in rows],
            [float(r["stderr"]) for r in rows],
            float(meta.pop("halfwidth", HALF_WIDTH)),
            meta,
        )

    def to_function(self, expansion: AsymptoticExpansion | None = None) -> TwoSidedFunction:
        """Piecewise log-linear interpolant of the binned values."""
        def side(sigma):
            a, J, _ = self.select(sigma)
            if not len(a):
                return None
            order = np.argsort(a)
            la, Jr = np.log(a[order]), J[order]
            return lambda x: np.interp(np.log(x), la, Jr.real) + 1j * np.interp(np.log(x), la, Jr.imag)

        top = float(np.max(np.abs(self.s))) if len(self.s) else 1.0
        s0 = expansion.s0 if expansion is not None else top
        return TwoSidedFunction(side("+"), side("-"), max(top, s0), s0, expansion, "density")


def default_grid(s_max: float, decades: float = 4.0) -> np.ndarray:
    """Bin centres |s|, geometric with 16 per decade, ``decades`` deep below s_max.

    The top centre sits one bin below s_max so that no kernel reaches past it.
    """
    n = int(round(decades * BINS_PER_DECADE))
    return s_max * 10.0 ** (-(np.arange(n)[::-1] + 1) / BINS_PER_DECADE)


def _homogeneous_degree(phase) -> int | None:
    degs = {sum(m) for m in phase.poly}
    return degs.pop() if len(degs) == 1 else None


def _level_proposal(phase, deg, t_lo, t_hi, cells=4096):
    """Angle density for the level-uniform component.

    Along {|f| = s} the angular weight of J is ~ 1/|f(theta)|, so half the
    angles follow that (floored at the smallest level on the ball) and half
    are uniform.  Piecewise constant on ``cells`` cells.
    """
    mid = (np.arange(cells) + 0.5) * (2 * np.pi / cells)
    gv = np.abs(phase(np.stack([np.cos(mid), np.sin(mid)], axis=1)))
    inv = 1.0 / np.maximum(gv, math.exp(t_lo) / phase.radius**deg)
    dens = 0.5 / (2 * np.pi) + 0.5 * inv / (inv.sum() * 2 * np.pi / cells)
    cdf = np.cumsum(dens) * (2 * np.pi / cells)
    cdf /= cdf[-1]
    return deg, t_lo, t_hi, cdf, dens


def _sample_batch(phase, A, g, rng, n, r_min, mix, level=None):
    # mixture of uniform-in-ball and log-uniform-radius proposals, balance heuristic;
    # for homogeneous plane phases a third component makes log|f| uniform
    R = phase.radius
    d = phase.dim
    L = math.log(R / r_min)
    if d == 1:
        n_u = int(round(mix * n))
        n_l = n - n_u
        xu = rng.uniform(-R, R, n_u)
        xl = np.exp(rng.uniform(math.log(r_min), math.log(R), n_l)) * rng.choice([-1.0, 1.0], n_l)
        x = np.concatenate([xu, xl])[:, None]
        r = np.abs(x[:, 0])
        q = mix / (2 * R) + (1 - mix) * np.where(r >= r_min, 1.0 / (2 * r * L), 0.0)
    elif d == 2:
        n_v = n // 2 if level is not None else 0
        # the radial proposals are rotation invariant, so every base draw is used
        # with its four quarter-turn images (antithetic variates, still unbiased)
        m_u = int(round(mix * (n - n_v))) // 4
        m_l = (n - n_v) // 4 - m_u
        ru = R * np.sqrt(rng.uniform(0, 1, m_u))
        rl = np.exp(rng.uniform(math.log(r_min), math.log(R), m_l))
        r = np.tile(np.concatenate([ru, rl]), 4)
        th = rng.uniform(0, np.pi / 2, m_u + m_l)
        th = np.concatenate([th + k * np.pi / 2 for k in range(4)])
        if n_v:
            deg, t_lo, t_hi, cdf, dens = level
            cells = len(dens)
            ci = np.minimum(np.searchsorted(cdf, rng.uniform(0, 1, n_v), side="right"), cells - 1)
            tv = (ci + rng.uniform(0, 1, n_v)) * (2 * np.pi / cells)
            unit = np.stack([np.cos(tv), np.sin(tv)], axis=1)
            with np.errstate(divide="ignore", over="ignore"):
                lr = (rng.uniform(t_lo, t_hi, n_v) - np.log(np.abs(phase(unit)))) / deg
                rv = np.minimum(np.exp(np.minimum(lr, 50.0)), 2 * R)  # beyond R the integrand is 0
            r = np.concatenate([r, rv])
            th = np.concatenate([th, tv])
        n = len(r)
        x = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
        with np.errstate(divide="ignore"):
            q = 4 * m_u / (np.pi * R * R) + 4 * m_l * np.where(r >= r_min, 1.0 / (2 * np.pi * L * r * r), 0.0)
            if n_v:
                t = np.log(np.abs(phase(x)))
                inside = (t >= t_lo) & (t <= t_hi)
                cell = (np.mod(th, 2 * np.pi) * (cells / (2 * np.pi))).astype(np.int64) % cells
                q = q + n_v * np.where(inside, dens[cell] * deg / ((t_hi - t_lo) * r * r), 0.0)
        q = q / n
    else:
        raise UnsupportedFamily("Monte Carlo sampling is limited to d <= 2")
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(q > 0, A.weights(phase, x) * g(x) / np.where(q > 0, q, 1.0), 0.0)
    return phase(x), w, n


def _bin(fv, w, sigma, log_centres, halfwidth):
    # triangular kernel in log|s|; returns sum_i w_i k(log|f_i| - t_b)
    sel = (np.sign(fv) == _SIGN[sigma]) & (w != 0)
    t = np.log(np.abs(fv[sel]))
    ww = w[sel]
    t0 = log_centres[0]
    pos = (t - t0) / halfwidth
    lo = np.floor(pos).astype(np.int64)
    frac = pos - lo
    nb = len(log_centres)
    out = np.zeros(nb, dtype=complex)
    for idx, wt in ((lo, 1 - frac), (lo + 1, frac)):
        ok = (idx >= 0) & (idx < nb)
        out += np.bincount(idx[ok], weights=(ww[ok] * wt[ok]).real, minlength=nb)
        out += 1j * np.bincount(idx[ok], weights=(ww[ok] * wt[ok]).imag, minlength=nb)
    return out / halfwidth, int(np.count_nonzero(sel))


def sample_fiber_integral(phase: PhaseGerm, A: RegionCombination, g: TestDensity,
                          grid: np.ndarray | None = None, n: int = 1_000_000, seed: int = 0,
                          batches: int = 16, workers: int = 1, chunk: int = 500_000,
                          mix: float = 0.3) -> FiberSamples:
    """Estimate J(s) on a geometric grid toward 0 on each side that f attains.

    The grid is spaced by the kernel half-width in log|s| (16 bins per decade),
    so the triangular kernel is a partition of unity.  Standard errors come
    from the spread of ``batches`` independent seed-spawned batches.
    """
    if A.is_zero():
        raise EmptyRegion("region combination has no nonzero coefficient")
    if phase.dim > 2:
        raise UnsupportedFamily("Monte Carlo sampling is limited to d <= 2")
    grid = default_grid(phase.s0) if grid is None else np.sort(np.abs(np.asarray(grid, float)))
    log_c = np.log(grid)
    if not np.allclose(np.diff(log_c), HALF_WIDTH, rtol=1e-6):
        raise DomainError("grid must be geometric with 16 points per decade")
    # smallest radius worth resolving: where the lowest-order part of f reaches the grid floor
    deg = max(phase.min_degree, 1)
    r_min = min(phase.radius * 1e-3, (grid[0] / 10) ** (1.0 / deg))
    per = [n // batches + (1 if b < n % batches else 0) for b in range(batches)]
    hd = _homogeneous_degree(phase) if phase.dim == 2 else None
    # log|f| range seen by the kernels, widened by two half-widths
    level = _level_proposal(phase, hd, log_c[0] - 2 * HALF_WIDTH, log_c[-1] + 2 * HALF_WIDTH) if hd else None
    seqs = np.random.SeedSequence(seed).spawn(batches)

    def run(b):
        rng = np.random.default_rng(seqs[b])
        acc = {s: [] for s in SIDES}
        counts = {s: 0 for s in SIDES}
        left = per[b]
        used = 0
        while left > 0:
            m = min(chunk, left)
            fv, w, got = _sample_batch(phase, A, g, rng, m, r_min, mix, level)
            used += got
            for sigma in SIDES:
                h, c = _bin(fv, w, sigma, log_c, HALF_WIDTH)
                acc[sigma].append(h)
                counts[sigma] += c
            left -= m
        return acc, counts, used

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, range(batches)))
    else:
        results = [run(b) for b in range(batches)]

    sides, svals, Js, errs = [], [], [], []
    populated = []
    for sigma in SIDES:
        if sum(r[1][sigma] for r in results) == 0:
            continue
        populated.append(sigma)
        # per-batch estimates of J; fixed-order compensated sums
        est = np.empty((batches, len(grid)), dtype=complex)
        for b, (acc, _, used) in enumerate(results):
            parts = np.array(acc[sigma])
            re = [math.fsum(parts[:, i].real) for i in range(len(grid))]
            im = [math.fsum(parts[:, i].imag) for i in range(len(grid))]
            est[b] = (np.array(re) + 1j * np.array(im)) / used / grid
        used_all = np.array([r[2] for r in results], float)
        wts = used_all / used_all.sum()
        mean = np.array([complex(math.fsum((wts * est[:, i].real)), math.fsum(wts * est[:, i].imag))
                         for i in range(len(grid))])
        if batches > 1:
            err = np.sqrt(np.sum(np.abs(est - mean) ** 2, axis=0) / (batches - 1) / batches)
        else:
            err = np.full(len(grid), np.nan)
        sides += [sigma] * len(grid)
        svals += list(_SIGN[sigma] * grid)
        Js += list(mean)
        errs += list(err)
    meta = dict(phase=str(phase), region=str(A), g=str(g), n=int(sum(r[2] for r in results)), seed=int(seed),
                batches=int(batches), s0=phase.s0, radius=phase.radius, dim=phase.dim,
                sides="".join(populated))
    return FiberSamples(sides, svals, Js, errs, HALF_WIDTH, meta)


# ---------------------------------------------------------------------------
# kernel smoothing and oracles

_GL_T, _GL_W = np.polynomial.legendre.leggauss(16)


def _kernel_nodes(halfwidth):
    # Gauss nodes on [-h, 0] and [0, h] with triangular weights (1 - |u|/h)/h
    u = np.concatenate([0.5 * halfwidth * (_GL_T - 1), 0.5 * halfwidth * (_GL_T + 1)])
    w = np.concatenate([_GL_W, _GL_W]) * 0.5 * halfwidth
    return u, w * (1 - np.abs(u) / halfwidth) / halfwidth


def smooth(fn, a: np.ndarray, halfwidth: float = HALF_WIDTH) -> np.ndarray:
    """Kernel-smoothed value of a density at |s| = a, matching the binning.

    The binned estimate at centre a is (1/a) int k(u) (e^{t} J(e^{t})) dt with
    t = log a + u, which is what this returns for ``fn`` = J on one side.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if halfwidth == 0:
        return np.asarray(fn(a), dtype=complex)
    u, w = _kernel_nodes(halfwidth)
    pts = a[:, None] * np.exp(u)[None, :]
    vals = np.asarray(fn(pts.ravel()), dtype=complex).reshape(pts.shape)
    return (vals * pts * w[None, :]).sum(axis=1) / a


def exact_samples(J: TwoSidedFunction, grid: np.ndarray | None = None,
                  halfwidth: float = HALF_WIDTH) -> FiberSamples:
    """Noise-free samples of a known density on the same grid as the sampler."""
    grid = default_grid(J.s0) if grid is None else np.asarray(grid, float)
    sides, s, vals = [], [], []
    for sigma in SIDES:
        if not J.has_side(sigma):
            continue
        fn = J.pos if sigma == "+" else J.neg
        v = smooth(lambda a: np.asarray(fn(a), dtype=complex) * np.ones(np.shape(a)), grid, halfwidth)
        sides += [sigma] * len(grid)
        s += list(_SIGN[sigma] * grid)
        vals += list(v)
    return FiberSamples(sides, s, vals, np.zeros(len(s)), halfwidth, {"exact": True, "s0": J.s0})


def _graded_reference(levels=22, ratio=4.0, order=8):
    # Gauss-Legendre panels on [0, 1] refined geometrically toward both ends
    t, w = np.polynomial.legendre.leggauss(order)
    g = 0.5 * ratio ** -np.arange(levels, dtype=float)[::-1]
    edges = np.unique(np.concatenate([[0.0], g, 1 - g, [1.0]]))
    a, b = edges[:-1, None], edges[1:, None]
    return (0.5 * (b - a) * t + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * w).ravel()


_REF_X, _REF_W = _graded_reference()


def level_set_density(phase: PhaseGerm, A: RegionCombination, g: TestDensity, s) -> np.ndarray:
    """J(s) for a homogeneous two-variable phase by quadrature along rays.

    With f = r^a q(theta) the level set meets each ray once where s q > 0, at
    r = (s/q)^(1/a), and the coarea factor is r / |d_r f| = r^(2-a) / (a |q|).
    The angular integral runs over panels graded toward the zeros of q and
    toward the angles where the ray leaves the cutoff radii.
    """
    fam = phase.family
    if not (isinstance(fam, BrieskornPham) and len(set(fam.exponents)) == 1):
        raise UnsupportedFamily("level-set oracle needs a homogeneous Brieskorn-Pham phase")
    a = fam.exponents[0]
    signs = np.array(fam.signs, float)
    R = phase.radius

    def q(th):
        return signs[0] * np.cos(th) ** a + signs[1] * np.sin(th) ** a

    th_grid = np.linspace(0, 2 * np.pi, 4097)
    q_grid = q(th_grid)

    def crossings(level):
        # all theta with q(theta) = level, by vectorized bisection on bracketing cells
        d = np.sign(q_grid - level)
        i = np.nonzero(d[:-1] * d[1:] <= 0)[0]
        lo, hi = th_grid[i], th_grid[i + 1]
        flo = q(lo) - level
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            fm = q(mid) - level
            left = flo * fm <= 0
            hi = np.where(left, mid, hi)
            lo = np.where(left, lo, mid)
            flo = np.where(left, flo, fm)
        return 0.5 * (lo + hi)

    out = []
    for sv in np.atleast_1d(np.asarray(s, float)):
        if sv == 0:
            out.append(np.nan)
            continue
        pts = {0.0, 2 * np.pi}
        for level in (0.0, sv / (R / 2) ** a, sv / R**a):
            pts.update(crossings(level).tolist())
        edges = np.array(sorted(pts))
        width = np.diff(edges)
        keep = width > 1e-15
        lo, width = edges[:-1][keep, None], width[keep, None]
        th = (lo + width * _REF_X).ravel()
        w = (width * _REF_W).ravel()
        qq = q(th)
        ok = sv * qq > 0
        r = np.zeros_like(th)
        r[ok] = (sv / qq[ok]) ** (1.0 / a)
        ok &= r < R
        th, w, qq, r = th[ok], w[ok], qq[ok], r[ok]
        xy = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
        val = A.weights(phase, xy) * g(xy) * r ** (2 - a) / (a * np.abs(qq))
        out.append(complex(np.sum(val * w)))
    return np.array(out)


def level_set_samples(phase: PhaseGerm, A: RegionCombination, g: TestDensity,
                      grid: np.ndarray | None = None, halfwidth: float = HALF_WIDTH) -> FiberSamples:
    """Oracle samples from :func:`level_set_density`, kernel-smoothed like the sampler."""
    grid = default_grid(phase.s0) if grid is None else np.asarray(grid, float)
    sides, s, vals = [], [], []
    for sigma in SIDES:
        fn = lambda a, sg=_SIGN[sigma]: level_set_density(phase, A, g, sg * np.asarray(a))  # noqa: E731
        v = smooth(fn, grid, halfwidth)
        if not np.any(v):
            continue
        sides += [sigma] * len(grid)
        s += list(_SIGN[sigma] * grid)
        vals += list(v)
    return FiberSamples(sides, s, vals, np.zeros(len(s)), halfwidth,
                        {"exact": True, "oracle": "level-set", "s0": phase.s0, "phase": str(phase),
                         "dim": phase.dim})


# ---------------------------------------------------------------------------
# fitting


def _basis(a, r, j, halfwidth, s0):
    # kernel-smoothed x^(r-1) log^j x with x = |s| / s0
    fn = lambda z: (z / s0) ** (float(r) - 1) * np.log(z / s0) ** j  # noqa: E731
    return smooth(fn, a, halfwidth).real


def fit_expansion(samples: FiberSamples, lattice: ExponentLattice, nu_max: int | None = None,
                  dim: int | None = None, window: tuple[float, float] | None = None,
                  s0: float | None = None) -> AsymptoticExpansion:
    """Weighted least squares for the density expansion on each populated side.

    The basis is |s|^(r-1) log^j |s| for (r, j) from the lattice with r up to
    nu_max + largest coset and j < min(order bound, dim).  Each basis function
    is smoothed by the same kernel as the data, so binning bias does not leak
    into the coefficients.  Returns a density expansion with covariances.
    """
    dim = int(dim or samples.meta.get("dim", 1))
    nu_max = lattice.nu_max if nu_max is None else nu_max
    lat = ExponentLattice(lattice.cosets, nu_max)
    s0 = float(s0 or samples.meta.get("s0") or np.max(np.abs(samples.s)))
    lo, hi = window if window is not None else (0.0, s0 * (1 + 1e-9))
    r_cut = nu_max + max(lat.cosets, default=Fraction(0))
    exps = [(r, j) for r, j in lat.exponents(max_log=dim - 1, r_max=r_cut)]
    terms, covs, chi = {}, {}, []
    for sigma in SIDES:
        a, J, err = samples.select(sigma)
        keep = (a >= lo) & (a <= hi)
        a, J, err = a[keep], J[keep], err[keep]
        if not len(a) or not np.any(J):
            terms[sigma] = []
            covs[sigma] = np.zeros((0, 0))
            continue
        if math.log10(a.max() / a.min()) < 3 - 0.1:
            raise DomainError(f"side {sigma}: the grid spans fewer than 3 decades")
        exact = bool(samples.meta.get("exact")) or not np.any(err > 0)
        if exact:
            sig = 1e-12 * np.abs(J) + 1e-300
        else:
            ok = err > 0
            a, J, err = a[ok], J[ok], err[ok]
            sig = err
        X = np.stack([_basis(a, r, j, samples.halfwidth, s0) for r, j in exps], axis=1)
        Xw = X / sig[:, None]
        yw = J / sig
        norms = np.linalg.norm(Xw, axis=0)
        norms[norms == 0] = 1
        Xn = Xw / norms
        cond = np.linalg.cond(Xn)
        if cond > MAX_CONDITION:
            raise IllConditioned(f"side {sigma}: design matrix condition {cond:.2e} exceeds 1e12", cond)
        beta, *_ = np.linalg.lstsq(Xn, yw, rcond=None)
        beta = beta / norms
        resid = yw - Xw @ beta
        dof = max(len(a) - len(exps), 1)
        chi2 = float(np.sum(np.abs(resid) ** 2) / dof)
        chi.append(chi2)
        cov = np.linalg.pinv(Xn.T @ Xn) / np.outer(norms, norms)
        if exact:
            cov = np.zeros_like(cov)
        # x = |s|/s0 basis -> |s| basis: x^(r-1) log^j x = s0^(1-r) sum_i C(j,i) (-log s0)^(j-i) |s|^(r-1) log^i |s|
        M, out_keys = _to_s_basis(exps, s0)
        terms[sigma] = [ExpansionTerm(r, j, complex(c), float(math.sqrt(max(v, 0))))
                        for (r, j), c, v in zip(out_keys, M @ beta, np.diag(M @ cov @ M.T))]
        covs[sigma] = M @ cov @ M.T
    exp = AsymptoticExpansion(terms["+"], terms["-"], "density", s0, nu_max,
                              residual=max(chi, default=0.0), covariance=covs, dim=dim)
    return exp


def _to_s_basis(exps, s0):
    L = math.log(s0)
    keys = list(exps)
    index = {k: n for n, k in enumerate(keys)}
    M = np.zeros((len(keys), len(keys)))
    for col, (r, j) in enumerate(exps):
        scale = s0 ** (1 - float(r))
        for i in range(j + 1):
            M[index[(r, i)], col] += scale * math.comb(j, i) * (-L) ** (j - i)
    return M, keys
