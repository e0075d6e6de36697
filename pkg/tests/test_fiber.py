import math
from fractions import Fraction

import numpy as np
import pytest

from fiberpoles.errors import DomainError, EmptyRegion, IllConditioned
from fiberpoles.fiber import (
    FiberSamples,
    default_grid,
    exact_fiber_1d,
    exact_samples,
    fit_expansion,
    level_set_density,
    level_set_samples,
    sample_fiber_integral,
)
from fiberpoles.milnor1d import pham_spectrum
from fiberpoles.model import ExponentLattice, PhaseGerm, RegionCombination, TestDensity, parse_lattice


def region(phase, a, b):
    return RegionCombination.parse(f"+:{a},-:{b}", phase)


def root_sum_oracle(k, eps, a, b, gcoefs, s):
    # J(s) = sum over real roots of eps x^k = s of a(x) g(x) / |f'(x)|
    poly = np.zeros(k + 1)
    poly[0] = eps
    poly[-1] = -s
    out = 0.0
    for x in np.roots(poly):
        if abs(x.imag) > 1e-9:
            continue
        x = x.real
        coef = a if x > 0 else b
        gx = sum(c * x**i for i, c in enumerate(gcoefs))
        out += coef * gx / abs(eps * k * x ** (k - 1))
    return out


def test_exact_1d_examples():
    ph = PhaseGerm.monomial(2)
    J = exact_fiber_1d(ph, RegionCombination.parse("+:1", ph), TestDensity.constant(1))
    s = np.array([1e-4, 0.01, 0.2])
    assert np.allclose(J(s), 1 / (2 * np.sqrt(s)))
    assert np.all(J(-s) == 0)
    ph3 = PhaseGerm.monomial(3)
    J3 = exact_fiber_1d(ph3, RegionCombination.parse("all:1", ph3), TestDensity.constant(1))
    assert np.allclose(J3(s), np.abs(s) ** (-2 / 3) / 3)
    assert np.allclose(J3(-s), np.abs(s) ** (-2 / 3) / 3)
    Jx = exact_fiber_1d(ph, region(ph, 1, -1), TestDensity.parse("x", 1))
    assert np.allclose(Jx(s), 1.0)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("eps", [1, -1])
@pytest.mark.parametrize("ab", [(1, 0), (1, -1), (2, 1j)])
def test_exact_1d_matches_root_sum(k, eps, ab):
    ph = PhaseGerm.monomial(k, eps)
    gc = [1, -2, 0.5, 3]
    g = TestDensity.parse("1 - 2*x + 1/2*x^2 + 3*x^3", 1)
    J = exact_fiber_1d(ph, region(ph, *ab), g)
    for s in (0.003, -0.003, 0.1, -0.1):
        assert J(np.array([s]))[0] == pytest.approx(root_sum_oracle(k, eps, *ab, gc, s), rel=1e-12, abs=1e-12)


def test_mc_1d_agrees_with_exact():
    ph = PhaseGerm.monomial(2)
    A = RegionCombination.parse("+:1,-:1", ph)
    g = TestDensity.constant(1)
    S = sample_fiber_integral(ph, A, g, n=1_000_000, seed=7)
    assert S.sides == ["+"]
    ref = exact_samples(exact_fiber_1d(ph, A, g), default_grid(ph.s0))
    a, J, err = S.select("+")
    _, Jr, _ = ref.select("+")
    within = np.abs(J - Jr) <= 3 * err
    assert within.mean() >= 0.95


def test_mc_is_deterministic_and_linear_in_region():
    ph = PhaseGerm.parse("x^2 - y^2")
    g = TestDensity.constant(2)
    comps = ["+0+", "0+-", "0--", "-0+"]
    A = RegionCombination.parse(",".join(f"{c}:1" for c in comps[:2]), ph)
    B = RegionCombination.parse(",".join(f"{c}:1" for c in comps[2:]), ph)
    AB = RegionCombination.parse("all:1", ph)
    kw = dict(n=200_000, seed=3, batches=4)
    SA, SB, SAB = (sample_fiber_integral(ph, R, g, **kw) for R in (A, B, AB))
    again = sample_fiber_integral(ph, AB, g, **kw)
    assert np.array_equal(SAB.J, again.J)
    threaded = sample_fiber_integral(ph, AB, g, workers=4, **kw)
    assert np.array_equal(SAB.J, threaded.J)
    for sigma in "+-":
        jab = SAB.select(sigma)[1]
        ja = SA.select(sigma)[1] if sigma in SA.sides else 0
        jb = SB.select(sigma)[1] if sigma in SB.sides else 0
        assert np.allclose(jab, ja + jb, rtol=1e-10, atol=1e-12)


def test_mc_circle_density_and_positivity():
    ph = PhaseGerm.parse("x^2 + y^2")
    S = sample_fiber_integral(ph, RegionCombination.parse("all:1", ph), TestDensity.constant(2),
                              n=1_000_000, seed=1)
    assert S.sides == ["+"]  # s < 0: empty fiber
    a, J, err = S.select("+")
    assert np.all(J.real > -3 * err)
    small = a < 1e-3
    assert np.mean(np.abs(J[small] - math.pi) <= 3 * err[small]) >= 0.9


def test_saddle_populates_both_sides():
    ph = PhaseGerm.parse("x^2 - y^2")
    S = sample_fiber_integral(ph, RegionCombination.parse("all:1", ph), TestDensity.constant(2), n=100_000)
    assert S.sides == ["+", "-"]


def test_empty_region():
    ph = PhaseGerm.monomial(2)
    with pytest.raises(EmptyRegion):
        sample_fiber_integral(ph, RegionCombination.parse("", ph), TestDensity.constant(1))


def test_csv_round_trip(tmp_path):
    ph = PhaseGerm.monomial(3)
    S = sample_fiber_integral(ph, RegionCombination.parse("+:1,-:1i", ph), TestDensity.constant(1),
                              n=50_000, seed=5)
    path = tmp_path / "s.csv"
    S.to_csv(path)
    back = FiberSamples.from_csv(str(path))
    assert np.array_equal(back.J, S.J) and np.array_equal(back.s, S.s)
    assert back.meta["seed"] == 5 and back.halfwidth == S.halfwidth
    with pytest.raises(ValueError):
        FiberSamples.from_csv("a,b\n1,2\n")


def test_fit_exact_samples_single_term():
    ph = PhaseGerm.monomial(2)
    J = exact_fiber_1d(ph, RegionCombination.parse("all:1", ph), TestDensity.constant(1))
    exp = fit_expansion(exact_samples(J), ExponentLattice.from_denominator(2, nu_max=2))
    big = [t for t in exp.plus if abs(t.coef) > 1e-8]
    assert len(big) == 1
    assert big[0].r == Fraction(1, 2) and big[0].j == 0
    assert big[0].coef == pytest.approx(1.0, rel=1e-8)
    assert exp.minus == []


def test_fit_guards():
    ph = PhaseGerm.monomial(2)
    J = exact_fiber_1d(ph, RegionCombination.parse("all:1", ph), TestDensity.constant(1))
    short = exact_samples(J, default_grid(ph.s0, decades=2))
    with pytest.raises(DomainError):
        fit_expansion(short, parse_lattice("1/2"))
    with pytest.raises(IllConditioned):
        fit_expansion(exact_samples(J), ExponentLattice.from_denominator(24, nu_max=3))


def test_level_set_density_circle_area_derivative():
    ph = PhaseGerm.parse("x^2 + y^2")
    g = TestDensity.parse("1 + x^2 + y^2", 2)
    s = np.array([1e-4, 1e-2, 0.2])
    # d/ds of int_{r^2 < s} (1 + r^2) dA = pi (1 + s)
    assert np.allclose(level_set_density(ph, RegionCombination.parse("all:1", ph), g, s),
                       math.pi * (1 + s), rtol=1e-8)


@pytest.mark.slow
def test_saddle_oracle_has_equal_log_terms():
    ph = PhaseGerm.parse("x^2 - y^2")
    A = RegionCombination.parse("all:1", ph)
    O = level_set_samples(ph, A, TestDensity.constant(2))
    exp = fit_expansion(O, pham_spectrum((2, 2), nu_max=3, integers=True), window=(0, ph.s0 / 10))
    logs = {s: [t.coef for t in exp.side(s) if t.r == 1 and t.j == 1][0] for s in "+-"}
    # level sets x = rho cosh t give J(s) = -log|s| + O(1) with g = 1 near 0
    assert logs["+"] == pytest.approx(-1.0, rel=1e-4)
    assert logs["-"] == pytest.approx(logs["+"], rel=1e-8)
