import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fiberpoles.asympt import (
    direct_oscillatory_1d,
    evaluate_terms,
    expansion_support,
    fit_oscillatory,
    oscillatory_eval,
    oscillatory_terms_from_expansion,
    paired_table,
    poles_from_expansion,
    pushforward_1d,
)
from fiberpoles.errors import DomainError
from fiberpoles.expansion import AsymptoticExpansion, ExpansionTerm
from fiberpoles.mellin import lemma1_function
from fiberpoles.model import ExponentLattice, PhaseGerm, RegionCombination, TestDensity, parse_lattice

FRESNEL = math.sqrt(math.pi) * cmath.exp(1j * math.pi / 4)


def density(plus=(), minus=(), s0=1.0, dim=None):
    mk = lambda ts: [ExpansionTerm(Fraction(r), j, c) for r, j, c in ts]  # noqa: E731
    return AsymptoticExpansion(mk(plus), mk(minus), "density", s0, 0, dim=dim)


def test_one_sided_term_gives_simple_pole():
    table = poles_from_expansion(density(plus=[("1/3", 0, 2.5)]))
    [p] = table.poles
    assert p.location == Fraction(-1, 3) and p.order == 1
    assert p.residue == pytest.approx(2.5)


def test_smooth_pair_has_no_pole():
    # J = 1 on both sides: phi(s) = s is smooth through 0
    assert poles_from_expansion(density(plus=[(1, 0, 1.0)], minus=[(1, 0, 1.0)])).poles == []


def test_lemma1_data_residue():
    exp = lemma1_function([2, 1], [5], Fraction(1, 3)).expansion
    p = poles_from_expansion(exp).get(Fraction(1, 3))
    assert p.residue == pytest.approx(-3)


term = st.tuples(st.sampled_from(["1/3", "1/2", "2/3", "1", "3/2", "2"]), st.integers(0, 1),
                 st.complex_numbers(min_magnitude=0.1, max_magnitude=5, allow_nan=False, allow_infinity=False))


@settings(max_examples=60, deadline=None)
@given(st.lists(term, min_size=1, max_size=4, unique_by=lambda t: t[:2]),
       st.lists(term, max_size=4, unique_by=lambda t: t[:2]))
def test_round_trip_support(plus, minus):
    # skip the non-generic pairs whose top Laurent parts cancel (phi smooth through 0)
    pm = {(Fraction(r), j): c for r, j, c in minus}
    for r, j, c in plus:
        rr = Fraction(r)
        if (rr, j) in pm and rr.denominator == 1:
            assume(abs(c + pm[(rr, j)] * cmath.exp(1j * math.pi * rr)) > 0.05)
    exp = density(plus, minus, dim=2)
    got = expansion_support(poles_from_expansion(exp, rel_tol=1e-12, z=0))
    want = {}
    for r, j, _ in plus + minus:
        want[Fraction(r)] = max(want.get(Fraction(r), 0), j)
    # generic complex coefficients: no accidental cancellation of the top order
    assert got == {(r, j) for r, j in want.items()}


def test_dictionary_examples():
    [t] = oscillatory_terms_from_expansion(density(plus=[(1, 0, 1.0)]))
    assert (t.r, t.j) == (1, 0) and t.coef == pytest.approx(1j)
    [t] = oscillatory_terms_from_expansion(density(plus=[("1/2", 0, 1.0)]))
    assert t.coef == pytest.approx(FRESNEL, rel=1e-12)
    assert oscillatory_terms_from_expansion(density()) == []
    with pytest.raises(DomainError):
        oscillatory_terms_from_expansion(density(plus=[(0, 0, 1.0)]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["1/3", "1/2", "1", "5/4"]), st.integers(0, 1),
                          st.floats(-3, 3).filter(lambda v: abs(v) > 1e-3)),
                min_size=1, max_size=3, unique_by=lambda t: t[:2]),
       st.booleans())
def test_direction_symmetry(ts, both):
    exp = density(plus=ts, minus=ts if both else (), dim=2)
    fwd = {(t.r, t.j): t.coef for t in oscillatory_terms_from_expansion(exp, 1)}
    bwd = {(t.r, t.j): t.coef for t in oscillatory_terms_from_expansion(exp, -1)}
    assert fwd.keys() == bwd.keys()
    for k in fwd:
        assert bwd[k] == pytest.approx(fwd[k].conjugate(), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("tau", [10.0, 100.0, 1000.0, -300.0])
def test_eval_against_direct_quadrature(k, tau):
    ph = PhaseGerm.monomial(k)
    A = RegionCombination.parse("all:1", ph)
    g = TestDensity.parse("1 + x", 1)
    assert oscillatory_eval(ph, A, g, tau) == pytest.approx(direct_oscillatory_1d(ph, A, g, tau), rel=1e-6)


def test_leading_terms_at_large_tau():
    g = TestDensity.constant(1)
    ph2 = PhaseGerm.monomial(2)
    v = oscillatory_eval(ph2, RegionCombination.parse("all:1", ph2), g, 1000.0)
    assert v == pytest.approx(FRESNEL / math.sqrt(1000.0), rel=0.01)
    ph3 = PhaseGerm.monomial(3)
    v3 = oscillatory_eval(ph3, RegionCombination.parse("all:1", ph3), g, 1000.0)
    assert v3 == pytest.approx(2 * math.gamma(4 / 3) * math.cos(math.pi / 6) * 1000.0 ** (-1 / 3), rel=0.01)


def test_zero_density_gives_zero():
    ph = PhaseGerm.monomial(2)
    assert oscillatory_eval(ph, RegionCombination.parse("all:1", ph), TestDensity.parse("0", 1), 50.0) == 0


def test_fit_oscillatory_examples():
    taus = np.geomspace(10, 1000, 25)
    [t] = fit_oscillatory(taus, 1j / taus, parse_lattice("0", 2))
    assert (t.r, t.j) == (1, 0) and t.coef == pytest.approx(1j)
    [t] = fit_oscillatory(taus, FRESNEL / np.sqrt(taus), parse_lattice("1/2", 1))
    assert t.r == Fraction(1, 2) and t.coef == pytest.approx(FRESNEL)
    assert fit_oscillatory(taus, np.zeros_like(taus), parse_lattice("1/2", 1)) == []
    with pytest.raises(DomainError):
        fit_oscillatory(np.geomspace(10, 500, 9), 1j / np.geomspace(10, 500, 9), parse_lattice("0", 1))


def test_dictionary_consistency_monomial():
    ph = PhaseGerm.monomial(3)
    A = RegionCombination.parse("all:1", ph)
    g = TestDensity.parse("1 + x", 1)
    J = pushforward_1d(ph, A, g)
    pred = oscillatory_terms_from_expansion(J.expansion)
    taus = np.geomspace(100, 10000, 15)
    vals = np.array([oscillatory_eval(ph, A, g, t, J=J) for t in taus])
    # the C^2 cutoff adds oscillating tau^-3 pieces outside the tau^-r log^j scale,
    # so the lattice is truncated where those would start to be fitted
    fitted = fit_oscillatory(taus, vals, ExponentLattice.from_denominator(3, nu_max=0), rel_tol=1e-3, z=0)
    fmap = {(t.r, t.j): t.coef for t in fitted}
    pmap = {(t.r, t.j): t.coef for t in pred}
    assert set(fmap) == set(pmap)
    lead = min(pmap)
    assert fmap[lead] == pytest.approx(pmap[lead], rel=0.01)


def test_paired_table_columns():
    text = paired_table([10.0], [1 + 2j], [])
    assert text.splitlines() == ["tau,re,im,pred_re,pred_im", "10.0,1.0,2.0,0.0,0.0"]
    assert evaluate_terms([], [1.0, 2.0]).tolist() == [0, 0]
