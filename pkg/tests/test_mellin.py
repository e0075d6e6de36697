import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fiberpoles.errors import DomainError, LatticeMismatch, NeedsExpansion
from fiberpoles.expansion import AsymptoticExpansion, ExpansionTerm
from fiberpoles.mellin import (
    TwoSidedFunction,
    indicator,
    lemma1_function,
    mellin_continue,
    mellin_eval,
    residue_lemma1,
)
from fiberpoles.model import ExponentLattice, parse_lattice

IPI = 1j * math.pi


def half_power(s0=1.0):
    exp = AsymptoticExpansion([ExpansionTerm(Fraction(1, 2), 0, 1.0)], [], "profile", s0, 0)
    return TwoSidedFunction(lambda s: (s / s0) ** 0.5, None, s0, s0, exp, "profile")


def bump(s0=0.5):
    def b(a):
        x = np.asarray(a, float) / s0
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(x < 1, np.exp(1 - 1 / np.maximum(1 - x * x, 1e-300)), 0.0)
    return TwoSidedFunction(b, b, s0, s0, None, "profile", smooth=True)


def test_zero_function():
    z = TwoSidedFunction(None, None, 1.0)
    assert mellin_eval(z, 0.7) == 0


@pytest.mark.parametrize("s0", [0.25, 1.0])
def test_indicator_examples(s0):
    assert mellin_eval(indicator(s0, "+"), 1.0) == pytest.approx(s0 / IPI, rel=1e-10)
    assert mellin_eval(indicator(s0, "+-"), 1.0) == pytest.approx(2 * s0 / IPI, rel=1e-10)


def test_eval_rejects_left_half_plane():
    with pytest.raises(DomainError):
        mellin_eval(indicator(1.0), -0.5)


@pytest.mark.parametrize("lam", [0.3 + 1j, 1.5 - 2j, 0.2 + 30j])
def test_continuation_agrees_with_quadrature(lam):
    phi = lemma1_function([2, 1], [5, 0.5j], Fraction(1, 3), s0=0.5)
    cont = mellin_continue(phi, parse_lattice("1/3^2", 0))
    assert cont.mellin(lam) == pytest.approx(mellin_eval(phi, lam), rel=1e-8)


def test_half_power_pole():
    cont = mellin_continue(half_power(), parse_lattice("1/2", 0))
    [p] = cont.poles.poles
    assert p.location == Fraction(-1, 2) and p.order == 1
    assert p.residue == pytest.approx(1.0, abs=1e-12)
    # closed form F = 1/(lambda + 1/2), valid past the old half-plane
    for lam in (-0.2 + 0.3j, -1.3):
        assert cont(lam) == pytest.approx(1 / (lam + 0.5), rel=1e-9)


def test_one_sided_has_no_branch_factor():
    # only the first integral exists, so e^{-i pi lambda} plays no role
    cont = mellin_continue(half_power(), parse_lattice("1/2", 0))
    lam = -0.25 + 2j
    assert cont(lam) == pytest.approx(1 / (lam + 0.5), rel=1e-9)


def test_smooth_bump_is_entire():
    cont = mellin_continue(bump(), ExponentLattice({Fraction(0): 1}, 3))
    assert cont.poles.poles == []
    assert cont.mellin(0.5) == pytest.approx(mellin_eval(bump(), 0.5), rel=1e-7)


def test_needs_expansion():
    phi = TwoSidedFunction(lambda s: s**0.5, None, 1.0)
    with pytest.raises(NeedsExpansion):
        mellin_continue(phi, parse_lattice("1/2", 0))


def test_lattice_mismatch_declared_exponent():
    with pytest.raises(LatticeMismatch):
        mellin_continue(lemma1_function([1], [0], Fraction(1, 3)), parse_lattice("1/2", 1))


def test_lattice_mismatch_found_by_validation():
    # declares s^(1/2) but the function behaves like s^(1/3)
    exp = AsymptoticExpansion([ExpansionTerm(Fraction(1, 2), 0, 1.0)], [], "profile", 1.0, 0)
    phi = TwoSidedFunction(lambda s: s ** (1 / 3), None, 1.0, 1.0, exp, "profile")
    with pytest.raises(LatticeMismatch):
        mellin_continue(phi, parse_lattice("1/2", 0))


def test_lemma1_examples():
    assert residue_lemma1([2, 1], [5], Fraction(1, 3)) == pytest.approx(-3, abs=1e-9)
    assert residue_lemma1([1, 2, 3], [1, 2, 3], Fraction(1, 2)) == pytest.approx(0, abs=1e-9)
    assert residue_lemma1([0, 0, 1], [0], Fraction(7, 10)) == pytest.approx(0, abs=1e-9)


def test_lemma1_contour_residue_matches():
    cont = mellin_continue(lemma1_function([2, 1], [5], Fraction(1, 3)), parse_lattice("1/3^2", 0))
    assert cont.contour_residue(Fraction(1, 3), radius=0.25, n=32) == pytest.approx(-3, abs=1e-8)


coef = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
poly = st.lists(coef, min_size=1, max_size=4)
rs = st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(7, 10), Fraction(1), Fraction(3, 2)])


@settings(max_examples=40, deadline=None)
@given(poly, poly, rs)
def test_lemma1_property(P, Q, r):
    lat = ExponentLattice({r - math.floor(r): 4}, math.floor(r))
    table = mellin_continue(lemma1_function(P, Q, r), lat, rel_tol=0, z=0).poles
    p = table.get(r)
    got = p.residue if p is not None else 0j
    assert abs(got - (P[0] - Q[0])) <= 1e-6


@settings(max_examples=25, deadline=None)
@given(poly, poly, poly, poly, coef, coef)
def test_pole_tables_are_linear(P1, Q1, P2, Q2, a, b):
    r = Fraction(1, 2)
    lat = ExponentLattice({r: 4}, 0)
    f, g = lemma1_function(P1, Q1, r), lemma1_function(P2, Q2, r)
    tf = mellin_continue(f, lat, rel_tol=0, z=0).poles.get(r)
    tg = mellin_continue(g, lat, rel_tol=0, z=0).poles.get(r)
    th = mellin_continue(f.combine(a, g, b), lat, rel_tol=0, z=0).poles.get(r)

    def parts(p, n=4):
        out = np.zeros(n, complex)
        if p is not None:
            out[: p.order] = p.parts
        return out

    assert np.allclose(parts(th), a * parts(tf) + b * parts(tg), atol=1e-9)


def test_symmetric_smooth_pair_has_no_integer_pole():
    # phi(s) = s on both sides is smooth through 0
    exp = AsymptoticExpansion([ExpansionTerm(Fraction(1), 0, 1.0)],
                              [ExpansionTerm(Fraction(1), 0, cmath.exp(-1j * math.pi))], "profile", 1.0, 0)
    phi = TwoSidedFunction(lambda s: s, lambda a: -a, 1.0, 1.0, exp, "profile")
    assert mellin_continue(phi, ExponentLattice({Fraction(0): 1}, 1)).poles.poles == []
