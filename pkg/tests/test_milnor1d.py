from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fiberpoles.errors import DomainError, UnsupportedFamily
from fiberpoles.milnor1d import (
    FiniteFiber,
    can,
    gamma_cycle,
    gamma_hat,
    nilpotence_order,
    pham_eigenvalues,
    pham_spectrum,
    predict_pole_cosets,
    theta,
    theta_matrix,
    variation,
)
from fiberpoles.model import PhaseGerm, RegionCombination, separating_family

H = Fraction(1, 2)


def region(k, a, b, eps=1):
    return RegionCombination({(1,): a, (-1,): b}, separating_family(PhaseGerm.monomial(k, eps)))


def coeffs(cyc):
    return [complex(c) for c in cyc.coeffs]


def test_fiber_points_lie_on_the_level():
    for k in (2, 3, 5):
        for eps in (1, -1):
            fib = FiniteFiber(k, eps)
            for j in range(k):
                assert eps * fib.point(j) ** k == pytest.approx(fib.s0)
            # T^k = 1
            assert all(fib.basis(j).T(k) == fib.basis(j) for j in range(k))


def test_non_monomial_rejected():
    with pytest.raises(UnsupportedFamily):
        FiniteFiber.of(PhaseGerm.parse("x^2 - y^2"))


def test_k2_full_line():
    fib = FiniteFiber(2, 1)
    g = gamma_cycle(fib, region(2, 1, 1))
    assert g == fib.basis(0) - fib.basis(1)
    assert g.component(0).is_zero() and not g.component(H).is_zero()
    assert predict_pole_cosets(fib, region(2, 1, 1)) == {0: 0, H: 1}


def test_zero_region():
    fib = FiniteFiber(3, 1)
    assert gamma_cycle(fib, region(3, 0, 0)).is_zero()
    assert gamma_hat(fib, region(3, 0, 0)).is_zero()
    assert set(predict_pole_cosets(fib, region(3, 0, 0)).values()) == {0}


def test_k3_full_line():
    fib = FiniteFiber(3, 1)
    g = gamma_cycle(fib, region(3, 1, 1))
    nonzero = [c for c in coeffs(g) if abs(c) > 1e-12]
    assert len(nonzero) == 2 and sorted(round(c.real) for c in nonzero) == [-1, 1]
    assert g.component(0).is_zero()
    assert gamma_hat(fib, region(3, 1, 1), phase=PhaseGerm.monomial(3)).component(0).is_zero()


def test_half_line():
    fib = FiniteFiber(2, 1)
    h = gamma_hat(fib, region(2, 1, 0))
    assert not h.component(0).is_zero()
    assert predict_pole_cosets(fib, region(2, 1, 0)) == {0: 1, H: 1}


def test_hat_equals_gamma_in_one_variable():
    for k in (2, 3, 4):
        fib = FiniteFiber(k, -1)
        for a, b in ((1, 0), (1, -1), (2, 1j)):
            A = region(k, a, b, -1)
            assert gamma_hat(fib, A) == gamma_cycle(fib, A)
            assert can(gamma_hat(fib, A)) == gamma_cycle(fib, A)


def test_variation_examples():
    fib = FiniteFiber(2, 1)
    assert variation(fib, fib.basis(0)) == fib.basis(1) - fib.basis(0)
    uniform = fib.basis(0) + fib.basis(1)
    assert variation(fib, uniform).is_zero()


def test_theta_examples():
    fib = FiniteFiber(3, 1)
    inv = fib.basis(0) + fib.basis(1) + fib.basis(2)
    assert theta(fib, inv) == inv
    assert theta(fib, fib.zero()).is_zero()
    assert theta_matrix([[1, 1], [0, 1]], [0, 1]) == [Fraction(-1, 2), 1]
    with pytest.raises(DomainError):
        theta_matrix([[2, 0], [0, 1]], [1, 0])
    with pytest.raises(DomainError):
        theta(fib, fib.basis(0))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.sampled_from([1, -1]),
       st.sampled_from([0, 1, -1, 2, 1j, -1j]), st.sampled_from([0, 1, -1, 2, 1j, -1j]))
def test_cycle_identities(k, eps, a, b):
    fib = FiniteFiber(k, eps)
    A = region(k, a, b, eps)
    g = gamma_cycle(fib, A)
    h = gamma_hat(fib, A)
    comps = g.components()
    total = fib.zero()
    for c in comps.values():
        total = total + c
    assert total == g
    assert variation(fib, can(g)) == g.T() - g
    assert can(variation(fib, g)) == g.T() - g
    assert variation(fib, g) == h.T() - h
    # distinct eigencomponents are orthogonal for the standard hermitian pairing
    us = list(comps)
    for i, u in enumerate(us):
        for v in us[i + 1:]:
            dot = sum(complex(x) * complex(y).conjugate() for x, y in zip(comps[u].coeffs, comps[v].coeffs))
            assert abs(dot) < 1e-9
    for u, m in predict_pole_cosets(fib, A).items():
        assert m <= 1
        assert m == nilpotence_order(h if u == 0 else g, u)


def test_pham_spectrum_examples():
    assert set(pham_spectrum((2, 2)).cosets) == {0}
    assert set(pham_spectrum((3, 2)).cosets) == {Fraction(5, 6), Fraction(1, 6)}
    assert set(pham_spectrum((2,)).cosets) == {H}
    assert pham_eigenvalues((3, 3)) == {Fraction(2, 3): 1, Fraction(0): 2, Fraction(1, 3): 1}
    assert pham_spectrum((2, 2), integers=True).order_bound(1) == 2
