from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone

from fiberpoles.estimators import LogPowerExpansion, MellinPoleDetector
from fiberpoles.fiber import default_grid, exact_fiber_1d, exact_samples
from fiberpoles.model import PhaseGerm, RegionCombination, TestDensity


def test_params_and_clone():
    est = LogPowerExpansion(lattice="1/2", nu_max=2, dim=1)
    assert est.get_params()["lattice"] == "1/2"
    c = clone(est).set_params(nu_max=1)
    assert c.nu_max == 1 and est.nu_max == 2


def test_point_data_recovery():
    s = np.concatenate([default_grid(0.25), -default_grid(0.25)])
    a = np.abs(s)
    y = np.where(s > 0, 2 * a**-0.5 + 0.5, 1j * a**0.5)
    est = LogPowerExpansion(lattice="1/2,0", nu_max=1, halfwidth=0.0, s0=0.25).fit(s[:, None], y)
    got = {(sd, t.r, t.j): t.coef for sd in "+-" for t in est.expansion_.side(sd) if abs(t.coef) > 1e-8}
    assert got.keys() == {("+", Fraction(1, 2), 0), ("+", Fraction(1), 0), ("-", Fraction(3, 2), 0)}
    assert got[("+", Fraction(1, 2), 0)] == pytest.approx(2)
    assert got[("-", Fraction(3, 2), 0)] == pytest.approx(1j)
    assert est.score(s, y) == pytest.approx(1.0)
    assert np.allclose(est.predict(s), y)


def test_pole_detector_on_exact_cube():
    ph = PhaseGerm.monomial(3)
    A = RegionCombination.parse("all:1", ph)
    S = exact_samples(exact_fiber_1d(ph, A, TestDensity.parse("1 + x + x^2 + x^3", 1)))
    det = MellinPoleDetector(lattice="0,1/3,2/3", nu_max=1, rel_tol=1e-6).fit(S.s, S.J)
    locs = {p.location for p in det.poles_}
    assert locs == {Fraction(-1, 3), Fraction(-2, 3), Fraction(-4, 3)}
    assert det.predict_cosets() == {Fraction(1, 3), Fraction(2, 3)}
