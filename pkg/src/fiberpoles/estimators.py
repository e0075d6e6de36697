"""scikit-learn style wrappers around the fitting and pole-detection pipeline.

Only the fitting steps map onto the estimator protocol; the exact algebra in
``milnor1d`` stays a plain function API.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .fiber import HALF_WIDTH, FiberSamples, fit_expansion
from .mellin import mellin_continue
from .model import ExponentLattice, parse_lattice


def _lattice(spec, nu_max):
    if isinstance(spec, ExponentLattice):
        return ExponentLattice(spec.cosets, nu_max if nu_max is not None else spec.nu_max)
    return parse_lattice(spec, 3 if nu_max is None else nu_max)


def _samples(X, y, stderr, halfwidth, s0, dim) -> FiberSamples:
    s = np.asarray(X, dtype=float).reshape(-1)
    if np.any(s == 0):
        raise ValueError("s = 0 is not a valid abscissa")
    y = np.asarray(y, dtype=complex).reshape(-1)
    if stderr is None:
        stderr = np.zeros_like(s)
    meta = {"dim": dim, "exact": not np.any(np.asarray(stderr) > 0)}
    if s0 is not None:
        meta["s0"] = s0
    return FiberSamples(np.where(s > 0, "+", "-"), s, y, np.asarray(stderr, float), halfwidth, meta)


class LogPowerExpansion(RegressorMixin, BaseEstimator):
    """Fit J(s) ~ sum c |s|^(r-1) log^j |s| per side of s = 0.

    ``X`` holds signed abscissae (shape (n,) or (n, 1)), ``y`` the possibly
    complex values.  ``halfwidth`` > 0 means y are kernel-binned averages
    (the default matches :func:`sample_fiber_integral`); use 0 for point values.
    """

    def __init__(self, lattice="0", nu_max=None, dim=1, halfwidth=HALF_WIDTH, s0=None, window=None):
        self.lattice = lattice
        self.nu_max = nu_max
        self.dim = dim
        self.halfwidth = halfwidth
        self.s0 = s0
        self.window = window

    def fit(self, X, y, stderr=None):
        lat = _lattice(self.lattice, self.nu_max)
        S = _samples(X, y, stderr, self.halfwidth, self.s0, self.dim)
        self.expansion_ = fit_expansion(S, lat, dim=self.dim, window=self.window, s0=self.s0)
        self.lattice_ = lat
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        s = np.asarray(X, dtype=float).reshape(-1)
        return self.expansion_.evaluate(s)

    def score(self, X, y, sample_weight=None):
        # R^2 on complex residuals
        y = np.asarray(y, dtype=complex).reshape(-1)
        pred = self.predict(X)
        w = np.ones_like(y.real) if sample_weight is None else np.asarray(sample_weight, float)
        ss_res = np.sum(w * np.abs(y - pred) ** 2)
        ss_tot = np.sum(w * np.abs(y - np.average(y, weights=w)) ** 2)
        return 1.0 - ss_res / ss_tot if ss_tot > 0 else float(ss_res == 0)


class MellinPoleDetector(BaseEstimator):
    """Fit the expansion of a sampled density, then continue its Mellin transform.

    After ``fit``: ``poles_`` (a PoleTable), ``cosets_`` (coset -> max order)
    and ``expansion_``.
    """

    def __init__(self, lattice="0", nu_max=None, dim=1, halfwidth=HALF_WIDTH, s0=None,
                 window=None, rel_tol=1e-4, z=5.0):
        self.lattice = lattice
        self.nu_max = nu_max
        self.dim = dim
        self.halfwidth = halfwidth
        self.s0 = s0
        self.window = window
        self.rel_tol = rel_tol
        self.z = z

    def fit(self, X, y, stderr=None):
        reg = LogPowerExpansion(self.lattice, self.nu_max, self.dim, self.halfwidth, self.s0, self.window)
        reg.fit(X, y, stderr)
        S = _samples(X, y, stderr, self.halfwidth, self.s0, self.dim)
        cont = mellin_continue(S.to_function(reg.expansion_), reg.lattice_, rel_tol=self.rel_tol,
                               z=self.z, validate=False)
        self.expansion_ = reg.expansion_
        self.poles_ = cont.poles
        self.cosets_ = dict(cont.poles.cosets())
        return self

    def predict_cosets(self) -> set[Fraction]:
        return set(self.cosets_)
