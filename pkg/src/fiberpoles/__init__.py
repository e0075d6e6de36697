"""Poles of Mellin transforms of fiber integrals and the cycles that predict them."""

from .asympt import (
    OscTerm,
    fit_oscillatory,
    oscillatory_eval,
    oscillatory_terms_from_expansion,
    poles_from_expansion,
)
from .errors import (
    AccuracyError,
    BoundaryNotAtOrigin,
    DomainError,
    EmptyRegion,
    FiberPolesError,
    IllConditioned,
    LatticeMismatch,
    NeedsExpansion,
    ParseError,
    UnsupportedFamily,
)
from .expansion import AsymptoticExpansion, ExpansionTerm, Pole, PoleTable
from .fiber import FiberSamples, exact_fiber_1d, fit_expansion, sample_fiber_integral
from .mellin import TwoSidedFunction, mellin_continue, mellin_eval, residue_lemma1
from .milnor1d import (
    FiniteFiber,
    SpectralCycle,
    gamma_cycle,
    gamma_hat,
    pham_spectrum,
    predict_pole_cosets,
    theta,
    variation,
)
from .model import (
    ExponentLattice,
    PhaseGerm,
    RegionCombination,
    TestDensity,
    boundary_at_origin,
    enumerate_components,
)

__version__ = "0.1.0"
