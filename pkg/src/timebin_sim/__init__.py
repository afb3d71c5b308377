"""Time-bin splitting of a single photon by parametric coupling of two slow-light fields."""

__version__ = "0.1.0"

from .analysis import (
    BellResult,
    BinDecomposition,
    ScanGrid,
    bell_combination,
    bell_scan,
    decompose_bins,
    wigner,
)
from .params import ConstraintReport, DerivedQuantities, PhysicalParams, derive, paper_rb85, validate
from .propagation import (
    FieldState,
    InputPulse,
    PropagationResult,
    TimeGrid,
    intensity,
    solve_analytic,
    solve_closed_form,
    solve_numeric,
)
from .special import bessel_j0, bessel_j1
