"""Lattice mechanics on site-bond graphs with elastic, plastic and damage bonds."""

from .constitutive import (
    MIDPOINT,
    PAPER_LITERAL,
    BondParams,
    Regime,
    axial_force,
    classify_regime,
    ktilde_entry,
    secant_ratio_bounds,
)
from .driver import SolveOptions, SolveResult, damage_metrics, run_load_steps, solve_nonlinear
from .graph import LatticeGraph, build_incidence, divergence, gradient
from .lattice import LatticeSpec, build_bcc_lattice
from .linear_system import (
    DofMask,
    RegularizerSpec,
    assemble,
    partition,
    recover_reactions,
    solve_free,
    solve_regularized,
    solve_system,
)

__version__ = "0.1.0"
