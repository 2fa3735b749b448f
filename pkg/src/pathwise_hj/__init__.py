"""Pathwise numerics for stochastic Hamilton-Jacobi and parabolic-hyperbolic equations on the torus."""

from .grid import GridFunction, sample
from .hamiltonians import (
    CoefficientField,
    DissipationSpec,
    HamiltonianSpec,
    dissipation,
    entropy_companion,
    g_transform,
    gauge_shift,
    hamiltonian,
    legendre_transform,
)
from .paths import (
    ExtremaSkeleton,
    SamplePath,
    crossing_times,
    extrema_skeleton,
    gamma_functional,
    gamma_hitting_time,
    linear_path,
    one_sided_runup,
    oscillation,
    sample_brownian,
    sample_two_sided_brownian,
)
from .semigroup import (
    conservation_step,
    lax_oleinik_minus,
    lax_oleinik_plus,
    monotone_hj_evolve,
    parabolic_step,
)

__version__ = "0.1.0"
