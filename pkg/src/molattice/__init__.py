"""Simulation and analysis of atoms in a 1-D magneto-optical lattice.

Subpackages cover the classical spin-orbit flow (Poincare sections,
action-angle analysis, Lyapunov exponents), spinor-wavepacket quantum
dynamics (split-operator propagation, band structure, Husimi functions),
continuously measured quantum trajectories (stochastic Schrodinger
equation, moment and covariance closures), and scenario runners that
regenerate the headline comparisons at desk scale.
"""

from .model import (
    CS_RECOIL_HZ,
    FieldVector,
    LatticeConfig,
    adiabatic_potentials,
    effective_field,
    potential_matrix,
    scalar_potential,
    spin_matrices,
)

__version__ = "0.1.0"

__all__ = [
    "CS_RECOIL_HZ",
    "FieldVector",
    "LatticeConfig",
    "adiabatic_potentials",
    "effective_field",
    "potential_matrix",
    "scalar_potential",
    "spin_matrices",
    "__version__",
]
