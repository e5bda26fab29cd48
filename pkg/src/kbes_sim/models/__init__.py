"""Model factories and closed-form solutions for the three worked systems."""

from .qubit import (
    DrivenQubitParams,
    driven_damped_qubit,
    plus_state,
    qubit_generator_matrix,
    qubit_max_coherence,
    qubit_steady_closed_form,
)
from .vtype import VTypeParams, dark_state, vtype_closed_form, vtype_qutrit
from .xxz import (
    CrossPoint,
    OneParticleSector,
    SectorState,
    XXZParams,
    dispersion_factor,
    one_particle_sector,
    predicted_cross_times,
    xxz_analytic_evolve,
    xxz_chain,
    xxz_cross_points,
    xxz_reduced_qubit,
)

__all__ = [
    "CrossPoint",
    "DrivenQubitParams",
    "OneParticleSector",
    "SectorState",
    "VTypeParams",
    "XXZParams",
    "dark_state",
    "dispersion_factor",
    "driven_damped_qubit",
    "one_particle_sector",
    "plus_state",
    "predicted_cross_times",
    "qubit_generator_matrix",
    "qubit_max_coherence",
    "qubit_steady_closed_form",
    "vtype_closed_form",
    "vtype_qutrit",
    "xxz_analytic_evolve",
    "xxz_chain",
    "xxz_cross_points",
    "xxz_reduced_qubit",
]
