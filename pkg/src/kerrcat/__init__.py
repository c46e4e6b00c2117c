"""Arbitrary cat states in a two-photon and three-photon driven Kerr resonator.

Submodules:

* :mod:`kerrcat.fock` truncated Fock-space algebra, Wigner and Husimi functions
* :mod:`kerrcat.hamiltonians` well Hamiltonians, drive form, multi-mode control Hamiltonian
* :mod:`kerrcat.spectrum` eigensystems, gap and ground-manifold checks
* :mod:`kerrcat.cat_states` closed-form cat, near-collision and collision algebra
* :mod:`kerrcat.dynamics` schedules, Schrodinger and Lindblad evolution, steady states
* :mod:`kerrcat.holonomy` phase-space paths, geometric phases, collision holonomy
* :mod:`kerrcat.compiler` preparations and gates as well schedules
* :mod:`kerrcat.circuit_map` circuit parameters to rotating-frame drives and back
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .fock import TruncatedSpace, coherent, displaced_fock, fidelity, wigner_grid  # noqa: F401
from .hamiltonians import AcsParams, MultiQubitSpec, NoiseParams, build_acs_hamiltonian  # noqa: F401
