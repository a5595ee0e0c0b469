"""Classical QUBO solvers.

The annealing and enumeration loops run in a Cython extension when it was
built; otherwise an equivalent numpy implementation is used. ``BACKEND``
names the active one.
"""

from ._backend import BACKEND, BACKENDS
from .annealing import SaConfig, simulated_annealing
from .ballistic import BallisticConfig, ballistic_solve
from .bruteforce import MAX_BRUTE_FORCE_BITS, InstanceTooLargeError, brute_force
from .exact import SearchBudgetExceeded, lattice_ground_state
from .samples import SampleSet

__all__ = [
    "BACKEND",
    "BACKENDS",
    "BallisticConfig",
    "InstanceTooLargeError",
    "MAX_BRUTE_FORCE_BITS",
    "SaConfig",
    "SampleSet",
    "SearchBudgetExceeded",
    "ballistic_solve",
    "brute_force",
    "lattice_ground_state",
    "simulated_annealing",
]
