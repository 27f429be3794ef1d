"""Finite-N numerics for SYK wormhole teleportation, size winding and eternal wormholes."""

__version__ = "0.1.0"

from .fermion_algebra import OperatorSum, PauliTerm, gamma_operator, majorana
from .models import EnsembleSpec, build_interaction, member_seed, pg_couplings, syk_couplings
from .states import NumericalError, evolve, max_entangled_state, thermofield_double
from .teleport import ProtocolConfig, run, run_classical, run_quantum

__all__ = [
    "EnsembleSpec", "NumericalError", "OperatorSum", "PauliTerm", "ProtocolConfig",
    "build_interaction", "evolve", "gamma_operator", "majorana", "max_entangled_state",
    "member_seed", "pg_couplings", "run", "run_classical", "run_quantum", "syk_couplings",
    "thermofield_double",
]
