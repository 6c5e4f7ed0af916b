"""Entanglement mean field theory for quench dynamics of the transverse
Ising model, with an exact Jordan-Wigner baseline for the chain."""

__version__ = "0.1.0"

from .emft import (  # noqa: E402
    EmftSolution,
    QuenchProtocol,
    Trajectory,
    build_hamiltonian,
    emft_entanglement_trajectory,
    evolve_fixed_point,
    evolve_fixed_point_trajectory,
    evolve_tdscf,
    static_fixed_point,
)
from .entanglement import is_entangled, log_negativity, negativity, partial_transpose  # noqa: E402
from .exactchain import (  # noqa: E402
    ChainSpec,
    CorrelatorSet,
    dense_reference,
    diagonalize_modes,
    exact_entanglement_trajectory,
    quench_correlators,
    two_site_rho,
)
from .extrema import count_extrema  # noqa: E402
