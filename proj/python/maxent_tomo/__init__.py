"""Maximum-entropy reconstruction of motional states from ballistic-expansion data."""

from ._maxent_tomo import (
    BinGrid,
    Error,
    InputError,
    TrapConfig,
    covering_grid,
    delta_rho,
    entropy,
    fidelity,
    make_state,
    reconstruct,
    rotations_from_times,
    run_cli,
    simulate,
    wigner,
)

__all__ = [
    "BinGrid",
    "Error",
    "InputError",
    "TrapConfig",
    "covering_grid",
    "delta_rho",
    "entropy",
    "fidelity",
    "make_state",
    "reconstruct",
    "rotations_from_times",
    "run_cli",
    "simulate",
    "wigner",
]
