"""Tensor network simulations: MPS ground states, time evolution, thermal states and 2D Ising coarse-graining."""

from ._tnet import (
    MPS,
    CheckpointError,
    ConfigError,
    DmrgConfig,
    HamiltonianSpec,
    NumericalError,
    __version__,
    custom_chain,
    dmrg,
    ising_free_energy,
    oracle,
    product_state,
    random_mps,
    run,
    tebd,
    tfi,
    thermal_expect,
    thermal_state,
    xxz,
)

__all__ = [
    "MPS",
    "CheckpointError",
    "ConfigError",
    "DmrgConfig",
    "HamiltonianSpec",
    "NumericalError",
    "__version__",
    "custom_chain",
    "dmrg",
    "ising_free_energy",
    "oracle",
    "product_state",
    "random_mps",
    "run",
    "tebd",
    "tfi",
    "thermal_expect",
    "thermal_state",
    "xxz",
]
