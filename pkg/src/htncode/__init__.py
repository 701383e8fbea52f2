"""Hyperinvariant tensor-network codes and HaPPY baselines on hyperbolic tilings."""

from .codes import build_A_prime, build_B, build_fixed_area_state, build_pentagon
from .network import CodeNetwork, contract_network
from .tensor import DenseTensor, contract
from .tiling import BoundaryRegion, HyperbolicTiling, TilingParams, build_tiling

__all__ = [
    "BoundaryRegion",
    "CodeNetwork",
    "DenseTensor",
    "HyperbolicTiling",
    "TilingParams",
    "build_A_prime",
    "build_B",
    "build_fixed_area_state",
    "build_pentagon",
    "build_tiling",
    "contract",
    "contract_network",
]
