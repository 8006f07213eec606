"""Greedy N-term wavelet approximation in weighted Orlicz spaces on finite dyadic grids."""

from .democracy import CubeFamily, brick_norm, decompose, democracy_probe
from .greedy import RankedExpansion, approx_space_norm, greedy_error, greedy_step, sigma_N_oracle
from .orlicz_norms import indicator_norm, luxemburg_norm
from .seq_lorentz import AlphaHMinus, AlphaHPlus, CoefSequence, PowerEta, lorentz_norm, marcinkiewicz_norm
from .wavelets import GridFunction, WaveletExpansion, analyze, atom_norm, synthesize
from .weights import DyadicCube, DyadicGrid, DyadicWeight, select_disjoint_cubes
from .young import Power, Tabulated, YoungFunction, ZygmundLog, boyd_indices, dilation, fundamental

__version__ = "0.1.0"

__all__ = [
    "AlphaHMinus",
    "AlphaHPlus",
    "CoefSequence",
    "CubeFamily",
    "DyadicCube",
    "DyadicGrid",
    "DyadicWeight",
    "GridFunction",
    "Power",
    "PowerEta",
    "RankedExpansion",
    "Tabulated",
    "WaveletExpansion",
    "YoungFunction",
    "ZygmundLog",
    "analyze",
    "approx_space_norm",
    "atom_norm",
    "boyd_indices",
    "brick_norm",
    "decompose",
    "democracy_probe",
    "dilation",
    "fundamental",
    "greedy_error",
    "greedy_step",
    "indicator_norm",
    "lorentz_norm",
    "luxemburg_norm",
    "marcinkiewicz_norm",
    "select_disjoint_cubes",
    "sigma_N_oracle",
    "synthesize",
]
