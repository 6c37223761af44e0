"""Coined quantum walks on N-dimensional lattices: asymptotic coin entanglement and its thermodynamics."""

from .coin import CoinMatrix, SpectralBundle, eigensystem, momentum_coin
from .errors import (
    BranchSingularityError,
    DegeneracyError,
    InvalidInputError,
    NumericalError,
    QWError,
    UndefinedEnergiesError,
)
from .grover import grover_coin
from .initial import BlochPoint, NonSeparableIC, SeparableGaussianIC
from .lattice import WalkerState
from .thermo import ThermoReport, thermo_report

__version__ = "0.1.0"
