"""Parameterized third-order Active Flux scheme for 1D linear advection.

The package is split into:

* :mod:`activeflux.core` -- grids, solution states, scheme parameters
* :mod:`activeflux.scheme` -- reconstruction and the explicit time step
* :mod:`activeflux.families` -- closed-form parameter families
* :mod:`activeflux.spectral` -- amplification matrix and eigenvalue analysis
* :mod:`activeflux.experiments` -- initial data, exact solutions, error norms
* :mod:`activeflux.cli` -- the ``afl`` command line tool
"""

from activeflux.core import (
    FourierMode,
    Grid1D,
    SchemeParameters,
    SolutionState,
    make_grid,
    wrap_index,
)
from activeflux.families import parse_family, resolve
from activeflux.scheme import SolverBlowUp, advance, step

__all__ = [
    "FourierMode",
    "Grid1D",
    "SchemeParameters",
    "SolutionState",
    "SolverBlowUp",
    "advance",
    "make_grid",
    "parse_family",
    "resolve",
    "step",
    "wrap_index",
]

__version__ = "0.1.0"
