"""Explicit Active Flux time stepping for ``q_t + a q_x = 0`` with ``a > 0``.

The scalar update functions are written with plain arithmetic so that they
accept floats, complex numbers and numpy arrays alike. The spectral module
relies on that to build the amplification matrix from these same formulas.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from activeflux.core import SchemeParameters, SolutionState, validate_courant


class SolverBlowUp(FloatingPointError):
    """Raised when a step produces a non-finite value."""

    def __init__(self, step_index: int, message: str | None = None) -> None:
        self.step_index = step_index
        super().__init__(message or f"non-finite value produced at step {step_index}")


@dataclass(frozen=True)
class ReconstructionCoeffs:
    """Quadratic ``c0 + c1*xi + c2*xi**2`` on the reference cell ``[-dx/2, dx/2]``."""

    c0: float
    c1: float
    c2: float
    dx: float

    def mean(self) -> float:
        return self.c0 + self.c2 * self.dx**2 / 12.0


def reconstruct(avg: float, q_left: float, q_right: float, dx: float) -> ReconstructionCoeffs:
    """Fit the quadratic matching both interface values and the cell average."""
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx!r}")
    for name, value in (("avg", avg), ("q_left", q_left), ("q_right", q_right)):
        if not np.all(np.isfinite(value)):
            raise ValueError(f"{name} must be finite")
    c0 = (6.0 * avg - q_right - q_left) / 4.0
    c1 = (q_right - q_left) / dx
    c2 = 3.0 * (q_left + q_right - 2.0 * avg) / dx**2
    return ReconstructionCoeffs(c0, c1, c2, dx)


def eval_reconstruction(coeffs: ReconstructionCoeffs, xi):
    """Evaluate the reconstruction at local coordinate ``xi = x - x_i``.

    Points outside the cell are evaluated anyway but trigger a warning.
    """
    half = 0.5 * coeffs.dx * (1.0 + 1e-12)
    if np.any(np.abs(xi) > half):
        warnings.warn("evaluating reconstruction outside its cell", RuntimeWarning, stacklevel=2)
    return coeffs.c0 + coeffs.c1 * xi + coeffs.c2 * xi * xi


def point_value_update(q_right, q_left, avg, params: SchemeParameters, nu: float):
    """New value at interface ``i+1/2`` from cell ``i`` data at time level n."""
    R, S = params.R, params.S
    return (
        (1.0 - nu) * q_right
        + nu * q_left
        - nu * (1.0 - nu) * (R * (q_right - avg) - S * (avg - q_left))
    )


def interface_time_average(q_right, q_left, avg, params: SchemeParameters, nu: float):
    """Time-averaged interface value over one step (the numerical flux divided by ``a``)."""
    T, U = params.T, params.U
    return avg + (1.0 - nu) * (T * (q_right - avg) + U * (avg - q_left))


def simpson_time_average(avg: float, q_left: float, q_right: float, dx: float, nu: float) -> float:
    """Interface time average by Simpson's rule on the characteristic trace.

    The value at ``t^n + l*dt`` is read from the upwind reconstruction at
    ``xi = dx/2 - l*nu*dx``.
    """
    nu = validate_courant(nu)
    coeffs = reconstruct(avg, q_left, q_right, dx)

    def trace(l: float):
        xi = 0.5 * dx - l * nu * dx
        return coeffs.c0 + coeffs.c1 * xi + coeffs.c2 * xi * xi

    return (trace(0.0) + 4.0 * trace(0.5) + trace(1.0)) / 6.0


def average_update(avg, flux_right, flux_left, nu: float):
    return avg - nu * (flux_right - flux_left)


def _step_arrays(
    avg: np.ndarray, pts: np.ndarray, params: SchemeParameters, nu: float
) -> tuple[np.ndarray, np.ndarray]:
    q_left = np.roll(pts, 1)
    # fluxes are complete before any update touches the arrays
    flux = interface_time_average(pts, q_left, avg, params, nu)
    new_avg = average_update(avg, flux, np.roll(flux, 1), nu)
    new_pts = point_value_update(pts, q_left, avg, params, nu)
    return new_avg, new_pts


def _check_finite(avg: np.ndarray, pts: np.ndarray, step_index: int) -> None:
    if not (np.isfinite(avg).all() and np.isfinite(pts).all()):
        raise SolverBlowUp(step_index)


def step(state: SolutionState, params: SchemeParameters, nu: float) -> SolutionState:
    """Advance ``state`` by one time step of Courant number ``nu``."""
    nu = validate_courant(nu)
    avg, pts = _step_arrays(state.averages, state.point_values, params, nu)
    _check_finite(avg, pts, 1)
    return SolutionState(avg, pts)


def advance(
    state: SolutionState, params: SchemeParameters, nu: float, n_steps: int
) -> SolutionState:
    """Apply :func:`step` ``n_steps`` times.

    Raises :class:`SolverBlowUp` carrying the 1-based index of the first
    step that produced a non-finite value.
    """
    nu = validate_courant(nu)
    if int(n_steps) != n_steps or n_steps < 0:
        raise ValueError(f"n_steps must be a nonnegative integer, got {n_steps!r}")
    if n_steps == 0:
        return state
    avg = np.array(state.averages)
    pts = np.array(state.point_values)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, int(n_steps) + 1):
            avg, pts = _step_arrays(avg, pts, params, nu)
            _check_finite(avg, pts, k)
    return SolutionState(avg, pts)


def cell_mass_drift(before: SolutionState, after: SolutionState) -> float:
    return abs(math.fsum(after.averages) - math.fsum(before.averages))
