"""Domain types shared by the solver and the spectral tools."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SchemeParameters:
    """Correction weights of one member of the Active Flux family.

    ``R`` and ``S`` weight the point-value correction, ``T`` and ``U`` the
    interface time average. Values are only checked for finiteness here;
    sign and ``R + S`` restrictions are enforced by the operations that
    need them.
    """

    R: float
    S: float
    T: float
    U: float

    def __post_init__(self) -> None:
        for name in ("R", "S", "T", "U"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"parameter {name} must be finite, got {value!r}")

    def require_positive_sum(self) -> float:
        total = self.R + self.S
        if total <= 0.0:
            raise ValueError(f"R + S must be positive, got {total!r}")
        return total

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.R, self.S, self.T, self.U)


def validate_courant(nu: float) -> float:
    """Return ``nu`` as a float, rejecting values outside ``(0, 1]``."""
    nu = float(nu)
    if not (0.0 < nu <= 1.0):
        raise ValueError(f"Courant number must lie in (0, 1], got {nu!r}")
    return nu


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[x_min, x_max]``.

    Cell ``i`` spans ``[x_min + i*dx, x_min + (i+1)*dx]``.
    """

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must be greater than x_min")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValueError(f"n_cells must be an integer >= 2, got {self.n_cells!r}")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def interfaces(self) -> np.ndarray:
        """All ``n_cells + 1`` interface coordinates, both ends included."""
        return self.x_min + self.dx * np.arange(self.n_cells + 1)

    @property
    def left_edges(self) -> np.ndarray:
        return self.interfaces[:-1]

    @property
    def right_edges(self) -> np.ndarray:
        # location of point_values[i]
        return self.interfaces[1:]

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + self.dx * (np.arange(self.n_cells) + 0.5)


def make_grid(x_min: float, x_max: float, n_cells: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), int(n_cells))


def wrap_index(i: int, n_cells: int) -> int:
    """Map any integer index onto ``[0, n_cells)`` periodically."""
    if n_cells < 1:
        raise ValueError("n_cells must be at least 1")
    return i % n_cells


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SolutionState:
    """Cell averages and interface point values on a periodic grid.

    ``point_values[i]`` sits on the right interface of cell ``i``, so the
    left point value of cell ``i`` is ``point_values[i - 1]`` (wrapping).
    """

    averages: np.ndarray
    point_values: np.ndarray
    periodic: bool = field(default=True)

    def __post_init__(self) -> None:
        avg = _frozen_array(self.averages)
        pts = _frozen_array(self.point_values)
        if avg.ndim != 1 or pts.ndim != 1:
            raise ValueError("averages and point_values must be 1D arrays")
        if avg.shape != pts.shape:
            raise ValueError(
                f"averages ({avg.size}) and point_values ({pts.size}) differ in length"
            )
        if not (np.all(np.isfinite(avg)) and np.all(np.isfinite(pts))):
            raise ValueError("solution state contains non-finite entries")
        if not self.periodic:
            raise ValueError("only periodic states are supported")
        object.__setattr__(self, "averages", avg)
        object.__setattr__(self, "point_values", pts)

    @property
    def n_cells(self) -> int:
        return self.averages.size

    @property
    def left_point_values(self) -> np.ndarray:
        return np.roll(self.point_values, 1)

    def shifted(self, cells: int) -> SolutionState:
        """Translate the state ``cells`` cells to the right, periodically."""
        return SolutionState(
            np.roll(self.averages, cells), np.roll(self.point_values, cells)
        )

    def total_mass(self) -> float:
        return float(math.fsum(self.averages))


@dataclass(frozen=True)
class FourierMode:
    """Single-harmonic data ``Q_i = Q_hat e^{I(i+1/2)theta}``, ``q_{i+1/2} = q_hat e^{I(i+1/2)theta}``."""

    theta: float
    Q_hat: complex
    q_hat: complex

    def __post_init__(self) -> None:
        if not (-math.pi <= self.theta <= math.pi):
            raise ValueError(f"theta must lie in [-pi, pi], got {self.theta!r}")

    def sample(self, n_cells: int) -> tuple[np.ndarray, np.ndarray]:
        """Complex grid values of the averages and point values."""
        phase = np.exp(1j * (np.arange(n_cells) + 0.5) * self.theta)
        return self.Q_hat * phase, self.q_hat * phase
