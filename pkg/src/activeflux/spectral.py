"""Von Neumann analysis of the parameterized Active Flux scheme.

A single harmonic ``Q_i = Q_hat e^{I(i+1/2)theta}``,
``q_{i+1/2} = q_hat e^{I(i+1/2)theta}`` is mapped by one step onto
``A(theta) @ (Q_hat, q_hat)``. Everything here is built on the 2x2 matrix
``A`` and its two eigenvalues.

Double precision is used for sweeps and scans. The order and
leading-coefficient checks need differences far below 1e-16 and run in
``mpmath`` extended precision instead.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np

from activeflux import scheme
from activeflux.core import FourierMode, SchemeParameters, validate_courant
from activeflux.families import family_text, resolve

STABILITY_TOL = 1e-12
COLLISION_TOL = 1e-10
TINY_EIGENVALUE = 1e-300


def _entries(R, S, T, U, nu, z):
    """Matrix entries as generic arithmetic in the shift symbol ``z = e^{-I theta}``."""
    a11 = 1 - nu * (1 + (1 - nu) * (U - T)) * (1 - z)
    a12 = nu * (1 - nu) * (U * z - T) * (1 - z)
    a21 = nu * (1 - nu) * (R + S) + 0 * z
    a22 = (1 - nu) * (1 - nu * R) + nu * (1 - (1 - nu) * S) * z
    return a11, a12, a21, a22


@dataclass(frozen=True)
class AmplificationMatrix:
    """One-step map of ``(Q_hat, q_hat)``; rows and columns ordered averages first."""

    a11: complex
    a12: complex
    a21: complex
    a22: complex
    theta: float
    nu: float
    params: SchemeParameters

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=complex)

    @property
    def trace(self) -> complex:
        return self.a11 + self.a22

    @property
    def det(self) -> complex:
        return self.a11 * self.a22 - self.a12 * self.a21


def amplification_matrix(params: SchemeParameters, nu: float, theta: float) -> AmplificationMatrix:
    if not (-math.pi <= theta <= math.pi):
        raise ValueError(f"theta must lie in [-pi, pi], got {theta!r}")
    z = cmath.exp(-1j * theta)
    entries = _entries(*params.as_tuple(), nu, z)
    return AmplificationMatrix(*(complex(e) for e in entries), theta=theta, nu=nu, params=params)


def amplification_entries(params: SchemeParameters, nu: float, theta) -> tuple[np.ndarray, ...]:
    """Vectorized entries ``(a11, a12, a21, a22)`` over an array of phase angles."""
    theta = np.asarray(theta, dtype=float)
    z = np.exp(-1j * theta)
    return tuple(np.broadcast_to(e, theta.shape).astype(complex) for e in _entries(*params.as_tuple(), nu, z))


def matrix_consistency_check(params: SchemeParameters, nu: float, theta: float) -> float:
    """Max entrywise gap between the printed matrix and one built from the scalar updates.

    Each column is obtained by feeding a unit harmonic through
    :func:`scheme.interface_time_average`, :func:`scheme.average_update` and
    :func:`scheme.point_value_update` with complex data.
    """
    shift = cmath.exp(-1j * theta)
    columns = []
    for Q_hat, q_hat in ((1.0 + 0j, 0j), (0j, 1.0 + 0j)):
        q_left = q_hat * shift
        flux_right = scheme.interface_time_average(q_hat, q_left, Q_hat, params, nu)
        flux_left = flux_right * shift
        new_Q = scheme.average_update(Q_hat, flux_right, flux_left, nu)
        new_q = scheme.point_value_update(q_hat, q_left, Q_hat, params, nu)
        columns.append((new_Q, new_q))
    built = np.array(columns, dtype=complex).T
    printed = amplification_matrix(params, nu, theta).as_array()
    return float(np.max(np.abs(built - printed)))


@dataclass(frozen=True)
class EigenPair:
    principal: complex
    spurious: complex
    discriminant: complex

    @property
    def collision(self) -> bool:
        return abs(self.discriminant) < COLLISION_TOL


def exact_eigenvalue(nu: float, theta: float) -> complex:
    return cmath.exp(-1j * nu * theta)


def _roots(a11, a12, a21, a22, sqrt):
    """Both roots of ``lam^2 - tr lam + det`` and the discriminant.

    The discriminant is formed as ``(a11 - a22)^2 + 4 a12 a21``; the
    textbook ``tr^2 - 4 det`` cancels catastrophically near double roots
    (e.g. ``nu = 1``) and the square root turns 1e-16 into 1e-8.
    """
    disc = (a11 - a22) ** 2 + 4 * a12 * a21
    if a12 == 0 or a21 == 0:
        return a11, a22, disc
    root = sqrt(disc)
    tr = a11 + a22
    big = (tr + root) / 2 if abs(tr + root) >= abs(tr - root) else (tr - root) / 2
    if big == 0:
        return big, big, disc
    det = a11 * a22 - a12 * a21
    return big, det / big, disc


def _classify(r1, r2, exact):
    d1, d2 = abs(r1 - exact), abs(r2 - exact)
    if d1 < d2 or (d1 == d2 and abs(r1 + 1) >= abs(r2 + 1)):
        return r1, r2
    return r2, r1


def eigenvalues(A: AmplificationMatrix) -> EigenPair:
    """Principal and spurious eigenvalue of ``A``.

    The principal one is the root nearest the exact symbol
    ``e^{-I nu theta}``; on ties, the root farther from -1.
    """
    r1, r2, disc = _roots(A.a11, A.a12, A.a21, A.a22, cmath.sqrt)
    principal, spurious = _classify(complex(r1), complex(r2), exact_eigenvalue(A.nu, A.theta))
    return EigenPair(principal, spurious, complex(disc))


def eigenvalue_sweep(params: SchemeParameters, nu: float, theta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`eigenvalues` over phase angles: ``(principal, spurious, discriminant)``."""
    theta = np.asarray(theta, dtype=float)
    a11, a12, a21, a22 = amplification_entries(params, nu, theta)
    disc = (a11 - a22) ** 2 + 4 * a12 * a21
    root = np.sqrt(disc)
    tr = a11 + a22
    plus, minus = (tr + root) / 2, (tr - root) / 2
    big = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
    det = a11 * a22 - a12 * a21
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, det / np.where(big != 0, big, 1), 0)
    triangular = (a12 == 0) | (a21 == 0)
    r1 = np.where(triangular, a11, big)
    r2 = np.where(triangular, a22, small)

    exact = np.exp(-1j * nu * theta)
    d1, d2 = np.abs(r1 - exact), np.abs(r2 - exact)
    keep = (d1 < d2) | ((d1 == d2) & (np.abs(r1 + 1) >= np.abs(r2 + 1)))
    return np.where(keep, r1, r2), np.where(keep, r2, r1), disc


def characteristic_residual(A: AmplificationMatrix, lam: complex) -> float:
    return abs(lam * lam - A.trace * lam + A.det)


def dissipation_error(pair: EigenPair, nu: float, theta: float) -> tuple[float, float]:
    scale = abs(exact_eigenvalue(nu, theta))
    return abs(pair.principal) / scale, abs(pair.spurious) / scale


def _relative_phase(lam: complex, nu: float, theta: float) -> float | None:
    if abs(lam) <= TINY_EIGENVALUE:
        return None
    return cmath.phase(lam) / (-nu * theta)


def dispersion_error(pair: EigenPair, nu: float, theta: float) -> tuple[float | None, float | None]:
    """Relative wave speeds ``arg(lam) / (-nu theta)``; ``None`` where the phase is undefined."""
    if theta == 0:
        raise ValueError("dispersion error is undefined at theta = 0")
    return _relative_phase(pair.principal, nu, theta), _relative_phase(pair.spurious, nu, theta)


@dataclass(frozen=True)
class SpectralErrors:
    e1: tuple[float, float]
    e2_principal: float | None
    e2_spurious: float | None


def spectral_errors(params: SchemeParameters, nu: float, theta: float) -> SpectralErrors:
    pair = eigenvalues(amplification_matrix(params, nu, theta))
    if theta == 0:
        e2 = (None, None)
    else:
        e2 = dispersion_error(pair, nu, theta)
    return SpectralErrors(dissipation_error(pair, nu, theta), *e2)


def evolve_mode(mode: FourierMode, params: SchemeParameters, nu: float, n_steps: int) -> FourierMode:
    """Apply the amplification matrix ``n_steps`` times by repeated multiplication."""
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    A = amplification_matrix(params, nu, mode.theta)
    Q, q = complex(mode.Q_hat), complex(mode.q_hat)
    for _ in range(n_steps):
        Q, q = A.a11 * Q + A.a12 * q, A.a21 * Q + A.a22 * q
    return FourierMode(mode.theta, Q, q)


def default_thetas(n: int = 1024) -> np.ndarray:
    """``n`` uniform samples of ``[-pi, pi]``; even ``n`` never hits 0 exactly."""
    return np.linspace(-math.pi, math.pi, n)


@dataclass(frozen=True)
class StabilityRow:
    nu: float
    max_radius: float
    theta_at_max: float
    exceeds: bool


@dataclass(frozen=True)
class StabilityReport:
    family: str
    rows: tuple[StabilityRow, ...]

    @property
    def stable(self) -> bool:
        return not any(r.exceeds for r in self.rows)

    @property
    def max_radius(self) -> float:
        return max(r.max_radius for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "stable": self.stable,
            "max_radius": self.max_radius,
            "rows": [vars(r) for r in self.rows],
        }


def stability_scan(spec, nu_grid: Sequence[float], theta_grid: Sequence[float]) -> StabilityReport:
    """Spectral radius maximized over ``theta_grid`` for each Courant number."""
    nu_grid = list(nu_grid)
    theta_grid = np.asarray(theta_grid, dtype=float)
    if not nu_grid or theta_grid.size == 0:
        raise ValueError("stability scan needs non-empty grids")
    rows = []
    for nu in nu_grid:
        nu = validate_courant(nu)
        lam1, lam2, _ = eigenvalue_sweep(resolve(spec, nu), nu, theta_grid)
        radius = np.maximum(np.abs(lam1), np.abs(lam2))
        k = int(np.argmax(radius))
        rows.append(
            StabilityRow(nu, float(radius[k]), float(theta_grid[k]), bool(radius[k] > 1 + STABILITY_TOL))
        )
    return StabilityReport(family_text(spec), tuple(rows))


@dataclass(frozen=True)
class ContinuityReport:
    ok: bool
    collisions: np.ndarray
    violations: tuple[float, ...]


def branch_continuity(params: SchemeParameters, nu: float, n_steps: int = 1024) -> ContinuityReport:
    """Check that the principal eigenvalue does not hop branches along ``theta`` in ``[0, pi]``.

    A jump is a violation when it is at least the gap between the two
    branches, unless the branches collide there.
    """
    theta = np.linspace(0.0, math.pi, n_steps + 1)
    lam1, lam2, disc = eigenvalue_sweep(params, nu, theta)
    collisions = np.abs(disc) < COLLISION_TOL
    jump = np.abs(np.diff(lam1))
    gap = np.abs(lam1 - lam2)[1:]
    bad = (jump >= gap) & ~collisions[1:] & ~collisions[:-1]
    return ContinuityReport(not bad.any(), collisions, tuple(theta[1:][bad]))


def eigen_set_distance(a: tuple[complex, complex], b: tuple[complex, complex]) -> float:
    """Distance between two unordered eigenvalue pairs (best matching, worst entry)."""
    straight = max(abs(a[0] - b[0]), abs(a[1] - b[1]))
    crossed = max(abs(a[0] - b[1]), abs(a[1] - b[0]))
    return min(straight, crossed)


# --- extended precision checks -------------------------------------------------

WORKING_DPS = 40
NOISE_FLOOR = mpmath.mpf("1e-30")


def _mp_parameters(spec, nu):
    """Resolve ``spec`` at ``nu`` in mpmath arithmetic (free parameters promoted too)."""
    promoted = replace(spec, **{f.name: mpmath.mpf(getattr(spec, f.name)) for f in fields(spec)})
    return promoted.resolve_raw(nu)


def _mp_principal_error(spec, nu, theta):
    """``lam_1 - e^{-I nu theta}`` in working precision; caller sets mp.dps."""
    nu = mpmath.mpf(nu)
    theta = mpmath.mpf(theta)
    z = mpmath.exp(-1j * theta)
    entries = _entries(*_mp_parameters(spec, nu), nu, z)
    r1, r2, _ = _roots(*entries, mpmath.sqrt)
    exact = mpmath.exp(-1j * nu * theta)
    principal, _ = _classify(r1, r2, exact)
    return principal - exact


@dataclass(frozen=True)
class OrderEstimate:
    """Slope of ``log|lam_1 - e^{-I nu theta}|`` against ``log theta``.

    ``slope`` estimates one more than the order of correctness. When too
    few samples rise above the noise floor the eigenvalue is exact to
    working precision, ``exact`` is set and ``slope`` is ``None``.
    """

    slope: float | None
    exact: bool
    n_points: int


def principal_order(
    spec,
    nu: float,
    ks: Sequence[int] = range(4, 15),
    dps: int = WORKING_DPS,
    noise_floor=NOISE_FLOOR,
) -> OrderEstimate:
    validate_courant(nu)
    logs_theta, logs_err = [], []
    with mpmath.workdps(dps):
        for k in ks:
            theta = mpmath.mpf(2) ** -k
            err = abs(_mp_principal_error(spec, nu, theta))
            if err > noise_floor:
                logs_theta.append(float(mpmath.log(theta)))
                logs_err.append(float(mpmath.log(err)))
    if len(logs_theta) < 4:
        return OrderEstimate(None, True, len(logs_theta))
    slope = float(np.polyfit(logs_theta, logs_err, 1)[0])
    return OrderEstimate(slope, False, len(logs_theta))


def predicted_leading_coefficient(spec, nu: float) -> tuple[int, complex]:
    """Power ``p`` and coefficient ``c`` of ``lam_1 - lam_exact = c theta^p + ...``."""
    if spec.eigen_order == 3:
        params = resolve(spec, nu)
        total = params.require_positive_sum()
        return 4, complex((nu - 1) * nu * ((nu - 2) * (nu + 1) + 18 / total) / 72)
    if spec.eigen_order == 4:
        return 5, 1j * nu * (2 * nu**4 - 5 * nu**3 + 5 * nu - 2) / 540
    raise ValueError(f"no closed-form leading coefficient for {family_text(spec)}")


def _richardson(values: list, ratio: int = 2):
    """Extrapolate ``g(h_k)``, ``h_k = h_0 / ratio^k``, to ``h -> 0`` assuming a power series in h."""
    table = list(values)
    for order in range(1, len(values)):
        factor = ratio**order
        table = [(factor * table[i + 1] - table[i]) / (factor - 1) for i in range(len(table) - 1)]
    return table[0]


@dataclass(frozen=True)
class CoefficientCheck:
    power: int
    measured: complex
    predicted: complex
    passed: bool

    @property
    def relative_error(self) -> float | None:
        if self.predicted == 0:
            return None
        return abs(self.measured - self.predicted) / abs(self.predicted)


def leading_coefficient_check(
    spec, nu: float, ks: Sequence[int] = range(5, 11), dps: int = WORKING_DPS
) -> CoefficientCheck:
    """Measure the leading error coefficient by Richardson extrapolation and compare.

    Passes on 1% relative agreement, or on ``|measured| <= 1e-10`` when the
    predicted coefficient vanishes.
    """
    validate_courant(nu)
    power, predicted = predicted_leading_coefficient(spec, nu)
    with mpmath.workdps(dps):
        samples = []
        for k in ks:
            theta = mpmath.mpf(2) ** -k
            samples.append(_mp_principal_error(spec, nu, theta) / theta**power)
        measured = complex(_richardson(samples))
    if abs(predicted) > 1e-14:
        passed = abs(measured - predicted) <= 0.01 * abs(predicted)
    else:
        passed = abs(measured) <= 1e-10
    return CoefficientCheck(power, measured, predicted, bool(passed))


# --- sweep output --------------------------------------------------------------

SWEEP_COLUMNS = (
    "nu", "theta", "lam1_re", "lam1_im", "lam2_re", "lam2_im",
    "e1_principal", "e1_spurious", "e2_principal", "collision_flag",
)


def spectral_sweep(spec, nu: float, theta) -> dict[str, np.ndarray]:
    """Eigenvalues and errors over ``theta`` as columns keyed like :data:`SWEEP_COLUMNS`."""
    nu = validate_courant(nu)
    theta = np.asarray(theta, dtype=float)
    lam1, lam2, disc = eigenvalue_sweep(resolve(spec, nu), nu, theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        e2 = np.where(theta != 0, np.angle(lam1) / (-nu * theta), np.nan)
    e2 = np.where(np.abs(lam1) > TINY_EIGENVALUE, e2, np.nan)
    return {
        "nu": np.full(theta.shape, nu),
        "theta": theta,
        "lam1_re": lam1.real,
        "lam1_im": lam1.imag,
        "lam2_re": lam2.real,
        "lam2_im": lam2.imag,
        "e1_principal": np.abs(lam1),
        "e1_spurious": np.abs(lam2),
        "e2_principal": e2,
        "collision_flag": (np.abs(disc) < COLLISION_TOL).astype(int),
    }


def format_real(value: float) -> str:
    return f"{value:.17g}"


def write_sweep_csv(path: Path | str, sweeps: Sequence[dict[str, np.ndarray]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for sweep in sweeps:
            for i in range(sweep["theta"].size):
                row = [format_real(float(sweep[c][i])) for c in SWEEP_COLUMNS[:-1]]
                row.append(str(int(sweep["collision_flag"][i])))
                writer.writerow(row)
