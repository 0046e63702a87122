"""Initial data, exact periodic solutions, error norms and the advection experiments."""

from __future__ import annotations

import csv
import json
import math
import re
import time
import warnings
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf

from activeflux.core import Grid1D, SolutionState, make_grid, validate_courant
from activeflux.families import family_text, parse_family, resolve
from activeflux.scheme import advance, cell_mass_drift

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(5)


class NonSmoothDataWarning(UserWarning):
    """Convergence rates measured on discontinuous data are not meaningful."""


class InitialCondition:
    """A periodic profile ``q0(x)`` on the grid's domain.

    Subclasses provide :meth:`value` and, where a closed form exists,
    :meth:`integral`; the fallback integrates each cell with 5-point
    Gauss-Legendre quadrature.
    """

    smooth = True

    def value(self, x: np.ndarray, grid: Grid1D) -> np.ndarray:
        raise NotImplementedError

    def integral(self, a: np.ndarray, b: np.ndarray, grid: Grid1D) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        nodes = mid[..., None] + half[..., None] * _GAUSS_NODES
        return half * np.sum(_GAUSS_WEIGHTS * self.value(nodes, grid), axis=-1)


@dataclass(frozen=True)
class SineWave(InitialCondition):
    """``amplitude * sin(2 pi mode (x - x_min) / L)``."""

    mode: int = 1
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if int(self.mode) != self.mode or self.mode < 1:
            raise ValueError(f"sine mode must be a positive integer, got {self.mode!r}")

    def wavenumber(self, grid: Grid1D) -> float:
        return 2.0 * math.pi * self.mode / grid.length

    def value(self, x, grid):
        return self.amplitude * np.sin(self.wavenumber(grid) * (np.asarray(x) - grid.x_min))

    def integral(self, a, b, grid):
        k = self.wavenumber(grid)
        alpha = k * (np.asarray(a) - grid.x_min)
        beta = k * (np.asarray(b) - grid.x_min)
        # cos(alpha) - cos(beta) without cancellation for narrow cells
        return self.amplitude * 2.0 * np.sin(0.5 * (alpha + beta)) * np.sin(0.5 * (beta - alpha)) / k


@dataclass(frozen=True)
class SquareWave(InitialCondition):
    """Indicator of ``[left, right]``."""

    left: float = -1.0
    right: float = 1.0
    smooth = False

    def __post_init__(self) -> None:
        if not self.left < self.right:
            raise ValueError("square wave needs left < right")

    def value(self, x, grid):
        x = np.asarray(x, dtype=float)
        return ((x >= self.left) & (x <= self.right)).astype(float)

    def integral(self, a, b, grid):
        return np.maximum(0.0, np.minimum(b, self.right) - np.maximum(a, self.left))


# Shape suite layout on the reference domain [-5, 5].
_GAUSS_CENTER, _GAUSS_WIDTH, _GAUSS_SUPPORT = -3.0, 0.4, (-5.0, -1.0)
_PULSE = (-1.0, 0.0)
_SPIKE_CENTER, _SPIKE_HALF_WIDTH = 2.5, 0.4


def _tent_antiderivative(x):
    u = np.clip((x - _SPIKE_CENTER) / _SPIKE_HALF_WIDTH, -1.0, 1.0)
    return _SPIKE_HALF_WIDTH * np.where(u <= 0, 0.5 * (u + 1) ** 2, 1.0 - 0.5 * (1 - u) ** 2)


def _gauss_antiderivative(x):
    x = np.clip(x, *_GAUSS_SUPPORT)
    return 0.5 * math.sqrt(math.pi) * _GAUSS_WIDTH * erf((x - _GAUSS_CENTER) / _GAUSS_WIDTH)


@dataclass(frozen=True)
class ShapeSuite(InitialCondition):
    """Gaussian hump, unit square pulse and a narrow triangular spike.

    Placement is fixed on ``[-5, 5]`` and mapped affinely onto other domains.
    The Gaussian is cut off outside ``[-5, -1]`` (jump below 1e-10) so the
    three supports are disjoint.
    """

    smooth = False

    @staticmethod
    def _reference(x, grid):
        return -5.0 + 10.0 * (np.asarray(x, dtype=float) - grid.x_min) / grid.length

    def value(self, x, grid):
        xi = self._reference(x, grid)
        lo, hi = _GAUSS_SUPPORT
        gauss = np.where((xi >= lo) & (xi <= hi), np.exp(-(((xi - _GAUSS_CENTER) / _GAUSS_WIDTH) ** 2)), 0.0)
        pulse = ((xi >= _PULSE[0]) & (xi <= _PULSE[1])).astype(float)
        spike = np.maximum(0.0, 1.0 - np.abs(xi - _SPIKE_CENTER) / _SPIKE_HALF_WIDTH)
        return gauss + pulse + spike

    def integral(self, a, b, grid):
        ra, rb = self._reference(a, grid), self._reference(b, grid)
        ref = (
            _gauss_antiderivative(rb) - _gauss_antiderivative(ra)
            + np.maximum(0.0, np.minimum(rb, _PULSE[1]) - np.maximum(ra, _PULSE[0]))
            + _tent_antiderivative(rb) - _tent_antiderivative(ra)
        )
        return ref * grid.length / 10.0

    @staticmethod
    def reference_area() -> float:
        lo, hi = _GAUSS_SUPPORT
        gauss = 0.5 * math.sqrt(math.pi) * _GAUSS_WIDTH * (
            math.erf((hi - _GAUSS_CENTER) / _GAUSS_WIDTH) - math.erf((lo - _GAUSS_CENTER) / _GAUSS_WIDTH)
        )
        return gauss + (_PULSE[1] - _PULSE[0]) + _SPIKE_HALF_WIDTH


@dataclass(frozen=True)
class Custom(InitialCondition):
    """Arbitrary vectorized profile ``fn(x)``, integrated by quadrature."""

    fn: Callable[[np.ndarray], np.ndarray]
    smooth: bool = True

    def value(self, x, grid):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float) * np.ones_like(x, dtype=float)


def shape_suite(grid: Grid1D) -> ShapeSuite:
    return ShapeSuite()


_IC_ARG = re.compile(r"^\s*([A-Za-z_]+)\s*=\s*(\S+)\s*$")


def parse_ic(text: str) -> InitialCondition:
    """Parse ``sine:m=10``, ``square``, ``square:left=-1,right=1`` or ``shapes``."""
    name, _, rest = text.strip().partition(":")
    args: dict[str, str] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        m = _IC_ARG.match(item)
        if not m:
            raise ValueError(f"malformed initial condition argument {item!r}")
        args[m.group(1).lower()] = m.group(2)
    name = name.strip().lower()
    try:
        if name == "sine":
            known = {"m": "mode", "mode": "mode", "amplitude": "amplitude"}
            _reject_unknown(args, known, name)
            kwargs = {known[k]: float(v) for k, v in args.items()}
            if "mode" in kwargs:
                if not kwargs["mode"].is_integer():
                    raise ValueError(f"sine mode must be an integer, got {args}")
                kwargs["mode"] = int(kwargs["mode"])
            return SineWave(**kwargs)
        if name == "square":
            _reject_unknown(args, {"left": 0, "right": 0}, name)
            return SquareWave(**{k: float(v) for k, v in args.items()})
        if name == "shapes":
            _reject_unknown(args, {}, name)
            return ShapeSuite()
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid initial condition {text!r}: {exc}") from None
    raise ValueError(f"unknown initial condition {name!r}; expected sine, square or shapes")


def _reject_unknown(args: dict, known, name: str) -> None:
    extra = sorted(set(args) - set(known))
    if extra:
        raise ValueError(f"{name} does not take {', '.join(extra)}")


def _wrap(x: np.ndarray, grid: Grid1D) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = (x >= grid.x_min) & (x < grid.x_max)
    return np.where(inside, x, grid.x_min + np.mod(x - grid.x_min, grid.length))


def _periodic_averages(ic: InitialCondition, a: np.ndarray, b: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Mean of the periodic extension of ``ic`` over each ``[a, b]`` (width below L)."""
    width = b - a
    start = _wrap(a, grid)
    unchanged = start == a
    stop = np.where(unchanged, b, start + width)
    split = stop > grid.x_max
    whole = ic.integral(start, np.minimum(stop, grid.x_max), grid)
    tail = ic.integral(np.full_like(stop, grid.x_min), np.where(split, stop - grid.length, grid.x_min), grid)
    total = whole + np.where(split, tail, 0.0)
    return np.where(split, total / width, whole / (stop - start))


def project(ic: InitialCondition, grid: Grid1D) -> SolutionState:
    """Degrees of freedom of ``ic``: exact interface samples and exact cell means."""
    if isinstance(ic, SineWave) and 2 * ic.mode > grid.n_cells:
        raise ValueError(f"sine mode {ic.mode} is not resolvable on {grid.n_cells} cells")
    return _sample(ic, grid, 0.0)


def _sample(ic: InitialCondition, grid: Grid1D, shift: float) -> SolutionState:
    points = ic.value(_wrap(grid.right_edges - shift, grid), grid)
    averages = _periodic_averages(ic, grid.left_edges - shift, grid.right_edges - shift, grid)
    return SolutionState(averages, points)


def exact_state(ic: InitialCondition, grid: Grid1D, t: float, a: float = 1.0) -> SolutionState:
    """Projection of ``q0(x - a t)`` continued periodically."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    shift = math.fmod(a * t, grid.length)
    if shift == 0.0:
        return project(ic, grid)
    return _sample(ic, grid, shift)


@dataclass(frozen=True)
class ErrorReport:
    avg_l1: float
    avg_l2: float
    avg_linf: float
    pt_l1: float
    pt_l2: float
    pt_linf: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def _norms(err: np.ndarray, dx: float) -> tuple[float, float, float]:
    err = np.abs(err)
    return float(dx * np.sum(err)), float(math.sqrt(dx * np.sum(err * err))), float(np.max(err))


def error_norms(state: SolutionState, reference: SolutionState, grid: Grid1D) -> ErrorReport:
    if state.n_cells != reference.n_cells or state.n_cells != grid.n_cells:
        raise ValueError("state, reference and grid sizes differ")
    return ErrorReport(
        *_norms(state.averages - reference.averages, grid.dx),
        *_norms(state.point_values - reference.point_values, grid.dx),
    )


def steps_for(t_final: float, nu: float, dx: float, a: float) -> int:
    if a <= 0:
        raise ValueError("advection speed must be positive")
    return int(round(t_final / (nu * dx / a)))


@dataclass(frozen=True)
class ConvergenceRow:
    n_cells: int
    errors: ErrorReport
    n_steps: int
    t_real: float
    eoc: dict[str, float] | None = None
    mass_drift: float = 0.0

    @property
    def headline_eoc(self) -> float | None:
        return None if self.eoc is None else self.eoc["avg_l2"]


def convergence_study(
    ic: InitialCondition,
    spec,
    nu: float,
    a: float,
    t_final: float,
    cell_counts: Sequence[int],
    x_min: float = -5.0,
    x_max: float = 5.0,
) -> list[ConvergenceRow]:
    """Errors and experimental orders of convergence under grid refinement.

    Each grid runs a whole number of steps; the error is measured against
    the exact solution at the realized time of that grid.
    """
    nu = validate_courant(nu)
    if not ic.smooth:
        warnings.warn("initial data is not smooth; EOC is not meaningful", NonSmoothDataWarning, stacklevel=2)
    params = resolve(spec, nu)
    rows: list[ConvergenceRow] = []
    for n in cell_counts:
        grid = make_grid(x_min, x_max, n)
        n_steps = steps_for(t_final, nu, grid.dx, a)
        t_real = n_steps * nu * grid.dx / a
        start = project(ic, grid)
        final = advance(start, params, nu, n_steps)
        errors = error_norms(final, exact_state(ic, grid, t_real, a), grid)
        eoc = None
        if rows:
            prev = rows[-1]
            scale = math.log(n / prev.n_cells)
            eoc = {}
            for key, value in errors.to_dict().items():
                before = getattr(prev.errors, key)
                eoc[key] = math.log(before / value) / scale if value > 0 and before > 0 else math.nan
        rows.append(ConvergenceRow(n, errors, n_steps, t_real, eoc, cell_mass_drift(start, final)))
    return rows


def fourier_coefficient(values: np.ndarray, mode: int) -> complex:
    n = values.size
    return complex(np.dot(values, np.exp(-2j * math.pi * mode * np.arange(n) / n)) / n)


def amplitude_retention(state: SolutionState, grid: Grid1D, mode: int, initial: SolutionState | float) -> float:
    """``|c_mode(averages)| / baseline`` where ``c_mode`` is the discrete Fourier coefficient.

    ``initial`` is either the unadvanced state or a precomputed baseline magnitude.
    """
    if not (1 <= mode <= grid.n_cells // 2):
        raise ValueError(f"mode must lie in [1, {grid.n_cells // 2}]")
    if isinstance(initial, SolutionState):
        baseline = abs(fourier_coefficient(initial.averages, mode))
    else:
        baseline = float(initial)
    if baseline == 0:
        raise ValueError("baseline Fourier coefficient is zero")
    return abs(fourier_coefficient(state.averages, mode)) / baseline


@dataclass
class ExperimentConfig:
    nu: float
    family: str = "traditional"
    a: float = 1.0
    x_min: float = -5.0
    x_max: float = 5.0
    n_cells: int = 100
    t_final: float = 10.0
    ic: str = "sine:m=10"
    outputs: Path | None = None
    emit_svg: bool = False


@dataclass
class RunResult:
    config: ExperimentConfig
    grid: Grid1D
    initial: SolutionState
    final: SolutionState
    exact: SolutionState
    n_steps: int
    t_real: float
    norms: ErrorReport
    retention: float | None
    mass_drift: float
    wall_seconds: float
    files: list[Path] = field(default_factory=list)

    def summary(self) -> dict:
        cfg = self.config
        return {
            "family": family_text(parse_family(cfg.family)),
            "nu": cfg.nu,
            "n_cells": cfg.n_cells,
            "t_requested": cfg.t_final,
            "t_real": self.t_real,
            "n_steps": self.n_steps,
            "norms": self.norms.to_dict(),
            "retention": self.retention,
            "wall_seconds": self.wall_seconds,
            "ic": cfg.ic,
            "a": cfg.a,
            "mass_drift": self.mass_drift,
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Project, advance a whole number of steps, compare against the exact solution.

    Artifacts are written when ``config.outputs`` is set. ``SolverBlowUp``
    propagates with the failing step index.
    """
    nu = validate_courant(config.nu)
    spec = parse_family(config.family)
    ic = parse_ic(config.ic)
    grid = make_grid(config.x_min, config.x_max, config.n_cells)
    if config.t_final < 0:
        raise ValueError("t_final must be nonnegative")
    n_steps = steps_for(config.t_final, nu, grid.dx, config.a)
    t_real = n_steps * nu * grid.dx / config.a

    start = time.perf_counter()
    initial = project(ic, grid)
    final = advance(initial, resolve(spec, nu), nu, n_steps)
    wall = time.perf_counter() - start

    exact = exact_state(ic, grid, t_real, config.a)
    retention = None
    if isinstance(ic, SineWave):
        retention = amplitude_retention(final, grid, ic.mode, initial)
    result = RunResult(
        config=config,
        grid=grid,
        initial=initial,
        final=final,
        exact=exact,
        n_steps=n_steps,
        t_real=t_real,
        norms=error_norms(final, exact, grid),
        retention=retention,
        mass_drift=abs(math.fsum(final.averages) - math.fsum(initial.averages)),
        wall_seconds=wall,
    )
    if config.outputs is not None:
        write_run_artifacts(result, Path(config.outputs))
    return result


SOLUTION_COLUMNS = ("x_center", "average", "exact_average", "x_right_interface", "point_value", "exact_point_value")
CONVERGENCE_COLUMNS = ("n_cells", "l1_avg", "l2_avg", "linf_avg", "l1_pt", "l2_pt", "linf_pt", "eoc_l2_avg")


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_solution_csv(path: Path, grid: Grid1D, state: SolutionState, exact: SolutionState) -> None:
    columns = (grid.centers, state.averages, exact.averages, grid.right_edges, state.point_values, exact.point_values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SOLUTION_COLUMNS)
        for row in zip(*columns):
            writer.writerow([_fmt(float(v)) for v in row])


def write_convergence_csv(path: Path, rows: Sequence[ConvergenceRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CONVERGENCE_COLUMNS)
        for row in rows:
            e = row.errors
            eoc = "" if row.headline_eoc is None else _fmt(row.headline_eoc)
            values = (e.avg_l1, e.avg_l2, e.avg_linf, e.pt_l1, e.pt_l2, e.pt_linf)
            writer.writerow([str(row.n_cells), *(_fmt(v) for v in values), eoc])


def write_run_artifacts(result: RunResult, outdir: Path) -> None:
    from activeflux import plotting

    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "solution.csv"
    write_solution_csv(csv_path, result.grid, result.final, result.exact)
    json_path = outdir / "summary.json"
    json_path.write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n")
    result.files[:] = [csv_path, json_path]
    if result.config.emit_svg:
        svg_path = outdir / "solution.svg"
        label = family_text(parse_family(result.config.family))
        plotting.write_line_plot(
            svg_path,
            [
                ("exact", result.grid.centers, result.exact.averages),
                (label, result.grid.centers, result.final.averages),
            ],
            title=f"{label}, nu={result.config.nu:g}, T={result.t_real:g}",
            xlabel="x",
            ylabel="cell average",
        )
        result.files.append(svg_path)
