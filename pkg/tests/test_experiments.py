import json
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from activeflux import spectral
from activeflux.core import FourierMode, make_grid
from activeflux.experiments import (
    Custom,
    ExperimentConfig,
    NonSmoothDataWarning,
    ShapeSuite,
    SineWave,
    SquareWave,
    amplitude_retention,
    convergence_study,
    error_norms,
    exact_state,
    parse_ic,
    project,
    run_experiment,
    shape_suite,
    steps_for,
    write_convergence_csv,
)
from activeflux.families import Method3, SuperDuper, Traditional, resolve
from activeflux.scheme import advance

GRID = make_grid(-5, 5, 100)


def test_project_constant():
    state = project(Custom(lambda x: 0 * x + 2.5), GRID)
    np.testing.assert_allclose(state.averages, 2.5, rtol=1e-15)
    np.testing.assert_allclose(state.point_values, 2.5, rtol=1e-15)


def test_sine_averages_match_closed_form_integral():
    ic = SineWave(3)
    state = project(ic, GRID)
    k = 2 * math.pi * 3 / GRID.length
    a, b = GRID.left_edges - GRID.x_min, GRID.right_edges - GRID.x_min
    expected = (np.cos(k * a) - np.cos(k * b)) / (k * GRID.dx)
    np.testing.assert_allclose(state.averages, expected, atol=1e-13)
    # sinc-weighted samples at the centers
    sinc = math.sin(k * GRID.dx / 2) / (k * GRID.dx / 2)
    np.testing.assert_allclose(state.averages, sinc * ic.value(GRID.centers, GRID), atol=1e-13)
    np.testing.assert_allclose(state.point_values, ic.value(GRID.right_edges, GRID), atol=1e-15)


def test_closed_form_agrees_with_quadrature():
    sine = SineWave(4)
    quad = Custom(lambda x: sine.value(x, GRID))
    np.testing.assert_allclose(project(sine, GRID).averages, project(quad, GRID).averages, atol=1e-12)


def test_square_wave_averages_are_exact():
    state = project(SquareWave(), GRID)
    assert set(np.unique(state.averages)) == {0.0, 1.0}
    assert state.averages.sum() == 20


def test_unresolvable_sine_rejected():
    with pytest.raises(ValueError):
        project(SineWave(51), GRID)


def test_shape_suite_area_and_support():
    suite = shape_suite(GRID)
    lo, hi = GRID.x_min, GRID.x_max
    fine = np.linspace(lo, hi, 400001)
    # trapezoid on a fine mesh; each jump of the pulse costs about h/2
    numeric = trapezoid(suite.value(fine, GRID), fine)
    assert numeric == pytest.approx(ShapeSuite.reference_area(), abs=1e-4)
    assert ShapeSuite.reference_area() == pytest.approx(0.4 * math.sqrt(math.pi) * math.erf(5) + 1 + 0.4, abs=1e-12)
    state = project(suite, GRID)
    assert state.averages.sum() * GRID.dx == pytest.approx(ShapeSuite.reference_area(), abs=1e-12)
    assert np.all(suite.value(np.array([-0.5 + 1.0, 1.5, 4.0]), GRID) == 0)
    assert suite.value(fine, GRID).max() == pytest.approx(1.0, abs=1e-6)


def test_shape_suite_rescales_with_domain():
    grid = make_grid(0, 1, 50)
    state = project(ShapeSuite(), grid)
    assert state.averages.sum() * grid.dx == pytest.approx(ShapeSuite.reference_area() / 10, abs=1e-12)


@pytest.mark.parametrize("ic", [SineWave(2), SquareWave(), ShapeSuite()])
def test_exact_state_periodicity(ic):
    base = project(ic, GRID)
    np.testing.assert_array_equal(exact_state(ic, GRID, 0.0).averages, base.averages)
    period = exact_state(ic, GRID, GRID.length, 1.0)
    np.testing.assert_array_equal(period.averages, base.averages)
    one_cell = exact_state(ic, GRID, GRID.dx, 1.0)
    np.testing.assert_allclose(one_cell.averages, np.roll(base.averages, 1), atol=1e-12)
    gap = np.abs(one_cell.point_values - np.roll(base.point_values, 1)) > 1e-12
    # a jump landing on an interface may be sampled from either side
    assert gap.sum() == 0 if ic.smooth else gap.sum() <= 2


def test_exact_state_partial_shift_matches_direct_formula():
    ic = SineWave(2)
    t = 0.3737
    state = exact_state(ic, GRID, t, a=2.0)
    direct = project(Custom(lambda x: ic.value(x - 2.0 * t, GRID)), GRID)
    np.testing.assert_allclose(state.averages, direct.averages, atol=1e-12)
    np.testing.assert_allclose(state.point_values, direct.point_values, atol=1e-14)


def test_error_norms():
    base = project(SineWave(1), GRID)
    zero = error_norms(base, base, GRID)
    assert all(v == 0 for v in zero.to_dict().values())
    bumped = base.averages.copy()
    bumped[7] += 1.0
    from activeflux.core import SolutionState

    rep = error_norms(SolutionState(bumped, base.point_values), base, GRID)
    assert rep.avg_l1 == pytest.approx(0.1)
    assert rep.avg_l2 == pytest.approx(math.sqrt(0.1))
    assert rep.avg_linf == pytest.approx(1.0)
    assert rep.pt_linf == 0
    shifted = SolutionState(base.averages + 0.5, base.point_values)
    rep = error_norms(shifted, base, GRID)
    assert rep.avg_linf == pytest.approx(0.5)
    assert rep.avg_l1 == pytest.approx(0.5 * GRID.length)
    with pytest.raises(ValueError):
        error_norms(project(SineWave(1), make_grid(0, 1, 10)), base, GRID)


def test_steps_for_long_run():
    assert steps_for(1000, 0.7, 0.1, 1.0) == 14286


def test_convergence_traditional():
    rows = convergence_study(SineWave(1), Traditional(), 0.7, 1.0, 2.0, [50, 100, 200, 400])
    assert rows[0].eoc is None
    assert 2.8 <= rows[-1].headline_eoc <= 3.2


def test_convergence_exact_at_nu_one():
    rows = convergence_study(SineWave(1), SuperDuper(), 1.0, 1.0, 2.0, [20, 40])
    for row in rows:
        assert row.errors.avg_linf <= 1e-12 and row.errors.pt_linf <= 1e-12


def test_convergence_warns_on_square_wave():
    with pytest.warns(NonSmoothDataWarning):
        convergence_study(SquareWave(), Traditional(), 0.7, 1.0, 1.0, [20, 40])


def test_convergence_csv(tmp_path):
    rows = convergence_study(SineWave(1), Traditional(), 0.5, 1.0, 1.0, [20, 40])
    path = tmp_path / "c.csv"
    write_convergence_csv(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "n_cells,l1_avg,l2_avg,linf_avg,l1_pt,l2_pt,linf_pt,eoc_l2_avg"
    assert lines[1].endswith(",") and not lines[2].endswith(",")


def test_retention_identity_and_nu_one():
    ic = SineWave(10)
    state = project(ic, GRID)
    assert amplitude_retention(state, GRID, 10, state) == 1.0
    after = advance(state, resolve(Method3(2.0), 1.0), 1.0, 37)
    assert amplitude_retention(after, GRID, 10, state) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        amplitude_retention(state, GRID, 10, 0.0)
    with pytest.raises(ValueError):
        amplitude_retention(state, GRID, 51, state)


@pytest.mark.parametrize("spec", [Traditional(), Method3(4.0), SuperDuper()])
def test_retention_follows_modal_prediction(spec):
    nu, m, n_steps = 0.7, 10, 2000
    ic = SineWave(m)
    start = project(ic, GRID)
    params = resolve(spec, nu)
    final = advance(start, params, nu, n_steps)
    theta = 2 * math.pi * m / GRID.n_cells
    # modal oracle: propagate the projected amplitudes with the matrix
    phase = np.exp(-1j * (np.arange(GRID.n_cells) + 0.5) * theta)
    mode = FourierMode(theta, np.mean(start.averages * phase), np.mean(start.point_values * phase))
    evolved = spectral.evolve_mode(mode, params, nu, n_steps)
    predicted = abs(evolved.Q_hat) / abs(mode.Q_hat)
    assert amplitude_retention(final, GRID, m, start) == pytest.approx(predicted, rel=1e-9)
    lam1, lam2, _ = spectral.eigenvalue_sweep(params, nu, [theta])
    dominant = max(abs(lam1[0]), abs(lam2[0])) ** n_steps
    assert amplitude_retention(final, GRID, m, start) == pytest.approx(dominant, rel=0.1)


def test_parse_ic():
    assert parse_ic("sine:m=10") == SineWave(10)
    assert parse_ic("SINE:mode=3,amplitude=2") == SineWave(3, 2.0)
    assert parse_ic("square") == SquareWave()
    assert parse_ic("square:left=-2,right=0.5") == SquareWave(-2.0, 0.5)
    assert isinstance(parse_ic("shapes"), ShapeSuite)
    for bad in ("sine:m=1.5", "sine:k=2", "tri", "square:left=1,right=0", "shapes:x=1"):
        with pytest.raises(ValueError):
            parse_ic(bad)


def test_run_experiment_t_zero():
    res = run_experiment(ExperimentConfig(nu=0.7, t_final=0.0, ic="shapes"))
    assert res.n_steps == 0
    np.testing.assert_array_equal(res.final.averages, res.initial.averages)


def test_run_experiment_half_cfl_exact(tmp_path):
    cfg = ExperimentConfig(nu=0.5, family="superduper", t_final=10, ic="shapes", outputs=tmp_path, emit_svg=True)
    res = run_experiment(cfg)
    assert res.n_steps == 200
    assert res.norms.avg_linf <= 1e-11 and res.norms.pt_linf <= 1e-11
    summary = json.loads((tmp_path / "summary.json").read_text())
    for key in ("family", "nu", "n_cells", "t_requested", "t_real", "n_steps", "norms", "retention", "wall_seconds"):
        assert key in summary
    header = (tmp_path / "solution.csv").read_text().splitlines()[0]
    assert header == "x_center,average,exact_average,x_right_interface,point_value,exact_point_value"
    assert (tmp_path / "solution.svg").read_text().startswith("<svg")


def test_run_experiment_realized_time():
    res = run_experiment(ExperimentConfig(nu=0.7, t_final=1.0, ic="sine:m=2"))
    assert res.n_steps == 14
    assert res.t_real == pytest.approx(0.98)
