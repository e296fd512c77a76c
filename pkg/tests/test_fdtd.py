import numpy as np
import pytest

from lossyline.fdtd import (CFLError, FdtdGrid, InstabilityError, dump_csv, fdtd_solve,
                            fdtd_solve_matrix)
from lossyline.response import response_at
from lossyline.waveform import Waveform

PULSE = Waveform.gaussian(width=0.1, center=0.5)


def _error(dx, m=1.0, x=1.0, t_end=3.0):
    grid = FdtdGrid.for_window(dx, t_end, x)
    res = fdtd_solve(grid, m, PULSE, [x], t_end)
    exact = response_at(x, res.times, PULSE, m)
    return np.sqrt(np.mean((res.values[:, 0] - exact) ** 2))


def test_second_order_convergence():
    e = [_error(0.1 / n) for n in (10, 20, 40)]
    orders = np.log2(np.array(e[:-1]) / np.array(e[1:]))
    assert np.all(orders >= 1.9), orders


def test_finite_domain_of_dependence():
    # node j is untouched until step j: exactly zero for t < (dt/dx) x
    grid = FdtdGrid.for_window(0.005, 2.0, 1.0)
    res = fdtd_solve(grid, 0.5, Waveform.step(), [1.0], 2.0)
    j = int(round(1.0 / grid.dx))
    assert np.all(res.values[:j, 0] == 0)
    assert res.values[j, 0] != 0


def test_richardson_self_convergence():
    t_end, x = 2.5, 1.0
    finals = []
    for n in (20, 40, 80):
        dx = 0.1 / n
        grid = FdtdGrid(dx, 0.5 * dx, 3.0, "absorbing")
        res = fdtd_solve(grid, 1.0, PULSE, [x], t_end)
        stride = n // 20
        finals.append(res.values[::stride, 0][: int(round(t_end / (0.5 * 0.1 / 20))) + 1])
    a, b, c = finals
    order = np.log2(np.linalg.norm(a - b) / np.linalg.norm(b - c))
    assert order >= 1.9, order


def test_damping_lowers_late_step_response():
    grid = FdtdGrid.for_window(0.01, 3.0, 1.0)
    lossless = fdtd_solve(grid, 0.0, Waveform.step(), [1.0], 3.0).values[-1, 0]
    lossy = fdtd_solve(grid, 0.7, Waveform.step(), [1.0], 3.0).values[-1, 0]
    assert lossy < lossless


def test_decoupled_matrix_run_matches_scalar_runs():
    grid = FdtdGrid.for_window(0.01, 2.0, 1.0)
    rates = [0.2, 0.9]
    both = fdtd_solve_matrix(grid, np.diag(rates), [PULSE, Waveform.step()], [1.0], 2.0).values
    for i, (m, u) in enumerate(zip(rates, [PULSE, Waveform.step()])):
        single = fdtd_solve(grid, m, u, [1.0], 2.0).values[:, 0]
        assert np.max(np.abs(both[:, 0, i] - single)) <= 1e-12


def test_energy_conserved_without_loss_and_decays_with_it():
    # a pulse launched into a line with a grounded source and shorted far end
    pulse = Waveform.gaussian(width=0.05, center=0.25, duration=0.6)
    grid = FdtdGrid(0.01, 0.009, 2.0, "short")
    lossless = fdtd_solve(grid, 0.0, pulse, [1.0], 6.0, record_energy=True).energy
    lossy = fdtd_solve(grid, 0.5, pulse, [1.0], 6.0, record_energy=True).energy
    after = slice(int(0.7 / 0.009), None)
    e = lossless[after]
    assert np.max(np.abs(e - e[0])) <= 1e-10 * e[0]
    assert np.all(np.diff(lossy[after]) <= 1e-14 * lossy[after][0])
    assert lossy[-1] < 0.2 * lossy[after][0]


def test_absorbing_boundary_leaks_little():
    grid = FdtdGrid(0.0025, 0.00225, 1.5, "absorbing")
    res = fdtd_solve(grid, 0.0, PULSE, [1.0], 4.0)
    assert np.max(np.abs(res.values[res.times > 2.2, 0])) < 2e-2


def test_cfl_guard_and_instability_detection():
    with pytest.raises(CFLError):
        FdtdGrid(0.01, 0.0095, 1.0)
    grid = FdtdGrid(0.01, 0.009, 1.0)
    object.__setattr__(grid, "dt", 0.0125)   # bypass the guard on purpose
    with pytest.raises(InstabilityError):
        fdtd_solve(grid, 0.0, PULSE, [0.5], 20.0)


def test_matrix_path_reduces_to_scalar():
    grid = FdtdGrid.for_window(0.01, 2.0, 1.0, "open")
    a = fdtd_solve(grid, 0.7, PULSE, [0.3, 1.0], 2.0)
    b = fdtd_solve_matrix(grid, np.array([[0.7]]), [PULSE], [0.3, 1.0], 2.0)
    assert np.max(np.abs(a.values - b.values[:, :, 0])) <= 1e-12


def test_probe_validation():
    grid = FdtdGrid(0.01, 0.009, 1.0)
    with pytest.raises(ValueError):
        fdtd_solve(grid, 0.0, PULSE, [1.5], 1.0)
    with pytest.raises(ValueError):
        fdtd_solve(grid, -1.0, PULSE, [0.5], 1.0)


def test_csv_dump(tmp_path):
    grid = FdtdGrid(0.1, 0.09, 1.0)
    res = fdtd_solve(grid, 0.0, PULSE, [0.5], 0.3)
    path = tmp_path / "probes.csv"
    dump_csv(res, [0.5], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "time,x=0.5"
    assert len(lines) == len(res.times) + 1
    assert float(lines[-1].split(",")[1]) == res.values[-1, 0]
