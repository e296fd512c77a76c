import numpy as np
import pytest

from lossyline.fdtd import FdtdGrid, fdtd_solve, fdtd_solve_matrix
from lossyline.network import (IncompatibleNetworkError, NetworkSpec, VoltageVector,
                               build_tridiagonal_cap, jacobi_eigh, mass_tensor, modal_decompose,
                               network_response)
from lossyline.response import response_at
from lossyline.waveform import Waveform

PULSE = Waveform.gaussian(width=0.1, center=0.5)
rng = np.random.default_rng(11)


def _coupled(v=1.0, r=0.8):
    return NetworkSpec.from_capacitance(build_tridiagonal_cap(1.0, 0.3, 3), v, r)


def test_three_line_capacitance_layout():
    g, cm = 2.0, 0.5
    expect = np.array([[2 * g + cm, -cm, 0], [-cm, 2 * g + 2 * cm, -cm], [0, -cm, 2 * g + cm]])
    assert np.array_equal(build_tridiagonal_cap(g, cm, 3), expect)
    assert np.array_equal(build_tridiagonal_cap(g, 0.0, 4), 2 * g * np.eye(4))
    assert build_tridiagonal_cap(g, cm, 1).tolist() == [[2 * g + cm]]


def test_mass_tensor_dual_forms():
    spec = NetworkSpec.from_capacitance(build_tridiagonal_cap(1.1e-13, 4e-14, 3), 1.2e10, 37.8)
    from_cap = 0.5 * spec.r * spec.v ** 2 * spec.cap
    assert np.max(np.abs(mass_tensor(spec) - from_cap)) <= 1e-6 * np.max(np.abs(from_cap))
    scalar = NetworkSpec(np.array([[3.28e-13]]), np.array([[2.3e-8]]), 37.8)
    assert mass_tensor(scalar)[0, 0] == pytest.approx(37.8 / (2 * 2.3e-8), rel=1e-14)


def test_incompatible_matrices_rejected():
    cap = build_tridiagonal_cap(1.0, 0.3, 3)
    ind = np.linalg.inv(cap)
    ind[0, 1] = ind[1, 0] = ind[0, 1] * 1.01
    with pytest.raises(IncompatibleNetworkError, match=r"entry \("):
        NetworkSpec(cap, ind, 1.0)
    with pytest.raises(ValueError):
        NetworkSpec(-np.eye(2), -np.eye(2), 1.0)


def test_jacobi_matches_reference_solver():
    a = rng.normal(size=(6, 6))
    a = a + a.T
    w, v = jacobi_eigh(a)
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(a), rtol=0, atol=1e-13 * np.linalg.norm(a))
    assert np.max(np.abs(v.T @ v - np.eye(6))) <= 1e-12


def test_modal_round_trip_and_conventions():
    a = rng.normal(size=(5, 5))
    mass = a @ a.T + 5 * np.eye(5)
    basis = modal_decompose(mass)
    e, m = basis.vectors, basis.rates
    assert np.linalg.norm(e @ np.diag(m) @ e.T - mass) <= 1e-10 * np.linalg.norm(mass)
    assert np.all(np.diff(m) >= 0)
    for k in range(5):
        col = e[:, k]
        assert col[np.argmax(np.abs(col))] > 0
    u = VoltageVector(rng.normal(size=(7, 5)), "line")
    back = basis.to_line(basis.to_modal(u))
    assert np.max(np.abs(back.components - u.components)) <= 1e-12


def test_simple_spectra():
    basis = modal_decompose(np.diag([3.0, 1.0, 2.0]))
    assert basis.rates.tolist() == [1.0, 2.0, 3.0]
    assert np.array_equal(basis.vectors, np.eye(3)[:, [1, 2, 0]])
    pair = modal_decompose(np.array([[2.0, 0.5], [0.5, 2.0]]))
    assert np.allclose(pair.rates, [1.5, 2.5], rtol=1e-15)
    s = 1 / np.sqrt(2)
    assert np.allclose(np.abs(pair.vectors), s, rtol=1e-14)
    # degenerate eigenvalues: deterministic order
    assert np.array_equal(modal_decompose(np.eye(3)).vectors, np.eye(3)[:, ::-1])
    with pytest.raises(ValueError):
        modal_decompose(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_cross_basis_arithmetic_forbidden():
    with pytest.raises(ValueError):
        VoltageVector(np.zeros(3), "line") + VoltageVector(np.zeros(3), "modal")
    with pytest.raises(ValueError):
        VoltageVector(np.zeros(3), "polar")


def test_single_line_reduces_to_scalar_path():
    spec = NetworkSpec(np.array([[2.0]]), np.array([[0.5]]), 1.6)
    t = np.linspace(0, 5, 101)
    for u in (Waveform.step(), PULSE, Waveform.ramp(0.4)):
        got = network_response(spec, 1.2, t, [u]).components[:, 0]
        ref = response_at(1.2, t, u, 1.6)
        assert np.max(np.abs(got - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_decoupled_lines_do_not_talk():
    spec = NetworkSpec.from_capacitance(build_tridiagonal_cap(1.0, 0.0, 3), 1.0, 0.8)
    t = np.linspace(0, 4, 81)
    out = network_response(spec, 1.0, t, [Waveform.step(), None, None]).components
    assert np.all(out[:, 1:] == 0)
    assert np.allclose(out[:, 0], response_at(1.0, t, Waveform.step(), 0.8), rtol=1e-14, atol=0)


def test_coupled_crosstalk_matches_matrix_fdtd():
    spec = _coupled()
    t_end = 3.0
    grid = FdtdGrid.for_window(0.1 / 40, t_end, 1.0)
    ref = fdtd_solve_matrix(grid, mass_tensor(spec), [PULSE, None, None], [1.0], t_end)
    got = network_response(spec, 1.0, ref.times, [PULSE, None, None]).components
    for i in range(3):
        o = ref.values[:, 0, i]
        assert np.linalg.norm(got[:, i] - o) / np.linalg.norm(o) <= 2e-2
    assert np.max(np.abs(got[:, 1])) > 1e-3   # genuine crosstalk


def test_eigenvector_input_stays_in_its_subspace():
    spec = _coupled()
    basis = modal_decompose(mass_tensor(spec))
    e = basis.vectors[:, 1]
    u_in = [Waveform.step(amplitude=float(c)) for c in e]
    out = network_response(spec, 1.0, np.linspace(1.01, 5, 50), u_in, basis=basis).components
    cos = out @ e / np.linalg.norm(out, axis=1)
    assert np.min(cos) >= 1 - 1e-10


def test_faster_decaying_modes_have_weaker_fronts():
    spec = _coupled()
    basis = modal_decompose(mass_tensor(spec))
    fronts = [response_at(1.0, [1.0], Waveform.step(), float(m))[0] for m in basis.rates]
    assert fronts == sorted(fronts, reverse=True)


def test_matrix_fdtd_projects_onto_scalar_runs():
    spec = _coupled()
    mass = mass_tensor(spec)
    basis = modal_decompose(mass)
    grid = FdtdGrid.for_window(0.1 / 20, 2.0, 1.0)
    ref = fdtd_solve_matrix(grid, mass, [PULSE, None, None], [1.0], 2.0)
    modal = ref.values[:, 0, :] @ basis.vectors
    for i, m in enumerate(basis.rates):
        u = Waveform.gaussian(PULSE.width, PULSE.onset, amplitude=float(basis.vectors[0, i]))
        scalar = fdtd_solve(grid, float(m), u, [1.0], 2.0).values[:, 0]
        assert np.max(np.abs(modal[:, i] - scalar)) <= 1e-6 * np.max(np.abs(scalar))
