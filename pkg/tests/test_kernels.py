import numpy as np
import pytest

from lossyline.kernels import (DEFAULT_KERNEL, PAPER_NORMALIZATION, Kernel, KernelNormalization,
                               KernelVariant, boundary_tail, greens_boundary, greens_dc_asymptotic,
                               greens_retarded, pole_frequencies)

rng = np.random.default_rng(3)


def _interior_points(n=1000):
    m = rng.uniform(0.2, 4.0, n)
    x = rng.uniform(-2.0, 2.0, n)
    t = np.abs(x) + rng.uniform(0.05, 3.0, n)
    return m, x, t


def _relative_residual(f, m, x, t, h=1e-3):
    u = f(x, t)
    utt = (f(x, t + h) - 2 * u + f(x, t - h)) / h ** 2
    uxx = (f(x + h, t) - 2 * u + f(x - h, t)) / h ** 2
    ut = (f(x, t + h) - f(x, t - h)) / (2 * h)
    return np.abs(utt - uxx + 2 * m * ut) / (np.abs(utt) + np.abs(uxx) + np.abs(2 * m * ut))


def test_retarded_kernel_solves_damped_wave_equation():
    m, x, t = _interior_points()
    res = _relative_residual(lambda xx, tt: greens_retarded(xx, tt, m), m, x, t)
    assert np.max(res) <= 1e-5


def test_consistent_boundary_tail_solves_damped_wave_equation():
    m, x, t = _interior_points()
    x = np.abs(x) + 0.05
    t = x + rng.uniform(0.05, 3.0, x.size)
    f = lambda xx, tt: boundary_tail(xx, tt, m, KernelVariant.DERIVATIVE_CONSISTENT)
    assert np.max(_relative_residual(f, m, x, t)) <= 1e-5


def test_literal_boundary_tail_does_not():
    # the literal 2x I1 form is not a solution; this is why calibration exists
    m, x, t = _interior_points(200)
    x = np.abs(x) + 0.05
    t = x + rng.uniform(0.05, 3.0, x.size)
    f = lambda xx, tt: boundary_tail(xx, tt, m, KernelVariant.PAPER_LITERAL)
    assert np.median(_relative_residual(f, m, x, t)) > 1e-2


def test_causal_support_and_symmetry():
    x = np.linspace(-3, 3, 61)
    assert np.all(greens_retarded(x, np.abs(x) - 1e-9, 1.0) == 0)
    assert np.all(greens_retarded(x, -0.5, 1.0) == 0)
    t = 4.0
    assert np.array_equal(greens_retarded(x, t, 1.3), greens_retarded(-x, t, 1.3))
    tail = greens_boundary(1.0, np.linspace(0, 1, 11), 2.0, KernelVariant.DERIVATIVE_CONSISTENT).smooth
    assert np.all(tail == 0)


def test_retarded_on_the_light_cone_and_normalization():
    # lam = 0: e^{-mt} I0(0) = e^{-mt}, with the literal overall sign
    assert greens_retarded(1.0, 1.0, 0.7) == pytest.approx(-np.exp(-0.7), rel=1e-15)
    unit = KernelNormalization(1.0, 1)
    assert greens_retarded(1.0, 1.0, 0.7, unit) == pytest.approx(np.exp(-0.7), rel=1e-15)
    assert PAPER_NORMALIZATION.factor == -1


def test_no_overflow_at_large_mt():
    v = greens_retarded(1.0, 1e3, 50.0)
    assert np.isfinite(v) and v != 0
    tail = boundary_tail(1.0, np.array([1e3]), 50.0, KernelVariant.DERIVATIVE_CONSISTENT)
    assert np.all(np.isfinite(tail))


def test_boundary_impulse_weight_and_lossless_tail():
    for variant in KernelVariant:
        k = greens_boundary(2.0, np.array([3.0]), 0.5, variant)
        assert k.impulse == pytest.approx(np.exp(-1.0))
    k = greens_boundary(2.0, np.linspace(2.1, 5, 20), 0.0, KernelVariant.DERIVATIVE_CONSISTENT)
    assert np.all(k.smooth == 0) and k.impulse == 1.0
    with pytest.raises(ValueError):
        greens_boundary(0.0, 1.0, 1.0, KernelVariant.PAPER_LITERAL)


def test_boundary_tail_is_x_derivative_of_retarded():
    # consistent tail = -d/dx [e^{-mt} I0(m sqrt(t^2 - x^2))]
    m, x, t, h = 1.7, 0.8, 2.3, 1e-5
    unit = KernelNormalization()
    d = (greens_retarded(x + h, t, m, unit) - greens_retarded(x - h, t, m, unit)) / (2 * h)
    got = boundary_tail(x, t, m, KernelVariant.DERIVATIVE_CONSISTENT)
    assert got == pytest.approx(-d, rel=1e-8)


def test_dc_asymptotic_form():
    t = np.array([0.5, 1.0, 4.0])
    got = greens_dc_asymptotic(1.2, t, 0.9)
    assert np.allclose(got, -(t * np.exp(-0.9 * t) / np.pi) * np.sin(0.9 * 1.2) / 1.2, rtol=1e-14)
    assert greens_dc_asymptotic(0.0, 1.0, 2.0) == pytest.approx(-2 * np.exp(-2) / np.pi)


def test_pole_frequencies_are_dispersion_roots():
    for k, m in [(3.0, 1.0), (0.5, 1.0)]:
        for w in pole_frequencies(k, m):
            assert abs(-w * w - 2j * m * w + k * k) < 1e-12
            assert w.imag <= 0   # both poles in the lower half plane: causal


def test_kernel_serialization():
    k = Kernel(KernelVariant.PAPER_LITERAL, KernelNormalization(0.5, -1))
    assert Kernel.from_dict(k.to_dict()) == k
    assert DEFAULT_KERNEL.to_dict() == {"variant": "consistent", "scale": 1.0, "sign": 1}
    with pytest.raises(ValueError):
        KernelNormalization(1.0, 0)
