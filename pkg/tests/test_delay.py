import math

import numpy as np
import pytest

from lossyline.response import (NoCrossingError, NoRootError, dc_delay_lhs, dc_delay_literal,
                                delay_time, response_at)
from lossyline.waveform import Waveform


def test_lossless_step_arrives_at_x():
    res = delay_time(2.0, 0.5, Waveform.step(), 0.0)
    assert res.delay == pytest.approx(2.0, abs=2e-6)


def test_lossy_delay_exceeds_flight_time_and_is_monotone_in_b():
    # e^{-mx} = e^{-2} sits below both thresholds, so the crossing lies on the tail
    lo = delay_time(1.0, 0.5, Waveform.step(), 2.0)
    hi = delay_time(1.0, 0.9, Waveform.step(), 2.0)
    assert 1.0 < lo.delay <= hi.delay
    assert lo.bracket[0] <= lo.delay <= lo.bracket[1]


def test_delay_lands_on_the_level():
    res = delay_time(1.0, 0.6, Waveform.ramp(rise=0.5), 1.5)
    level = response_at(1.0, [res.delay], Waveform.ramp(rise=0.5), 1.5)[0]
    assert level == pytest.approx(0.6 * res.u_max, rel=1e-4)


def test_uncertainty_floor_follows_source_frequency():
    burst = Waveform.sine_burst(frequency=2.0, duration=3.0)
    res = delay_time(1.0, 0.5, burst, 0.5)
    assert res.uncertainty_floor == pytest.approx(1 / (4 * math.pi))
    assert math.isinf(delay_time(1.0, 0.5, Waveform.step(), 0.5).uncertainty_floor)
    assert delay_time(1.0, 0.5, Waveform.step(), 0.5, omega0=10.0).uncertainty_floor == 0.1


def test_input_peak_normalization():
    # relative to the source peak, a strongly damped line may never reach b
    with pytest.raises(NoCrossingError) as info:
        delay_time(1.0, 0.9, Waveform.gaussian(0.1, 0.5), 3.0, u_max="input")
    assert info.value.max_fraction < 0.9
    ok = delay_time(1.0, 0.9, Waveform.gaussian(0.1, 0.5), 3.0)
    assert ok.u_max < 1


def test_bad_threshold():
    with pytest.raises(ValueError):
        delay_time(1.0, 1.0, Waveform.step(), 1.0)
    with pytest.raises(ValueError):
        delay_time(1.0, 0.5, Waveform.step(), 1.0, u_max="peak")


def test_literal_dc_relation_root():
    x, m = 5.0, 1.0
    grid = np.linspace(0, 60, 20001)
    b = 0.5 * np.max(dc_delay_lhs(grid, x, m))
    t = dc_delay_literal(x, b, m)
    assert abs(dc_delay_lhs(t, x, m) - b) <= 1e-10
    assert np.all(dc_delay_lhs(np.linspace(1e-9, t * (1 - 1e-6), 1000), x, m) < b)


def test_literal_dc_relation_without_root():
    # for m x below ~4.49 the left-hand side is never positive
    with pytest.raises(NoRootError) as info:
        dc_delay_literal(1.0, 0.5, 1.0)
    assert info.value.max_value <= 0
    with pytest.raises(ValueError):
        dc_delay_literal(1.0, 0.5, 0.0)


def test_literal_relation_vanishes_at_both_ends():
    for x, m in [(1.0, 1.0), (5.0, 0.5), (0.1, 3.0)]:
        assert dc_delay_lhs(0.0, x, m) == 0.0
        assert abs(dc_delay_lhs(200.0 / m, x, m)) < 1e-60


def test_reference_line_step_delay_against_fdtd_crossing():
    from lossyline.fdtd import FdtdGrid, fdtd_solve
    v, m = 11440076877.316616, 811322525.2581013
    x = 3.6 / v
    t_end = 4 * x
    res = delay_time(x, 0.5, Waveform.step(), m, t_end=t_end)
    # the leapfrog front overshoots, so the level comes from the analytic U_max
    level = 0.5 * res.u_max
    lags = []
    for cells in (1000, 2000):
        grid = FdtdGrid.for_window(x / cells, t_end, x)
        fd = fdtd_solve(grid, m, Waveform.step(), [x], t_end)
        crossing = fd.times[np.argmax(fd.values[:, 0] >= level)]
        assert abs(crossing - res.delay) <= 2 * grid.dt
        lags.append(abs(crossing - res.delay))
    assert lags[1] < lags[0]
