"""Finite lines: superposition of multiply reflected images.

For a line of normalized length xbar with far-end coefficient gamma and
source-end coefficient gamma_s, the voltage at 0 <= x <= xbar is

    sum_s (gamma gamma_s)^s U_r(x + 2 s xbar, t)
          + gamma^{s+1} gamma_s^s U_r(2 (s+1) xbar - x, t)

where U_r(y, t) is the semi-infinite-line response after travelling y.
With gamma_s = gamma (the default) the coefficients are gamma^{2s} and
gamma^{2s+1}. An ideal voltage source is gamma_s = -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .kernels import DEFAULT_KERNEL, Kernel
from .response import DelayResult, default_window, delay_from_signal, response_at
from .waveform import Waveform

DEFAULT_CAP = 32
EARLY_STOP = 1e-12


def reflection_coefficient(z_load: float, z0: float) -> float:
    """(Z_L - Z0) / (Z_L + Z0); an infinite load is an open circuit (+1)."""
    if z0 <= 0:
        raise ValueError("characteristic impedance must be > 0")
    if z_load < 0:
        raise ValueError("load impedance must be >= 0")
    if math.isinf(z_load):
        return 1.0
    return (z_load - z0) / (z_load + z0)


@dataclass(frozen=True)
class FiniteLine:
    xbar: float                       # normalized length l/v
    gamma: float = 0.0
    source_gamma: float | None = None  # None: same coefficient as the far end

    def __post_init__(self):
        if not self.xbar > 0:
            raise ValueError("line length must be > 0")
        for g in (self.gamma, self.source_gamma):
            if g is not None and abs(g) > 1:
                raise ValueError("|reflection coefficient| must be <= 1")

    @classmethod
    def from_physical(cls, length_cm: float, v: float, gamma: float | None = None,
                      z_load: float | None = None, z0: float | None = None,
                      source_gamma: float | None = None) -> FiniteLine:
        if gamma is None:
            if z_load is None or z0 is None:
                raise ValueError("give either gamma or (z_load, z0)")
            gamma = reflection_coefficient(z_load, z0)
        return cls(length_cm / v, gamma, source_gamma)

    @property
    def gamma_s(self) -> float:
        return self.gamma if self.source_gamma is None else self.source_gamma


@dataclass(frozen=True)
class ReflectionBudget:
    n_r: int
    decay_length: float   # same length unit as the inputs
    capped: bool = False


def reflection_budget(length: float, v: float, m: float, cap: int = DEFAULT_CAP) -> ReflectionBudget:
    """Decay length v/m and the observable reflection count floor(l_d / l)."""
    if length <= 0 or v <= 0:
        raise ValueError("need length > 0 and v > 0")
    if m < 0:
        raise ValueError("decay rate must be >= 0")
    if m == 0:
        return ReflectionBudget(cap, math.inf, capped=True)
    ld = v / m
    n = max(0, int(math.floor(ld / length)))
    if n > cap:
        return ReflectionBudget(cap, ld, capped=True)
    return ReflectionBudget(n, ld)


class ReflectedResponse(NamedTuple):
    values: np.ndarray
    orders_used: int
    envelope_bound: float   # wavefront envelope of the first neglected order


def _image_pair(line: FiniteLine, x: float, s: int):
    """(coefficient, travel distance) of the two order-s images."""
    g, gs = line.gamma, line.gamma_s
    return (((g * gs) ** s, x + 2 * s * line.xbar),
            (g ** (s + 1) * gs ** s, 2 * (s + 1) * line.xbar - x))


def _envelope(line, x, s, m, peak):
    g, gs = abs(line.gamma), abs(line.gamma_s)
    return peak * ((g * gs) ** s * math.exp(-m * (x + 2 * s * line.xbar))
                   + g ** (s + 1) * gs ** s * math.exp(-m * (2 * (s + 1) * line.xbar - x)))


def reflected_response(line: FiniteLine, x: float, times, u0: Waveform, m: float,
                       n_r: int | None = None, kernel: Kernel = DEFAULT_KERNEL) -> ReflectedResponse:
    """Image-series voltage at 0 <= x <= xbar, truncated after order n_r.

    ``n_r`` defaults to the decay-length budget floor(1 / (m xbar)).
    Images whose travel distance exceeds the last requested time have not
    arrived and are skipped; summation runs in fixed order of s.
    """
    if not 0 <= x <= line.xbar:
        raise ValueError("observation point must lie on the line")
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if n_r is None:
        n_r = reflection_budget(line.xbar, 1.0, m).n_r
    peak = u0.peak()
    total = np.zeros_like(t)
    used = -1
    for s in range(n_r + 1):
        if s > 0 and _envelope(line, x, s, m, peak) < EARLY_STOP * max(np.max(np.abs(total)), 1e-300):
            break
        used = s
        for coef, pos in _image_pair(line, x, s):
            if coef == 0 or pos > t[-1]:
                continue
            if pos == 0:
                total = total + coef * kernel.norm.factor * u0(t)
            else:
                total = total + coef * response_at(pos, t, u0, m, kernel)
    return ReflectedResponse(total, used, _envelope(line, x, used + 1, m, peak))


def reflected_delay(line: FiniteLine, x: float, b: float, u0: Waveform, m: float,
                    n_r: int | None = None, kernel: Kernel = DEFAULT_KERNEL,
                    t_end: float | None = None, u_max: str = "response",
                    omega0: float | None = None) -> DelayResult:
    """Threshold delay of the reflected response; see ``response.delay_time``."""
    if u_max not in ("response", "input"):
        raise ValueError("u_max must be 'response' or 'input'")
    if x <= 0:
        raise ValueError("delay needs an observation point x > 0")
    t_end = default_window(2 * line.xbar - x, u0, m) if t_end is None else t_end
    w = u0.dominant_omega() if omega0 is None else omega0
    peak = u0.peak() if u_max == "input" else None

    def f(ts):
        return reflected_response(line, x, ts, u0, m, n_r, kernel).values

    return delay_from_signal(f, x, b, t_end, peak, w)
