"""Plane-wave basis of the damped line: dispersion law, velocities, packets.

All functions accept scalars or numpy arrays and work in normalized units
(wave speed 1), so velocities are dimensionless fractions of ``v``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .quadrature import ConvergenceError, composite_nodes


class EvanescentModeError(ValueError):
    """|k| < m: the basis wave does not propagate."""


@dataclass(frozen=True)
class BasisWave:
    k: float
    m: float

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("decay rate must be >= 0")
        if abs(self.k) < self.m:
            raise EvanescentModeError(f"|k|={abs(self.k)} below cutoff m={self.m}")

    @property
    def omega0(self) -> float:
        return float(omega0_of_k(self.k, self.m))

    def __call__(self, x, t):
        """phi(omega0 | x, t) = exp(-m t - i (omega0 t - k x))."""
        return np.exp(-self.m * t - 1j * (self.omega0 * t - self.k * x))


@dataclass(frozen=True)
class PacketSpectrum:
    omega_low: float
    omega_high: float
    amplitude: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if not 0 < self.omega_low < self.omega_high:
            raise ValueError("need 0 < omega_low < omega_high")


class EffectiveSpeed(NamedTuple):
    value: float
    valid: bool


def omega0_of_k(k, m):
    k = np.abs(np.asarray(k, dtype=float))
    if np.any(k < m):
        raise EvanescentModeError("|k| < m: evanescent mode")
    return np.sqrt((k - m) * (k + m))


def k_of_omega0(omega0, m):
    return np.hypot(omega0, m)


def _positive(omega0):
    omega0 = np.asarray(omega0, dtype=float)
    if np.any(omega0 <= 0):
        raise ValueError("frequency must be > 0")
    return omega0


def phase_velocity(omega0, m):
    omega0 = _positive(omega0)
    return omega0 / np.hypot(omega0, m)


def group_velocity(omega0, m):
    """d omega0 / d k = k / omega0; diverges at the cutoff omega0 = 0."""
    omega0 = np.asarray(omega0, dtype=float)
    if np.any(omega0 <= 0):
        raise ZeroDivisionError("group velocity diverges at omega0 = 0")
    return np.hypot(omega0, m) / omega0


def effective_speed(omega0: float, m: float) -> EffectiveSpeed:
    """Group velocity corrected for forward-edge decay, (k - pi m) / omega0.

    Not clamped. ``valid`` is False when the estimate is nonpositive or the
    signal sits below 2m, where the correction is not meaningful.
    """
    omega0 = float(_positive(omega0))
    value = (math.hypot(omega0, m) - math.pi * m) / omega0
    return EffectiveSpeed(value, value > 0 and omega0 >= 2 * m)


def min_delay_uncertainty(omega0: float) -> float:
    """Lower bound 1/omega0 on a resolvable delay at signal frequency omega0."""
    return 1.0 / float(_positive(omega0))


def _packet_sum(spec, m, x, t, points):
    panels = max(1, points // 8)
    w, wt = composite_nodes(spec.omega_low, spec.omega_high, panels)
    k = np.hypot(w, m)
    amp = np.asarray(spec.amplitude(w), dtype=complex)
    phase = np.exp(-1j * (w * t - k * x))
    value = np.exp(-m * t) * np.sum(wt * amp * phase)
    scale = np.exp(-m * t) * np.sum(wt * np.abs(amp))
    return complex(value), float(scale)


def build_packet(spec: PacketSpectrum, m: float, x: float, t: float,
                 quad_points: int = 64, rtol: float = 1e-8) -> complex:
    """Superpose basis waves over the band of ``spec`` at (x, t).

    The estimate compares ``quad_points`` against twice as many nodes;
    ConvergenceError is raised if it exceeds ``rtol`` of the integral of
    |amplitude|.
    """
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    coarse, _ = _packet_sum(spec, m, x, t, quad_points)
    fine, scale = _packet_sum(spec, m, x, t, 2 * quad_points)
    err = abs(fine - coarse)
    if err > rtol * max(scale, np.finfo(float).tiny):
        raise ConvergenceError("packet quadrature too coarse for this band", err / scale)
    return fine
