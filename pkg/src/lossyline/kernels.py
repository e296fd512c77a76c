"""Closed-form Green functions of the normalized telegraph equation

    U_tt - U_xx + 2 m U_t = 0.

The boundary kernel comes in two variants: the literal closed form
2x e^{-mt} I1(m sqrt(lam)) and the x-derivative of the retarded kernel,
e^{-mt} (m x / sqrt(lam)) I1(m sqrt(lam)). Which one (and which overall
sign/scale) reproduces the PDE is decided by ``lossyline.calibration``
against the finite-difference oracle; it is not assumed here.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .special import i0e, i1e


class KernelVariant(str, enum.Enum):
    PAPER_LITERAL = "paper"
    DERIVATIVE_CONSISTENT = "consistent"


@dataclass(frozen=True)
class KernelNormalization:
    scale: float = 1.0
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def factor(self) -> float:
        return self.sign * self.scale


UNIT_NORMALIZATION = KernelNormalization(1.0, 1)
# overall constant of the literal retarded kernel (negative sign)
PAPER_NORMALIZATION = KernelNormalization(1.0, -1)


class BoundaryKernel(NamedTuple):
    impulse: float       # weight of delta(t - x)
    smooth: np.ndarray   # regular part, zero for t <= x


def _i1_over_z(z):
    # exp(-z) I1(z) / z, with the z -> 0 limit 1/2
    z = np.asarray(z, dtype=float)
    safe = np.where(z > 1e-8, z, 1.0)
    return np.where(z > 1e-8, i1e(safe) / safe, 0.5 * np.exp(-z))


def greens_retarded(x, t, m: float, norm: KernelNormalization = PAPER_NORMALIZATION):
    """factor * Theta(t) Theta(lam) e^{-mt} I0(m sqrt(lam)), lam = t^2 - x^2."""
    x = np.abs(np.asarray(x, dtype=float))
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t >= x)
    tt = np.where(inside, t, 0.0)
    xx = np.where(inside, x, 0.0)
    root = np.sqrt(np.maximum((tt - xx) * (tt + xx), 0.0))
    # e^{-mt} I0(m root) = i0e(m root) e^{-m (t - root)}; never overflows
    val = i0e(m * root) * np.exp(-m * (tt - root))
    out = np.where(inside, norm.factor * val, 0.0)
    return float(out) if out.ndim == 0 else out


def tail_from_root(x: float, s, root, m: float, variant: KernelVariant):
    """Regular part of the boundary kernel at delay s with root = sqrt(s^2 - x^2)."""
    z = m * root
    decay = np.exp(-m * (s - root))
    if variant is KernelVariant.PAPER_LITERAL:
        return 2.0 * x * i1e(z) * decay
    return m * m * x * _i1_over_z(z) * decay


def boundary_tail(x: float, s, m: float, variant: KernelVariant):
    """Regular part of the boundary kernel at delay s (valid for s > x)."""
    s = np.asarray(s, dtype=float)
    root = np.sqrt(np.maximum((s - x) * (s + x), 0.0))
    return tail_from_root(x, s, root, m, variant)


@dataclass(frozen=True)
class Kernel:
    """A boundary-kernel choice: variant plus overall normalization."""
    variant: KernelVariant = KernelVariant.DERIVATIVE_CONSISTENT
    norm: KernelNormalization = UNIT_NORMALIZATION

    def to_dict(self) -> dict:
        return {"variant": self.variant.value, "scale": self.norm.scale, "sign": self.norm.sign}

    @classmethod
    def from_dict(cls, d: dict) -> Kernel:
        return cls(KernelVariant(d["variant"]), KernelNormalization(float(d["scale"]), int(d["sign"])))


# Winner of the oracle calibration (see lossyline.calibration); asserted by the test suite.
DEFAULT_KERNEL = Kernel()


def greens_boundary(x: float, t, m: float, variant: KernelVariant,
                    norm: KernelNormalization = UNIT_NORMALIZATION) -> BoundaryKernel:
    """Boundary (second-kind) kernel split into impulse weight and tail.

    The delta(lam) term reduces to delta(t - x) / (2x); after the 2x prefactor
    it contributes weight e^{-mx} at t = x for both variants.
    """
    if x <= 0:
        raise ValueError("boundary kernel needs x > 0")
    if m < 0:
        raise ValueError("decay rate must be >= 0")
    t = np.asarray(t, dtype=float)
    after = t > x
    tail = np.where(after, boundary_tail(x, np.where(after, t, x), m, variant), 0.0)
    return BoundaryKernel(norm.factor * float(np.exp(-m * x)), norm.factor * tail)


def greens_dc_asymptotic(x, t, m: float):
    """-(t e^{-mt} / pi) sin(m x) / x, the low-frequency limit of the kernel."""
    if m <= 0:
        raise ValueError("decay rate must be > 0")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("time must be > 0")
    x = np.asarray(x, dtype=float)
    sin_over_x = m * np.sinc(m * x / np.pi)
    out = -(t * np.exp(-m * t) / np.pi) * sin_over_x
    return float(out) if out.ndim == 0 else out


def pole_frequencies(k: float, m: float) -> tuple[complex, complex]:
    """omega_{1,2}(k) = -i m +/- sqrt(k^2 - m^2) (imaginary root below cutoff)."""
    if m < 0:
        raise ValueError("decay rate must be >= 0")
    root = np.sqrt(complex(k * k - m * m))
    return complex(-1j * m + root), complex(-1j * m - root)
