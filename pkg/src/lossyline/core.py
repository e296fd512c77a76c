"""Line parameter types and derived quantities.

Physical quantities use ohm, henry, farad, cm and s. Everything downstream
of this module works in normalized coordinates where the wave speed is 1
and positions are measured in time units (x = l / v).
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class InvalidLineError(ValueError):
    """Raised for parameter sets that do not describe a passive RLC line."""


@dataclass(frozen=True)
class LineParams:
    r: float    # ohm/cm
    ell: float  # H/cm
    c: float    # F/cm

    def __post_init__(self):
        for name in ("r", "ell", "c"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidLineError(f"{name} must be finite")
        if self.ell <= 0:
            raise InvalidLineError(f"inductance per length must be > 0, got {self.ell}")
        if self.c <= 0:
            raise InvalidLineError(f"capacitance per length must be > 0, got {self.c}")
        if self.r < 0:
            raise InvalidLineError(f"resistance per length must be >= 0, got {self.r}")

    @classmethod
    def from_impedance(cls, r: float, c: float, z0: float) -> LineParams:
        """Build from r, c and the characteristic impedance (ell = z0**2 * c)."""
        if z0 <= 0:
            raise InvalidLineError(f"characteristic impedance must be > 0, got {z0}")
        return cls(r=r, ell=z0 * z0 * c, c=c)


@dataclass(frozen=True)
class DerivedParams:
    v: float   # cm/s
    m: float   # 1/s
    z0: float  # ohm

    @property
    def decay_length(self) -> float:
        """v/m in cm; infinite for a lossless line."""
        return self.v / self.m if self.m > 0 else math.inf


@dataclass(frozen=True)
class NormalizedPoint:
    x: float
    t: float

    def __post_init__(self):
        if self.x < 0:
            raise ValueError("normalized position must be >= 0")

    @property
    def light_cone(self) -> LightConeVariable:
        return LightConeVariable(self.t * self.t - self.x * self.x)


@dataclass(frozen=True)
class LightConeVariable:
    lam: float

    @property
    def inside(self) -> bool:
        return self.lam > 0


def derive_params(p: LineParams) -> DerivedParams:
    return DerivedParams(
        v=1.0 / math.sqrt(p.c * p.ell),
        m=p.r / (2.0 * p.ell),
        z0=math.sqrt(p.ell / p.c),
    )


def normalize_position(l: float, v: float) -> float:
    if l < 0 or v <= 0:
        raise ValueError("need l >= 0 and v > 0")
    return l / v


def denormalize_position(x: float, v: float) -> float:
    if x < 0 or v <= 0:
        raise ValueError("need x >= 0 and v > 0")
    return x * v
