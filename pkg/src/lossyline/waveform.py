"""Source voltages u0(t) applied at x = 0.

Every waveform vanishes for t < 0 and t > duration. Times are in the same
(normalized) units as the propagation code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("step", "ramp", "sine", "gaussian", "sampled")


@dataclass(frozen=True)
class Waveform:
    kind: str
    amplitude: float = 1.0
    frequency: float = 0.0      # cyclic; for a step, the nominal signal frequency
    width: float = 0.0          # ramp rise time or gaussian 1/e half-width
    onset: float = 0.0          # start time (gaussian: center)
    duration: float = math.inf  # t_ac
    samples_t: tuple = field(default=(), repr=False)
    samples_v: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown waveform kind {self.kind!r}; expected one of {KINDS}")
        if not math.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if self.onset < 0 or self.duration <= 0 or self.frequency < 0:
            raise ValueError("need onset >= 0, duration > 0, frequency >= 0")
        if self.kind in ("ramp", "gaussian") and not self.width > 0:
            raise ValueError(f"{self.kind} needs width > 0")
        if self.kind == "sine" and not self.frequency > 0:
            raise ValueError("sine needs frequency > 0")
        if self.kind == "sampled":
            t = np.asarray(self.samples_t, dtype=float)
            v = np.asarray(self.samples_v, dtype=float)
            if t.ndim != 1 or t.size < 2 or t.shape != v.shape:
                raise ValueError("sampled waveform needs matching 1-D time/value arrays (>= 2 points)")
            if np.any(np.diff(t) <= 0) or t[0] < 0:
                raise ValueError("sample times must be nonnegative and strictly increasing")
            if not np.all(np.isfinite(v)):
                raise ValueError("sample values must be finite")

    @classmethod
    def step(cls, amplitude=1.0, onset=0.0, duration=math.inf, frequency=0.0):
        return cls("step", amplitude=amplitude, onset=onset, duration=duration, frequency=frequency)

    @classmethod
    def ramp(cls, rise, amplitude=1.0, onset=0.0, duration=math.inf):
        return cls("ramp", amplitude=amplitude, width=rise, onset=onset, duration=duration)

    @classmethod
    def sine_burst(cls, frequency, duration, amplitude=1.0, onset=0.0):
        return cls("sine", amplitude=amplitude, frequency=frequency, onset=onset, duration=duration)

    @classmethod
    def gaussian(cls, width, center, amplitude=1.0, duration=math.inf):
        return cls("gaussian", amplitude=amplitude, width=width, onset=center, duration=duration)

    @classmethod
    def sampled(cls, times, values, duration=math.inf):
        return cls("sampled", samples_t=tuple(map(float, times)),
                   samples_v=tuple(map(float, values)), duration=duration)

    # -- support -----------------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        """Interval outside of which u0 is exactly zero."""
        if self.kind == "sampled":
            lo, hi = self.samples_t[0], self.samples_t[-1]
        elif self.kind == "gaussian":
            lo, hi = 0.0, math.inf
        else:
            lo, hi = self.onset, math.inf
        return lo, min(hi, self.duration)

    def breakpoints(self) -> np.ndarray:
        """Times where u0 or its derivative may jump (quadrature panel edges)."""
        lo, hi = self.support
        pts = [lo, hi]
        if self.kind == "ramp":
            pts.append(self.onset + self.width)
        elif self.kind == "sampled":
            pts.extend(self.samples_t)
        pts = np.array([p for p in pts if math.isfinite(p) and lo <= p <= hi])
        return np.unique(pts)

    def settle_time(self) -> float:
        """Time after which the source is constant (or off); used for default windows."""
        if self.kind == "ramp":
            end = self.onset + self.width
        elif self.kind == "gaussian":
            end = self.onset + 4.0 * self.width
        else:
            end = self.support[0]
        if math.isfinite(self.duration):
            end = max(end, min(self.duration, self.support[1]))
        return end

    # -- values ------------------------------------------------------------

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        on = (t >= lo) & (t <= hi)
        a = self.amplitude
        if self.kind == "step":
            v = np.full_like(t, a)
        elif self.kind == "ramp":
            v = a * np.clip((t - self.onset) / self.width, 0.0, 1.0)
        elif self.kind == "sine":
            v = a * np.sin(2.0 * np.pi * self.frequency * (t - self.onset))
        elif self.kind == "gaussian":
            v = a * np.exp(-(((t - self.onset) / self.width) ** 2))
        else:
            v = np.interp(t, self.samples_t, self.samples_v)
        out = np.where(on, v, 0.0)
        return float(out) if out.ndim == 0 else out

    def peak(self) -> float:
        """max |u0| over its support."""
        if self.kind == "sampled":
            return float(np.max(np.abs(self.samples_v)))
        if self.kind == "gaussian":
            return abs(self.amplitude) * (1.0 if self.onset <= self.duration else
                                          math.exp(-((self.duration - self.onset) / self.width) ** 2))
        if self.kind == "ramp" and math.isfinite(self.duration):
            return abs(self.amplitude) * min(1.0, max(0.0, self.duration - self.onset) / self.width)
        return abs(self.amplitude)

    def dominant_omega(self) -> float:
        """Angular frequency that characterizes the signal; 0 for a pure DC step."""
        if self.kind in ("sine", "step"):
            return 2.0 * np.pi * self.frequency
        if self.kind in ("ramp", "gaussian"):
            return 1.0 / self.width
        t = np.asarray(self.samples_t)
        grid = np.linspace(t[0], t[-1], max(64, 4 * t.size))
        spec = np.abs(np.fft.rfft(np.interp(grid, t, self.samples_v)))
        freqs = np.fft.rfftfreq(grid.size, grid[1] - grid[0])
        if spec.size < 2 or spec[1:].max() == 0:
            return 0.0
        return float(2.0 * np.pi * freqs[1 + int(np.argmax(spec[1:]))])

    def shifted(self, delta: float) -> Waveform:
        """Same waveform delayed by delta >= 0."""
        if self.kind == "sampled":
            return Waveform.sampled(np.add(self.samples_t, delta), self.samples_v,
                                    duration=self.duration + delta)
        return Waveform(self.kind, self.amplitude, self.frequency, self.width,
                        self.onset + delta, self.duration + delta)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "amplitude": self.amplitude, "frequency": self.frequency,
             "width": self.width, "onset": self.onset,
             "duration": None if math.isinf(self.duration) else self.duration}
        if self.kind == "sampled":
            d["samples_t"] = list(self.samples_t)
            d["samples_v"] = list(self.samples_v)
        return d
