"""Transient response of a semi-infinite line driven at x = 0, and delays.

The response is the boundary-kernel convolution

    U(x, t) = factor * [ e^{-mx} u0(t - x) + int_x^t K(x, s) u0(t - s) ds ]

with the tail integral evaluated in the light-cone variable lam = s^2 - x^2.
Times and positions are normalized (wave speed 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import min_delay_uncertainty
from .kernels import DEFAULT_KERNEL, Kernel, KernelVariant, tail_from_root
from .quadrature import ConvergenceError, composite_nodes
from .waveform import Waveform

MAX_PANELS = 1024
_ORDER = 8
_ULPS = 64


class NoCrossingError(RuntimeError):
    """The response never reaches the requested level inside the window."""

    def __init__(self, message: str, max_fraction: float):
        super().__init__(f"{message} (maximum fraction reached {max_fraction:.6g})")
        self.max_fraction = max_fraction


class NoRootError(RuntimeError):
    def __init__(self, message: str, max_value: float):
        super().__init__(f"{message} (maximum of left-hand side {max_value:.6g})")
        self.max_value = max_value


@dataclass(frozen=True)
class ResponseRequest:
    x: float
    times: tuple
    m: float
    kernel: Kernel = DEFAULT_KERNEL
    rtol: float = 1e-8

    def __post_init__(self):
        if not self.x > 0:
            raise ValueError("observation point must satisfy x > 0")
        if self.m < 0:
            raise ValueError("decay rate must be >= 0")
        if np.any(np.diff(np.asarray(self.times, dtype=float)) < 0):
            raise ValueError("times must be sorted ascending")


@dataclass(frozen=True)
class DelayResult:
    delay: float
    b: float
    uncertainty_floor: float
    bracket: tuple[float, float]
    u_max: float


def _segment_integrals(x, t, lo, hi, m, variant, u0, panels, sqrt_map):
    """Tail integral over s in [lo, hi] per row, in the lam variable.

    With ``sqrt_map`` the map lam = lam_a + (lam_b - lam_a) u^2 clusters nodes
    at the cone, where the literal kernel behaves like sqrt(lam).
    """
    lam_a = (lo - x) * (lo + x)
    lam_b = (hi - x) * (hi + x)
    u, w = composite_nodes(np.zeros_like(t), np.ones_like(t), panels, _ORDER)
    span = (lam_b - lam_a)[:, None]
    g = np.where(sqrt_map[:, None], u * u, u)
    dg = np.where(sqrt_map[:, None], 2.0 * u, 1.0)
    lam = lam_a[:, None] + span * g
    root = np.sqrt(np.maximum(lam, 0.0))
    s = np.sqrt(lam + x * x)
    f = tail_from_root(x, s, root, m, variant) / (2.0 * s) * u0(t[:, None] - s)
    jac = span * dg * w
    return np.sum(f * jac, axis=1), np.sum(np.abs(f) * jac, axis=1)


def _tail(x, t, m, variant, u0, rtol):
    t = np.asarray(t, dtype=float)
    lo_u, hi_u = u0.support
    s_lo = np.maximum(x, t - hi_u)
    s_hi = np.minimum(t, t - lo_u)
    # panel edges at the source's kinks, mapped to delays s = t - bp
    bps = u0.breakpoints()
    edges = [s_lo]
    for bp in bps[::-1]:
        edges.append(np.clip(t - bp, s_lo, np.maximum(s_lo, s_hi)))
    edges.append(np.maximum(s_lo, s_hi))
    edges = np.sort(np.stack(edges, axis=1), axis=1)

    total = np.zeros_like(t)
    for j in range(edges.shape[1] - 1):
        a, b = edges[:, j], edges[:, j + 1]
        rows = np.nonzero(b > a)[0]
        if rows.size == 0 or m == 0:
            continue
        panels = 1
        sqrt_map = a[rows] <= x
        est, _ = _segment_integrals(x, t[rows], a[rows], b[rows], m, variant, u0, panels, sqrt_map)
        # segments only a few ulps wide cannot be refined: t - s is pure rounding there
        tiny = b[rows] - a[rows] <= _ULPS * np.finfo(float).eps * t[rows]
        total[rows[tiny]] += est[tiny]
        rows, est, sqrt_map = rows[~tiny], est[~tiny], sqrt_map[~tiny]
        while rows.size:
            panels *= 2
            fine, mass = _segment_integrals(x, t[rows], a[rows], b[rows], m, variant, u0,
                                            panels, sqrt_map)
            err = np.abs(fine - est)
            ok = err <= rtol * mass + 1e-300
            total[rows[ok]] += fine[ok]
            if panels >= MAX_PANELS and not np.all(ok):
                worst = float(np.max(err[~ok] / np.maximum(mass[~ok], 1e-300)))
                raise ConvergenceError("response tail quadrature did not converge", worst)
            rows, est, sqrt_map = rows[~ok], fine[~ok], sqrt_map[~ok]
    return total


def response_at(x: float, times, u0: Waveform, m: float, kernel: Kernel = DEFAULT_KERNEL,
                rtol: float = 1e-8) -> np.ndarray:
    """Voltage at normalized position x > 0 for each time in ``times``.

    Exactly zero for t < x. For m = 0 the tail vanishes and the result is
    the delayed source.
    """
    req = ResponseRequest(x, tuple(np.atleast_1d(times)), m, kernel, rtol)
    t = np.atleast_1d(np.asarray(times, dtype=float))
    impulse = math.exp(-m * x) * u0(t - x)
    out = impulse + _tail(req.x, t, m, kernel.variant, u0, rtol)
    out = kernel.norm.factor * np.where(t >= x, out, 0.0)
    return out


def respond(req: ResponseRequest, u0: Waveform) -> np.ndarray:
    return response_at(req.x, req.times, u0, req.m, req.kernel, req.rtol)


# -- delays ------------------------------------------------------------------

def default_window(x: float, u0: Waveform, m: float) -> float:
    """End of the default evaluation window: arrival + source settling + diffusion time."""
    return x + u0.settle_time() + 4.0 * max(x, m * x * x)


def delay_grid(x: float, t_end: float, per_decade: int = 64) -> np.ndarray:
    """t = x plus geometrically spaced offsets up to t_end."""
    span = t_end - x
    if span <= 0:
        raise ValueError("window must extend past the arrival time x")
    first = max(1e-6 * x, 1e-15, span * 1e-8)
    decades = math.log10(span / first)
    n = max(2, int(math.ceil(decades * per_decade)) + 1)
    return np.concatenate([[x], x + np.geomspace(first, span, n)])


def first_crossing(f, grid, values, level, tol):
    """Smallest t on ``grid`` with f(t) >= level, refined by bisection.

    Returns (delay, bracket). ``values`` are f on the grid.
    """
    hit = np.nonzero(values >= level)[0]
    if hit.size == 0:
        return None
    i = int(hit[0])
    if i == 0:
        return float(grid[0]), (float(grid[0]), float(grid[0]))
    lo, hi = float(grid[i - 1]), float(grid[i])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) >= level:
            hi = mid
        else:
            lo = mid
    return hi, (lo, hi)


def delay_from_signal(f, x: float, b: float, t_end: float, u_peak: float | None,
                      omega0: float) -> DelayResult:
    """Shared driver for threshold delays of any response function f(times)."""
    if not 0 < b < 1:
        raise ValueError("threshold fraction b must lie in (0, 1)")
    grid = delay_grid(x, t_end)
    values = f(grid)
    u_max = float(np.max(values)) if u_peak is None else float(u_peak)
    if not u_max > 0:
        raise NoCrossingError("response never becomes positive", 0.0)
    level = b * u_max
    tol = max(1e-6 * x, 1e-15)
    found = first_crossing(lambda s: float(f(np.array([s]))[0]), grid, values, level, tol)
    if found is None:
        raise NoCrossingError(f"response never reaches {b:g} of U_max", float(np.max(values)) / u_max)
    delay, bracket = found
    floor = min_delay_uncertainty(omega0) if omega0 > 0 else math.inf
    return DelayResult(delay, b, floor, bracket, u_max)


def delay_time(x: float, b: float, u0: Waveform, m: float, kernel: Kernel = DEFAULT_KERNEL,
               t_end: float | None = None, u_max: str = "response",
               omega0: float | None = None) -> DelayResult:
    """First time the response at x reaches b * U_max.

    ``u_max="response"`` takes U_max as the largest response value in the
    window; ``"input"`` uses the source peak instead. The uncertainty floor is
    1/omega0 with omega0 the source's dominant angular frequency (infinite
    for a pure DC step).
    """
    if u_max not in ("response", "input"):
        raise ValueError("u_max must be 'response' or 'input'")
    t_end = default_window(x, u0, m) if t_end is None else t_end
    w = u0.dominant_omega() if omega0 is None else omega0
    peak = u0.peak() if u_max == "input" else None
    return delay_from_signal(lambda t: response_at(x, t, u0, m, kernel), x, b, t_end, peak, w)


def dc_delay_lhs(t, x: float, m: float):
    """Left-hand side of the literal DC/LTM delay relation."""
    t = np.asarray(t, dtype=float)
    bracket = math.sin(m * x) / (x * x) - m * math.cos(m * x) / x
    return (t * np.exp(-m * t) / math.pi) * bracket * ((t + 1.0 / m) * np.exp(-m * t) - 1.0 / m)


def dc_delay_literal(x: float, b: float, m: float, t_max: float | None = None,
                     points: int = 20000) -> float:
    """Smallest t > 0 solving dc_delay_lhs(t) = b, by dense scan then bisection.

    This relation mixes powers of x and t and is kept in its literal form; prefer
    ``delay_time`` for actual delays.
    """
    if not (m > 0 and x > 0 and 0 < b < 1):
        raise ValueError("need m > 0, x > 0 and 0 < b < 1")
    t_max = 60.0 / m if t_max is None else t_max
    grid = np.linspace(0.0, t_max, points)
    vals = dc_delay_lhs(grid, x, m) - b
    hit = np.nonzero(vals >= 0)[0]
    if hit.size == 0:
        raise NoRootError("no root of the DC delay relation", float(np.max(vals + b)))
    i = int(hit[0])
    lo, hi = grid[i - 1], grid[i]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if dc_delay_lhs(mid, x, m) - b >= 0:
            hi = mid
        else:
            lo = mid
    return float(hi)
