"""Finite-difference time-domain oracle for the normalized telegraph equation.

    U_tt - U_xx + 2 m U_t = 0,   0 < x < L,   U(0, t) = u0(t)

Second-order leapfrog with the damping term centered in time:

    (1 + m dt) U^{n+1} = 2 U^n - (1 - m dt) U^{n-1} + C^2 (U^n_{j+1} - 2 U^n_j + U^n_{j-1})

with C = dt/dx. The matrix version replaces m with the mass tensor and the
scalar division with a solve against (I + m dt). It shares no code with the
analytic kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .waveform import Waveform

BOUNDARIES = ("absorbing", "open", "short")
_BOUNDARY_CODE = {"absorbing": 0, "open": 1, "short": 2}
CFL_LIMIT = 0.9


class CFLError(ValueError):
    pass


class InstabilityError(RuntimeError):
    pass


@dataclass(frozen=True)
class FdtdGrid:
    dx: float
    dt: float
    length: float
    boundary: str = "absorbing"

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0 or self.length <= 0:
            raise ValueError("dx, dt and length must be positive")
        if self.dt > CFL_LIMIT * self.dx * (1 + 1e-12):
            raise CFLError(f"dt={self.dt:g} violates dt <= {CFL_LIMIT} dx (dx={self.dx:g})")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")

    @property
    def cells(self) -> int:
        return int(round(self.length / self.dx))

    @classmethod
    def for_window(cls, dx: float, t_end: float, x_max: float, boundary: str = "absorbing",
                   courant: float = CFL_LIMIT) -> FdtdGrid:
        """Grid whose far boundary cannot influence probes up to x_max before t_end.

        For the absorbing case the domain is made long enough that nothing
        reflected from it reaches x_max inside the window.
        """
        length = max(x_max, 0.5 * (t_end + x_max)) + 4 * dx
        length = dx * math.ceil(length / dx)
        return cls(dx, courant * dx, length, boundary)


@dataclass(frozen=True)
class FdtdResult:
    times: np.ndarray
    values: np.ndarray        # (nt, nprobes) or (nt, nprobes, N)
    energy: np.ndarray | None = None


def _probe_weights(grid: FdtdGrid, probes):
    probes = np.asarray(probes, dtype=float)
    n = grid.cells
    if np.any(probes < 0) or np.any(probes > n * grid.dx * (1 + 1e-12)):
        raise ValueError("probe outside the grid")
    pos = probes / grid.dx
    left = np.minimum(np.floor(pos + 1e-9).astype(int), n - 1)
    frac = np.clip(pos - left, 0.0, 1.0)
    return left, frac


def _laplacian(u, boundary):
    lap = np.zeros_like(u)
    lap[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
    if boundary == "open":
        # ghost node mirrors the last interior node: dU/dx = 0
        lap[-1] = 2.0 * (u[-2] - u[-1])
    return lap


def _source(u_in, t):
    return np.array([0.0 if w is None else float(w(t)) for w in u_in])


def _run(grid, n_steps, u_in, damping, probes, record_energy, blowup):
    """Shared time loop. ``damping`` is a scalar m or an (N, N) mass tensor."""
    n = grid.cells
    dim = len(u_in)
    c2 = (grid.dt / grid.dx) ** 2
    if np.ndim(damping) == 0:
        up = np.eye(dim) / (1.0 + damping * grid.dt)
        down = np.eye(dim) * (1.0 - damping * grid.dt)
    else:
        eye = np.eye(dim)
        up = np.linalg.inv(eye + damping * grid.dt)
        down = eye - damping * grid.dt
    up_t, down_t = up.T, down.T
    mur = (grid.dt / grid.dx - 1.0) / (grid.dt / grid.dx + 1.0)

    prev = np.zeros((n + 1, dim))
    cur = np.zeros((n + 1, dim))
    cur[0] = _source(u_in, 0.0)
    left, frac = _probe_weights(grid, probes)

    out = np.empty((n_steps + 1, len(left), dim))
    energy = np.empty(n_steps) if record_energy else None
    out[0] = (1 - frac)[:, None] * cur[left] + frac[:, None] * cur[left + 1]
    for step in range(1, n_steps + 1):
        t = step * grid.dt
        nxt = (2.0 * cur - prev @ down_t + c2 * _laplacian(cur, grid.boundary)) @ up_t
        nxt[0] = _source(u_in, t)
        if grid.boundary == "short":
            nxt[-1] = 0.0
        elif grid.boundary == "absorbing":
            nxt[-1] = cur[-2] + mur * (nxt[-2] - cur[-1])
        if record_energy:
            dudt = (nxt - cur) / grid.dt
            cross = np.diff(nxt, axis=0) * np.diff(cur, axis=0) / grid.dx ** 2
            energy[step - 1] = grid.dx * (np.sum(dudt ** 2) + np.sum(cross))
        prev, cur = cur, nxt
        out[step] = (1 - frac)[:, None] * cur[left] + frac[:, None] * cur[left + 1]
        if step % 256 == 0 and not np.all(np.abs(cur) < blowup):
            raise InstabilityError(f"field exceeded {blowup:g} at t={t:g}; scheme unstable")
    times = grid.dt * np.arange(n_steps + 1)
    return times, out, energy


def _check_steps(grid, t_end):
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    return int(math.ceil(t_end / grid.dt - 1e-9))


def _peak(u_in, t_end):
    ts = np.linspace(0.0, t_end, 512)
    vals = [np.max(np.abs(w(ts))) for w in u_in if w is not None]
    return max(vals + [1.0])


@numba.njit(cache=True)
def _scalar_loop(n, n_steps, c2, m_dt, mur, code, src, left, frac, record_energy, dt, dx, blowup):
    bufs = np.zeros((3, n + 1))
    bufs[1, 0] = src[0]
    n_probes = left.size
    out = np.empty((n_steps + 1, n_probes))
    energy = np.zeros(n_steps)
    for p in range(n_probes):
        out[0, p] = (1 - frac[p]) * bufs[1, left[p]] + frac[p] * bufs[1, left[p] + 1]
    inv = 1.0 / (1.0 + m_dt)
    keep = 1.0 - m_dt
    ip, ic, inx = 0, 1, 2
    for step in range(1, n_steps + 1):
        prev = bufs[ip]
        cur = bufs[ic]
        nxt = bufs[inx]
        for j in range(1, n):
            nxt[j] = (2.0 * cur[j] - keep * prev[j] + c2 * (cur[j + 1] - 2.0 * cur[j] + cur[j - 1])) * inv
        nxt[0] = src[step]
        if code == 1:
            nxt[n] = (2.0 * cur[n] - keep * prev[n] + 2.0 * c2 * (cur[n - 1] - cur[n])) * inv
        elif code == 2:
            nxt[n] = 0.0
        else:
            nxt[n] = cur[n - 1] + mur * (nxt[n - 1] - cur[n])
        if record_energy:
            e = 0.0
            for j in range(n + 1):
                e += ((nxt[j] - cur[j]) / dt) ** 2
            for j in range(n):
                e += (nxt[j + 1] - nxt[j]) * (cur[j + 1] - cur[j]) / (dx * dx)
            energy[step - 1] = dx * e
        for p in range(n_probes):
            out[step, p] = (1 - frac[p]) * nxt[left[p]] + frac[p] * nxt[left[p] + 1]
        if step % 256 == 0:
            for j in range(n + 1):
                if not abs(nxt[j]) < blowup:
                    return out, energy, step
        ip, ic, inx = ic, inx, ip
    return out, energy, -1


def fdtd_solve(grid: FdtdGrid, m: float, u0: Waveform, probes, t_end: float,
               record_energy: bool = False) -> FdtdResult:
    """Scalar line: voltage series (nt, nprobes) on the simulation time grid."""
    if m < 0:
        raise ValueError("decay rate must be >= 0")
    n_steps = _check_steps(grid, t_end)
    times = grid.dt * np.arange(n_steps + 1)
    src = np.asarray(u0(times), dtype=float)
    left, frac = _probe_weights(grid, probes)
    ratio = grid.dt / grid.dx
    blowup = 1e6 * max(1.0, float(np.max(np.abs(src))))
    out, energy, failed = _scalar_loop(
        grid.cells, n_steps, ratio ** 2, m * grid.dt, (ratio - 1.0) / (ratio + 1.0),
        _BOUNDARY_CODE[grid.boundary], src, left.astype(np.int64), frac.astype(float),
        record_energy, grid.dt, grid.dx, blowup)
    if failed >= 0:
        raise InstabilityError(f"field exceeded {blowup:g} at t={failed * grid.dt:g}; scheme unstable")
    return FdtdResult(times, out, energy if record_energy else None)


def fdtd_solve_matrix(grid: FdtdGrid, mass: np.ndarray, u_in: Sequence[Waveform | None],
                      probes, t_end: float, record_energy: bool = False) -> FdtdResult:
    """N coupled lines sharing one mass tensor: series (nt, nprobes, N) in line basis."""
    mass = np.asarray(mass, dtype=float)
    if mass.ndim != 2 or mass.shape[0] != mass.shape[1] or mass.shape[0] != len(u_in):
        raise ValueError("mass tensor must be N x N with one waveform slot per line")
    n_steps = _check_steps(grid, t_end)
    times, out, energy = _run(grid, n_steps, list(u_in), mass, probes, record_energy,
                              1e6 * _peak(u_in, t_end))
    return FdtdResult(times, out, energy)


def dump_csv(result: FdtdResult, probes, path) -> None:
    """Write probe series as CSV: header ``time,p0,p1,...`` (scalar results only)."""
    vals = result.values
    if vals.ndim != 2:
        raise ValueError("CSV dump supports scalar-line results")
    with open(path, "w", newline="\n") as fh:
        fh.write("time," + ",".join(f"x={p!r}" for p in probes) + "\n")
        for t, row in zip(result.times, vals):
            fh.write(repr(float(t)) + "," + ",".join(repr(float(v)) for v in row) + "\n")
