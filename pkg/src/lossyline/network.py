"""Coupled N-conductor lines sharing one series resistance density.

In normalized coordinates the line voltages obey

    U_tt - U_xx + 2 M U_t = 0,    M = (r/2) L^{-1} = (r v^2 / 2) C,

with C the capacitance matrix and L the inductance matrix (C L = I / v^2).
M is symmetric, so its eigenvectors decouple the system into scalar lines
with decay rates m_i.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kernels import DEFAULT_KERNEL, Kernel
from .response import response_at
from .waveform import Waveform

COMPAT_RTOL = 1e-8
DUAL_FORM_RTOL = 1e-6


class IncompatibleNetworkError(ValueError):
    pass


def _check_spd(a, name):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square")
    if not np.allclose(a, a.T, rtol=1e-12, atol=0.0):
        raise ValueError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise ValueError(f"{name} must be positive definite") from None


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    cap: np.ndarray   # F/cm
    ind: np.ndarray   # H/cm
    r: float          # ohm/cm

    def __post_init__(self):
        cap = np.array(self.cap, dtype=float)
        ind = np.array(self.ind, dtype=float)
        object.__setattr__(self, "cap", cap)
        object.__setattr__(self, "ind", ind)
        _check_spd(cap, "capacitance matrix")
        _check_spd(ind, "inductance matrix")
        if cap.shape != ind.shape:
            raise ValueError("capacitance and inductance matrices differ in size")
        if self.r < 0:
            raise ValueError("resistance per length must be >= 0")
        prod = cap @ ind
        inv_v2 = np.trace(prod) / len(prod)
        dev = np.abs(prod - inv_v2 * np.eye(len(prod))) / inv_v2
        i, j = np.unravel_index(np.argmax(dev), dev.shape)
        if dev[i, j] > COMPAT_RTOL:
            raise IncompatibleNetworkError(
                f"C L is not proportional to the identity: entry ({i}, {j}) deviates by "
                f"{dev[i, j]:.3e} relative (limit {COMPAT_RTOL:g})")

    @classmethod
    def from_capacitance(cls, cap, v: float, r: float) -> NetworkSpec:
        """Synthesize L = C^{-1} / v^2 from the capacitance matrix and wave speed."""
        cap = np.asarray(cap, dtype=float)
        ind = np.linalg.inv(cap) / (v * v)
        return cls(cap, 0.5 * (ind + ind.T), r)

    @property
    def n(self) -> int:
        return len(self.cap)

    @property
    def v(self) -> float:
        return float(np.sqrt(len(self.cap) / np.trace(self.cap @ self.ind)))


def build_tridiagonal_cap(c_grd: float, c_m: float, n: int) -> np.ndarray:
    """Nearest-neighbour capacitance matrix for n parallel lines.

    Diagonal 2 c_grd + c_m at the two edge lines and 2 c_grd + 2 c_m inside,
    off-diagonal -c_m.
    """
    if c_grd <= 0 or c_m < 0 or n < 1:
        raise ValueError("need c_grd > 0, c_m >= 0, n >= 1")
    cap = np.zeros((n, n))
    for i in range(n):
        neighbours = (i > 0) + (i < n - 1)
        cap[i, i] = 2 * c_grd + max(neighbours, 1) * c_m
        if i + 1 < n:
            cap[i, i + 1] = cap[i + 1, i] = -c_m
    return cap


def mass_tensor(spec: NetworkSpec) -> np.ndarray:
    """(r/2) L^{-1}, checked against (r v^2 / 2) C."""
    v2 = spec.v ** 2
    from_cap = 0.5 * spec.r * v2 * spec.cap
    from_ind = 0.5 * spec.r * np.linalg.inv(spec.ind)
    from_ind = 0.5 * (from_ind + from_ind.T)
    scale = np.max(np.abs(from_ind))
    if spec.r > 0 and np.max(np.abs(from_cap - from_ind)) > DUAL_FORM_RTOL * scale:
        raise IncompatibleNetworkError("mass tensor forms (r v^2/2) C and (r/2) L^-1 disagree")
    return from_ind


# -- symmetric eigenproblem ---------------------------------------------------

def jacobi_eigh(a, tol: float = 1e-15, max_sweeps: int = 100):
    """Cyclic Jacobi rotations for a symmetric matrix.

    Returns (eigenvalues, eigenvectors) unsorted; columns are eigenvectors.
    """
    a = np.array(a, dtype=float)
    n = len(a)
    v = np.eye(n)
    norm = np.linalg.norm(a)
    if norm == 0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                row_p = c * a[p, :] - s * a[q, :]
                row_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = row_p, row_q
                vp = c * v[:, p] - s * v[:, q]
                vq = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = vp, vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.diag(a).copy(), v


@dataclass(frozen=True, eq=False)
class ModalBasis:
    rates: np.ndarray     # ascending decay rates m_i
    vectors: np.ndarray   # columns are orthonormal eigenvectors

    def to_modal(self, u: VoltageVector) -> VoltageVector:
        if u.basis != "line":
            raise ValueError("expected a line-basis vector")
        return VoltageVector(u.components @ self.vectors, "modal")

    def to_line(self, u: VoltageVector) -> VoltageVector:
        if u.basis != "modal":
            raise ValueError("expected a modal-basis vector")
        return VoltageVector(u.components @ self.vectors.T, "line")


def modal_decompose(mass, degenerate_rtol: float = 1e-10) -> ModalBasis:
    """Eigen-decomposition of the mass tensor with a deterministic convention.

    Eigenvalues ascending; each eigenvector's largest-magnitude component is
    positive; eigenvectors of (numerically) equal eigenvalues are ordered
    lexicographically.
    """
    mass = np.asarray(mass, dtype=float)
    if mass.ndim != 2 or mass.shape[0] != mass.shape[1]:
        raise ValueError("mass tensor must be square")
    if not np.allclose(mass, mass.T, rtol=1e-12, atol=1e-14 * np.max(np.abs(mass), initial=0.0)):
        raise ValueError("mass tensor must be symmetric")
    w, vec = jacobi_eigh(mass)
    for k in range(vec.shape[1]):
        col = vec[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            vec[:, k] = -col
    tol = degenerate_rtol * max(np.max(np.abs(w)), 1e-300)
    keys = [tuple(vec[:, k]) for k in range(len(w))]
    order = sorted(range(len(w)), key=lambda k: (w[k], keys[k]))
    # re-sort within clusters of equal eigenvalues by the vector alone
    ordered, i = [], 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and w[order[j + 1]] - w[order[i]] <= tol:
            j += 1
        ordered.extend(sorted(order[i:j + 1], key=lambda k: keys[k]))
        i = j + 1
    return ModalBasis(w[ordered], vec[:, ordered])


@dataclass(frozen=True, eq=False)
class VoltageVector:
    components: np.ndarray   # (..., N)
    basis: str               # "line" or "modal"

    def __post_init__(self):
        if self.basis not in ("line", "modal"):
            raise ValueError("basis must be 'line' or 'modal'")
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float))

    def __add__(self, other: VoltageVector) -> VoltageVector:
        if other.basis != self.basis:
            raise ValueError("cannot add vectors expressed in different bases")
        return VoltageVector(self.components + other.components, self.basis)


def network_response(spec: NetworkSpec, x: float, times, u_in: Sequence[Waveform | None],
                     kernel: Kernel = DEFAULT_KERNEL, basis: ModalBasis | None = None) -> VoltageVector:
    """Line-basis voltages (nt, N) at normalized position x.

    The source vector is projected onto the modal basis, each mode travels
    as a scalar line with its own decay rate, and the result is projected
    back. Sources are given per line; None means a grounded (zero) input.
    """
    if len(u_in) != spec.n:
        raise ValueError("need one waveform slot per line")
    basis = modal_decompose(mass_tensor(spec)) if basis is None else basis
    t = np.atleast_1d(np.asarray(times, dtype=float))
    modal = np.zeros((t.size, spec.n))
    for i, rate in enumerate(basis.rates):
        for j, w in enumerate(u_in):
            weight = basis.vectors[j, i]
            if w is None or weight == 0:
                continue
            modal[:, i] += weight * response_at(x, t, w, float(rate), kernel)
    return basis.to_line(VoltageVector(modal, "modal"))
