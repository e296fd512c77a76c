"""Composite Gauss-Legendre rules shared by the packet and response integrals."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


class ConvergenceError(RuntimeError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def composite_nodes(a, b, panels: int, order: int = 8):
    """Nodes/weights of ``panels`` equal Gauss panels covering [a, b].

    ``a`` and ``b`` may be arrays of equal shape S; the result has shape
    S + (panels * order,).
    """
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    u, w = gauss_legendre(order)
    edges = np.arange(panels)[:, None]
    local = ((edges + u[None, :]) / panels).ravel()
    weights = np.tile(w, panels) / panels
    span = b - a
    return a + span * local, span * weights
