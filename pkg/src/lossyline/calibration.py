"""Pick the boundary-kernel variant and normalization by comparison with FDTD.

Every (variant, scale, sign) candidate is convolved with a smooth Gaussian
pulse and compared against the finite-difference oracle in relative L2.
The response is linear in the normalization, so each variant is evaluated
once and rescaled.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .fdtd import FdtdGrid, fdtd_solve
from .kernels import Kernel, KernelNormalization, KernelVariant
from .response import default_window, response_at
from .waveform import Waveform

SCALES = (0.5, 1.0)
SIGNS = (1, -1)
HARD_FAIL_L2 = 0.1
POINTS_PER_WIDTH = 40


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CalibrationCase:
    m: float
    x: float
    width: float        # Gaussian half-width, same units as x

    @classmethod
    def regime(cls, mx: float, x: float = 1.0) -> CalibrationCase:
        return cls(m=mx / x, x=x, width=0.1 * x)


STANDARD_CASES = tuple(CalibrationCase.regime(mx) for mx in (0.1, 1.0, 5.0))


def candidates():
    for variant, scale, sign in itertools.product(KernelVariant, SCALES, SIGNS):
        yield Kernel(variant, KernelNormalization(scale, sign))


def _key(k: Kernel) -> str:
    return f"{k.variant.value}:scale={k.norm.scale!r}:sign={k.norm.sign:+d}"


def oracle_errors(case: CalibrationCase, stride: int = 4) -> dict[str, float]:
    """Relative L2 error of every candidate kernel for one case."""
    pulse = Waveform.gaussian(width=case.width, center=5.0 * case.width)
    t_end = default_window(case.x, pulse, case.m)
    grid = FdtdGrid.for_window(case.width / POINTS_PER_WIDTH, t_end, case.x)
    ref = fdtd_solve(grid, case.m, pulse, [case.x], t_end)
    times = ref.times[::stride]
    oracle = ref.values[::stride, 0]
    norm = np.linalg.norm(oracle)
    base = {v: response_at(case.x, times, pulse, case.m, Kernel(v)) for v in KernelVariant}
    return {_key(k): float(np.linalg.norm(k.norm.factor * base[k.variant] - oracle) / norm)
            for k in candidates()}


@dataclass(frozen=True)
class CalibrationReport:
    kernel: Kernel
    oracle_l2: float
    cases: tuple
    errors: tuple       # per case: dict candidate -> L2
    unique: bool

    def to_dict(self) -> dict:
        return {
            "winner": self.kernel.to_dict(),
            "oracle_l2": self.oracle_l2,
            "unique": self.unique,
            "cases": [
                {"m": c.m, "x": c.x, "mx": c.m * c.x, "width": c.width,
                 "winner": min(e, key=e.get), "errors": dict(sorted(e.items()))}
                for c, e in zip(self.cases, self.errors)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def calibrate(cases=STANDARD_CASES) -> CalibrationReport:
    """Select the candidate with the smallest worst-case oracle error.

    ``unique`` is False when the runner-up is within a factor 2 of the
    winner (e.g. m = 0, where both variants coincide).
    """
    cases = tuple(cases)
    errors = tuple(oracle_errors(c) for c in cases)
    worst = {key: max(e[key] for e in errors) for key in errors[0]}
    ranked = sorted(worst, key=lambda key: (worst[key], key))
    best = ranked[0]
    if worst[best] > HARD_FAIL_L2:
        raise CalibrationError(
            f"no kernel candidate within {HARD_FAIL_L2} relative L2 of the oracle "
            f"(best {best} at {worst[best]:.3g}); implementation bug")
    kernel = next(k for k in candidates() if _key(k) == best)
    unique = worst[ranked[1]] > 2.0 * worst[best]
    return CalibrationReport(kernel, worst[best], cases, errors, unique)


def load_report(path) -> Kernel:
    with open(path) as fh:
        return Kernel.from_dict(json.load(fh)["winner"])
