"""Transient response of lossy RLC transmission lines.

Normalized telegraph equation U_tt - U_xx + 2 m U_t = 0 with x = l / v,
solved through closed-form Green functions, plus a finite-difference
oracle that keeps the closed forms honest.
"""
from .core import DerivedParams, InvalidLineError, LineParams, derive_params
from .kernels import DEFAULT_KERNEL, Kernel, KernelNormalization, KernelVariant
from .network import NetworkSpec, build_tridiagonal_cap, mass_tensor, modal_decompose, network_response
from .reflections import FiniteLine, reflected_delay, reflected_response, reflection_budget
from .response import DelayResult, dc_delay_literal, delay_time, response_at
from .special import bessel_i0, bessel_i1
from .waveform import Waveform

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_KERNEL", "DelayResult", "DerivedParams", "FiniteLine", "InvalidLineError", "Kernel",
    "KernelNormalization", "KernelVariant", "LineParams", "NetworkSpec", "Waveform", "bessel_i0",
    "bessel_i1", "build_tridiagonal_cap", "dc_delay_literal", "delay_time", "derive_params",
    "mass_tensor", "modal_decompose", "network_response", "reflected_delay", "reflected_response",
    "reflection_budget", "response_at",
]
