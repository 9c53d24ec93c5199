"""Partial decoherence factor of the traced-out oscillator fraction."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import _kernels
from .core import PhysicalConstants, Scenario, phase
from .states import DisplacedThermal, FockMatrix

# exp(-700) is near the bottom of the double range; anything below is reported as 0.
LOG_UNDERFLOW = -700.0


def one_minus_cos(dphi):
    """``1 - cos(dphi)`` without cancellation at small angles."""
    h = np.sin(0.5 * np.asarray(dphi, dtype=float))
    out = 2.0 * h * h
    return float(out) if out.ndim == 0 else out


def gamma_thermal_abs(nbar, dphi):
    """``|Gamma^th| = [1 + 2 nbar (nbar + 1)(1 - cos dphi)]^(-1/2)``."""
    return (1.0 + 2.0 * nbar * (nbar + 1.0) * one_minus_cos(dphi)) ** -0.5


def log_gamma_mode(state: DisplacedThermal, dphi):
    """Natural log of the single-mode modulus at phase ``dphi``."""
    x = one_minus_cos(dphi)
    ax = 2.0 * state.nbar * (state.nbar + 1.0) * x
    return -0.5 * np.log1p(ax) - state.alpha_abs2 * state.coth_half * x / (1.0 + ax)


def gamma_mode_abs(state: DisplacedThermal, dphi):
    """Single-mode ``|Gamma|`` as a function of the dilation phase."""
    return np.exp(log_gamma_mode(state, dphi))


def gamma_mode_exact(state: DisplacedThermal, t, scenario: Scenario):
    """``|Gamma^i_t(dX)|`` of one displaced thermal mode, exact in time."""
    return gamma_mode_abs(state, phase(state.omega, t, scenario))


def gamma_mode_complex(state: DisplacedThermal, dphi) -> complex:
    """Complex single-mode factor ``tr[exp(i dphi n) rho]`` in closed form.

    ``dphi`` is signed (``g dX omega t / c^2`` with ``dX = X' - X``).  The
    modulus agrees with :func:`gamma_mode_abs`.
    """
    nb = state.nbar
    a2 = state.alpha_abs2
    e = complex(math.cos(dphi), math.sin(dphi))
    thermal = 1.0 / (1.0 + nb * (1.0 - e))
    ratio = (nb + 1.0 + nb * e) / (nb + 1.0 - nb * e)
    x = one_minus_cos(dphi)
    return complex(np.exp(1j * a2 * math.sin(dphi)) * thermal * np.exp(-a2 * x * ratio))


def gamma_mode_oracle(rho: FockMatrix, dphi) -> complex:
    """Brute-force ``tr[exp(i dphi n) rho]`` on a truncated Fock matrix."""
    return complex(np.exp(1j * dphi * np.arange(rho.dim)) @ np.diag(rho.entries))


def _fraction_arrays(modes):
    if len(modes) == 0:
        raise ValueError("mode list is empty")
    omega = np.array([m.omega for m in modes], dtype=float)
    nbar = np.array([m.nbar for m in modes], dtype=float)
    a2 = np.array([m.alpha_abs2 for m in modes], dtype=float)
    return omega, nbar, a2


def log_gamma_series(modes: Sequence[DisplacedThermal], times, scenario: Scenario, backend=None):
    """``log |Gamma_t|`` of a mode fraction on a time grid."""
    omega, nbar, a2 = _fraction_arrays(modes)
    return _kernels.log_gamma_series(
        times, scenario.phase_rate(omega), 2.0 * nbar * (nbar + 1.0), a2 * (2.0 * nbar + 1.0), backend
    )


def log_gamma_fraction(modes: Sequence[DisplacedThermal], t, scenario: Scenario) -> float:
    return float(log_gamma_series(modes, [t], scenario)[0])


def gamma_fraction(modes: Sequence[DisplacedThermal], t, scenario: Scenario) -> float:
    """Product of single-mode moduli over a fraction, evaluated in log space."""
    lg = log_gamma_fraction(modes, t, scenario)
    return 0.0 if lg < LOG_UNDERFLOW else math.exp(lg)


def _short_time_coefficient(scenario: Scenario) -> float:
    k = scenario.constants
    return (k.g * scenario.deltaX / (math.sqrt(2.0) * k.hbar * k.c**2)) ** 2


def gamma_short_time(sum_variance, t, scenario: Scenario):
    """Gaussian short-time approximation driven by the summed energy variance."""
    if np.any(np.asarray(sum_variance) < 0):
        raise ValueError("sum_variance must be >= 0")
    return np.exp(-_short_time_coefficient(scenario) * sum_variance * np.square(t))


def decoherence_time(sum_variance, scenario: Scenario) -> float:
    """Time at which the short-time approximation reaches 1/e; ``inf`` if nothing decoheres."""
    if sum_variance < 0:
        raise ValueError("sum_variance must be >= 0")
    k = scenario.constants
    if sum_variance == 0 or scenario.deltaX == 0:
        return math.inf
    return math.sqrt(2.0) * k.hbar * k.c**2 / (k.g * abs(scenario.deltaX) * math.sqrt(sum_variance))


def coherence_length(sum_variance, t, scenario: Scenario) -> float:
    """Separation at which the short-time factor at time ``t`` reaches 1/e."""
    if sum_variance < 0 or t < 0:
        raise ValueError("sum_variance and t must be >= 0")
    if t == 0 or sum_variance == 0:
        return math.inf
    k = scenario.constants
    return math.sqrt(2.0) * k.hbar * k.c**2 / (k.g * t * math.sqrt(sum_variance))


def short_time_valid(sum_variance, omega_max, constants: PhysicalConstants | None = None, margin=100.0):
    """Check ``sum_variance >> (2 hbar omega_max)^2``; returns ``(ok, ratio)``."""
    constants = constants or PhysicalConstants()
    ratio = sum_variance / (2.0 * constants.hbar * omega_max) ** 2
    return bool(ratio >= margin), float(ratio)
