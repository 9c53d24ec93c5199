"""Distinguishability of the observed environment states.

The fidelity used throughout is the Bhattacharyya coefficient
``B(rho, sigma) = tr sqrt(sqrt(rho) sigma sqrt(rho))`` (not squared).
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import _kernels
from .core import PhysicalConstants, Scenario, phase
from .decoherence import LOG_UNDERFLOW, _fraction_arrays, one_minus_cos
from .states import PSD_TOL, DisplacedThermal, FockMatrix


def _psd_sqrt(m):
    m = 0.5 * (m + m.conj().T)
    lam, V = np.linalg.eigh(m)
    if lam.size and lam[0] < -PSD_TOL:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {lam[0]:.3e})")
    lam = np.clip(lam, 0.0, None)
    return (V * np.sqrt(lam)) @ V.conj().T


def bhattacharyya(rho, sigma) -> float:
    """Fidelity of two density matrices (``FockMatrix`` or arrays)."""
    r = rho.entries if isinstance(rho, FockMatrix) else np.asarray(rho, dtype=complex)
    s = sigma.entries if isinstance(sigma, FockMatrix) else np.asarray(sigma, dtype=complex)
    if r.shape != s.shape:
        raise ValueError(f"shape mismatch {r.shape} vs {s.shape}")
    sr = _psd_sqrt(r)
    inner = sr @ s @ sr
    inner = 0.5 * (inner + inner.conj().T)
    lam = np.linalg.eigvalsh(inner)
    if lam.size and lam[0] < -PSD_TOL:
        raise ValueError(f"sandwiched product is not positive semidefinite (min eigenvalue {lam[0]:.3e})")
    return float(np.sum(np.sqrt(np.clip(lam, 0.0, None))))


def fidelity_oracle(rho: FockMatrix, dphi) -> float:
    """Fidelity between ``rho`` and ``rho`` rotated by ``exp(i dphi n)``."""
    return bhattacharyya(rho, rho.rotated(dphi))


def log_fidelity_mode(state: DisplacedThermal, dphi):
    return -state.alpha_abs2 * state.tanh_half * one_minus_cos(dphi)


def fidelity_mode_abs(state: DisplacedThermal, dphi):
    """Single-mode fidelity as a function of the dilation phase."""
    return np.exp(log_fidelity_mode(state, dphi))


def fidelity_mode_exact(state: DisplacedThermal, t, scenario: Scenario):
    """Fidelity of the two conditional states of one mode, exact in time."""
    return fidelity_mode_abs(state, phase(state.omega, t, scenario))


def log_fidelity_series(modes: Sequence[DisplacedThermal], times, scenario: Scenario, backend=None):
    """``log B^mac_t`` of a macrofraction on a time grid."""
    omega, nbar, a2 = _fraction_arrays(modes)
    return _kernels.log_fidelity_series(times, scenario.phase_rate(omega), a2 / (2.0 * nbar + 1.0), backend)


def log_fidelity_macrofraction(modes, t, scenario: Scenario) -> float:
    return float(log_fidelity_series(modes, [t], scenario)[0])


def fidelity_macrofraction(modes: Sequence[DisplacedThermal], t, scenario: Scenario) -> float:
    """Fidelity of a macrofraction: product of single-mode fidelities."""
    lb = log_fidelity_macrofraction(modes, t, scenario)
    return 0.0 if lb < LOG_UNDERFLOW else math.exp(lb)


def _short_time_coefficient(scenario: Scenario) -> float:
    k = scenario.constants
    return (k.g * scenario.deltaX / (k.hbar * k.c**2)) ** 2 / 8.0


def fidelity_short_time(sum_qfi, t, scenario: Scenario):
    """Gaussian short-time approximation driven by the summed QFI."""
    if np.any(np.asarray(sum_qfi) < 0):
        raise ValueError("sum_qfi must be >= 0")
    return np.exp(-_short_time_coefficient(scenario) * sum_qfi * np.square(t))


def distinguishability_time(sum_qfi, scenario: Scenario) -> float:
    """Time at which the short-time fidelity reaches 1/e; ``inf`` without information gain."""
    if sum_qfi < 0:
        raise ValueError("sum_qfi must be >= 0")
    if sum_qfi == 0 or scenario.deltaX == 0:
        return math.inf
    k = scenario.constants
    return math.sqrt(8.0) * k.hbar * k.c**2 / (k.g * abs(scenario.deltaX) * math.sqrt(sum_qfi))


def distinguishability_length(sum_qfi, t, scenario: Scenario) -> float:
    """Separation at which the short-time fidelity at time ``t`` reaches 1/e."""
    if sum_qfi < 0 or t < 0:
        raise ValueError("sum_qfi and t must be >= 0")
    if t == 0 or sum_qfi == 0:
        return math.inf
    k = scenario.constants
    return math.sqrt(8.0) * k.hbar * k.c**2 / (k.g * t * math.sqrt(sum_qfi))


def qfi_regime_valid(sum_qfi, omega_max, constants: PhysicalConstants | None = None, margin=100.0):
    """Check ``sum_qfi >> (8 hbar omega_max)^2``; returns ``(ok, ratio)``."""
    constants = constants or PhysicalConstants()
    ratio = sum_qfi / (8.0 * constants.hbar * omega_max) ** 2
    return bool(ratio >= margin), float(ratio)
