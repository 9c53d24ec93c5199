"""Displaced thermal oscillator states and their truncated Fock representation.

A displaced thermal state ``D(alpha) rho_th D(alpha)^dagger`` is carried around
in closed parametric form (:class:`DisplacedThermal`).  Everything that can be
said about it in closed form (energy variance, quantum Fisher information) is
computed from ``nbar`` directly, using ``coth(hbar omega / 2 kB T) = 2 nbar + 1``.
The :class:`FockMatrix` representation exists so the closed forms can be
checked against brute-force linear algebra.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import stats

from .core import PhysicalConstants

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
DEFAULT_EPSILON = 1e-10
MAX_DIM = 512
DISPLACEMENT_PADDING = 8
QFI_EIGEN_FLOOR = 1e-14


class TruncationError(RuntimeError):
    """Raised when a state would need more Fock levels than allowed."""


def nbar_from_temperature(omega, T, constants: PhysicalConstants | None = None):
    """Bose-Einstein occupation of a mode of angular frequency ``omega`` at ``T``.

    Stable for ``hbar omega >> kB T`` (returns 0 instead of overflowing).
    """
    constants = constants or PhysicalConstants()
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("temperature must be strictly positive; use nbar=0 for a frozen mode")
    x = constants.hbar * np.asarray(omega, dtype=float) / (constants.kB * T)
    if np.any(x <= 0):
        raise ValueError("omega must be strictly positive")
    with np.errstate(under="ignore"):
        em = np.exp(-x)
    out = em / -np.expm1(-x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DisplacedThermal:
    """Single oscillator mode prepared in ``D(alpha) rho_th(nbar) D(alpha)^dagger``."""

    omega: float
    nbar: float = 0.0
    alpha: complex = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"omega must be positive, got {self.omega!r}")
        if not (math.isfinite(self.nbar) and self.nbar >= 0):
            raise ValueError(f"nbar must be >= 0, got {self.nbar!r}")
        if not np.isfinite(complex(self.alpha)):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")

    @classmethod
    def from_temperature(cls, omega, T, alpha=0.0, constants=None):
        nbar = 0.0 if T == 0 else nbar_from_temperature(omega, T, constants)
        return cls(omega=omega, nbar=nbar, alpha=alpha)

    @property
    def alpha_abs2(self) -> float:
        return abs(complex(self.alpha)) ** 2

    @property
    def coth_half(self) -> float:
        """coth(hbar omega / 2 kB T), i.e. ``2 nbar + 1``."""
        return 2.0 * self.nbar + 1.0

    @property
    def tanh_half(self) -> float:
        return 1.0 / (2.0 * self.nbar + 1.0)

    def energy(self, constants=None) -> float:
        constants = constants or PhysicalConstants()
        return constants.hbar * self.omega


# Any single environment mode is described by its displaced thermal state.
ModeSpec = DisplacedThermal


class FockMatrix:
    """Density matrix of one mode in a Fock basis truncated to ``dim`` levels."""

    __slots__ = ("entries",)

    def __init__(self, entries, validate=True):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {entries.shape}")
        self.entries = entries
        if validate:
            self.validate()

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def validate(self, trace_tol=None):
        """Check Hermiticity, positivity and (optionally) normalisation."""
        m = self.entries
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        lam = np.linalg.eigvalsh(m)
        if lam.size and lam[0] < -PSD_TOL:
            raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {lam[0]:.3e})")
        if trace_tol is not None and abs(self.trace() - 1.0) > trace_tol:
            raise ValueError(f"trace {self.trace()!r} differs from 1 by more than {trace_tol}")
        return self

    def normalized(self) -> "FockMatrix":
        return FockMatrix(self.entries / self.trace(), validate=False)

    def number_moments(self):
        """Return ``(<n>, <n^2>)``."""
        p = np.diag(self.entries).real
        n = np.arange(self.dim)
        return float(p @ n), float(p @ n**2)

    def rotated(self, phi) -> "FockMatrix":
        """``exp(i phi n) rho exp(-i phi n)``."""
        ph = np.exp(1j * phi * np.arange(self.dim))
        return FockMatrix(ph[:, None] * self.entries * ph.conj()[None, :], validate=False)

    def __repr__(self):
        return f"FockMatrix(dim={self.dim}, trace={self.trace():.12f})"


def _thermal_tail_dim(nbar, tail):
    if nbar == 0:
        return 1
    q = nbar / (nbar + 1.0)
    return max(1, math.ceil(math.log(tail) / math.log(q)))


def _poisson_tail_dim(mean, tail):
    if mean == 0:
        return 1
    # smallest d with P(n >= d) < tail
    d = int(stats.poisson.isf(tail, mean)) + 1
    while stats.poisson.sf(d - 1, mean) >= tail:
        d += 1
    return d


def cutoff_dim(state: DisplacedThermal, epsilon=DEFAULT_EPSILON) -> int:
    """Initial Fock cutoff estimate: both the thermal and coherent tails below epsilon/2."""
    return max(_thermal_tail_dim(state.nbar, epsilon / 2), _poisson_tail_dim(state.alpha_abs2, epsilon / 2))


def _annihilation(dim):
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def displacement(alpha, dim) -> np.ndarray:
    """Exact exponential of ``alpha a^dagger - alpha^* a`` on ``dim`` levels."""
    a = _annihilation(dim)
    gen = alpha * a.T - np.conj(alpha) * a
    return scipy.linalg.expm(gen)


def thermal_populations(nbar, dim) -> np.ndarray:
    if nbar == 0:
        p = np.zeros(dim)
        p[0] = 1.0
        return p
    k = np.arange(dim)
    return np.exp(k * math.log(nbar) - (k + 1) * math.log1p(nbar))


def _build(state, dim, padding):
    big = dim + padding
    rho = np.diag(thermal_populations(state.nbar, big)).astype(complex)
    if state.alpha != 0:
        D = displacement(complex(state.alpha), big)
        rho = D @ rho @ D.conj().T
    rho = rho[:dim, :dim]
    return 0.5 * (rho + rho.conj().T)


def to_fock(state: DisplacedThermal, epsilon=DEFAULT_EPSILON, dim=None,
            max_dim=MAX_DIM, padding=DISPLACEMENT_PADDING) -> FockMatrix:
    """Truncated Fock matrix of ``state``.

    With ``dim`` given the matrix is built at exactly that size.  Otherwise the
    cutoff starts from :func:`cutoff_dim` and grows until the retained trace
    is at least ``1 - epsilon``.
    """
    if dim is not None:
        if dim < 1:
            raise ValueError("dim must be >= 1")
        return FockMatrix(_build(state, int(dim), padding), validate=False)
    if not 0 < epsilon <= 1e-3:
        raise ValueError("epsilon must lie in (0, 1e-3]")
    d = cutoff_dim(state, epsilon)
    while True:
        if d > max_dim:
            raise TruncationError(f"state needs more than {max_dim} Fock levels at epsilon={epsilon}")
        rho = _build(state, d, padding)
        if np.trace(rho).real >= 1.0 - epsilon:
            return FockMatrix(rho, validate=False)
        d += max(padding, d // 4)


def number_operator_energies(dim, omega, constants=None) -> np.ndarray:
    """Diagonal of ``hbar omega n`` on ``dim`` levels."""
    constants = constants or PhysicalConstants()
    return constants.hbar * omega * np.arange(dim, dtype=float)


def thermal_energy_variance(state: DisplacedThermal, constants=None) -> float:
    e = state.energy(constants)
    return e * e * state.nbar * (state.nbar + 1.0)


def excess_energy_variance(state: DisplacedThermal, constants=None) -> float:
    """Displacement-induced part of the energy variance, ``(hbar omega |alpha|)^2 coth``."""
    e = state.energy(constants)
    return e * e * state.alpha_abs2 * state.coth_half


def energy_variance(state: DisplacedThermal, constants=None) -> float:
    """Variance of ``hbar omega n`` in ``state`` (J^2)."""
    return thermal_energy_variance(state, constants) + excess_energy_variance(state, constants)


def qfi(state: DisplacedThermal, constants=None) -> float:
    """Quantum Fisher information of ``state`` for the generator ``hbar omega n`` (J^2)."""
    e = state.energy(constants)
    return 4.0 * e * e * state.alpha_abs2 * state.tanh_half


def fock_energy_variance(rho: FockMatrix, H_diag) -> float:
    p = np.diag(rho.entries).real
    H_diag = np.asarray(H_diag, dtype=float)
    mean = p @ H_diag
    return float(p @ H_diag**2 - mean**2)


def qfi_generic(rho: FockMatrix, H_diag, floor=QFI_EIGEN_FLOOR) -> float:
    """Quantum Fisher information from the eigendecomposition of ``rho``.

    ``H_diag`` holds the energies of the Fock levels; pairs whose eigenvalue sum
    lies below ``floor`` are dropped.
    """
    m = rho.entries
    H_diag = np.asarray(H_diag, dtype=float)
    if H_diag.shape != (rho.dim,):
        raise ValueError(f"H_diag has shape {H_diag.shape}, expected ({rho.dim},)")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("density matrix is not Hermitian")
    lam, V = np.linalg.eigh(m)
    lam = np.clip(lam, 0.0, None)
    Hm = (V.conj().T * H_diag) @ V
    lsum = lam[:, None] + lam[None, :]
    ldiff = lam[:, None] - lam[None, :]
    mask = lsum >= floor
    w = np.zeros_like(lsum)
    w[mask] = ldiff[mask] ** 2 / lsum[mask]
    return float(2.0 * np.sum(w * np.abs(Hm) ** 2))


def resolve_occupation(omega, nbar=None, temperature=None, constants=None) -> float:
    """Pick the thermal occupation from ``nbar`` or ``temperature``; ``nbar`` wins."""
    if nbar is not None:
        if temperature is not None:
            warnings.warn("both nbar and temperature given; using nbar", stacklevel=2)
        return float(nbar)
    if temperature is None:
        return 0.0
    if temperature == 0:
        return 0.0
    return nbar_from_temperature(omega, temperature, constants)
