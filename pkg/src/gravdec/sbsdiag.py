"""Extended state on a discrete position grid and its distance from broadcast form.

The centre of mass lives on grid points ``X_k``.  Coherences between ``X_k``
and ``X_l`` are multiplied by the complex decoherence factor of the traced-out
modes at ``dX = X_l - X_k``; each observed mode is rotated by ``U_t(X_k)``.
Rotations are taken in the frame co-rotating with the free internal
Hamiltonian, i.e. ``U_t(X) = exp(-i g X omega t n / c^2)``.  That frame change
is one unitary common to every branch and leaves all norms and fidelities
untouched, while keeping the phases small enough to be represented exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import Scenario
from .decoherence import gamma_mode_complex
from .distinguish import bhattacharyya
from .ensemble import EnvironmentPartition
from .states import TruncationError, to_fock

MAX_OBSERVED_MODES = 4
MAX_CUTOFF = 32
MAX_ELEMENTS = 10**8


@dataclass
class DiscreteExtendedState:
    positions: np.ndarray
    weights: np.ndarray
    init_coherences: np.ndarray
    gamma: np.ndarray  # complex decoherence factor, [k, l] at dX = X_l - X_k
    env_initial: list  # per macrofraction, per mode: FockMatrix
    phase_rates: list  # per macrofraction, per mode: g omega t / c^2 (rad/m)
    conditional_env: list  # [k][fraction][mode]: FockMatrix

    @property
    def offdiag(self) -> np.ndarray:
        """Position-basis coherences after tracing the unobserved modes."""
        return self.init_coherences * self.gamma

    @property
    def n_positions(self) -> int:
        return self.positions.size

    def _rotation(self, j, i, X):
        rho = self.env_initial[j][i]
        return np.exp(-1j * self.phase_rates[j][i] * X * np.arange(rho.dim))

    def block(self, k, l) -> np.ndarray:
        """Explicit operator multiplying ``|X_k><X_l|`` in the extended state."""
        factors = []
        for j, modes in enumerate(self.env_initial):
            for i, rho in enumerate(modes):
                uk = self._rotation(j, i, self.positions[k])
                ul = self._rotation(j, i, self.positions[l])
                factors.append(uk[:, None] * rho.entries * ul.conj()[None, :])
        return self.offdiag[k, l] * reduce(np.kron, factors)

    def block_trace_norm(self, k, l) -> float:
        return float(np.sum(np.linalg.svd(self.block(k, l), compute_uv=False)))


def _check_grid(positions, weights, init_coherences):
    positions = np.asarray(positions, dtype=float)
    weights = np.asarray(weights, dtype=float)
    K = positions.size
    if positions.ndim != 1 or K < 2:
        raise ValueError("need at least two grid positions")
    if weights.shape != (K,) or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative, one per position, and sum to 1")
    if init_coherences is None:
        sw = np.sqrt(weights)
        init_coherences = np.outer(sw, sw).astype(complex)
    init_coherences = np.asarray(init_coherences, dtype=complex)
    if init_coherences.shape != (K, K):
        raise ValueError(f"coherence matrix must be {K}x{K}")
    if np.max(np.abs(init_coherences - init_coherences.conj().T)) > 1e-12:
        raise ValueError("coherence matrix must be Hermitian")
    if np.max(np.abs(np.diag(init_coherences).real - weights)) > 1e-12:
        raise ValueError("coherence matrix diagonal must equal the weights")
    return positions, weights, init_coherences


def build_extended(positions, weights, init_coherences, partition: EnvironmentPartition, t,
                   scenario: Scenario, cutoff=None, epsilon=1e-10, max_elements=MAX_ELEMENTS) -> DiscreteExtendedState:
    """Extended state of the centre of mass plus the observed macrofractions at time ``t``.

    ``init_coherences`` is the initial position density matrix on the grid
    (``None`` means the pure superposition with amplitudes ``sqrt(weights)``).
    """
    positions, weights, init_coherences = _check_grid(positions, weights, init_coherences)
    K = positions.size
    k_const = scenario.constants
    observed = [m for f in partition.macrofractions for m in f]
    if len(observed) > MAX_OBSERVED_MODES:
        raise TruncationError(f"at most {MAX_OBSERVED_MODES} observed modes can be represented explicitly")
    if cutoff is not None and not 1 <= cutoff <= MAX_CUTOFF:
        raise ValueError(f"cutoff must lie in [1, {MAX_CUTOFF}]")

    env_initial, phase_rates = [], []
    for modes in partition.macrofractions:
        fr, rates = [], []
        for m in modes:
            rho = to_fock(m, dim=cutoff) if cutoff is not None else to_fock(m, epsilon, max_dim=MAX_CUTOFF)
            fr.append(rho.normalized())
            rates.append(k_const.g * m.omega * t / k_const.c**2)
        env_initial.append(fr)
        phase_rates.append(rates)
    total_dim = int(np.prod([r.dim for f in env_initial for r in f]))
    if K * K * total_dim * total_dim > max_elements:
        raise TruncationError(f"extended state with K={K} and environment dimension {total_dim} exceeds {max_elements} elements")

    gamma = np.ones((K, K), dtype=complex)
    for k, l in itertools.product(range(K), repeat=2):
        if k == l:
            continue
        dX = positions[l] - positions[k]
        gamma[k, l] = np.prod([
            gamma_mode_complex(m, k_const.g * dX * m.omega * t / k_const.c**2) for m in partition.unobserved
        ])

    conditional = [
        [[rho.rotated(-rate * X) for rho, rate in zip(fr, rates)] for fr, rates in zip(env_initial, phase_rates)]
        for X in positions
    ]
    return DiscreteExtendedState(positions, weights, init_coherences, gamma, env_initial, phase_rates, conditional)


@dataclass(frozen=True)
class SBSDiagnostics:
    coherence_residue: float
    distinguishability_residue: float
    coherence_pair: tuple
    distinguishability_pair: tuple
    is_sbs: bool


def macrofraction_fidelity(state: DiscreteExtendedState, j, k, l) -> float:
    """Fidelity between macrofraction ``j`` conditioned on ``X_k`` and on ``X_l``."""
    return float(np.prod([
        bhattacharyya(a, b) for a, b in zip(state.conditional_env[k][j], state.conditional_env[l][j])
    ]))


def sbs_distance(state: DiscreteExtendedState, coherence_threshold=0.1, distinguishability_threshold=0.1) -> SBSDiagnostics:
    """Residual coherence and residual overlap of conditional environment states.

    Broadcast form is declared when both residues fall below their thresholds.
    """
    K = state.n_positions
    w = state.weights
    coh, coh_pair = 0.0, None
    dist, dist_pair = 0.0, None
    for k, l in itertools.combinations(range(K), 2):
        if w[k] * w[l] > 0:
            r = abs(state.offdiag[k, l]) / np.sqrt(w[k] * w[l])
            if r >= coh:
                coh, coh_pair = float(r), (k, l)
        for j in range(len(state.conditional_env[0])):
            b = macrofraction_fidelity(state, j, k, l)
            if b >= dist:
                dist, dist_pair = b, (j, k, l)
    return SBSDiagnostics(coh, dist, coh_pair, dist_pair,
                          coh < coherence_threshold and dist < distinguishability_threshold)
