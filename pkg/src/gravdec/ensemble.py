"""Environment sampling, partitioning and time sweeps.

Random draws use numpy's PCG64 generator.  A run seed ``s`` is expanded with
``SeedSequence(s).spawn(1 + M)``: child 0 feeds the unobserved fraction and
child ``j`` feeds macrofraction ``j``.  Each fraction draws its frequencies in
one call, so adding macrofractions never changes earlier ones.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .core import PhysicalConstants, Scenario
from .decoherence import (
    LOG_UNDERFLOW,
    coherence_length,
    decoherence_time,
    log_gamma_series,
    short_time_valid,
)
from .distinguish import (
    distinguishability_length,
    distinguishability_time,
    log_fidelity_series,
    qfi_regime_valid,
)
from .states import DisplacedThermal, energy_variance, qfi, resolve_occupation

RNG_ALGORITHM = "numpy.random.PCG64 via SeedSequence(seed).spawn(1 + n_fractions)"


@dataclass(frozen=True)
class FrequencyDistribution:
    """Distribution of mode frequencies (rad/s).

    ``uniform`` draws from ``[low, high)``; ``discrete`` assigns its values
    cyclically in order (no randomness); ``single`` repeats one value.
    """

    kind: str
    low: float | None = None
    high: float | None = None
    values: tuple = ()

    def __post_init__(self):
        if self.kind == "uniform":
            if self.low is None or self.high is None or not (0 < self.low < self.high):
                raise ValueError(f"uniform distribution needs 0 < low < high, got [{self.low}, {self.high}]")
        elif self.kind in ("discrete", "single"):
            vals = tuple(float(v) for v in self.values)
            if not vals or any(not (math.isfinite(v) and v > 0) for v in vals):
                raise ValueError("discrete frequencies must be a nonempty list of positive values")
            if self.kind == "single" and len(vals) != 1:
                raise ValueError("single distribution holds exactly one frequency")
            object.__setattr__(self, "values", vals)
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def uniform(cls, low, high):
        return cls("uniform", low=float(low), high=float(high))

    @classmethod
    def discrete(cls, values):
        return cls("discrete", values=tuple(values))

    @classmethod
    def single(cls, omega):
        return cls("single", values=(omega,))

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.5 * (self.low + self.high)
        return float(np.mean(self.values))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size=n)
        vals = np.asarray(self.values)
        return vals[np.arange(n) % vals.size]


@dataclass(frozen=True)
class StateTemplate:
    """Initial-state recipe shared by all sampled modes."""

    alpha: complex = 0.0
    nbar: float | None = None
    temperature: float | None = None

    def make(self, omega, constants=None) -> DisplacedThermal:
        nb = resolve_occupation(omega, self.nbar, self.temperature, constants)
        return DisplacedThermal(float(omega), nb, self.alpha)


@dataclass(frozen=True)
class EnvironmentPartition:
    """Unobserved (traced-out) modes plus disjoint observed macrofractions."""

    unobserved: tuple
    macrofractions: tuple
    n_total: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "unobserved", tuple(self.unobserved))
        object.__setattr__(self, "macrofractions", tuple(tuple(m) for m in self.macrofractions))
        if not self.unobserved:
            raise ValueError("unobserved fraction is empty")
        if not self.macrofractions or any(len(m) == 0 for m in self.macrofractions):
            raise ValueError("every macrofraction must be nonempty")
        ids = [id(m) for m in self.unobserved] + [id(m) for f in self.macrofractions for m in f]
        if len(set(ids)) != len(ids):
            raise ValueError("a mode object appears in more than one fraction")
        if self.n_total is not None and len(ids) > self.n_total:
            raise ValueError(f"partition uses {len(ids)} modes but only {self.n_total} exist")

    @property
    def n_perp(self) -> int:
        return len(self.unobserved)

    @property
    def n_fractions(self) -> int:
        return len(self.macrofractions)

    def swapped(self, index=0) -> "EnvironmentPartition":
        """Exchange the unobserved fraction with macrofraction ``index``."""
        macs = list(self.macrofractions)
        unobserved, macs[index] = macs[index], self.unobserved
        return EnvironmentPartition(unobserved, macs, self.n_total)


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed


def sample_partition(dist: FrequencyDistribution, n_perp: int, n_mac: int, n_fractions: int,
                     state_template: StateTemplate, seed: int, observed_dist: FrequencyDistribution | None = None,
                     constants: PhysicalConstants | None = None) -> EnvironmentPartition:
    """Draw an environment: ``n_perp`` unobserved modes and ``n_fractions`` macrofractions of ``n_mac``."""
    if min(n_perp, n_mac, n_fractions) < 1:
        raise ValueError("all counts must be >= 1")
    observed_dist = observed_dist or dist
    streams = np.random.SeedSequence(_check_seed(seed)).spawn(1 + n_fractions)
    gens = [np.random.Generator(np.random.PCG64(s)) for s in streams]
    unobserved = [state_template.make(w, constants) for w in dist.sample(gens[0], n_perp)]
    macs = [[state_template.make(w, constants) for w in observed_dist.sample(g, n_mac)] for g in gens[1:]]
    return EnvironmentPartition(unobserved, macs)


def sum_variance(modes: Sequence[DisplacedThermal], constants=None) -> float:
    return math.fsum(energy_variance(m, constants) for m in modes)


def sum_qfi(modes: Sequence[DisplacedThermal], constants=None) -> float:
    return math.fsum(qfi(m, constants) for m in modes)


def mean_variance(partition: EnvironmentPartition, constants=None) -> float:
    """Empirical mean energy variance over the unobserved fraction (J^2)."""
    return sum_variance(partition.unobserved, constants) / partition.n_perp


def mean_qfi(partition: EnvironmentPartition, index: int = 0, constants=None) -> float:
    """Empirical mean QFI over macrofraction ``index`` (J^2)."""
    modes = partition.macrofractions[index]
    return sum_qfi(modes, constants) / len(modes)


def make_time_grid(t_max, points=2000, kind="linear", t_min=None) -> np.ndarray:
    """Linear grid on ``[0, t_max]`` or logarithmic grid on ``[t_min, t_max]``."""
    if points < 2:
        raise ValueError("a time grid needs at least 2 points")
    if not (math.isfinite(t_max) and t_max > 0):
        raise ValueError(f"t_max must be positive and finite, got {t_max!r}")
    if kind == "linear":
        return np.linspace(0.0, t_max, points)
    if kind == "log":
        t_min = t_max * 1e-4 if t_min is None else t_min
        if not 0 < t_min < t_max:
            raise ValueError("log grid needs 0 < t_min < t_max")
        return np.geomspace(t_min, t_max, points)
    raise ValueError(f"unknown grid kind {kind!r}")


def characteristic_times(partition: EnvironmentPartition, scenario: Scenario):
    """``(tau_dec, [tau_dst per macrofraction])``."""
    k = scenario.constants
    tau_dec = decoherence_time(sum_variance(partition.unobserved, k), scenario)
    tau_dst = [distinguishability_time(sum_qfi(m, k), scenario) for m in partition.macrofractions]
    return tau_dec, tau_dst


def default_time_grid(partition, scenario, points=2000, factor=5.0, kind="linear"):
    """Grid spanning ``factor`` times the slowest distinguishability time."""
    tau_dec, tau_dst = characteristic_times(partition, scenario)
    finite = [t for t in tau_dst if math.isfinite(t)]
    span = max(finite) if finite else tau_dec
    if not math.isfinite(span):
        raise ValueError("environment neither decoheres nor gains information; give t_max explicitly")
    return make_time_grid(factor * span, points, kind)


@dataclass
class SweepResult:
    times: np.ndarray
    log_gamma: np.ndarray
    log_b_mac: np.ndarray  # shape (M, T)
    tau_dec: float
    tau_dst: list
    sum_variance: float
    sum_qfi: list
    regime: dict = field(default_factory=dict)
    backend: str = ""

    @property
    def gamma(self) -> np.ndarray:
        return np.where(self.log_gamma < LOG_UNDERFLOW, 0.0, np.exp(self.log_gamma))

    @property
    def b_mac(self) -> np.ndarray:
        return np.where(self.log_b_mac < LOG_UNDERFLOW, 0.0, np.exp(self.log_b_mac))

    @property
    def gamma_underflow(self) -> np.ndarray:
        return self.log_gamma < LOG_UNDERFLOW

    @property
    def b_underflow(self) -> np.ndarray:
        return self.log_b_mac < LOG_UNDERFLOW

    def dx_c(self, scenario) -> np.ndarray:
        return np.array([coherence_length(self.sum_variance, t, scenario) for t in self.times])

    def dx_d(self, scenario, index=0) -> np.ndarray:
        return np.array([distinguishability_length(self.sum_qfi[index], t, scenario) for t in self.times])

    def csv_text(self) -> str:
        """Fixed-format CSV: 17 significant digits, ``\\n`` line endings."""
        buf = io.StringIO()
        m = self.log_b_mac.shape[0]
        buf.write(",".join(["t", "gamma_abs"] + [f"b_mac_{j + 1}" for j in range(m)]) + "\n")
        gamma, b = self.gamma, self.b_mac
        for i, t in enumerate(self.times):
            row = [t, gamma[i], *b[:, i]]
            buf.write(",".join(f"{float(v):.16e}" for v in row) + "\n")
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="ascii") as fh:
            fh.write(self.csv_text())


def _validate_grid(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("time grid must be a nonempty 1-D array")
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise ValueError("time grid must be finite and nonnegative")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return times


def run_sweep(partition: EnvironmentPartition, scenario: Scenario, time_grid, margin=100.0, backend=None) -> SweepResult:
    """Evaluate ``|Gamma_t|`` and every ``B^mac_t`` on ``time_grid``."""
    times = _validate_grid(time_grid)
    k = scenario.constants
    log_gamma = log_gamma_series(partition.unobserved, times, scenario, backend)
    log_b = np.vstack([log_fidelity_series(m, times, scenario, backend) for m in partition.macrofractions])
    tau_dec, tau_dst = characteristic_times(partition, scenario)
    sv = sum_variance(partition.unobserved, k)
    sq = [sum_qfi(m, k) for m in partition.macrofractions]
    ok, ratio = short_time_valid(sv, max(m.omega for m in partition.unobserved), k, margin)
    regime = {"variance_ratio": ratio, "variance_valid": ok, "qfi_ratio": [], "qfi_valid": []}
    for modes, s in zip(partition.macrofractions, sq):
        ok, ratio = qfi_regime_valid(s, max(m.omega for m in modes), k, margin)
        regime["qfi_ratio"].append(ratio)
        regime["qfi_valid"].append(ok)
    return SweepResult(times, log_gamma, log_b, tau_dec, tau_dst, sv, sq, regime, backend or _kernels.BACKEND)
