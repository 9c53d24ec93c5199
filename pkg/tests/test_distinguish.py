import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import time_for_phase
from gravdec.core import PhysicalConstants, Scenario
from gravdec.decoherence import decoherence_time, gamma_mode_abs, gamma_short_time
from gravdec.distinguish import (
    bhattacharyya,
    distinguishability_length,
    distinguishability_time,
    fidelity_macrofraction,
    fidelity_mode_abs,
    fidelity_mode_exact,
    fidelity_oracle,
    fidelity_short_time,
    log_fidelity_macrofraction,
    qfi_regime_valid,
)
from gravdec.ensemble import sum_qfi, sum_variance
from gravdec.states import DisplacedThermal, FockMatrix, qfi, to_fock

# exp(-2/(2*2.15+1)), mpmath at 40 digits
B_PI_REF = 0.6856702235245871


class TestSingleMode:
    def test_time_zero(self, scenario):
        assert fidelity_mode_exact(DisplacedThermal(3e11, 2.0, 1.5), 0.0, scenario) == 1.0

    @pytest.mark.parametrize("t", [0.0, 1e9, 7.7e10])
    def test_no_displacement(self, scenario, t):
        assert fidelity_mode_exact(DisplacedThermal(3e11, 2.0), t, scenario) == 1.0

    def test_reference_at_pi(self, scenario):
        s = DisplacedThermal(5e11, 2.15, 1.0)
        t = time_for_phase(math.pi, s.omega, scenario)
        assert fidelity_mode_exact(s, t, scenario) == pytest.approx(B_PI_REF, rel=1e-12)
        assert fidelity_oracle(to_fock(s), math.pi) == pytest.approx(B_PI_REF, abs=1e-6)


class TestOracle:
    def test_zero_phase(self):
        assert fidelity_oracle(to_fock(DisplacedThermal(3e11, 1.3, 0.8)), 0.0) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("alpha,dphi", [(1.0, 0.3), (1.7j, 2.2), (0.5, math.pi)])
    def test_pure_coherent_overlap(self, alpha, dphi):
        rho = to_fock(DisplacedThermal(1e11, 0.0, alpha))
        assert fidelity_oracle(rho, dphi) == pytest.approx(math.exp(-abs(alpha) ** 2 * (1 - math.cos(dphi))), abs=1e-8)

    @pytest.mark.parametrize("nbar,alpha,dphi", [(2.15, 1.0, 1.3), (4.5, 1.9, 3.0), (0.3, 0.4j, 5.5)])
    def test_displaced_thermal(self, nbar, alpha, dphi):
        s = DisplacedThermal(2e11, nbar, alpha)
        assert fidelity_oracle(to_fock(s), dphi) == pytest.approx(fidelity_mode_abs(s, dphi), abs=1e-6)

    def test_rejects_non_psd(self):
        bad = FockMatrix(np.diag([1.2, -0.2]), validate=False)
        with pytest.raises(ValueError, match="semidefinite"):
            fidelity_oracle(bad, 0.4)

    def test_general_pair(self):
        rho = np.diag([1.0, 0.0])
        sigma = np.diag([0.0, 1.0])
        assert bhattacharyya(rho, sigma) == 0.0
        assert bhattacharyya(np.eye(2) / 2, np.diag([1.0, 0.0])) == pytest.approx(math.sqrt(0.5))
        with pytest.raises(ValueError):
            bhattacharyya(np.eye(2) / 2, np.eye(3) / 3)


class TestMacrofraction:
    def test_single(self, scenario):
        s = DisplacedThermal(2.7e11, 1.7, 1.0)
        assert fidelity_macrofraction([s], 4.4e10, scenario) == pytest.approx(fidelity_mode_exact(s, 4.4e10, scenario), rel=1e-13)

    def test_identical(self, scenario):
        s = DisplacedThermal(2.7e11, 1.7, 1.0)
        assert fidelity_macrofraction([s] * 40, 3e9, scenario) == pytest.approx(fidelity_mode_exact(s, 3e9, scenario) ** 40, rel=1e-12)

    def test_empty(self, scenario):
        with pytest.raises(ValueError):
            fidelity_macrofraction([], 1.0, scenario)

    def test_multiplicative(self, fig1b_partition, scenario):
        modes = list(fig1b_partition.macrofractions[0])
        a, b = modes[:400], modes[400:]
        for t in (1e9, 5e9, 2e10):
            whole = log_fidelity_macrofraction(modes, t, scenario)
            split = log_fidelity_macrofraction(a, t, scenario) + log_fidelity_macrofraction(b, t, scenario)
            assert math.exp(whole) == pytest.approx(math.exp(split), rel=1e-12)

    def test_fig1b_decays(self, fig1b_partition, scenario):
        modes = fig1b_partition.macrofractions[0]
        tau = distinguishability_time(sum_qfi(modes), scenario)
        assert fidelity_macrofraction(modes, 5 * tau, scenario) < 0.1


class TestShortTime:
    def test_time_zero(self, scenario):
        assert fidelity_short_time(1e-40, 0.0, scenario) == 1.0

    def test_matches_decoherence_at_four_times_variance(self, scenario):
        for t in (1e8, 3e9, 1e10):
            assert fidelity_short_time(4 * 3e-43, t, scenario) == pytest.approx(gamma_short_time(3e-43, t, scenario), rel=1e-14)

    def test_small_phase_ensemble(self, fig1b_partition, scenario):
        modes = fig1b_partition.macrofractions[0]
        sq = sum_qfi(modes)
        wmax = max(m.omega for m in modes)
        errs = []
        for dphi in (0.02, 0.01, 0.005):
            t = time_for_phase(dphi, wmax, scenario)
            if dphi == 0.01:
                assert abs(fidelity_short_time(sq, t, scenario) - fidelity_macrofraction(modes, t, scenario)) <= 1e-5
            errs.append(abs(log_fidelity_macrofraction(modes, t, scenario) - math.log(fidelity_short_time(sq, t, scenario))))
        assert errs[0] / errs[1] == pytest.approx(16, rel=0.02)
        assert errs[1] / errs[2] == pytest.approx(16, rel=0.02)


class TestScales:
    def test_definition(self, scenario):
        tau = distinguishability_time(2e-44, scenario)
        assert fidelity_short_time(2e-44, tau, scenario) == pytest.approx(math.exp(-1), rel=1e-14)

    def test_zero_qfi(self, scenario):
        assert distinguishability_time(0.0, scenario) == math.inf

    def test_slower_than_decoherence(self, scenario):
        for nbar in (0.0, 0.5, 3.0):
            modes = [DisplacedThermal(w, nbar, 1.0) for w in np.linspace(1e11, 5e11, 30)]
            assert distinguishability_time(sum_qfi(modes), scenario) >= decoherence_time(sum_variance(modes), scenario)

    def test_fig1b(self, fig1b_partition, scenario):
        modes = fig1b_partition.macrofractions[0]
        tau = distinguishability_time(sum_qfi(modes), scenario)
        assert math.isfinite(tau)
        assert fidelity_macrofraction(modes, tau, scenario) == pytest.approx(math.exp(-1), rel=0.2)

    def test_length(self, scenario):
        sq, t = 2e-44, 5e9
        assert distinguishability_length(sq, 2 * t, scenario) == pytest.approx(distinguishability_length(sq, t, scenario) / 2)
        dxd = distinguishability_length(sq, t, scenario)
        assert fidelity_short_time(sq, t, Scenario(dxd)) == pytest.approx(math.exp(-1), rel=1e-14)
        assert distinguishability_length(sq, 0.0, scenario) == math.inf

    def test_validity(self, consts):
        w = 4e11
        boundary = 100 * (8 * consts.hbar * w) ** 2
        assert qfi_regime_valid(boundary, w, consts)[0]
        assert qfi_regime_valid(sum_qfi([DisplacedThermal(w, 1.0)] * 10), w, consts) == (False, 0.0)


@settings(max_examples=200)
@given(omega=st.floats(1e10, 1e12), nbar=st.floats(0, 10), amp=st.floats(0, 2), t=st.floats(1e7, 1e11))
def test_length_ordering(omega, nbar, amp, t):
    sc = Scenario(1e-6)
    modes = [DisplacedThermal(omega, nbar, amp), DisplacedThermal(1.7 * omega, nbar, amp)]
    sv, sq = sum_variance(modes), sum_qfi(modes)
    if sq > 0:
        from gravdec.decoherence import coherence_length
        assert distinguishability_length(sq, t, sc) >= coherence_length(sv, t, sc) * (1 - 1e-12)


@settings(max_examples=150)
@given(nbar=st.floats(0, 20), amp=st.floats(0, 3), dphi=st.floats(-20, 20))
def test_bounds_and_periodicity(nbar, amp, dphi):
    s = DisplacedThermal(1e11, nbar, amp)
    b = fidelity_mode_abs(s, dphi)
    assert 0.0 < b <= 1.0
    assert fidelity_mode_abs(s, dphi + 2 * math.pi) == pytest.approx(b, abs=1e-12)


@settings(max_examples=100)
@given(n1=st.floats(0, 10), dn=st.floats(1e-3, 10), amp=st.floats(0.01, 2), dphi=st.floats(0.05, 2 * math.pi - 0.05))
def test_monotone_in_temperature(n1, dn, amp, dphi):
    assert fidelity_mode_abs(DisplacedThermal(1e11, n1 + dn, amp), dphi) >= fidelity_mode_abs(DisplacedThermal(1e11, n1, amp), dphi)


@settings(max_examples=100)
@given(amp=st.floats(0, 3), dphi=st.floats(0, 50))
def test_pure_state_coincidence(amp, dphi):
    s = DisplacedThermal(1e11, 0.0, amp)
    assert fidelity_mode_abs(s, dphi) == pytest.approx(gamma_mode_abs(s, dphi), abs=1e-12)


def test_high_temperature_scaling():
    consts = PhysicalConstants()
    w = 3e11
    scaled = []
    for T in (1e2, 1e3, 1e4, 1e5):
        s = DisplacedThermal.from_temperature(w, T, 1.0, consts)
        scaled.append((1 - fidelity_mode_abs(s, 1.0)) * consts.kB * T / (consts.hbar * w))
    assert max(scaled) / min(scaled) < 1.1


def test_qfi_consistency_with_short_time(scenario):
    s = DisplacedThermal(3e11, 1.0, 1.0)
    t = time_for_phase(1e-4, s.omega, scenario)
    approx = fidelity_short_time(qfi(s), t, scenario)
    assert fidelity_mode_exact(s, t, scenario) == pytest.approx(approx, rel=1e-12)
