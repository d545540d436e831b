import math

import numpy as np
import pytest

from ionotto import (
    ConfigError,
    GrowthMode,
    HBAR,
    K_BOLTZMANN,
    OutOfTaperError,
    SqueezeSpec,
    amplification,
    delta_z,
    delta_z_squeezed,
    protocol_amplitude,
    radial_frequency,
    squeeze_quantum_threshold,
    stroboscopic_positions,
    thermal_R,
    thermal_occupation,
)
from ionotto.analytics import equilibrium_displacement

# frozen oracle values (direct arithmetic with the reference geometry)
R_1MK = 41.681236703602
DZ_EXACT_12_10 = -2.4315004416216187e-10  # T1=1.2 mK -> T2=1.0 mK
DZ_HIGHT_02 = 2.4318893834726113e-10  # dT = +0.2 mK
AMP_1E5_01MK = 2.431465086655321e-05  # 2e5 * delta_z(1.0 -> 1.1 mK)
NTH_011MK = 1.8282711799550726
RSTAR_011MK = 1.1157101852200422


class TestRadialFrequency:
    def test_center(self, trap, ctx):
        assert radial_frequency(0.0, ctx) == trap.omega_x0

    def test_quarter_at_r0_over_tan(self, trap, ctx):
        z = 1.0 / ctx.derived.gamma  # r0 / tan(theta)
        assert radial_frequency(z, ctx) == pytest.approx(trap.omega_x0 / 4.0, rel=1e-12)

    def test_taper_position(self, trap, ctx):
        assert radial_frequency(-1.1e-6, ctx) == pytest.approx(
            trap.omega_x0 * 1.0012713816176355, rel=1e-12
        )

    def test_out_of_taper(self, ctx):
        with pytest.raises(OutOfTaperError):
            radial_frequency(-1.0 / ctx.derived.gamma, ctx)


class TestThermalR:
    def test_zero_temperature(self, ctx):
        assert thermal_R(0.0, ctx) == 1.0

    def test_high_t_limit(self, trap, ctx):
        T = 50e-3
        classical = 2.0 * K_BOLTZMANN * T / (HBAR * trap.omega_x0)
        assert thermal_R(T, ctx) == pytest.approx(classical, rel=1e-3)

    def test_reference_value(self, ctx):
        assert thermal_R(1e-3, ctx) == pytest.approx(R_1MK, rel=1e-12)

    def test_matches_occupation(self, trap, ctx):
        n = thermal_occupation(0.3e-3, trap.omega_x0)
        assert thermal_R(0.3e-3, ctx) == pytest.approx(2.0 * n + 1.0, rel=1e-12)


class TestStroboscopic:
    def test_initial(self, ctx):
        assert stroboscopic_positions(0, -1.1e-6, 1.2e-3, 1.0e-3, ctx) == -1.1e-6

    def test_first_odd_equal_baths(self, ctx):
        z0 = -1.1e-6
        d1 = equilibrium_displacement(thermal_R(1e-3, ctx), ctx)
        assert stroboscopic_positions(1, z0, 1e-3, 1e-3, ctx) == pytest.approx(
            -z0 + 2.0 * d1, rel=1e-12
        )

    def test_even_branch_linear(self, ctx):
        vals = [stroboscopic_positions(n, 0.0, 1.2e-3, 1.0e-3, ctx) for n in (0, 2, 4, 6, 8)]
        incs = np.diff(vals)
        np.testing.assert_allclose(incs, incs[0], rtol=1e-12)

    def test_negative_index_rejected(self, ctx):
        with pytest.raises(ConfigError):
            stroboscopic_positions(-1, 0.0, 1e-3, 1e-3, ctx)


class TestDeltaZ:
    def test_zero_at_equal_temperature(self, ctx):
        assert delta_z(1e-3, 1e-3, ctx) == 0.0

    def test_exact_reference(self, ctx):
        assert delta_z(1.2e-3, 1.0e-3, ctx) == pytest.approx(DZ_EXACT_12_10, rel=1e-12)

    def test_high_t_reference(self, ctx):
        assert delta_z(1.0e-3, 1.2e-3, ctx, GrowthMode.HIGH_T) == pytest.approx(
            DZ_HIGHT_02, rel=1e-12
        )

    def test_sign_follows_temperature_difference(self, ctx):
        assert delta_z(1.0e-3, 1.2e-3, ctx) > 0
        assert delta_z(1.2e-3, 1.0e-3, ctx) < 0

    def test_exact_to_high_t_convergence(self, trap, ctx):
        # relative gap shrinks as (hbar wx / 2 kB T)^2 / 3
        dT = 0.2e-3
        for base in (1e-3, 3e-3, 10e-3):
            ex = delta_z(base, base + dT, ctx)
            ht = delta_z(base, base + dT, ctx, GrowthMode.HIGH_T)
            x = HBAR * trap.omega_x0 / (2.0 * K_BOLTZMANN * base)
            assert abs(ex / ht - 1.0) < x * x / 3.0

    def test_exact_vs_hight_at_reference_base(self, ctx):
        ex = abs(delta_z(1.2e-3, 1.0e-3, ctx))
        ht = abs(delta_z(1.2e-3, 1.0e-3, ctx, GrowthMode.HIGH_T))
        assert abs(ex / ht - 1.0) < 1e-3


class TestProtocolAmplitude:
    def test_reference_value(self, ctx):
        assert protocol_amplitude(100000, 1.0e-3, 1.1e-3, ctx) == pytest.approx(
            AMP_1E5_01MK, rel=1e-12
        )

    def test_zero(self, ctx):
        assert protocol_amplitude(10, 1e-3, 1e-3, ctx) == 0.0

    def test_sign_flip(self, ctx):
        plus = protocol_amplitude(10, 1e-3, 1.1e-3, ctx)
        minus = protocol_amplitude(10, 1.1e-3, 1e-3, ctx)
        assert plus == pytest.approx(-minus, rel=1e-9)

    def test_base_independence(self, ctx):
        dT = 0.1e-3
        a_warm = protocol_amplitude(1000, 1.0e-3, 1.0e-3 + dT, ctx)
        a_cold = protocol_amplitude(1000, 0.2e-3, 0.2e-3 + dT, ctx)
        assert abs(a_cold / a_warm - 1.0) < 0.02


class TestAmplification:
    def test_unity_at_zero(self):
        assert amplification(0.0, 0.0, 10.0) == 1.0

    def test_reference_values(self):
        assert amplification(1.13, 0.0, 10.0) == pytest.approx(4.855597944408705, rel=1e-12)
        assert amplification(1.5, 0.0, 10.0) == pytest.approx(10.092769451736187, rel=1e-12)

    def test_monotone_in_r(self):
        rs = np.linspace(0.0, 2.0, 20)
        vals = [amplification(float(r), 0.0, 10.0) for r in rs]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_decreasing_in_kappa(self):
        vals = [amplification(1.0, 0.0, k) for k in (2.0, 5.0, 10.0, 50.0)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_large_r_asymptote(self):
        kappa = 10.0
        r = 8.0
        limit = 0.5 * (1.0 + 1.0 / (4.0 * kappa**2 - 1.0))
        assert amplification(r, 0.0, kappa) / math.exp(2.0 * r) == pytest.approx(limit, rel=1e-6)

    def test_kappa_bound(self):
        with pytest.raises(ConfigError):
            amplification(1.0, 0.0, 0.4)


class TestDeltaZSqueezed:
    def test_reduces_to_delta_z(self, ctx):
        dz = delta_z_squeezed(0.11e-3, 0.10e-3, SqueezeSpec(r=0.0), ctx)
        assert dz == pytest.approx(delta_z(0.11e-3, 0.10e-3, ctx), rel=1e-12)

    def test_quarter_phase(self, ctx):
        r = 0.8
        dz = delta_z_squeezed(0.11e-3, 0.10e-3, SqueezeSpec(r=r, alpha=math.pi / 2.0), ctx)
        assert dz == pytest.approx(
            math.cosh(2.0 * r) * delta_z(0.11e-3, 0.10e-3, ctx), rel=1e-12
        )

    def test_reference_amplification(self, ctx):
        spec = SqueezeSpec(r=1.5, alpha=0.0)
        dz = delta_z_squeezed(0.11e-3, 0.10e-3, spec, ctx)
        assert dz / delta_z(0.11e-3, 0.10e-3, ctx) == pytest.approx(
            10.092769451736187, rel=1e-10
        )

    def test_high_t_variant_scales_with_dT(self, ctx):
        spec = SqueezeSpec(r=1.0)
        a = delta_z_squeezed(1e-3, 1.1e-3, spec, ctx, GrowthMode.HIGH_T)
        b = delta_z_squeezed(1e-3, 1.2e-3, spec, ctx, GrowthMode.HIGH_T)
        assert b == pytest.approx(2.0 * a, rel=1e-12)


class TestQuantumThreshold:
    def test_vacuum(self):
        assert squeeze_quantum_threshold(0.0) == pytest.approx(0.5 * math.log(2.0), rel=1e-14)

    def test_threshold_band(self, trap):
        n_th = thermal_occupation(0.11e-3, trap.omega_x0)
        assert n_th == pytest.approx(NTH_011MK, rel=1e-12)
        r_star = squeeze_quantum_threshold(n_th)
        assert r_star == pytest.approx(RSTAR_011MK, rel=1e-12)
        assert 1.07 <= r_star <= 1.14

    def test_negative_rejected(self):
        with pytest.raises(ConfigError):
            squeeze_quantum_threshold(-0.5)
