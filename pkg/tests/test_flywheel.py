import math

import pytest

from ionotto import (
    ForceModel,
    FlywheelState,
    K_BOLTZMANN,
    OutOfTaperError,
    axial_energy,
    axial_force,
    verlet_step,
)
from ionotto.flywheel import harmonic_energy_drift

TAU_Z = 5e-6

# gamma * hbar * wx0 * 50 with the reference geometry
FORCE_Z0_R50 = 1.9127816912139234e-23
# (1 + gamma z)^-5 at z = -1.1 um
EXACT_OVER_APPROX_M11UM = 1.0031814854572307


class TestAxialForce:
    def test_zero(self, trap):
        assert axial_force(0.0, 0.0, trap) == 0.0

    def test_coupling_at_center(self, trap):
        assert axial_force(0.0, 50.0, trap) == pytest.approx(FORCE_Z0_R50, rel=1e-12)

    def test_exact_vs_approximate_ratio(self, trap, ctx):
        z = -1.1e-6
        harm = -trap.mass * trap.omega_z**2 * z
        fa = axial_force(z, 50.0, trap, ForceModel.APPROXIMATE) - harm
        fe = axial_force(z, 50.0, trap, ForceModel.EXACT) - harm
        assert fe / fa == pytest.approx(EXACT_OVER_APPROX_M11UM, rel=1e-12)

    def test_linear_in_R(self, trap):
        f1 = axial_force(2e-7, 10.0, trap)
        f2 = axial_force(2e-7, 30.0, trap)
        f0 = axial_force(2e-7, 0.0, trap)
        assert f2 - f0 == pytest.approx(3.0 * (f1 - f0), rel=1e-14)

    def test_first_order_agreement(self, trap, ctx):
        # exact and approximate coupling agree to first order in gamma z
        for z in (-1e-5, -1e-6, 1e-6, 1e-5):
            gz = ctx.derived.gamma * z
            harm = -trap.mass * trap.omega_z**2 * z
            fa = axial_force(z, 40.0, trap, ForceModel.APPROXIMATE) - harm
            fe = axial_force(z, 40.0, trap, ForceModel.EXACT) - harm
            assert abs(fe / fa - 1.0) < 6.0 * abs(gz)

    def test_mode_factor_doubles(self, trap):
        one = axial_force(0.0, 40.0, trap, mode_factor=1.0)
        two = axial_force(0.0, 40.0, trap, mode_factor=2.0)
        assert two == pytest.approx(2.0 * one, rel=1e-14)

    def test_out_of_taper(self, trap, ctx):
        with pytest.raises(OutOfTaperError):
            axial_force(-1.01 / ctx.derived.gamma, 40.0, trap)


class TestVerlet:
    def test_free_drift(self, trap):
        s = verlet_step(FlywheelState(0.0, 1.0, 0.0), lambda z: 0.0, 1e-6, trap.mass)
        assert s.z == pytest.approx(1e-6, rel=1e-15)
        assert s.v == 1.0
        assert s.t == 1e-6

    def test_harmonic_period_return(self, trap):
        w = trap.omega_z
        k = trap.mass * w * w
        dt = TAU_Z / 1000.0
        s = FlywheelState(1e-6, 0.0, 0.0)
        for _ in range(2000):  # one full period
            s = verlet_step(s, lambda z: -k * z, dt, trap.mass)
        assert s.z == pytest.approx(1e-6, rel=1e-6)
        # Verlet phase error per period is 2 pi (w dt)^2 / 24 ~ 2.6e-6
        assert abs(s.v) < 5e-6 * w * 1e-6

    def test_time_reversibility(self, trap):
        k = trap.mass * trap.omega_z**2
        dt = TAU_Z / 500.0
        s0 = FlywheelState(7e-7, 0.13, 0.0)
        s = s0
        for _ in range(100):
            s = verlet_step(s, lambda z: -k * z, dt, trap.mass)
        for _ in range(100):
            s = verlet_step(s, lambda z: -k * z, -dt, trap.mass)
        assert s.z == pytest.approx(s0.z, abs=1e-18)
        assert s.v == pytest.approx(s0.v, abs=1e-13)

    def test_no_secular_energy_drift(self, trap):
        # 1e6 steps at tau_z/1000: relative energy error stays bounded
        drift = harmonic_energy_drift(1e-6, 0.0, trap.omega_z, TAU_Z / 1000.0, 1_000_000)
        assert drift < 1e-4


class TestAxialEnergy:
    def test_rest(self, trap):
        assert axial_energy(FlywheelState(0.0, 0.0, 0.0), trap) == 0.0

    def test_equipartition(self, trap):
        t0 = 1e-3
        z_rms = math.sqrt(K_BOLTZMANN * t0 / (trap.mass * trap.omega_z**2))
        e = axial_energy(FlywheelState(z_rms, 0.0, 0.0), trap)
        assert e == pytest.approx(0.5 * K_BOLTZMANN * t0, rel=1e-12)
        assert e == pytest.approx(6.903245e-27, rel=1e-6)
