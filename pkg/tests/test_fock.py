import json
import math

import numpy as np
import pytest

from ionotto import (
    ConfigError,
    DimensionError,
    HBAR,
    SqueezeSpec,
    TruncationError,
    auto_dim,
    coupling_g,
    ladder_matrices,
    moments,
    radial_energy,
    squeeze,
    squeezed_thermal_moments,
    thermal_occupation,
    thermal_state,
)
from ionotto.fock import export_density_matrix, top_fraction_population, validate_state

WX = 2.0 * math.pi * 1e6
WZ = 2.0 * math.pi * 1e5

# Bose occupations at the reference frequencies, direct arithmetic
NTH_1MK_WZ = 207.8665912977148
NTH_12MK_WX = 24.50727568215782
NTH_10MK_WX = 20.340618351801
R_1MK_WX = 41.681236703602  # coth(hbar wx / 2 kB T)

# squeezed-vacuum closed forms at r = 0.5
SQVAC_N = 0.2715403174076219  # sinh^2(0.5)
SQVAC_X = -1.1752011936438014  # -sinh(1)


class TestLadder:
    def test_dim2_single_entry(self):
        a, adag, num = ladder_matrices(2)
        expect = np.zeros((2, 2))
        expect[0, 1] = 1.0
        np.testing.assert_allclose(a, expect)
        np.testing.assert_allclose(adag, expect.T)

    def test_sqrt_weights(self):
        a, _, _ = ladder_matrices(4)
        assert a[2, 3] == pytest.approx(math.sqrt(3.0), rel=1e-15)

    def test_commutator_corner(self):
        dim = 7
        a, adag, _ = ladder_matrices(dim)
        comm = a @ adag - adag @ a
        expect = np.eye(dim)
        expect[dim - 1, dim - 1] = -(dim - 1)
        np.testing.assert_allclose(comm, expect, atol=1e-12)

    def test_number_matches_ladder(self):
        a, adag, num = ladder_matrices(6)
        np.testing.assert_allclose(adag @ a, num, atol=1e-12)

    def test_small_dim_rejected(self):
        with pytest.raises(DimensionError):
            ladder_matrices(1)


class TestThermalOccupation:
    def test_doppler_axial_value(self):
        assert thermal_occupation(1e-3, WZ) == pytest.approx(NTH_1MK_WZ, rel=1e-12)

    def test_radial_bath_value(self):
        assert thermal_occupation(1.2e-3, WX) == pytest.approx(NTH_12MK_WX, rel=1e-12)

    def test_zero_temperature(self):
        assert thermal_occupation(0.0, WX) == 0.0

    def test_negative_temperature_rejected(self):
        with pytest.raises(ConfigError):
            thermal_occupation(-1e-3, WX)


class TestThermalState:
    def test_ground_state(self):
        st = thermal_state(0.0, 8)
        expect = np.zeros((8, 8))
        expect[0, 0] = 1.0
        np.testing.assert_allclose(st.rho, expect)

    def test_geometric_populations(self):
        st = thermal_state(1.0, 64)
        pops = np.real(np.diag(st.rho))
        assert pops[0] == pytest.approx(0.5, abs=1e-9)
        assert pops[1] == pytest.approx(0.25, abs=1e-9)

    def test_occupation_recovered(self):
        st = thermal_state(24.5, 512)
        m = moments(st)
        assert np.trace(st.rho).real == pytest.approx(1.0, abs=1e-12)
        assert m.N == pytest.approx(24.5, abs=1e-3)
        assert abs(m.N / 24.5 - 1.0) < 1e-4

    def test_truncation_too_small(self):
        with pytest.raises(TruncationError):
            thermal_state(2.0, 32)

    def test_invariants(self):
        st = thermal_state(3.0, 96)
        validate_state(st, check_psd=True)
        assert top_fraction_population(st) < 1e-6


class TestSqueeze:
    def test_r_zero_is_identity(self):
        st = thermal_state(1.0, 32)
        assert squeeze(st, SqueezeSpec(r=0.0)) is st

    def test_squeezed_vacuum_moments(self):
        st = thermal_state(0.0, 64)
        m = moments(squeeze(st, SqueezeSpec(r=0.5, alpha=0.0)))
        assert m.N == pytest.approx(SQVAC_N, abs=1e-10)
        assert m.X == pytest.approx(SQVAC_X, abs=1e-10)
        assert m.Y == pytest.approx(0.0, abs=1e-10)

    def test_unitarity(self):
        st = thermal_state(1.5, 128)
        sq = squeeze(st, SqueezeSpec(r=0.6, alpha=1.1))
        assert np.trace(sq.rho).real == pytest.approx(1.0, abs=1e-9)
        w0 = np.sort(np.linalg.eigvalsh(st.rho))
        w1 = np.sort(np.linalg.eigvalsh(sq.rho))
        np.testing.assert_allclose(w0, w1, atol=1e-9)

    def test_inverse_squeeze(self):
        st = thermal_state(1.0, 128)
        spec = SqueezeSpec(r=0.4, alpha=0.3)
        inv = SqueezeSpec(r=0.4, alpha=0.3 + math.pi)
        back = squeeze(squeeze(st, spec), inv)
        assert np.max(np.abs(back.rho - st.rho)) < 1e-8

    def test_heisenberg_invariant(self):
        # (2N+1)^2 - X^2 - Y^2 stays (2 n_th + 1)^2 under squeezing
        dim = 2 * auto_dim(1.0, 0.8)
        st = thermal_state(1.0, dim)
        for alpha in (0.0, 0.9, 2.5):
            m = moments(squeeze(st, SqueezeSpec(r=0.8, alpha=alpha)))
            assert m.heisenberg() == pytest.approx(9.0, abs=1e-6)

    def test_guard_raises_when_dim_too_small(self):
        st = thermal_state(2.0, 64)
        with pytest.raises(TruncationError):
            squeeze(st, SqueezeSpec(r=1.0))

    def test_closed_form_moments_match_matrix(self):
        dim = 2 * auto_dim(1.5, 0.7)
        st = thermal_state(1.5, dim)
        spec = SqueezeSpec(r=0.7, alpha=1.9)
        m_mat = moments(squeeze(st, spec))
        m_cf = squeezed_thermal_moments(1.5, spec)
        assert m_mat.X == pytest.approx(m_cf.X, rel=1e-6)
        assert m_mat.Y == pytest.approx(m_cf.Y, rel=1e-6)
        assert m_mat.N == pytest.approx(m_cf.N, rel=1e-6)

    def test_negative_r_rejected(self):
        with pytest.raises(ConfigError):
            SqueezeSpec(r=-0.1)


class TestMoments:
    def test_thermal_diagonal(self):
        st = thermal_state(2.5, 96)
        m = moments(st)
        assert m.X == 0.0
        assert m.Y == 0.0
        assert m.R == pytest.approx(2.0 * m.N + 1.0, rel=1e-14)

    def test_thermal_R_matches_coth(self):
        n = thermal_occupation(1e-3, WX)
        st = thermal_state(n, 512)
        assert moments(st).R == pytest.approx(R_1MK_WX, rel=1e-5)

    def test_squeezed_vacuum_R(self):
        for r in (0.3, 0.8):
            st = squeeze(thermal_state(0.0, 128), SqueezeSpec(r=r, alpha=0.0))
            assert moments(st).R == pytest.approx(math.exp(-2.0 * r), rel=1e-8)

    def test_minimum_quadrature_bound(self):
        # R >= e^{-2r} (2 n_th + 1) over the squeeze phase
        n_th, r = 1.0, 0.6
        lo = math.exp(-2.0 * r) * (2.0 * n_th + 1.0)
        for alpha in np.linspace(0.0, 2.0 * math.pi, 9):
            m = squeezed_thermal_moments(n_th, SqueezeSpec(r=r, alpha=float(alpha)))
            assert m.R >= lo - 1e-12


class TestRadialEnergy:
    def test_vacuum(self, trap):
        st = thermal_state(0.0, 16)
        assert radial_energy(st, 0.0, trap) == pytest.approx(0.5 * HBAR * WX, rel=1e-12)

    def test_thermal_at_center(self, trap):
        st = thermal_state(5.0, 128)
        e = radial_energy(st, 0.0, trap)
        assert e == pytest.approx(HBAR * WX * (moments(st).N + 0.5), rel=1e-12)

    def test_coupling_term(self, trap):
        st = thermal_state(10.0, 256)
        z = -1.1e-6
        m = moments(st)
        expect = HBAR * WX * (m.N + 0.5) + coupling_g(z, trap) * m.R
        assert radial_energy(st, z, trap) == pytest.approx(expect, rel=1e-12)


def test_auto_dim_covers_guards():
    for n_th, r in ((0.0, 0.0), (1.8283, 0.5), (1.8283, 1.5), (24.51, 0.0)):
        dim = auto_dim(n_th, r)
        st = thermal_state(n_th, dim)
        if r > 0.0:
            st = squeeze(st, SqueezeSpec(r=r))
        assert top_fraction_population(st) < 1e-6


def test_export_roundtrip(tmp_path):
    st = squeeze(thermal_state(0.5, 48), SqueezeSpec(r=0.2, alpha=0.4))
    path = tmp_path / "rho.json"
    export_density_matrix(st, path, abs_tol=0.0)
    doc = json.loads(path.read_text())
    assert doc["dim"] == 48
    rebuilt = np.zeros((48, 48), dtype=complex)
    for i, j, re, im in doc["entries"]:
        rebuilt[i, j] = re + 1j * im
    np.testing.assert_allclose(rebuilt, st.rho, atol=1e-15)
