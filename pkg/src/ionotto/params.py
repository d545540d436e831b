"""Physical constants, trap configuration and derived engine parameters.

Lab-unit inputs (amu, Hz, degrees) are converted to SI once, at
construction; every other module works in SI only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

__all__ = [
    "HBAR",
    "K_BOLTZMANN",
    "ATOMIC_MASS_UNIT",
    "PhysicalConstants",
    "TrapConfig",
    "DerivedParams",
    "derive_params",
]

# CODATA 2018
HBAR = 1.054571817e-34  # J s
K_BOLTZMANN = 1.380649e-23  # J/K
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR
    k_boltzmann: float = K_BOLTZMANN
    atomic_mass_unit: float = ATOMIC_MASS_UNIT


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class TrapConfig:
    """Tapered-trap geometry and frequencies, all SI.

    ``omega_x0`` is the radial (x) angular frequency at ``z = 0``;
    the taper makes the radial frequency z-dependent,
    ``omega_x(z) = omega_x0 / (1 + tan(theta) z / r0)^2``.
    """

    mass: float  # kg
    omega_x0: float  # rad/s
    omega_z: float  # rad/s
    taper_angle_theta: float  # rad
    r0: float  # m

    def __post_init__(self):
        for name in ("mass", "omega_x0", "omega_z", "taper_angle_theta", "r0"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise ConfigError(f"TrapConfig.{name} must be finite and > 0, got {v!r}")
        if not self.taper_angle_theta < math.pi / 2:
            raise ConfigError(
                f"taper_angle_theta must lie in (0, pi/2), got {self.taper_angle_theta!r}"
            )
        if not self.omega_x0 > self.omega_z:
            raise ConfigError(
                "radial confinement must be stronger than axial "
                f"(omega_x0={self.omega_x0!r} <= omega_z={self.omega_z!r})"
            )

    @classmethod
    def from_lab(
        cls,
        mass_amu: float,
        omega_x0_hz: float,
        omega_z_hz: float,
        theta_deg: float,
        r0_m: float,
    ) -> "TrapConfig":
        """Build from laboratory units: amu, ordinary frequency in Hz, degrees."""
        return cls(
            mass=mass_amu * ATOMIC_MASS_UNIT,
            omega_x0=2.0 * math.pi * omega_x0_hz,
            omega_z=2.0 * math.pi * omega_z_hz,
            taper_angle_theta=math.radians(theta_deg),
            r0=r0_m,
        )


@dataclass(frozen=True)
class DerivedParams:
    gamma: float  # 1/m, taper strength tan(theta)/r0
    kappa: float  # omega_x0 / omega_z
    tau_z: float  # s, half axial period pi/omega_z


def derive_params(cfg: TrapConfig) -> DerivedParams:
    """Derived engine parameters: gamma = tan(theta)/r0, kappa = wx0/wz, tau_z = pi/wz."""
    return DerivedParams(
        gamma=math.tan(cfg.taper_angle_theta) / cfg.r0,
        kappa=cfg.omega_x0 / cfg.omega_z,
        tau_z=math.pi / cfg.omega_z,
    )


def reference_trap() -> TrapConfig:
    """The default 40Ca+ tapered-trap configuration used throughout the tests."""
    return TrapConfig.from_lab(
        mass_amu=40.0, omega_x0_hz=1e6, omega_z_hz=1e5, theta_deg=30.0, r0_m=1e-3
    )
