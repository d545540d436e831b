"""Classical axial oscillator: tapered-trap force and Verlet stepping.

The radial pressure of the working medium pushes the ion along the taper
with a force proportional to R = <X + 2N + 1>.  Two force models are
exposed: the small-displacement approximation

    F = -m wz^2 z + gamma hbar wx0 R

and the "exact" variant keeping the (1 + gamma z)^-5 taper factor on the
coupling term.  (The derivative of R with respect to z is a state
functional with no explicit position dependence in the mean-field loop and
is not modelled.)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import OutOfTaperError
from .params import HBAR, TrapConfig, derive_params

__all__ = ["FlywheelState", "ForceModel", "axial_force", "verlet_step", "axial_energy"]


class ForceModel(enum.Enum):
    APPROXIMATE = "approximate"
    EXACT = "exact"


@dataclass(frozen=True)
class FlywheelState:
    z: float  # m
    v: float  # m/s
    t: float  # s


def axial_force(
    z: float,
    R: float,
    cfg: TrapConfig,
    model: ForceModel = ForceModel.APPROXIMATE,
    mode_factor: float = 1.0,
) -> float:
    """Total axial force in newtons; ``mode_factor=2`` when both radial
    modes thermalize and push."""
    gamma = derive_params(cfg).gamma
    u = 1.0 + gamma * z
    if u <= 0.0:
        raise OutOfTaperError(f"1 + gamma z = {u:.3e} <= 0 at z = {z:.3e} m")
    coupling = mode_factor * gamma * HBAR * cfg.omega_x0 * R
    if model is ForceModel.EXACT:
        coupling /= u ** 5
    return -cfg.mass * cfg.omega_z ** 2 * z + coupling


def verlet_step(s: FlywheelState, force_fn, dt: float, mass: float) -> FlywheelState:
    """One velocity-Verlet step: half-kick, drift, half-kick.

    Symmetric and time-reversible; for conservative forces the energy error
    oscillates without secular drift.
    """
    a0 = force_fn(s.z) / mass
    vh = s.v + 0.5 * dt * a0
    z1 = s.z + dt * vh
    a1 = force_fn(z1) / mass
    return FlywheelState(z=z1, v=vh + 0.5 * dt * a1, t=s.t + dt)


def axial_energy(s: FlywheelState, cfg: TrapConfig) -> float:
    """Kinetic plus harmonic potential energy of the flywheel, joules."""
    return 0.5 * cfg.mass * s.v ** 2 + 0.5 * cfg.mass * cfg.omega_z ** 2 * s.z ** 2


def harmonic_energy_drift(
    z0: float, v0: float, omega: float, dt: float, nsteps: int
) -> float:
    """Max relative energy error over a long harmonic Verlet run (kernel-backed)."""
    from . import backends

    _, _, drift = backends.verlet_harmonic(float(z0), float(v0), omega * omega, dt, nsteps)
    if math.isnan(drift):
        raise OutOfTaperError("harmonic run diverged")
    return drift
