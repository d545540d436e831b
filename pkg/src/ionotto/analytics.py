"""Closed-form predictions for the engine and the measurement protocol.

Everything here is stateless arithmetic on the trap parameters: the local
radial frequency along the taper, the stroboscopic contact positions, the
per-cycle amplitude growth (with and without squeezing), the protocol
amplitude, the squeezing amplification factor and the nonclassicality
threshold.  The engine tests use these as oracles; the thermometry module
uses them as its fast path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, OutOfTaperError
from .fock import SqueezeSpec, thermal_occupation
from .params import HBAR, K_BOLTZMANN, DerivedParams, TrapConfig, derive_params

__all__ = [
    "AnalyticContext",
    "make_context",
    "GrowthMode",
    "radial_frequency",
    "thermal_R",
    "stroboscopic_positions",
    "delta_z",
    "protocol_amplitude",
    "delta_z_squeezed",
    "amplification",
    "squeeze_quantum_threshold",
    "equilibrium_displacement",
]


class GrowthMode(Enum):
    EXACT = "exact"
    HIGH_T = "high_t"


@dataclass(frozen=True)
class AnalyticContext:
    trap: TrapConfig
    derived: DerivedParams

    @property
    def m_wz2(self) -> float:
        return self.trap.mass * self.trap.omega_z ** 2


def make_context(trap: TrapConfig) -> AnalyticContext:
    return AnalyticContext(trap=trap, derived=derive_params(trap))


def radial_frequency(z: float, ctx: AnalyticContext) -> float:
    """Local radial frequency wx0/(1 + gamma z)^2 along the taper."""
    u = 1.0 + ctx.derived.gamma * z
    if u <= 0.0:
        raise OutOfTaperError(f"1 + gamma z = {u:.3e} <= 0 at z = {z:.3e} m")
    return ctx.trap.omega_x0 / (u * u)


def thermal_R(T: float, ctx: AnalyticContext) -> float:
    """R = coth(hbar wx0 / 2 kB T) of a thermal state; 1 at T = 0."""
    if T < 0.0:
        raise ConfigError(f"temperature must be >= 0, got {T!r}")
    if T == 0.0:
        return 1.0
    return 1.0 / math.tanh(HBAR * ctx.trap.omega_x0 / (2.0 * K_BOLTZMANN * T))


def equilibrium_displacement(R: float, ctx: AnalyticContext) -> float:
    """Displaced axial equilibrium gamma hbar wx0 R / (m wz^2) for given R."""
    return ctx.derived.gamma * HBAR * ctx.trap.omega_x0 * R / ctx.m_wz2


def stroboscopic_positions(
    n: int,
    z0: float,
    T1: float,
    T2: float,
    ctx: AnalyticContext,
    squeeze: SqueezeSpec | None = None,
) -> float:
    """Contact position z_n: the half-period evolution about the displaced
    equilibrium of the active bath reflects z about it, so

        z_n = z0 + n (D2 - D1)                       n even
        z_n = -z0 + 2 D1 - (n - 1)(D2 - D1)          n odd

    with D_i the equilibrium displacement of bath i.  When both contacts
    are followed by the same squeeze pulse, the effective reflection point
    scales by the amplification factor and the same map holds with
    D_i -> A(r, alpha, kappa) D_i."""
    if n < 0:
        raise ConfigError(f"contact index must be >= 0, got {n}")
    amp = 1.0
    if squeeze is not None and squeeze.r > 0.0:
        amp = amplification(squeeze.r, squeeze.alpha, ctx.derived.kappa)
    d1 = amp * equilibrium_displacement(thermal_R(T1, ctx), ctx)
    d2 = amp * equilibrium_displacement(thermal_R(T2, ctx), ctx)
    if n % 2 == 0:
        return z0 + n * (d2 - d1)
    return -z0 + 2.0 * d1 - (n - 1) * (d2 - d1)


def delta_z(T1: float, T2: float, ctx: AnalyticContext, mode: GrowthMode = GrowthMode.EXACT) -> float:
    """Growth of consecutive same-branch peaks, z_{n+2} - z_n.

    EXACT: (2 hbar wx0 gamma / m wz^2)(R2 - R1); HIGH_T replaces the R
    difference by its classical limit, (4 kB gamma / m wz^2)(T2 - T1).
    The sign follows T2 - T1.
    """
    if mode is GrowthMode.HIGH_T:
        return 4.0 * K_BOLTZMANN * ctx.derived.gamma / ctx.m_wz2 * (T2 - T1)
    r1 = thermal_R(T1, ctx)
    r2 = thermal_R(T2, ctx)
    return 2.0 * HBAR * ctx.trap.omega_x0 * ctx.derived.gamma / ctx.m_wz2 * (r2 - r1)


def protocol_amplitude(N: int, T1: float, T2: float, ctx: AnalyticContext) -> float:
    """Mean measured separation of the two protocol sets after N cycles:
    2 N delta_z."""
    if N < 1:
        raise ConfigError(f"cycle count must be >= 1, got {N}")
    return 2.0 * N * delta_z(T1, T2, ctx, GrowthMode.EXACT)


def amplification(r: float, alpha: float = 0.0, kappa: float = 10.0) -> float:
    """Squeezing amplification of the per-cycle growth:
    cosh(2r) + sinh(2r) cos(alpha) / (4 kappa^2 - 1); 1 at r = 0."""
    if kappa <= 0.5:
        raise ConfigError(f"kappa must exceed 1/2, got {kappa!r}")
    return math.cosh(2.0 * r) + math.sinh(2.0 * r) * math.cos(alpha) / (4.0 * kappa ** 2 - 1.0)


def delta_z_squeezed(
    T1: float,
    T2: float,
    spec: SqueezeSpec,
    ctx: AnalyticContext,
    mode: GrowthMode = GrowthMode.EXACT,
) -> float:
    """Per-cycle growth when both bath contacts are followed by S(r e^{i alpha}).

    EXACT: (4 kappa gamma hbar / m wz) * A(r, alpha, kappa) * (n2 - n1);
    HIGH_T: (4 kB gamma / m wz^2) * A * (T2 - T1).  Ordered so r = 0
    reduces to ``delta_z`` (same T2 - T1 sign convention).
    """
    amp = amplification(spec.r, spec.alpha, ctx.derived.kappa)
    if mode is GrowthMode.HIGH_T:
        return amp * 4.0 * K_BOLTZMANN * ctx.derived.gamma / ctx.m_wz2 * (T2 - T1)
    wx = ctx.trap.omega_x0
    n1 = thermal_occupation(T1, wx)
    n2 = thermal_occupation(T2, wx)
    return 4.0 * ctx.derived.kappa * ctx.derived.gamma * HBAR / (ctx.trap.mass * ctx.trap.omega_z) * amp * (n2 - n1)


def squeeze_quantum_threshold(n_th: float) -> float:
    """Squeeze amplitude above which one quadrature variance drops below
    the vacuum value 1/4 and the Glauber-Sudarshan distribution turns
    negative: r* = ln(2 (2 n_th + 1)) / 2."""
    if n_th < 0.0:
        raise ConfigError(f"n_th must be >= 0, got {n_th!r}")
    return 0.5 * math.log(2.0 * (2.0 * n_th + 1.0))
