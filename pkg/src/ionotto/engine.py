"""The coupled four-stroke engine loop.

One run alternates instantaneous bath contacts (thermal state replacement,
optionally followed by a squeeze pulse) with half an axial period of
isolated coupled evolution.  Bath 1 acts at even contact indices
(0, 2, ...), bath 2 at odd ones; contacts are counted 0..2*n_cycles, so a
run holds 2*n_cycles + 1 stroboscopic peak positions.

Between contacts the mean-field loop advances, per time step dt:
read R off the quantum state, move (z, v) one Verlet step with that force,
then propagate the quantum state for dt under the Hamiltonian at the new
position.  Two interchangeable quantum backends implement the propagation:
the full density matrix (Newton propagator) and the closed Gaussian-moment
system; for the quadratic Hamiltonian the two agree to tolerance, and the
moment path is orders of magnitude faster.

The quantum state is thermalized in a single step at each contact; no
continuous dissipator acts during the strokes.  Energy bookkeeping per
cycle: the thermalization jumps are heats, squeeze jumps are work input,
and the flywheel gain must close against them (the first contact
initializes the medium, so its heat is reported as zero plus any squeeze
work).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import backends
from .errors import ConfigError, OutOfTaperError
from .fock import (
    GaussianMoments,
    RadialState,
    SqueezeSpec,
    auto_dim,
    moments,
    squeeze,
    squeezed_thermal_moments,
    thermal_occupation,
    thermal_state,
)
from .flywheel import ForceModel, FlywheelState, axial_force, verlet_step
from .params import HBAR, TrapConfig, derive_params
from .propagator import (
    DEFAULT_NEWTON,
    NewtonConfig,
    NewtonWorkspace,
    PropagationStep,
    coupling_g,
    newton_propagate,
)

__all__ = [
    "QuantumBackend",
    "BathSpec",
    "EngineConfig",
    "EngineTrace",
    "thermalize",
    "run_engine",
    "peak_positions",
    "peak_branches",
    "write_trace_csv",
    "write_peaks_csv",
    "write_cycle_ledger_csv",
]

TRACE_COLUMNS = ("t_s", "z_m", "v_mps", "E_fly_J", "E_wm_J", "R", "X", "Y", "N")
LEDGER_COLUMNS = (
    "cycle",
    "q_bath1_J",
    "q_bath2_J",
    "w_squeeze_J",
    "dE_wm_J",
    "dE_fly_J",
    "residual_J",
)


class QuantumBackend(enum.Enum):
    DENSITY_MATRIX = "density"
    MOMENTS = "moments"


@dataclass(frozen=True)
class BathSpec:
    temperature: float  # K
    squeeze_after: SqueezeSpec | None = None

    def __post_init__(self):
        if self.temperature < 0.0:
            raise ConfigError(f"bath temperature must be >= 0, got {self.temperature!r}")


@dataclass(frozen=True)
class EngineConfig:
    trap: TrapConfig
    bath_1: BathSpec
    bath_2: BathSpec
    n_cycles: int
    dt: float  # s, must divide tau_z
    dim: int | None = None  # None -> auto-sized for the baths
    force_model: ForceModel = ForceModel.APPROXIMATE
    quantum_backend: QuantumBackend = QuantumBackend.DENSITY_MATRIX
    initial: tuple[float, float] = (0.0, 0.0)  # (z0 m, v0 m/s)
    radial_mode_count: int = 1
    newton: NewtonConfig = field(default_factory=lambda: DEFAULT_NEWTON)
    record_from: float = 0.0  # record trace samples only for t >= this

    def __post_init__(self):
        if self.n_cycles < 1:
            raise ConfigError(f"n_cycles must be >= 1, got {self.n_cycles}")
        if self.radial_mode_count not in (1, 2):
            raise ConfigError(f"radial_mode_count must be 1 or 2, got {self.radial_mode_count}")
        tau_z = derive_params(self.trap).tau_z
        steps = tau_z / self.dt
        if abs(steps - round(steps)) > 1e-6 * steps or round(steps) < 1:
            raise ConfigError(
                f"dt = {self.dt!r} must divide tau_z = {tau_z!r} (got {steps!r} steps)"
            )

    @classmethod
    def with_steps(cls, trap: TrapConfig, steps_per_halfcycle: int = 2000, **kw) -> "EngineConfig":
        tau_z = derive_params(trap).tau_z
        return cls(trap=trap, dt=tau_z / steps_per_halfcycle, **kw)

    def steps_per_halfcycle(self) -> int:
        return round(derive_params(self.trap).tau_z / self.dt)

    def resolve_dim(self) -> int:
        if self.dim is not None:
            return self.dim
        wx = self.trap.omega_x0
        n_max = max(
            thermal_occupation(self.bath_1.temperature, wx),
            thermal_occupation(self.bath_2.temperature, wx),
        )
        r_max = max(
            self.bath_1.squeeze_after.r if self.bath_1.squeeze_after else 0.0,
            self.bath_2.squeeze_after.r if self.bath_2.squeeze_after else 0.0,
        )
        dim = auto_dim(n_max, r_max)
        if dim > 4096:
            raise ConfigError(
                f"auto-sized Fock dimension {dim} is impractical for the "
                "density-matrix backend (hot baths plus strong squeezing); "
                "lower the temperatures or use the moments backend"
            )
        return dim


@dataclass
class EngineTrace:
    """Time series, stroboscopic peaks and the per-cycle energy ledger."""

    samples: np.ndarray  # (nsamples, 9), columns TRACE_COLUMNS
    peaks: np.ndarray  # (2*n_cycles + 1, 2), columns (n, z_m)
    cycle_ledger: np.ndarray  # (n_cycles, 7), columns LEDGER_COLUMNS
    config: EngineConfig


def thermalize(state: RadialState | None, bath: BathSpec, cfg: TrapConfig, dim: int | None = None) -> RadialState:
    """Instantaneous bath contact: replace with the bath thermal state (at
    the dimension of the incoming state) and apply the optional squeeze."""
    if dim is None:
        if state is None:
            raise ConfigError("thermalize needs a state or an explicit dim")
        dim = state.dim
    n_th = thermal_occupation(bath.temperature, cfg.omega_x0)
    out = thermal_state(n_th, dim)
    if bath.squeeze_after is not None and bath.squeeze_after.r > 0.0:
        out = squeeze(out, bath.squeeze_after)
    return out


def _e_wm(mom: GaussianMoments, z: float, cfg: TrapConfig) -> float:
    return HBAR * cfg.omega_x0 * (mom.N + 0.5) + coupling_g(z, cfg) * mom.R


def run_engine(cfg: EngineConfig, skip_contacts: frozenset[int] = frozenset()) -> EngineTrace:
    """Run 2*n_cycles half-cycles from the initial flywheel condition.

    ``skip_contacts`` suppresses the state replacement at the listed contact
    indices (used by the measurement protocol's skipped bath interaction);
    the peak position is still recorded there.
    """
    if 0 in skip_contacts:
        raise ConfigError("the initial bath contact cannot be skipped")
    trap = cfg.trap
    der = derive_params(trap)
    tau_z = der.tau_z
    nsteps = cfg.steps_per_halfcycle()
    dt = tau_z / nsteps
    mass = trap.mass
    wx = trap.omega_x0
    wz2 = trap.omega_z ** 2
    mode_factor = float(cfg.radial_mode_count)
    exact = cfg.force_model is ForceModel.EXACT
    density = cfg.quantum_backend is QuantumBackend.DENSITY_MATRIX
    dim = cfg.resolve_dim() if density else None
    work = NewtonWorkspace(dim) if density else None

    n_contacts = 2 * cfg.n_cycles + 1
    z, v = cfg.initial
    peaks = np.empty((n_contacts, 2))
    t_blocks: list[np.ndarray] = []
    d_blocks: list[np.ndarray] = []

    # per-contact bookkeeping for the ledger
    e_wm_pre = np.empty(n_contacts)  # before thermalization
    e_wm_thermal = np.empty(n_contacts)  # after thermalization, before squeeze
    e_wm_post = np.empty(n_contacts)  # after squeeze
    e_fly_contact = np.empty(n_contacts)

    state: RadialState | None = None
    mom = GaussianMoments(0.0, 0.0, 0.0)
    n_baths = (
        thermal_occupation(cfg.bath_1.temperature, wx),
        thermal_occupation(cfg.bath_2.temperature, wx),
    )

    for contact in range(n_contacts):
        t = contact * tau_z
        bath = cfg.bath_1 if contact % 2 == 0 else cfg.bath_2
        n_th = n_baths[contact % 2]
        if contact == 0:
            # the first contact creates the medium; pre-jump energy is defined
            # as the fresh thermal energy so its reported heat is zero
            e_wm_pre[0] = HBAR * wx * (n_th + 0.5) + coupling_g(z, trap) * (2.0 * n_th + 1.0)
        else:
            e_wm_pre[contact] = _e_wm(mom, z, trap)

        if contact not in skip_contacts:
            if density:
                state = thermal_state(n_th, dim)
                mom = GaussianMoments(0.0, 0.0, n_th)
                e_wm_thermal[contact] = _e_wm(mom, z, trap)
                if bath.squeeze_after is not None and bath.squeeze_after.r > 0.0:
                    state = squeeze(state, bath.squeeze_after)
                    mom = moments(state)
            else:
                mom = GaussianMoments(0.0, 0.0, n_th)
                e_wm_thermal[contact] = _e_wm(mom, z, trap)
                mom = squeezed_thermal_moments(n_th, bath.squeeze_after)
        else:
            e_wm_thermal[contact] = e_wm_pre[contact]
        e_wm_post[contact] = _e_wm(mom, z, trap)

        e_fly = 0.5 * mass * v * v + 0.5 * mass * wz2 * z * z
        e_fly_contact[contact] = e_fly
        peaks[contact] = (contact, z)
        if t >= cfg.record_from:
            t_blocks.append(np.array([t]))
            d_blocks.append(
                np.array([[z, v, e_fly, e_wm_post[contact], mom.R, mom.X, mom.Y, mom.N]])
            )

        if contact == n_contacts - 1:
            break

        rec = np.empty((nsteps, 8))
        if density:
            fly = FlywheelState(z=z, v=v, t=t)
            for k in range(nsteps):
                R = mom.R

                def force(zz, _R=R):
                    return axial_force(zz, _R, trap, cfg.force_model, mode_factor)

                fly = verlet_step(fly, force, dt, mass)
                state = newton_propagate(
                    state, PropagationStep(dt=dt, z=fly.z), trap, cfg.newton, work=work
                )
                mom = moments(state)
                rec[k, 0] = fly.z
                rec[k, 1] = fly.v
                rec[k, 2] = 0.5 * mass * fly.v ** 2 + 0.5 * mass * wz2 * fly.z ** 2
                rec[k, 3] = _e_wm(mom, fly.z, trap)
                rec[k, 4] = mom.R
                rec[k, 5] = mom.X
                rec[k, 6] = mom.Y
                rec[k, 7] = mom.N
            z, v = fly.z, fly.v
        else:
            stt = (float(z), float(v), mom.X, mom.Y, 2.0 * mom.N + 1.0)
            (z, v, mx, my, mw), status = backends.moments_halfcycle(
                stt, nsteps, dt, mass, wz2, der.gamma, wx, HBAR * wx, exact, mode_factor, rec
            )
            if status != 0:
                raise OutOfTaperError(f"ion left the taper during contact {contact} -> {contact+1}")
            mom = GaussianMoments(X=mx, Y=my, N=0.5 * (mw - 1.0))

        t_half = t + dt * np.arange(1, nsteps + 1)
        if t_half[-1] >= cfg.record_from:
            keep = t_half >= cfg.record_from
            t_blocks.append(t_half[keep])
            d_blocks.append(rec[keep])

    samples = np.column_stack([np.concatenate(t_blocks), np.vstack(d_blocks)])

    ledger = np.empty((cfg.n_cycles, 7))
    for k in range(cfg.n_cycles):
        a, b, c = 2 * k, 2 * k + 1, 2 * k + 2
        q1 = e_wm_thermal[a] - e_wm_pre[a]
        q2 = e_wm_thermal[b] - e_wm_pre[b]
        w_sq = (e_wm_post[a] - e_wm_thermal[a]) + (e_wm_post[b] - e_wm_thermal[b])
        de_wm = e_wm_pre[c] - e_wm_pre[a]
        de_fly = e_fly_contact[c] - e_fly_contact[a]
        ledger[k] = (k, q1, q2, w_sq, de_wm, de_fly, de_fly - (q1 + q2 + w_sq - de_wm))
    return EngineTrace(samples=samples, peaks=peaks, cycle_ledger=ledger, config=cfg)


def peak_positions(trace: EngineTrace) -> np.ndarray:
    """Stroboscopic (n, z_n) pairs at the bath-contact instants."""
    return trace.peaks.copy()


def peak_branches(trace: EngineTrace):
    """Split peaks into the even and odd contact-index branches."""
    n = trace.peaks[:, 0].astype(int)
    z = trace.peaks[:, 1]
    even = n % 2 == 0
    return n[even], z[even], n[~even], z[~even]


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % x for x in row) + "\n")


def write_trace_csv(trace: EngineTrace, path) -> None:
    _write_csv(path, TRACE_COLUMNS, trace.samples)


def write_peaks_csv(trace: EngineTrace, path) -> None:
    _write_csv(path, ("n", "z_m"), trace.peaks)


def write_cycle_ledger_csv(trace: EngineTrace, path) -> None:
    _write_csv(path, LEDGER_COLUMNS, trace.cycle_ledger)
