"""Time evolution of the radial state under the z-dependent Hamiltonian.

Restricted to the x mode, the Hamiltonian in the bare number basis is

    H(z) = hbar wx0 (N + 1/2) + g(z) (X + 2N + 1),
    g(z) = (hbar wx0 / 4) (1/(1 + gamma z)^4 - 1),

a real pentadiagonal matrix: a diagonal plus one coupling band at offset
+/-2.  Three propagation routes live here:

* ``newton_propagate`` -- polynomial expansion of the Liouville-von Neumann
  step exp(-i L dt / hbar) rho in Newton form, divided-difference
  coefficients over Leja-ordered Chebyshev points on the estimated
  commutator spectrum.  This is the production path; each polynomial term
  costs one banded commutator application (O(dim^2)).
* ``dense_propagate_oracle`` -- exact step by eigendecomposition, kept to
  small dimensions; the validation oracle for the Newton route.
* ``moments_propagate`` -- the closed linear dynamics of (X, Y, N) for
  Gaussian states, stepped with an exact 3x3 rotation per sample.

Thermalization is deliberately absent: bath contact is instantaneous state
replacement handled by the engine, and the evolution between contacts is
strictly unitary.

The Newton step is constructed with the first sampling point pinned at 0,
which makes the interpolant exact at the origin and hence preserves the
trace identically; the output is re-hermitized, so trace and hermiticity
hold to round-off and only positivity carries the truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import backends
from .errors import ConfigError, ConvergenceError, DimensionError, OutOfTaperError
from .fock import GaussianMoments, RadialState
from .params import HBAR, TrapConfig, derive_params

__all__ = [
    "NewtonConfig",
    "NewtonWorkspace",
    "PropagationStep",
    "coupling_g",
    "coupling_gtilde",
    "hamiltonian_bands",
    "newton_propagate",
    "dense_propagate_oracle",
    "moments_propagate",
]


@dataclass(frozen=True)
class NewtonConfig:
    max_order: int = 128
    coeff_tolerance: float = 1e-10
    spectral_margin: float = 1.1

    def __post_init__(self):
        if self.max_order < 4:
            raise ConfigError(f"max_order must be >= 4, got {self.max_order}")
        if not (0.0 < self.coeff_tolerance <= 1e-6):
            raise ConfigError(
                f"coeff_tolerance must lie in (0, 1e-6], got {self.coeff_tolerance!r}"
            )
        if self.spectral_margin < 1.0:
            raise ConfigError(f"spectral_margin must be >= 1, got {self.spectral_margin!r}")


DEFAULT_NEWTON = NewtonConfig()


@dataclass(frozen=True)
class PropagationStep:
    """One piecewise-constant step: duration dt with the axial position frozen."""

    dt: float
    z: float


def _taper_factor(z: float, cfg: TrapConfig) -> float:
    u = 1.0 + math.tan(cfg.taper_angle_theta) / cfg.r0 * z
    if u <= 0.0:
        raise OutOfTaperError(f"1 + gamma z = {u:.3e} <= 0 at z = {z:.3e} m")
    return u


def coupling_g(z: float, cfg: TrapConfig) -> float:
    """Radial-axial coupling energy g(z) in joules; g(0) = 0."""
    u = _taper_factor(z, cfg)
    return 0.25 * HBAR * cfg.omega_x0 * (u ** -4 - 1.0)


def coupling_gtilde(z: float, cfg: TrapConfig) -> float:
    """g(z)/hbar in rad/s, the rate entering the moment equations."""
    u = _taper_factor(z, cfg)
    return 0.25 * cfg.omega_x0 * (u ** -4 - 1.0)


def hamiltonian_bands(dim: int, z: float, cfg: TrapConfig):
    """Diagonal and +/-2 band of H(z) (joules)."""
    if dim < 2:
        raise DimensionError(f"Fock dimension must be >= 2, got {dim}")
    g = coupling_g(z, cfg)
    n = np.arange(dim, dtype=float)
    d = HBAR * cfg.omega_x0 * (n + 0.5) + g * (2.0 * n + 1.0)
    c = g * np.sqrt((n[: dim - 2] + 1.0) * (n[: dim - 2] + 2.0))
    return d, c


def _validate_step(step: PropagationStep, cfg: TrapConfig) -> None:
    tau_z = derive_params(cfg).tau_z
    if not step.dt > 0.0:
        raise ConfigError(f"dt must be > 0, got {step.dt!r}")
    if step.dt > tau_z / 100.0 * (1.0 + 1e-12):
        raise ConfigError(
            f"dt = {step.dt:.3e} s too coarse; must be <= tau_z/100 = {tau_z/100.0:.3e} s"
        )


@lru_cache(maxsize=64)
def _leja_chebyshev(theta: float, npts: int) -> np.ndarray:
    """Leja ordering of Chebyshev-Lobatto candidates on [-theta, theta],
    starting from 0 so the interpolant is exact at the origin."""
    ncand = 4 * npts + 1  # odd: includes 0 exactly
    cand = theta * np.cos(np.pi * np.arange(ncand) / (ncand - 1))
    cand[abs(cand) < 1e-300] = 0.0
    pts = np.empty(min(npts, ncand))
    pts[0] = 0.0
    # greedy max of prod |cand - chosen| via accumulated log distances
    logdist = np.log(np.abs(cand) + 1e-300)
    for k in range(1, pts.size):
        j = int(np.argmax(logdist))
        pts[k] = cand[j]
        logdist += np.log(np.abs(cand - cand[j]) + 1e-300)
        logdist[j] = -np.inf
    return pts


def _divided_differences(x: np.ndarray, capacity: float) -> np.ndarray:
    """Divided differences of f(s) = exp(-i s) on points x, in the
    capacity-scaled Newton basis prod (s - x_l)/capacity (keeps the
    coefficients O(1) for oscillatory f on wide intervals)."""
    n = x.size
    dd = np.empty(n, dtype=complex)
    f = np.exp(-1j * x)
    dd[0] = f[0]
    for k in range(1, n):
        t = 1.0
        acc = dd[0]
        for l in range(1, k):
            t *= (x[k] - x[l - 1]) / capacity
            acc += dd[l] * t
        t *= (x[k] - x[k - 1]) / capacity
        dd[k] = (f[k] - acc) / t
    return dd


def _quantize_up(theta: float, ratio: float = 1.005) -> float:
    """Round theta up onto a geometric grid so point sets cache across steps."""
    if theta <= 0.0:
        return 0.0
    return ratio ** math.ceil(math.log(theta) / math.log(ratio))


class NewtonWorkspace:
    """Reusable scratch buffers for tight propagation loops.

    Avoids the per-call cost of faulting in fresh multi-megabyte arrays.
    Results rotate through two buffers, so a state returned against a
    workspace stays valid only until the second following call; the engine
    loop consumes each state immediately.  Not thread-safe: one workspace
    per trajectory.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.q = np.empty((dim, dim), dtype=complex)
        self.qn = np.empty((dim, dim), dtype=complex)
        self.out = np.empty((dim, dim), dtype=complex)
        self._res = (np.empty((dim, dim), dtype=complex), np.empty((dim, dim), dtype=complex))
        self._flip = 0

    def next_result(self) -> np.ndarray:
        self._flip ^= 1
        return self._res[self._flip]


def newton_propagate(
    state: RadialState,
    step: PropagationStep,
    cfg: TrapConfig,
    ncfg: NewtonConfig = DEFAULT_NEWTON,
    work: NewtonWorkspace | None = None,
) -> RadialState:
    """Advance rho by dt under H(z), z frozen over the step.

    The commutator spectrum lies in [-D, D] with D the spectral diameter of
    H, estimated by Gershgorin discs and inflated by ``spectral_margin``.
    The series stops once |next coefficient| * ||next polynomial term||_F
    drops below ``coeff_tolerance``; hitting ``max_order`` first raises
    ConvergenceError (dt too large for the spectral range).
    """
    _validate_step(step, cfg)
    dim = state.dim
    d, c = hamiltonian_bands(dim, step.z, cfg)

    rad = np.zeros(dim)
    rad[: dim - 2] += np.abs(c)
    rad[2:] += np.abs(c)
    diam = float(np.max(d + rad) - np.min(d - rad))
    theta = _quantize_up(ncfg.spectral_margin * diam * step.dt / HBAR)
    capacity = theta / 2.0

    x = _leja_chebyshev(theta, ncfg.max_order + 1)
    dd = _dd_cached(theta, ncfg.max_order + 1)

    scale = step.dt / (HBAR * capacity)
    dsc = d * scale
    cpad = backends.pack_coupling(c * scale, dim)
    xs = x / capacity

    if work is not None:
        if work.dim != dim:
            raise DimensionError(f"workspace dim {work.dim} != state dim {dim}")
        q, qn, out = work.q, work.qn, work.out
        np.copyto(q, state.rho)
        np.multiply(q, dd[0], out=out)
    else:
        q = np.array(state.rho, dtype=complex, order="C")
        qn = np.empty_like(q)
        out = dd[0] * q
    tol = ncfg.coeff_tolerance
    converged = False
    # the numba kernel's unrolled edge columns need dim >= 4
    term = backends.newton_term if dim >= 4 else backends.NEWTON_TERM_NUMPY
    for k in range(x.size - 1):
        coeff = dd[k + 1]
        nrm2 = term(dsc, cpad, q, qn, out, xs[k], coeff)
        if abs(coeff) * math.sqrt(nrm2) < tol:
            converged = True
            break
        q, qn = qn, q
    if not converged:
        raise ConvergenceError(
            f"Newton series not converged at order {ncfg.max_order} "
            f"(theta = {theta:.2f}); reduce dt or raise max_order"
        )
    if work is not None:
        rho = work.next_result()
        rho[...] = out.T
        np.conjugate(rho, out=rho)
        rho += out
        rho *= 0.5
    else:
        rho = 0.5 * (out + out.conj().T)
    return RadialState(dim=dim, rho=rho)


@lru_cache(maxsize=64)
def _dd_cached(theta: float, npts: int) -> np.ndarray:
    x = _leja_chebyshev(theta, npts)
    dd = _divided_differences(x, theta / 2.0)
    dd.flags.writeable = False
    return dd


def dense_propagate_oracle(
    state: RadialState, step: PropagationStep, cfg: TrapConfig
) -> RadialState:
    """Exact step by eigendecomposition; the small-dimension cross-check."""
    if state.dim > 64:
        raise DimensionError(
            f"dense oracle limited to dim <= 64, got {state.dim}"
        )
    _validate_step(step, cfg)
    d, c = hamiltonian_bands(state.dim, step.z, cfg)
    h = np.diag(d)
    idx = np.arange(state.dim - 2)
    h[idx, idx + 2] = c
    h[idx + 2, idx] = c
    w, u = np.linalg.eigh(h)
    phase = np.exp(-1j * w * step.dt / HBAR)
    prop = (u * phase) @ u.conj().T
    rho = prop @ state.rho @ prop.conj().T
    return RadialState(dim=state.dim, rho=0.5 * (rho + rho.conj().T))


def _rotate_moments(mx: float, my: float, mw: float, gt: float, dt: float, wx: float):
    """Exact constant-g step of (X, Y, 2N+1); rotation rate is twice the
    local radial frequency lam = sqrt((wx + 2g)^2 - 4g^2)."""
    om = wx + 2.0 * gt
    lam2 = om * om - 4.0 * gt * gt
    lam = math.sqrt(lam2) if lam2 > 0.0 else 0.0
    ph = 2.0 * lam * dt
    if ph > 1e-6:
        s1 = math.sin(ph) / (2.0 * lam)
        s2 = (1.0 - math.cos(ph)) / (4.0 * lam2)
    else:  # series limit, lam -> 0
        s1 = dt
        s2 = 0.5 * dt * dt
    k1x = 2.0 * om * my
    k1y = -2.0 * om * mx - 4.0 * gt * mw
    k1w = -4.0 * gt * my
    k2x = 2.0 * om * k1y
    k2y = -2.0 * om * k1x - 4.0 * gt * k1w
    k2w = -4.0 * gt * k1y
    return (
        mx + s1 * k1x + s2 * k2x,
        my + s1 * k1y + s2 * k2y,
        mw + s1 * k1w + s2 * k2w,
    )


def moments_propagate(
    m: GaussianMoments, z_of_t: np.ndarray, dt: float, cfg: TrapConfig
) -> GaussianMoments:
    """Integrate the closed (X, Y, N) system along a sampled axial path.

    ``z_of_t[k]`` is the position held fixed during step k, matching the
    engine convention of updating the Hamiltonian after the classical move.
    Conserves (2N+1)^2 - X^2 - Y^2 to round-off.
    """
    mx, my, mw = m.X, m.Y, 2.0 * m.N + 1.0
    wx = cfg.omega_x0
    for z in np.asarray(z_of_t, dtype=float):
        gt = coupling_gtilde(float(z), cfg)
        mx, my, mw = _rotate_moments(mx, my, mw, gt, dt, wx)
    return GaussianMoments(X=mx, Y=my, N=0.5 * (mw - 1.0))
