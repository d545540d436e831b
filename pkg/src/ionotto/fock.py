"""Truncated Fock-space description of the radial working medium.

States are density matrices in the number basis of the bare ``omega_x0``
oscillator; the taper never changes the basis, it only enters through the
position-dependent coupling term of the Hamiltonian.  The second moments

    X = <a†² + a²>,  Y = i<a†² − a²>,  N = <a†a>,  R = X + 2N + 1

are the quantities the rest of the engine consumes: R sets the coupling
force on the axial oscillator.

Truncation bookkeeping: a thermal state may only be constructed when the
geometric tail beyond the truncation carries less than 1e-8 weight, and any
state holding more than 1e-6 population in its top 10% of levels counts as
under-resolved.  ``auto_dim`` picks a dimension satisfying both, including
the ~exp(2r) growth required by squeezing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DimensionError, TruncationError
from .params import HBAR, K_BOLTZMANN, TrapConfig

__all__ = [
    "RadialState",
    "GaussianMoments",
    "SqueezeSpec",
    "ladder_matrices",
    "thermal_occupation",
    "thermal_state",
    "squeeze",
    "squeezed_thermal_moments",
    "moments",
    "radial_energy",
    "auto_dim",
    "top_fraction_population",
    "validate_state",
    "export_density_matrix",
]

TAIL_BOUND = 1e-8  # max geometric tail weight beyond the truncation
GUARD_BOUND = 1e-6  # max population in the top 10% of levels
GUARD_FRACTION = 0.9


@dataclass(frozen=True)
class RadialState:
    """Density matrix of the x-radial mode in the truncated number basis."""

    dim: int
    rho: np.ndarray  # complex (dim, dim), treated as immutable

    def __post_init__(self):
        if self.rho.shape != (self.dim, self.dim):
            raise DimensionError(
                f"rho shape {self.rho.shape} does not match dim={self.dim}"
            )


@dataclass(frozen=True)
class GaussianMoments:
    """Second-moment triple (X, Y, N); R = X + 2N + 1 drives the axial force."""

    X: float
    Y: float
    N: float

    @property
    def R(self) -> float:
        return self.X + 2.0 * self.N + 1.0

    def heisenberg(self) -> float:
        """(2N+1)^2 - X^2 - Y^2; >= 1 for physical Gaussian states, conserved
        under the quadratic dynamics."""
        return (2.0 * self.N + 1.0) ** 2 - self.X ** 2 - self.Y ** 2


@dataclass(frozen=True)
class SqueezeSpec:
    """Squeeze parameter xi = r e^{i alpha}."""

    r: float
    alpha: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0.0):
            raise ConfigError(f"squeeze amplitude r must be finite and >= 0, got {self.r!r}")
        object.__setattr__(self, "alpha", self.alpha % (2.0 * math.pi))


@lru_cache(maxsize=32)
def ladder_matrices(dim: int):
    """Annihilation, creation and number matrices on the truncated basis.

    a|n> = sqrt(n)|n-1>; the commutator [a, a†] equals the identity except
    for the unavoidable -(dim-1) corner entry of the truncation.
    """
    if dim < 2:
        raise DimensionError(f"Fock dimension must be >= 2, got {dim}")
    a = np.zeros((dim, dim))
    idx = np.arange(1, dim)
    a[idx - 1, idx] = np.sqrt(idx)
    adag = a.T.copy()
    num = np.diag(np.arange(dim, dtype=float))
    for mat in (a, adag, num):
        mat.flags.writeable = False
    return a, adag, num


def thermal_occupation(T: float, omega: float) -> float:
    """Bose occupation (e^{hbar omega / kB T} - 1)^-1; 0 at T = 0."""
    if T < 0.0:
        raise ConfigError(f"temperature must be >= 0, got {T!r}")
    if omega <= 0.0:
        raise ConfigError(f"omega must be > 0, got {omega!r}")
    if T == 0.0:
        return 0.0
    x = HBAR * omega / (K_BOLTZMANN * T)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def _min_tail_dim(n_th: float) -> int:
    """Smallest dim with geometric tail weight below TAIL_BOUND."""
    if n_th <= 0.0:
        return 2
    return int(math.ceil(math.log(TAIL_BOUND) / math.log(n_th / (1.0 + n_th))))


def auto_dim(n_th: float, r: float = 0.0) -> int:
    """Pick a truncation for a (squeezed) thermal state of occupation n_th.

    Combines the 8*(n_th+1)*e^{2r} rule of thumb with the exact geometric
    tail requirement and an asymptotic estimate of the post-squeeze number
    distribution (per-level decay ratio (V-1)/(V+1), V = (2n_th+1)e^{2r}),
    calibrated so the top-10% guard holds.  Rounded up to a multiple of 16.
    """
    heuristic = math.ceil(8.0 * (n_th + 1.0) * math.exp(2.0 * r))
    tail = _min_tail_dim(n_th)
    V = (2.0 * n_th + 1.0) * math.exp(2.0 * r)
    if V > 1.0 + 1e-12:
        lam = math.log((V + 1.0) / (V - 1.0))
        guard = math.ceil(math.log(0.2 / GUARD_BOUND) / (GUARD_FRACTION * lam))
    else:
        guard = 0
    dim = max(32, heuristic, tail, guard)
    return ((dim + 15) // 16) * 16


def thermal_state(n_th: float, dim: int) -> RadialState:
    """Diagonal Gibbs state with geometric populations, renormalized on the
    truncation."""
    if n_th < 0.0:
        raise ConfigError(f"n_th must be >= 0, got {n_th!r}")
    if dim < 2:
        raise DimensionError(f"Fock dimension must be >= 2, got {dim}")
    if n_th > 0.0:
        q = n_th / (1.0 + n_th)
        if q ** dim >= TAIL_BOUND:
            raise TruncationError(
                f"dim={dim} leaves geometric tail {q**dim:.2e} >= {TAIL_BOUND:g} "
                f"for n_th={n_th:g}; need dim >= {_min_tail_dim(n_th)}"
            )
        p = (1.0 - q) * q ** np.arange(dim)
    else:
        p = np.zeros(dim)
        p[0] = 1.0
    p /= p.sum()
    rho = np.zeros((dim, dim), dtype=complex)
    np.fill_diagonal(rho, p)
    return RadialState(dim=dim, rho=rho)


@lru_cache(maxsize=8)
def _squeeze_unitary(dim: int, r: float, alpha: float) -> np.ndarray:
    """exp((xi* a^2 - xi a†^2)/2) on the truncated space, unitary by
    construction (eigendecomposition of the Hermitian i*generator)."""
    a, adag, _ = ladder_matrices(dim)
    xi = r * np.exp(1j * alpha)
    gen = 0.5 * (np.conj(xi) * (a @ a) - xi * (adag @ adag))
    herm = 1j * gen
    w, u = np.linalg.eigh(herm)
    s = (u * np.exp(-1j * w)) @ u.conj().T
    s.flags.writeable = False
    return s


def squeeze(state: RadialState, spec: SqueezeSpec) -> RadialState:
    """Apply S(xi) rho S†(xi); raises when the truncation cannot hold the
    squeezed state (population spreads by roughly e^{2r})."""
    if spec.r == 0.0:
        return state
    s = _squeeze_unitary(state.dim, spec.r, spec.alpha)
    rho = s @ state.rho @ s.conj().T
    out = RadialState(dim=state.dim, rho=rho)
    guard = top_fraction_population(out)
    if guard >= GUARD_BOUND:
        raise TruncationError(
            f"post-squeeze population {guard:.2e} in top levels exceeds "
            f"{GUARD_BOUND:g}; increase dim (~e^(2r) growth), e.g. via auto_dim"
        )
    return out


def squeezed_thermal_moments(n_th: float, spec: SqueezeSpec | None) -> GaussianMoments:
    """Closed-form moments of S(xi) rho_th S†(xi):

        N = n cosh(2r) + sinh^2(r)
        X = -(2n+1) sinh(2r) cos(alpha),  Y = -(2n+1) sinh(2r) sin(alpha)

    leaving (2N+1)^2 - X^2 - Y^2 = (2n+1)^2 invariant.
    """
    if spec is None or spec.r == 0.0:
        return GaussianMoments(X=0.0, Y=0.0, N=n_th)
    s2r = math.sinh(2.0 * spec.r)
    return GaussianMoments(
        X=-(2.0 * n_th + 1.0) * s2r * math.cos(spec.alpha),
        Y=-(2.0 * n_th + 1.0) * s2r * math.sin(spec.alpha),
        N=n_th * math.cosh(2.0 * spec.r) + math.sinh(spec.r) ** 2,
    )


def moments(state: RadialState) -> GaussianMoments:
    """Expectation values (X, Y, N) read off the +/-2 band and diagonal."""
    dim = state.dim
    n = np.arange(dim)
    pop = np.real(np.diagonal(state.rho))
    nval = float(np.dot(n, pop))
    w = np.sqrt((n[: dim - 2] + 1.0) * (n[: dim - 2] + 2.0))
    band = np.diagonal(state.rho, offset=2)
    x = complex(np.dot(w, band))
    return GaussianMoments(X=2.0 * x.real, Y=-2.0 * x.imag, N=nval)


def radial_energy(state: RadialState, z: float, cfg: TrapConfig) -> float:
    """Tr(rho H_radial(z)): bare oscillator energy plus the coupling term g(z) R."""
    from .propagator import coupling_g

    mom = moments(state)
    return HBAR * cfg.omega_x0 * (mom.N + 0.5) + coupling_g(z, cfg) * mom.R


def top_fraction_population(state: RadialState, fraction: float = GUARD_FRACTION) -> float:
    """Population above level floor(fraction*dim); the under-resolution guard."""
    k = int(math.ceil(fraction * state.dim))
    return float(np.real(np.diagonal(state.rho)[k:]).sum())


def validate_state(
    state: RadialState,
    check_psd: bool = False,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-9,
    psd_tol: float = 1e-10,
) -> None:
    """Raise ValueError when a density-matrix invariant is violated.

    PSD needs a full eigendecomposition, so it is opt-in (test builds).
    """
    herm = float(np.max(np.abs(state.rho - state.rho.conj().T)))
    if herm >= herm_tol:
        raise ValueError(f"hermiticity violated: max |rho - rho†| = {herm:.3e}")
    tr = abs(float(np.real(np.trace(state.rho))) - 1.0)
    if tr >= trace_tol:
        raise ValueError(f"unit trace violated: |Tr rho - 1| = {tr:.3e}")
    if check_psd:
        wmin = float(np.linalg.eigvalsh(state.rho)[0])
        if wmin <= -psd_tol:
            raise ValueError(f"positivity violated: min eigenvalue = {wmin:.3e}")


def export_density_matrix(state: RadialState, path=None, abs_tol: float = 1e-12):
    """JSON export as entries (row, col, re, im) with |entry| > abs_tol."""
    rr, cc = np.nonzero(np.abs(state.rho) > abs_tol)
    entries = [
        [int(i), int(j), float(state.rho[i, j].real), float(state.rho[i, j].imag)]
        for i, j in zip(rr, cc)
    ]
    doc = {"dim": state.dim, "entries": entries}
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
    return doc
