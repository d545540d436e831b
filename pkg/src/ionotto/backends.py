"""Hot numerical kernels, in numba and pure-numpy flavours.

The propagator and engine loops spend essentially all their time in three
kernels:

* ``newton_term`` -- one term of the polynomial propagator acting on a
  density matrix under the pentadiagonal radial Hamiltonian,
* ``moments_halfcycle`` -- the coupled classical/Gaussian-moment loop over
  one half axial period,
* ``verlet_harmonic`` -- a long harmonic velocity-Verlet run (used by the
  energy-drift checks and the benchmark).

Every kernel exists twice with identical semantics: a ``@njit`` version and
a numpy/python version.  Selection happens once at import time: the numba
flavour is used when numba imports cleanly and the environment variable
``IONOTTO_NO_NUMBA`` is unset/empty.  ``ionotto bench`` times both flavours.

The Hamiltonian enters the ``newton_term`` kernel as bands: a real diagonal
``d`` and a single real coupling band at offset +/-2 packed into ``cpad``
of length ``2*dim`` with

    cpad[i]       = c[i]   (couples i <-> i+2), zero for i >= dim-2
    cpad[dim + i] = c[i-2] (couples i <-> i-2), zero for i < 2

so the inner loops stay branch-free away from the first/last two columns.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "USING_NUMBA",
    "newton_term",
    "moments_halfcycle",
    "verlet_harmonic",
    "pack_coupling",
]

_DISABLED = bool(os.environ.get("IONOTTO_NO_NUMBA", "").strip())

try:  # pragma: no cover - exercised via the env flag in the benchmark
    if _DISABLED:
        raise ImportError("numba disabled by IONOTTO_NO_NUMBA")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False

USING_NUMBA = _HAVE_NUMBA


def pack_coupling(c: np.ndarray, dim: int) -> np.ndarray:
    """Pack the +/-2 coupling band into the zero-padded layout above."""
    cpad = np.zeros(2 * dim)
    cpad[: dim - 2] = c
    cpad[dim + 2 :] = c
    return cpad


# ---------------------------------------------------------------------------
# newton_term: qn = (comm - x) q, out += a * qn, return ||qn||_F^2
#
# comm(q)[i, j] = (d[i] - d[j]) q[i, j]
#                 + c[i] q[i+2, j] + c[i-2] q[i-2, j]
#                 - c[j] q[i, j+2] - c[j-2] q[i, j-2]
# with d, c already scaled by dt/(hbar * capacity).
# ---------------------------------------------------------------------------


def _newton_term_numpy(d, cpad, q, qn, out, x, a):
    dim = d.shape[0]
    c = cpad[: dim - 2]
    v = (d[:, None] - d[None, :]) * q
    v -= x * q
    v[:-2, :] += c[:, None] * q[2:, :]
    v[2:, :] += c[:, None] * q[:-2, :]
    v[:, :-2] -= c[None, :] * q[:, 2:]
    v[:, 2:] -= c[None, :] * q[:, :-2]
    qn[...] = v
    out += a * v
    return float(np.vdot(v, v).real)


def _moments_step(z, v, mx, my, mw, dt, m, wz2, gamma, wx, hbarwx, exact_force, mode_factor):
    """One mean-field step, scalar math shared by both python flavours.

    Order follows the engine loop: the classical coordinate moves first with
    the coupling force frozen at the current R, then the moments rotate for
    dt under the Hamiltonian at the *new* position.  Returns the advanced
    state or None when the ion leaves the taper.
    """
    R = mx + mw  # mw = 2N + 1
    # velocity Verlet, R frozen across the step
    u = 1.0 + gamma * z
    if u <= 0.0:
        return None
    fc = mode_factor * gamma * hbarwx * R
    if exact_force:
        fc /= u ** 5
    a0 = (-m * wz2 * z + fc) / m
    vh = v + 0.5 * dt * a0
    z1 = z + dt * vh
    u1 = 1.0 + gamma * z1
    if u1 <= 0.0:
        return None
    fc1 = mode_factor * gamma * hbarwx * R
    if exact_force:
        fc1 /= u1 ** 5
    a1 = (-m * wz2 * z1 + fc1) / m
    v1 = vh + 0.5 * dt * a1

    # Gaussian-moment rotation for dt at frozen coupling g(z1).
    # With u = X, w = 2N+1 the generator K has eigenvalues {0, +/-2i*lam}
    # and lam equals the local radial frequency wx/(1+gamma*z)^2, so
    # exp(K dt) = 1 + K sin(2 lam dt)/(2 lam) + K^2 (1-cos(2 lam dt))/(4 lam^2).
    gt = 0.25 * wx * (u1 ** -4 - 1.0)  # g/hbar, rad/s
    Om = wx + 2.0 * gt
    lam = wx / (u1 * u1)
    ph = 2.0 * lam * dt
    s1 = math.sin(ph) / (2.0 * lam)
    s2 = (1.0 - math.cos(ph)) / (4.0 * lam * lam)
    k1x = 2.0 * Om * my
    k1y = -2.0 * Om * mx - 4.0 * gt * mw
    k1w = -4.0 * gt * my
    k2x = 2.0 * Om * k1y
    k2y = -2.0 * Om * k1x - 4.0 * gt * k1w
    k2w = -4.0 * gt * k1y
    mx1 = mx + s1 * k1x + s2 * k2x
    my1 = my + s1 * k1y + s2 * k2y
    mw1 = mw + s1 * k1w + s2 * k2w
    return z1, v1, mx1, my1, mw1, gt


def _moments_halfcycle_numpy(
    state, nsteps, dt, m, wz2, gamma, wx, hbarwx, exact_force, mode_factor, rec
):
    z, v, mx, my, mw = state
    for k in range(nsteps):
        step = _moments_step(
            z, v, mx, my, mw, dt, m, wz2, gamma, wx, hbarwx, exact_force, mode_factor
        )
        if step is None:
            return (z, v, mx, my, mw), 1
        z, v, mx, my, mw, gt = step
        rec[k, 0] = z
        rec[k, 1] = v
        rec[k, 2] = 0.5 * m * v * v + 0.5 * m * wz2 * z * z
        nval = 0.5 * (mw - 1.0)
        rec[k, 3] = hbarwx * (nval + 0.5) + (hbarwx / wx) * gt * (mx + mw)
        rec[k, 4] = mx + mw
        rec[k, 5] = mx
        rec[k, 6] = my
        rec[k, 7] = nval
    return (z, v, mx, my, mw), 0


def _verlet_harmonic_numpy(z, v, w2, dt, nsteps):
    e0 = 0.5 * v * v + 0.5 * w2 * z * z
    emax = 0.0
    a = -w2 * z
    for _ in range(nsteps):
        vh = v + 0.5 * dt * a
        z = z + dt * vh
        a = -w2 * z
        v = vh + 0.5 * dt * a
        e = 0.5 * v * v + 0.5 * w2 * z * z
        err = abs(e - e0)
        if err > emax:
            emax = err
    return z, v, emax / e0


if _HAVE_NUMBA:

    @njit(cache=True, fastmath=True)
    def _newton_term_numba(d, cpad, q, qn, out, x, a):  # pragma: no cover - numba
        dim = d.shape[0]
        nrm = 0.0
        for i in range(dim):
            dix = d[i] - x
            cu = cpad[i]
            cl = cpad[dim + i]
            iu = i + 2 if i + 2 < dim else i
            il = i - 2 if i >= 2 else i
            for j in range(2):
                val = (dix - d[j]) * q[i, j] + cu * q[iu, j] + cl * q[il, j] - cpad[j] * q[i, j + 2]
                qn[i, j] = val
                out[i, j] += a * val
                nrm += val.real * val.real + val.imag * val.imag
            for j in range(2, dim - 2):
                val = (
                    (dix - d[j]) * q[i, j]
                    + cu * q[iu, j]
                    + cl * q[il, j]
                    - cpad[dim + j] * q[i, j - 2]
                    - cpad[j] * q[i, j + 2]
                )
                qn[i, j] = val
                out[i, j] += a * val
                nrm += val.real * val.real + val.imag * val.imag
            for j in range(dim - 2, dim):
                val = (dix - d[j]) * q[i, j] + cu * q[iu, j] + cl * q[il, j] - cpad[dim + j] * q[i, j - 2]
                qn[i, j] = val
                out[i, j] += a * val
                nrm += val.real * val.real + val.imag * val.imag
        return nrm

    @njit(cache=True, fastmath=True)
    def _moments_halfcycle_numba(
        state, nsteps, dt, m, wz2, gamma, wx, hbarwx, exact_force, mode_factor, rec
    ):  # pragma: no cover - numba
        z, v, mx, my, mw = state
        for k in range(nsteps):
            R = mx + mw
            u = 1.0 + gamma * z
            if u <= 0.0:
                return (z, v, mx, my, mw), 1
            fc = mode_factor * gamma * hbarwx * R
            if exact_force:
                fc /= u ** 5
            a0 = (-m * wz2 * z + fc) / m
            vh = v + 0.5 * dt * a0
            z1 = z + dt * vh
            u1 = 1.0 + gamma * z1
            if u1 <= 0.0:
                return (z, v, mx, my, mw), 1
            fc1 = mode_factor * gamma * hbarwx * R
            if exact_force:
                fc1 /= u1 ** 5
            a1 = (-m * wz2 * z1 + fc1) / m
            v = vh + 0.5 * dt * a1
            z = z1

            gt = 0.25 * wx * (u1 ** -4 - 1.0)
            Om = wx + 2.0 * gt
            lam = wx / (u1 * u1)
            ph = 2.0 * lam * dt
            s1 = math.sin(ph) / (2.0 * lam)
            s2 = (1.0 - math.cos(ph)) / (4.0 * lam * lam)
            k1x = 2.0 * Om * my
            k1y = -2.0 * Om * mx - 4.0 * gt * mw
            k1w = -4.0 * gt * my
            k2x = 2.0 * Om * k1y
            k2y = -2.0 * Om * k1x - 4.0 * gt * k1w
            k2w = -4.0 * gt * k1y
            mx = mx + s1 * k1x + s2 * k2x
            my = my + s1 * k1y + s2 * k2y
            mw = mw + s1 * k1w + s2 * k2w

            rec[k, 0] = z
            rec[k, 1] = v
            rec[k, 2] = 0.5 * m * v * v + 0.5 * m * wz2 * z * z
            nval = 0.5 * (mw - 1.0)
            rec[k, 3] = hbarwx * (nval + 0.5) + (hbarwx / wx) * gt * (mx + mw)
            rec[k, 4] = mx + mw
            rec[k, 5] = mx
            rec[k, 6] = my
            rec[k, 7] = nval
        return (z, v, mx, my, mw), 0

    @njit(cache=True, fastmath=True)
    def _verlet_harmonic_numba(z, v, w2, dt, nsteps):  # pragma: no cover - numba
        e0 = 0.5 * v * v + 0.5 * w2 * z * z
        emax = 0.0
        a = -w2 * z
        for _ in range(nsteps):
            vh = v + 0.5 * dt * a
            z = z + dt * vh
            a = -w2 * z
            v = vh + 0.5 * dt * a
            e = 0.5 * v * v + 0.5 * w2 * z * z
            err = abs(e - e0)
            if err > emax:
                emax = err
        return z, v, emax / e0

    newton_term = _newton_term_numba
    moments_halfcycle = _moments_halfcycle_numba
    verlet_harmonic = _verlet_harmonic_numba
else:
    newton_term = _newton_term_numpy
    moments_halfcycle = _moments_halfcycle_numpy
    verlet_harmonic = _verlet_harmonic_numpy

# explicit handles for the benchmark and equivalence tests
NEWTON_TERM_NUMPY = _newton_term_numpy
MOMENTS_HALFCYCLE_NUMPY = _moments_halfcycle_numpy
VERLET_HARMONIC_NUMPY = _verlet_harmonic_numpy
NEWTON_TERM_NUMBA = _newton_term_numba if _HAVE_NUMBA else None
MOMENTS_HALFCYCLE_NUMBA = _moments_halfcycle_numba if _HAVE_NUMBA else None
VERLET_HARMONIC_NUMBA = _verlet_harmonic_numba if _HAVE_NUMBA else None
