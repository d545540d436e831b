"""Command-line front end: named experiments with CSV/JSON emission.

Commands (each writes <command>.csv plus a JSON sidecar with the resolved
configuration into --out):

* ``trajectory``    engine run; trace CSV plus peaks CSV with the
                    stroboscopic prediction column alongside.
* ``energy``        engine run (moment backend); per-contact flywheel and
                    working-medium energies plus the quadratic fit.
* ``dt-sweep``      protocol amplitude versus bath temperature difference,
                    analytic Monte Carlo, with the closed-form column.
* ``squeeze-sweep`` simulated amplification factor versus squeeze
                    amplitude, with the closed-form column.
* ``protocol``      one Monte Carlo protocol run; per-shot CSV and the
                    temperature-difference estimate JSON.
* ``threshold``     nonclassicality threshold r* for both bath
                    temperatures.
* ``bench``         kernel timings, numba versus numpy flavours.

Configuration is a flat UTF-8 ``key = value`` file ('#' comments); unknown
keys are errors.  ``--set key=value`` applies after the file.  All outputs
are deterministic for a fixed seed.  Exit codes: 0 success, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import backends
from .analytics import (
    GrowthMode,
    amplification,
    delta_z,
    make_context,
    protocol_amplitude,
    squeeze_quantum_threshold,
    stroboscopic_positions,
)
from .engine import (
    BathSpec,
    EngineConfig,
    QuantumBackend,
    peak_branches,
    run_engine,
    write_trace_csv,
)
from .errors import ConfigError, NumericalError
from .flywheel import ForceModel
from .fock import SqueezeSpec, thermal_occupation
from .params import K_BOLTZMANN, TrapConfig, derive_params
from .thermometry import (
    ProtocolBackend,
    ProtocolConfig,
    estimate_delta_T,
    run_protocol,
    sensitivity,
    write_estimate_json,
    write_record_csv,
)

COMMANDS = ("trajectory", "energy", "dt-sweep", "squeeze-sweep", "protocol", "threshold", "bench")

# key -> (parser, default); defaults reproduce the reference 40Ca+ setup
_KEYS = {
    "mass_amu": (float, 40.0),
    "omega_x0_hz": (float, 1e6),
    "omega_z_hz": (float, 1e5),
    "theta_deg": (float, 30.0),
    "r0_m": (float, 1e-3),
    "t_bath1_mk": (float, 1.2),
    "t_bath2_mk": (float, 1.0),
    "n_cycles": (int, 4),
    "dim": (str, "auto"),  # positive int or "auto"
    "dt_per_tauz": (int, 2000),
    "force_model": (str, "approximate"),
    "backend": (str, "density"),
    "squeeze_r": (float, 0.0),
    "squeeze_alpha": (float, 0.0),
    "z0_m": (float, -1.1e-6),
    "v0_mps": (float, 0.0),
    "t0_mk": (float, 1.0),
    "protocol_n": (int, 1000),
    "protocol_m": (int, 2000),
    "sigma_shot_m": (float, 1.1180339887498949e-4),
    "seed": (int, 12345),
}


def default_config() -> dict:
    """The built-in defaults: the reference 40Ca+ trap and run settings."""
    return {k: d for k, (_, d) in _KEYS.items()}


def default_config_text() -> str:
    """A complete config file equivalent to the built-in defaults."""
    lines = [f"{k} = {d}" for k, (_, d) in _KEYS.items()]
    return "\n".join(lines) + "\n"


def parse_config(path) -> dict:
    """Parse a flat key = value file; every documented key must appear."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in _KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _parse_value(key, val, f"{path}:{lineno}")
    missing = [k for k in _KEYS if k not in values]
    if missing:
        raise ConfigError(f"{path}: missing keys: {', '.join(missing)}")
    return values


def _parse_value(key: str, val: str, where: str):
    caster, _ = _KEYS[key]
    try:
        if caster is int:
            return int(val)
        if caster is float:
            return float(val)
        return val
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {val!r} ({exc})") from None


def apply_overrides(values: dict, overrides: list[str]) -> dict:
    out = dict(values)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"unknown override key {key!r}")
        out[key] = _parse_value(key, val.strip(), "--set")
    return out


@dataclass
class Setup:
    """Typed view of the resolved config for one experiment."""

    values: dict
    trap: TrapConfig
    bath_1: BathSpec
    bath_2: BathSpec
    dt: float
    dim: int | None
    force_model: ForceModel
    squeeze: SqueezeSpec | None
    seed: int


def build_setup(values: dict) -> Setup:
    trap = TrapConfig.from_lab(
        mass_amu=values["mass_amu"],
        omega_x0_hz=values["omega_x0_hz"],
        omega_z_hz=values["omega_z_hz"],
        theta_deg=values["theta_deg"],
        r0_m=values["r0_m"],
    )
    sq = None
    if values["squeeze_r"] > 0.0:
        sq = SqueezeSpec(r=values["squeeze_r"], alpha=values["squeeze_alpha"])
    dim_raw = values["dim"]
    if isinstance(dim_raw, str) and dim_raw.strip().lower() == "auto":
        dim = None
    else:
        try:
            dim = int(dim_raw)
        except (TypeError, ValueError):
            raise ConfigError(f"dim must be a positive integer or 'auto', got {dim_raw!r}") from None
        if dim < 2:
            raise ConfigError(f"dim must be >= 2, got {dim}")
    fm = values["force_model"].strip().lower()
    if fm not in ("approximate", "exact"):
        raise ConfigError(f"force_model must be 'approximate' or 'exact', got {fm!r}")
    tau_z = derive_params(trap).tau_z
    return Setup(
        values=values,
        trap=trap,
        bath_1=BathSpec(temperature=values["t_bath1_mk"] * 1e-3, squeeze_after=sq),
        bath_2=BathSpec(temperature=values["t_bath2_mk"] * 1e-3, squeeze_after=sq),
        dt=tau_z / values["dt_per_tauz"],
        dim=dim,
        force_model=ForceModel.EXACT if fm == "exact" else ForceModel.APPROXIMATE,
        squeeze=sq,
        seed=values["seed"],
    )


def _engine_backend(values: dict) -> QuantumBackend:
    name = values["backend"].strip().lower()
    if name in ("density", "density_matrix"):
        return QuantumBackend.DENSITY_MATRIX
    if name == "moments":
        return QuantumBackend.MOMENTS
    raise ConfigError(f"backend must be 'density' or 'moments' here, got {name!r}")


def _protocol_backend(values: dict) -> ProtocolBackend:
    name = values["backend"].strip().lower()
    if name in ("analytic", "density"):  # 'density' is the shared default; protocol means analytic
        return ProtocolBackend.ANALYTIC
    if name in ("full_simulation", "full"):
        return ProtocolBackend.FULL_SIMULATION
    raise ConfigError(
        f"backend must be 'analytic' or 'full_simulation' for protocol, got {name!r}"
    )


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % float(x) for x in row) + "\n")


def _sidecar(out_dir: Path, command: str, values: dict, extra: dict, outputs: list[str]) -> None:
    doc = {"command": command, "config": values, "outputs": outputs}
    doc.update(extra)
    with open(out_dir / f"{command}.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def cmd_trajectory(setup: Setup, out_dir: Path) -> list[str]:
    values = setup.values
    cfg = EngineConfig(
        trap=setup.trap,
        bath_1=setup.bath_1,
        bath_2=setup.bath_2,
        n_cycles=values["n_cycles"],
        dt=setup.dt,
        dim=setup.dim,
        force_model=setup.force_model,
        quantum_backend=_engine_backend(values),
        initial=(values["z0_m"], values["v0_mps"]),
    )
    trace = run_engine(cfg)
    ctx = make_context(setup.trap)
    t1, t2 = setup.bath_1.temperature, setup.bath_2.temperature
    rows = [
        (n, z, stroboscopic_positions(int(n), values["z0_m"], t1, t2, ctx, setup.squeeze))
        for n, z in trace.peaks
    ]
    trace_path = out_dir / "trajectory.csv"
    peaks_path = out_dir / "trajectory_peaks.csv"
    write_trace_csv(trace, trace_path)
    _write_csv(peaks_path, ("n", "z_m", "z_pred_m"), rows)
    _sidecar(
        out_dir,
        "trajectory",
        values,
        {"dim_resolved": cfg.resolve_dim(), "delta_z_m": delta_z(t1, t2, ctx)},
        [trace_path.name, peaks_path.name],
    )
    return [trace_path.name, peaks_path.name]


def cmd_energy(setup: Setup, out_dir: Path) -> list[str]:
    values = setup.values
    cfg = EngineConfig(
        trap=setup.trap,
        bath_1=setup.bath_1,
        bath_2=setup.bath_2,
        n_cycles=values["n_cycles"],
        dt=setup.dt,
        dim=setup.dim,
        force_model=setup.force_model,
        quantum_backend=QuantumBackend.MOMENTS,
        initial=(values["z0_m"], values["v0_mps"]),
    )
    trace = run_engine(cfg)
    tau_z = derive_params(setup.trap).tau_z
    contacts = trace.peaks[:, 0].astype(int)
    samples = trace.samples
    rows = []
    for n in contacts:
        t = n * tau_z
        idx = int(np.argmin(np.abs(samples[:, 0] - t)))
        rows.append((n, t, samples[idx, 3], samples[idx, 4]))
    # quadratic fit over whole cycles >= 4 (even contacts, one point per cycle)
    cyc = np.array([r[0] // 2 for r in rows if r[0] % 2 == 0 and r[0] // 2 >= 4], dtype=float)
    e = np.array([r[2] for r in rows if r[0] % 2 == 0 and r[0] // 2 >= 4])
    fit_c = float(np.sum(e * cyc**2) / np.sum(cyc**4)) if cyc.size else float("nan")
    if cyc.size:
        resid = e - fit_c * cyc**2
        ss_tot = float(np.sum((e - e.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else float("nan")
    else:
        r2 = float("nan")
    path = out_dir / "energy.csv"
    _write_csv(path, ("n", "t_s", "E_fly_J", "E_wm_J"), rows)
    _sidecar(
        out_dir,
        "energy",
        values,
        {"quadratic_fit_c_J": fit_c, "quadratic_fit_r_squared": r2},
        [path.name],
    )
    return [path.name]


def cmd_dt_sweep(setup: Setup, out_dir: Path) -> list[str]:
    values = setup.values
    ctx = make_context(setup.trap)
    base = setup.bath_1.temperature
    n_cycles = values["protocol_n"]
    rows = []
    for i, d_t in enumerate(np.linspace(-1e-4, 1e-4, 11)):
        ecfg = EngineConfig(
            trap=setup.trap,
            bath_1=BathSpec(temperature=base),
            bath_2=BathSpec(temperature=base + d_t),
            n_cycles=1,
            dt=setup.dt,
            dim=32,
        )
        pcfg = ProtocolConfig(
            T0=values["t0_mk"] * 1e-3,
            N=n_cycles,
            M=values["protocol_m"],
            sigma_shot=values["sigma_shot_m"],
            seed=setup.seed + i,
            backend=ProtocolBackend.ANALYTIC,
        )
        rec = run_protocol(pcfg, ecfg)
        rows.append(
            (d_t, rec.mean_a - rec.mean_b, protocol_amplitude(n_cycles, base, base + d_t, ctx))
        )
    path = out_dir / "dt-sweep.csv"
    _write_csv(path, ("delta_T_K", "amplitude_sim_m", "amplitude_pred_m"), rows)
    slope = 2.0 * n_cycles * 4.0 * K_BOLTZMANN * ctx.derived.gamma / ctx.m_wz2
    _sidecar(out_dir, "dt-sweep", values, {"slope_pred_m_per_K": slope}, [path.name])
    return [path.name]


def cmd_squeeze_sweep(setup: Setup, out_dir: Path) -> list[str]:
    values = setup.values
    ctx = make_context(setup.trap)
    t1, t2 = setup.bath_1.temperature, setup.bath_2.temperature
    dz = delta_z(t1, t2, ctx, GrowthMode.EXACT)
    if dz == 0.0:
        raise ConfigError("squeeze-sweep needs unequal bath temperatures")
    rows = []
    for r in np.arange(0.0, 1.5 + 1e-9, 0.25):
        sq = SqueezeSpec(r=float(r), alpha=values["squeeze_alpha"]) if r > 0 else None
        cfg = EngineConfig(
            trap=setup.trap,
            bath_1=BathSpec(temperature=t1, squeeze_after=sq),
            bath_2=BathSpec(temperature=t2, squeeze_after=sq),
            n_cycles=max(4, values["n_cycles"]),
            dt=setup.dt,
            dim=setup.dim,
            force_model=setup.force_model,
            quantum_backend=_engine_backend(values),
            initial=(0.0, 0.0),
        )
        trace = run_engine(cfg)
        _, z_even, _, z_odd = peak_branches(trace)
        growth = 0.5 * (np.diff(z_even).mean() - np.diff(z_odd).mean())
        rows.append(
            (r, growth / dz, amplification(float(r), values["squeeze_alpha"], ctx.derived.kappa))
        )
    path = out_dir / "squeeze-sweep.csv"
    _write_csv(path, ("r", "amplification_sim", "amplification_pred"), rows)
    _sidecar(out_dir, "squeeze-sweep", values, {"delta_z_unsqueezed_m": dz}, [path.name])
    return [path.name]


def cmd_protocol(setup: Setup, out_dir: Path) -> list[str]:
    values = setup.values
    ctx = make_context(setup.trap)
    ecfg = EngineConfig(
        trap=setup.trap,
        bath_1=setup.bath_1,
        bath_2=setup.bath_2,
        n_cycles=1,
        dt=setup.dt,
        dim=setup.dim,
        force_model=setup.force_model,
        quantum_backend=QuantumBackend.MOMENTS,
    )
    pcfg = ProtocolConfig(
        T0=values["t0_mk"] * 1e-3,
        N=values["protocol_n"],
        M=values["protocol_m"],
        sigma_shot=values["sigma_shot_m"],
        seed=setup.seed,
        backend=_protocol_backend(values),
    )
    rec = run_protocol(pcfg, ecfg)
    est = estimate_delta_T(rec, pcfg.N, ctx)
    shots_path = out_dir / "protocol.csv"
    est_path = out_dir / "protocol_estimate.json"
    write_record_csv(rec, shots_path)
    write_estimate_json(est, est_path, pcfg.N, pcfg.M, pcfg.seed)
    truth = setup.bath_2.temperature - setup.bath_1.temperature
    _sidecar(
        out_dir,
        "protocol",
        values,
        {
            "delta_T_true_K": truth,
            "amplitude_pred_m": protocol_amplitude(
                pcfg.N, setup.bath_1.temperature, setup.bath_2.temperature, ctx
            ),
            "sensitivity_pred_K": sensitivity(
                values["sigma_shot_m"] / math.sqrt(pcfg.M), pcfg.N, ctx
            ),
        },
        [shots_path.name, est_path.name],
    )
    return [shots_path.name, est_path.name]


def cmd_threshold(setup: Setup, out_dir: Path) -> list[str]:
    values = setup.values
    rows = []
    for label, bath in (("bath1", setup.bath_1), ("bath2", setup.bath_2)):
        n_th = thermal_occupation(bath.temperature, setup.trap.omega_x0)
        rows.append((bath.temperature * 1e3, n_th, squeeze_quantum_threshold(n_th)))
    path = out_dir / "threshold.csv"
    _write_csv(path, ("T_mK", "n_th", "r_star"), rows)
    _sidecar(out_dir, "threshold", values, {}, [path.name])
    return [path.name]


def cmd_bench(setup: Setup, out_dir: Path) -> list[str]:
    rng = np.random.default_rng(setup.seed)
    rows = []

    def time_call(fn, *args, repeats=5):
        fn(*args)  # warm up / compile
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn(*args)
            best = min(best, time.perf_counter() - t0)
        return best

    for dim in (128, 256, 512):
        d = rng.standard_normal(dim)
        c = rng.standard_normal(dim - 2)
        cpad = backends.pack_coupling(c, dim)
        q = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        qn = np.empty_like(q)
        out = np.zeros_like(q)
        flavours = [("numpy", backends.NEWTON_TERM_NUMPY)]
        if backends.NEWTON_TERM_NUMBA is not None:
            flavours.append(("numba", backends.NEWTON_TERM_NUMBA))
        for name, fn in flavours:
            dt = time_call(fn, d, cpad, q.copy(), qn, out, 0.1, 0.2 + 0.1j)
            rows.append(("newton_term", dim, name, dt * 1e3))

    rec = np.empty((2000, 8))
    state = (0.0, 0.0, 0.0, 0.0, 42.0)
    args = (state, 2000, 2.5e-9, 6.64e-26, (2 * math.pi * 1e5) ** 2, 577.35, 2 * math.pi * 1e6, 6.6e-28, False, 1.0, rec)
    flavours = [("numpy", backends.MOMENTS_HALFCYCLE_NUMPY)]
    if backends.MOMENTS_HALFCYCLE_NUMBA is not None:
        flavours.append(("numba", backends.MOMENTS_HALFCYCLE_NUMBA))
    for name, fn in flavours:
        dt = time_call(lambda f=fn: f(*args))
        rows.append(("moments_halfcycle", 2000, name, dt * 1e3))

    path = out_dir / "bench.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("kernel,size,flavour,ms_per_call\n")
        for kernel, size, name, ms in rows:
            fh.write("%s,%d,%s,%.6g\n" % (kernel, size, name, ms))
    for kernel, size, name, ms in rows:
        print(f"{kernel:>18s}  size={size:<5d} {name:<6s} {ms:10.4f} ms")
    _sidecar(out_dir, "bench", setup.values, {"using_numba": backends.USING_NUMBA}, [path.name])
    return [path.name]


_RUNNERS = {
    "trajectory": cmd_trajectory,
    "energy": cmd_energy,
    "dt-sweep": cmd_dt_sweep,
    "squeeze-sweep": cmd_squeeze_sweep,
    "protocol": cmd_protocol,
    "threshold": cmd_threshold,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ionotto",
        description="Single-ion Otto engine experiments (data-only CSV/JSON emission).",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, default=None, help="key = value config file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (applied after the file)",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the seed key")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            if not args.config.exists():
                raise ConfigError(f"config file not found: {args.config}")
            values = parse_config(args.config)
        else:
            values = default_config()
        values = apply_overrides(values, args.overrides)
        if args.seed is not None:
            values["seed"] = args.seed
        args.out.mkdir(parents=True, exist_ok=True)
        setup = build_setup(values)
        _RUNNERS[args.command](setup, args.out)
    except ConfigError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except NumericalError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
