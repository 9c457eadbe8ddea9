"""Named experiments: configuration, validation and pipelines.

Each pipeline takes a resolved config dict and returns ``(summary, artifacts)``
where ``artifacts`` maps file names to writer callables.  The summary holds
only deterministic content so that replays are byte-identical; wall-clock
data goes to the metadata sidecar.
"""
from __future__ import annotations

import math
import os

import numpy as np

from . import __version__
from . import classical as cm
from . import export
from . import measurement as ms
from .circuit import build_iteration, evolve_circuit, gate_count, write_jsonl
from .husimi import time_averaged_husimi
from .params import MapParams, ParameterError
from .quantum import (
    Basis,
    Propagator,
    StateVector,
    evolve_oracle,
    init_coherent_state,
    init_momentum_eigenstate,
)

EXPERIMENTS = (
    "classical-diffusion",
    "phase-space",
    "localization",
    "circuit-verify",
    "msd",
    "island-frequency",
    "husimi",
)

DEFAULT_MAX_QUBITS = 14

COMMON = {"seed": 12345, "threads": 1, "max_qubits": DEFAULT_MAX_QUBITS}

DEFAULTS = {
    "classical-diffusion": {"K": 5.0, "particles": 10_000, "steps": 100, "p0": 0.0,
                            "exclude_island": False, "fit_start": None},
    "phase-space": {"K": -0.3, "L": 1, "particles": 10_000, "steps": 200, "p0": 2.0,
                    "exclude_island": True, "rows": 128, "cols": 128},
    "localization": {"nq": 6, "k": math.sqrt(3), "K": math.sqrt(2), "T": None, "L": None,
                     "steps": 300, "n0": 0, "windows": [[10, 20], [290, 300]], "bins": None,
                     "shots": 0, "measure_qubits": None},
    "circuit-verify": {"nq": 4, "k": math.sqrt(3), "K": math.sqrt(2), "T": None, "L": None,
                       "trials": 20, "steps": 20, "emit_only": False},
    "msd": {"nq": 8, "k": math.sqrt(3), "K": math.sqrt(2), "T": None, "L": None,
            "steps": 100, "n0": 0, "shots": 0},
    "island-frequency": {"nq": 8, "K": -0.1, "L": 1, "steps": 400, "theta_offset": 1.0,
                         "s": 1.0, "method": "center-of-mass"},
    "husimi": {"nq": 8, "K": -0.1, "L": 1, "window": [1, 20], "init": "momentum", "n0": 0,
               "theta0": math.pi + 1.0, "p0": 0.0, "s": 1.0, "rows": 64, "cols": 64},
}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` maps field names to messages."""

    def __init__(self, errors: dict):
        self.errors = errors
        super().__init__("; ".join(f"{k}: {v}" for k, v in errors.items()))


class InvariantViolation(RuntimeError):
    pass


class ResourceGuard(RuntimeError):
    pass


def default_output_dir(experiment: str) -> str:
    return os.path.join(os.environ.get("SAWTOOTH_OUTPUT_DIR", "runs"), experiment)


def resolve_config(experiment: str, overrides: dict) -> dict:
    """Merge defaults and overrides, then validate field by field."""
    if experiment not in DEFAULTS:
        raise ConfigError({"experiment": f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}"})
    cfg = {"experiment": experiment, **COMMON, **DEFAULTS[experiment]}
    unknown = set(overrides) - set(cfg) - {"output"}
    if unknown:
        raise ConfigError({k: "unknown field for this experiment" for k in sorted(unknown)})
    cfg.update({k: v for k, v in overrides.items() if k != "output"})
    validate(cfg)
    return cfg


def _check(errors, cfg, name, ok, msg):
    if name in cfg and cfg[name] is not None and not ok(cfg[name]):
        errors[name] = msg


def validate(cfg: dict) -> None:
    errors: dict = {}
    pos_int = lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 1
    nonneg_int = lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0
    real = lambda v: isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
    for f in ("particles", "steps", "trials", "rows", "cols", "nq", "threads", "max_qubits", "L"):
        _check(errors, cfg, f, pos_int, "must be a positive integer")
    for f in ("shots", "seed"):
        _check(errors, cfg, f, nonneg_int, "must be a non-negative integer")
    for f in ("K", "k", "T", "p0", "s", "theta_offset", "theta0"):
        _check(errors, cfg, f, real, "must be a finite number")
    _check(errors, cfg, "s", lambda v: v > 0, "must be positive")
    _check(errors, cfg, "T", lambda v: v > 0, "must be positive")
    _check(errors, cfg, "rows", lambda v: v >= 8, "must be >= 8")
    _check(errors, cfg, "cols", lambda v: v >= 8, "must be >= 8")
    _check(errors, cfg, "method", lambda v: v in ("center-of-mass", "variance"),
           "must be 'center-of-mass' or 'variance'")
    _check(errors, cfg, "init", lambda v: v in ("momentum", "coherent"), "must be 'momentum' or 'coherent'")
    if "windows" in cfg:
        try:
            for a, b in cfg["windows"]:
                if not (0 <= a <= b <= cfg.get("steps", b)):
                    errors["windows"] = f"window {a}:{b} outside 0..steps"
        except (TypeError, ValueError):
            errors["windows"] = "expected a list of [start, end] pairs"
    if "window" in cfg:
        try:
            a, b = cfg["window"]
            if not 0 <= a <= b:
                errors["window"] = "need 0 <= start <= end"
        except (TypeError, ValueError):
            errors["window"] = "expected [start, end]"
    if cfg.get("experiment") == "island-frequency" and "K" not in errors and not -4 < cfg["K"] < 0:
        errors["K"] = "island frequency needs -4 < K < 0"
    if cfg.get("bins") is not None and not pos_int(cfg["bins"]):
        errors["bins"] = "must be a positive integer"
    if "nq" in cfg and "nq" not in errors and cfg.get("measure_qubits") is not None:
        if not (nonneg_int(cfg["measure_qubits"]) and cfg["measure_qubits"] <= cfg["nq"]):
            errors["measure_qubits"] = "must be an integer in 0..nq"
    if not errors and "nq" in cfg:
        try:
            quantum_params(cfg)
        except ParameterError as exc:
            errors["params"] = str(exc)
    if errors:
        raise ConfigError(errors)


def quantum_params(cfg: dict) -> MapParams:
    """Torus runs take K and L (``T = 2 pi L / N``); cylinder runs take k with K or T."""
    nq = cfg["nq"]
    if cfg.get("L") is not None:
        return MapParams.on_torus(cfg["K"], cfg["L"], nq)
    k, T, K = cfg.get("k"), cfg.get("T"), cfg.get("K")
    if T is None:
        if k is None or K is None or k == 0:
            raise ParameterError("cylinder runs need k and either T or K (with k != 0)")
        T = K / k
    if k is None:
        k = K / T
    if T <= 0:
        raise ParameterError("T must be positive")
    return MapParams(k=k, T=T, n_q=nq)


def _guard(cfg):
    if cfg.get("nq", 0) > cfg["max_qubits"]:
        raise ResourceGuard(f"nq={cfg['nq']} exceeds the cap of {cfg['max_qubits']} qubits")


def _writer_json(obj):
    return lambda path: export.write_json(path, obj)


def reference_diffusion(K: float) -> float | None:
    if K > 1:
        return math.pi**2 / 3 * K * K
    if 0 < K < 1:
        return 3.3 * K**2.5
    return None


# -- pipelines -----------------------------------------------------------------

def _classical_diffusion(cfg):
    params = MapParams.classical(cfg["K"])
    exclude = (lambda th, p: cm.main_island_mask(th, p, cfg["K"])) if cfg["exclude_island"] else None
    ens = cm.Ensemble.random_phases(cfg["particles"], cfg["p0"], cfg["seed"], exclude=exclude)
    series = cm.evolve_ensemble(ens, params, cfg["steps"], threads=cfg["threads"])
    window = None if cfg["fit_start"] is None else (cfg["fit_start"], cfg["steps"])
    fit = cm.fit_diffusion(series, window)
    ref = reference_diffusion(cfg["K"])
    summary = {
        "D": fit.D, "alpha": fit.alpha, "prefactor": fit.prefactor, "normal": fit.normal,
        "stderr": fit.stderr, "fit_window": fit.fit_window, "D_reference": ref,
        "D_over_reference": None if ref is None or not fit.normal else fit.D / ref,
        "final_msd": float(series.msd[-1]),
    }
    artifacts = {"msd.csv": lambda path: export.write_series_csv(path, series.t, series.msd, series.stderr)}
    return summary, artifacts


def _phase_space(cfg):
    params = MapParams.classical(cfg["K"], L=cfg["L"])
    exclude = (lambda th, p: cm.main_island_mask(th, p, cfg["K"])) if cfg["exclude_island"] else None
    ens = cm.Ensemble.random_phases(cfg["particles"], cfg["p0"], cfg["seed"], exclude=exclude)
    dens, _, _ = cm.phase_space_density(ens, params, cfg["steps"], (cfg["rows"], cfg["cols"]))
    r, c = dens.shape
    centre = float(dens[r // 2 - r // 8 : r // 2 + r // 8, c // 2 - c // 8 : c // 2 + c // 8].mean())
    summary = {"max_density": float(dens.max()), "mean_density": float(dens.mean()),
               "central_island_mean_density": centre}
    artifacts = {
        "density.txt": lambda path: export.write_matrix(path, dens),
        "density.ppm": lambda path: export.write_ppm(path, dens),
    }
    return summary, artifacts


def _localization(cfg):
    params = quantum_params(cfg)
    psi = init_momentum_eigenstate(cfg["n0"], params)
    tr = Propagator(params).trajectory(psi, cfg["steps"])
    t_star, D_n, ell_pred = ms.predict_break_time(params)
    dn = cfg["bins"] or ms.default_bin_width(params)
    fits, profiles = [], []
    for a, b in cfg["windows"]:
        W = ms.time_average_distribution(tr, (a, b))
        profiles.append(W)
        h = ms.histogram(W, dn)
        f = ms.fit_localization(h, cfg["n0"])
        entry = {"window": [a, b], "ell": f.ell, "stderr": f.stderr, "r2": f.r2,
                 "bins_used": f.bins_used, "localized": f.localized}
        if cfg["shots"]:
            m = cfg["measure_qubits"]
            rec = ms.sample_momentum(W, cfg["shots"], ms.spawn_seeds(cfg["seed"], len(fits) + 1)[-1],
                                     truncate_to_m_qubits=m)
            dn_s = max(dn, rec.bin_width)
            fs = ms.fit_localization(ms.histogram(rec, dn_s), cfg["n0"])
            entry["sampled"] = {"shots": cfg["shots"], "measured_qubits": m, "bin_width": dn_s,
                                "ell": fs.ell, "stderr": fs.stderr}
        fits.append(entry)
    e0, e1 = fits[0]["ell"], fits[-1]["ell"]
    summary = {
        "params": params.to_dict(), "bin_width": dn, "fits": fits,
        "prediction": {"t_star": t_star, "D_n": D_n, "ell": ell_pred},
        "relative_change_first_last": abs(e1 - e0) / e0,
        "gates_per_iteration": gate_count(build_iteration(params))["total"],
    }
    n = np.arange(params.N) - params.N // 2
    header = ["n"] + [f"W_{a}_{b}" for a, b in cfg["windows"]]
    artifacts = {
        "profile.csv": lambda path: export.write_columns_csv(path, header, [n, *profiles]),
        "fits.json": _writer_json(fits),
    }
    return summary, artifacts


def _circuit_verify(cfg):
    params = quantum_params(cfg)
    circ = build_iteration(params)
    counts = gate_count(circ)
    summary = {"params": params.to_dict(), "gate_count": counts,
               "expected_gates": 3 * params.n_q**2 + params.n_q}
    artifacts = {"circuit.jsonl": lambda path: write_jsonl(circ, path)}
    if cfg["emit_only"]:
        return summary, artifacts
    worst_fid, worst_amp = 1.0, 0.0
    for ss in ms.spawn_seeds(cfg["seed"], cfg["trials"]):
        rng = np.random.default_rng(ss)
        v = rng.normal(size=params.N) + 1j * rng.normal(size=params.N)
        psi = StateVector(v / np.linalg.norm(v), Basis.THETA, params)
        a = evolve_circuit(psi, params, cfg["steps"], circ).amplitudes
        b = evolve_oracle(psi, params, cfg["steps"]).amplitudes
        worst_fid = min(worst_fid, abs(np.vdot(a, b)))
        worst_amp = max(worst_amp, float(np.max(np.abs(np.abs(a) - np.abs(b)))))
    summary.update({"trials": cfg["trials"], "iterations": cfg["steps"],
                    "max_fidelity_deficit": 1.0 - worst_fid, "max_amplitude_error": worst_amp})
    if 1.0 - worst_fid > 1e-10:
        raise InvariantViolation(f"circuit/oracle fidelity deficit {1 - worst_fid:.3e} > 1e-10")
    return summary, artifacts


def _msd(cfg):
    params = quantum_params(cfg)
    psi = init_momentum_eigenstate(cfg["n0"], params)
    tr = Propagator(params).trajectory(psi, cfg["steps"])
    msd = ms.msd_series(tr)
    t_star, D_n, _ = ms.predict_break_time(params)
    early = np.arange(1, max(2, int(t_star // 2)) + 1)
    early = early[early <= cfg["steps"]]
    slope = float(early @ msd[early] / (early @ early))
    stderr = np.zeros_like(msd)
    summary = {"params": params.to_dict(), "D_n_prediction": D_n, "early_slope": slope,
               "early_window": [int(early[0]), int(early[-1])],
               "break_time": ms.detect_break_time(msd, D_n), "final_msd": float(msd[-1])}
    if cfg["shots"]:
        est = np.empty_like(msd)
        for t, ss in enumerate(ms.spawn_seeds(cfg["seed"], len(msd))):
            rec = ms.sample_momentum(np.abs(tr[t]) ** 2, cfg["shots"], ss)
            est[t], stderr[t] = ms.sampled_variance(rec)
        summary["sampled_max_abs_error"] = float(np.max(np.abs(est - msd)))
        msd_out = est
    else:
        msd_out = msd
    t = np.arange(len(msd))
    artifacts = {"msd.csv": lambda path: export.write_series_csv(path, t, msd_out, stderr)}
    return summary, artifacts


def _island_frequency(cfg):
    params = quantum_params(cfg)
    omega_ref = cm.island_rotation_frequency(params)
    prop = Propagator(params)
    if cfg["method"] == "center-of-mass":
        psi = init_coherent_state(math.pi + cfg["theta_offset"], 0.0, cfg["s"], params)
        tr = prop.trajectory(psi, cfg["steps"], Basis.THETA)
        series = ms.center_of_mass_series(tr)
        est = ms.estimate_frequency(series, "center-of-mass")
        out = np.column_stack([series.real, series.imag])
        header = ["t", "re_exp_itheta", "im_exp_itheta"]
    else:
        tr = prop.trajectory(init_momentum_eigenstate(0, params), cfg["steps"])
        series = ms.msd_series(tr)
        est = ms.estimate_frequency(series, "variance")
        out = series[:, None]
        header = ["t", "msd"]
    summary = {"params": params.to_dict(), "omega": est.omega, "omega_stderr": est.stderr,
               "method": est.method, "flags": est.flags, "omega_reference": omega_ref,
               "relative_error": abs(est.omega - omega_ref) / omega_ref}
    t = np.arange(len(series))
    artifacts = {"series.csv": lambda path: export.write_columns_csv(path, header, [t, *out.T])}
    return summary, artifacts


def _husimi(cfg):
    params = quantum_params(cfg)
    if cfg["init"] == "momentum":
        psi = init_momentum_eigenstate(cfg["n0"], params)
    else:
        psi = init_coherent_state(cfg["theta0"], cfg["p0"], cfg["s"], params)
    a, b = cfg["window"]
    tr = Propagator(params).trajectory(psi, b, Basis.THETA)
    grid = time_averaged_husimi(tr, params, (a, b), (cfg["rows"], cfg["cols"]), cfg["s"])
    if grid.values.min() < 0:
        raise InvariantViolation("negative Husimi value")
    summary = {"params": params.to_dict(), "normalization": grid.total(),
               "max": float(grid.values.max()), "argmax": grid.argmax()}
    artifacts = {
        "husimi.txt": lambda path: export.write_matrix(path, grid.values),
        "husimi.ppm": lambda path: export.write_ppm(path, grid.values),
    }
    return summary, artifacts


PIPELINES = {
    "classical-diffusion": _classical_diffusion,
    "phase-space": _phase_space,
    "localization": _localization,
    "circuit-verify": _circuit_verify,
    "msd": _msd,
    "island-frequency": _island_frequency,
    "husimi": _husimi,
}


def execute(cfg: dict):
    """Run a validated config; returns ``(summary, artifacts)``."""
    _guard(cfg)
    summary, artifacts = PIPELINES[cfg["experiment"]](cfg)
    summary = {
        "experiment": cfg["experiment"],
        "provenance": {"version": __version__, "seed": cfg["seed"],
                       "config_hash": export.config_hash(cfg)},
        "results": summary,
    }
    return summary, artifacts


__all__ = ["EXPERIMENTS", "DEFAULTS", "ConfigError", "InvariantViolation", "ResourceGuard",
           "resolve_config", "execute", "quantum_params", "default_output_dir"]
