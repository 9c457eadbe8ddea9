"""Plain file formats: CSV series, JSON sidecars, text matrices, PPM images,
binary state dumps and shot records.

Binary dumps are one JSON header line followed by raw little-endian data.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .measurement import ShotRecord
from .params import MapParams
from .quantum import Basis, StateVector, momentum_grid, theta_grid


def _clean(obj):
    """Make numpy scalars, arrays, tuples and non-finite floats JSON friendly."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, repr-exact floats."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def config_hash(config: dict) -> str:
    return hashlib.sha256(dumps(config).encode()).hexdigest()[:16]


def metadata(config: dict | None = None, params: MapParams | None = None, seed=None, **extra) -> dict:
    """Provenance sidecar content.  Holds wall-clock data, so never byte-compared."""
    meta = {
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "rng": "numpy.random.PCG64 via SeedSequence",
        "seed": seed,
    }
    if config is not None:
        meta["config"] = config
        meta["config_hash"] = config_hash(config)
    if params is not None:
        meta["params"] = params.to_dict()
    meta.update(extra)
    return meta


def write_series_csv(path, t, msd, stderr=None) -> None:
    """Columns ``t, msd, stderr``."""
    if stderr is None:
        stderr = np.zeros(len(t))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "msd", "stderr"])
        for row in zip(t, msd, stderr):
            w.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2]))])


def read_series_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].astype(int), data[:, 1], data[:, 2]


def write_columns_csv(path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def write_matrix(path, values: np.ndarray) -> None:
    """Plain-text matrix, top row = largest ``p`` (rows are flipped on write)."""
    np.savetxt(path, np.asarray(values)[::-1], fmt="%.17g")


def read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, ndmin=2)[::-1]


def blue_to_red(x: np.ndarray) -> np.ndarray:
    """Jet-like map of ``x`` in [0, 1] to RGB bytes: blue at 0, red at 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    r = np.clip(1.5 - np.abs(4 * x - 3), 0, 1)
    g = np.clip(1.5 - np.abs(4 * x - 2), 0, 1)
    b = np.clip(1.5 - np.abs(4 * x - 1), 0, 1)
    return np.round(np.stack([r, g, b], axis=-1) * 255).astype(np.uint8)


def write_ppm(path, values: np.ndarray) -> None:
    """Binary PPM (P6).  ``values[row]`` with increasing ``p``; image top row = max ``p``."""
    v = np.asarray(values, dtype=float)[::-1]
    vmax = v.max()
    rgb = blue_to_red(v / vmax if vmax > 0 else v)
    h, w = v.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM file")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


def _write_binary(path, header: dict, data: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(json.dumps(_clean(header), sort_keys=True).encode() + b"\n")
        fh.write(data.tobytes())


def _read_binary(path):
    raw = Path(path).read_bytes()
    head, _, body = raw.partition(b"\n")
    return json.loads(head), body


def save_state(path, psi: StateVector) -> None:
    """Little-endian ``(re, im)`` float64 pairs after a JSON header line."""
    header = {"n_q": psi.params.n_q, "basis": psi.basis.value, "params": psi.params.to_dict()}
    data = np.empty((psi.N, 2), dtype="<f8")
    data[:, 0] = psi.amplitudes.real
    data[:, 1] = psi.amplitudes.imag
    _write_binary(path, header, data)


def load_state(path) -> StateVector:
    header, body = _read_binary(path)
    d = header["params"]
    params = MapParams(k=d["k"], T=d["T"], n_q=d["n_q"], L=d["L"])
    data = np.frombuffer(body, dtype="<f8").reshape(-1, 2)
    return StateVector(data[:, 0] + 1j * data[:, 1], Basis(header["basis"]), params)


def write_probabilities_csv(path, psi: StateVector) -> None:
    x = momentum_grid(psi.N) if psi.basis is Basis.MOMENTUM else theta_grid(psi.N)
    name = "n" if psi.basis is Basis.MOMENTUM else "theta"
    write_columns_csv(path, [name, "prob"], [x, psi.probabilities()])


def save_shots(path, record) -> None:
    """Shot outcomes as little-endian int32 after a JSON header line."""
    header = {"N": record.N, "shots": record.shots, "truncated_to_qubits": record.truncated_to_qubits,
              "seed": None if record.seed is None or not isinstance(record.seed, int) else record.seed}
    _write_binary(path, header, np.asarray(record.outcomes, dtype="<i4"))


def load_shots(path):
    header, body = _read_binary(path)
    out = np.frombuffer(body, dtype="<i4").astype(np.int64)
    return ShotRecord(out, header["N"], header["seed"], header["truncated_to_qubits"])
