"""Command line runner: ``python -m sawtooth <experiment> [options]``.

Every run writes ``config.json`` (exact replay input), ``summary.json``
(deterministic results), ``metadata.json`` (provenance and wall time) and
the experiment's data files into the output directory.

Exit codes: 0 ok, 2 config error, 3 invariant violation, 4 resource guard.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

from . import __version__, export
from .experiments import (
    EXPERIMENTS,
    ConfigError,
    InvariantViolation,
    ResourceGuard,
    default_output_dir,
    execute,
    resolve_config,
)

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_RESOURCE = 0, 2, 3, 4


def _windows(text):
    out = []
    for part in text.split(","):
        a, _, b = part.partition(":")
        out.append([int(a), int(b or a)])
    return out


def _pair(text):
    a, _, b = text.partition(":")
    return [int(a), int(b or a)]


# option name -> (config key, type, help)
OPTIONS = {
    "--K": ("K", float, "classical parameter K = k*T"),
    "--k": ("k", float, "kick strength"),
    "--T": ("T", float, "period / effective Planck constant (cylinder runs)"),
    "--L": ("L", int, "number of torus cells; sets T = 2*pi*L/N"),
    "--nq": ("nq", int, "number of qubits"),
    "--steps": ("steps", int, "map iterations"),
    "--particles": ("particles", int, "classical ensemble size"),
    "--p0": ("p0", float, "initial momentum (p units)"),
    "--n0": ("n0", int, "initial momentum level"),
    "--shots": ("shots", int, "projective measurements per estimate (0 = exact)"),
    "--measure-qubits": ("measure_qubits", int, "read only this many most significant qubits"),
    "--bins": ("bins", int, "histogram bin width in levels"),
    "--windows": ("windows", _windows, "averaging windows, e.g. 10:20,290:300"),
    "--window": ("window", _pair, "averaging window a:b"),
    "--trials": ("trials", int, "random states for circuit verification"),
    "--rows": ("rows", int, "grid rows (p)"),
    "--cols": ("cols", int, "grid columns (theta)"),
    "--s": ("s", float, "coherent-state squeezing d_p/d_theta"),
    "--theta-offset": ("theta_offset", float, "coherent-state displacement from theta = pi"),
    "--theta0": ("theta0", float, "coherent-state angle"),
    "--method": ("method", str, "center-of-mass or variance"),
    "--init": ("init", str, "initial state for husimi: momentum or coherent"),
    "--fit-start": ("fit_start", int, "first step of the diffusion fit"),
    "--seed": ("seed", int, "master RNG seed"),
    "--threads": ("threads", int, "worker threads"),
    "--max-qubits": ("max_qubits", int, "resource guard on nq"),
}

FLAGS = {
    "--exclude-island": ("exclude_island", "start the ensemble outside the main island"),
    "--emit-only": ("emit_only", "write the circuit without executing it"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sawtooth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with config fields (CLI options win)")
        p.add_argument("--out", help="output directory (default $SAWTOOTH_OUTPUT_DIR/<experiment>)")
        for opt, (dest, typ, help_) in OPTIONS.items():
            p.add_argument(opt, dest=dest, type=typ, default=None, help=help_)
        for opt, (dest, help_) in FLAGS.items():
            p.add_argument(opt, dest=dest, action="store_const", const=True, default=None, help=help_)
    r = sub.add_parser("replay", help="re-run from a config.json written by a previous run")
    r.add_argument("config_file")
    r.add_argument("--out", help="output directory (default <run dir>/replay)")
    return parser


def _fail(code, kind, message, errors=None):
    payload = {"error": kind, "message": message}
    if errors:
        payload["fields"] = errors
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def run(cfg: dict, out_dir) -> dict:
    """Execute a resolved config and write all artifacts; returns the summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    summary, artifacts = execute(cfg)
    wall = time.perf_counter() - start
    export.write_json(out / "config.json", {"sawtooth_version": __version__, "config": cfg})
    export.write_json(out / "summary.json", summary)
    for name, writer in artifacts.items():
        writer(out / name)
    meta = export.metadata(cfg, seed=cfg.get("seed"), wall_time_s=wall,
                           artifacts=sorted(["config.json", "summary.json", *artifacts]))
    export.write_json(out / "metadata.json", meta)
    return summary


def load_config_echo(path) -> dict:
    echo = json.loads(Path(path).read_text())
    if echo.get("sawtooth_version") != __version__:
        warnings.warn(f"config written by version {echo.get('sawtooth_version')}, "
                      f"running {__version__}; results may differ")
    cfg = dict(echo["config"])
    experiment = cfg.pop("experiment")
    return resolve_config(experiment, cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            cfg = load_config_echo(args.config_file)
            out = args.out or Path(args.config_file).parent / "replay"
        else:
            overrides = {}
            if args.config:
                overrides.update(json.loads(Path(args.config).read_text()))
                overrides.pop("experiment", None)
            for dest, _, _ in OPTIONS.values():
                if getattr(args, dest) is not None:
                    overrides[dest] = getattr(args, dest)
            for dest, _ in FLAGS.values():
                if getattr(args, dest) is not None:
                    overrides[dest] = True
            cfg = resolve_config(args.command, overrides)
            out = args.out or default_output_dir(args.command)
        summary = run(cfg, out)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc), exc.errors)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except ResourceGuard as exc:
        return _fail(EXIT_RESOURCE, "resource", str(exc))
    except InvariantViolation as exc:
        return _fail(EXIT_INVARIANT, "invariant", str(exc))
    sys.stdout.write(export.dumps(summary))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
