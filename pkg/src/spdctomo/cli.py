"""Batch command-line front end.

Subcommands wire JSON configs to the computation modules and persist results
with a run manifest: ``phase-map``, ``scan``, ``simulate``, ``reconstruct``,
``metrics``.  Angles in config files are degrees; outputs are CSV/JSON as
documented in ``fileio``.  Given identical inputs and seed, every subcommand
reproduces its outputs byte for byte (the manifest timestamp aside).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .fileio import (
    ConfigError,
    DatasetFormatError,
    compensator_from_config,
    crystal_from_config,
    load_config,
    read_dataset,
    read_density_matrix,
    write_dataset,
    write_density_matrix,
    write_phase_map,
    write_scan,
)
from .scans import AXIS_ANGULAR, AXIS_FREQUENCY, ScanConfig, run_scan
from .spdc import (
    SidebandMode,
    TWO_PI_C,
    band_averaged_state,
    phase_amplitude_grid,
    sideband_state,
)
from .tomography import (
    MLEOptions,
    fidelity,
    mle_reconstruct,
    purity,
    simulate_counts,
)


def _write_manifest(out_dir, command, config_paths, seed=None):
    payload = {
        "command": command,
        "config_paths": [str(p) for p in config_paths],
        "output_dir": str(out_dir),
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    (Path(out_dir) / "manifest.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _mode_from_config(payload, crystal, context="mode"):
    if not isinstance(payload, dict):
        raise ConfigError(f"{context}: expected object")
    theta = math.radians(float(payload.get("theta_deg", 0.0)))
    if "omega_rad_s" in payload:
        return SidebandMode(float(payload["omega_rad_s"]), theta)
    if "signal_wavelength_nm" in payload:
        return SidebandMode.from_signal_wavelength(
            float(payload["signal_wavelength_nm"]),
            crystal.pump_wavelength_nm,
            theta,
        )
    raise ConfigError(f"{context}: needs signal_wavelength_nm or omega_rad_s")


def cmd_phase_map(args):
    cfg = load_config(args.config)
    crystal = crystal_from_config(cfg.get("crystal", args.preset or "bbo_type2_406nm"))
    comp = compensator_from_config(
        cfg.get("compensator"), crystal.degenerate_wavelength_nm
    )
    span = cfg.get("signal_wavelength_span_nm")
    if not (isinstance(span, (list, tuple)) and len(span) == 2):
        raise ConfigError("signal_wavelength_span_nm: expected [min_nm, max_nm]")
    theta_span = cfg.get("theta_span_deg")
    if not (isinstance(theta_span, (list, tuple)) and len(theta_span) == 2):
        raise ConfigError("theta_span_deg: expected [min_deg, max_deg]")
    grid_shape = cfg.get("grid", [101, 101])
    if not (isinstance(grid_shape, (list, tuple)) and len(grid_shape) == 2):
        raise ConfigError("grid: expected [n_theta, n_omega]")

    omega_deg = TWO_PI_C / (crystal.degenerate_wavelength_nm * 1e-9)
    omega_range = tuple(
        TWO_PI_C / (w * 1e-9) - omega_deg for w in sorted(span, reverse=True)
    )
    theta_range = tuple(math.radians(t) for t in theta_span)
    grid = phase_amplitude_grid(
        crystal, omega_range, theta_range, (int(grid_shape[0]), int(grid_shape[1])), comp
    )
    out = _out_dir(args)
    write_phase_map(out / "phase_map.csv", grid)
    _write_manifest(out, "phase-map", [args.config])
    print(f"wrote {out / 'phase_map.csv'}")
    return 0


def cmd_scan(args):
    cfg = load_config(args.config)
    crystal = crystal_from_config(cfg.get("crystal", args.preset or "bbo_type2_406nm"))
    comp = compensator_from_config(
        cfg.get("compensator"), crystal.degenerate_wavelength_nm
    )
    axis = cfg.get("axis")
    if axis not in (AXIS_ANGULAR, AXIS_FREQUENCY):
        raise ConfigError(f"axis: expected '{AXIS_ANGULAR}' or '{AXIS_FREQUENCY}'")
    rng = cfg.get("range")
    if not (isinstance(rng, (list, tuple)) and len(rng) == 2):
        raise ConfigError("range: expected [start, stop]")
    points = int(cfg.get("points", 201))
    smear = cfg.get("smearing")

    if axis == AXIS_ANGULAR:
        start, stop = (math.radians(v) for v in rng)
        fixed_nm = float(cfg.get("fixed", crystal.degenerate_wavelength_nm))
        fixed = TWO_PI_C / (fixed_nm * 1e-9) - TWO_PI_C / (
            crystal.degenerate_wavelength_nm * 1e-9
        )
        smear = math.radians(smear) if smear else None
    else:
        start, stop = (float(v) for v in rng)
        fixed = math.radians(float(cfg.get("fixed", 0.0)))
        smear = float(smear) if smear else None

    try:
        config = ScanConfig(
            axis=axis,
            start=start,
            stop=stop,
            points=points,
            basis=cfg.get("basis", "diagonal"),
            fixed_coordinate=fixed,
            compensator=comp,
            normalization=float(cfg.get("normalization", 1.0)),
            smearing_width=smear,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    result = run_scan(config, crystal)
    out = _out_dir(args)
    write_scan(out / "scan.csv", result, sidecar_path=out / "scan_config.json")
    _write_manifest(out, "scan", [args.config])
    print(f"wrote {out / 'scan.csv'}")
    return 0


def cmd_simulate(args):
    cfg = load_config(args.config)
    crystal = crystal_from_config(cfg.get("crystal", args.preset or "bbo_type2_406nm"))
    comp = compensator_from_config(
        cfg.get("compensator"), crystal.degenerate_wavelength_nm
    )
    mode = _mode_from_config(cfg.get("mode", {}), crystal)
    band = cfg.get("band")
    if band:
        state = band_averaged_state(
            crystal,
            mode,
            freq_filter_fwhm_nm=float(band.get("frequency_fwhm_nm", 0.0)),
            ang_filter_width_rad=math.radians(float(band.get("angular_width_deg", 0.0))),
            comp=comp,
            quadrature_points=int(band.get("quadrature_points", 64)),
        )
    else:
        state = sideband_state(crystal, mode, comp).projector()
    rate = float(cfg.get("rate", 1000.0))
    time_s = float(cfg.get("time_s", 10.0))
    if time_s <= 0:
        raise ConfigError("time_s: must be > 0")
    if rate <= 0:
        raise ConfigError("rate: must be > 0")
    background = float(cfg.get("background_rate", 0.0))
    dataset = simulate_counts(state, rate, time_s, seed=args.seed, background=background)
    out = _out_dir(args)
    write_dataset(out / "dataset.csv", dataset)
    write_density_matrix(out / "true_state.json", state)
    _write_manifest(out, "simulate", [args.config], seed=args.seed)
    print(f"wrote {out / 'dataset.csv'}")
    return 0


def cmd_reconstruct(args):
    dataset = read_dataset(args.data, background_rate=args.background)
    target = read_density_matrix(args.target) if args.target else None
    result = mle_reconstruct(dataset, MLEOptions(), target=target)
    out = _out_dir(args)
    write_density_matrix(out / "rho_raw.json", result.rho_raw)
    write_density_matrix(out / "rho_mle.json", result.rho_mle)
    summary = {
        "log_likelihood": result.log_likelihood,
        "iterations": result.iterations,
        "converged": result.converged,
        "raw_min_eigenvalue": float(result.rho_raw.eigenvalues().min()),
        **result.metrics,
    }
    (out / "reconstruction.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    _write_manifest(out, "reconstruct", [args.data] + ([args.target] if args.target else []))
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_metrics(args):
    matrices = [(p, read_density_matrix(p)) for p in args.matrices]
    report = {"purity": {str(p): purity(m) for p, m in matrices}}
    pairs = {}
    for i in range(len(matrices)):
        for j in range(i + 1, len(matrices)):
            key = f"{matrices[i][0]} vs {matrices[j][0]}"
            pairs[key] = fidelity(matrices[i][1], matrices[j][1])
    if len(matrices) == 1:
        p, m = matrices[0]
        pairs[f"{p} vs {p}"] = fidelity(m, m)
    report["fidelity"] = pairs
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = _out_dir(args)
        (out / "metrics.json").write_text(text + "\n")
        _write_manifest(out, "metrics", list(args.matrices))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spdctomo",
        description="Sideband phase maps, interference scans and two-photon "
        "tomography for a type-II downconversion source.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase-map", help="phase/amplitude grid over the emission band")
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--preset", default=None, help="crystal preset when config omits it")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_phase_map)

    p = sub.add_parser("scan", help="angular or frequency interference scan")
    p.add_argument("--config", required=True)
    p.add_argument("--preset", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="synthesize a 16-setting coincidence dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--preset", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="linear inversion + MLE from a dataset CSV")
    p.add_argument("--data", required=True, help="dataset CSV path")
    p.add_argument("--target", default=None, help="density-matrix JSON for fidelity")
    p.add_argument("--background", type=float, default=0.0, help="background rate, counts/s")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("metrics", help="purity and pairwise fidelity of matrix files")
    p.add_argument("matrices", nargs="+", help="density-matrix JSON paths")
    p.add_argument("--out", default=None, help="optional output directory")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DatasetFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
