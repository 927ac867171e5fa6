"""File formats and preset loading.

Schemas (all numbers full precision, angles in files are degrees):

* density matrix JSON: ``{"basis": ["HH","HV","VH","VV"], "re": [[..]x4],
  "im": [[..]x4]}``, row-major.
* dataset CSV: header ``index,qwp1_deg,hwp1_deg,qwp2_deg,hwp2_deg,counts,time_s``,
  16 rows in protocol order; arm 1 is the angular-selective arm.
* protocol table CSV: ``index,qwp1_deg,hwp1_deg,qwp2_deg,hwp2_deg,label``.
* phase map CSV: ``theta_rad,omega_rads,wavelength_signal_nm,phase_rad,amplitude``.
* scan CSV: ``axis_value,copolar,crosspolar,envelope,phase_rad`` plus a JSON
  sidecar with the generating configuration.
* crystal/compensator configs: JSON objects documented in the README; presets
  are shipped under ``spdctomo/data/presets`` and extra search directories can
  be given in the ``SPDCTOMO_PRESET_PATH`` environment variable
  (os.pathsep-separated).
"""

from __future__ import annotations

import csv
import json
import math
import os
from importlib import resources
from pathlib import Path

import numpy as np

from .dispersion import SellmeierSet, material
from .polarization import J16_LABELS, j16_settings
from .spdc import CompensatorParams, CrystalParams
from .scans import ScanConfig, ScanResult
from .tomography import BASIS_LABELS, DensityMatrix, TomographyDataset

PRESET_ENV_VAR = "SPDCTOMO_PRESET_PATH"


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key."""


class DatasetFormatError(ValueError):
    """Malformed dataset file; the message names the offending line."""


# ---------------------------------------------------------------- matrices

def density_matrix_to_json(rho: DensityMatrix):
    return {
        "basis": list(BASIS_LABELS),
        "re": rho.matrix.real.tolist(),
        "im": rho.matrix.imag.tolist(),
    }


def density_matrix_from_json(payload, raw=False):
    if list(payload.get("basis", [])) != list(BASIS_LABELS):
        raise ConfigError(
            f"basis: expected {list(BASIS_LABELS)}, got {payload.get('basis')!r}"
        )
    matrix = np.array(payload["re"], dtype=float) + 1j * np.array(
        payload["im"], dtype=float
    )
    return DensityMatrix(matrix, raw=raw)


def write_density_matrix(path, rho: DensityMatrix):
    Path(path).write_text(
        json.dumps(density_matrix_to_json(rho), indent=2, sort_keys=True) + "\n"
    )


def read_density_matrix(path, raw=False):
    return density_matrix_from_json(json.loads(Path(path).read_text()), raw=raw)


# ----------------------------------------------------------------- dataset

DATASET_HEADER = ["index", "qwp1_deg", "hwp1_deg", "qwp2_deg", "hwp2_deg", "counts", "time_s"]


def write_dataset(path, data: TomographyDataset):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_HEADER)
        for i, ((a, b), n, t) in enumerate(
            zip(data.settings, data.counts, data.acquisition_times_s)
        ):
            writer.writerow(
                [
                    i,
                    f"{math.degrees(a.qwp_angle_rad):.10g}",
                    f"{math.degrees(a.hwp_angle_rad):.10g}",
                    f"{math.degrees(b.qwp_angle_rad):.10g}",
                    f"{math.degrees(b.hwp_angle_rad):.10g}",
                    int(n),
                    f"{t:.10g}",
                ]
            )


def read_dataset(path, background_rate=0.0):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != DATASET_HEADER:
            raise DatasetFormatError(
                f"{path}: line 1: expected header {','.join(DATASET_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 7:
                raise DatasetFormatError(f"{path}: line {lineno}: expected 7 fields")
            try:
                counts = float(row[5])
                time_s = float(row[6])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {lineno}: {exc}") from exc
            if counts < 0 or counts != round(counts):
                raise DatasetFormatError(
                    f"{path}: line {lineno}: counts must be a non-negative integer"
                )
            if time_s <= 0:
                raise DatasetFormatError(f"{path}: line {lineno}: time_s must be > 0")
            rows.append((counts, time_s))
    if len(rows) != 16:
        raise DatasetFormatError(f"{path}: expected 16 data rows, found {len(rows)}")
    return TomographyDataset(
        settings=tuple(j16_settings()),
        counts=np.array([r[0] for r in rows]),
        acquisition_times_s=np.array([r[1] for r in rows]),
        background_rate=background_rate,
    )


def write_protocol_table(path):
    """Export the canonical 16-setting table."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "qwp1_deg", "hwp1_deg", "qwp2_deg", "hwp2_deg", "label"])
        for i, ((a, b), label) in enumerate(zip(j16_settings(), J16_LABELS)):
            writer.writerow(
                [
                    i,
                    f"{math.degrees(a.qwp_angle_rad):.10g}",
                    f"{math.degrees(a.hwp_angle_rad):.10g}",
                    f"{math.degrees(b.qwp_angle_rad):.10g}",
                    f"{math.degrees(b.hwp_angle_rad):.10g}",
                    label,
                ]
            )


# --------------------------------------------------------------- phase map

def write_phase_map(path, grid):
    """Phase/amplitude grid as CSV, theta-major row order."""
    from .spdc import TWO_PI_C

    omega_deg = TWO_PI_C / (grid.pump_wavelength_nm * 2.0 * 1e-9)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["theta_rad", "omega_rads", "wavelength_signal_nm", "phase_rad", "amplitude"]
        )
        for i, theta in enumerate(grid.theta_axis):
            for j, omega in enumerate(grid.omega_axis):
                wavelength = TWO_PI_C / (omega_deg + omega) * 1e9
                writer.writerow(
                    [
                        f"{theta:.17g}",
                        f"{omega:.17g}",
                        f"{wavelength:.17g}",
                        f"{grid.phase[i, j]:.17g}",
                        f"{grid.amplitude[i, j]:.17g}",
                    ]
                )


# -------------------------------------------------------------------- scan

def write_scan(path, result: ScanResult, sidecar_path=None):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis_value", "copolar", "crosspolar", "envelope", "phase_rad"])
        for row in zip(
            result.axis_values, result.copolar, result.crosspolar,
            result.envelope, result.phase,
        ):
            writer.writerow([f"{v:.17g}" for v in row])
    if sidecar_path is not None and result.config is not None:
        cfg = result.config
        payload = {
            "axis": cfg.axis,
            "start": cfg.start,
            "stop": cfg.stop,
            "points": cfg.points,
            "basis": cfg.basis,
            "fixed_coordinate": cfg.fixed_coordinate,
            "normalization": cfg.normalization,
            "smearing_width": cfg.smearing_width,
            "compensator": None
            if cfg.compensator is None
            else compensator_to_config(cfg.compensator),
        }
        Path(sidecar_path).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )


# ----------------------------------------------------------------- configs

def _preset_dirs():
    dirs = []
    env = os.environ.get(PRESET_ENV_VAR)
    if env:
        dirs.extend(Path(p) for p in env.split(os.pathsep) if p)
    return dirs


def _load_preset(name):
    for directory in _preset_dirs():
        candidate = directory / f"{name}.json"
        if candidate.exists():
            return json.loads(candidate.read_text())
    packaged = resources.files("spdctomo.data").joinpath("presets", f"{name}.json")
    try:
        return json.loads(packaged.read_text())
    except FileNotFoundError:
        raise ConfigError(f"preset: unknown preset {name!r}") from None


def _require(payload, key, kind, context):
    if key not in payload:
        raise ConfigError(f"{context}.{key}: missing required key")
    value = payload[key]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(
            f"{context}.{key}: expected {kind.__name__}, got {value!r}"
        ) from None


def _sellmeier_pair(payload, context):
    """Either a 'material' registry key or inline 'sellmeier_o'/'sellmeier_e'."""
    if "material" in payload:
        try:
            return material(str(payload["material"]))
        except KeyError as exc:
            raise ConfigError(f"{context}.material: {exc}") from None
    if "sellmeier_o" in payload or "sellmeier_e" in payload:
        try:
            return (
                SellmeierSet.from_dict(payload["sellmeier_o"]),
                SellmeierSet.from_dict(payload["sellmeier_e"]),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{context}.sellmeier_o/e: {exc}") from None
    return None, None


def crystal_from_config(payload, context="crystal"):
    """Build CrystalParams from a config dict or preset name.

    Keys: length_mm, cut_angle_deg, pump_wavelength_nm, and either explicit
    gvm/angular_dispersion, a material key, or inline Sellmeier sets.  When
    both explicit coefficients and index data are present they must agree.
    """
    if isinstance(payload, str):
        name = payload
        payload = _load_preset(payload)
        context = f"{context}({name})"
    if not isinstance(payload, dict):
        raise ConfigError(f"{context}: expected object or preset name")
    length = _require(payload, "length_mm", float, context)
    cut = math.radians(_require(payload, "cut_angle_deg", float, context))
    pump = _require(payload, "pump_wavelength_nm", float, context)
    sell_o, sell_e = _sellmeier_pair(payload, context)
    try:
        if "gvm" in payload or "angular_dispersion" in payload:
            crystal = CrystalParams(
                length_mm=length,
                cut_angle_rad=cut,
                pump_wavelength_nm=pump,
                gvm=_require(payload, "gvm", float, context),
                angular_dispersion=_require(payload, "angular_dispersion", float, context),
                sellmeier_o=sell_o,
                sellmeier_e=sell_e,
                name=str(payload.get("name", "")),
            )
            crystal.validate_dispersion()
            return crystal
        if sell_o is None:
            raise ConfigError(
                f"{context}: needs gvm/angular_dispersion or material/sellmeier data"
            )
        return CrystalParams.from_sellmeier(
            length, cut, pump, sell_o, sell_e, name=str(payload.get("name", ""))
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from None


def compensator_from_config(payload, degenerate_wavelength_nm=812.0, context="compensator"):
    """Build CompensatorParams from a config dict or preset name (or None)."""
    if payload is None:
        return None
    if isinstance(payload, str):
        name = payload
        payload = _load_preset(payload)
        context = f"{context}({name})"
    if not isinstance(payload, dict):
        raise ConfigError(f"{context}: expected object, preset name or null")
    length = _require(payload, "length_mm", float, context)
    axis = math.radians(_require(payload, "axis_angle_deg", float, context))
    sell_o, sell_e = _sellmeier_pair(payload, context)
    try:
        if "gvm" in payload or "angular_dispersion" in payload:
            return CompensatorParams(
                length_mm=length,
                axis_angle_rad=axis,
                gvm=_require(payload, "gvm", float, context),
                angular_dispersion=_require(payload, "angular_dispersion", float, context),
                sellmeier_o=sell_o,
                sellmeier_e=sell_e,
                name=str(payload.get("name", "")),
            )
        if sell_o is None:
            raise ConfigError(
                f"{context}: needs gvm/angular_dispersion or material/sellmeier data"
            )
        return CompensatorParams.from_sellmeier(
            length,
            axis,
            float(payload.get("degenerate_wavelength_nm", degenerate_wavelength_nm)),
            sell_o,
            sell_e,
            name=str(payload.get("name", "")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from None


def compensator_to_config(comp: CompensatorParams):
    return {
        "length_mm": comp.length_mm,
        "axis_angle_deg": math.degrees(comp.axis_angle_rad),
        "gvm": comp.gvm,
        "angular_dispersion": comp.angular_dispersion,
        "name": comp.name,
    }


def load_config(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
