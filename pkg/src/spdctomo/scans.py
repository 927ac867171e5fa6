"""Two-photon interference scans across the emission band.

With one analyzer at +45 degrees and the other flipped between +45 and -45,
the coincidence rates at a mode with relative phase phi are

    copolar    = sinc^2(phi/2) cos^2(phi/2)
    crosspolar = sinc^2(phi/2) sin^2(phi/2)

The sinc envelope is fixed at generation (crystal phase only); a compensator
shifts the oscillation phase but not the envelope, so a scan of a perfectly
compensated band shows the bare envelope in the copolar channel and zero in
the crosspolar one.  In the natural H/V basis the projection is phase
insensitive and both channels sit at half the envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spdc import CompensatorParams, CrystalParams, TWO_PI_C

AXIS_ANGULAR = "angular"
AXIS_FREQUENCY = "frequency"
BASIS_NATURAL = "natural"
BASIS_DIAGONAL = "diagonal"


def _sinc_half(phi):
    # sin(phi/2)/(phi/2); numpy's sinc carries the extra pi
    return np.sinc(np.asarray(phi) / (2.0 * math.pi))


def eq5_rates(phi):
    """(copolar, crosspolar) interference rates at relative phase ``phi``."""
    env = _sinc_half(phi) ** 2
    half = np.asarray(phi) / 2.0
    return (env * np.cos(half) ** 2)[()], (env * np.sin(half) ** 2)[()]


@dataclass(frozen=True)
class ScanConfig:
    """One interference scan: which sideband coordinate varies, and how.

    ``axis`` chooses the scanned coordinate; the conjugate coordinate stays
    at ``fixed_coordinate`` (theta in rad for frequency scans, omega in rad/s
    for angular scans).  Frequency scans are specified by signal wavelength in
    nm.  Points sample the centres of ``points`` uniform bins across
    [start, stop].  ``smearing_width`` optionally convolves the result with a
    Gaussian of that width (axis units) to mimic detector resolution.
    """

    axis: str
    start: float
    stop: float
    points: int
    basis: str = BASIS_DIAGONAL
    fixed_coordinate: float = 0.0
    compensator: CompensatorParams | None = None
    normalization: float = 1.0
    smearing_width: float | None = None

    def __post_init__(self):
        if self.axis not in (AXIS_ANGULAR, AXIS_FREQUENCY):
            raise ValueError(f"axis must be '{AXIS_ANGULAR}' or '{AXIS_FREQUENCY}'")
        if self.basis not in (BASIS_NATURAL, BASIS_DIAGONAL):
            raise ValueError(f"basis must be '{BASIS_NATURAL}' or '{BASIS_DIAGONAL}'")
        if self.points < 2:
            raise ValueError("scan needs at least 2 points")
        if self.start == self.stop:
            raise ValueError("scan range is degenerate")
        if self.normalization <= 0:
            raise ValueError("normalization must be > 0")


@dataclass(frozen=True, eq=False)
class ScanResult:
    """Per-point rates of one scan; copolar + crosspolar equals the envelope."""

    axis: str
    basis: str
    axis_values: np.ndarray
    copolar: np.ndarray
    crosspolar: np.ndarray
    envelope: np.ndarray
    phase: np.ndarray
    config: ScanConfig = field(repr=False, default=None)


def _bin_centers(start, stop, points):
    width = (stop - start) / points
    return start + width * (np.arange(points) + 0.5)


def _smear(values, axis_values, width):
    step = abs(axis_values[1] - axis_values[0])
    half_span = int(math.ceil(4.0 * width / step))
    offsets = np.arange(-half_span, half_span + 1) * step
    kernel = np.exp(-0.5 * (offsets / width) ** 2)
    kernel /= kernel.sum()
    padded = np.pad(values, half_span, mode="edge")
    return np.convolve(padded, kernel, mode="valid")


def run_scan(config: ScanConfig, crystal: CrystalParams):
    """Evaluate the configured scan against a crystal (pure, deterministic)."""
    axis_values = _bin_centers(config.start, config.stop, config.points)
    if config.axis == AXIS_FREQUENCY:
        omega_deg = TWO_PI_C / (crystal.degenerate_wavelength_nm * 1e-9)
        omegas = TWO_PI_C / (axis_values * 1e-9) - omega_deg
        thetas = np.full_like(omegas, config.fixed_coordinate)
    else:
        thetas = axis_values
        omegas = np.full_like(thetas, config.fixed_coordinate)

    mism = crystal.gvm * omegas + crystal.angular_dispersion * thetas
    phi_gen = mism * crystal.length_m
    phi_total = phi_gen.copy()
    comp = config.compensator
    if comp is not None and comp.length_mm > 0.0:
        phi_total = phi_total + (
            comp.gvm * omegas + comp.angular_dispersion * thetas
        ) * comp.length_m

    envelope = config.normalization * _sinc_half(phi_gen) ** 2
    if config.basis == BASIS_DIAGONAL:
        copolar = envelope * np.cos(phi_total / 2.0) ** 2
        crosspolar = envelope * np.sin(phi_total / 2.0) ** 2
    else:
        copolar = 0.5 * envelope
        crosspolar = 0.5 * envelope

    if config.smearing_width:
        copolar = _smear(copolar, axis_values, config.smearing_width)
        crosspolar = _smear(crosspolar, axis_values, config.smearing_width)
        envelope = _smear(envelope, axis_values, config.smearing_width)

    return ScanResult(
        axis=config.axis,
        basis=config.basis,
        axis_values=axis_values,
        copolar=copolar,
        crosspolar=crosspolar,
        envelope=envelope,
        phase=phi_total,
        config=config,
    )
