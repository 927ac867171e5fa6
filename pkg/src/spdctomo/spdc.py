"""Sideband structure of collinear type-II downconversion.

A correlated photon pair occupies conjugate frequency-angular modes
(omega, theta) and (-omega, -theta) around collinear degeneracy.  To first
order, the longitudinal wave-vector mismatch of the pair is

    mismatch = gvm * omega + angular_dispersion * theta

and the relative phase between the |HV> and |VH> branches of the emitted
state is mismatch * crystal_length.  The spectral amplitude of the
phase-matching is sinc(mismatch * L / 2).  A birefringent plate placed in the
common beam after the crystal adds a mode-dependent phase of the same linear
form and can flatten the total phase across the emission band.

Functions here are pure and operate on immutable parameter records; grids and
band averages are plain element-wise/quadrature evaluations of the same
scalar maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import (
    SPEED_OF_LIGHT,
    SellmeierSet,
    derive_walkoff,
    material,
)

TWO_PI_C = 2.0 * math.pi * SPEED_OF_LIGHT


@dataclass(frozen=True)
class SidebandMode:
    """One member of a correlated mode pair: detuning from degeneracy.

    omega_rad_s: angular-frequency detuning of this photon from half the pump
    frequency, rad/s.  theta_rad: internal propagation angle from the pump
    direction, radians.  The partner photon occupies the conjugate mode.
    """

    omega_rad_s: float = 0.0
    theta_rad: float = 0.0

    def conjugate(self):
        return SidebandMode(-self.omega_rad_s, -self.theta_rad)

    def signal_wavelength_nm(self, pump_wavelength_nm):
        """Vacuum wavelength of this mode's photon, nm."""
        omega_deg = TWO_PI_C / (2.0 * pump_wavelength_nm * 1e-9)
        return TWO_PI_C / (omega_deg + self.omega_rad_s) * 1e9

    def idler_wavelength_nm(self, pump_wavelength_nm):
        """Vacuum wavelength of the conjugate photon, nm."""
        return self.conjugate().signal_wavelength_nm(pump_wavelength_nm)

    @classmethod
    def from_signal_wavelength(cls, wavelength_nm, pump_wavelength_nm, theta_rad=0.0):
        omega_deg = TWO_PI_C / (2.0 * pump_wavelength_nm * 1e-9)
        omega = TWO_PI_C / (wavelength_nm * 1e-9) - omega_deg
        return cls(omega, theta_rad)


@dataclass(frozen=True)
class CrystalParams:
    """Nonlinear crystal geometry and first-order dispersion coefficients.

    gvm: group-delay mismatch between extraordinary and ordinary waves at
    degeneracy, s/m.  angular_dispersion: dk_e/dtheta, 1/(m rad).  When the
    Sellmeier sets are attached, the stored coefficients must agree with the
    values derived from them (see ``validate_dispersion``).
    """

    length_mm: float
    cut_angle_rad: float
    pump_wavelength_nm: float
    gvm: float
    angular_dispersion: float
    sellmeier_o: SellmeierSet | None = None
    sellmeier_e: SellmeierSet | None = None
    name: str = ""

    def __post_init__(self):
        if not self.length_mm > 0:
            raise ValueError(f"crystal length_mm must be > 0, got {self.length_mm}")
        if not self.pump_wavelength_nm > 0:
            raise ValueError(
                f"pump_wavelength_nm must be > 0, got {self.pump_wavelength_nm}"
            )
        if not 0.0 < self.cut_angle_rad < math.pi / 2:
            raise ValueError(
                f"cut_angle_rad must lie in (0, pi/2), got {self.cut_angle_rad}"
            )

    @property
    def length_m(self):
        return self.length_mm * 1e-3

    @property
    def degenerate_wavelength_nm(self):
        return 2.0 * self.pump_wavelength_nm

    @classmethod
    def from_sellmeier(
        cls, length_mm, cut_angle_rad, pump_wavelength_nm, sell_o, sell_e, name=""
    ):
        """Build a crystal with gvm/angular_dispersion derived from index data."""
        gvm, ang = derive_walkoff(
            sell_o, sell_e, cut_angle_rad, 2.0 * pump_wavelength_nm
        )
        return cls(
            length_mm=length_mm,
            cut_angle_rad=cut_angle_rad,
            pump_wavelength_nm=pump_wavelength_nm,
            gvm=gvm,
            angular_dispersion=ang,
            sellmeier_o=sell_o,
            sellmeier_e=sell_e,
            name=name,
        )

    @classmethod
    def from_material(cls, length_mm, cut_angle_rad, pump_wavelength_nm, material_key, name=""):
        sell_o, sell_e = material(material_key)
        return cls.from_sellmeier(
            length_mm, cut_angle_rad, pump_wavelength_nm, sell_o, sell_e, name=name
        )

    def validate_dispersion(self, rel_tol=1e-6):
        """Check stored coefficients against the attached Sellmeier data.

        No-op when no index data is attached.  Raises ValueError when a stored
        coefficient deviates from the derived one by more than rel_tol.
        """
        if self.sellmeier_o is None or self.sellmeier_e is None:
            return
        gvm, ang = derive_walkoff(
            self.sellmeier_o,
            self.sellmeier_e,
            self.cut_angle_rad,
            self.degenerate_wavelength_nm,
        )
        for label, stored, derived in (
            ("gvm", self.gvm, gvm),
            ("angular_dispersion", self.angular_dispersion, ang),
        ):
            if abs(stored - derived) > rel_tol * abs(derived):
                raise ValueError(
                    f"{label}={stored!r} inconsistent with index data "
                    f"(derived {derived!r})"
                )


@dataclass(frozen=True)
class CompensatorParams:
    """Birefringent plate traversed by both photons of the pair.

    gvm/angular_dispersion are the *pair* coefficients: because both photons
    pass the plate and occupy conjugate modes, the branch phase difference
    picks up twice the single-photon dispersion terms, while the constant
    retardation at degeneracy is common to both branches and cancels exactly.
    ``from_sellmeier`` includes the factor two; a direct coefficient pair is
    used as given.  A zero-length plate is the identity.
    """

    length_mm: float = 0.0
    axis_angle_rad: float = 0.0
    gvm: float = 0.0
    angular_dispersion: float = 0.0
    sellmeier_o: SellmeierSet | None = None
    sellmeier_e: SellmeierSet | None = None
    name: str = ""

    def __post_init__(self):
        if self.length_mm < 0:
            raise ValueError(f"compensator length_mm must be >= 0, got {self.length_mm}")

    @property
    def length_m(self):
        return self.length_mm * 1e-3

    @classmethod
    def from_sellmeier(
        cls, length_mm, axis_angle_rad, degenerate_wavelength_nm, sell_o, sell_e, name=""
    ):
        gvm, ang = derive_walkoff(
            sell_o, sell_e, axis_angle_rad, degenerate_wavelength_nm
        )
        return cls(
            length_mm=length_mm,
            axis_angle_rad=axis_angle_rad,
            gvm=2.0 * gvm,
            angular_dispersion=2.0 * ang,
            sellmeier_o=sell_o,
            sellmeier_e=sell_e,
            name=name,
        )

    @classmethod
    def from_material(cls, length_mm, axis_angle_rad, degenerate_wavelength_nm, material_key, name=""):
        sell_o, sell_e = material(material_key)
        return cls.from_sellmeier(
            length_mm, axis_angle_rad, degenerate_wavelength_nm, sell_o, sell_e, name=name
        )

    @classmethod
    def exact_cancellation(cls, crystal: CrystalParams, length_mm=1.0):
        """Plate whose pair coefficients cancel the crystal phase identically."""
        scale = crystal.length_mm / length_mm
        return cls(
            length_mm=length_mm,
            axis_angle_rad=crystal.cut_angle_rad,
            gvm=-crystal.gvm * scale,
            angular_dispersion=-crystal.angular_dispersion * scale,
            name="exact-cancellation",
        )


@dataclass(frozen=True, eq=False)
class PhaseMapGrid:
    """Relative phase and |spectral amplitude| sampled on a (theta, omega) grid."""

    omega_axis: np.ndarray
    theta_axis: np.ndarray
    phase: np.ndarray
    amplitude: np.ndarray
    pump_wavelength_nm: float

    def __post_init__(self):
        shape = (len(self.theta_axis), len(self.omega_axis))
        if self.phase.shape != shape or self.amplitude.shape != shape:
            raise ValueError(
                f"grid shape mismatch: phase {self.phase.shape}, "
                f"amplitude {self.amplitude.shape}, expected {shape}"
            )


def phase_mismatch(crystal: CrystalParams, mode: SidebandMode):
    """Longitudinal wave-vector mismatch of the pair at this mode, rad/m."""
    return crystal.gvm * mode.omega_rad_s + crystal.angular_dispersion * mode.theta_rad


def compensator_phase(comp: CompensatorParams | None, mode: SidebandMode):
    """Mode-dependent phase added by the plate to the |VH> branch, radians.

    The constant retardation at exact degeneracy is common to both branches
    of the pair state (both photons traverse the plate) and drops out of the
    relative phase, so the value at (0, 0) is exactly zero.
    """
    if comp is None or comp.length_mm == 0.0:
        return 0.0
    return (
        comp.gvm * mode.omega_rad_s + comp.angular_dispersion * mode.theta_rad
    ) * comp.length_m


def relative_phase(crystal: CrystalParams, mode: SidebandMode, comp=None):
    """Total relative phase between the |HV> and |VH> branches, radians.

    Not wrapped; callers may reduce to (-pi, pi] with ``wrap_phase``.
    """
    return phase_mismatch(crystal, mode) * crystal.length_m + compensator_phase(
        comp, mode
    )


def wrap_phase(phi):
    """Reduce a phase to the interval (-pi, pi]."""
    wrapped = np.mod(np.asarray(phi) + math.pi, 2.0 * math.pi) - math.pi
    return np.where(wrapped == -math.pi, math.pi, wrapped)[()]


def _sinc(x):
    # numpy's sinc is sin(pi x)/(pi x)
    return np.sinc(np.asarray(x) / math.pi)


def spectral_amplitude(crystal: CrystalParams, mode: SidebandMode):
    """Phase-matching amplitude sinc(mismatch * L / 2); 1 at exact degeneracy."""
    return float(_sinc(phase_mismatch(crystal, mode) * crystal.length_m / 2.0))


def sideband_state(crystal: CrystalParams, mode: SidebandMode, comp=None):
    """Pair state post-selected at a fixed mode: (|HV> + e^{i phi}|VH>)/sqrt(2).

    The first ket slot is the photon in ``mode``; the second is its conjugate
    partner.  Returns a PureState over the basis (HH, HV, VH, VV).
    """
    from .tomography import PureState

    phi = relative_phase(crystal, mode, comp)
    amps = np.array(
        [0.0, 1.0 / math.sqrt(2.0), np.exp(1j * phi) / math.sqrt(2.0), 0.0]
    )
    return PureState(amps)


def _axis(start, stop, count):
    if count < 1:
        raise ValueError(f"axis resolution must be >= 1, got {count}")
    if count == 1:
        return np.array([(start + stop) / 2.0])
    return np.linspace(start, stop, count)


def phase_amplitude_grid(
    crystal: CrystalParams,
    omega_range,
    theta_range,
    resolution,
    comp=None,
):
    """Evaluate relative phase and |amplitude| on a rectangular mode grid.

    ``omega_range``/``theta_range`` are (start, stop) in rad/s and rad;
    ``resolution`` is a point count per axis or a (theta_count, omega_count)
    pair.  Endpoints are included; a single-point axis samples the midpoint.
    """
    if np.isscalar(resolution):
        n_theta = n_omega = int(resolution)
    else:
        n_theta, n_omega = (int(r) for r in resolution)
    omega_axis = _axis(omega_range[0], omega_range[1], n_omega)
    theta_axis = _axis(theta_range[0], theta_range[1], n_theta)

    th, om = np.meshgrid(theta_axis, omega_axis, indexing="ij")
    mism = crystal.gvm * om + crystal.angular_dispersion * th
    phase = mism * crystal.length_m
    if comp is not None and comp.length_mm > 0.0:
        phase = phase + (comp.gvm * om + comp.angular_dispersion * th) * comp.length_m
    amplitude = np.abs(_sinc(mism * crystal.length_m / 2.0))
    return PhaseMapGrid(
        omega_axis=omega_axis,
        theta_axis=theta_axis,
        phase=phase,
        amplitude=amplitude,
        pump_wavelength_nm=crystal.pump_wavelength_nm,
    )


def frequency_fwhm_to_omega_sigma(fwhm_nm, degenerate_wavelength_nm):
    """Gaussian sigma in rad/s for a filter FWHM given in nm near degeneracy."""
    sigma_lambda_m = fwhm_nm * 1e-9 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    return TWO_PI_C * sigma_lambda_m / (degenerate_wavelength_nm * 1e-9) ** 2


def band_averaged_state(
    crystal: CrystalParams,
    center_mode: SidebandMode,
    freq_filter_fwhm_nm=0.0,
    ang_filter_width_rad=0.0,
    comp=None,
    quadrature_points=64,
):
    """Mixed state collected through finite frequency and angular filters.

    Averages the pure-state projector over the filter window, weighted by the
    squared phase-matching amplitude: a Gaussian window (given FWHM in nm) on
    the frequency axis and a top-hat window (full width in rad) on the angular
    axis.  Gauss-Legendre quadrature covers +-3 sigma of the Gaussian and the
    exact top-hat support; a zero-width filter collapses its axis to the
    centre value.  Returns a trace-one DensityMatrix.
    """
    from .tomography import DensityMatrix

    if freq_filter_fwhm_nm < 0 or ang_filter_width_rad < 0:
        raise ValueError("filter bandwidths must be >= 0")
    if quadrature_points < 1:
        raise ValueError("quadrature_points must be >= 1")

    if freq_filter_fwhm_nm > 0:
        sigma = frequency_fwhm_to_omega_sigma(
            freq_filter_fwhm_nm, crystal.degenerate_wavelength_nm
        )
        nodes, weights = np.polynomial.legendre.leggauss(quadrature_points)
        omega = center_mode.omega_rad_s + 3.0 * sigma * nodes
        w_omega = np.exp(
            -0.5 * ((omega - center_mode.omega_rad_s) / sigma) ** 2
        ) * (3.0 * sigma * weights)
    else:
        omega = np.array([center_mode.omega_rad_s])
        w_omega = np.array([1.0])

    if ang_filter_width_rad > 0:
        nodes, weights = np.polynomial.legendre.leggauss(quadrature_points)
        half = ang_filter_width_rad / 2.0
        theta = center_mode.theta_rad + half * nodes
        w_theta = half * weights
    else:
        theta = np.array([center_mode.theta_rad])
        w_theta = np.array([1.0])

    om, th = np.meshgrid(omega, theta, indexing="ij")
    ww = np.outer(w_omega, w_theta)
    mism = crystal.gvm * om + crystal.angular_dispersion * th
    phi = mism * crystal.length_m
    if comp is not None and comp.length_mm > 0.0:
        phi = phi + (comp.gvm * om + comp.angular_dispersion * th) * comp.length_m
    weight = ww * _sinc(mism * crystal.length_m / 2.0) ** 2

    total = float(np.sum(weight))
    if total <= 0.0:
        raise ValueError(
            "filter window lies entirely outside the emission band "
            "(all quadrature weights vanish)"
        )

    # state (0, 1, e^{i phi}, 0)/sqrt(2): only four matrix entries depend on phi
    mean_phase = np.sum(weight * np.exp(1j * phi)) / total
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = 0.5
    rho[2, 2] = 0.5
    rho[1, 2] = 0.5 * np.conj(mean_phase)
    rho[2, 1] = 0.5 * mean_phase
    return DensityMatrix(rho)
