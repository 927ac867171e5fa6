"""Jones calculus for the two-arm polarization analyzers.

Each analyzer is a quarter-wave plate, a half-wave plate and a polarizing
beam splitter transmitting horizontal light, in that beam order.  A setting
therefore projects the incoming photon onto the unique polarization

    |a> = QWP(q)^dag HWP(h)^dag |H>

that reaches the detector with unit probability.  Coincidences project the
pair onto product vectors |a> (x) |b>, with the angular-selective arm in the
first slot.  ``j16_settings`` returns the standard 16-projection tomography
protocol realized with these plates.

Conventions: plate matrices are unitary with fast axis measured from
horizontal; hwp(0) = diag(1, -1) and qwp(0) = diag(1, i), both defined up to
a global phase (only projectors are convention independent).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ANGULAR_ARM = "angular"
FREQUENCY_ARM = "frequency"

H_KET = np.array([1.0, 0.0], dtype=complex)


def hwp(angle_rad):
    """Half-wave plate with fast axis at ``angle_rad`` from horizontal."""
    c = math.cos(2.0 * angle_rad)
    s = math.sin(2.0 * angle_rad)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp(angle_rad):
    """Quarter-wave plate with fast axis at ``angle_rad`` from horizontal."""
    c = math.cos(angle_rad)
    s = math.sin(angle_rad)
    return np.array(
        [
            [c * c + 1j * s * s, (1.0 - 1j) * s * c],
            [(1.0 - 1j) * s * c, s * s + 1j * c * c],
        ]
    )


@dataclass(frozen=True)
class AnalyzerSetting:
    """Wave-plate orientation of one analyzer arm; angles stored in [0, pi)."""

    qwp_angle_rad: float
    hwp_angle_rad: float
    arm: str = ANGULAR_ARM

    def __post_init__(self):
        object.__setattr__(self, "qwp_angle_rad", float(self.qwp_angle_rad) % math.pi)
        object.__setattr__(self, "hwp_angle_rad", float(self.hwp_angle_rad) % math.pi)
        if self.arm not in (ANGULAR_ARM, FREQUENCY_ARM):
            raise ValueError(f"arm must be '{ANGULAR_ARM}' or '{FREQUENCY_ARM}'")


def analyzer_ket(setting: AnalyzerSetting):
    """Polarization transmitted with unit probability by this setting.

    Back-propagates |H> through the plates against the beam order.
    """
    return (
        qwp(setting.qwp_angle_rad).conj().T
        @ hwp(setting.hwp_angle_rad).conj().T
        @ H_KET
    )


@dataclass(frozen=True, eq=False)
class TwoPhotonProjector:
    """Separable coincidence projection |a> (x) |b>, angular arm first."""

    vector: np.ndarray
    setting_a: AnalyzerSetting
    setting_b: AnalyzerSetting

    def __post_init__(self):
        norm = np.linalg.norm(self.vector)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"projector vector norm {norm} != 1")

    def operator(self):
        return np.outer(self.vector, self.vector.conj())


def two_photon_projector(a: AnalyzerSetting, b: AnalyzerSetting):
    """Coincidence projector for a pair of analyzer settings."""
    vec = np.kron(analyzer_ket(a), analyzer_ket(b))
    return TwoPhotonProjector(vector=vec, setting_a=a, setting_b=b)


# Single-arm plate angles realizing the six standard polarizations, radians.
# D = (H+V)/sqrt2, A = (H-V)/sqrt2, R = (H-iV)/sqrt2, L = (H+iV)/sqrt2.
SINGLE_ARM_ANGLES = {
    "H": (0.0, 0.0),
    "V": (0.0, math.pi / 4),
    "D": (math.pi / 4, math.pi / 8),
    "A": (math.pi / 4, 7 * math.pi / 8),
    "R": (0.0, math.pi / 8),
    "L": (0.0, 3 * math.pi / 8),
}

# Canonical projection order of the 16-setting two-photon protocol.
J16_LABELS = (
    "HH", "HV", "VV", "VH",
    "RH", "RV", "DV", "DH",
    "DR", "DD", "RD", "HD",
    "VD", "VL", "HL", "RL",
)


def j16_settings():
    """The 16 analyzer-setting pairs of the tomography protocol, in order."""
    pairs = []
    for label in J16_LABELS:
        qa, ha = SINGLE_ARM_ANGLES[label[0]]
        qb, hb = SINGLE_ARM_ANGLES[label[1]]
        pairs.append(
            (
                AnalyzerSetting(qa, ha, arm=ANGULAR_ARM),
                AnalyzerSetting(qb, hb, arm=FREQUENCY_ARM),
            )
        )
    return pairs


def j16_projectors():
    """Coincidence projectors for the canonical protocol, in order."""
    return [two_photon_projector(a, b) for a, b in j16_settings()]


def measurement_matrix(projectors=None):
    """16x16 map from a vectorized density matrix to projection probabilities.

    Row i is the conjugated row-major vectorization of projector i, so that
    M @ vec(rho) gives <p_i|rho|p_i>.
    """
    if projectors is None:
        projectors = j16_projectors()
    return np.array([p.operator().conj().reshape(-1) for p in projectors])
