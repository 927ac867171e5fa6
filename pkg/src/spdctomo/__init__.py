"""Sideband-resolved polarization entanglement toolkit.

Models the frequency-angular structure of the pair states emitted by a
collinear type-II downconversion source, generates the matching two-photon
interference scans and 16-setting tomography data, and reconstructs density
matrices by linear inversion and maximum-likelihood estimation.
"""

__version__ = "0.1.0"

from .dispersion import SellmeierSet, derive_walkoff, material
from .polarization import (
    AnalyzerSetting,
    J16_LABELS,
    TwoPhotonProjector,
    analyzer_ket,
    hwp,
    j16_projectors,
    j16_settings,
    measurement_matrix,
    qwp,
    two_photon_projector,
)
from .scans import ScanConfig, ScanResult, eq5_rates, run_scan
from .spdc import (
    CompensatorParams,
    CrystalParams,
    PhaseMapGrid,
    SidebandMode,
    band_averaged_state,
    compensator_phase,
    phase_amplitude_grid,
    phase_mismatch,
    relative_phase,
    sideband_state,
    spectral_amplitude,
    wrap_phase,
)
from .tomography import (
    DensityMatrix,
    MLEOptions,
    PureState,
    ReconstructionResult,
    TomographyDataset,
    expected_rate,
    expected_rates,
    fidelity,
    linear_inversion,
    log_likelihood,
    mle_reconstruct,
    project_to_physical,
    purity,
    simulate_counts,
)

__all__ = [
    "__version__",
    "SellmeierSet",
    "derive_walkoff",
    "material",
    "AnalyzerSetting",
    "J16_LABELS",
    "TwoPhotonProjector",
    "analyzer_ket",
    "hwp",
    "j16_projectors",
    "j16_settings",
    "measurement_matrix",
    "qwp",
    "two_photon_projector",
    "ScanConfig",
    "ScanResult",
    "eq5_rates",
    "run_scan",
    "CompensatorParams",
    "CrystalParams",
    "PhaseMapGrid",
    "SidebandMode",
    "band_averaged_state",
    "compensator_phase",
    "phase_amplitude_grid",
    "phase_mismatch",
    "relative_phase",
    "sideband_state",
    "spectral_amplitude",
    "wrap_phase",
    "DensityMatrix",
    "MLEOptions",
    "PureState",
    "ReconstructionResult",
    "TomographyDataset",
    "expected_rate",
    "expected_rates",
    "fidelity",
    "linear_inversion",
    "log_likelihood",
    "mle_reconstruct",
    "project_to_physical",
    "purity",
    "simulate_counts",
]
