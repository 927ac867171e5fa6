"""Two-photon state reconstruction from 16-setting coincidence data.

Forward model: the coincidence rate at setting i is
``n0 * <p_i|rho|p_i> + background``.  Poisson counts accumulated over the
acquisition time feed two reconstructions:

* ``linear_inversion`` solves the 16x16 linear system exactly.  The result is
  Hermitian with unit trace but may carry negative eigenvalues at low counts;
  it is tagged ``raw``.
* ``mle_reconstruct`` maximizes the Poisson log-likelihood over the physical
  cone using the lower-triangular factorization rho = T^dag T / tr(T^dag T),
  warm-started from the positivity-projected linear inversion.  The scale of
  T absorbs the unknown count normalization, so the optimizer works on 16
  unconstrained real parameters with an analytic gradient.

Fidelity follows the Uhlmann formula and reduces to <psi|rho|psi> for a pure
reference state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .polarization import AnalyzerSetting, j16_projectors, j16_settings, measurement_matrix

BASIS_LABELS = ("HH", "HV", "VH", "VV")

# |ab> -> |ba> relabelling between the two ket slots
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=float
)


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized four-level amplitude vector over (HH, HV, VH, VV)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(4)
        object.__setattr__(self, "amplitudes", amps)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm} != 1")

    def projector(self):
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    @classmethod
    def bell_pair(cls, phase_rad=0.0):
        """(|HV> + e^{i phase}|VH>)/sqrt(2)."""
        return cls(
            np.array([0.0, 1.0, np.exp(1j * phase_rad), 0.0]) / math.sqrt(2.0)
        )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """4x4 Hermitian unit-trace operator; ``raw`` marks possible negativity."""

    matrix: np.ndarray
    raw: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex).reshape(4, 4)
        object.__setattr__(self, "matrix", m)
        herm = np.abs(m - m.conj().T).max()
        if herm > 1e-10:
            raise ValueError(f"matrix not Hermitian (max deviation {herm:.2e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"matrix trace {tr} != 1")
        if not self.raw:
            lam_min = float(np.linalg.eigvalsh(m).min())
            if lam_min < -1e-9:
                raise ValueError(
                    f"matrix has negative eigenvalue {lam_min:.3e}; "
                    "tag raw=True for unprojected reconstructions"
                )

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)

    def swap_arms(self):
        """Exchange the two ket slots (|ab> -> |ba> relabelling)."""
        return DensityMatrix(SWAP @ self.matrix @ SWAP, raw=self.raw)


def purity(rho: DensityMatrix):
    """Tr(rho^2); 1 for pure states, 1/4 for the maximally mixed state."""
    m = rho.matrix
    return float(np.trace(m @ m).real)


def project_to_physical(matrix, floor=0.0):
    """Nearest unit-trace PSD matrix: clip eigenvalues at ``floor``, renormalize."""
    m = np.asarray(matrix, dtype=complex)
    m = (m + m.conj().T) / 2.0
    lam, vec = np.linalg.eigh(m)
    lam = np.clip(lam, floor, None)
    out = (vec * lam) @ vec.conj().T
    return out / np.trace(out).real


def _psd_sqrt(matrix):
    lam, vec = np.linalg.eigh(matrix)
    lam = np.sqrt(np.clip(lam, 0.0, None))
    return (vec * lam) @ vec.conj().T


def _fidelity_input(rho: DensityMatrix):
    lam_min = float(np.linalg.eigvalsh(rho.matrix).min())
    if lam_min < -1e-6:
        raise ValueError(
            f"fidelity input has eigenvalue {lam_min:.3e} < -1e-6; "
            "not a physical state"
        )
    if lam_min < 0.0:
        return project_to_physical(rho.matrix)
    return rho.matrix


def fidelity(rho_a: DensityMatrix, rho_b: DensityMatrix):
    """Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2, symmetric in a, b.

    Eigenvalues in [-1e-6, 0) are clipped to zero before evaluation; anything
    more negative is rejected.  When either state is pure the formula reduces
    to the plain overlap <psi|rho|psi>, evaluated directly for accuracy.
    """
    a = _fidelity_input(rho_a)
    b = _fidelity_input(rho_b)
    for first, second in ((a, b), (b, a)):
        lam, vec = np.linalg.eigh(first)
        if lam[-1] >= 1.0 - 1e-10:  # numerically rank one
            psi = vec[:, -1]
            return float(np.real(psi.conj() @ second @ psi))
    sa = _psd_sqrt(a)
    inner = sa @ b @ sa
    inner = (inner + inner.conj().T) / 2.0
    lam = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sum(np.sqrt(lam)) ** 2)


@dataclass(frozen=True, eq=False)
class TomographyDataset:
    """Sixteen coincidence records in the canonical protocol order."""

    settings: tuple
    counts: np.ndarray
    acquisition_times_s: np.ndarray
    background_rate: float = 0.0

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float).reshape(-1)
        times = np.asarray(self.acquisition_times_s, dtype=float).reshape(-1)
        settings = tuple(self.settings)
        object.__setattr__(self, "settings", settings)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "acquisition_times_s", times)
        if len(settings) != 16 or counts.shape != (16,) or times.shape != (16,):
            raise ValueError("dataset must contain exactly 16 records")
        if np.any(counts < 0) or np.any(counts != np.round(counts)):
            raise ValueError("counts must be non-negative integers")
        if np.any(times <= 0):
            raise ValueError("acquisition times must be > 0")
        if self.background_rate < 0:
            raise ValueError("background_rate must be >= 0")
        for i, ((a, b), (ca, cb)) in enumerate(zip(settings, j16_settings())):
            for got, want in ((a, ca), (b, cb)):
                if (
                    abs(got.qwp_angle_rad - want.qwp_angle_rad) > 1e-9
                    or abs(got.hwp_angle_rad - want.hwp_angle_rad) > 1e-9
                ):
                    raise ValueError(
                        f"record {i} does not match the canonical protocol "
                        f"setting order"
                    )

    @classmethod
    def from_counts(cls, counts, acquisition_time_s, background_rate=0.0):
        counts = np.asarray(counts)
        return cls(
            settings=tuple(j16_settings()),
            counts=counts,
            acquisition_times_s=np.full(16, float(acquisition_time_s)),
            background_rate=background_rate,
        )


@dataclass(frozen=True)
class MLEOptions:
    max_iterations: int = 10000
    gradient_tolerance: float = 1e-8
    eigenvalue_floor: float = 1e-6
    rate_floor: float = 1e-12
    likelihood: str = "poisson"  # or "gaussian"


@dataclass(frozen=True)
class ReconstructionResult:
    rho_raw: DensityMatrix
    rho_mle: DensityMatrix
    log_likelihood: float
    iterations: int
    converged: bool
    metrics: dict = field(default_factory=dict)


def expected_rate(rho: DensityMatrix, projector, n0, background=0.0):
    """Coincidence rate n0 * <p|rho|p> + background, counts/s."""
    if rho.raw and float(np.linalg.eigvalsh(rho.matrix).min()) < -1e-9:
        raise ValueError("expected_rate requires a physical density matrix")
    if n0 <= 0:
        raise ValueError("n0 must be > 0")
    p = projector.vector
    return float(n0 * np.real(np.vdot(p, rho.matrix @ p)) + background)


def expected_rates(rho: DensityMatrix, n0, background=0.0):
    """Rates at all 16 canonical settings, in protocol order."""
    return np.array(
        [expected_rate(rho, p, n0, background) for p in j16_projectors()]
    )


def simulate_counts(rho: DensityMatrix, n0, acquisition_time_s, seed, background=0.0):
    """Draw Poisson counts for the 16 canonical settings; reproducible by seed."""
    if acquisition_time_s <= 0:
        raise ValueError("acquisition_time_s must be > 0")
    rng = np.random.default_rng(seed)
    rates = expected_rates(rho, n0, background)
    counts = rng.poisson(rates * acquisition_time_s)
    return TomographyDataset.from_counts(
        counts, acquisition_time_s, background_rate=background
    )


_MEAS_MATRIX = None


def _meas_matrix():
    global _MEAS_MATRIX
    if _MEAS_MATRIX is None:
        m = measurement_matrix()
        if np.linalg.cond(m) > 1e12:
            raise ValueError("measurement matrix is singular; settings table broken")
        _MEAS_MATRIX = m
    return _MEAS_MATRIX


def linear_inversion(data: TomographyDataset):
    """Direct solution of the 16-equation system; may be non-physical (raw).

    The count scale is estimated from the first four settings, whose
    projectors sum to the identity.
    """
    net = data.counts - data.background_rate * data.acquisition_times_s
    scale = net[:4].sum()
    if scale <= 0:
        raise ValueError("dataset has no net counts in the normalization block")
    x = np.linalg.solve(_meas_matrix(), net / scale)
    rho = x.reshape(4, 4)
    rho = (rho + rho.conj().T) / 2.0
    rho = rho / np.trace(rho).real
    return DensityMatrix(rho, raw=True)


def log_likelihood(rho: DensityMatrix, data: TomographyDataset, rate_floor=1e-12):
    """Poisson log-likelihood of the dataset with the count scale profiled out.

    For a unit-trace state the overall detection scale N is a nuisance
    parameter; this evaluates sum(n ln r - r) at its maximizing value.
    """
    q = np.array(
        [np.real(np.vdot(p.vector, rho.matrix @ p.vector)) for p in j16_projectors()]
    )
    q = np.clip(q, 0.0, None)
    bg = data.background_rate * data.acquisition_times_s
    n = data.counts

    def dll(scale):
        r = np.maximum(scale * q + bg, rate_floor)
        return float(np.sum(n * q / r) - q.sum())

    lo = max(n.sum() / max(q.sum(), rate_floor) * 1e-6, 1e-9)
    hi = n.sum() / max(q.sum(), rate_floor) * 1e6 + 1.0
    if dll(lo) <= 0.0:
        scale = lo
    elif dll(hi) >= 0.0:
        scale = hi
    else:
        from scipy.optimize import brentq

        scale = brentq(dll, lo, hi, xtol=1e-9, rtol=1e-12)
    r = np.maximum(scale * q + bg, rate_floor)
    return float(np.sum(n * np.log(r) - r))


_DIAG_IDX = ((0, 0), (1, 1), (2, 2), (3, 3))
_LOWER_IDX = ((1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))
_FLIP = np.fliplr(np.eye(4))


def _lower_factor(psd):
    """Lower-triangular T with T^dag T = psd (corner-flipped Cholesky)."""
    from scipy.linalg import cholesky

    upper = cholesky(_FLIP @ psd @ _FLIP, lower=False)  # V^dag V form
    return _FLIP @ upper @ _FLIP


def _params_to_tri(t):
    T = np.zeros((4, 4), dtype=complex)
    for i, (r, c) in enumerate(_DIAG_IDX):
        T[r, c] = t[i]
    for i, (r, c) in enumerate(_LOWER_IDX):
        T[r, c] = t[4 + 2 * i] + 1j * t[5 + 2 * i]
    return T


def _tri_to_params(T):
    t = np.zeros(16)
    for i, (r, c) in enumerate(_DIAG_IDX):
        t[i] = T[r, c].real
    for i, (r, c) in enumerate(_LOWER_IDX):
        t[4 + 2 * i] = T[r, c].real
        t[5 + 2 * i] = T[r, c].imag
    return t


def mle_reconstruct(data: TomographyDataset, options=None, target=None):
    """Maximum-likelihood reconstruction constrained to physical states.

    Parametrizes rho = T^dag T / tr(T^dag T) with T lower triangular (16 real
    parameters); the trace of T^dag T doubles as the fitted count scale, so
    the objective is the plain per-setting likelihood.  Deterministic: fixed
    warm start from the positivity-projected linear inversion and an L-BFGS
    ascent with analytic gradients.  ``converged`` reports whether the
    normalized gradient infinity-norm reached ``gradient_tolerance`` within
    ``max_iterations``.
    """
    options = options or MLEOptions()
    if options.likelihood not in ("poisson", "gaussian"):
        raise ValueError(f"unknown likelihood {options.likelihood!r}")
    n = data.counts
    if n.sum() <= 0:
        raise ValueError("dataset contains no counts")
    bg = data.background_rate * data.acquisition_times_s

    rho_raw = linear_inversion(data)
    rho0 = project_to_physical(rho_raw.matrix, floor=options.eigenvalue_floor)
    net_scale = max(float((n - bg)[:4].sum()), 1.0)
    t0 = _tri_to_params(_lower_factor(rho0))

    projs = [p.operator() for p in j16_projectors()]
    proj_stack = np.stack(projs)
    # the objective works on count fractions n/net_scale, so a joint rescaling
    # of counts and acquisition scale reproduces the optimizer trajectory bit
    # for bit; per-term saturated-model anchoring (n ln(r/n) - r + n written
    # as n (log1p(x) - x)) avoids the float cancellation of the raw sum
    frac = n / net_scale
    bg_frac = bg / net_scale
    floor_frac = options.rate_floor / net_scale
    positive = frac > 0

    def objective(t):
        T = _params_to_tri(t)
        S = T.conj().T @ T
        q = np.real(np.einsum("kij,ji->k", proj_stack, S))
        m = np.maximum(q + bg_frac, floor_frac)
        if options.likelihood == "poisson":
            x = (m[positive] - frac[positive]) / frac[positive]
            ll = float(
                np.sum(frac[positive] * (np.log1p(x) - x)) - m[~positive].sum()
            )
            w = frac / m - 1.0
        else:
            ll = -float(np.sum((frac - m) ** 2 / (2.0 * m)))
            w = (frac**2 - m**2) / (2.0 * m**2)
        G = np.einsum("k,kij->ij", w, proj_stack)
        GT = G @ T.conj().T
        grad = np.zeros(16)
        for i, (rr, cc) in enumerate(_DIAG_IDX):
            grad[i] = 2.0 * GT[cc, rr].real
        for i, (rr, cc) in enumerate(_LOWER_IDX):
            grad[4 + 2 * i] = 2.0 * GT[cc, rr].real
            grad[5 + 2 * i] = -2.0 * GT[cc, rr].imag
        return -ll, -grad

    res = minimize(
        objective,
        t0,
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": options.max_iterations,
            "gtol": options.gradient_tolerance,
            # stop on the gradient criterion (or maxiter), not on flat steps
            "ftol": 0.0,
            "maxcor": 25,
        },
    )
    # keep whichever iterate scores better; L-BFGS can stop on ftol slightly
    # uphill from the warm start in degenerate noiseless cases
    f_start, _ = objective(t0)
    t_best = res.x if res.fun <= f_start else t0
    T = _params_to_tri(t_best)
    S = T.conj().T @ T
    rho_m = DensityMatrix(project_to_physical(S / np.trace(S).real))

    _, g_final = objective(t_best)
    converged = bool(np.max(np.abs(g_final)) < options.gradient_tolerance)
    metrics = {"purity": purity(rho_m)}
    if target is not None:
        metrics["fidelity_vs_target"] = fidelity(rho_m, target)
    return ReconstructionResult(
        rho_raw=rho_raw,
        rho_mle=rho_m,
        log_likelihood=log_likelihood(rho_m, data, rate_floor=options.rate_floor),
        iterations=int(res.nit),
        converged=converged,
        metrics=metrics,
    )
