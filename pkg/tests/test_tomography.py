import math

import numpy as np
import pytest

from conftest import random_physical_state
from spdctomo.polarization import j16_projectors, j16_settings
from spdctomo.tomography import (
    DensityMatrix,
    MLEOptions,
    PureState,
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

PSI_PLUS = PureState.bell_pair(0.0)
PSI_MINUS = PureState.bell_pair(math.pi)


def dataset_from_rates(rho, scale=1e12):
    """Noiseless dataset: exact rates frozen into large integer counts."""
    counts = np.round(expected_rates(rho, 1.0) * scale)
    return TomographyDataset.from_counts(counts, 1.0)


# ------------------------------------------------------------------ types

def test_pure_state_norm_enforced():
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0, 0.0, 0.0]))


def test_bell_pair_amplitudes():
    amps = PureState.bell_pair(math.pi / 2).amplitudes
    assert amps[1] == pytest.approx(1 / math.sqrt(2))
    assert amps[2] == pytest.approx(1j / math.sqrt(2))


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.5, 0.25, -0.25]))  # negative, not raw
    DensityMatrix(np.diag([0.5, 0.5, 0.25, -0.25]), raw=True)
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.5, 0.5, 0.5]))  # trace 2
    bad = np.eye(4, dtype=complex) / 4
    bad[0, 1] = 0.1
    with pytest.raises(ValueError):
        DensityMatrix(bad)  # not Hermitian


def test_benchmark_matrices_are_physical(rho_bench_zero, rho_bench_tilted):
    assert rho_bench_zero.eigenvalues().min() > 0
    assert rho_bench_tilted.eigenvalues().min() > 0


def test_swap_arms_involution(rho_bench_tilted):
    twice = rho_bench_tilted.swap_arms().swap_arms()
    assert np.array_equal(twice.matrix, rho_bench_tilted.matrix)


# ------------------------------------------------------------ expected rate

def test_expected_rate_bell_examples():
    projs = j16_projectors()
    labels = {label: p for label, p in zip(
        ("HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
         "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL"), projs)}
    rho_plus = PSI_PLUS.projector()
    rho_minus = PSI_MINUS.projector()
    assert expected_rate(rho_plus, labels["HV"], 1.0) == pytest.approx(0.5, abs=1e-12)
    assert expected_rate(rho_minus, labels["DD"], 1.0) == pytest.approx(0.0, abs=1e-12)
    assert expected_rate(rho_plus, labels["DD"], 1.0) == pytest.approx(0.5, abs=1e-12)


def test_expected_rate_bounds():
    rng = np.random.default_rng(10)
    projs = j16_projectors()
    for _ in range(50):
        rho = random_physical_state(rng)
        for p in projs:
            rate = expected_rate(rho, p, n0=7.0, background=0.25)
            assert 0.25 - 1e-12 <= rate <= 7.25 + 1e-12


def test_expected_rate_rejects_nonphysical():
    bad = DensityMatrix(np.diag([0.6, 0.5, 0.4, -0.5]), raw=True)
    with pytest.raises(ValueError):
        expected_rate(bad, j16_projectors()[0], 1.0)


# ------------------------------------------------------------- simulation

def test_simulate_zero_rate_setting_never_counts():
    rho = PSI_PLUS.projector()  # orthogonal to |HH>, the first setting
    for seed in range(10):
        data = simulate_counts(rho, n0=1e4, acquisition_time_s=1.0, seed=seed)
        assert data.counts[0] == 0


def test_simulate_reproducible():
    rho = PSI_PLUS.projector()
    a = simulate_counts(rho, 100.0, 10.0, seed=123)
    b = simulate_counts(rho, 100.0, 10.0, seed=123)
    assert np.array_equal(a.counts, b.counts)
    c = simulate_counts(rho, 100.0, 10.0, seed=124)
    assert not np.array_equal(a.counts, c.counts)


def test_simulate_means_match_rates():
    rng = np.random.default_rng(0)
    rho = random_physical_state(rng)
    n0, t = 50.0, 2.0
    rates = expected_rates(rho, n0) * t
    reps = 1000
    totals = np.zeros(16)
    for seed in range(reps):
        totals += simulate_counts(rho, n0, t, seed=seed).counts
    means = totals / reps
    stderr = np.sqrt(np.maximum(rates, 1e-12) / reps)
    assert np.all(np.abs(means - rates) <= 3 * stderr + 1e-9)


def test_simulate_rejects_bad_time():
    with pytest.raises(ValueError):
        simulate_counts(PSI_PLUS.projector(), 1.0, 0.0, seed=0)


def test_dataset_validation():
    settings = tuple(j16_settings())
    with pytest.raises(ValueError):
        TomographyDataset(settings, np.full(16, -1.0), np.full(16, 1.0))
    with pytest.raises(ValueError):
        TomographyDataset(settings, np.full(16, 1.5), np.full(16, 1.0))
    with pytest.raises(ValueError):
        TomographyDataset(settings, np.full(16, 1.0), np.full(16, 0.0))
    with pytest.raises(ValueError):
        TomographyDataset(settings[:15], np.full(15, 1.0), np.full(15, 1.0))
    shuffled = settings[1:] + settings[:1]
    with pytest.raises(ValueError):
        TomographyDataset(shuffled, np.full(16, 1.0), np.full(16, 1.0))


# -------------------------------------------------------- linear inversion

def test_inversion_roundtrip_random_states():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        rho = random_physical_state(rng)
        rec = linear_inversion(dataset_from_rates(rho))
        worst = max(worst, np.abs(rec.matrix - rho.matrix).max())
    assert worst < 1e-8


def test_inversion_roundtrip_bell():
    rec = linear_inversion(dataset_from_rates(PSI_PLUS.projector()))
    assert np.abs(rec.matrix - PSI_PLUS.projector().matrix).max() < 1e-8


def test_inversion_roundtrip_benchmark(rho_bench_zero):
    rec = linear_inversion(dataset_from_rates(rho_bench_zero))
    assert np.abs(rec.matrix - rho_bench_zero.matrix).max() < 1e-8


def test_inversion_output_is_raw_tagged():
    rec = linear_inversion(dataset_from_rates(PSI_PLUS.projector()))
    assert rec.raw


def test_inversion_can_go_negative(rho_bench_zero):
    hits = 0
    for seed in range(50):
        data = simulate_counts(rho_bench_zero, n0=20.0, acquisition_time_s=10.0, seed=seed)
        rec = linear_inversion(data)
        if rec.eigenvalues().min() < 0:
            hits += 1
    assert hits >= 1


def test_inversion_background_subtracted_from_model(rho_bench_zero):
    n0, t, bg = 1e6, 1.0, 50.0
    counts = np.round(expected_rates(rho_bench_zero, n0, background=bg) * t)
    data = TomographyDataset.from_counts(counts, t, background_rate=bg)
    rec = linear_inversion(data)
    assert np.abs(rec.matrix - rho_bench_zero.matrix).max() < 1e-3


# ------------------------------------------------------------------- MLE

def test_mle_noiseless_bell():
    res = mle_reconstruct(dataset_from_rates(PSI_PLUS.projector(), scale=1e8))
    assert fidelity(res.rho_mle, PSI_PLUS.projector()) > 0.9999
    assert res.converged


def test_mle_always_physical(rho_bench_zero):
    for seed in range(25):
        data = simulate_counts(rho_bench_zero, n0=20.0, acquisition_time_s=10.0, seed=seed)
        res = mle_reconstruct(data)
        assert res.rho_mle.eigenvalues().min() >= -1e-9
        assert np.trace(res.rho_mle.matrix).real == pytest.approx(1.0, abs=1e-9)


def test_mle_deterministic(rho_bench_zero):
    data = simulate_counts(rho_bench_zero, n0=100.0, acquisition_time_s=10.0, seed=5)
    a = mle_reconstruct(data)
    b = mle_reconstruct(data)
    assert np.array_equal(a.rho_mle.matrix, b.rho_mle.matrix)
    assert a.log_likelihood == b.log_likelihood
    assert a.iterations == b.iterations


def test_mle_scaling_invariance(rho_bench_zero):
    data = simulate_counts(rho_bench_zero, n0=100.0, acquisition_time_s=10.0, seed=7)
    scaled = TomographyDataset.from_counts(data.counts * 10, 100.0)
    a = mle_reconstruct(data)
    b = mle_reconstruct(scaled)
    assert np.abs(a.rho_mle.matrix - b.rho_mle.matrix).max() < 1e-8


def test_mle_likelihood_dominates_projected_raw(rho_bench_zero):
    for seed in range(20):
        data = simulate_counts(rho_bench_zero, n0=30.0, acquisition_time_s=10.0, seed=seed)
        res = mle_reconstruct(data)
        projected = DensityMatrix(project_to_physical(res.rho_raw.matrix))
        assert res.log_likelihood >= log_likelihood(projected, data) - 1e-9


def test_mle_rejects_empty_dataset():
    data = TomographyDataset.from_counts(np.zeros(16), 1.0)
    with pytest.raises(ValueError):
        mle_reconstruct(data)


def test_mle_gaussian_option(rho_bench_zero):
    data = simulate_counts(rho_bench_zero, n0=1e4, acquisition_time_s=10.0, seed=3)
    res = mle_reconstruct(data, MLEOptions(likelihood="gaussian"))
    assert fidelity(res.rho_mle, rho_bench_zero) > 0.99
    with pytest.raises(ValueError):
        mle_reconstruct(data, MLEOptions(likelihood="huber"))


def test_mle_with_background(rho_bench_zero):
    n0, t, bg = 1e4, 10.0, 200.0
    data = simulate_counts(rho_bench_zero, n0, t, seed=11, background=bg)
    res = mle_reconstruct(data)
    assert fidelity(res.rho_mle, rho_bench_zero) > 0.99


def test_mle_reports_target_fidelity(rho_bench_zero):
    data = simulate_counts(rho_bench_zero, n0=1e4, acquisition_time_s=10.0, seed=2)
    res = mle_reconstruct(data, target=rho_bench_zero)
    assert "fidelity_vs_target" in res.metrics
    assert res.metrics["fidelity_vs_target"] == pytest.approx(
        fidelity(res.rho_mle, rho_bench_zero), abs=1e-12
    )
    assert res.metrics["purity"] == pytest.approx(purity(res.rho_mle), abs=1e-12)


# ------------------------------------------------------------- fidelity

def test_fidelity_self_is_one():
    rng = np.random.default_rng(20)
    for _ in range(20):
        rho = random_physical_state(rng)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)


def test_fidelity_orthogonal_bells():
    assert fidelity(PSI_PLUS.projector(), PSI_MINUS.projector()) == pytest.approx(
        0.0, abs=1e-12
    )


def test_fidelity_symmetric_and_bounded():
    rng = np.random.default_rng(21)
    for _ in range(20):
        a, b = random_physical_state(rng), random_physical_state(rng)
        fab, fba = fidelity(a, b), fidelity(b, a)
        assert fab == pytest.approx(fba, abs=1e-10)
        assert -1e-12 <= fab <= 1.0 + 1e-12


def test_fidelity_pure_target_reduces_to_overlap():
    rng = np.random.default_rng(22)
    psi = PSI_PLUS
    for _ in range(20):
        rho = random_physical_state(rng)
        overlap = np.real(
            psi.amplitudes.conj() @ rho.matrix @ psi.amplitudes
        )
        assert fidelity(rho, psi.projector()) == pytest.approx(overlap, abs=1e-10)


def test_fidelity_unitary_invariance():
    from scipy.stats import unitary_group

    rng = np.random.default_rng(23)
    u_gen = unitary_group(dim=2, seed=24)
    for _ in range(10):
        a, b = random_physical_state(rng), random_physical_state(rng)
        u = np.kron(u_gen.rvs(), u_gen.rvs())
        ua = DensityMatrix(u @ a.matrix @ u.conj().T)
        ub = DensityMatrix(u @ b.matrix @ u.conj().T)
        assert fidelity(ua, ub) == pytest.approx(fidelity(a, b), abs=1e-10)


def test_fidelity_near_identity_states():
    rng = np.random.default_rng(25)
    rho = random_physical_state(rng)
    bump = np.zeros((4, 4))
    bump[0, 0], bump[1, 1] = 1e-7, -1e-7
    close = DensityMatrix(rho.matrix + bump)
    assert np.abs(close.matrix - rho.matrix).max() < 1e-6
    assert fidelity(rho, close) > 1 - 1e-5


def test_fidelity_clipping_window():
    slightly_negative = DensityMatrix(
        np.diag([0.5, 0.3, 0.2 + 5e-7, -5e-7]), raw=True
    )
    ok = fidelity(slightly_negative, PSI_PLUS.projector())
    assert 0.0 <= ok <= 1.0
    too_negative = DensityMatrix(np.diag([0.5, 0.3, 0.2 + 2e-6, -2e-6]), raw=True)
    with pytest.raises(ValueError):
        fidelity(too_negative, PSI_PLUS.projector())


# --------------------------------------------------------------- purity

def test_purity_extremes():
    assert purity(PSI_PLUS.projector()) == pytest.approx(1.0, abs=1e-12)
    assert purity(DensityMatrix(np.eye(4) / 4)) == pytest.approx(0.25, abs=1e-12)


def test_purity_random_in_range():
    rng = np.random.default_rng(26)
    for _ in range(20):
        p = purity(random_physical_state(rng))
        assert 0.25 - 1e-12 <= p <= 1.0 + 1e-12
