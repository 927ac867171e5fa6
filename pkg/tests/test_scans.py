import math

import numpy as np
import pytest

from spdctomo.scans import (
    AXIS_ANGULAR,
    AXIS_FREQUENCY,
    BASIS_DIAGONAL,
    BASIS_NATURAL,
    ScanConfig,
    eq5_rates,
    run_scan,
)
from spdctomo.spdc import CompensatorParams, CrystalParams, SidebandMode, relative_phase

PUMP_NM = 406.0


def simple_crystal(gvm=-2.0e-10, angular=-9.0e5):
    return CrystalParams(1.0, math.radians(47.6), PUMP_NM, gvm, angular)


def theta_for_phase(crystal, phi):
    return phi / (crystal.angular_dispersion * crystal.length_m)


def test_eq5_zero_phase():
    co, cross = eq5_rates(0.0)
    assert co == 1.0 and cross == 0.0


def test_eq5_full_turn_kills_both():
    co, cross = eq5_rates(2 * math.pi)
    assert abs(co) < 1e-12 and abs(cross) < 1e-12


def test_eq5_pi_phase():
    co, cross = eq5_rates(math.pi)
    assert abs(co) < 1e-12
    assert cross == pytest.approx((2 / math.pi) ** 2, rel=1e-12)


def test_eq5_sum_is_envelope():
    rng = np.random.default_rng(1)
    phi = rng.uniform(-20, 20, 100)
    co, cross = eq5_rates(phi)
    env = np.sinc(phi / (2 * math.pi)) ** 2
    assert np.abs(co + cross - env).max() < 1e-12


def make_scan(crystal, *, points=101, half_width=None, **kw):
    # angular scan symmetric around zero: odd point count puts a bin centre at 0
    if half_width is None:
        half_width = abs(theta_for_phase(crystal, 2 * math.pi))
    return ScanConfig(
        axis=AXIS_ANGULAR, start=-half_width, stop=half_width, points=points, **kw
    )


def test_scan_phase_zero_point():
    crystal = simple_crystal()
    res = run_scan(make_scan(crystal, normalization=3.0), crystal)
    mid = res.axis_values.size // 2
    assert res.axis_values[mid] == pytest.approx(0.0, abs=1e-18)
    assert res.copolar[mid] == pytest.approx(3.0, rel=1e-12)
    assert res.crosspolar[mid] == pytest.approx(0.0, abs=1e-12)


def test_scan_pi_point():
    crystal = simple_crystal()
    theta_pi = theta_for_phase(crystal, math.pi)
    cfg = ScanConfig(
        axis=AXIS_ANGULAR,
        start=theta_pi - 1e-4,
        stop=theta_pi + 1e-4,
        points=3,
        normalization=2.0,
    )
    res = run_scan(cfg, crystal)
    assert res.phase[1] == pytest.approx(math.pi, rel=1e-9)
    assert res.copolar[1] == pytest.approx(0.0, abs=1e-9)
    assert res.crosspolar[1] == pytest.approx(2.0 * (2 / math.pi) ** 2, rel=1e-9)


def test_scan_sum_rule_and_positivity(bbo, quartz):
    for comp in (None, quartz):
        for basis in (BASIS_NATURAL, BASIS_DIAGONAL):
            cfg = ScanConfig(
                axis=AXIS_ANGULAR, start=-0.01, stop=0.01, points=200,
                basis=basis, compensator=comp, normalization=1.7,
            )
            res = run_scan(cfg, bbo)
            assert np.all(res.copolar >= 0) and np.all(res.crosspolar >= 0)
            assert np.abs(res.copolar + res.crosspolar - res.envelope).max() < 1e-12


def test_scan_exact_cancellation_zeroes_crosspolar(bbo):
    comp = CompensatorParams.exact_cancellation(bbo, length_mm=6.5)
    cfg = ScanConfig(
        axis=AXIS_ANGULAR, start=-0.01, stop=0.01, points=301, compensator=comp
    )
    res = run_scan(cfg, bbo)
    assert np.abs(res.crosspolar).max() < 1e-12
    # envelope keeps the uncompensated phase-matching shape
    bare = run_scan(
        ScanConfig(axis=AXIS_ANGULAR, start=-0.01, stop=0.01, points=301), bbo
    )
    assert np.array_equal(res.envelope, bare.envelope)
    assert np.abs(res.copolar - res.envelope).max() < 1e-12


def test_scan_natural_basis_phase_insensitive():
    crystal = simple_crystal()
    res = run_scan(make_scan(crystal, basis=BASIS_NATURAL), crystal)
    assert np.array_equal(res.copolar, res.crosspolar)
    assert np.abs(res.copolar - 0.5 * res.envelope).max() < 1e-15
    # invariant under a sign flip of the phase map
    flipped = simple_crystal(gvm=2.0e-10, angular=9.0e5)
    res_flip = run_scan(make_scan(flipped, basis=BASIS_NATURAL), flipped)
    assert np.allclose(res.copolar, res_flip.copolar, atol=1e-15)


def test_scan_crosspolar_even_in_phase():
    crystal = simple_crystal()
    res = run_scan(make_scan(crystal), crystal)
    assert np.allclose(res.crosspolar, res.crosspolar[::-1], atol=1e-12)
    assert np.allclose(res.phase, -res.phase[::-1], atol=1e-12)


def test_scan_crosspolar_nodes_at_full_turns():
    crystal = simple_crystal()
    for n in (-1, 0, 1):
        theta = theta_for_phase(crystal, 2 * math.pi * n)
        cfg = ScanConfig(
            axis=AXIS_ANGULAR, start=theta - 1e-5, stop=theta + 1e-5, points=3
        )
        res = run_scan(cfg, crystal)
        assert res.crosspolar[1] < 1e-12


def test_frequency_scan_axis_is_wavelength(bbo):
    cfg = ScanConfig(
        axis=AXIS_FREQUENCY, start=806.0, stop=818.0, points=25,
        fixed_coordinate=0.002,
    )
    res = run_scan(cfg, bbo)
    assert res.axis_values.min() >= 806.0 and res.axis_values.max() <= 818.0
    # per-point phase agrees with the scalar map at the same mode
    k = 7
    mode = SidebandMode.from_signal_wavelength(res.axis_values[k], PUMP_NM, 0.002)
    assert res.phase[k] == pytest.approx(relative_phase(bbo, mode), rel=1e-12)


def test_quartz_preset_flattens_scan_ranges(bbo, quartz):
    # angular sweep over the emission band at degeneracy
    cfg_a = ScanConfig(axis=AXIS_ANGULAR, start=-0.01, stop=0.01, points=201)
    bare_a = run_scan(cfg_a, bbo)
    comp_a = run_scan(
        ScanConfig(axis=AXIS_ANGULAR, start=-0.01, stop=0.01, points=201,
                   compensator=quartz), bbo,
    )
    assert np.std(bare_a.phase) >= 10 * np.std(comp_a.phase)
    # frequency sweep across +-6 nm
    cfg_f = ScanConfig(axis=AXIS_FREQUENCY, start=806.0, stop=818.0, points=201)
    bare_f = run_scan(cfg_f, bbo)
    comp_f = run_scan(
        ScanConfig(axis=AXIS_FREQUENCY, start=806.0, stop=818.0, points=201,
                   compensator=quartz), bbo,
    )
    assert np.std(bare_f.phase) >= 10 * np.std(comp_f.phase)


def test_scan_points_are_bin_centers():
    crystal = simple_crystal()
    cfg = ScanConfig(axis=AXIS_ANGULAR, start=0.0, stop=1.0, points=4)
    res = run_scan(cfg, crystal)
    assert np.allclose(res.axis_values, [0.125, 0.375, 0.625, 0.875])


def test_scan_smearing_preserves_sum_rule(bbo):
    cfg = ScanConfig(
        axis=AXIS_ANGULAR, start=-0.01, stop=0.01, points=200,
        smearing_width=1e-3,
    )
    res = run_scan(cfg, bbo)
    sharp = run_scan(
        ScanConfig(axis=AXIS_ANGULAR, start=-0.01, stop=0.01, points=200), bbo
    )
    assert np.abs(res.copolar + res.crosspolar - res.envelope).max() < 1e-12
    # smearing softens the structure
    assert res.crosspolar.max() < sharp.crosspolar.max()
    assert res.axis_values.shape == sharp.axis_values.shape


def test_scan_config_validation(quartz):
    with pytest.raises(ValueError):
        ScanConfig(axis="radial", start=0, stop=1, points=10)
    with pytest.raises(ValueError):
        ScanConfig(axis=AXIS_ANGULAR, start=0, stop=1, points=1)
    with pytest.raises(ValueError):
        ScanConfig(axis=AXIS_ANGULAR, start=0.5, stop=0.5, points=10)
    with pytest.raises(ValueError):
        ScanConfig(axis=AXIS_ANGULAR, start=0, stop=1, points=10, basis="elliptic")
    with pytest.raises(ValueError):
        ScanConfig(axis=AXIS_ANGULAR, start=0, stop=1, points=10, normalization=0.0)
