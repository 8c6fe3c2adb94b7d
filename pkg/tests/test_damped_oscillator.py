#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Unit tests for openbath.quantum.damped_oscillator."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from openbath.quantum.damped_oscillator import (
    LABEL_DETERMINANT,
    LABEL_DQQ,
    LABEL_RELAXATION,
    LABEL_UNDERDAMPING,
    Constants,
    MomentState,
    OscillatorParams,
    asymptotic_moments,
    bath_correlation,
    coth,
    correlation_bound,
    evolve_moments,
    heisenberg_q_coefficients,
    gibbs_params,
    moment_matrices,
    persistent_pure_params,
    require_valid,
    sample_valid_params,
    validate_params,
)


def test_constants_reject_nonpositive():
    with pytest.raises(ValueError):
        Constants(hbar=0.0)
    with pytest.raises(ValueError):
        Constants(k_b=-1.0)


def test_params_reject_nonfinite():
    with pytest.raises(ValueError):
        OscillatorParams(1.0, 1.0, np.nan, 0.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        OscillatorParams(0.0, 1.0, 0.1, 0.0, 1.0, 1.0, 0.0)


def test_validation_labels():
    report = validate_params(OscillatorParams(1.0, 1.0, 0.1, 0.2, -1.0, 1.0, 0.0))
    assert not report.is_valid
    assert LABEL_DQQ in report.violations
    assert LABEL_RELAXATION in report.violations
    assert LABEL_DETERMINANT in report.violations

    report = validate_params(OscillatorParams(1.0, 0.1, 0.5, 0.2, 1.0, 1.0, 0.0))
    assert report.violations == [LABEL_UNDERDAMPING]


def test_validation_never_raises_and_require_valid_does():
    bad = OscillatorParams(1.0, 1.0, 0.1, 0.0, 1e-6, 1e-6, 0.0)
    assert validate_params(bad).violations == [LABEL_DETERMINANT]
    with pytest.raises(ValueError, match="determinant bound"):
        require_valid(bad)


def test_gibbs_family_moments(thermal_mode):
    hbar, m, omega = thermal_mode.hbar, thermal_mode.m, thermal_mode.omega
    cth = coth(hbar * omega / (2 * thermal_mode.temperature))
    moments = asymptotic_moments(thermal_mode)
    assert moments.qq == pytest.approx(hbar / (2 * m * omega) * cth, rel=1e-12)
    assert moments.pp == pytest.approx(hbar * m * omega / 2 * cth, rel=1e-12)
    assert moments.s_pq == pytest.approx(0.0, abs=1e-14)


def test_gibbs_family_low_temperature():
    # mu > 0 violates the determinant bound once coth approaches one
    with pytest.raises(ValueError, match="no valid Gibbs parameters"):
        gibbs_params(1.0, 1.0, 0.1, 0.09, 0.01)
    params = gibbs_params(1.0, 1.0, 0.1, 0.0, 0.01)
    assert validate_params(params).is_valid


def test_gibbs_family_requires_relaxation():
    with pytest.raises(ValueError):
        gibbs_params(1.0, 1.0, 0.1, 0.1, 1.0)
    with pytest.raises(ValueError):
        gibbs_params(1.0, 1.0, 0.1, 0.0, 0.0)


def test_persistent_pure_family():
    params = persistent_pure_params(1.0, 1.0, 0.2, 0.1)
    assert not params.relaxing
    assert validate_params(params).is_valid
    slack = params.d_qq * params.d_pp - params.d_pq**2 - (params.lam * params.hbar / 2) ** 2
    assert slack == pytest.approx(0.0, abs=1e-15)

    # mu = 0 is the zero temperature member of the Gibbs family
    ground = asymptotic_moments(persistent_pure_params(1.0, 2.0, 0.3, 0.0))
    assert ground.uncertainty_slack() == pytest.approx(0.0, abs=1e-12)


def test_sampled_params_are_valid(rng):
    for _ in range(200):
        assert validate_params(sample_valid_params(rng)).is_valid


def test_asymptotic_moments_are_stationary(rng):
    for _ in range(20):
        params = sample_valid_params(rng)
        _, second, drive = moment_matrices(params)
        moments = asymptotic_moments(params)
        residual = second @ moments.second() + drive
        np.testing.assert_allclose(residual, 0.0, atol=1e-10 * np.max(np.abs(drive)))
        assert moments.uncertainty_slack(params.hbar) >= -1e-12


def test_evolve_moments(thermal_mode):
    start = MomentState(1.0, -0.5, 2.0, 1.5, 0.3)
    same = evolve_moments(thermal_mode, start, 0.0)
    np.testing.assert_allclose(same.second(), start.second())
    np.testing.assert_allclose(same.first(), start.first())

    late = evolve_moments(thermal_mode, start, 400.0)
    asym = asymptotic_moments(thermal_mode)
    np.testing.assert_allclose(late.first(), 0.0, atol=1e-12)
    np.testing.assert_allclose(late.second(), asym.second(), atol=1e-10)

    with pytest.raises(ValueError):
        evolve_moments(thermal_mode, start, -1.0)


def test_evolve_moments_is_a_semigroup(rng):
    start = MomentState(1.0, -0.5, 2.0, 1.5, 0.3)
    for _ in range(20):
        params = sample_valid_params(rng)
        s, t = rng.uniform(0.0, 2.5 / params.lam, size=2)
        twice = evolve_moments(params, evolve_moments(params, start, s), t)
        once = evolve_moments(params, start, s + t)
        np.testing.assert_allclose(twice.first(), once.first(), rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(twice.second(), once.second(), rtol=1e-9, atol=1e-9)


def test_closed_oscillator_keeps_energy():
    closed = OscillatorParams(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    start = MomentState(1.0, 0.0, 1.0, 0.0, 0.0)
    moments = evolve_moments(closed, start, 2 * np.pi)
    np.testing.assert_allclose(moments.first(), start.first(), atol=1e-10)
    np.testing.assert_allclose(moments.second(), start.second(), atol=1e-10)


def test_heisenberg_coefficients_follow_the_mean(thermal_mode):
    start = MomentState(0.7, -0.3, 1.0, 1.0, 0.0)
    assert heisenberg_q_coefficients(thermal_mode, 0.0) == pytest.approx((1.0, 0.0))
    for t in (0.5, 3.0, 12.0):
        c_q, c_p = heisenberg_q_coefficients(thermal_mode, t)
        mean_q = evolve_moments(thermal_mode, start, t).mean_q
        assert c_q * 0.7 - c_p * 0.3 == pytest.approx(mean_q, abs=1e-12)
    with pytest.raises(ValueError):
        heisenberg_q_coefficients(thermal_mode, -1.0)


def test_correlation_at_zero_and_commutator(thermal_mode):
    moments = asymptotic_moments(thermal_mode)
    assert bath_correlation(thermal_mode, 0.0) == pytest.approx(moments.qq)

    # the imaginary part is state independent: -hbar sin(Wt) exp(-lam t) / 2mW
    times = np.linspace(0.0, 30.0, 61)
    big = thermal_mode.big_omega
    expected = -thermal_mode.hbar * np.sin(big * times) * np.exp(-thermal_mode.lam * times) \
        / (2 * thermal_mode.m * big)
    np.testing.assert_allclose(bath_correlation(thermal_mode, times).imag, expected,
                               atol=1e-14)


def test_correlation_bound(rng):
    for _ in range(20):
        params = sample_valid_params(rng)
        times = np.linspace(0.0, 20.0 / params.lam, 401)
        bound = correlation_bound(params) * np.exp(-params.lam * times)
        assert np.all(np.abs(bath_correlation(params, times)) <= bound * (1 + 1e-12))


def test_correlation_bound_is_tighter_than_triangle_constant(rng):
    for _ in range(200):
        params = sample_valid_params(rng)
        moments = asymptotic_moments(params)
        ratio = abs(params.mu) / params.big_omega
        loose = abs(moments.qq) * (1 + ratio) \
            + (2 * abs(moments.s_pq) + params.hbar) / (2 * params.m * params.big_omega)
        assert correlation_bound(params) <= loose * (1 + 1e-12)


def test_correlation_requires_nonnegative_time(thermal_mode):
    with pytest.raises(ValueError):
        bath_correlation(thermal_mode, -0.1)


def test_big_omega_requires_underdamping(thermal_mode):
    assert thermal_mode.big_omega == pytest.approx(np.sqrt(1.0 - 0.05**2))
    with pytest.raises(ValueError):
        _ = replace(thermal_mode, omega=0.01).big_omega
