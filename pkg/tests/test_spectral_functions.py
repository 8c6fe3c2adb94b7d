#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Unit tests for openbath.quantum.spectral_functions."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from openbath.quantum.damped_oscillator import (
    OscillatorParams,
    asymptotic_moments,
    gibbs_params,
    sample_valid_params,
)
from openbath.quantum.spectral_functions import (
    MAX_REL_TOL,
    QUAD_HORIZON,
    denominator,
    lamb_shift_coefficients,
    positivity_decomposition,
    positivity_discriminant,
    quadrature_transform,
    spectral_pair_closed,
    spectral_pair_quadrature,
    spectral_table,
    spectral_transform,
)

DELTAS = np.array([-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])


def nonthermal(p: OscillatorParams) -> OscillatorParams:
    return replace(p, d_qq=2 * p.d_qq, d_pp=1.5 * p.d_pp, d_pq=0.25 * p.lam * p.hbar,
                   temperature=None)


@pytest.mark.parametrize("lam,mu", [(0.1, 0.0), (0.1, 0.05), (0.5, 0.25)])
def test_closed_form_matches_quadrature(lam, mu):
    thermal = gibbs_params(1.0, 1.0, lam, mu, 1.0)
    for params in (thermal, nonthermal(thermal)):
        table = spectral_table(params, DELTAS)
        assert np.max(table["rel_err"]) <= 1e-6


def test_quadrature_reports_error_and_tail(thermal_mode):
    pair = spectral_pair_quadrature(thermal_mode, 1.0)
    closed = spectral_pair_closed(thermal_mode, 1.0)
    assert pair.abs_error is not None
    assert 0 <= pair.tail_bound < 1e-12
    assert pair.h == pytest.approx(closed.h, rel=1e-6)
    assert pair.s == pytest.approx(closed.s, rel=1e-6)


def test_quadrature_horizon_captures_the_tail(thermal_mode):
    values, err, tail = quadrature_transform(thermal_mode, DELTAS, rel_tol=1e-10)
    doubled, err2, tail2 = quadrature_transform(
        thermal_mode, DELTAS, rel_tol=1e-10, horizon=2 * QUAD_HORIZON
    )
    assert tail2 < tail < 1e-12 * np.min(np.abs(values))
    # beyond the quadrature error, the extra range contributes below 1e-12 relative
    assert np.all(np.abs(doubled - values) <= 1e-12 * np.abs(values) + err + err2)


def test_quadrature_tolerance_range(thermal_mode):
    with pytest.raises(ValueError):
        spectral_pair_quadrature(thermal_mode, 0.0, rel_tol=10 * MAX_REL_TOL)
    with pytest.raises(ValueError):
        spectral_pair_quadrature(thermal_mode, 0.0, rel_tol=0.0)


def test_invalid_mode_is_rejected():
    bad = OscillatorParams(1.0, 1.0, 0.1, 0.0, 1e-6, 1e-6, 0.0)
    with pytest.raises(ValueError):
        spectral_transform(bad, 0.0)


def test_h_is_nonnegative(rng):
    for _ in range(300):
        params = sample_valid_params(rng)
        deltas = np.linspace(-3.0, 3.0, 25) * params.omega
        assert np.min(spectral_transform(params, deltas).real) >= -1e-12


def test_discriminant_decomposition(rng):
    for _ in range(50):
        params = sample_valid_params(rng)
        square, slack = positivity_decomposition(params)
        assert square >= 0
        assert slack >= 0
        expected = 4 * (square + slack) / params.m**2
        assert positivity_discriminant(params) == pytest.approx(expected, rel=1e-9)


def test_explicit_numerator_matches_complex_form(rng):
    for _ in range(20):
        params = sample_valid_params(rng)
        moments = asymptotic_moments(params)
        big = params.big_omega
        z = params.lam + 1j * DELTAS * params.omega
        amp_b = (2 * moments.s_pq - 1j * params.hbar) / (2 * params.m * big)
        value = (moments.qq * (z + params.mu) + amp_b * big) / (z**2 + big**2)
        np.testing.assert_allclose(
            spectral_transform(params, DELTAS * params.omega), value,
            rtol=1e-9, atol=1e-12 * np.max(np.abs(value)),
        )


def test_lamb_shift_polynomial(thermal_mode):
    c0, c1, c2, c3 = lamb_shift_coefficients(thermal_mode)
    deltas = np.linspace(-3.0, 3.0, 13)
    poly = (c0 + c1 * deltas + c2 * deltas**2 + c3 * deltas**3) \
        / denominator(thermal_mode, deltas)
    np.testing.assert_allclose(spectral_transform(thermal_mode, deltas).imag, poly,
                               rtol=1e-10, atol=1e-14)


def test_thermal_mode_prefers_emission(thermal_mode):
    """Lowering at -omega outweighs raising at +omega for a Gibbs mode."""
    raise_h, lower_h = spectral_transform(thermal_mode, np.array([1.0, -1.0])).real
    assert 0 < raise_h < lower_h


def test_table_layout(thermal_mode):
    table = spectral_table(thermal_mode, np.array([0.0, 1.0]))
    assert table.dtype.names == ("delta_omega", "h_closed", "S_closed",
                                 "h_quad", "S_quad", "rel_err")
    assert table.size == 2
