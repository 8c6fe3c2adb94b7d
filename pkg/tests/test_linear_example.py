#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Unit tests for openbath.quantum.linear_example."""

from __future__ import annotations

from dataclasses import fields

import numpy as np
import pytest

from openbath.quantum.damped_oscillator import (
    Constants,
    gibbs_params,
    persistent_pure_params,
)
from openbath.quantum.lindblad_core import (
    apply_superoperator,
    expectation,
    fock_operators,
    fock_state,
    stationary_state,
)
from openbath.quantum.linear_example import (
    BathCoupling,
    EffectiveCoefficients,
    LinearModelSpec,
    bose_einstein,
    coupling_terms,
    discretized_bath,
    effective_coefficients,
    effective_generator,
    linear_model_sectors,
    system_hamiltonian,
    thermal_weak_damping_coefficients,
)
from openbath.quantum.weak_coupling import frequency_sectors, rwa_master_equation


@pytest.fixture
def resonant_spec() -> LinearModelSpec:
    mode = gibbs_params(1.0, 1.0, 0.01, 0.0, 1.0)
    return LinearModelSpec(1.0, 1.0, (BathCoupling(0.05, mode),))


@pytest.fixture
def detuned_spec() -> LinearModelSpec:
    modes = (
        BathCoupling(0.05, gibbs_params(1.0, 0.8, 0.05, 0.02, 0.7)),
        BathCoupling(0.03, gibbs_params(2.0, 1.3, 0.1, -0.04, 0.7)),
    )
    return LinearModelSpec(1.0, 1.0, modes)


def test_spec_validation():
    with pytest.raises(ValueError):
        LinearModelSpec(0.0, 1.0, ())
    other = gibbs_params(1.0, 1.0, 0.1, 0.0, 1.0, Constants(hbar=2.0))
    spec = LinearModelSpec(1.0, 1.0, [BathCoupling(0.1, other)])
    assert isinstance(spec.bath, tuple)
    with pytest.raises(ValueError):
        effective_coefficients(spec)


def test_linear_sectors_match_generic_split(resonant_spec):
    dim = 8
    generic = frequency_sectors(system_hamiltonian(resonant_spec, dim),
                                coupling_terms(resonant_spec, dim)[0].v)
    lower, upper = linear_model_sectors(resonant_spec, dim)[0]
    assert [sector.delta_omega for sector in generic] == pytest.approx([-1.0, 1.0])
    np.testing.assert_allclose(generic[0].v_sector, lower.v_sector, atol=1e-12)
    np.testing.assert_allclose(generic[1].v_sector, upper.v_sector, atol=1e-12)


def test_full_thermal_forms_equal_spectral_pair_forms(detuned_spec):
    generic = effective_coefficients(detuned_spec)
    thermal = thermal_weak_damping_coefficients(detuned_spec)
    for item in fields(EffectiveCoefficients):
        assert getattr(thermal.full, item.name) == pytest.approx(
            getattr(generic, item.name), rel=1e-9
        ), item.name


def test_resonance_forms_agree_at_weak_damping(resonant_spec):
    thermal = thermal_weak_damping_coefficients(resonant_spec)
    for key, deviation in thermal.relative_deviation.items():
        assert deviation < 1e-3, key
    coef = thermal.full
    assert coef.lambda_eff > 0
    assert coef.delta_omega_s < 0
    assert coef.d_qq_eff == pytest.approx(coef.d_pp_eff)


def test_resonance_width_selects_modes(detuned_spec):
    narrow = thermal_weak_damping_coefficients(detuned_spec, resonance_width=1.0)
    assert narrow.resonance.lambda_eff == 0.0
    wide = thermal_weak_damping_coefficients(detuned_spec, resonance_width=10.0)
    assert wide.resonance.lambda_eff > 0.0


def test_thermal_forms_need_gibbs_modes():
    pure = LinearModelSpec(1.0, 1.0, (BathCoupling(0.1, persistent_pure_params(1.0, 1.0, 0.1, 0.0)),))
    with pytest.raises(ValueError):
        thermal_weak_damping_coefficients(pure)
    mixed = LinearModelSpec(1.0, 1.0, (
        BathCoupling(0.1, gibbs_params(1.0, 1.0, 0.1, 0.0, 1.0)),
        BathCoupling(0.1, gibbs_params(1.0, 1.0, 0.1, 0.0, 2.0)),
    ))
    with pytest.raises(ValueError):
        thermal_weak_damping_coefficients(mixed)


def test_effective_generator_equals_rwa_below_the_edge(detuned_spec):
    dim = 12
    _, rwa = rwa_master_equation(system_hamiltonian(detuned_spec, dim),
                                 coupling_terms(detuned_spec, dim))
    effective = effective_generator(detuned_spec, dim)
    for state in (fock_state(dim, 0), fock_state(dim, 2)):
        np.testing.assert_allclose(
            apply_superoperator(effective, state), apply_superoperator(rwa, state),
            atol=1e-12,
        )
    coherence = np.zeros((dim, dim), dtype=complex)
    coherence[1, 2] = 1.0
    np.testing.assert_allclose(
        apply_superoperator(effective, coherence), apply_superoperator(rwa, coherence),
        atol=1e-12,
    )


def test_effective_generator_thermalizes(resonant_spec):
    dim = 30
    coef = effective_coefficients(resonant_spec)
    rho = stationary_state(effective_generator(resonant_spec, dim))
    occupancy = expectation(rho, fock_operators(dim, 1.0, 1.0).number).real
    target = bose_einstein(1.0 + coef.delta_omega_s, 1.0)
    assert occupancy == pytest.approx(target, rel=0.02)


def test_uncoupled_modes_contribute_nothing(resonant_spec):
    mode = resonant_spec.bath[0].mode
    spec = LinearModelSpec(1.0, 1.0, (BathCoupling(0.0, mode),))
    coef = effective_coefficients(spec)
    assert coef.as_dict() == dict.fromkeys(coef.as_dict(), 0.0)


def test_discretized_bath():
    bath = discretized_bath(1.0, 0.05, 0.5, n_modes=3, span=(0.5, 1.5), damping=0.02)
    assert [entry.mode.omega for entry in bath] == pytest.approx([0.5, 1.0, 1.5])
    assert all(entry.c == 0.05 for entry in bath)
    assert all(entry.mode.lam == pytest.approx(0.02 * entry.mode.omega) for entry in bath)
    assert all(entry.mode.temperature == 0.5 for entry in bath)
    with pytest.raises(ValueError):
        discretized_bath(1.0, 0.05, 0.5, n_modes=0)


def test_bose_einstein():
    assert bose_einstein(1.0, 1.0) == pytest.approx(1 / (np.e - 1))
    assert bose_einstein(2.0, 1.0, Constants(hbar=0.5)) == pytest.approx(1 / (np.e - 1))
