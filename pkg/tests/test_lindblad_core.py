#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Unit tests for openbath.quantum.lindblad_core."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

from openbath.errors import (
    NonUniqueStationaryStateError,
    NumericalInvariantError,
    PositivityError,
)
from openbath.quantum.damped_oscillator import (
    OscillatorParams,
    asymptotic_moments,
    gibbs_params,
)
from openbath.quantum.lindblad_core import (
    JumpTerm,
    Superoperator,
    adjoint_propagate,
    apply_superoperator,
    as_density_matrix,
    coherent_state,
    commutator_superoperator,
    compose_composite_generator,
    cptp_check,
    expectation,
    fock_operators,
    gibbs_state,
    lift_environment,
    lift_system,
    lindblad_generator,
    partial_trace,
    project_p0,
    propagate,
    propagate_series,
    propagator,
    sns_generator,
    sns_lindblad_form,
    state_moments,
    stationary_state,
    trace_distance,
    transpose_superoperator,
    unitary_superoperator,
    unvec,
    vec,
)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (raw + raw.conj().T) / 2


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = raw @ raw.conj().T
    return rho / np.trace(rho)


def test_column_stacking(rng):
    op = rng.standard_normal((3, 3))
    np.testing.assert_array_equal(vec(op), op.T.ravel())
    np.testing.assert_array_equal(unvec(vec(op)), op)


def test_commutator_superoperator(rng):
    ham, op = random_hermitian(rng, 4), random_hermitian(rng, 4)
    res = apply_superoperator(commutator_superoperator(ham, hbar=2.0), op)
    np.testing.assert_allclose(res, (-1j / 2.0) * (ham @ op - op @ ham), atol=1e-12)


def test_superoperator_shape_and_kind():
    with pytest.raises(ValueError):
        Superoperator(np.zeros((4, 4)), 3)
    with pytest.raises(ValueError):
        Superoperator(np.zeros((4, 4)), 2, kind="channel")


def test_jump_rate_must_be_nonnegative():
    with pytest.raises(ValueError):
        JumpTerm(np.eye(2), -0.1)


def test_fock_operators_truncation():
    ops = fock_operators(6, 1.0, 2.0)
    diag = np.diag(ops.h0).real
    np.testing.assert_allclose(diag[:-1], 2.0 * (np.arange(5) + 0.5), atol=1e-12)
    assert diag[-1] == pytest.approx(2.0 * 5 / 2)
    with pytest.raises(ValueError):
        fock_operators(1, 1.0, 1.0)


def test_density_matrix_validation():
    with pytest.raises(PositivityError):
        as_density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(NumericalInvariantError):
        as_density_matrix(np.diag([1.0, 1.0]))
    with pytest.raises(NumericalInvariantError):
        as_density_matrix(np.array([[0.5, 0.1], [0.3, 0.5]]))
    with pytest.raises(ValueError):
        as_density_matrix(np.ones(3))


def test_states_are_normalized():
    assert np.trace(coherent_state(8, 0.7 + 0.2j)).real == pytest.approx(1.0)
    rho = gibbs_state(np.diag([0.0, 1.0, 2.0]), temperature=1.0)
    np.testing.assert_allclose(np.diag(rho).real, np.exp(-np.arange(3)) / np.exp(-np.arange(3)).sum())
    with pytest.raises(ValueError):
        gibbs_state(np.eye(2), 0.0)


def test_generator_preserves_trace(rng, thermal_mode):
    gen = sns_generator(thermal_mode, 8)
    for _ in range(5):
        out = apply_superoperator(gen, random_hermitian(rng, 8))
        assert abs(np.trace(out)) < 1e-12


def test_lindblad_form_equals_generator(thermal_mode):
    dim = 10
    ham, jumps = sns_lindblad_form(thermal_mode, dim)
    assert all(jump.rate >= 0 for jump in jumps)
    lindblad = lindblad_generator(ham, jumps, thermal_mode.hbar)
    np.testing.assert_allclose(
        lindblad.dense(), sns_generator(thermal_mode, dim).dense(), atol=1e-10
    )


def test_stationary_state_matches_asymptotic_moments(thermal_mode):
    dim = 30
    rho = stationary_state(sns_generator(thermal_mode, dim))
    moments = state_moments(rho, fock_operators(dim, 1.0, 1.0))
    np.testing.assert_allclose(
        moments.second(), asymptotic_moments(thermal_mode).second(), atol=1e-6
    )
    assert abs(moments.mean_q) < 1e-8


def test_closed_oscillator_has_many_stationary_states():
    closed = OscillatorParams(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(NonUniqueStationaryStateError):
        stationary_state(sns_generator(closed, 5, check=False))


def test_stationary_state_needs_generator(thermal_mode):
    with pytest.raises(ValueError):
        stationary_state(propagator(sns_generator(thermal_mode, 4), 1.0))


def test_propagation(thermal_mode):
    dim = 20
    gen = sns_generator(thermal_mode, dim)
    rho0 = coherent_state(dim, 1.0)
    times = np.linspace(0.0, 4.0, 9)
    series = propagate_series(gen, rho0, times)
    assert series.shape == (9, dim, dim)
    for t, rho in zip(times, series, strict=True):
        np.testing.assert_allclose(rho, propagate(gen, rho0, t), atol=1e-10)
        dense = unvec(expm(gen.dense() * t) @ vec(rho0), dim)
        np.testing.assert_allclose(rho, dense, atol=1e-9)

    uneven = propagate_series(gen, rho0, np.array([0.5, 0.5, 1.0, 3.0]))
    np.testing.assert_allclose(uneven[1], uneven[0], atol=1e-12)
    np.testing.assert_allclose(uneven[3], series[6], atol=1e-9)

    with pytest.raises(ValueError):
        propagate_series(gen, rho0, np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        propagate(gen, rho0, -1.0)


def test_propagation_is_a_semigroup(thermal_mode):
    dim = 12
    gen = sns_generator(thermal_mode, dim)
    rho0 = coherent_state(dim, 0.8 - 0.3j)
    for s, t in ((0.5, 1.5), (3.0, 7.0), (10.0, 25.0)):
        twice = propagate(gen, propagate(gen, rho0, s), t)
        np.testing.assert_allclose(twice, propagate(gen, rho0, s + t), atol=1e-9)
        assert np.trace(twice).real == pytest.approx(1.0, abs=1e-10)


def test_adjoint_propagation(rng, thermal_mode):
    dim = 8
    gen = sns_generator(thermal_mode, dim)
    rho0, obs = random_state(rng, dim), random_hermitian(rng, dim)
    heisenberg = adjoint_propagate(gen, obs, 2.0)
    schroedinger = unvec(expm(gen.dense() * 2.0) @ vec(rho0), dim)
    assert expectation(rho0, heisenberg) == pytest.approx(
        expectation(schroedinger, obs), abs=1e-10
    )


def test_partial_trace(rng):
    rho_s, rho_e = random_state(rng, 3), random_state(rng, 4)
    joint = np.kron(rho_s, rho_e)
    np.testing.assert_allclose(partial_trace(joint, (3, 4), "system"), rho_s, atol=1e-14)
    np.testing.assert_allclose(partial_trace(joint, (3, 4), "environment"), rho_e,
                               atol=1e-14)
    np.testing.assert_allclose(project_p0(joint, rho_e, (3, 4)), joint, atol=1e-14)
    with pytest.raises(ValueError):
        partial_trace(joint, (4, 3), "bath")
    with pytest.raises(ValueError):
        partial_trace(joint, (2, 4))


def test_projection_of_arbitrary_operators(rng):
    rho_e = random_state(rng, 4)
    op = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    once = project_p0(op, rho_e, (3, 4))
    np.testing.assert_allclose(project_p0(once, rho_e, (3, 4)), once, atol=1e-13)
    np.testing.assert_allclose(partial_trace(once, (3, 4)), partial_trace(op, (3, 4)),
                               atol=1e-13)
    with pytest.raises(ValueError):
        project_p0(op, rho_e, (4, 3))


def test_composite_generator_without_interaction(rng, thermal_mode):
    d_s, d_e = 3, 4
    gen_s = commutator_superoperator(random_hermitian(rng, d_s))
    gen_e = sns_generator(thermal_mode, d_e)
    total = compose_composite_generator(gen_s, gen_e, np.zeros((12, 12)))
    rho_s, rho_e = random_state(rng, d_s), random_state(rng, d_e)
    expected = np.kron(apply_superoperator(gen_s, rho_s), rho_e) \
        + np.kron(rho_s, apply_superoperator(gen_e, rho_e))
    np.testing.assert_allclose(
        apply_superoperator(total, np.kron(rho_s, rho_e)), expected, atol=1e-12
    )
    with pytest.raises(ValueError):
        compose_composite_generator(gen_s, gen_e, np.zeros((3, 3)))


def test_cptp_certification(rng, thermal_mode):
    report = cptp_check(propagator(sns_generator(thermal_mode, 5), 1.0))
    assert report.is_tp
    assert report.is_cp

    unitary = expm(-1j * random_hermitian(rng, 3))
    report = cptp_check(unitary_superoperator(unitary))
    assert report.is_tp
    assert report.is_cp

    report = cptp_check(transpose_superoperator(3))
    assert report.is_tp
    assert not report.is_cp
    assert report.min_choi_eigenvalue == pytest.approx(-1.0)


def test_trace_distance(rng):
    rho = random_state(rng, 4)
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-14)
    pure0, pure1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert trace_distance(pure0, pure1) == pytest.approx(1.0)


# - composite structure ----------------------------
@pytest.fixture
def composite(rng):
    """Random system generator with a fast damped bath mode."""
    d_s, d_e = 2, 6
    jump = rng.standard_normal((d_s, d_s)) + 1j * rng.standard_normal((d_s, d_s))
    gen_s = lindblad_generator(random_hermitian(rng, d_s), [JumpTerm(jump, 0.2)])
    gen_e = sns_generator(gibbs_params(1.0, 1.0, 0.3, 0.0, 0.5), d_e)
    return gen_s, gen_e, stationary_state(gen_e), (d_s, d_e)


def random_operator(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def test_lifted_generators_commute(rng, composite):
    gen_s, gen_e, _, (d_s, d_e) = composite
    lifted_s, lifted_e = lift_system(gen_s, d_e), lift_environment(gen_e, d_s)
    for _ in range(10):
        op = random_operator(rng, d_s * d_e)
        first = apply_superoperator(lifted_s, apply_superoperator(lifted_e, op))
        second = apply_superoperator(lifted_e, apply_superoperator(lifted_s, op))
        np.testing.assert_allclose(first, second, atol=1e-10)

    rho_s, rho_e = random_state(rng, d_s), random_state(rng, d_e)
    np.testing.assert_allclose(
        apply_superoperator(lifted_s, np.kron(rho_s, rho_e)),
        np.kron(apply_superoperator(gen_s, rho_s), rho_e), atol=1e-12,
    )
    np.testing.assert_allclose(
        apply_superoperator(lifted_e, np.kron(rho_s, rho_e)),
        np.kron(rho_s, apply_superoperator(gen_e, rho_e)), atol=1e-12,
    )


def test_projection_annihilates_the_bath_generator(rng, composite):
    gen_s, gen_e, rho_e, dims = composite
    lifted_s, lifted_e = lift_system(gen_s, dims[1]), lift_environment(gen_e, dims[0])
    for _ in range(10):
        op = random_operator(rng, dims[0] * dims[1])
        projected = project_p0(op, rho_e, dims)
        # P0 L_E = 0 and L_E P0 = 0
        np.testing.assert_allclose(
            project_p0(apply_superoperator(lifted_e, op), rho_e, dims), 0.0, atol=1e-10
        )
        np.testing.assert_allclose(apply_superoperator(lifted_e, projected), 0.0,
                                   atol=1e-10)
        # P0 L_S = L_S P0
        np.testing.assert_allclose(
            project_p0(apply_superoperator(lifted_s, op), rho_e, dims),
            apply_superoperator(lifted_s, projected), atol=1e-10,
        )


def test_long_bath_propagation_is_the_projection(rng, composite):
    _, gen_e, rho_e, dims = composite
    # lam - |mu| = 0.3 for the bath mode
    late = propagator(lift_environment(gen_e, dims[0]), 60.0 / 0.3)
    for _ in range(5):
        op = random_operator(rng, dims[0] * dims[1])
        np.testing.assert_allclose(
            apply_superoperator(late, op), project_p0(op, rho_e, dims), atol=1e-8
        )
