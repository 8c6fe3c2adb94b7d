#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Exact composite dynamics against the derived rotating-wave master equation.

The system is the harmonic oscillator of the linear coupling model, coupled
through eps Q kron q to one damped bath mode.  The composite generator is
propagated on the truncated product space and traced over the bath; the
derived generator propagates the system state alone.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from openbath.quantum.damped_oscillator import Constants, OscillatorParams, require_valid
from openbath.quantum.linear_example import (
    BathCoupling,
    LinearModelSpec,
    effective_coefficients,
    system_hamiltonian,
    system_position,
)
from openbath.quantum.lindblad_core import (
    Superoperator,
    as_density_matrix,
    coherent_state,
    commutator_superoperator,
    compose_composite_generator,
    fock_operators,
    gibbs_state,
    partial_trace,
    propagate_series,
    sns_generator,
    stationary_state,
    trace_distance,
)
from openbath.quantum.weak_coupling import CouplingTerm, rwa_master_equation

logger = logging.getLogger(__name__)

# - global parameters ------------------------------
MAX_COMPOSITE_DIM = 128


# - Classes ----------------------------------------
@dataclass(frozen=True)
class ScaleSeries:
    """Trace distances at one coupling scale.

    Structure elements
    ------------------
    - scale      :  coupling scale eps
    - lambda_eff :  effective damping of the system at this scale
    - times      :  time grid [0, horizon / lambda_eff]
    - distance   :  trace distance between reduced and derived states
    """

    scale: float
    lambda_eff: float
    times: np.ndarray
    distance: np.ndarray

    @property
    def max_distance(self: ScaleSeries) -> float:
        """Return the largest trace distance of the series."""
        return float(np.max(self.distance))


@dataclass(frozen=True)
class ComparisonReport:
    """Convergence of the reduced composite dynamics with the coupling scale.

    ratios[i] is max_distance of scale i over that of scale i + 1.  The
    sensitivity series holds the trace distance between reduced states of
    correlated and product initial composite states with equal marginals.
    """

    series: tuple[ScaleSeries, ...]
    ratios: tuple[float, ...]
    sensitivity_scale: float | None = None
    sensitivity_times: np.ndarray | None = None
    sensitivity: np.ndarray | None = None

    def convergence_table(self: ComparisonReport) -> list[tuple[float, float, float, float]]:
        """Return (scale, lambda_eff, max distance, ratio to the next scale) rows."""
        rows = []
        for nr, entry in enumerate(self.series):
            ratio = self.ratios[nr] if nr < len(self.ratios) else float("nan")
            rows.append((entry.scale, entry.lambda_eff, entry.max_distance, ratio))
        return rows


@dataclass(frozen=True)
class CompositeModel:
    """Harmonic system, damped bath mode and their truncations."""

    m_s: float
    omega_s: float
    bath: OscillatorParams
    dims: tuple[int, int]
    constants: Constants

    def __post_init__(self: CompositeModel) -> None:
        """Check the dimension budget and that the bath relaxes."""
        d_s, d_e = self.dims
        if min(d_s, d_e) < 2:
            raise ValueError("truncations need at least two levels")
        if d_s * d_e > MAX_COMPOSITE_DIM:
            raise ValueError(f"d_S * d_E = {d_s * d_e} exceeds {MAX_COMPOSITE_DIM}")
        if not self.bath.relaxing:
            raise ValueError("bath mode does not relax to a unique state")
        require_valid(self.bath)

    def linear_spec(self: CompositeModel, scale: float) -> LinearModelSpec:
        """Return the linear coupling model at coupling constant scale."""
        return LinearModelSpec(
            self.m_s, self.omega_s, (BathCoupling(scale, self.bath),), self.constants
        )


# - initial states ---------------------------------
def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    val, vec = eigh(rho)
    return (vec * np.sqrt(np.clip(val, 0, None))) @ vec.conj().T


def _correlator(rho: np.ndarray, op: np.ndarray) -> np.ndarray:
    """Return rho^1/2 A rho^1/2 with A = op - <op> scaled to unit norm.

    rho +- the result stays positive and has unit trace.
    """
    op = (op + op.conj().T) / 2
    centered = op - np.trace(rho @ op).real * np.eye(op.shape[0])
    norm = np.linalg.norm(centered, 2)
    if norm == 0:
        return np.zeros_like(rho)
    root = _sqrtm_psd(rho)
    return root @ (centered / norm) @ root


def initial_system_state(
    model: CompositeModel, alpha: float, mixing: float
) -> np.ndarray:
    """Return (1 - mixing) |alpha><alpha| + mixing rho_thermal on the system."""
    d_s = model.dims[0]
    rho = (1 - mixing) * coherent_state(d_s, alpha)
    if mixing > 0:
        ham = system_hamiltonian(model.linear_spec(0.0), d_s)
        rho = rho + mixing * gibbs_state(
            ham, model.bath.temperature or 1.0, model.constants.k_b
        )
    return as_density_matrix(rho)


def correlated_state(
    model: CompositeModel,
    rho_s: np.ndarray,
    rho_e: np.ndarray,
    weight: float,
    seed: int,
) -> np.ndarray:
    """Return rho_S kron rho_E + weight X kron Y with unchanged marginals.

    X and Y are the correlators of Q + G_S and q + G_E, where the small
    hermitian perturbations G are drawn from the seed.  The state is the
    equal mixture of (rho_S +- X) kron (rho_E +- Y), hence positive.
    """
    if not 0 <= weight <= 1:
        raise ValueError("correlation weight must lie in [0, 1]")
    d_s, d_e = model.dims
    rng = np.random.default_rng(seed)

    def perturbation(dim: int) -> np.ndarray:
        raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        return 0.05 * (raw + raw.conj().T) / 2

    pos_s = system_position(model.linear_spec(0.0), d_s)
    pos_e = fock_operators(d_e, model.bath.m, model.bath.omega, model.constants).q
    corr_s = _correlator(rho_s, pos_s + perturbation(d_s) * np.linalg.norm(pos_s, 2))
    corr_e = _correlator(rho_e, pos_e + perturbation(d_e) * np.linalg.norm(pos_e, 2))
    return as_density_matrix(np.kron(rho_s, rho_e) + weight * np.kron(corr_s, corr_e))


# - propagation ------------------------------------
def _composite_generator(model: CompositeModel, scale: float) -> Superoperator:
    d_s, d_e = model.dims
    hbar = model.constants.hbar
    spec = model.linear_spec(scale)
    gen_s = commutator_superoperator(system_hamiltonian(spec, d_s), hbar)
    gen_e = sns_generator(model.bath, d_e)
    pos_e = fock_operators(d_e, model.bath.m, model.bath.omega, model.constants).q
    u_int = scale * np.kron(system_position(spec, d_s), pos_e)
    return compose_composite_generator(gen_s, gen_e, u_int, hbar)


def reduced_composite_series(
    model: CompositeModel, scale: float, rho0: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """Return Tr_E of the composite states on a time grid."""
    states = propagate_series(_composite_generator(model, scale), rho0, times)
    return np.array([partial_trace(rho, model.dims, "system") for rho in states])


def derived_series(
    model: CompositeModel, scale: float, rho_s: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """Return the system states under the rotating-wave generator."""
    d_s = model.dims[0]
    spec = model.linear_spec(scale)
    ham = system_hamiltonian(spec, d_s)
    _, gen = rwa_master_equation(
        ham, [CouplingTerm(scale * system_position(spec, d_s), model.bath)],
        hbar=model.constants.hbar,
    )
    return propagate_series(gen, rho_s, times)


def _scale_series(
    model: CompositeModel,
    scale: float,
    rho_s: np.ndarray,
    rho0: np.ndarray,
    horizon: float,
    n_times: int,
) -> ScaleSeries:
    lam_eff = effective_coefficients(model.linear_spec(scale)).lambda_eff
    rate = lam_eff if lam_eff > 0 else model.bath.lam - abs(model.bath.mu)
    times = np.linspace(0.0, horizon / rate, n_times)
    reduced = reduced_composite_series(model, scale, rho0, times)
    derived = derived_series(model, scale, rho_s, times)
    distance = np.array(
        [trace_distance(rho_r, rho_d) for rho_r, rho_d in zip(reduced, derived, strict=True)]
    )
    logger.info(
        "scale %.4g: lambda_eff=%.4g, max trace distance %.4g",
        scale, lam_eff, distance.max(),
    )
    return ScaleSeries(scale, lam_eff, times, distance)


def compare_reduced_vs_derived(
    model: CompositeModel,
    scales: list[float],
    *,
    horizon: float = 5.0,
    n_times: int = 41,
    alpha: float = 0.8,
    mixing: float = 0.5,
    initial: str = "product",
    correlation_weight: float = 0.5,
    sensitivity_scale: float | None = None,
    sensitivity_horizon: float = 20.0,
    seed: int = 0,
    threads: int = 1,
) -> ComparisonReport:
    """Compare reduced composite and derived dynamics at several coupling scales.

    Every scale is propagated over [0, horizon / lambda_eff(scale)] from the
    same system state; the composite starts in rho_S kron rho_E (product) or
    in the correlated state with the same marginals, where rho_E is the
    stationary state of the truncated bath generator.  When
    sensitivity_scale is given, correlated and product initial states are
    also propagated at that scale over [0, sensitivity_horizon / (lam - |mu|)].
    """
    if initial not in ("product", "correlated"):
        raise ValueError(f"unknown initial state {initial!r}")
    rho_s = initial_system_state(model, alpha, mixing)
    rho_e = stationary_state(sns_generator(model.bath, model.dims[1]))
    product = as_density_matrix(np.kron(rho_s, rho_e))
    correlated = correlated_state(model, rho_s, rho_e, correlation_weight, seed)
    rho0 = product if initial == "product" else correlated

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        series = tuple(
            pool.map(
                lambda scale: _scale_series(model, scale, rho_s, rho0, horizon, n_times),
                scales,
            )
        )
    ratios = tuple(
        first.max_distance / second.max_distance
        if second.max_distance > 0 else float("inf")
        for first, second in zip(series[:-1], series[1:], strict=True)
    )

    sens_times = sens = None
    if sensitivity_scale is not None:
        rate = model.bath.lam - abs(model.bath.mu)
        sens_times = np.linspace(0.0, sensitivity_horizon / rate, n_times)
        from_product = reduced_composite_series(model, sensitivity_scale, product, sens_times)
        from_correlated = reduced_composite_series(
            model, sensitivity_scale, correlated, sens_times
        )
        sens = np.array(
            [trace_distance(a, b) for a, b in zip(from_product, from_correlated, strict=True)]
        )
    return ComparisonReport(series, ratios, sensitivity_scale, sens_times, sens)
