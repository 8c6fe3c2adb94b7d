#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Numerical acceptance checks of the quantum and classical models.

Every check returns a CheckResult; the rows it carries are written as CSV by
the scenarios that run it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from openbath.classical.bath import (
    ClassicalBathMode,
    ensemble_statistics,
    harmonic_system,
    markov_kernel,
    markov_langevin,
    simulate_composite_langevin,
)
from openbath.quantum.damped_oscillator import (
    Constants,
    OscillatorParams,
    asymptotic_moments,
    bath_correlation,
    evolve_moments,
    gibbs_params,
    sample_valid_params,
)
from openbath.quantum.linear_example import (
    LinearModelSpec,
    bose_einstein,
    coupling_terms,
    discretized_bath,
    effective_coefficients,
    effective_generator,
    system_hamiltonian,
)
from openbath.quantum.lindblad_core import (
    adjoint_propagate,
    coherent_state,
    cptp_check,
    expectation,
    fock_operators,
    propagate_series,
    propagator,
    sns_generator,
    state_moments,
    stationary_state,
)
from openbath.quantum.spectral_functions import spectral_table, spectral_transform
from openbath.quantum.weak_coupling import (
    CouplingTerm,
    rwa_master_equation,
    simple_markov_generator,
    spectral_gap,
)

from .compare import ComparisonReport, CompositeModel, compare_reduced_vs_derived

logger = logging.getLogger(__name__)

# - global parameters ------------------------------
H_NEGATIVE_TOL = 1e-12
CPTP_TIMES = (0.1, 1.0, 10.0)


# - Classes ----------------------------------------
@dataclass
class CheckResult:
    """Outcome of one acceptance check.

    Structure elements
    ------------------
    - name      :  check identifier
    - passed    :  True when value lies within threshold
    - value     :  worst value found
    - threshold :  acceptance threshold of value
    - detail    :  one-line human readable summary
    - columns   :  column names of rows
    - rows      :  tabular detail
    """

    name: str
    passed: bool
    value: float
    threshold: Any
    detail: str = ""
    columns: tuple[str, ...] = ()
    rows: list[tuple] = field(default_factory=list)

    def summary(self: CheckResult) -> dict[str, Any]:
        """Return the result without its rows."""
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "detail": self.detail,
        }


# - local functions --------------------------------
def _nonthermal(p: OscillatorParams) -> OscillatorParams:
    """Return a valid diffusion set that is not of the Gibbs form."""
    return replace(
        p,
        d_qq=2.0 * p.d_qq,
        d_pp=1.5 * p.d_pp,
        d_pq=0.25 * p.lam * p.hbar,
        temperature=None,
    )


def _reference_mode(constants: Constants | None = None) -> OscillatorParams:
    return gibbs_params(1.0, 1.0, 0.1, 0.05, 1.0, constants)


# - spectral pair ----------------------------------
def check_spectral_identity(
    m: float = 1.0,
    omega: float = 1.0,
    temperature: float = 1.0,
    lam_over_omega: tuple[float, ...] = (0.01, 0.1, 0.5),
    mu_over_lam: tuple[float, ...] = (0.0, 0.5),
    deltas: np.ndarray | None = None,
    rel_tol: float = 1e-8,
    threshold: float = 1e-6,
    constants: Constants | None = None,
) -> CheckResult:
    """Compare closed-form h + iS with quadrature over the parameter grid."""
    if deltas is None:
        deltas = np.arange(-3.0, 3.0 + 0.25, 0.5)
    columns = ("lam_over_omega", "mu_over_lam", "diffusion", "delta_omega",
               "h_closed", "S_closed", "h_quad", "S_quad", "rel_err")
    rows = []
    for lam_rel in lam_over_omega:
        for mu_rel in mu_over_lam:
            lam = lam_rel * omega
            thermal = gibbs_params(m, omega, lam, mu_rel * lam, temperature, constants)
            for label, params in (("thermal", thermal), ("nonthermal", _nonthermal(thermal))):
                table = spectral_table(params, np.asarray(deltas) * omega, rel_tol)
                rows.extend(
                    (lam_rel, mu_rel, label, *(float(rec[key]) for key in table.dtype.names))
                    for rec in table
                )
    worst = max(row[-1] for row in rows)
    return CheckResult(
        "spectral_identity", worst <= threshold, worst, threshold,
        f"max relative error {worst:.3e} over {len(rows)} grid points",
        columns, rows,
    )


def check_h_positivity(
    n_sets: int = 1000,
    n_delta: int = 21,
    seed: int = 0,
    constants: Constants | None = None,
) -> CheckResult:
    """Evaluate h on random valid parameter sets and report its minimum."""
    rng = np.random.default_rng(seed)
    worst, worst_params = np.inf, None
    for _ in range(n_sets):
        params = sample_valid_params(rng, constants)
        deltas = np.linspace(-3.0, 3.0, n_delta) * params.omega
        h_min = float(np.min(spectral_transform(params, deltas).real))
        if h_min < worst:
            worst, worst_params = h_min, params
    logger.debug("smallest h %.3e for %s", worst, worst_params)
    return CheckResult(
        "h_positivity", worst >= -H_NEGATIVE_TOL, worst, -H_NEGATIVE_TOL,
        f"min h {worst:.3e} over {n_sets} x {n_delta} evaluations",
    )


# - damped oscillator ------------------------------
def check_moment_consistency(
    params: OscillatorParams | None = None,
    dim: int = 40,
    alpha: float = 1.0,
    horizon: float = 5.0,
    n_times: int = 11,
    threshold: float = 1e-6,
) -> CheckResult:
    """Compare propagated moments and the stationary state with closed forms."""
    params = params or _reference_mode()
    ops = fock_operators(dim, params.m, params.omega, params.constants)
    gen = sns_generator(params, dim)
    rho0 = coherent_state(dim, alpha)
    start = state_moments(rho0, ops)
    times = np.linspace(0.0, horizon / params.lam, n_times)

    columns = ("t", "mean_q", "mean_p", "qq", "pp", "s_pq",
               "mean_q_ref", "mean_p_ref", "qq_ref", "pp_ref", "s_pq_ref", "abs_err")
    rows = []
    for t, rho in zip(times, propagate_series(gen, rho0, times), strict=True):
        num = state_moments(rho, ops)
        ref = evolve_moments(params, start, t)
        values = np.concatenate((num.first(), num.second()))
        expected = np.concatenate((ref.first(), ref.second()))
        rows.append((t, *values, *expected, float(np.max(np.abs(values - expected)))))

    stat = state_moments(stationary_state(gen), ops)
    stat_ref = asymptotic_moments(params)
    stat_err = float(np.max(np.abs(stat.second() - stat_ref.second())))
    worst = max(max(row[-1] for row in rows), stat_err)
    return CheckResult(
        "moment_consistency", worst <= threshold, worst, threshold,
        f"moment flow error {max(row[-1] for row in rows):.3e},"
        f" stationary error {stat_err:.3e} (d={dim})",
        columns, rows,
    )


def check_correlation_oracle(
    params: OscillatorParams | None = None,
    dim: int = 40,
    horizon: float = 5.0,
    n_times: int = 21,
    threshold: float = 1e-6,
) -> CheckResult:
    """Compare <q(t) q> in closed form with the Heisenberg-picture propagation."""
    params = params or _reference_mode()
    ops = fock_operators(dim, params.m, params.omega, params.constants)
    gen = sns_generator(params, dim)
    rho_ss = stationary_state(gen)
    columns = ("t", "re_numeric", "im_numeric", "re_closed", "im_closed", "abs_err")
    rows = []
    for t in np.linspace(0.0, horizon / params.lam, n_times):
        num = expectation(rho_ss, adjoint_propagate(gen, ops.q, t) @ ops.q)
        ref = complex(bath_correlation(params, t))
        rows.append((t, num.real, num.imag, ref.real, ref.imag, abs(num - ref)))
    worst = max(row[-1] for row in rows)
    return CheckResult(
        "correlation_oracle", worst <= threshold, worst, threshold,
        f"max |difference| {worst:.3e} (d={dim})", columns, rows,
    )


# - derived generators -----------------------------
def check_cptp(
    n_configs: int = 50,
    seed: int = 0,
    dim: int = 3,
    tol: float = 1e-8,
    constants: Constants | None = None,
) -> CheckResult:
    """Certify rotating-wave propagators of random configurations by their Choi matrix."""
    rng = np.random.default_rng(seed)
    columns = ("config", "t_lambda_eff", "lambda_eff", "min_choi_eigenvalue", "is_tp", "is_cp")
    rows = []
    for nr in range(n_configs):
        raw_h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        raw_v = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        ham = (raw_h + raw_h.conj().T) / 2
        coupling = 0.3 * (raw_v + raw_v.conj().T) / 2
        bath = sample_valid_params(rng, constants)
        _, gen = rwa_master_equation(ham, [CouplingTerm(coupling, bath)])
        lam_eff = spectral_gap(gen)
        for scale in CPTP_TIMES:
            report = cptp_check(propagator(gen, scale / lam_eff), tol)
            rows.append((nr, scale, lam_eff, report.min_choi_eigenvalue,
                         report.is_tp, report.is_cp))
    worst = min(row[3] for row in rows)
    passed = all(row[4] and row[5] for row in rows)
    return CheckResult(
        "cptp", passed, worst, -tol,
        f"{n_configs} configurations, min Choi eigenvalue {worst:.3e}", columns, rows,
    )


def default_composite_model(constants: Constants | None = None) -> CompositeModel:
    """Return the cold-bath comparison model: d_S=8, d_E=8, lam=0.3, hbar w/kT=2."""
    constants = constants or Constants()
    bath = gibbs_params(1.0, 1.0, 0.3, 0.0, 0.5 * constants.hbar / constants.k_b, constants)
    return CompositeModel(1.0, 1.0, bath, (8, 8), constants)


def convergence_result(
    report: ComparisonReport, ratio_range: tuple[float, float] = (2.2, 6.5)
) -> CheckResult:
    """Judge the eps-halving ratios of a comparison report."""
    lo, hi = ratio_range
    passed = len(report.ratios) > 0 and all(lo <= ratio <= hi for ratio in report.ratios)
    worst = min(report.ratios, key=lambda ratio: min(abs(ratio - lo), abs(ratio - hi)),
                default=float("nan"))
    return CheckResult(
        "convergence", passed, worst, list(ratio_range),
        "ratios " + ", ".join(f"{ratio:.3f}" for ratio in report.ratios),
        ("scale", "lambda_eff", "max_trace_distance", "ratio"),
        report.convergence_table(),
    )


def insensitivity_result(
    report: ComparisonReport, bath: OscillatorParams, threshold: float = 1e-3
) -> CheckResult:
    """Judge the correlated-vs-product series beyond 10 bath relaxation times."""
    if report.sensitivity is None:
        raise ValueError("comparison report has no sensitivity series")
    late = report.sensitivity_times > 10 / (bath.lam - abs(bath.mu))
    worst = float(np.max(report.sensitivity[late]))
    rows = list(zip(report.sensitivity_times, report.sensitivity, strict=True))
    return CheckResult(
        "insensitivity", worst < threshold, worst, threshold,
        f"max trace distance {worst:.3e} beyond 10 bath relaxation times",
        ("t", "trace_distance"), rows,
    )


def check_convergence(
    model: CompositeModel | None = None,
    scales: tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125),
    ratio_range: tuple[float, float] = (2.2, 6.5),
    threads: int = 1,
    seed: int = 0,
    **kwargs: Any,
) -> CheckResult:
    """Check that halving the coupling scale shrinks the trace distance as eps^2."""
    model = model or default_composite_model()
    report = compare_reduced_vs_derived(
        model, list(scales), seed=seed, threads=threads, **kwargs
    )
    return convergence_result(report, ratio_range)


def check_insensitivity(
    model: CompositeModel | None = None,
    scale: float = 1e-3,
    threshold: float = 1e-3,
    seed: int = 0,
    **kwargs: Any,
) -> CheckResult:
    """Check that initial system-bath correlations are forgotten on bath timescales."""
    model = model or default_composite_model()
    report = compare_reduced_vs_derived(
        model, [], sensitivity_scale=scale, seed=seed, **kwargs
    )
    return insensitivity_result(report, model.bath, threshold)


# - linear model -----------------------------------
def linear_bath_model(
    m_s: float, omega_s: float, temperature: float, bath: dict[str, Any],
    constants: Constants | None,
) -> LinearModelSpec:
    """Return the linear model with a discretized Gibbs bath described by a bath section."""
    constants = constants or Constants()
    modes = discretized_bath(
        omega_s, bath["coupling"], temperature, bath["n_modes"], tuple(bath["span"]),
        bath["m"], bath["damping"], constants,
    )
    return LinearModelSpec(m_s, omega_s, modes, constants)


DEFAULT_LINEAR_BATH = {"n_modes": 1, "span": (1.0, 1.0), "coupling": 0.05,
                       "damping": 0.01, "m": 1.0}


def check_thermalization(
    m_s: float = 1.0,
    omega_s: float = 1.0,
    temperature: float = 1.0,
    dim: int = 30,
    bath: dict[str, Any] | None = None,
    threshold: float = 0.02,
    constants: Constants | None = None,
) -> CheckResult:
    """Compare the stationary occupancy with Bose-Einstein at the shifted frequency."""
    spec = linear_bath_model(m_s, omega_s, temperature, bath or DEFAULT_LINEAR_BATH, constants)
    coef = effective_coefficients(spec)
    number = fock_operators(dim, m_s, omega_s, spec.constants).number
    occupancy = expectation(stationary_state(effective_generator(spec, dim)), number).real
    target = bose_einstein(omega_s + coef.delta_omega_s, temperature, spec.constants)

    ham = system_hamiltonian(spec, dim)
    _, gen_rwa = rwa_master_equation(ham, coupling_terms(spec, dim))
    occupancy_rwa = expectation(stationary_state(gen_rwa), number).real
    rows = [
        ("effective", occupancy, target, abs(occupancy - target) / target),
        ("rwa", occupancy_rwa, target, abs(occupancy_rwa - target) / target),
    ]
    # both generators must thermalize
    deviation = max(row[3] for row in rows)
    return CheckResult(
        "thermalization", deviation <= threshold, deviation, threshold,
        f"<N>={occupancy:.6f} (rwa {occupancy_rwa:.6f}), Bose-Einstein {target:.6f} at"
        f" omega_s + delta_omega_s = {omega_s + coef.delta_omega_s:.6f}",
        ("generator", "occupancy", "bose_einstein", "relative_deviation"), rows,
    )


def check_simple_markov(
    m_s: float = 1.0,
    omega_s: float = 1.0,
    temperature: float = 1.0,
    dim: int = 30,
    bath: dict[str, Any] | None = None,
    alpha: float = 1.5,
    horizon: float = 3.0,
    n_times: int = 31,
    constants: Constants | None = None,
) -> CheckResult:
    """Show that the double-commutator generator heats while the RWA one relaxes."""
    spec = linear_bath_model(m_s, omega_s, temperature, bath or DEFAULT_LINEAR_BATH, constants)
    ham = system_hamiltonian(spec, dim)
    couplings = coupling_terms(spec, dim)
    lam_eff = effective_coefficients(spec).lambda_eff
    times = np.linspace(0.0, horizon / lam_eff, n_times)
    rho0 = coherent_state(dim, alpha)

    def energies(gen: Any) -> np.ndarray:
        return np.array([expectation(rho, ham).real
                         for rho in propagate_series(gen, rho0, times)])

    e_simple = energies(simple_markov_generator(ham, couplings))
    e_rwa = energies(rwa_master_equation(ham, couplings)[1])
    tol = 1e-10 * np.max(np.abs(e_simple))
    e_thermal = spec.constants.hbar * omega_s * (
        bose_einstein(omega_s, temperature, spec.constants) + 0.5
    )
    heating = bool(np.all(np.diff(e_simple) >= -tol) and e_simple[-1] > e_simple[0])
    relaxing = bool(
        np.all(np.diff(e_rwa) <= tol)
        and abs(e_rwa[-1] - e_thermal) < abs(e_rwa[0] - e_thermal)
    )
    return CheckResult(
        "simple_markov", heating and relaxing, float(e_simple[-1] - e_simple[0]), 0.0,
        f"double commutator: dE={e_simple[-1] - e_simple[0]:+.4e};"
        f" rotating wave: dE={e_rwa[-1] - e_rwa[0]:+.4e}",
        ("t", "energy_simple_markov", "energy_rwa"),
        list(zip(times, e_simple, e_rwa, strict=True)),
    )


# - classical bath ---------------------------------
def _within(value: float, reference: float, error: float, n_sigma: float = 3.0) -> bool:
    return abs(value - reference) <= n_sigma * error


def check_classical(
    n_traj: int = 10000,
    seed: int = 0,
    threads: int = 1,
    temperature: float = 1.0,
) -> CheckResult:
    """Run the classical twin simulations.

    - equipartition of a free bath mode (n_traj trajectories) and of the
      Markovian harmonic system
    - stationary x-variance of composite and Markovian simulations
    - memory erasure: bath initially at rest or at twice the temperature
    - Markov trend: the noiseless relaxation of <x> approaches the Markovian
      one as the bath damping grows
    """
    kt = temperature
    columns = ("quantity", "value", "reference", "error", "passed")
    rows = []

    # free bath mode
    free = ClassicalBathMode(m=1.0, omega=1.0, gamma=0.5)
    ens = simulate_composite_langevin(
        None, [free], temperature, 0.05, 40.0, n_traj, seed,
        sample_every=10, threads=threads,
    )
    est = ensemble_statistics(ens, discard=20.0).moments["bath_kinetic_0"]
    rows.append(("free_mode_kinetic", est.value, kt / 2, est.error,
                 _within(est.value, kt / 2, est.error)))

    # Markovian harmonic system
    system = harmonic_system(1.0, 1.0)
    ens = markov_langevin(system, 0.5, temperature, 0.05, 60.0, max(n_traj // 5, 100),
                          seed, sample_every=5, threads=threads)
    stats = ensemble_statistics(ens)
    est = stats.moments["kinetic"]
    rows.append(("markov_kinetic", est.value, kt / 2, est.error,
                 _within(est.value, kt / 2, est.error)))
    est = stats.moments["x2"]
    rows.append(("markov_potential", 0.5 * est.value, kt / 2, 0.5 * est.error,
                 _within(0.5 * est.value, kt / 2, 0.5 * est.error)))

    # composite against Markovian stationary variance, fast bath
    n_twin = max(n_traj // 10, 200)
    fast = [ClassicalBathMode(m=1.0, omega=10.0, gamma=5.0, c=np.sqrt(0.05))]
    comp = ensemble_statistics(
        simulate_composite_langevin(system, fast, temperature, 0.005, 40.0, n_twin,
                                    seed, sample_every=10, threads=threads),
        discard=20.0,
    ).moments["x2"]
    mark = ensemble_statistics(
        markov_langevin(system, markov_kernel(fast), temperature, 0.005, 40.0, n_twin,
                        seed + 1, sample_every=10, threads=threads),
        discard=20.0,
    ).moments["x2"]
    combined = float(np.hypot(comp.error, mark.error))
    rows.append(("twin_x_variance", comp.value, mark.value, combined,
                 _within(comp.value, mark.value, combined)))

    # memory erasure
    n_erase = max(n_traj // 5, 200)
    slow = [ClassicalBathMode(m=1.0, omega=10.0, gamma=1.0, c=np.sqrt(0.5))]
    series = []
    for init, t_init in (("rest", None), ("thermal", 2 * temperature)):
        ens = simulate_composite_langevin(
            system, slow, temperature, 0.005, 15.0, n_erase, seed,
            sample_every=20, bath_init=init, init_temperature=t_init,
            record_bath=False, threads=threads,
        )
        series.append(ensemble_statistics(ens, discard=10.0, max_lag=2))
    late = ens.times > 10 / slow[0].gamma
    diff = np.abs(series[0].x2_series - series[1].x2_series)[late]
    bars = np.hypot(series[0].x2_series_error, series[1].x2_series_error)[late]
    ratio = float(np.max(diff / bars))
    rows.append(("memory_erasure", ratio, 3.0, float(np.max(bars)), ratio <= 3.0))

    # Markov trend, noiseless relaxation from x0 = 1
    relax = harmonic_system(1.0, 1.0, x0=1.0)
    eta_bar = 0.4
    reference = markov_langevin(relax, eta_bar, 0.0, 0.0025, 10.0, 1, seed)
    discrepancy = []
    for gamma in (1.0, 2.0, 4.0):
        mode = ClassicalBathMode(m=1.0, omega=20.0, gamma=gamma,
                                 c=np.sqrt(eta_bar / (2 * gamma)))
        ens = simulate_composite_langevin(relax, [mode], 0.0, 0.0025, 10.0, 1, seed,
                                          record_bath=False)
        discrepancy.append(float(np.max(np.abs(ens.x - reference.x))))
    monotone = all(a > b for a, b in zip(discrepancy[:-1], discrepancy[1:], strict=True))
    for gamma, value in zip((1.0, 2.0, 4.0), discrepancy, strict=True):
        rows.append((f"markov_trend_gamma_{gamma:g}", value, float("nan"), 0.0, monotone))

    passed = all(row[-1] for row in rows)
    return CheckResult(
        "classical", passed, float(sum(not row[-1] for row in rows)), 0,
        f"{sum(bool(row[-1]) for row in rows)} of {len(rows)} classical checks passed",
        columns, rows,
    )


# - exported functions -----------------------------
def run_checks(
    names: list[str],
    seed: int = 0,
    threads: int = 1,
    sizes: dict[str, int] | None = None,
    constants: Constants | None = None,
) -> list[CheckResult]:
    """Run the named checks in order."""
    sizes = sizes or {}
    runners = {
        "spectral_identity": lambda: check_spectral_identity(constants=constants),
        "h_positivity": lambda: check_h_positivity(
            sizes.get("h_positivity_sets", 1000), seed=seed, constants=constants),
        "moment_consistency": lambda: check_moment_consistency(
            _reference_mode(constants), dim=sizes.get("moment_dim", 40)),
        "correlation_oracle": lambda: check_correlation_oracle(
            _reference_mode(constants), dim=sizes.get("moment_dim", 40)),
        "cptp": lambda: check_cptp(sizes.get("cptp_configs", 50), seed=seed,
                                   constants=constants),
        "convergence": lambda: check_convergence(
            default_composite_model(constants), threads=threads, seed=seed),
        "insensitivity": lambda: check_insensitivity(
            default_composite_model(constants), seed=seed),
        "thermalization": lambda: check_thermalization(constants=constants),
        "classical": lambda: check_classical(
            sizes.get("classical_traj", 10000), seed=seed, threads=threads),
        "simple_markov": lambda: check_simple_markov(constants=constants),
    }
    results = []
    for name in names:
        if name not in runners:
            raise ValueError(f"unknown check {name!r}")
        logger.info("running check %s", name)
        result = runners[name]()
        logger.info("%s: %s (%s)", name, "passed" if result.passed else "FAILED",
                    result.detail)
        results.append(result)
    return results
