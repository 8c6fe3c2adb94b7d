#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Scenario runners: compute, judge, and write CSV tables and a JSON summary.

Every runner returns (tables, results, checks): tables maps a short name to
(columns, rows) and is written as <scenario>_<name>.csv, results enters the
summary JSON next to the configuration echo and the check outcomes.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from openbath.classical.archive import write_ensemble
from openbath.classical.bath import (
    ClassicalBathMode,
    double_well_system,
    ensemble_statistics,
    harmonic_system,
    markov_kernel,
    markov_langevin,
    memory_kernel,
    simulate_composite_langevin,
)
from openbath.errors import ConfigError, NumericalInvariantError, OpenBathError
from openbath.quantum.linear_example import coupling_terms, system_hamiltonian
from openbath.quantum.weak_coupling import rwa_master_equation

from .checks import (
    CheckResult,
    check_correlation_oracle,
    check_moment_consistency,
    check_simple_markov,
    check_spectral_identity,
    check_thermalization,
    convergence_result,
    insensitivity_result,
    linear_bath_model,
    run_checks,
)
from .compare import CompositeModel, compare_reduced_vs_derived
from .config import ScenarioConfig, mode_from_config
from .output import master_equation_to_json, package_versions, write_csv, write_summary

if TYPE_CHECKING:
    from collections.abc import Callable

logger = logging.getLogger(__name__)

Tables = dict[str, tuple[tuple[str, ...], list[tuple]]]
Outcome = tuple[Tables, dict[str, Any], list[CheckResult]]

NOISE_SIGMA = 4.0


# - scenario runners -------------------------------
def _coeffs(config: ScenarioConfig) -> Outcome:
    par = config.params
    lo, hi = par["delta_range"]
    deltas = np.arange(lo, hi + par["delta_step"] / 2, par["delta_step"])
    result = check_spectral_identity(
        par["mode"]["m"], par["mode"]["omega"], par["mode"]["temperature"],
        tuple(par["lam_over_omega"]), tuple(par["mu_over_lam"]), deltas,
        par["rel_tol"], par["threshold"], config.constants,
    )
    return {"spectral": (result.columns, result.rows)}, {}, [result]


def _simulate(config: ScenarioConfig) -> Outcome:
    par = config.params
    params = mode_from_config(par["mode"], config.constants)
    moments = check_moment_consistency(
        params, par["dim"], par["alpha"], par["horizon"], par["n_times"], par["threshold"]
    )
    corr = check_correlation_oracle(
        params, par["dim"], par["horizon"], par["n_times"], par["threshold"]
    )
    tables = {
        "moments": (moments.columns, moments.rows),
        "correlation": (corr.columns, corr.rows),
    }
    return tables, {"big_omega": params.big_omega}, [moments, corr]


def _compare(config: ScenarioConfig) -> Outcome:
    par = config.params
    bath = mode_from_config(par["bath"], config.constants, "bath")
    try:
        model = CompositeModel(
            par["system"]["m"], par["system"]["omega"], bath,
            (par["system"]["dim"], par["bath"]["dim"]), config.constants,
        )
    except ValueError as exc:
        raise ConfigError("bath", str(exc)) from exc
    init = par["initial"]
    report = compare_reduced_vs_derived(
        model, par["scales"],
        horizon=par["horizon"], n_times=par["n_times"],
        alpha=init["alpha"], mixing=init["mixing"],
        correlation_weight=init["correlation_weight"],
        sensitivity_scale=par["sensitivity_scale"],
        sensitivity_horizon=par["sensitivity_horizon"],
        seed=config.seed, threads=config.threads,
    )
    distance_rows = [
        (entry.scale, t, dist)
        for entry in report.series
        for t, dist in zip(entry.times, entry.distance, strict=True)
    ]
    convergence = convergence_result(report, tuple(par["ratio_range"]))
    sensitivity = insensitivity_result(report, bath, par["sensitivity_threshold"])
    checks = [sensitivity]
    if len(report.series) > 1:
        checks.insert(0, convergence)
    tables = {
        "trace_distance": (("scale", "t", "trace_distance"), distance_rows),
        "convergence": (convergence.columns, convergence.rows),
        "sensitivity": (sensitivity.columns, sensitivity.rows),
    }
    results = {"ratios": list(report.ratios),
               "max_trace_distance": [entry.max_distance for entry in report.series]}
    return tables, results, checks


def _thermalize(config: ScenarioConfig) -> Outcome:
    par = config.params
    system = par["system"]
    thermal = check_thermalization(
        system["m"], system["omega"], par["temperature"], system["dim"], par["bath"],
        par["threshold"], config.constants,
    )
    markov = check_simple_markov(
        system["m"], system["omega"], par["temperature"], system["dim"], par["bath"],
        par["alpha"], par["horizon"], par["n_times"], config.constants,
    )
    spec = linear_bath_model(system["m"], system["omega"], par["temperature"],
                             par["bath"], config.constants)
    master, _ = rwa_master_equation(
        system_hamiltonian(spec, system["dim"]), coupling_terms(spec, system["dim"])
    )
    tables = {
        "occupancy": (thermal.columns, thermal.rows),
        "energy": (markov.columns, markov.rows),
    }
    return tables, {"master_equation": master_equation_to_json(master)}, [thermal, markov]


def _classical(config: ScenarioConfig) -> Outcome:
    par = config.params
    sys_par = par["system"]
    try:
        if sys_par["potential"] == "harmonic":
            system = harmonic_system(sys_par["m"], sys_par["omega0"],
                                     sys_par["x0"], sys_par["v0"])
        else:
            system = double_well_system(sys_par["m"], sys_par["a4"], sys_par["b2"],
                                        sys_par["x0"], sys_par["v0"])
        bath = [ClassicalBathMode(mode["m"], mode["omega"], mode["gamma"], mode["c"])
                for mode in par["bath"]["modes"]]
    except ValueError as exc:
        raise ConfigError("system", str(exc)) from exc

    kt = config.constants.k_b * par["temperature"]
    common = {"k_b": config.constants.k_b, "sample_every": par["sample_every"],
              "threads": config.threads}
    try:
        ens = simulate_composite_langevin(
            system, bath, par["temperature"], par["dt"], par["t_end"], par["n_traj"],
            config.seed, bath_init=par["bath"]["init"],
            init_temperature=par["bath"]["init_temperature"], **common,
        )
    except ValueError as exc:
        raise ConfigError("dt", str(exc)) from exc
    stats = ensemble_statistics(ens, par["discard"], max_lag=par["max_lag"])

    reference = kt * memory_kernel(bath, stats.lags)
    noise_dev = np.abs(stats.noise_autocorrelation - reference) / np.maximum(
        stats.noise_autocorrelation_error, np.finfo(float).tiny
    )
    checks = [
        CheckResult(
            "noise_correlation", bool(np.max(noise_dev) <= NOISE_SIGMA),
            float(np.max(noise_dev)), NOISE_SIGMA,
            "max deviation of <F F> from k_B T eta in units of its error bar",
        )
    ]
    kinetic = stats.moments["kinetic"]
    checks.append(
        CheckResult(
            "equipartition", abs(kinetic.value - kt / 2) <= 3 * kinetic.error,
            kinetic.value, kt / 2, f"<m v^2 / 2> = {kinetic.value:.5f} +- {kinetic.error:.5f}",
        )
    )
    moment_rows = [("composite", key, est.value, est.error)
                   for key, est in stats.moments.items()]

    results: dict[str, Any] = {"eta_bar": markov_kernel(bath), "discard": stats.discard}
    if par["markov"]:
        twin = markov_langevin(
            system, markov_kernel(bath), par["temperature"], par["dt"], par["t_end"],
            par["n_traj"], config.seed + 1, **common,
        )
        twin_stats = ensemble_statistics(twin, stats.discard, max_lag=par["max_lag"])
        moment_rows += [("markov", key, est.value, est.error)
                        for key, est in twin_stats.moments.items()]
        comp, mark = stats.moments["x2"], twin_stats.moments["x2"]
        combined = float(np.hypot(comp.error, mark.error))
        checks.append(
            CheckResult(
                "twin_x_variance", abs(comp.value - mark.value) <= 3 * combined,
                comp.value - mark.value, 3 * combined,
                f"composite {comp.value:.5f}, markov {mark.value:.5f}",
            )
        )
    if par["archive"]:
        path = Path(config.out) / "classical_ensemble.h5"
        write_ensemble(path, ens)
        results["archive"] = path.name

    tables = {
        "statistics": (
            ("lag", "x_autocorrelation", "x_autocorrelation_error",
             "noise_autocorrelation", "noise_autocorrelation_error", "kT_eta"),
            list(zip(stats.lags, stats.x_autocorrelation, stats.x_autocorrelation_error,
                     stats.noise_autocorrelation, stats.noise_autocorrelation_error,
                     reference, strict=True)),
        ),
        "x2_series": (("t", "x2", "x2_error"),
                      list(zip(ens.times, stats.x2_series, stats.x2_series_error,
                               strict=True))),
        "moments": (("integrator", "quantity", "value", "error"), moment_rows),
    }
    return tables, results, checks


def _validate(config: ScenarioConfig) -> Outcome:
    par = config.params
    sizes = {key: par[key] for key in
             ("h_positivity_sets", "cptp_configs", "moment_dim", "classical_traj")}
    checks = run_checks(par["checks"], config.seed, config.threads, sizes, config.constants)
    tables = {res.name: (res.columns, res.rows) for res in checks if res.rows}
    return tables, {}, checks


RUNNERS: dict[str, Callable[[ScenarioConfig], Outcome]] = {
    "coeffs": _coeffs,
    "simulate": _simulate,
    "compare": _compare,
    "thermalize": _thermalize,
    "classical": _classical,
    "validate": _validate,
}


# - exported functions -----------------------------
def run_scenario(config: ScenarioConfig) -> int:
    """Run one scenario and write its files; return the exit status.

    0 when every check passed, 2 for configuration errors, 3 for violated
    numerical invariants or failed checks and 4 for file I/O errors.
    """
    out = Path(config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        tables, results, checks = RUNNERS[config.kind](config)
        for name, (columns, rows) in tables.items():
            write_csv(out / f"{config.kind}_{name}.csv", columns, rows)
        passed = all(check.passed for check in checks)
        status = 0 if passed else NumericalInvariantError.exit_code
        write_summary(
            out / f"{config.kind}_summary.json",
            {
                "scenario": config.kind,
                "seed": config.seed,
                "config": config.as_dict(),
                "versions": package_versions(),
                "checks": [check.summary() for check in checks],
                "results": results,
                "status": "passed" if passed else "failed",
                "exit_code": status,
            },
        )
    except OpenBathError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return 4
    except ValueError as exc:
        logger.error("invalid parameters: %s", exc)
        return ConfigError.exit_code

    for check in checks:
        if not check.passed:
            logger.warning("check %s failed: %s", check.name, check.detail)
    logger.info("%s scenario finished with status %d", config.kind, status)
    return status
