#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Harmonic system linearly coupled to damped bath oscillators.

U_I = sum_n C_n Q kron q_n; the rotating-wave generator of this model has
the damped-oscillator form with mu = 0 and the effective coefficients below.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .damped_oscillator import (
    Constants,
    OscillatorParams,
    coth,
    gibbs_params,
    require_valid,
)
from .lindblad_core import (
    Superoperator,
    commutator_superoperator,
    fock_operators,
    sns_dissipator,
)
from .spectral_functions import denominator, spectral_transform
from .weak_coupling import CouplingTerm, FrequencySector

logger = logging.getLogger(__name__)


# - Classes ----------------------------------------
@dataclass(frozen=True)
class BathCoupling:
    """Coupling constant C_n and the bath mode it couples to."""

    c: float
    mode: OscillatorParams


@dataclass(frozen=True)
class LinearModelSpec:
    """Harmonic system of mass m_s and frequency omega_s with its bath."""

    m_s: float
    omega_s: float
    bath: tuple[BathCoupling, ...]
    constants: Constants = field(default_factory=Constants)

    def __post_init__(self: LinearModelSpec) -> None:
        """Check the system parameters and store the bath as a tuple."""
        if not (self.m_s > 0 and self.omega_s > 0):
            raise ValueError("system mass and frequency must be strictly positive")
        object.__setattr__(self, "bath", tuple(self.bath))

    @property
    def x0_squared(self: LinearModelSpec) -> float:
        """Return hbar / (2 m_s omega_s), the ground-state position variance."""
        return self.constants.hbar / (2 * self.m_s * self.omega_s)

    def validate(self: LinearModelSpec) -> None:
        """Raise ValueError when a bath mode is invalid or uses another hbar."""
        for entry in self.bath:
            require_valid(entry.mode)
            if entry.mode.hbar != self.constants.hbar:
                raise ValueError("bath mode and system use different hbar")


@dataclass(frozen=True)
class EffectiveCoefficients:
    """Coefficients of the effective system generator (mu = 0, D_pq = 0)."""

    delta_omega_s: float
    delta_e: float
    lambda_eff: float
    d_pp_eff: float
    d_qq_eff: float

    def as_dict(self: EffectiveCoefficients) -> dict[str, float]:
        """Return the coefficients by name."""
        return asdict(self)


@dataclass(frozen=True)
class ThermalCoefficients:
    """Thermal closed forms, their resonance approximation and deviation."""

    full: EffectiveCoefficients
    resonance: EffectiveCoefficients
    relative_deviation: dict[str, float]


# - system operators -------------------------------
def system_hamiltonian(spec: LinearModelSpec, dim: int) -> np.ndarray:
    """Return hbar omega_s (N + 1/2) on dim levels."""
    ops = fock_operators(dim, spec.m_s, spec.omega_s, spec.constants)
    return spec.constants.hbar * spec.omega_s * (ops.number + 0.5 * np.eye(dim))


def system_position(spec: LinearModelSpec, dim: int) -> np.ndarray:
    """Return Q = sqrt(hbar / 2 m_s omega_s)(a + a^dagger)."""
    return fock_operators(dim, spec.m_s, spec.omega_s, spec.constants).q


def coupling_terms(spec: LinearModelSpec, dim: int) -> list[CouplingTerm]:
    """Return the coupling terms C_n Q for the generic construction."""
    pos = system_position(spec, dim)
    return [CouplingTerm(entry.c * pos, entry.mode) for entry in spec.bath]


def linear_model_sectors(
    spec: LinearModelSpec, dim: int
) -> list[tuple[FrequencySector, FrequencySector]]:
    """Return the (-omega_s, +omega_s) sectors C_n x0 a and C_n x0 a^dagger per mode."""
    ops = fock_operators(dim, spec.m_s, spec.omega_s, spec.constants)
    x0 = np.sqrt(spec.x0_squared)
    return [
        (
            FrequencySector(-spec.omega_s, entry.c * x0 * ops.a),
            FrequencySector(spec.omega_s, entry.c * x0 * ops.a_dagger),
        )
        for entry in spec.bath
    ]


# - effective coefficients -------------------------
def effective_coefficients(spec: LinearModelSpec) -> EffectiveCoefficients:
    """Return the effective coefficients from the spectral pairs at +-omega_s.

    lambda = sum C^2 (h(-w_s) - h(w_s)) / (2 hbar m_s w_s)
    D_pp   = sum C^2 (h(w_s) + h(-w_s)) / 4,  D_qq = D_pp / (m_s w_s)^2
    dw_s   = sum C^2 (S(w_s) + S(-w_s)) / (2 m_s w_s hbar)
    dE     = sum C^2 (S(w_s) - S(-w_s)) / (4 m_s w_s)

    The Lamb shift then reads hbar dw_s (N + 1/2) + dE below the truncation
    edge.
    """
    spec.validate()
    hbar, m_s, w_s = spec.constants.hbar, spec.m_s, spec.omega_s
    freq = np.array([w_s, -w_s])
    shift = energy = lam = d_pp = 0.0
    for entry in spec.bath:
        if entry.c == 0:
            continue
        plus, minus = spectral_transform(entry.mode, freq)
        c2 = entry.c**2
        lam += c2 * (minus.real - plus.real) / (2 * hbar * m_s * w_s)
        d_pp += c2 * (plus.real + minus.real) / 4
        shift += c2 * (plus.imag + minus.imag) / (2 * m_s * w_s * hbar)
        energy += c2 * (plus.imag - minus.imag) / (4 * m_s * w_s)
    if lam <= 0 and any(entry.c for entry in spec.bath):
        logger.warning("effective damping lambda_eff=%.3e is not positive", lam)
    return EffectiveCoefficients(shift, energy, lam, d_pp, d_pp / (m_s * w_s) ** 2)


def effective_params(
    spec: LinearModelSpec, coefficients: EffectiveCoefficients | None = None
) -> OscillatorParams:
    """Return the coefficients as unchecked damped-oscillator parameters of the system."""
    coef = coefficients or effective_coefficients(spec)
    return OscillatorParams(
        m=spec.m_s,
        omega=spec.omega_s,
        lam=coef.lambda_eff,
        mu=0.0,
        d_qq=coef.d_qq_eff,
        d_pp=coef.d_pp_eff,
        d_pq=0.0,
        constants=spec.constants,
    )


def effective_generator(spec: LinearModelSpec, dim: int) -> Superoperator:
    """Return the generator with H_S + hbar dw_s N and the mu = 0 dissipator.

    The scalar dE is left out of the hamiltonian, it does not act on states.
    """
    coef = effective_coefficients(spec)
    ops = fock_operators(dim, spec.m_s, spec.omega_s, spec.constants)
    hbar = spec.constants.hbar
    ham = system_hamiltonian(spec, dim) + hbar * coef.delta_omega_s * ops.number
    return commutator_superoperator(ham, hbar) + sns_dissipator(
        effective_params(spec, coef), dim, check=False
    )


# - thermal bath -----------------------------------
def _relative(res: float, full: float) -> float:
    return abs(res - full) / max(abs(full), np.finfo(float).tiny)


def thermal_weak_damping_coefficients(
    spec: LinearModelSpec, resonance_width: float | None = None
) -> ThermalCoefficients:
    """Return the effective coefficients for a bath of Gibbs modes.

    Full forms, with den = [lam^2 + (W + w_s)^2][lam^2 + (W - w_s)^2]:

    lambda = sum C^2 lam / (m m_s den)
    D_pp   = sum C^2 hbar coth [(lam + mu)(lam^2 + W^2) + (lam - mu) w_s^2]
             / (4 m w den)
    dw_s   = -sum C^2 (lam^2 + W^2 - w_s^2) / (2 m m_s w_s den)

    Resonance forms keep only modes with |w_n - w_s| <= resonance_width lam_n
    (all modes when resonance_width is None) and approximate W = w_n = w_s:

    lambda ~ sum C^2 / (4 m m_s w_s^2 lam),  D_pp ~ (hbar m_s w_s / 2) coth lambda
    dw_s   ~ -sum C^2 / (8 m m_s w_s^3)
    """
    spec.validate()
    temps = [entry.mode.temperature for entry in spec.bath]
    if not temps or any(temp is None for temp in temps):
        raise ValueError("thermal coefficients require bath modes from gibbs_params")
    if not np.allclose(temps, temps[0], rtol=1e-12, atol=0):
        raise ValueError("bath modes are thermalized at different temperatures")
    temperature = temps[0]
    hbar, k_b = spec.constants.hbar, spec.constants.k_b
    m_s, w_s = spec.m_s, spec.omega_s

    full = dict.fromkeys(("lam", "d_pp", "shift", "energy"), 0.0)
    res = dict.fromkeys(("lam", "shift", "energy"), 0.0)
    for entry in spec.bath:
        mode, c2 = entry.mode, entry.c**2
        lam, mu, w_n = mode.lam, mode.mu, mode.omega
        big2 = mode.big_omega**2
        cth = coth(hbar * w_n / (2 * k_b * temperature))
        amp = hbar * cth / (2 * mode.m * w_n)
        den = float(denominator(mode, w_s))

        full["lam"] += c2 * lam / (mode.m * m_s * den)
        full["d_pp"] += c2 * hbar * cth * (
            (lam + mu) * (lam**2 + big2) + (lam - mu) * w_s**2
        ) / (4 * mode.m * w_n * den)
        full["shift"] += -c2 * (lam**2 + big2 - w_s**2) / (2 * mode.m * m_s * w_s * den)
        full["energy"] += c2 * amp * (big2 - lam**2 - 2 * lam * mu - w_s**2) \
            / (2 * m_s * den)

        if resonance_width is not None and abs(w_n - w_s) > resonance_width * lam:
            continue
        res["lam"] += c2 / (4 * mode.m * m_s * w_s**2 * lam)
        res["shift"] += -c2 / (8 * mode.m * m_s * w_s**3)
        res["energy"] += -c2 * amp * (lam + 2 * mu) / (8 * m_s * lam * w_s**2)

    cth_s = coth(hbar * w_s / (2 * k_b * temperature))
    full_coef = EffectiveCoefficients(
        full["shift"], full["energy"], full["lam"],
        full["d_pp"], full["d_pp"] / (m_s * w_s) ** 2,
    )
    res_d_pp = (hbar * m_s * w_s / 2) * cth_s * res["lam"]
    res_coef = EffectiveCoefficients(
        res["shift"], res["energy"], res["lam"], res_d_pp, res_d_pp / (m_s * w_s) ** 2
    )
    deviation = {
        key: _relative(getattr(res_coef, key), getattr(full_coef, key))
        for key in ("delta_omega_s", "delta_e", "lambda_eff", "d_pp_eff", "d_qq_eff")
    }
    return ThermalCoefficients(full_coef, res_coef, deviation)


# - bath construction ------------------------------
def bose_einstein(omega: float, temperature: float, constants: Constants | None = None) -> float:
    """Return 1 / (exp(hbar omega / k_B T) - 1)."""
    constants = constants or Constants()
    return float(1.0 / np.expm1(constants.hbar * omega / (constants.k_b * temperature)))


def discretized_bath(
    omega_s: float,
    coupling: float,
    temperature: float,
    n_modes: int = 16,
    span: tuple[float, float] = (0.2, 2.0),
    m: float = 1.0,
    damping: float = 0.01,
    constants: Constants | None = None,
) -> tuple[BathCoupling, ...]:
    """Return Gibbs modes with frequencies uniform over span * omega_s.

    Every mode gets the coupling constant `coupling`, mu = 0 and
    lam_n = damping * omega_n.
    """
    if n_modes < 1:
        raise ValueError("at least one bath mode is required")
    freqs = np.linspace(span[0], span[1], n_modes) * omega_s
    return tuple(
        BathCoupling(
            coupling,
            gibbs_params(m, float(w_n), damping * float(w_n), 0.0, temperature, constants),
        )
        for w_n in freqs
    )
