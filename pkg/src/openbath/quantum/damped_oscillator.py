#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Analytic model of a single damped bath oscillator.

The bath mode follows the quadratic Lindblad master equation with friction
coefficients (lambda, mu) and diffusion coefficients (D_qq, D_pp, D_pq).
All moment and correlation results below are closed forms of that model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import expm

if TYPE_CHECKING:
    from collections.abc import Callable

logger = logging.getLogger(__name__)

# - global parameters ------------------------------
LABEL_DQQ = "D_qq>0"
LABEL_DPP = "D_pp>0"
LABEL_DETERMINANT = "determinant bound"
LABEL_UNDERDAMPING = "underdamping"
LABEL_RELAXATION = "relaxation"

# relative slack on the determinant bound, the persistent-pure family sits on it
DETERMINANT_RTOL = 1e-12


# - local functions --------------------------------
def coth(x: float | np.ndarray) -> float | np.ndarray:
    """Return the hyperbolic cotangent."""
    return 1.0 / np.tanh(x)


# - Classes ----------------------------------------
@dataclass(frozen=True)
class Constants:
    """Action scale and Boltzmann constant, natural units by default."""

    hbar: float = 1.0
    k_b: float = 1.0

    def __post_init__(self: Constants) -> None:
        """Reject nonpositive constants."""
        if not (self.hbar > 0 and self.k_b > 0):
            raise ValueError("hbar and k_b must be strictly positive")


@dataclass(frozen=True)
class OscillatorParams:
    """Parameters of one damped bath mode.

    Structure elements
    ------------------
    - m       :  mass
    - omega   :  angular frequency
    - lam     :  friction coefficient lambda
    - mu      :  asymmetric damping coefficient
    - d_qq    :  position diffusion coefficient
    - d_pp    :  momentum diffusion coefficient
    - d_pq    :  mixed diffusion coefficient
    - constants   :  hbar and k_B
    - temperature :  set when the mode belongs to the Gibbs family
    - relaxing    :  False for fixtures that must not be used as environments
    """

    m: float
    omega: float
    lam: float
    mu: float
    d_qq: float
    d_pp: float
    d_pq: float
    constants: Constants = field(default_factory=Constants)
    temperature: float | None = None
    relaxing: bool = True

    def __post_init__(self: OscillatorParams) -> None:
        """Check the quantities every formula divides by."""
        values = (self.m, self.omega, self.lam, self.mu,
                  self.d_qq, self.d_pp, self.d_pq)
        if not np.all(np.isfinite(values)):
            raise ValueError("oscillator parameters must be finite")
        if self.m <= 0 or self.omega <= 0:
            raise ValueError("mass and frequency must be strictly positive")

    @property
    def hbar(self: OscillatorParams) -> float:
        """Return the action scale of this mode."""
        return self.constants.hbar

    @property
    def big_omega(self: OscillatorParams) -> float:
        """Return the damped frequency sqrt(omega**2 - mu**2)."""
        if self.omega <= abs(self.mu):
            raise ValueError("mode is not underdamped: omega <= |mu|")
        return float(np.sqrt(self.omega**2 - self.mu**2))


@dataclass(frozen=True)
class MomentState:
    """First and second moments of a bath mode, s_pq = <(pq + qp)/2>."""

    mean_q: float
    mean_p: float
    qq: float
    pp: float
    s_pq: float

    def uncertainty_slack(self: MomentState, hbar: float = 1.0) -> float:
        """Return qq * pp - s_pq**2 - hbar**2 / 4, nonnegative for states."""
        return self.qq * self.pp - self.s_pq**2 - hbar**2 / 4

    def first(self: MomentState) -> np.ndarray:
        """Return (mean_q, mean_p)."""
        return np.array([self.mean_q, self.mean_p])

    def second(self: MomentState) -> np.ndarray:
        """Return (qq, pp, s_pq)."""
        return np.array([self.qq, self.pp, self.s_pq])


@dataclass
class ValidationReport:
    """Labels of the violated parameter constraints, empty when valid."""

    violations: list[str] = field(default_factory=list)

    @property
    def is_valid(self: ValidationReport) -> bool:
        """Return True when no constraint is violated."""
        return not self.violations


# - parameter validation ---------------------------
def validate_params(p: OscillatorParams) -> ValidationReport:
    """Report which of the oscillator constraints are violated.

    The constraints are D_qq > 0, D_pp > 0, the determinant bound
    D_qq D_pp - D_pq**2 >= (lam hbar / 2)**2, underdamping omega > |mu| and
    relaxation lam > |mu|.  Validation never raises.
    """
    report = ValidationReport()
    if not p.d_qq > 0:
        report.violations.append(LABEL_DQQ)
    if not p.d_pp > 0:
        report.violations.append(LABEL_DPP)
    det = p.d_qq * p.d_pp - p.d_pq**2
    bound = (p.lam * p.hbar / 2) ** 2
    if det < bound - DETERMINANT_RTOL * max(abs(det), bound):
        report.violations.append(LABEL_DETERMINANT)
    if not p.omega > abs(p.mu):
        report.violations.append(LABEL_UNDERDAMPING)
    if not p.lam > abs(p.mu):
        report.violations.append(LABEL_RELAXATION)
    return report


def require_valid(p: OscillatorParams) -> None:
    """Raise ValueError when the parameters violate any constraint."""
    report = validate_params(p)
    if not report.is_valid:
        raise ValueError(
            "invalid oscillator parameters, violated: "
            + ", ".join(report.violations)
        )


# - parameter families -----------------------------
def gibbs_params(
    m: float,
    omega: float,
    lam: float,
    mu: float,
    temperature: float,
    constants: Constants | None = None,
) -> OscillatorParams:
    """Return the parameter set whose asymptotic state is the Gibbs state.

    D_pp = ((lam + mu) / 2) hbar m omega coth(hbar omega / 2 k_B T),
    D_qq = ((lam - mu) / 2) (hbar / m omega) coth(hbar omega / 2 k_B T),
    D_pq = 0.

    For mu > 0 the determinant bound requires (lam**2 - mu**2) coth**2 >=
    lam**2; below that temperature no valid Gibbs member exists and a
    ValueError is raised.
    """
    constants = constants or Constants()
    if not temperature > 0:
        raise ValueError("temperature must be strictly positive")
    if lam <= abs(mu):
        raise ValueError("Gibbs family requires lam > |mu|")

    cth = coth(constants.hbar * omega / (2 * constants.k_b * temperature))
    params = OscillatorParams(
        m=m,
        omega=omega,
        lam=lam,
        mu=mu,
        d_qq=((lam - mu) / 2) * (constants.hbar / (m * omega)) * cth,
        d_pp=((lam + mu) / 2) * constants.hbar * m * omega * cth,
        d_pq=0.0,
        constants=constants,
        temperature=temperature,
    )
    report = validate_params(params)
    if not report.is_valid:
        raise ValueError(
            f"no valid Gibbs parameters at T={temperature}"
            f" (violated: {', '.join(report.violations)})"
        )
    return params


def persistent_pure_params(
    m: float,
    omega: float,
    lam: float,
    mu: float,
    constants: Constants | None = None,
) -> OscillatorParams:
    """Return the family that saturates the determinant bound.

    The mode keeps a pure asymptotic state; it is flagged non-relaxing and
    rejected as an environment by the comparison harness.
    """
    constants = constants or Constants()
    if omega <= abs(mu):
        raise ValueError("persistent-pure family requires omega > |mu|")
    big_omega = np.sqrt(omega**2 - mu**2)
    hbar = constants.hbar
    return OscillatorParams(
        m=m,
        omega=omega,
        lam=lam,
        mu=mu,
        d_qq=hbar * lam / (2 * m * big_omega),
        d_pp=hbar * lam * m * omega**2 / (2 * big_omega),
        d_pq=-hbar * lam * mu / (2 * big_omega),
        constants=constants,
        relaxing=False,
    )


def sample_valid_params(
    rng: np.random.Generator, constants: Constants | None = None
) -> OscillatorParams:
    """Draw a random parameter set that passes validate_params.

    Mass and frequency are log-uniform within half a decade of one,
    lam/omega log-uniform in [0.01, 1], mu uniform in (-0.9, 0.9) lam, and
    the determinant slack log-uniform over four decades.
    """
    constants = constants or Constants()
    hbar = constants.hbar
    m = 10 ** rng.uniform(-0.5, 0.5)
    omega = 10 ** rng.uniform(-0.5, 0.5)
    lam = omega * 10 ** rng.uniform(-2, 0)
    mu = lam * rng.uniform(-0.9, 0.9)
    d_qq = hbar * lam / (2 * m * omega) * 10 ** rng.uniform(-1, 1)
    d_pq = hbar * lam * rng.uniform(-1, 1)
    slack = 10 ** rng.uniform(-3, 1)
    d_pp = ((lam * hbar / 2) ** 2 + d_pq**2) * (1 + slack) / d_qq
    return OscillatorParams(m, omega, lam, mu, d_qq, d_pp, d_pq, constants)


# - moment dynamics --------------------------------
def moment_matrices(p: OscillatorParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the drift of the moment equations.

    Returns
    -------
    first  :  2x2 matrix acting on (<q>, <p>)
    second :  3x3 matrix acting on (<q^2>, <p^2>, <S_pq>)
    drive  :  constant term of the second-moment equations
    """
    m, w2 = p.m, p.omega**2
    first = np.array([[-(p.lam - p.mu), 1 / m], [-m * w2, -(p.lam + p.mu)]])
    second = np.array(
        [
            [-2 * (p.lam - p.mu), 0.0, 2 / m],
            [0.0, -2 * (p.lam + p.mu), -2 * m * w2],
            [-m * w2, 1 / m, -2 * p.lam],
        ]
    )
    drive = 2 * np.array([p.d_qq, p.d_pp, p.d_pq])
    return first, second, drive


def asymptotic_moments(p: OscillatorParams) -> MomentState:
    """Return the moments of the unique asymptotic state.

    With K = 2 lam (lam**2 + omega**2 - mu**2):

    <p^2> = [m^2 w^4 D_qq + (2 lam (lam - mu) + w^2) D_pp
             - 2 m w^2 (lam - mu) D_pq] / K
    <q^2> = [m^2 (2 lam (lam + mu) + w^2) D_qq + D_pp
             + 2 m (lam + mu) D_pq] / (m^2 K)
    <S>   = [(lam - mu) D_pp - (lam + mu) m^2 w^2 D_qq
             + 2 m (lam^2 - mu^2) D_pq] / (m K)
    """
    require_valid(p)
    m, w2 = p.m, p.omega**2
    lam, mu = p.lam, p.mu
    kappa = 2 * lam * (lam**2 + w2 - mu**2)

    pp = (
        m**2 * w2**2 * p.d_qq
        + (2 * lam * (lam - mu) + w2) * p.d_pp
        - 2 * m * w2 * (lam - mu) * p.d_pq
    ) / kappa
    qq = (
        m**2 * (2 * lam * (lam + mu) + w2) * p.d_qq
        + p.d_pp
        + 2 * m * (lam + mu) * p.d_pq
    ) / (m**2 * kappa)
    s_pq = (
        (lam - mu) * p.d_pp
        - (lam + mu) * m**2 * w2 * p.d_qq
        + 2 * m * (lam**2 - mu**2) * p.d_pq
    ) / (m * kappa)
    return MomentState(0.0, 0.0, qq, pp, s_pq)


def evolve_moments(p: OscillatorParams, m0: MomentState, t: float) -> MomentState:
    """Propagate the moments over time t with the exact matrix exponential.

    The second moments obey an affine system; it is solved through the
    exponential of the drift matrix augmented by the constant drive.
    Parameters are not validated, so closed-system fixtures may be used.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    first, second, drive = moment_matrices(p)

    mean = expm(first * t) @ m0.first()
    augmented = np.zeros((4, 4))
    augmented[:3, :3] = second
    augmented[:3, 3] = drive
    var = (expm(augmented * t) @ np.append(m0.second(), 1.0))[:3]
    return MomentState(mean[0], mean[1], var[0], var[1], var[2])


# - Heisenberg picture and correlations ------------
def heisenberg_q_coefficients(
    p: OscillatorParams, t: float | np.ndarray
) -> tuple[float | np.ndarray, float | np.ndarray]:
    """Return (c_q, c_p) with q_H(t) = c_q q + c_p p."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("time must be nonnegative")
    big_omega = p.big_omega
    envelope = np.exp(-p.lam * t)
    c_q = (np.cos(big_omega * t) + (p.mu / big_omega) * np.sin(big_omega * t)) \
        * envelope
    c_p = np.sin(big_omega * t) / (p.m * big_omega) * envelope
    return c_q, c_p


def correlation_function(p: OscillatorParams) -> Callable[[float], complex]:
    """Return s -> <q(s) q> in the asymptotic state, validated once."""
    moments = asymptotic_moments(p)
    big_omega = p.big_omega
    coef = (2 * moments.s_pq - 1j * p.hbar) / (2 * p.m * big_omega)

    def corr(s: float | np.ndarray) -> complex | np.ndarray:
        envelope = np.exp(-p.lam * s)
        c_q = np.cos(big_omega * s) + (p.mu / big_omega) * np.sin(big_omega * s)
        return (moments.qq * c_q + coef * np.sin(big_omega * s)) * envelope

    return corr


def bath_correlation(p: OscillatorParams, t: float | np.ndarray) -> complex | np.ndarray:
    """Return the two-time correlation <q(t) q> against the asymptotic state.

    <q(t) q> = <q^2> (cos Wt + (mu/W) sin Wt) e^{-lam t}
               + ((2 <S> - i hbar) / (2 m W)) sin Wt e^{-lam t}
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError("time must be nonnegative")
    return correlation_function(p)(t)


def correlation_bound(p: OscillatorParams) -> float:
    """Return C such that |<q(t) q>| <= C exp(-lam t) for all t >= 0.

    C = |<q^2>| sqrt(1 + mu^2/W^2) + |2 <S> - i hbar| / (2 m W) takes the exact
    amplitude of each oscillating term.  It never exceeds the triangle
    inequality constant |<q^2>| (1 + |mu|/W) + (2 |<S>| + hbar) / (2 m W).
    """
    moments = asymptotic_moments(p)
    big_omega = p.big_omega
    return float(
        abs(moments.qq) * np.hypot(1.0, p.mu / big_omega)
        + abs(2 * moments.s_pq - 1j * p.hbar) / (2 * p.m * big_omega)
    )
