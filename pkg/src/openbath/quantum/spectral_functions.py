#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Half-line Fourier transform of the bath correlation function.

h(dw) + i S(dw) = int_0^inf exp(-i dw s) <q(s) q> ds

The closed forms follow from the exponentially damped correlation function;
the quadrature routines integrate the definition directly and serve as the
oracle for the closed forms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from .damped_oscillator import (
    OscillatorParams,
    asymptotic_moments,
    correlation_bound,
    correlation_function,
    require_valid,
)

logger = logging.getLogger(__name__)

# - global parameters ------------------------------
QUAD_HORIZON = 40.0  # integration range in units of 1/lam
MAX_REL_TOL = 1e-4


# - Classes ----------------------------------------
@dataclass(frozen=True)
class SpectralPair:
    """Dissipator kernel h and Lamb-shift kernel S at one Bohr frequency.

    Quadrature results also carry the estimated integration error and the
    analytic bound on the truncated exponential tail.
    """

    h: float
    s: float
    delta_omega: float
    abs_error: float | None = None
    tail_bound: float | None = None


def spectral_table_dtype() -> np.dtype:
    """Return definition for a table of closed-form and quadrature results.

    Structure elements
    ------------------
    - delta_omega :  Bohr frequency
    - h_closed    :  closed-form dissipator kernel
    - S_closed    :  closed-form Lamb-shift kernel
    - h_quad      :  dissipator kernel by quadrature
    - S_quad      :  Lamb-shift kernel by quadrature
    - rel_err     :  |F_closed - F_quad| / |F_closed| with F = h + iS
    """
    return np.dtype(
        [
            ("delta_omega", "f8"),
            ("h_closed", "f8"),
            ("S_closed", "f8"),
            ("h_quad", "f8"),
            ("S_quad", "f8"),
            ("rel_err", "f8"),
        ]
    )


# - closed forms -----------------------------------
def denominator(p: OscillatorParams, delta_omega: float | np.ndarray) -> np.ndarray:
    """Return [lam^2 + (W + dw)^2][lam^2 + (W - dw)^2], strictly positive."""
    big_omega = p.big_omega
    return (p.lam**2 + (big_omega + delta_omega) ** 2) * (
        p.lam**2 + (big_omega - delta_omega) ** 2
    )


def h_numerator_coefficients(p: OscillatorParams) -> tuple[float, float, float]:
    """Return (a, b, c) with h = (a dw^2 + b dw + c) / denominator.

    a = D_qq, b = -lam hbar / m,
    c = [m^2 (lam + mu)^2 D_qq + D_pp + 2 m (lam + mu) D_pq] / m^2
    """
    m, lpm = p.m, p.lam + p.mu
    a = p.d_qq
    b = -p.lam * p.hbar / m
    c = (m**2 * lpm**2 * p.d_qq + p.d_pp + 2 * m * lpm * p.d_pq) / m**2
    return a, b, c


def positivity_decomposition(p: OscillatorParams) -> tuple[float, float]:
    """Return (square, slack) with 4ac - b^2 = 4 (square + slack) / m^2.

    square = (m (lam + mu) D_qq + D_pq)^2 and slack is the margin of the
    determinant bound, so a valid mode has a nonnegative discriminant and,
    with a = D_qq > 0, a nonnegative h at every frequency.
    """
    square = (p.m * (p.lam + p.mu) * p.d_qq + p.d_pq) ** 2
    slack = p.d_qq * p.d_pp - p.d_pq**2 - (p.lam * p.hbar / 2) ** 2
    return square, slack


def positivity_discriminant(p: OscillatorParams) -> float:
    """Return 4ac - b^2 of the quadratic numerator of h."""
    a, b, c = h_numerator_coefficients(p)
    return 4 * a * c - b**2


def lamb_shift_coefficients(p: OscillatorParams) -> tuple[float, float, float, float]:
    """Return (C0, C1, C2, C3) with S = (C0 + C1 dw + C2 dw^2 + C3 dw^3) / den."""
    require_valid(p)
    moments = asymptotic_moments(p)
    big_omega = p.big_omega
    amp = moments.qq
    x_re = amp * (p.lam + p.mu) + moments.s_pq / p.m
    rate2 = p.lam**2 + big_omega**2
    half = p.hbar / (2 * p.m)
    return (-half * rate2, amp * rate2 - 2 * p.lam * x_re, half, -amp)


def spectral_transform(
    p: OscillatorParams, delta_omega: float | np.ndarray
) -> np.ndarray:
    """Return h + iS in closed form for one or more Bohr frequencies.

    With z = lam + i dw, A = <q^2>, B = (2 <S> - i hbar) / (2 m W):
    h + iS = [A (z + mu) + B W] / (z^2 + W^2).
    The real part is evaluated from the explicit quadratic numerator so that
    its sign is exact up to rounding.
    """
    require_valid(p)
    moments = asymptotic_moments(p)
    deltas = np.asarray(delta_omega, dtype=float)
    big_omega = p.big_omega

    z = p.lam + 1j * deltas
    amp_b = (2 * moments.s_pq - 1j * p.hbar) / (2 * p.m * big_omega)
    value = (moments.qq * (z + p.mu) + amp_b * big_omega) / (z**2 + big_omega**2)

    a, b, c = h_numerator_coefficients(p)
    h_val = (a * deltas**2 + b * deltas + c) / denominator(p, deltas)
    return h_val + 1j * value.imag


def spectral_pair_closed(p: OscillatorParams, delta_omega: float) -> SpectralPair:
    """Return the closed-form spectral pair at one Bohr frequency."""
    value = complex(spectral_transform(p, float(delta_omega)))
    return SpectralPair(value.real, value.imag, float(delta_omega))


# - quadrature oracle ------------------------------
def quadrature_transform(
    p: OscillatorParams,
    delta_omega: float | np.ndarray,
    rel_tol: float = 1e-8,
    horizon: float = QUAD_HORIZON,
) -> tuple[np.ndarray, float, float]:
    """Integrate exp(-i dw s) <q(s) q> over [0, horizon / lam].

    All frequencies are integrated in one vectorized adaptive pass.

    Returns
    -------
    values     :  complex transform per frequency
    abs_error  :  error estimate of the adaptive quadrature
    tail_bound :  C exp(-horizon) / lam, bound on the discarded tail
    """
    if not 0 < rel_tol <= MAX_REL_TOL:
        raise ValueError(f"rel_tol must lie in (0, {MAX_REL_TOL}]")
    corr = correlation_function(p)
    deltas = np.atleast_1d(np.asarray(delta_omega, dtype=float))
    t_max = horizon / p.lam

    def integrand(s: float) -> np.ndarray:
        val = np.exp(-1j * deltas * s) * corr(s)
        return np.concatenate((val.real, val.imag))

    # one breakpoint per period of the fastest oscillation
    period = 2 * np.pi / (p.big_omega + np.max(np.abs(deltas)))
    points = np.arange(period, t_max, period)
    res, err = quad_vec(
        integrand,
        0.0,
        t_max,
        epsrel=1e-2 * rel_tol,
        norm="max",
        points=points,
        limit=max(10000, 4 * (points.size + 1)),
    )
    tail = correlation_bound(p) * np.exp(-horizon) / p.lam
    logger.debug(
        "quadrature over [0, %.4g] with %d breakpoints: err=%.3g tail=%.3g",
        t_max, points.size, err, tail,
    )
    half = deltas.size
    return res[:half] + 1j * res[half:], float(err), float(tail)


def spectral_pair_quadrature(
    p: OscillatorParams,
    delta_omega: float,
    rel_tol: float = 1e-8,
    horizon: float = QUAD_HORIZON,
) -> SpectralPair:
    """Return the spectral pair at one Bohr frequency by quadrature."""
    require_valid(p)
    values, err, tail = quadrature_transform(p, delta_omega, rel_tol, horizon)
    return SpectralPair(
        float(values[0].real), float(values[0].imag), float(delta_omega), err, tail
    )


def spectral_table(
    p: OscillatorParams, deltas: np.ndarray, rel_tol: float = 1e-8
) -> np.ndarray:
    """Return closed forms next to quadrature results for a frequency grid."""
    require_valid(p)
    deltas = np.asarray(deltas, dtype=float)
    closed = spectral_transform(p, deltas)
    quad, _, _ = quadrature_transform(p, deltas, rel_tol)

    table = np.zeros(deltas.size, dtype=spectral_table_dtype())
    table["delta_omega"] = deltas
    table["h_closed"] = closed.real
    table["S_closed"] = closed.imag
    table["h_quad"] = quad.real
    table["S_quad"] = quad.imag
    table["rel_err"] = np.abs(closed - quad) / np.abs(closed)
    return table
