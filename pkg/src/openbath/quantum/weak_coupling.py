#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Master equations derived for a system weakly coupled to damped oscillators.

Two generators are provided: the double-commutator Markov equation, which
only dephases, and the rotating-wave (secular) generator in Lindblad form
whose rates and Lamb shift come from the spectral pair of each bath mode.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, eigvals

from openbath.errors import NumericalInvariantError

from .damped_oscillator import OscillatorParams, asymptotic_moments, require_valid
from .lindblad_core import (
    JumpTerm,
    Superoperator,
    hermitize,
    lindblad_generator,
    require_hermitian,
)
from .spectral_functions import spectral_transform

logger = logging.getLogger(__name__)

# - global parameters ------------------------------
DEGENERACY_RTOL = 1e-9
NEGATIVE_RATE_TOL = 1e-12


# - Classes ----------------------------------------
@dataclass(frozen=True)
class CouplingTerm:
    """System operator V_n coupled to the position of bath mode n."""

    v: np.ndarray
    bath_mode: OscillatorParams

    def __post_init__(self: CouplingTerm) -> None:
        """Reject non-hermitian coupling operators."""
        require_hermitian(np.asarray(self.v), "coupling operator")


@dataclass(frozen=True)
class FrequencySector:
    """Part of a coupling operator that changes the energy by hbar delta_omega."""

    delta_omega: float
    v_sector: np.ndarray


@dataclass(frozen=True)
class MasterEquationSpec:
    """Effective hamiltonian and jump terms of a derived master equation.

    Structure elements
    ------------------
    - h_eff      :  system hamiltonian plus Lamb shift
    - jumps      :  jump operators with nonnegative rates
    - lamb_shift :  the Lamb-shift hamiltonian on its own
    - hbar       :  action scale the generator is built with
    """

    h_eff: np.ndarray
    jumps: tuple[JumpTerm, ...]
    lamb_shift: np.ndarray
    hbar: float = 1.0

    def generator(self: MasterEquationSpec) -> Superoperator:
        """Return the Lindblad generator."""
        return lindblad_generator(self.h_eff, self.jumps, self.hbar)


# - frequency decomposition ------------------------
def _cluster_labels(values: np.ndarray, tol: float) -> np.ndarray:
    """Label sorted values, starting a new cluster at every gap above tol."""
    order = np.argsort(values, kind="stable")
    labels = np.empty(values.size, dtype=int)
    label, previous = 0, values[order[0]]
    for idx in order:
        if values[idx] - previous > tol:
            label += 1
        previous = values[idx]
        labels[idx] = label
    return labels


def frequency_sectors(
    h_s: np.ndarray,
    v: np.ndarray,
    degeneracy_tol: float | None = None,
    hbar: float = 1.0,
) -> list[FrequencySector]:
    """Split a coupling operator by the Bohr frequencies it connects.

    The sector at delta_omega collects the matrix elements <mu|V|nu> with
    (e_mu - e_nu)/hbar within degeneracy_tol of delta_omega, so that in the
    Heisenberg picture of the system hamiltonian it evolves as
    exp(+i delta_omega s) V_dw, i.e. [H_S, V_dw] = hbar delta_omega V_dw. Bohr
    frequencies are clustered by magnitude and split by sign, which keeps
    the sector at -delta_omega the adjoint of the one at +delta_omega.
    Sectors without matrix elements are omitted.

    Parameters
    ----------
    h_s  :  hermitian system hamiltonian
    v    :  system operator
    degeneracy_tol :  clustering tolerance, default 1e-9 max|e| / hbar
    """
    h_s = np.asarray(h_s, dtype=complex)
    v = np.asarray(v, dtype=complex)
    require_hermitian(h_s, "system hamiltonian")
    energy, basis = eigh(h_s)
    v_eig = basis.conj().T @ v @ basis
    bohr = (energy[:, None] - energy[None, :]) / hbar
    if degeneracy_tol is None:
        degeneracy_tol = DEGENERACY_RTOL * np.max(np.abs(energy)) / hbar

    magnitude = np.abs(bohr).ravel()
    labels = _cluster_labels(magnitude, degeneracy_tol).reshape(bohr.shape)
    zero_label = labels.flat[0]
    scale = max(np.linalg.norm(v), np.finfo(float).tiny)

    sectors = []
    for label in np.unique(labels):
        members = labels == label
        freq = float(np.mean(np.abs(bohr[members])))
        if label == zero_label:
            masks = [(0.0, members)]
        else:
            masks = [(freq, members & (bohr > 0)), (-freq, members & (bohr < 0))]
        for delta, mask in masks:
            block = np.where(mask, v_eig, 0.0)
            if np.linalg.norm(block) <= 1e-14 * scale:
                continue
            sectors.append(FrequencySector(delta, basis @ block @ basis.conj().T))
    sectors.sort(key=lambda sector: sector.delta_omega)
    logger.debug("coupling operator splits into %d frequency sectors", len(sectors))
    return sectors


# - derived generators -----------------------------
def _common_hbar(couplings: list[CouplingTerm], hbar: float | None) -> float:
    values = {term.bath_mode.hbar for term in couplings}
    if hbar is not None:
        values.add(hbar)
    if len(values) > 1:
        raise ValueError("couplings use different values of hbar")
    return values.pop() if values else 1.0


def simple_markov_generator(
    h_s: np.ndarray, couplings: list[CouplingTerm], hbar: float | None = None
) -> Superoperator:
    """Return L_S X - (1/hbar^2) sum_n <q_n^2> [V_n, [V_n, X]].

    The double commutator is a Lindblad term with jump V_n at rate
    2 <q_n^2> / hbar^2; it dephases in the eigenbasis of V_n but does not
    dissipate energy.
    """
    hbar = _common_hbar(couplings, hbar)
    jumps = []
    for term in couplings:
        require_valid(term.bath_mode)
        qq = asymptotic_moments(term.bath_mode).qq
        jumps.append(JumpTerm(np.asarray(term.v, dtype=complex), 2 * qq / hbar**2))
    return lindblad_generator(h_s, jumps, hbar)


def rwa_master_equation(
    h_s: np.ndarray,
    couplings: list[CouplingTerm],
    degeneracy_tol: float | None = None,
    hbar: float | None = None,
) -> tuple[MasterEquationSpec, Superoperator]:
    """Return the rotating-wave master equation and its generator.

    For every coupling n and sector V_dw the spectral pair (h, S) of bath
    mode n is evaluated at the sector frequency dw.  The sector contributes
    the jump V_dw with rate 2 h(dw) / hbar^2 and the Lamb shift
    (S(dw) / hbar) V_dw^dagger V_dw.  Sectors come in adjoint pairs, so the
    same terms read jump V_{-dw}^dagger with the pair at the index of the
    sector being conjugated.  A thermal bath then gives
    h(dw) / h(-dw) close to exp(-hbar dw / k_B T) and the generator relaxes
    towards the Gibbs state.
    """
    h_s = np.asarray(h_s, dtype=complex)
    hbar = _common_hbar(couplings, hbar)
    lamb = np.zeros_like(h_s)
    jumps = []
    for nr, term in enumerate(couplings):
        require_valid(term.bath_mode)
        sectors = frequency_sectors(h_s, term.v, degeneracy_tol, hbar)
        if not sectors:
            continue
        values = spectral_transform(
            term.bath_mode, np.array([sector.delta_omega for sector in sectors])
        )
        for sector, value in zip(sectors, values, strict=True):
            rate_kernel = float(value.real)
            if rate_kernel < -NEGATIVE_RATE_TOL:
                raise NumericalInvariantError(
                    f"negative dissipator kernel h={rate_kernel:.3e} for coupling"
                    f" {nr} at delta_omega={sector.delta_omega:.6g}"
                )
            rate = 2 * max(rate_kernel, 0.0) / hbar**2
            jumps.append(JumpTerm(sector.v_sector, rate))
            lamb += (value.imag / hbar) * (sector.v_sector.conj().T @ sector.v_sector)

    lamb = hermitize(lamb)
    spec = MasterEquationSpec(
        h_eff=hermitize(h_s) + lamb, jumps=tuple(jumps), lamb_shift=lamb, hbar=hbar
    )
    logger.debug("rotating-wave generator with %d jump terms", len(jumps))
    return spec, spec.generator()


def spectral_gap(superop: Superoperator, rtol: float = 1e-9) -> float:
    """Return the smallest nonzero relaxation rate -Re(eigenvalue) of a generator."""
    eigenvalues = eigvals(superop.dense())
    rates = -eigenvalues.real
    scale = max(np.max(np.abs(eigenvalues)), np.finfo(float).tiny)
    positive = rates[rates > rtol * scale]
    if positive.size == 0:
        raise ValueError("generator has no relaxing eigenmode")
    return float(positive.min())
