#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Finite-dimensional superoperator engine.

Operators are dense complex numpy arrays, superoperators are sparse matrices
acting on column-stacked operators: vec(A X B) = (B^T kron A) vec(X).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import isqrt

import numpy as np
from scipy import sparse
from scipy.linalg import eigh, eigvalsh, expm, svd
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from openbath.errors import (
    NonUniqueStationaryStateError,
    NumericalInvariantError,
    PositivityError,
)

from .damped_oscillator import (
    Constants,
    MomentState,
    OscillatorParams,
    require_valid,
)

logger = logging.getLogger(__name__)

# - global parameters ------------------------------
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
# propagated states are re-validated with a looser trace/hermiticity check
PROPAGATED_TOL = 1e-10
NULLSPACE_TOL = 1e-10


# - Classes ----------------------------------------
@dataclass(frozen=True)
class FockOperators:
    """Truncated single-mode operators, H0 = p^2/2m + m w^2 q^2/2."""

    q: np.ndarray
    p: np.ndarray
    a: np.ndarray
    a_dagger: np.ndarray
    number: np.ndarray
    h0: np.ndarray


@dataclass(frozen=True)
class JumpTerm:
    """Jump operator with its nonnegative rate."""

    operator: np.ndarray
    rate: float

    def __post_init__(self: JumpTerm) -> None:
        """Reject negative rates."""
        if not self.rate >= 0:
            raise ValueError(f"jump rate must be nonnegative, got {self.rate}")


@dataclass(frozen=True)
class Superoperator:
    """Linear map on d x d operators in the column-stacking convention.

    Structure elements
    ------------------
    - matrix :  d^2 x d^2 sparse or dense matrix
    - dim    :  dimension d of the operators it acts on
    - kind   :  'generator' or 'propagator'
    """

    matrix: sparse.spmatrix | np.ndarray
    dim: int
    kind: str = "generator"

    def __post_init__(self: Superoperator) -> None:
        """Check shape and kind."""
        if self.matrix.shape != (self.dim**2, self.dim**2):
            raise ValueError("superoperator shape does not match its dimension")
        if self.kind not in ("generator", "propagator"):
            raise ValueError(f"unknown superoperator kind {self.kind!r}")

    def dense(self: Superoperator) -> np.ndarray:
        """Return the matrix as a dense array."""
        if sparse.issparse(self.matrix):
            return self.matrix.toarray()
        return np.asarray(self.matrix)

    def __add__(self: Superoperator, other: Superoperator) -> Superoperator:
        """Return the sum of two generators."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Superoperator(self.matrix + other.matrix, self.dim)

    def __sub__(self: Superoperator, other: Superoperator) -> Superoperator:
        """Return the difference of two generators."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Superoperator(self.matrix - other.matrix, self.dim)


@dataclass(frozen=True)
class CPTPReport:
    """Outcome of the Choi-matrix certification of a propagator."""

    is_tp: bool
    is_cp: bool
    min_choi_eigenvalue: float


# - vectorization ----------------------------------
def vec(x: np.ndarray) -> np.ndarray:
    """Return the column-stacked vector of an operator."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Return the operator of a column-stacked vector."""
    v = np.asarray(v)
    dim = dim or isqrt(v.size)
    return v.reshape((dim, dim), order="F")


def _eye(dim: int) -> sparse.csr_matrix:
    return sparse.identity(dim, dtype=complex, format="csr")


def _left(a: np.ndarray) -> sparse.csr_matrix:
    """vec(A X) = (I kron A) vec(X)."""
    return sparse.kron(_eye(a.shape[0]), sparse.csr_matrix(a), format="csr")


def _right(b: np.ndarray) -> sparse.csr_matrix:
    """vec(X B) = (B^T kron I) vec(X)."""
    return sparse.kron(sparse.csr_matrix(b.T), _eye(b.shape[0]), format="csr")


def _sandwich(a: np.ndarray, b: np.ndarray) -> sparse.csr_matrix:
    """vec(A X B) = (B^T kron A) vec(X)."""
    return sparse.kron(sparse.csr_matrix(b.T), sparse.csr_matrix(a), format="csr")


def _double_commutator(a: np.ndarray, b: np.ndarray) -> sparse.csr_matrix:
    """[A, [B, X]]."""
    return _left(a @ b) - _sandwich(a, b) - _sandwich(b, a) + _right(b @ a)


def _commutator_anticommutator(a: np.ndarray, b: np.ndarray) -> sparse.csr_matrix:
    """[A, {B, X}]."""
    return _left(a @ b) + _sandwich(a, b) - _sandwich(b, a) - _right(b @ a)


def apply_superoperator(superop: Superoperator, x: np.ndarray) -> np.ndarray:
    """Return the operator superop[x]."""
    return unvec(superop.matrix @ vec(x), superop.dim)


# - operator checks --------------------------------
def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    """Return True when A equals its adjoint within tol (relative to |A|)."""
    a = np.asarray(a)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0)
                <= tol * max(1.0, np.max(np.abs(a), initial=0.0)))


def require_hermitian(a: np.ndarray, name: str = "operator") -> None:
    """Raise ValueError for a non-hermitian operator."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if not is_hermitian(a):
        raise ValueError(f"{name} must be hermitian")


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return the hermitian part of A."""
    return (a + a.conj().T) / 2


def as_density_matrix(
    rho: np.ndarray,
    hermitian_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    positivity_tol: float = POSITIVITY_TOL,
) -> np.ndarray:
    """Validate rho as a density matrix and return its hermitian part.

    Raises PositivityError when the smallest eigenvalue lies below
    -positivity_tol and NumericalInvariantError for hermiticity or trace
    violations.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if not np.all(np.isfinite(rho)):
        raise NumericalInvariantError("density matrix has non-finite entries")
    if not is_hermitian(rho, hermitian_tol):
        raise NumericalInvariantError("density matrix is not hermitian")
    rho = hermitize(rho)
    trace = np.trace(rho).real
    if abs(trace - 1) > trace_tol:
        raise NumericalInvariantError(f"density matrix trace {trace!r} != 1")
    min_eig = eigvalsh(rho)[0]
    if min_eig < -positivity_tol:
        raise PositivityError(
            f"density matrix eigenvalue {min_eig:.3e} below -{positivity_tol:g}"
        )
    return rho


def _revalidate(rho: np.ndarray) -> np.ndarray:
    return as_density_matrix(rho, PROPAGATED_TOL, PROPAGATED_TOL)


# - states -----------------------------------------
def fock_state(dim: int, n: int) -> np.ndarray:
    """Return the number state |n><n| in a truncation of dimension dim."""
    if not 0 <= n < dim:
        raise ValueError("occupation outside the truncated space")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def coherent_state(dim: int, alpha: complex) -> np.ndarray:
    """Return the truncated and renormalized coherent state |alpha><alpha|."""
    n = np.arange(dim)
    log_amp = -abs(alpha) ** 2 / 2 - 0.5 * gammaln(n + 1)
    psi = np.exp(log_amp) * np.power(complex(alpha), n)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def gibbs_state(h: np.ndarray, temperature: float, k_b: float = 1.0) -> np.ndarray:
    """Return exp(-H / k_B T) / Z."""
    if not temperature > 0:
        raise ValueError("temperature must be strictly positive")
    energy, vectors = eigh(h)
    weight = np.exp(-(energy - energy[0]) / (k_b * temperature))
    weight /= weight.sum()
    return (vectors * weight) @ vectors.conj().T


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    """Return Tr[rho O]."""
    return complex(np.einsum("ij,ji->", rho, op))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Return half the trace norm of rho - sigma."""
    return float(0.5 * np.sum(np.abs(eigvalsh(hermitize(rho - sigma)))))


def state_moments(rho: np.ndarray, ops: FockOperators) -> MomentState:
    """Return the first and second moments of a single-mode state."""
    q, p = ops.q, ops.p
    return MomentState(
        mean_q=expectation(rho, q).real,
        mean_p=expectation(rho, p).real,
        qq=expectation(rho, q @ q).real,
        pp=expectation(rho, p @ p).real,
        s_pq=expectation(rho, (p @ q + q @ p) / 2).real,
    )


# - generators -------------------------------------
def fock_operators(
    dim: int, m: float, omega: float, constants: Constants | None = None
) -> FockOperators:
    """Return truncated q, p, a, a^dagger, number operator and H0.

    H0 is assembled from products of the truncated q and p, so its last
    diagonal element is (d - 1) hbar omega / 2 instead of (d - 1/2) hbar omega.
    """
    if dim < 2:
        raise ValueError("Fock truncation requires d >= 2")
    hbar = (constants or Constants()).hbar
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)
    a_dag = a.conj().T
    q = np.sqrt(hbar / (2 * m * omega)) * (a + a_dag)
    p = 1j * np.sqrt(hbar * m * omega / 2) * (a_dag - a)
    h0 = p @ p / (2 * m) + m * omega**2 * (q @ q) / 2
    return FockOperators(
        q=q,
        p=p,
        a=a,
        a_dagger=a_dag,
        number=np.diag(np.arange(dim)).astype(complex),
        h0=h0,
    )


def commutator_superoperator(h: np.ndarray, hbar: float = 1.0) -> Superoperator:
    """Return X -> (1 / i hbar) [H, X]."""
    return Superoperator((-1j / hbar) * (_left(h) - _right(h)), h.shape[0])


def dissipator(jump: JumpTerm) -> sparse.csr_matrix:
    """Return gamma (L X L^dagger - {L^dagger L, X} / 2) as a sparse matrix."""
    op = np.asarray(jump.operator, dtype=complex)
    ldl = op.conj().T @ op
    return jump.rate * (
        sparse.kron(sparse.csr_matrix(op.conj()), sparse.csr_matrix(op), format="csr")
        - 0.5 * _left(ldl)
        - 0.5 * _right(ldl)
    )


def lindblad_generator(
    h: np.ndarray, jumps: list[JumpTerm] | tuple[JumpTerm, ...], hbar: float = 1.0
) -> Superoperator:
    """Return the Lindblad generator of a hamiltonian and jump terms."""
    h = np.asarray(h, dtype=complex)
    require_hermitian(h, "hamiltonian")
    gen = commutator_superoperator(h, hbar).matrix
    for jump in jumps:
        if jump.operator.shape != h.shape:
            raise ValueError("jump operator dimension differs from the hamiltonian")
        gen = gen + dissipator(jump)
    return Superoperator(sparse.csr_matrix(gen), h.shape[0])


def sns_dissipator(p: OscillatorParams, dim: int, check: bool = True) -> Superoperator:
    """Return the friction and diffusion part of the damped-oscillator generator.

    -i(lam + mu)/(2 hbar) [q, {p, X}] + i(lam - mu)/(2 hbar) [p, {q, X}]
    - D_pp/hbar^2 [q, [q, X]] - D_qq/hbar^2 [p, [p, X]]
    + D_pq/hbar^2 ([q, [p, X]] + [p, [q, X]])
    """
    if check:
        require_valid(p)
    ops = fock_operators(dim, p.m, p.omega, p.constants)
    q, mom, hbar = ops.q, ops.p, p.hbar
    gen = (
        (-1j * (p.lam + p.mu) / (2 * hbar)) * _commutator_anticommutator(q, mom)
        + (1j * (p.lam - p.mu) / (2 * hbar)) * _commutator_anticommutator(mom, q)
        - (p.d_pp / hbar**2) * _double_commutator(q, q)
        - (p.d_qq / hbar**2) * _double_commutator(mom, mom)
        + (p.d_pq / hbar**2)
        * (_double_commutator(q, mom) + _double_commutator(mom, q))
    )
    return Superoperator(sparse.csr_matrix(gen), dim)


def sns_generator(p: OscillatorParams, dim: int, check: bool = True) -> Superoperator:
    """Return the damped-oscillator generator on a Fock truncation of dim levels.

    Set check=False to assemble parameter sets outside the valid region,
    for instance the closed oscillator lam = mu = 0, D = 0.
    """
    ops = fock_operators(dim, p.m, p.omega, p.constants)
    return commutator_superoperator(ops.h0, p.hbar) + sns_dissipator(p, dim, check)


def sns_lindblad_form(p: OscillatorParams, dim: int) -> tuple[np.ndarray, list[JumpTerm]]:
    """Return the hamiltonian and jump terms of the damped-oscillator generator.

    H = H0 + (mu / 2){q, p}; the jumps diagonalize the coefficient matrix in
    the (p, q) basis,

        k = [[2 D_qq / hbar,            -2 D_pq / hbar + i lam],
             [-2 D_pq / hbar - i lam,   2 D_pp / hbar        ]],

    which is positive semidefinite exactly when the determinant bound holds.
    """
    require_valid(p)
    ops = fock_operators(dim, p.m, p.omega, p.constants)
    hbar = p.hbar
    ham = ops.h0 + (p.mu / 2) * (ops.q @ ops.p + ops.p @ ops.q)
    coef = np.array(
        [
            [2 * p.d_qq / hbar, -2 * p.d_pq / hbar + 1j * p.lam],
            [-2 * p.d_pq / hbar - 1j * p.lam, 2 * p.d_pp / hbar],
        ]
    )
    gains, vectors = eigh(coef)
    jumps = []
    for gain, vector in zip(gains, vectors.T, strict=True):
        # a saturated bound leaves one eigenvalue at rounding level
        rate = max(float(gain), 0.0) / hbar
        jumps.append(JumpTerm(vector[0] * ops.p + vector[1] * ops.q, rate))
    return ham, jumps


# - propagation ------------------------------------
def propagate(superop: Superoperator, rho0: np.ndarray, t: float) -> np.ndarray:
    """Return exp(L t)[rho0], re-validated as a density matrix."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    if t == 0:
        return _revalidate(rho0)
    rho = unvec(expm_multiply(superop.matrix * t, vec(rho0)), superop.dim)
    return _revalidate(rho)


def propagate_series(
    superop: Superoperator, rho0: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """Return the states at all times of an increasing grid starting at t >= 0.

    Uniform grids are evaluated in one pass of expm_multiply, others step by
    step between consecutive times.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty one-dimensional grid")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be nonnegative and increasing")

    v0 = vec(rho0).astype(complex)
    steps = np.diff(times)
    if times.size > 2 and np.allclose(steps, steps[0], rtol=1e-12, atol=0):
        start = expm_multiply(superop.matrix * times[0], v0) if times[0] else v0
        vecs = expm_multiply(
            superop.matrix, start, start=0.0, stop=times[-1] - times[0],
            num=times.size, endpoint=True,
        )
    else:
        vecs = np.empty((times.size, v0.size), dtype=complex)
        current = expm_multiply(superop.matrix * times[0], v0) if times[0] else v0
        vecs[0] = current
        for ii, step in enumerate(steps, start=1):
            if step > 0:
                current = expm_multiply(superop.matrix * step, current)
            vecs[ii] = current
    return np.array([_revalidate(unvec(v, superop.dim)) for v in vecs])


def propagator(superop: Superoperator, t: float) -> Superoperator:
    """Return the dense propagator exp(L t)."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    return Superoperator(expm(superop.dense() * t), superop.dim, kind="propagator")


def adjoint_propagate(superop: Superoperator, op: np.ndarray, t: float) -> np.ndarray:
    """Return the Heisenberg-picture operator O(t).

    O(t) satisfies Tr[rho O(t)] = Tr[exp(L t)[rho] O] for every rho.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    op = np.asarray(op, dtype=complex)
    if t == 0:
        return op.copy()
    out = expm_multiply(superop.matrix.T * t, vec(op.T))
    return unvec(out, superop.dim).T


def stationary_state(superop: Superoperator, tol: float = NULLSPACE_TOL) -> np.ndarray:
    """Return the unique stationary state of a generator.

    The null vector is the right singular vector of the smallest singular
    value; a second singular value below tol (scaled by the largest one when
    that exceeds unity) signals a degenerate null space.
    """
    if superop.kind != "generator":
        raise ValueError("stationary states are defined for generators")
    _, sval, vh = svd(superop.dense())
    if sval[-2] < tol * max(1.0, sval[0]):
        raise NonUniqueStationaryStateError(
            f"null space is degenerate: second smallest singular value {sval[-2]:.3e}"
        )
    logger.debug("stationary state gap: %.3e, residual %.3e", sval[-2], sval[-1])
    rho = unvec(vh[-1].conj(), superop.dim)
    rho = hermitize(rho / np.trace(rho))
    return _revalidate(rho)


# - composite systems ------------------------------
def partial_trace(
    rho: np.ndarray, dims: tuple[int, int], keep: str = "system"
) -> np.ndarray:
    """Return the partial trace of a system-environment operator.

    Parameters
    ----------
    rho  :  operator on the product space, system factor first
    dims :  (d_S, d_E)
    keep :  'system' traces out the environment, 'environment' the system
    """
    d_s, d_e = dims
    rho = np.asarray(rho)
    if rho.shape != (d_s * d_e, d_s * d_e):
        raise ValueError(f"operator shape {rho.shape} does not match dims {dims}")
    blocks = rho.reshape(d_s, d_e, d_s, d_e)
    if keep == "system":
        return np.einsum("ikjk->ij", blocks)
    if keep == "environment":
        return np.einsum("kikj->ij", blocks)
    raise ValueError(f"keep must be 'system' or 'environment', not {keep!r}")


def project_p0(op: np.ndarray, rho_tilde: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Return Tr_E[O] kron rho_tilde."""
    if np.shape(rho_tilde) != (dims[1], dims[1]):
        raise ValueError("environment state does not match d_E")
    return np.kron(partial_trace(op, dims, "system"), rho_tilde)


def _composite_permutation(d_s: int, d_e: int) -> sparse.csr_matrix:
    """Return P with vec(A kron B) = P (vec(A) kron vec(B))."""
    n = d_s * d_e
    row_s, col_s, row_e, col_e = np.meshgrid(
        np.arange(d_s), np.arange(d_s), np.arange(d_e), np.arange(d_e), indexing="ij"
    )
    rows = ((col_s * d_e + col_e) * n + (row_s * d_e + row_e)).ravel()
    cols = ((col_s * d_s + row_s) * d_e**2 + (col_e * d_e + row_e)).ravel()
    return sparse.csr_matrix(
        (np.ones(rows.size, dtype=complex), (rows, cols)), shape=(n * n, n * n)
    )


def lift_system(superop: Superoperator, d_e: int) -> Superoperator:
    """Return L_S kron identity on the composite operators."""
    perm = _composite_permutation(superop.dim, d_e)
    core = sparse.kron(sparse.csr_matrix(superop.matrix), _eye(d_e**2), format="csr")
    return Superoperator(perm @ core @ perm.T, superop.dim * d_e)


def lift_environment(superop: Superoperator, d_s: int) -> Superoperator:
    """Return identity kron L_E on the composite operators."""
    perm = _composite_permutation(d_s, superop.dim)
    core = sparse.kron(_eye(d_s**2), sparse.csr_matrix(superop.matrix), format="csr")
    return Superoperator(perm @ core @ perm.T, d_s * superop.dim)


def compose_composite_generator(
    gen_s: Superoperator,
    gen_e: Superoperator,
    u_int: np.ndarray,
    hbar: float = 1.0,
) -> Superoperator:
    """Return L_S + L_E + (1 / i hbar)[U_I, .] on the product space."""
    dim = gen_s.dim * gen_e.dim
    u_int = np.asarray(u_int, dtype=complex)
    if u_int.shape != (dim, dim):
        raise ValueError("interaction does not match d_S * d_E")
    require_hermitian(u_int, "interaction")
    total = (
        lift_system(gen_s, gen_e.dim)
        + lift_environment(gen_e, gen_s.dim)
        + commutator_superoperator(u_int, hbar)
    )
    return Superoperator(sparse.csr_matrix(total.matrix), dim)


# - complete positivity ----------------------------
def choi_matrix(superop: Superoperator) -> np.ndarray:
    """Return sum_ij |i><j| kron Lambda(|i><j|)."""
    dim = superop.dim
    return superop.dense().reshape([dim] * 4).swapaxes(0, 3).reshape(dim**2, dim**2)


def cptp_check(superop: Superoperator, tol: float = 1e-8) -> CPTPReport:
    """Certify trace preservation and complete positivity of a propagator."""
    dim = superop.dim
    choi = choi_matrix(superop)
    reduced = np.einsum("ikjk->ij", choi.reshape(dim, dim, dim, dim))
    is_tp = bool(np.max(np.abs(reduced - np.eye(dim))) <= tol)
    min_eig = float(eigvalsh(hermitize(choi))[0])
    return CPTPReport(is_tp=is_tp, is_cp=min_eig >= -tol, min_choi_eigenvalue=min_eig)


def unitary_superoperator(u: np.ndarray) -> Superoperator:
    """Return the propagator X -> U X U^dagger."""
    u = np.asarray(u, dtype=complex)
    return Superoperator(np.kron(u.conj(), u), u.shape[0], kind="propagator")


def transpose_superoperator(dim: int) -> Superoperator:
    """Return the propagator X -> X^T, positive but not completely positive."""
    idx = np.arange(dim * dim)
    row, col = idx % dim, idx // dim
    matrix = np.zeros((dim * dim, dim * dim), dtype=complex)
    matrix[row * dim + col, idx] = 1.0
    return Superoperator(matrix, dim, kind="propagator")
