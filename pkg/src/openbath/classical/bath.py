#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Classical system coupled to damped, noise-driven bath oscillators.

Equations of motion

    m x''   = -U'(x) + sum_mu m_mu w_mu^2 (q_mu - a_mu(x)) a_mu'(x)
    q_mu''  = -w_mu^2 (q_mu - a_mu(x)) - 2 g_mu q_mu' + F_mu / m_mu

with <F_mu(t) F_nu(s)> = 4 g_mu m_mu k_B T delta_mu,nu delta(t - s).

Both integrators are BAOAB splittings: half kicks and half drifts around an
exact Ornstein-Uhlenbeck update of the damped velocities.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import quad

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

logger = logging.getLogger(__name__)

# - global parameters ------------------------------
BLOCK_SIZE = 256       # trajectories per noise stream
STABILITY_FACTOR = 0.05


# - Classes ----------------------------------------
@dataclass(frozen=True)
class ClassicalSystemSpec:
    """System particle of mass m in the potential U.

    Structure elements
    ------------------
    - m         :  mass
    - potential :  U(x), vectorized
    - gradient  :  U'(x), vectorized
    - x0, v0    :  initial position and velocity
    - timescale :  characteristic time of the bare motion (1/omega_0)
    """

    m: float
    potential: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    x0: float = 0.0
    v0: float = 0.0
    timescale: float = 1.0

    def __post_init__(self: ClassicalSystemSpec) -> None:
        """Reject nonpositive mass or timescale."""
        if not (self.m > 0 and self.timescale > 0):
            raise ValueError("system mass and timescale must be strictly positive")


@dataclass(frozen=True)
class ClassicalBathMode:
    """Underdamped bath oscillator coupled through a(x), linear c x by default."""

    m: float
    omega: float
    gamma: float
    c: float = 1.0
    coupling: Callable[[np.ndarray], np.ndarray] | None = None
    coupling_derivative: Callable[[np.ndarray], np.ndarray] | None = None
    q0: float | None = None
    v0: float = 0.0

    def __post_init__(self: ClassicalBathMode) -> None:
        """Check positivity, underdamping and coupling completeness."""
        if not self.m > 0:
            raise ValueError("bath mass must be strictly positive")
        if not 0 < self.gamma < self.omega:
            raise ValueError("bath mode must satisfy 0 < gamma < omega")
        if (self.coupling is None) != (self.coupling_derivative is None):
            raise ValueError("a(x) and a'(x) must be given together")

    @property
    def big_omega(self: ClassicalBathMode) -> float:
        """Return sqrt(omega^2 - gamma^2)."""
        return float(np.sqrt(self.omega**2 - self.gamma**2))

    @property
    def is_linear(self: ClassicalBathMode) -> bool:
        """Return True for the default coupling a(x) = c x."""
        return self.coupling is None

    def a(self: ClassicalBathMode, x: np.ndarray) -> np.ndarray:
        """Return a(x)."""
        if self.coupling is None:
            return self.c * np.asarray(x, dtype=float)
        return self.coupling(x)

    def a_prime(self: ClassicalBathMode, x: np.ndarray) -> np.ndarray:
        """Return a'(x)."""
        if self.coupling_derivative is None:
            return np.full_like(np.asarray(x, dtype=float), self.c)
        return self.coupling_derivative(x)


@dataclass
class TrajectoryEnsemble:
    """Sampled trajectories of one seeded simulation.

    Structure elements
    ------------------
    - seed        :  seed of all noise streams
    - dt          :  integration step
    - temperature :  bath temperature
    - kind        :  'composite' or 'markov'
    - mass        :  system mass
    - times       :  sample times, shape (n_t,)
    - x, v        :  system position and velocity, shape (n_traj, n_t)
    - q, u        :  bath positions and velocities, shape (n_traj, n_t, n_modes)
    - noise_force :  effective noise sum_mu m_mu w_mu^2 a_mu'(x) xi_mu
    - bath_masses :  masses of the bath modes
    - relaxation_time :  slowest bath (composite) or friction (markov) time
    """

    seed: int
    dt: float
    temperature: float
    kind: str
    mass: float
    times: np.ndarray
    x: np.ndarray
    v: np.ndarray
    q: np.ndarray | None = None
    u: np.ndarray | None = None
    noise_force: np.ndarray | None = None
    bath_masses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    relaxation_time: float = 0.0

    @property
    def n_traj(self: TrajectoryEnsemble) -> int:
        """Return the number of trajectories."""
        return self.x.shape[0]


@dataclass(frozen=True)
class Estimate:
    """Ensemble estimate with its jackknife error."""

    value: float
    error: float


@dataclass
class EnsembleStatistics:
    """Stationary moments, autocorrelations and time-resolved <x^2>."""

    discard: float
    moments: dict[str, Estimate]
    lags: np.ndarray
    x_autocorrelation: np.ndarray
    x_autocorrelation_error: np.ndarray
    noise_autocorrelation: np.ndarray | None
    noise_autocorrelation_error: np.ndarray | None
    x2_series: np.ndarray
    x2_series_error: np.ndarray


# - systems ----------------------------------------
def harmonic_system(
    m: float, omega0: float, x0: float = 0.0, v0: float = 0.0
) -> ClassicalSystemSpec:
    """Return U(x) = m omega0^2 x^2 / 2."""
    if not omega0 > 0:
        raise ValueError("omega0 must be strictly positive")
    k = m * omega0**2
    return ClassicalSystemSpec(
        m=m,
        potential=lambda x: 0.5 * k * np.asarray(x) ** 2,
        gradient=lambda x: k * np.asarray(x),
        x0=x0,
        v0=v0,
        timescale=1 / omega0,
    )


def double_well_system(
    m: float, a4: float, b2: float, x0: float = 0.0, v0: float = 0.0
) -> ClassicalSystemSpec:
    """Return U(x) = a4 x^4 - b2 x^2 with the well frequency as timescale."""
    if not (a4 > 0 and b2 > 0):
        raise ValueError("double well requires a4 > 0 and b2 > 0")
    return ClassicalSystemSpec(
        m=m,
        potential=lambda x: a4 * np.asarray(x) ** 4 - b2 * np.asarray(x) ** 2,
        gradient=lambda x: 4 * a4 * np.asarray(x) ** 3 - 2 * b2 * np.asarray(x),
        x0=x0,
        v0=v0,
        timescale=np.sqrt(m / (4 * b2)),
    )


# - kernels ----------------------------------------
def memory_kernel(
    bath: Sequence[ClassicalBathMode],
    t: float | np.ndarray,
    s: float | np.ndarray = 0.0,
    x_t: float = 0.0,
    x_s: float = 0.0,
    form: str = "derived",
) -> float | np.ndarray:
    """Return the dissipation kernel eta(x(t), x(s); t, s).

    eta = sum m w^2 [cos W tau + r sin W tau] exp(-g tau) a'(x(s)) a'(x(t))

    with tau = t - s and r = g / W.  This kernel integrates to markov_kernel;
    form='printed' evaluates r = W / g instead, for the consistency check.
    """
    tau = np.asarray(t, dtype=float) - np.asarray(s, dtype=float)
    if np.any(tau < 0):
        raise ValueError("kernel requires t >= s")
    if form not in ("derived", "printed"):
        raise ValueError(f"unknown kernel form {form!r}")
    total = np.zeros_like(tau)
    for mode in bath:
        big = mode.big_omega
        ratio = mode.gamma / big if form == "derived" else big / mode.gamma
        total = total + (
            mode.m * mode.omega**2
            * (np.cos(big * tau) + ratio * np.sin(big * tau))
            * np.exp(-mode.gamma * tau)
            * mode.a_prime(x_s) * mode.a_prime(x_t)
        )
    return total if total.ndim else float(total)


def markov_kernel(
    bath: Sequence[ClassicalBathMode], x: float = 0.0, x_prime: float = 0.0
) -> float:
    """Return eta_bar(x, x') = sum 2 m g a'(x) a'(x')."""
    return float(
        sum(2 * mode.m * mode.gamma * mode.a_prime(x) * mode.a_prime(x_prime)
            for mode in bath)
    )


def kernel_markov_consistency(
    bath: Sequence[ClassicalBathMode], form: str = "derived", horizon: float = 40.0
) -> dict[str, float]:
    """Integrate the kernel over tau >= 0 and compare with eta_bar at x = 0."""
    t_max = horizon / min(mode.gamma for mode in bath)
    integral, _ = quad(
        lambda tau: memory_kernel(bath, tau, form=form), 0.0, t_max, limit=5000
    )
    eta_bar = markov_kernel(bath)
    return {"integral": integral, "eta_bar": eta_bar, "ratio": integral / eta_bar}


# - integrators ------------------------------------
def _check_timestep(dt: float, times: list[float]) -> None:
    limit = STABILITY_FACTOR * min(times)
    if not 0 < dt <= limit * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} exceeds the stability limit {limit:g}")


def _block_streams(seed: int, block: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Return (initial-state, noise) generators of one trajectory block."""
    return tuple(
        np.random.Generator(
            np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block, key)))
        )
        for key in (0, 1)
    )


def _blocks(n_traj: int, block_size: int) -> list[tuple[int, int]]:
    edges = list(range(0, n_traj, block_size)) + [n_traj]
    return list(zip(edges[:-1], edges[1:], strict=False))


def _gather(results: list[dict], key: str) -> np.ndarray | None:
    if results[0][key] is None:
        return None
    return np.concatenate([res[key] for res in results])


def _coupling_values(
    bath: Sequence[ClassicalBathMode], x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Return a(x) and a'(x), shape (n, n_modes)."""
    a_val = np.stack([mode.a(x) for mode in bath], axis=-1)
    a_der = np.stack([mode.a_prime(x) for mode in bath], axis=-1)
    return a_val, a_der


def _composite_block(
    block: int,
    size: int,
    system: ClassicalSystemSpec | None,
    bath: Sequence[ClassicalBathMode],
    kt: float,
    kt_init: float | None,
    dt: float,
    n_steps: int,
    sample_every: int,
    seed: int,
    record_bath: bool,
) -> dict[str, np.ndarray | None]:
    """Integrate one block of trajectories of the composite system."""
    init_rng, noise_rng = _block_streams(seed, block)
    n_modes = len(bath)
    m_b = np.array([mode.m for mode in bath])
    w2 = np.array([mode.omega**2 for mode in bath])
    decay = np.exp(-2 * np.array([mode.gamma for mode in bath]) * dt)
    kick = np.sqrt(kt / m_b * (1 - decay**2))

    x = np.full(size, system.x0 if system else 0.0)
    v = np.full(size, system.v0 if system else 0.0)
    a_val, a_der = _coupling_values(bath, x)
    q = np.where(
        [mode.q0 is None for mode in bath],
        a_val,
        [0.0 if mode.q0 is None else mode.q0 for mode in bath],
    )
    u = np.tile([mode.v0 for mode in bath], (size, 1)).astype(float)
    if kt_init is not None:
        q = q + np.sqrt(kt_init / (m_b * w2)) * init_rng.standard_normal((size, n_modes))
        u = u + np.sqrt(kt_init / m_b) * init_rng.standard_normal((size, n_modes))
    xi = np.zeros((size, n_modes))
    w_xi = np.zeros((size, n_modes))

    def forces(x: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a_val, a_der = _coupling_values(bath, x)
        stretch = m_b * w2 * (q - a_val)
        f_x = (stretch * a_der).sum(axis=1)
        if system is not None:
            f_x = f_x - system.gradient(x)
        return f_x, -stretch, a_der

    n_samples = n_steps // sample_every + 1
    out_x = np.empty((size, n_samples))
    out_v = np.empty((size, n_samples))
    out_f = np.empty((size, n_samples))
    out_q = np.empty((size, n_samples, n_modes)) if record_bath else None
    out_u = np.empty((size, n_samples, n_modes)) if record_bath else None

    def record(idx: int, a_der: np.ndarray) -> None:
        out_x[:, idx] = x
        out_v[:, idx] = v
        out_f[:, idx] = (m_b * w2 * a_der * xi).sum(axis=1)
        if record_bath:
            out_q[:, idx] = q
            out_u[:, idx] = u

    f_x, f_q, a_der = forces(x, q)
    record(0, a_der)
    half = 0.5 * dt
    for step in range(1, n_steps + 1):
        # B
        u += half * f_q / m_b
        w_xi -= half * w2 * xi
        if system is not None:
            v += half * f_x / system.m
        # A
        q += half * u
        xi += half * w_xi
        if system is not None:
            x += half * v
        # O, the noise-only copy receives the same noise
        noise = noise_rng.standard_normal((size, n_modes))
        u *= decay
        u += kick * noise
        w_xi *= decay
        w_xi += kick * noise
        # A
        q += half * u
        xi += half * w_xi
        if system is not None:
            x += half * v
        # B
        f_x, f_q, a_der = forces(x, q)
        u += half * f_q / m_b
        w_xi -= half * w2 * xi
        if system is not None:
            v += half * f_x / system.m
        if step % sample_every == 0:
            record(step // sample_every, a_der)

    return {"x": out_x, "v": out_v, "q": out_q, "u": out_u, "noise_force": out_f}


def simulate_composite_langevin(
    system: ClassicalSystemSpec | None,
    bath: Sequence[ClassicalBathMode],
    temperature: float,
    dt: float,
    t_end: float,
    n_traj: int,
    seed: int,
    *,
    k_b: float = 1.0,
    sample_every: int = 1,
    bath_init: str = "rest",
    init_temperature: float | None = None,
    record_bath: bool = True,
    threads: int = 1,
    block_size: int = BLOCK_SIZE,
) -> TrajectoryEnsemble:
    """Integrate the system together with its noise-driven bath oscillators.

    Parameters
    ----------
    system      :  system particle, None leaves x frozen at zero (free bath)
    bath        :  bath modes
    temperature :  temperature of the bath noise
    dt          :  integration step, at most 0.05 min(1/w, 1/g, system time)
    t_end       :  final time
    n_traj      :  number of trajectories
    seed        :  seed of the counter-based noise streams
    bath_init   :  'rest' (q = a(x0) unless q0 is set) or 'thermal'
    init_temperature :  temperature of a 'thermal' initial bath state
    record_bath :  store q and q' of every mode
    threads     :  worker threads, results are merged by block index
    """
    if not bath:
        raise ValueError("at least one bath mode is required")
    if n_traj < 1 or t_end <= 0 or temperature < 0:
        raise ValueError("n_traj, t_end and temperature must be positive")
    scales = [1 / mode.omega for mode in bath] + [1 / mode.gamma for mode in bath]
    if system is not None:
        scales.append(system.timescale)
    _check_timestep(dt, scales)
    if bath_init not in ("rest", "thermal"):
        raise ValueError(f"unknown bath initialization {bath_init!r}")
    kt_init = None
    if bath_init == "thermal":
        kt_init = k_b * (temperature if init_temperature is None else init_temperature)

    n_steps = int(round(t_end / dt))
    blocks = _blocks(n_traj, block_size)
    logger.info(
        "composite Langevin: %d trajectories, %d steps, %d blocks",
        n_traj, n_steps, len(blocks),
    )

    def run(index: int) -> dict[str, np.ndarray | None]:
        lo, hi = blocks[index]
        return _composite_block(
            index, hi - lo, system, bath, k_b * temperature, kt_init, dt,
            n_steps, sample_every, seed, record_bath,
        )

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, range(len(blocks))))

    return TrajectoryEnsemble(
        seed=seed,
        dt=dt,
        temperature=temperature,
        kind="composite",
        mass=system.m if system else 0.0,
        times=dt * sample_every * np.arange(n_steps // sample_every + 1),
        x=_gather(results, "x"),
        v=_gather(results, "v"),
        q=_gather(results, "q"),
        u=_gather(results, "u"),
        noise_force=_gather(results, "noise_force"),
        bath_masses=np.array([mode.m for mode in bath]),
        relaxation_time=1 / min(mode.gamma for mode in bath),
    )


def _markov_block(
    block: int,
    size: int,
    system: ClassicalSystemSpec,
    eta_bar: float,
    kt: float,
    dt: float,
    n_steps: int,
    sample_every: int,
    seed: int,
) -> dict[str, np.ndarray | None]:
    """Integrate one block of trajectories of the Markovian Langevin equation."""
    _, noise_rng = _block_streams(seed, block)
    decay = np.exp(-eta_bar * dt / system.m)
    kick = np.sqrt(kt / system.m * (1 - decay**2))
    x = np.full(size, system.x0, dtype=float)
    v = np.full(size, system.v0, dtype=float)

    n_samples = n_steps // sample_every + 1
    out_x = np.empty((size, n_samples))
    out_v = np.empty((size, n_samples))
    out_x[:, 0] = x
    out_v[:, 0] = v
    half = 0.5 * dt
    force = -system.gradient(x)
    for step in range(1, n_steps + 1):
        v += half * force / system.m
        x += half * v
        v *= decay
        v += kick * noise_rng.standard_normal(size)
        x += half * v
        force = -system.gradient(x)
        v += half * force / system.m
        if step % sample_every == 0:
            out_x[:, step // sample_every] = x
            out_v[:, step // sample_every] = v
    return {"x": out_x, "v": out_v}


def markov_langevin(
    system: ClassicalSystemSpec,
    eta_bar: float,
    temperature: float,
    dt: float,
    t_end: float,
    n_traj: int,
    seed: int,
    *,
    k_b: float = 1.0,
    sample_every: int = 1,
    threads: int = 1,
    block_size: int = BLOCK_SIZE,
) -> TrajectoryEnsemble:
    """Integrate m x'' = -U'(x) - eta_bar x' + F_s, <F_s F_s> = 2 k_B T eta_bar delta."""
    if eta_bar < 0:
        raise ValueError("friction must be nonnegative")
    if n_traj < 1 or t_end <= 0 or temperature < 0:
        raise ValueError("n_traj, t_end and temperature must be positive")
    scales = [system.timescale]
    if eta_bar > 0:
        scales.append(system.m / eta_bar)
    _check_timestep(dt, scales)

    n_steps = int(round(t_end / dt))
    blocks = _blocks(n_traj, block_size)

    def run(index: int) -> dict[str, np.ndarray | None]:
        lo, hi = blocks[index]
        return _markov_block(
            index, hi - lo, system, eta_bar, k_b * temperature, dt,
            n_steps, sample_every, seed,
        )

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, range(len(blocks))))

    return TrajectoryEnsemble(
        seed=seed,
        dt=dt,
        temperature=temperature,
        kind="markov",
        mass=system.m,
        times=dt * sample_every * np.arange(n_steps // sample_every + 1),
        x=_gather(results, "x"),
        v=_gather(results, "v"),
        relaxation_time=system.m / eta_bar if eta_bar > 0 else 0.0,
    )


# - statistics -------------------------------------
def jackknife(
    samples: np.ndarray,
    n_blocks: int = 20,
    estimator: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Return an estimate and its delete-one-block jackknife error.

    Blocks are contiguous along the first axis (trajectories). A single
    sample has no spread to resample: its error is NaN.
    """
    samples = np.asarray(samples)
    if samples.ndim == 0 or samples.shape[0] == 0:
        raise ValueError("jackknife needs at least one sample")
    estimator = estimator or (lambda arr: arr.mean(axis=0))
    n_blocks = min(n_blocks, samples.shape[0])
    if n_blocks < 2:
        full = np.asarray(estimator(samples))
        return full, np.full(full.shape, np.nan)
    edges = np.linspace(0, samples.shape[0], n_blocks + 1).astype(int)
    full = estimator(samples)
    partial = np.array(
        [
            estimator(np.concatenate((samples[:lo], samples[hi:])))
            for lo, hi in zip(edges[:-1], edges[1:], strict=True)
        ]
    )
    spread = partial - partial.mean(axis=0)
    error = np.sqrt((n_blocks - 1) / n_blocks * np.sum(spread**2, axis=0))
    return full, error


def autocorrelation(series: np.ndarray, max_lag: int) -> np.ndarray:
    """Return per-trajectory lag products mean_t X(t + k) X(t), k < max_lag.

    Each lag is divided by its own number of pairs.
    """
    series = np.atleast_2d(series)
    n_t = series.shape[1]
    max_lag = min(max_lag, n_t)
    return np.stack(
        [np.mean(series[:, k:] * series[:, : n_t - k], axis=1) for k in range(max_lag)],
        axis=1,
    )


def ensemble_statistics(
    ens: TrajectoryEnsemble,
    discard: float | None = None,
    n_blocks: int = 20,
    max_lag: int | None = None,
) -> EnsembleStatistics:
    """Return stationary estimates with jackknife errors.

    The first `discard` time units of each trajectory are dropped before
    the stationary moments and autocorrelations are estimated; the default
    is ten relaxation times of the ensemble.
    """
    if ens.n_traj == 0 or ens.times.size == 0:
        raise ValueError("ensemble is empty")
    discard = 10 * ens.relaxation_time if discard is None else discard
    window = ens.times >= discard
    if window.sum() < 2:
        raise ValueError("no stationary samples left after discarding transients")
    n_win = int(window.sum())
    max_lag = n_win // 2 if max_lag is None else min(max_lag, n_win)
    x_win, v_win = ens.x[:, window], ens.v[:, window]

    def stationary(values: np.ndarray) -> Estimate:
        value, error = jackknife(values.mean(axis=1), n_blocks)
        return Estimate(float(value), float(error))

    moments = {
        "x": stationary(x_win),
        "x2": stationary(x_win**2),
        "v2": stationary(v_win**2),
        "kinetic": stationary(0.5 * ens.mass * v_win**2),
    }
    if ens.u is not None:
        for nr, mass in enumerate(ens.bath_masses):
            moments[f"bath_kinetic_{nr}"] = stationary(0.5 * mass * ens.u[:, window, nr] ** 2)

    c_x, c_x_err = jackknife(autocorrelation(x_win, max_lag), n_blocks)
    c_f = c_f_err = None
    if ens.noise_force is not None:
        c_f, c_f_err = jackknife(
            autocorrelation(ens.noise_force[:, window], max_lag), n_blocks
        )
    x2_t, x2_t_err = jackknife(ens.x**2, n_blocks)

    dt_sample = ens.times[1] - ens.times[0] if ens.times.size > 1 else 0.0
    return EnsembleStatistics(
        discard=discard,
        moments=moments,
        lags=dt_sample * np.arange(max_lag),
        x_autocorrelation=c_x,
        x_autocorrelation_error=c_x_err,
        noise_autocorrelation=c_f,
        noise_autocorrelation_error=c_f_err,
        x2_series=x2_t,
        x2_series_error=x2_t_err,
    )
