"""Coherent-state POVM channel and the isotropic depolarizing channel.

One POVM round contracts the Bloch vector by ``1/(N+1)``; the isotropic
depolarizing semigroup contracts it by ``exp(-N gamma t / 2)``. The two agree
at ``t = 2 n ln(1+N) / (gamma N)``.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .coherent import (
    _draw_chunk,
    angles_of_state,
    coherent_states,
    haar_average,
)
from .errors import TOL, InvalidDimensionError, NumericalGuardError
from .linalg import as_matrix, hermitize, validate_density_matrix
from .sun_algebra import expectation_vector


@dataclass(frozen=True)
class ChannelSpec:
    dim: int
    gamma: float

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimensionError("N must be >= 2")
        if not self.gamma > 0 or not math.isfinite(self.gamma):
            raise ValueError(f"decoherence rate must be positive and finite, got {self.gamma}")


def _contract(rho, factor):
    n = rho.shape[0]
    mixed = np.eye(n) / n
    return hermitize(mixed + factor * (rho - mixed))


def povm_channel_analytic(rho):
    """One round of the coherent-state POVM: ``1/N + (rho - 1/N)/(1+N)``."""
    rho = validate_density_matrix(rho)
    return _contract(rho, 1.0 / (rho.shape[0] + 1))


def povm_channel_monte_carlo(rho, samples, seed, workers=1):
    """Haar average of ``N <Omega|rho|Omega> |Omega><Omega|``.

    Returns a :class:`HaarAverage` holding the estimate and per-entry standard errors.
    """
    rho = validate_density_matrix(rho)
    if samples < 100:
        raise ValueError("Monte Carlo channel needs at least 100 samples")
    n = rho.shape[0]

    def integrand(psi):
        w = n * np.einsum("si,ij,sj->s", psi.conj(), rho, psi).real
        return w[:, None, None] * np.einsum("si,sj->sij", psi, psi.conj())

    return haar_average(integrand, n, samples, seed, workers)


def iterate_channel(rho0, n):
    """State after ``n`` POVM rounds, in closed form."""
    if n < 0:
        raise ValueError("number of rounds must be non-negative")
    rho0 = validate_density_matrix(rho0)
    if n == 0:
        return rho0.copy()
    return _contract(rho0, float(rho0.shape[0] + 1) ** (-n))


def compose_channel(rho0, n):
    """``n``-fold application of :func:`povm_channel_analytic`."""
    rho = validate_density_matrix(rho0).copy()
    for _ in range(n):
        rho = povm_channel_analytic(rho)
    return rho


def lindblad_sum(rho, spec, basis):
    """``gamma (sum_nu T_nu rho T_nu - (N^2-1)/(2N) rho)`` by explicit summation."""
    n = spec.dim
    t = basis.generators
    return spec.gamma * (
        np.einsum("mij,jk,mkl->il", t, rho, t) - (n * n - 1) / (2 * n) * rho
    )


def lindblad_rhs(rho, spec, basis):
    """Right-hand side of the isotropic depolarizing master equation.

    Both the Lindblad sum and the closed form ``gamma (1/2 - N rho / 2)`` are
    evaluated; a mismatch beyond tolerance raises NumericalGuardError.
    """
    if basis.dim != spec.dim:
        raise InvalidDimensionError("basis and channel dimensions differ")
    rho = as_matrix(rho, spec.dim)
    n = spec.dim
    closed = spec.gamma * (np.trace(rho) * np.eye(n) / 2 - n * rho / 2)
    summed = lindblad_sum(rho, spec, basis)
    err = np.abs(closed - summed).max()
    if err > TOL.structural * max(1.0, spec.gamma):
        raise NumericalGuardError(f"Lindblad sum and closed form differ by {err:.3g}")
    return closed


def depolarize(rho0, spec, t):
    """Closed-form solution ``1/N + exp(-N gamma t/2)(rho0 - 1/N)``."""
    if t < 0:
        raise ValueError("time must be non-negative")
    rho0 = validate_density_matrix(rho0, spec.dim)
    return _contract(rho0, math.exp(-0.5 * spec.dim * spec.gamma * t))


def equivalence_time(n, spec):
    """Time at which depolarization matches ``n`` POVM rounds."""
    if n < 0:
        raise ValueError("number of rounds must be non-negative")
    return 2.0 * n * math.log1p(spec.dim) / (spec.gamma * spec.dim)


def integrate_master_equation(rho0, spec, t, steps, basis):
    """Classical RK4 with ``steps`` fixed steps of :func:`lindblad_rhs`."""
    if steps < 10:
        raise ValueError("integrator needs at least 10 steps")
    if t < 0:
        raise ValueError("time must be non-negative")
    rho = validate_density_matrix(rho0, spec.dim).copy()
    h = t / steps
    if h == 0:
        return rho

    def f(r):
        return lindblad_rhs(r, spec, basis)

    for _ in range(steps):
        k1 = f(rho)
        k2 = f(rho + 0.5 * h * k1)
        k3 = f(rho + 0.5 * h * k2)
        k4 = f(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return hermitize(rho)


def _as_generator(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return _rng.stream(seed_or_rng)


def _propose(g, rho, size):
    """Haar proposals and their acceptance mask for ``u < <Omega|rho|Omega>``."""
    n = rho.shape[0]
    theta, phi = _draw_chunk(g, size, n)
    psi = coherent_states(theta, phi)
    p = np.einsum("si,ij,sj->s", psi.conj(), rho, psi).real
    return psi, g.random(size) < p


def trajectory_sample(rho, seed_or_rng):
    """Draw one POVM outcome and its post-measurement state.

    Proposals are Haar distributed and accepted with probability
    ``<Omega|rho|Omega>``, giving outcome density ``N <Omega|rho|Omega>``.
    Returns ``(OmegaAngles, |Omega><Omega|)``.
    """
    rho = validate_density_matrix(rho)
    g = _as_generator(seed_or_rng)
    while True:
        psi, keep = _propose(g, rho, 1)
        if keep[0]:
            v = psi[0]
            return angles_of_state(v), np.outer(v, v.conj())


@dataclass(frozen=True, eq=False)
class TrajectoryAverage:
    mean: np.ndarray
    stderr: np.ndarray
    trajectories: int
    proposals: int

    @property
    def acceptance_rate(self):
        return self.trajectories / self.proposals


def trajectory_average(rho, count, seed, workers=1):
    """Average collapsed state over ``count`` rejection-sampled trajectories."""
    rho = validate_density_matrix(rho)
    if count < 2:
        raise ValueError("need at least two trajectories")
    n = rho.shape[0]

    def chunk(g, lo, hi):
        need = hi - lo
        got, proposed = [], 0
        while need > 0:
            psi, keep = _propose(g, rho, max(64, 2 * n * need))
            idx = np.flatnonzero(keep)[:need]
            # proposals up to and including the last accepted one are consumed
            proposed += idx[-1] + 1 if idx.size == need else keep.size
            got.append(psi[idx])
            need -= idx.size
        psi = np.concatenate(got)
        proj = np.einsum("si,sj->sij", psi, psi.conj())
        return proj.sum(axis=0), (np.abs(proj) ** 2).sum(axis=0), proposed

    parts = _rng.map_chunks(chunk, seed, count, workers)
    total = sum(p[0] for p in parts)
    sq = sum(p[1] for p in parts)
    mean = total / count
    var = np.maximum((sq - count * np.abs(mean) ** 2) / (count - 1), 0.0)
    return TrajectoryAverage(mean, np.sqrt(var / count), count, sum(p[2] for p in parts))


def lambda_estimate(basis, samples, seed, workers=1):
    """Monte Carlo value of ``(2N/(N^2-1)) * integral of sum_nu <Omega|T_nu|Omega>^2``."""
    if samples < 1000:
        raise ValueError("lambda estimate needs at least 1000 samples")
    n = basis.dim
    avg = haar_average(
        lambda psi: (expectation_vector(psi, basis) ** 2).sum(axis=1), n, samples, seed, workers
    )
    return 2 * n / (n * n - 1) * float(avg.mean.real)
