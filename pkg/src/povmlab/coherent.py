"""N-level coherent states on CP^{N-1}, their POVM elements and Haar sampling."""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import rng as _rng
from .errors import TOL, InvalidDimensionError
from .sun_algebra import expectation_vector

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class OmegaAngles:
    """Angles ``theta_1..theta_{N-1}`` in [0, pi] and ``phi_1..phi_{N-1}`` in [0, 2 pi)."""

    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float)).copy()
        phi = np.mod(np.atleast_1d(np.asarray(self.phi, dtype=float)), TWO_PI)
        if theta.ndim != 1 or theta.shape != phi.shape or theta.size < 1:
            raise InvalidDimensionError("theta and phi must be 1-D with equal length N-1 >= 1")
        if np.any(theta < -TOL.structural) or np.any(theta > np.pi + TOL.structural):
            raise ValueError("theta angles must lie in [0, pi]")
        theta = np.clip(theta, 0.0, np.pi)
        # mod can return exactly 2*pi for tiny negative inputs
        phi[phi >= TWO_PI] = 0.0
        theta.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @property
    def dim(self):
        return self.theta.size + 1

    @classmethod
    def ground(cls, dim):
        return cls(np.zeros(dim - 1), np.zeros(dim - 1))

    def as_row(self):
        return np.concatenate([self.theta, self.phi])

    def __eq__(self, other):
        if not isinstance(other, OmegaAngles):
            return NotImplemented
        return np.array_equal(self.theta, other.theta) and np.array_equal(self.phi, other.phi)

    def __repr__(self):
        return f"OmegaAngles(theta={self.theta.tolist()}, phi={self.phi.tolist()})"


def rotation_gate(n, k, theta, phi):
    """``exp[-i theta/2 (cos(phi) X + sin(phi) Y)]`` on levels ``k, k+1`` of an N-level system."""
    if not 0 <= k <= n - 2:
        raise InvalidDimensionError(f"rotation level k={k} out of range for N={n}")
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    block = np.array(
        [[c, -1j * np.exp(-1j * phi) * s], [-1j * np.exp(1j * phi) * s, c]],
        dtype=np.complex128,
    )
    g = np.eye(n, dtype=np.complex128)
    g[k : k + 2, k : k + 2] = block
    return g


def rotation_gate_expm(n, k, theta, phi):
    """Same gate via a matrix exponential of the embedded Pauli generator."""
    h = np.zeros((n, n), dtype=np.complex128)
    h[k, k + 1] = np.exp(-1j * phi)
    h[k + 1, k] = np.exp(1j * phi)
    return expm(-0.5j * theta * h)


def coherent_unitary(angles):
    """Product of two-level rotations with ``U |0> = |Omega>``.

    Gates act in the order k = 0, 1, ..., N-2. Each azimuth is offset by pi/2 so
    that the excited amplitude carries ``e^{i phi}`` rather than ``-i e^{i phi}``;
    the resulting column matches the closed-form coherent state exactly.
    """
    n = angles.dim
    u = np.eye(n, dtype=np.complex128)
    for k in range(n - 1):
        u = rotation_gate(n, k, angles.theta[k], angles.phi[k] + np.pi / 2) @ u
    return u


def canonical_phase(psi):
    """Rotate the global phase so the first nonzero amplitude is real and positive."""
    psi = np.asarray(psi, dtype=np.complex128)
    nz = np.flatnonzero(np.abs(psi) > TOL.structural)
    if nz.size == 0:
        return psi
    a = psi[nz[0]]
    out = psi * (np.abs(a) / a)
    out[nz[0]] = abs(a)
    return out


def coherent_state(angles):
    """``|Omega> = U_N(Omega)|0>`` as a unit vector of length N."""
    return canonical_phase(coherent_unitary(angles)[:, 0])


def coherent_states(theta, phi):
    """Vectorized closed form for a batch of angles of shape (S, N-1) -> (S, N).

    Amplitude k is ``e^{i(phi_1+..+phi_k)} sin(theta_1/2)..sin(theta_k/2) cos(theta_{k+1}/2)``
    with the last amplitude lacking the cosine factor.
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    s, m = theta.shape
    half = theta / 2
    sin_prod = np.ones((s, m + 1))
    sin_prod[:, 1:] = np.cumprod(np.sin(half), axis=1)
    cos_part = np.ones((s, m + 1))
    cos_part[:, :m] = np.cos(half)
    phase = np.zeros((s, m + 1))
    phase[:, 1:] = np.cumsum(phi, axis=1)
    return sin_prod * cos_part * np.exp(1j * phase)


def angles_of_state(psi):
    """Recover angles of a pure state; inverse of :func:`coherent_state` up to global phase."""
    psi = canonical_phase(np.asarray(psi, dtype=np.complex128) / np.linalg.norm(psi))
    n = psi.size
    mag = np.abs(psi)
    tail = np.sqrt(np.cumsum((mag**2)[::-1])[::-1])  # tail[k] = norm of psi[k:]
    theta = np.array([2 * np.arctan2(tail[k + 1], mag[k]) for k in range(n - 1)])
    arg = np.angle(psi)
    phi = np.diff(arg)
    return OmegaAngles(theta, phi)


def povm_element(state):
    """``E(Omega) = N |Omega><Omega|``."""
    psi = np.asarray(state, dtype=np.complex128)
    return psi.size * np.outer(psi, psi.conj())


def bloch_vector_of_state(state, basis):
    """``R_nu = <Omega|T_nu|Omega>``."""
    psi = np.asarray(state, dtype=np.complex128)
    if psi.shape != (basis.dim,):
        raise InvalidDimensionError(f"state of length {psi.size} does not match N={basis.dim}")
    return expectation_vector(psi, basis)


def theta_inverse_cdf(u, n, j):
    """Inverse CDF of ``p_j(theta) = (N-j) sin^{2(N-j)-1}(theta/2) cos(theta/2)``.

    The CDF is ``sin^{2(N-j)}(theta/2)``.
    """
    return 2.0 * np.arcsin(np.power(u, 1.0 / (2 * (n - j))))


def theta_density(theta, n, j):
    k = n - j
    return k * np.sin(theta / 2) ** (2 * k - 1) * np.cos(theta / 2)


def theta_cdf(theta, n, j):
    return np.sin(theta / 2) ** (2 * (n - j))


def _draw_chunk(rng, count, n):
    u = 1.0 - rng.random((count, n - 1))  # (0, 1]
    v = rng.random((count, n - 1))
    return theta_inverse_cdf(u, n, np.arange(1, n)), TWO_PI * v


def sample_haar_angles(n, count, seed, workers=1):
    """Haar-distributed angles as two arrays of shape (count, N-1)."""
    if n < 2:
        raise InvalidDimensionError("N must be >= 2")
    if count < 1:
        raise ValueError("sample count must be >= 1")
    parts = _rng.map_chunks(lambda g, lo, hi: _draw_chunk(g, hi - lo, n), seed, count, workers)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def sample_haar(n, count, seed, workers=1):
    """Haar samples on CP^{N-1} as a list of :class:`OmegaAngles`."""
    theta, phi = sample_haar_angles(n, count, seed, workers)
    return [OmegaAngles(t, p) for t, p in zip(theta, phi)]


def sample_haar_states(n, count, seed, workers=1):
    theta, phi = sample_haar_angles(n, count, seed, workers)
    return coherent_states(theta, phi)


@dataclass(frozen=True, eq=False)
class HaarAverage:
    """Monte Carlo mean over Haar samples with per-entry standard errors."""

    mean: np.ndarray
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    samples: int

    @property
    def stderr(self):
        return np.hypot(self.stderr_re, self.stderr_im)


def haar_average(fn, n, samples, seed, workers=1):
    """Average ``fn(states)`` over ``samples`` Haar-random coherent states.

    ``fn`` maps a batch of states of shape (S, N) to values of shape (S, ...).
    Sums are reduced in chunk order, so the result is independent of ``workers``.
    """
    if samples < 2:
        raise ValueError("need at least two samples for a standard error")

    def chunk(g, lo, hi):
        theta, phi = _draw_chunk(g, hi - lo, n)
        x = np.asarray(fn(coherent_states(theta, phi)), dtype=np.complex128)
        return x.sum(axis=0), (x.real**2).sum(axis=0), (x.imag**2).sum(axis=0)

    parts = _rng.map_chunks(chunk, seed, samples, workers)
    total = sum(p[0] for p in parts)
    sq_re = sum(p[1] for p in parts)
    sq_im = sum(p[2] for p in parts)
    mean = total / samples

    def se(sq, m):
        var = (sq - samples * m**2) / (samples - 1)
        return np.sqrt(np.maximum(var, 0.0) / samples)

    return HaarAverage(mean, se(sq_re, mean.real), se(sq_im, mean.imag), samples)


def povm_completeness(n, samples, seed, workers=1):
    """Monte Carlo estimate of the integral of ``E(Omega)`` over the Haar measure."""
    return haar_average(
        lambda psi: n * np.einsum("si,sj->sij", psi, psi.conj()), n, samples, seed, workers
    )
