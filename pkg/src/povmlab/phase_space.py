"""Stratonovich-Weyl phase space of an N-level system.

The kernel is ``Delta^s(Omega) = 1/N + 4 r_s R_nu T_nu`` with
``R_nu = <Omega|T_nu|Omega>`` and radius ``r_s = sqrt((N+1)^(1+s)) / 2``.
Because ``R_nu T_nu = (|Omega><Omega| - 1/N) / 2``, the kernel has eigenvalue
``1/N + 2 r_s (1 - 1/N)`` once and ``(1 - 2 r_s)/N`` with multiplicity N-1.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .coherent import (
    TWO_PI,
    OmegaAngles,
    angles_of_state,
    bloch_vector_of_state,
    coherent_state,
    coherent_states,
    sample_haar_angles,
)
from .errors import TOL, InvalidDimensionError
from .linalg import as_matrix, is_hermitian, validate_density_matrix
from .sun_algebra import expectation_vector, generator_basis


@dataclass(frozen=True)
class SWParams:
    dim: int
    s: float

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimensionError("N must be >= 2")
        r = self.radius
        if not (math.isfinite(r) and r > 0):
            raise ValueError(f"kernel radius is not finite and positive for s={self.s}")

    @property
    def radius(self):
        return 0.5 * math.sqrt((self.dim + 1) ** (1 + self.s))


@dataclass(frozen=True, eq=False)
class SWKernel:
    params: SWParams
    omega: OmegaAngles
    matrix: np.ndarray

    def eigenvalues_expected(self):
        n, r = self.params.dim, self.params.radius
        return np.array([(1 - 2 * r) / n] * (n - 1) + [1 / n + 2 * r * (1 - 1 / n)])


def _basis(params, basis):
    if basis is None:
        return generator_basis(params.dim)
    if basis.dim != params.dim:
        raise InvalidDimensionError("basis and phase-space dimensions differ")
    return basis


def sw_kernel(omega, params, basis=None):
    """Kernel matrix at phase-space point ``omega``."""
    basis = _basis(params, basis)
    if omega.dim != params.dim:
        raise InvalidDimensionError("angle count does not match N")
    r_vec = bloch_vector_of_state(coherent_state(omega), basis)
    m = np.eye(params.dim, dtype=np.complex128) / params.dim + 4 * params.radius * np.einsum(
        "m,mij->ij", r_vec, basis.generators
    )
    return SWKernel(params, omega, m)


def sw_kernels(states, params, basis=None):
    """Kernel matrices for a batch of coherent states of shape (S, N) -> (S, N, N)."""
    basis = _basis(params, basis)
    r_vec = expectation_vector(states, basis)
    return np.eye(params.dim) / params.dim + 4 * params.radius * np.einsum(
        "sm,mij->sij", r_vec, basis.generators
    )


def _check_hermitian(a, dim):
    a = as_matrix(a, dim)
    if not is_hermitian(a, TOL.state):
        raise ValueError("phase-space functions are defined for Hermitian operators only")
    return a


def quasiprob(a, omega, params, basis=None):
    """``W_A^s(Omega) = Tr[A Delta^s(Omega)]``."""
    a = _check_hermitian(a, params.dim)
    k = sw_kernel(omega, params, basis).matrix
    return float(np.einsum("ij,ji->", a, k).real)


def quasiprob_batch(a, states, params, basis=None):
    """Quasi-probabilities at a batch of coherent states, via ``Tr A / N + 4 r_s R . Tr(A T)``."""
    basis = _basis(params, basis)
    a = _check_hermitian(a, params.dim)
    r_vec = expectation_vector(states, basis)
    a_vec = np.einsum("mij,ji->m", basis.generators, a).real
    return np.trace(a).real / params.dim + 4 * params.radius * (r_vec @ a_vec)


def contraction_factor(dim, rounds=None, t=None, gamma=None):
    """``(1+N)^-n`` for POVM rounds, or ``exp(-N gamma t / 2)`` for depolarizing time."""
    if (rounds is None) == (t is None):
        raise ValueError("give exactly one of rounds or t")
    if rounds is not None:
        if rounds < 0:
            raise ValueError("rounds must be non-negative")
        return float(dim + 1) ** (-rounds)
    if t < 0 or gamma is None or gamma <= 0:
        raise ValueError("time evolution needs t >= 0 and gamma > 0")
    return math.exp(-0.5 * dim * gamma * t)


def w_evolution(w0, params, rounds=None, t=None, gamma=None):
    """Pointwise phase-space value after POVM rounds or depolarizing time."""
    g = contraction_factor(params.dim, rounds, t, gamma)
    n = params.dim
    out = 1 / n + g * (np.asarray(w0, dtype=float) - 1 / n)
    return float(out) if out.ndim == 0 else out


def w0_min_paper(params):
    """Anti-parallel Bloch-vector bound ``1/N - (N-1)/N (N+1)^((1+s)/2)``."""
    n, s = params.dim, params.s
    return 1 / n - (n - 1) / n * (n + 1) ** ((1 + s) / 2)


def w_min_physical(params):
    """Smallest kernel eigenvalue ``(1 - (N+1)^((1+s)/2)) / N``; the minimum over states."""
    n, s = params.dim, params.s
    return (1 - (n + 1) ** ((1 + s) / 2)) / n


def _log_ratio(n):
    # ln(N-1)/ln(N+1), exactly 0 at N = 2
    return 0.0 if n == 2 else math.log(n - 1) / math.log(n + 1)


def s_min(n):
    if n < 2:
        raise InvalidDimensionError("N must be >= 2")
    return -1 - 2 * _log_ratio(n)


def s_max(n):
    if n < 2:
        raise InvalidDimensionError("N must be >= 2")
    return 1 - 2 * _log_ratio(n)


def n_critical(params, eps=TOL.boundary):
    """Smallest number of rounds removing the most negative value, at least 1."""
    x = (1 + params.s) / 2 + _log_ratio(params.dim)
    return max(1, math.ceil(x - eps))


@dataclass(frozen=True)
class SingleShot:
    dim: int
    s: float
    s_min: float
    s_max: float
    n_c: int
    w0_min: float
    w1_min: float
    negativity_exists_paper: bool
    single_shot_paper: bool

    @property
    def single_shot_numeric(self):
        """Negative initially and non-negative after one round, both at the boundary tolerance."""
        return self.w0_min < -TOL.boundary and self.w1_min >= -TOL.boundary

    @property
    def region(self):
        return "blue" if self.single_shot_paper else "red"


def classify_single_shot(n, s, eps=TOL.boundary):
    """Closed-form single-shot region for (N, s) alongside the evolved minimum."""
    params = SWParams(n, s)
    lo, hi = s_min(n), s_max(n)
    w0 = w0_min_paper(params)
    return SingleShot(
        dim=n,
        s=s,
        s_min=lo,
        s_max=hi,
        n_c=n_critical(params),
        w0_min=w0,
        w1_min=float(w_evolution(w0, params, rounds=1)),
        negativity_exists_paper=s > lo + eps,
        single_shot_paper=(lo + eps < s <= hi + eps),
    )


def classification_table(dims, s_values):
    return [classify_single_shot(n, s) for n in dims for s in s_values]


@dataclass(frozen=True)
class SliceSpec:
    """Two varying angles, named like ``"theta_1"`` / ``"phi_2"``, over a fixed base point.

    The base point supplies the values of all other angles.
    """

    dim: int
    axes: tuple = ("theta_1", "phi_1")
    base: OmegaAngles = None

    def __post_init__(self):
        if self.base is None:
            m = self.dim - 1
            object.__setattr__(self, "base", OmegaAngles(np.full(m, np.pi / 2), np.zeros(m)))
        if self.base.dim != self.dim:
            raise ValueError("slice base point has the wrong dimension")
        if len(self.axes) != 2 or self.axes[0] == self.axes[1]:
            raise ValueError("a slice varies exactly two distinct angles")
        for a in self.axes:
            self._parse(a)

    def _parse(self, name):
        kind, _, idx = name.partition("_")
        if kind not in ("theta", "phi") or not idx.isdigit() or not 1 <= int(idx) <= self.dim - 1:
            raise ValueError(f"invalid slice axis {name!r} for N={self.dim}")
        return kind, int(idx) - 1

    def axis_values(self, name, resolution):
        kind, _ = self._parse(name)
        if kind == "theta":
            return np.linspace(0.0, np.pi, resolution)
        return np.linspace(0.0, TWO_PI, resolution, endpoint=False)

    def angles(self, resolution):
        """Grid of angles of shape (res, res, N-1) each for theta and phi."""
        a0 = self.axis_values(self.axes[0], resolution)
        a1 = self.axis_values(self.axes[1], resolution)
        g0, g1 = np.meshgrid(a0, a1, indexing="ij")
        theta = np.broadcast_to(self.base.theta, g0.shape + (self.dim - 1,)).copy()
        phi = np.broadcast_to(self.base.phi, g0.shape + (self.dim - 1,)).copy()
        for name, g in zip(self.axes, (g0, g1)):
            kind, i = self._parse(name)
            (theta if kind == "theta" else phi)[..., i] = g
        return a0, a1, theta, phi

    def to_dict(self):
        return {
            "dim": self.dim,
            "axes": list(self.axes),
            "base_theta": self.base.theta.tolist(),
            "base_phi": self.base.phi.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["dim"], tuple(d["axes"]), OmegaAngles(d["base_theta"], d["base_phi"]))


@dataclass(frozen=True, eq=False)
class PhaseSpaceGrid:
    params: SWParams
    slice: SliceSpec
    axis0: np.ndarray
    axis1: np.ndarray
    values: np.ndarray = field(repr=False)

    @property
    def minimum(self):
        return float(self.values.min())

    def argmin(self):
        i, j = np.unravel_index(np.argmin(self.values), self.values.shape)
        return self.axis0[i], self.axis1[j]


def grid_w(rho, params, slice_spec=None, resolution=64, basis=None):
    """Quasi-probability of ``rho`` on a regular grid over a 2-D slice of phase space."""
    if resolution < 8:
        raise ValueError("grid resolution must be at least 8")
    n = params.dim
    if slice_spec is None:
        slice_spec = SliceSpec(n)
    elif slice_spec.dim != n:
        raise ValueError("slice dimension does not match N")
    a0, a1, theta, phi = slice_spec.angles(resolution)
    states = coherent_states(theta.reshape(-1, n - 1), phi.reshape(-1, n - 1))
    w = quasiprob_batch(rho, states, params, basis).reshape(resolution, resolution)
    if not np.all(np.isfinite(w)):
        raise FloatingPointError("non-finite quasi-probability on grid")
    return PhaseSpaceGrid(params, slice_spec, a0, a1, w)


def min_w_closed_form(rho, params):
    n, r = params.dim, params.radius
    lam = np.linalg.eigvalsh(validate_density_matrix(rho, n))[0]
    return (1 - 2 * r) / n + 2 * r * lam


def min_w_over_phase_space(rho, params, seed=0, coarse=4096, starts=4):
    """Numerical minimum of ``W_rho^s`` over phase space.

    Random coarse search followed by BFGS refinement from the best ``starts``
    points. The objective is smooth in unconstrained angles, so no bounds are
    imposed during refinement; the optimum is wrapped back to the chart.
    Returns ``(value, OmegaAngles)``.
    """
    rho = validate_density_matrix(rho, params.dim)
    n, r = params.dim, params.radius
    m = n - 1

    def overlap(x):
        psi = coherent_states(x[:m], x[m:])[0]
        return float(np.vdot(psi, rho @ psi).real)

    theta, phi = sample_haar_angles(n, coarse, seed)
    psi = coherent_states(theta, phi)
    vals = np.einsum("si,ij,sj->s", psi.conj(), rho, psi).real
    best_x, best_v = None, np.inf
    for i in np.argsort(vals)[:starts]:
        res = minimize(overlap, np.concatenate([theta[i], phi[i]]), method="BFGS",
                       options={"gtol": 1e-12})
        if res.fun < best_v:
            best_x, best_v = res.x, res.fun
    # unconstrained angles leave the chart; map back through the state
    angles = angles_of_state(coherent_states(best_x[:m], best_x[m:])[0])
    return (1 - 2 * r) / n + 2 * r * best_v, angles


def reconstruct_operator(omegas, values, params, basis=None):
    """Monte Carlo inverse map ``N * mean_i W_i Delta^{-s}(Omega_i)``.

    ``omegas`` is either a pair of arrays ``(theta, phi)`` of shape (S, N-1) or a
    sequence of OmegaAngles sampled from the Haar measure.
    """
    if isinstance(omegas, tuple) and len(omegas) == 2 and np.ndim(omegas[0]) == 2:
        theta, phi = omegas
    else:
        theta = np.array([o.theta for o in omegas])
        phi = np.array([o.phi for o in omegas])
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 10_000:
        raise ValueError("reconstruction needs at least 1e4 samples")
    if theta.shape[0] != values.shape[0]:
        raise ValueError("sample and value counts differ")
    dual = SWParams(params.dim, -params.s)
    n = params.dim
    total = np.zeros((n, n), dtype=np.complex128)
    step = 1 << 15
    for lo in range(0, values.shape[0], step):
        states = coherent_states(theta[lo : lo + step], phi[lo : lo + step])
        k = sw_kernels(states, dual, basis)
        total += np.einsum("s,sij->ij", values[lo : lo + step], k)
    return n * total / values.shape[0]
