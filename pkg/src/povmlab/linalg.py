"""Dense-matrix helpers shared by the channel, phase-space and circuit modules."""
import numpy as np

from .errors import TOL, InvalidDimensionError, InvalidStateError


def as_matrix(a, dim=None):
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise InvalidDimensionError(f"expected a {dim}x{dim} matrix, got {m.shape}")
    return m


def is_hermitian(m, atol=TOL.structural):
    return bool(np.allclose(m, m.conj().T, rtol=0.0, atol=atol))


def hermitize(m):
    """Symmetrize (M + M^dagger)/2 to remove round-off drift."""
    return 0.5 * (m + m.conj().T)


def validate_density_matrix(rho, dim=None, atol=TOL.state):
    """Return ``rho`` as a complex array after checking it is a valid state.

    Raises InvalidStateError when ``rho`` is not Hermitian, not unit trace or
    has an eigenvalue below ``-atol``.
    """
    m = as_matrix(rho, dim)
    if not is_hermitian(m, atol):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(m)
    if abs(tr - 1.0) > atol:
        raise InvalidStateError(f"density matrix has trace {tr.real:.3g}, expected 1")
    lam = np.linalg.eigvalsh(hermitize(m))
    if lam[0] < -atol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lam[0]:.3g}")
    return m


def maximally_mixed(dim):
    return np.eye(dim, dtype=np.complex128) / dim


def basis_projector(dim, k):
    p = np.zeros((dim, dim), dtype=np.complex128)
    p[k, k] = 1.0
    return p


def projector(psi):
    psi = np.asarray(psi, dtype=np.complex128)
    return np.outer(psi, psi.conj())


def trace_distance(a, b):
    return 0.5 * float(np.abs(np.linalg.eigvalsh(hermitize(a - b))).sum())


def random_pure_state(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density_matrix(dim, rng, rank=None):
    """Random state from the induced (Hilbert-Schmidt for full rank) measure."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return hermitize(rho / np.trace(rho).real)


def random_hermitian(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return hermitize(g)


def random_unitary(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def is_unitary(u, atol=TOL.structural):
    u = np.asarray(u)
    return bool(np.allclose(u @ u.conj().T, np.eye(u.shape[0]), rtol=0.0, atol=atol))
