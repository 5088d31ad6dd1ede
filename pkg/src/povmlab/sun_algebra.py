"""Generalized Gell-Mann basis of su(N) and the identities built on it.

Generators are normalized to ``Tr(T_mu T_nu) = delta_mu_nu / 2``. The order is
fixed: symmetric off-diagonal pairs ``(j, k)`` with ``j < k`` in lexicographic
order, then the antisymmetric pairs in the same order, then the ``N - 1``
diagonal generators. For ``N = 2`` this is ``(X, Y, Z) / 2``.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import TOL, InvalidDimensionError, InvalidStateError
from .linalg import as_matrix, is_hermitian


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    dim: int
    generators: np.ndarray  # shape (N**2 - 1, N, N)

    def __len__(self):
        return self.generators.shape[0]

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, i):
        return self.generators[i]


@lru_cache(maxsize=None)
def _gell_mann(n):
    pairs = list(combinations(range(n), 2))
    gens = []
    for j, k in pairs:
        g = np.zeros((n, n), dtype=np.complex128)
        g[j, k] = g[k, j] = 0.5
        gens.append(g)
    for j, k in pairs:
        g = np.zeros((n, n), dtype=np.complex128)
        g[j, k] = -0.5j
        g[k, j] = 0.5j
        gens.append(g)
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1.0
        d[l] = -l
        gens.append(np.diag(d * np.sqrt(1.0 / (2 * l * (l + 1)))).astype(np.complex128))
    out = np.array(gens)
    out.setflags(write=False)
    return out


def generator_basis(n):
    """Return the ``N**2 - 1`` generalized Gell-Mann generators of su(N)."""
    if int(n) != n or n < 2:
        raise InvalidDimensionError(f"su(N) basis needs integer N >= 2, got {n!r}")
    n = int(n)
    return GeneratorBasis(n, _gell_mann(n))


def casimir_contraction(basis):
    """Sum of ``T_nu T_nu`` over the basis; equals ``(N^2-1)/(2N)`` times identity."""
    t = basis.generators
    return np.einsum("mij,mjk->ik", t, t)


def twirl(x, basis):
    """Explicit sum ``sum_nu T_nu X T_nu``."""
    x = as_matrix(x, basis.dim)
    t = basis.generators
    return np.einsum("mij,jk,mkl->il", t, x, t)


def twirl_closed_form(x, dim):
    x = as_matrix(x, dim)
    return np.trace(x) * np.eye(dim) / 2 - x / (2 * dim)


def bloch_decompose(rho, basis, atol=TOL.state):
    """Coefficients ``b_nu = 2 Tr(rho T_nu)`` of a unit-trace Hermitian matrix."""
    rho = as_matrix(rho, basis.dim)
    if abs(np.trace(rho) - 1.0) > atol:
        raise InvalidStateError("Bloch decomposition requires a unit-trace matrix")
    if not is_hermitian(rho, atol):
        raise InvalidStateError("Bloch decomposition requires a Hermitian matrix")
    return 2.0 * np.einsum("mij,ji->m", basis.generators, rho).real


def bloch_compose(b, basis):
    """``1/N + sum_nu b_nu T_nu``. Positivity is not checked."""
    b = np.asarray(b, dtype=float)
    if b.shape != (len(basis),):
        raise InvalidDimensionError(
            f"expected {len(basis)} Bloch components for N={basis.dim}, got {b.shape}"
        )
    return np.eye(basis.dim, dtype=np.complex128) / basis.dim + np.einsum(
        "m,mij->ij", b, basis.generators
    )


def expectation_vector(states, basis):
    """``<psi|T_nu|psi>`` for a single state (shape (N,)) or a batch (S, N)."""
    psi = np.asarray(states, dtype=np.complex128)
    return np.einsum("...i,mij,...j->...m", psi.conj(), basis.generators, psi).real
