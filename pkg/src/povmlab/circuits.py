"""Density-matrix simulation of the coherent-state measurement circuits.

Three protocols estimate ``<Omega|rho|Omega>`` or ``W_rho^s(Omega)``:

* direct: apply ``U_N(Omega)^-1`` and post-select ``|0>``;
* swap test: ancilla + reference register holding ``|Omega>`` and a controlled-SWAP;
* LCU: Hadamard tests on the unitaries of a decomposition of the kernel.

Every circuit is simulated on the full register space; no trace shortcuts.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .coherent import OmegaAngles, coherent_state, coherent_unitary
from .errors import TOL, InvalidDimensionError
from .linalg import hermitize, is_unitary, projector, validate_density_matrix
from .phase_space import SWParams, sw_kernel
from .sun_algebra import expectation_vector, generator_basis

MAX_SWAP_DIM = 32

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
PAULI_Z = np.diag([1.0, -1.0]).astype(np.complex128)
S_DAG = np.diag([1.0, -1j])
KET0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
KET1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)


def rz(angle):
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def ry(angle):
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rotation_decomposition(theta, phi):
    """Z-Y-Z factors ``(Rz(phi - pi/2), Ry(theta), Rz(pi/2 - phi))``.

    Their ordered product equals the two-level block of
    ``exp[-i theta/2 (cos(phi) X + sin(phi) Y)]`` exactly.
    """
    return rz(phi - np.pi / 2), ry(theta), rz(np.pi / 2 - phi)


def phase_insensitive_match(a, b, atol=TOL.structural):
    """True when ``a = e^{i chi} b`` for unitaries of equal size."""
    return abs(abs(np.trace(a @ b.conj().T)) - a.shape[0]) <= atol


@dataclass(frozen=True)
class Register:
    label: str
    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimensionError("register dimension must be >= 2")


@dataclass(eq=False)
class MultiRegisterState:
    registers: list
    matrix: np.ndarray

    def __post_init__(self):
        total = math.prod(r.dim for r in self.registers)
        if self.matrix.shape != (total, total):
            raise InvalidDimensionError("matrix size does not match register dimensions")

    @classmethod
    def product(cls, registers, factors):
        m = factors[0]
        for f in factors[1:]:
            m = np.kron(m, f)
        return cls(list(registers), np.asarray(m, dtype=np.complex128))

    def apply(self, gate):
        self.matrix = gate @ self.matrix @ gate.conj().T
        return self

    def local(self, op, index):
        """Embed ``op`` on register ``index`` with identities elsewhere."""
        out = np.ones((1, 1), dtype=np.complex128)
        for i, r in enumerate(self.registers):
            out = np.kron(out, op if i == index else np.eye(r.dim))
        return out

    def expectation(self, op):
        return float(np.einsum("ij,ji->", op, self.matrix).real)

    def check(self, atol=TOL.state):
        validate_density_matrix(self.matrix, atol=atol)
        return self


@dataclass(frozen=True)
class ProtocolResult:
    expectation: float
    success_probability: float
    shots: int = 0
    empirical_estimate: float = None
    alpha: float = None


def _z_shots(z, shots, g):
    """Empirical <Z> from ``shots`` Bernoulli draws with P(+1) = (1 + z)/2."""
    p = min(max((1.0 + z) / 2.0, 0.0), 1.0)
    k = g.binomial(shots, p)
    return 2.0 * k / shots - 1.0


def _rng_for(seed, index=0):
    if seed is None:
        raise ValueError("shot sampling needs an explicit seed")
    if isinstance(seed, np.random.Generator):
        return seed
    return _rng.stream(seed, index)


def direct_protocol(rho, omega, shots=0, seed=None):
    """Apply ``U_N(Omega)^-1`` and post-select the outcome ``|0>``."""
    rho = validate_density_matrix(rho)
    if omega.dim != rho.shape[0]:
        raise InvalidDimensionError("state and angle dimensions differ")
    u = coherent_unitary(omega)
    rotated = u.conj().T @ rho @ u
    p = float(rotated[0, 0].real)
    emp = None
    if shots > 0:
        emp = _rng_for(seed).binomial(shots, min(max(p, 0.0), 1.0)) / shots
    return ProtocolResult(p, p, shots, emp)


def swap_operator(n):
    """``sum_kl |l><k| (x) |k><l|`` on two N-level registers."""
    s = np.zeros((n * n, n * n), dtype=np.complex128)
    for k in range(n):
        for l in range(n):
            s[l * n + k, k * n + l] = 1.0
    return s


def controlled(u):
    """``|0><0| (x) 1 + |1><1| (x) U`` with the control as the leading qubit."""
    d = u.shape[0]
    return np.kron(KET0, np.eye(d)) + np.kron(KET1, u)


def swap_test_protocol(rho, omega, shots=0, seed=None):
    """Ancilla-assisted POVM readout; ``<Z_A> = <Omega|rho|Omega>`` deterministically."""
    rho = validate_density_matrix(rho)
    n = rho.shape[0]
    if omega.dim != n:
        raise InvalidDimensionError("state and angle dimensions differ")
    if n > MAX_SWAP_DIM:
        raise MemoryError(f"swap test limited to N <= {MAX_SWAP_DIM} (matrix dim 2N^2)")
    regs = [Register("A", 2), Register("S", n), Register("R", n)]
    state = MultiRegisterState.product(regs, [KET0, rho, projector(coherent_state(omega))])
    h = state.local(HADAMARD, 0)
    v_povm = controlled(swap_operator(n))
    state.apply(h).apply(v_povm).apply(h)
    z = state.expectation(state.local(PAULI_Z, 0))
    emp = _z_shots(z, shots, _rng_for(seed)) if shots > 0 else None
    return ProtocolResult(z, 1.0, shots, emp)


def hadamard_test(rho, u, part="real", shots=0, seed=None):
    """Hadamard test: ``<Z_A>`` equals Re Tr[rho U] or, with S^dagger, Im Tr[rho U]."""
    rho = validate_density_matrix(rho)
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != rho.shape:
        raise InvalidDimensionError("unitary and state dimensions differ")
    if not is_unitary(u, TOL.state):
        raise ValueError("Hadamard test requires a unitary")
    if part not in ("real", "imaginary"):
        raise ValueError("part must be 'real' or 'imaginary'")
    regs = [Register("A", 2), Register("S", rho.shape[0])]
    state = MultiRegisterState.product(regs, [KET0, rho])
    h = state.local(HADAMARD, 0)
    state.apply(h).apply(controlled(u))
    if part == "imaginary":
        state.apply(state.local(S_DAG, 0))
    state.apply(h)
    z = state.expectation(state.local(PAULI_Z, 0))
    emp = _z_shots(z, shots, _rng_for(seed)) if shots > 0 else None
    return ProtocolResult(z, 1.0, shots, emp)


@dataclass(frozen=True, eq=False)
class LCUDecomposition:
    weights: np.ndarray
    unitaries: list
    target: np.ndarray = field(repr=False)
    mode: str = "two-unitary"

    @property
    def alpha(self):
        return float(np.abs(self.weights).sum())

    @property
    def residual(self):
        """Spectral norm of ``sum_j w_j U_j - Delta``."""
        total = np.einsum("j,jik->ik", self.weights, np.array(self.unitaries))
        return float(np.linalg.norm(total - self.target, 2))

    @property
    def index_qubits(self):
        """Qubits of an index register addressing N^2 terms."""
        n = self.target.shape[0]
        return math.ceil(math.log2(n * n))


def lcu_decomposition(kernel, mode="two-unitary", basis=None):
    """Write the kernel as a weighted sum of unitaries.

    ``two-unitary``: with ``m = ||Delta||`` and ``D = Delta/m``,
    ``Delta = m/2 (V+ + V-)`` where ``V+- = D +- i sqrt(1 - D^2)``.
    ``paper-weights``: ``w_0 = 1/N`` with the identity and ``w_nu = 4 i r_s R_nu``
    with ``exp(-i pi/2 T_nu)``; this sum generally misses the kernel, see ``residual``.
    """
    delta = hermitize(kernel.matrix)
    n = delta.shape[0]
    if mode == "two-unitary":
        lam, vec = np.linalg.eigh(delta)
        m = float(np.abs(lam).max())
        d = lam / m
        root = np.sqrt(np.clip(1.0 - d * d, 0.0, None))
        v_plus = (vec * (d + 1j * root)) @ vec.conj().T
        v_minus = (vec * (d - 1j * root)) @ vec.conj().T
        return LCUDecomposition(np.array([m / 2, m / 2], dtype=np.complex128),
                                [v_plus, v_minus], delta, mode)
    if mode == "paper-weights":
        basis = generator_basis(n) if basis is None else basis
        r_vec = expectation_vector(coherent_state(kernel.omega), basis)
        weights = np.concatenate([[1 / n], 4j * kernel.params.radius * r_vec])
        unitaries = [np.eye(n, dtype=np.complex128)]
        for t in basis.generators:
            lam, vec = np.linalg.eigh(t)
            unitaries.append((vec * np.exp(-0.5j * np.pi * lam)) @ vec.conj().T)
        return LCUDecomposition(weights.astype(np.complex128), unitaries, delta, mode)
    raise ValueError(f"unknown LCU mode {mode!r}")


def lcu_protocol(rho, omega, params, shots=0, seed=None, basis=None):
    """Estimate ``Tr[rho Delta^s(Omega)]`` from Hadamard tests on the two-unitary LCU.

    Each unitary gets a real-part and an imaginary-part test with ``shots`` shots
    each; estimates are recombined with the complex weights. ``alpha`` is the
    weight norm, so ``expectation / alpha`` is the normalized ancilla signal.
    """
    rho = validate_density_matrix(rho, params.dim)
    lcu = lcu_decomposition(sw_kernel(omega, params, basis))
    exact = 0j
    emp = 0j
    for j, (w, u) in enumerate(zip(lcu.weights, lcu.unitaries)):
        re = hadamard_test(rho, u, "real", shots, _rng_for(seed, 2 * j) if shots else None)
        im = hadamard_test(rho, u, "imaginary", shots, _rng_for(seed, 2 * j + 1) if shots else None)
        exact += w * (re.expectation + 1j * im.expectation)
        if shots:
            emp += w * (re.empirical_estimate + 1j * im.empirical_estimate)
    return ProtocolResult(float(exact.real), 1.0, shots, float(emp.real) if shots else None,
                          lcu.alpha)


@dataclass(frozen=True)
class ProtocolRow:
    omega: OmegaAngles
    exact: float
    swap: float
    empirical: float
    shots: int
    success_probability: float

    @property
    def delta(self):
        return abs(self.exact - self.swap)


def protocol_batch(rho, omegas, shots=0, seed=None):
    """Run direct and swap-test protocols over many phase-space points.

    Shot noise for sample ``i`` uses substream ``i`` of ``seed``.
    """
    rows = []
    for i, om in enumerate(omegas):
        d = direct_protocol(rho, om)
        sw = swap_test_protocol(rho, om, shots, _rng_for(seed, i) if shots else None)
        rows.append(ProtocolRow(om, d.expectation, sw.expectation, sw.empirical_estimate,
                                shots, d.success_probability))
    return rows
