"""Finite Hilbert space for a collective spin coupled to one truncated boson mode.

The spin sector is the fully symmetric S = N/2 manifold (dimension N+1,
states ordered by increasing magnetization m = -N/2 ... +N/2).  The boson
sector is a Fock ladder truncated at n_max.  Product states are flattened
phonon-major, i = n*(N+1) + (m + N/2), so each fixed-n spin block is
contiguous.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from .errors import BasisMismatch, CutoffError, TruncationError

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class SpinBasis:
    """Symmetric collective-spin basis for N spin-1/2 particles (S = N/2)."""

    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"need N >= 1, got {self.N}")

    @property
    def dimension(self):
        return self.N + 1

    @property
    def S(self):
        return self.N / 2.0

    def m_values(self):
        """Magnetization labels in storage order, -N/2 ... +N/2."""
        return np.arange(self.N + 1) - self.N / 2.0


@dataclass(frozen=True)
class ModeBasis:
    """Truncated Fock basis |0> ... |n_max| for the boson mode."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError(f"need n_max >= 0, got {self.n_max}")

    @property
    def dimension(self):
        return self.n_max + 1

    def n_values(self):
        return np.arange(self.n_max + 1)


@dataclass(frozen=True)
class ProductBasis:
    """Phonon-major product of a ModeBasis and a SpinBasis."""

    spin: SpinBasis
    mode: ModeBasis

    @property
    def dimension(self):
        return self.spin.dimension * self.mode.dimension

    def index(self, n, m):
        """Flattened index of |n> x |m>; m is the physical magnetization."""
        col = int(round(m + self.spin.N / 2.0))
        return n * self.spin.dimension + col

    def reshape(self, amplitudes):
        """View a flat amplitude array as (n, m) with m along axis 1."""
        return np.asarray(amplitudes).reshape(self.mode.dimension, self.spin.dimension)


def is_hermitian(op, tol=HERMITICITY_TOL):
    """Relative deviation of a sparse/dense operator from its adjoint <= tol."""
    diff = op - op.conj().T
    if sp.issparse(diff):
        num = abs(diff).max() if diff.nnz else 0.0
        den = abs(op).max()
    else:
        num = np.abs(diff).max()
        den = np.abs(op).max()
    return num <= tol * max(den, 1.0)


@dataclass
class StateVector:
    """Complex amplitudes over a SpinBasis, ModeBasis or ProductBasis."""

    basis: object
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dimension,):
            raise BasisMismatch(
                f"amplitude shape {amps.shape} vs basis dimension {self.basis.dimension}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        return StateVector(self.basis, self.amplitudes / self.norm)

    def overlap(self, other):
        """<self|other>; both states must share a basis."""
        if self.basis != other.basis:
            raise BasisMismatch("states live on different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def expectation(self, op):
        return complex(np.vdot(self.amplitudes, op @ self.amplitudes))


@dataclass
class DensityMatrix:
    """Dense Hermitian density matrix over a basis.

    Validates trace = 1 (1e-10), hermiticity (1e-12) and spectral positivity
    (eigenvalues >= -1e-10) unless validate=False.
    """

    basis: object
    matrix: np.ndarray
    validate: bool = field(default=True, repr=False)

    TRACE_TOL = 1e-10
    EIG_TOL = 1e-10

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        d = self.basis.dimension
        if rho.shape != (d, d):
            raise BasisMismatch(f"matrix shape {rho.shape} vs basis dimension {d}")
        if self.validate:
            tr = np.trace(rho).real
            if abs(tr - 1.0) > self.TRACE_TOL:
                raise ValueError(f"trace {tr} deviates from 1 beyond {self.TRACE_TOL}")
            if not is_hermitian(rho):
                raise ValueError("density matrix is not Hermitian to 1e-12")
            if np.linalg.eigvalsh(rho).min() < -self.EIG_TOL:
                raise ValueError("density matrix has eigenvalue < -1e-10")
        rho.flags.writeable = False
        object.__setattr__(self, "matrix", rho)

    @property
    def trace(self):
        return float(np.trace(self.matrix).real)

    def expectation(self, op):
        op = op.toarray() if sp.issparse(op) else op
        return complex(np.trace(op @ self.matrix))


@dataclass(frozen=True)
class ThermalSpec:
    """Thermal boson ensemble: mean occupation n_bar, retained mass cutoff."""

    n_bar: float
    weight_cutoff: float = 0.999

    def __post_init__(self):
        if self.n_bar < 0:
            raise ValueError("n_bar must be >= 0")
        if not 0 < self.weight_cutoff <= 1:
            raise ValueError("weight_cutoff must lie in (0, 1]")


def build_collective_spin_ops(spin):
    """Collective spin matrices (Sx, Sy, Sz) in the Sz eigenbasis, S = N/2.

    Sz is diagonal with entries m; Sx = (S+ + S-)/2 and Sy = (S+ - S-)/(2i)
    with the standard ladder elements sqrt(S(S+1) - m(m+1)).
    """
    S = spin.S
    m = spin.m_values()
    off = np.sqrt(S * (S + 1.0) - m[:-1] * (m[:-1] + 1.0))
    sz = sp.diags(m)
    s_plus = sp.diags(off, -1)  # S+|m> = sqrt(...)|m+1>, m increases along the index
    sx = 0.5 * (s_plus + s_plus.T)
    sy = -0.5j * (s_plus - s_plus.T)
    return sx.tocsr(), sy.tocsr(), sz.tocsr()


def build_mode_ops(mode):
    """Truncated (a, a_dag, n_op); a|n> = sqrt(n)|n-1>, n_op = a_dag a."""
    if mode.n_max < 1:
        raise ValueError("need n_max >= 1 for ladder operators")
    root = np.sqrt(np.arange(1, mode.n_max + 1, dtype=float))
    a = sp.diags(root, 1)
    a_dag = sp.diags(root, -1)
    n_op = sp.diags(np.arange(mode.n_max + 1, dtype=float))
    return a.tocsr(), a_dag.tocsr(), n_op.tocsr()


_DISPLACEMENT_EIG_CACHE = {}


def _displacement_eig(n_max):
    # Hermitian generator i(a - a_dag); eigendecomposition is cached so that
    # repeated displacements on one cutoff cost a single dense solve.
    if n_max not in _DISPLACEMENT_EIG_CACHE:
        root = np.sqrt(np.arange(1, n_max + 1, dtype=float))
        gen = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        gen += 1j * np.diag(root, 1)   # i a
        gen += -1j * np.diag(root, -1)  # -i a_dag
        vals, vecs = np.linalg.eigh(gen)
        _DISPLACEMENT_EIG_CACHE[n_max] = (vals, vecs)
    return _DISPLACEMENT_EIG_CACHE[n_max]


def displacement_matrix(alpha, n_max):
    """Dense matrix exponential of alpha a_dag - alpha* a on the cutoff space.

    Complex alpha is handled by conjugating the |alpha| displacement with
    Fock-space phase rotations, so one cached eigendecomposition per cutoff
    serves every displacement amplitude.
    """
    r = abs(alpha)
    if r == 0.0:
        return np.eye(n_max + 1, dtype=complex)
    vals, vecs = _displacement_eig(n_max)
    core = (vecs * np.exp(1j * r * vals)) @ vecs.conj().T
    theta = np.angle(alpha)
    if theta != 0.0:
        phase = np.exp(1j * theta * np.arange(n_max + 1))
        core = (phase[:, None] * core) * phase.conj()[None, :]
    return core


def displaced_fock_amplitudes(alpha, n, n_max, rel_cutoff_population=1e-6):
    """Fock amplitudes of D(alpha)|n>, guarded against cutoff leakage."""
    if n > n_max:
        raise TruncationError(f"Fock index {n} beyond cutoff {n_max}")
    col = displacement_matrix(alpha, n_max)[:, n].copy()
    top_pop = abs(col[-1]) ** 2
    if top_pop > rel_cutoff_population * np.sum(np.abs(col) ** 2):
        raise TruncationError(
            f"population {top_pop:.3e} at cutoff n_max={n_max} for alpha={alpha}, n={n}"
        )
    return col


def displaced_fock_state(basis, alpha, n=0):
    """Displaced Fock state D(alpha)|n> on a ModeBasis (or the mode factor
    of a ProductBasis paired with a spin state elsewhere)."""
    if isinstance(basis, ProductBasis):
        raise BasisMismatch(
            "displaced_fock_state builds the mode factor only; "
            "combine with a spin state via product_state()"
        )
    amps = displaced_fock_amplitudes(alpha, n, basis.n_max)
    return StateVector(basis, amps / np.linalg.norm(amps))


def coherent_spin_state(spin, axis):
    """Maximal-projection spin state along a unit 3-vector axis = (x, y, z).

    Sz-basis amplitudes sqrt(C(N, S-m)) cos(theta/2)^(S+m) sin(theta/2)^(S-m)
    e^{+i (S-m) phi}; axis = +z gives |m = +N/2>, axis = -x the binomial state
    with <Sx> = -N/2.
    """
    axis = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
        raise ValueError("axis must be normalized")
    theta = np.arccos(np.clip(axis[2], -1.0, 1.0))
    phi = np.arctan2(axis[1], axis[0])
    S = spin.S
    m = spin.m_values()
    # stable log-binomial: C(N, S-m) over half-integer-safe integer offsets
    k = np.round(S - m).astype(int)
    log_binom = gammaln(spin.N + 1) - gammaln(k + 1) - gammaln(spin.N - k + 1)
    with np.errstate(divide="ignore"):
        log_c = np.where(S + m > 0, (S + m) * np.log(max(np.cos(theta / 2.0), 1e-300)), 0.0)
        log_s = np.where(S - m > 0, (S - m) * np.log(max(np.sin(theta / 2.0), 1e-300)), 0.0)
    amps = np.exp(0.5 * log_binom + log_c + log_s) * np.exp(1j * (S - m) * phi)
    # exact zeros at the poles instead of 1e-300 underflow remnants
    if np.cos(theta / 2.0) == 0.0:
        amps = np.where(S + m > 0, 0.0, amps)
    if np.sin(theta / 2.0) == 0.0:
        amps = np.where(S - m > 0, 0.0, amps)
    return StateVector(spin, amps / np.linalg.norm(amps))


def product_state(basis, mode_state, spin_state):
    """|mode> x |spin> on a ProductBasis (phonon-major flattening)."""
    if mode_state.basis != basis.mode or spin_state.basis != basis.spin:
        raise BasisMismatch("factor states do not match the product basis")
    amps = np.kron(mode_state.amplitudes, spin_state.amplitudes)
    return StateVector(basis, amps)


def thermal_weights(spec, n_max):
    """Geometric thermal weights p_n = n_bar^n / (n_bar+1)^(n+1).

    Returns [(n, p_n)] truncated at the first n whose cumulative mass
    reaches spec.weight_cutoff.  Weights are left unnormalized; the caller
    sees the residual mass as 1 - sum(p).  Raises CutoffError when n_max
    cannot reach the cutoff.
    """
    nb = spec.n_bar
    if nb == 0.0:
        return [(0, 1.0)]
    weights = []
    cumulative = 0.0
    for n in range(n_max + 1):
        p = nb**n / (nb + 1.0) ** (n + 1)
        weights.append((n, p))
        cumulative += p
        if cumulative >= spec.weight_cutoff:
            return weights
    raise CutoffError(
        f"cumulative mass {cumulative:.6f} < cutoff {spec.weight_cutoff} at n_max={n_max}"
    )


def partial_trace_mode(rho):
    """Trace the phonon factor out of a ProductBasis density matrix."""
    basis = rho.basis
    if not isinstance(basis, ProductBasis):
        raise BasisMismatch("partial_trace_mode needs a ProductBasis density matrix")
    nm = basis.mode.dimension
    ns = basis.spin.dimension
    blocks = rho.matrix.reshape(nm, ns, nm, ns)
    reduced = np.einsum("nani->ai", blocks)
    return DensityMatrix(basis.spin, reduced, validate=False)


def partial_trace_mode_states(basis, states, weights=None):
    """Reduced spin density matrix of an ensemble of ProductBasis pure states.

    Avoids materializing the full spin x phonon density matrix; equivalent
    to partial_trace_mode(sum_k w_k |psi_k><psi_k|).
    """
    if weights is None:
        weights = [1.0] * len(states)
    ns = basis.spin.dimension
    reduced = np.zeros((ns, ns), dtype=complex)
    for w, psi in zip(weights, states):
        if psi.basis != basis:
            raise BasisMismatch("ensemble state on a different basis")
        cols = basis.reshape(psi.amplitudes)
        reduced += w * (cols.conj().T @ cols).T
    return DensityMatrix(basis.spin, reduced, validate=False)
