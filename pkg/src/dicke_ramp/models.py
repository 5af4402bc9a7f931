"""Model Hamiltonians: spin-boson (Dicke), spin-only (Lipkin), parity, targets.

Conventions (angular frequencies in rad/ms, times in ms, hbar = 1):

    H(t) = -delta a_dag a - (g0/sqrt(N)) (a + a_dag) Sz + B(t) Sx + Bz Sz

with detuning delta < 0 in this work.  The derived spin-spin coupling is
J = g0^2/delta (negative, ferromagnetic), the critical transverse field is
B_c = g0^2/|delta| = |J|, and each Sz = m sector of the B = 0 Hamiltonian
is a harmonic ladder displaced by alpha_m = (g0/(sqrt(N) delta)) m with
sector energy (J/N) m^2.  The weak-field ground state is therefore the
spin-phonon cat pairing m = +N/2 with phonon displacement -alpha0 and
m = -N/2 with +alpha0, where alpha0 = g0 sqrt(N)/(2 delta).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import BasisMismatch, TruncationError
from .hilbert import (
    ProductBasis,
    SpinBasis,
    StateVector,
    build_collective_spin_ops,
    build_mode_ops,
    displaced_fock_amplitudes,
)


@dataclass(frozen=True)
class DickeParams:
    """Physical parameters: ion count N, detuning delta, coupling g0,
    longitudinal field Bz (all angular frequencies in rad/ms)."""

    N: int
    delta: float
    g0: float
    Bz: float = 0.0
    allow_positive_delta: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("need N >= 1")
        if self.g0 < 0:
            raise ValueError("need g0 >= 0 (g0 = 0 is the decoupled limit)")
        if self.delta >= 0 and not self.allow_positive_delta:
            raise ValueError("delta must be negative (set allow_positive_delta to override)")

    @property
    def J(self):
        """Signed spin-spin coupling g0^2/delta (negative here)."""
        return self.g0**2 / self.delta

    @property
    def B_c(self):
        """Critical transverse field g0^2/|delta| = |J| (thermodynamic limit)."""
        return self.g0**2 / abs(self.delta)

    @property
    def alpha0(self):
        """Cat displacement amplitude g0 sqrt(N) / (2 delta), signed."""
        return self.g0 * np.sqrt(self.N) / (2.0 * self.delta)

    @property
    def spin_displacement(self):
        """Per-unit-m phonon displacement u = g0/(sqrt(N) delta) of the
        Sz = m sector ground state (alpha_m = -u m for the minus coupling)."""
        return self.g0 / (np.sqrt(self.N) * self.delta)

    @classmethod
    def from_J(cls, N, delta, J_mag, Bz=0.0):
        """Build from |J| at fixed delta: g0 = sqrt(|J * delta|)."""
        return cls(N=N, delta=delta, g0=float(np.sqrt(abs(J_mag * delta))), Bz=Bz)


@dataclass(frozen=True)
class GeneratorSpec:
    """Collective rotation generator G = v . S with v a unit Bloch vector."""

    theta: float
    phi: float

    @property
    def v(self):
        return np.array(
            [
                np.sin(self.phi) * np.cos(self.theta),
                np.sin(self.phi) * np.sin(self.theta),
                np.cos(self.phi),
            ]
        )

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(theta=float(np.arctan2(v[1], v[0])), phi=float(np.arccos(np.clip(v[2], -1, 1))))


@dataclass(frozen=True)
class HamiltonianSplit:
    """H(t) = H_static + B(t) * H_drive, both sparse and Hermitian."""

    basis: object
    H_static: sp.csr_matrix
    H_drive: sp.csr_matrix

    def at_field(self, B):
        return (self.H_static + B * self.H_drive).tocsr()


def build_dicke(params, basis):
    """Assemble the spin-boson Hamiltonian split on a ProductBasis.

    H_static = -delta a_dag a - (g0/sqrt(N)) (a + a_dag) Sz + Bz Sz and
    H_drive = Sx, so H(B) = H_static + B * H_drive.
    """
    if basis.spin.N != params.N:
        raise BasisMismatch(f"basis N={basis.spin.N} vs params N={params.N}")
    sx, _, sz = build_collective_spin_ops(basis.spin)
    a, a_dag, n_op = build_mode_ops(basis.mode)
    eye_s = sp.identity(basis.spin.dimension, format="csr")
    eye_m = sp.identity(basis.mode.dimension, format="csr")
    h_static = (
        -params.delta * sp.kron(n_op, eye_s)
        - (params.g0 / np.sqrt(params.N)) * sp.kron(a + a_dag, sz)
        + params.Bz * sp.kron(eye_m, sz)
    )
    h_drive = sp.kron(eye_m, sx)
    return HamiltonianSplit(basis, h_static.tocsr(), h_drive.tocsr())


def build_lipkin(params, spin):
    """Spin-only Hamiltonian (J/N) Sz^2 + Bz Sz with drive Sx (J signed)."""
    sx, _, sz = build_collective_spin_ops(spin)
    h_static = (params.J / params.N) * (sz @ sz) + params.Bz * sz
    return HamiltonianSplit(spin, h_static.tocsr(), sx.tocsr())


def spin_flip_unitary(spin):
    """exp(i pi Sx) on the spin sector, from the spectral decomposition of Sx.

    Diagonal in the Sx eigenbasis with exact eigenphases e^{i pi mu}
    (mu rounded to the half-integer ladder), so it is unitary to machine
    precision and squares to (-1)^N.
    """
    sx, _, _ = build_collective_spin_ops(spin)
    vals, vecs = np.linalg.eigh(sx.toarray())
    mu = np.round(2.0 * vals) / 2.0  # exact half-integer Sx eigenvalues
    return (vecs * np.exp(1j * np.pi * mu)) @ vecs.conj().T


def parity_operator(basis):
    """Conserved parity exp(i pi (a_dag a x 1 + 1 x Sx)).

    Built exactly from the known eigenstructure: diagonal (-1)^n on the
    Fock factor, spin rotation exp(i pi Sx) on the spin factor.  Works for
    a ProductBasis (full operator) or a SpinBasis (spin-only parity for the
    Lipkin model).
    """
    if isinstance(basis, SpinBasis):
        return sp.csr_matrix(spin_flip_unitary(basis))
    flip = spin_flip_unitary(basis.spin)
    signs = sp.diags((-1.0) ** np.arange(basis.mode.dimension))
    return sp.kron(signs, sp.csr_matrix(flip)).tocsr()


def cat_state_target(params, basis, sign=+1):
    """Weak-field ground-state cat of the assembled Hamiltonian.

    (|-alpha0, 0> x |+N/2>_z + sign * |+alpha0, 0> x |-N/2>_z) / sqrt(2),
    i.e. the m = +N/2 branch carries phonon displacement -alpha0 (positive
    for delta < 0), consistent with the minus-sign spin-phonon coupling of
    build_dicke.  The two branches are orthogonal in the spin factor, so the
    normalization is exact.  Raises TruncationError when alpha0 leaks into
    the Fock cutoff.
    """
    if basis.spin.N != params.N:
        raise BasisMismatch(f"basis N={basis.spin.N} vs params N={params.N}")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    n_max = basis.mode.n_max
    up = displaced_fock_amplitudes(-params.alpha0, 0, n_max)
    down = displaced_fock_amplitudes(+params.alpha0, 0, n_max)
    amps = np.zeros(basis.dimension, dtype=complex)
    ns = basis.spin.dimension
    amps[basis.index(0, params.N / 2.0) :: ns][: n_max + 1] = up / np.sqrt(2.0)
    amps[basis.index(0, -params.N / 2.0) :: ns][: n_max + 1] += sign * down / np.sqrt(2.0)
    return StateVector(basis, amps)


def spin_cat_target(spin, sign=+1):
    """Spin-only cat (|+N/2>_z + sign |-N/2>_z)/sqrt(2), the B -> 0 Lipkin
    ground state."""
    amps = np.zeros(spin.dimension, dtype=complex)
    amps[-1] = 1.0 / np.sqrt(2.0)
    amps[0] = sign / np.sqrt(2.0)
    return StateVector(spin, amps)


def sector_displacements(params, spin):
    """Phonon displacement alpha_m = -u m of every Sz = m sector ground
    state, in storage (increasing m) order."""
    return -params.spin_displacement * spin.m_values()
