"""Post-processing: quantum Fisher information, disentangling, field scans.

QFI follows the spectral form F_Q = 2 sum_{k,l} (l_k - l_l)^2/(l_k + l_l)
|<k|G|l>|^2 with pairs of negligible weight skipped; for pure states this
reduces to 4 Var(G), which doubles as an internal cross-check.  Generator
optimization over collective rotations G = v . S is exact: F_Q(v) = v^T M v
for a 3x3 real symmetric M, so the best generator is the top eigenvector
of M (no angle grid needed).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import BasisMismatch, NoBracket, ProtocolError
from .hilbert import (
    DensityMatrix,
    ModeBasis,
    ProductBasis,
    SpinBasis,
    StateVector,
    build_collective_spin_ops,
    build_mode_ops,
    partial_trace_mode_states,
)
from .models import DickeParams, GeneratorSpec, cat_state_target
from .propagators import resonant_apply, zero_field_apply

RANK_CUTOFF = 1e-12


# ---------------------------------------------------------------------------
# quantum Fisher information
# ---------------------------------------------------------------------------

def _spin_operators_for(basis):
    sx, sy, sz = build_collective_spin_ops(
        basis.spin if isinstance(basis, ProductBasis) else basis
    )
    if isinstance(basis, ProductBasis):
        eye_m = sp.identity(basis.mode.dimension, format="csr")
        return [sp.kron(eye_m, s).tocsr() for s in (sx, sy, sz)]
    return [sx, sy, sz]


@dataclass
class SpectralDecomposition:
    """Eigenvalues (descending, rank-cut at 1e-12) and vectors of a state."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    basis: object

    @classmethod
    def from_density_matrix(cls, rho):
        lam, vecs = np.linalg.eigh(rho.matrix)
        order = np.argsort(lam)[::-1]
        lam, vecs = lam[order], vecs[:, order]
        keep = lam > RANK_CUTOFF
        return cls(lam[keep], vecs[:, keep], rho.basis)

    @classmethod
    def from_ensemble(cls, basis, states, weights):
        """Low-rank decomposition of sum_k w_k |psi_k><psi_k| via the Gram
        matrix, avoiding the dense dim x dim density matrix."""
        cols = np.stack(
            [np.sqrt(w) * s.amplitudes for w, s in zip(weights, states)], axis=1
        )
        gram = cols.conj().T @ cols
        lam, c = np.linalg.eigh(gram)
        order = np.argsort(lam)[::-1]
        lam, c = lam[order], c[:, order]
        keep = lam > RANK_CUTOFF
        lam, c = lam[keep], c[:, keep]
        vecs = cols @ (c / np.sqrt(lam))
        return cls(lam, vecs, basis)

    def reconstruction_error(self, rho):
        approx = (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T
        return float(np.abs(approx - rho.matrix).max())


def _pair_weights(lam):
    s = lam[:, None] + lam[None, :]
    d = lam[:, None] - lam[None, :]
    w = np.zeros_like(s)
    ok = s > RANK_CUTOFF
    w[ok] = d[ok] ** 2 / s[ok]
    return w


def qfi(state, generator):
    """QFI of a StateVector, DensityMatrix or SpectralDecomposition for a
    fixed collective generator (GeneratorSpec or explicit operator)."""
    if isinstance(generator, GeneratorSpec):
        basis = state.basis
        ops = _spin_operators_for(basis)
        v = generator.v
        g = v[0] * ops[0] + v[1] * ops[1] + v[2] * ops[2]
    else:
        g = generator
    if isinstance(state, StateVector):
        mean = state.expectation(g).real
        sq = np.vdot(g @ state.amplitudes, g @ state.amplitudes).real
        return 4.0 * (sq - mean * mean)
    dec = (
        state
        if isinstance(state, SpectralDecomposition)
        else SpectralDecomposition.from_density_matrix(state)
    )
    gv = g @ dec.eigenvectors
    a = dec.eigenvectors.conj().T @ gv
    w = _pair_weights(dec.eigenvalues)
    cross = 2.0 * np.sum(w * np.abs(a) ** 2)
    # pairs with the (rank-cut) zero-eigenvalue subspace carry weight
    # (lam_k - 0)^2/(lam_k + 0) = lam_k, twice per pair
    g2 = np.einsum("ik,ik->k", gv.conj(), gv).real
    inplane = (np.abs(a) ** 2).sum(axis=1)
    leak = 4.0 * np.sum(dec.eigenvalues * (g2 - inplane))
    return float(cross + leak)


def qfi_optimized(state):
    """(max F_Q, best GeneratorSpec) over collective rotations v . S.

    Builds M_ij = 2 sum_{k,l} w_kl Re(<k|S_i|l><l|S_j|k>) and takes its top
    eigenpair; for pure states M is the (4x) symmetrized spin covariance.
    """
    basis = state.basis if not isinstance(state, SpectralDecomposition) else state.basis
    ops = _spin_operators_for(basis)
    if isinstance(state, StateVector):
        psi = state.amplitudes
        gpsi = [op @ psi for op in ops]
        means = np.array([np.vdot(psi, gp).real for gp in gpsi])
        M = np.zeros((3, 3))
        for i in range(3):
            for j in range(3):
                M[i, j] = 4.0 * (
                    0.5 * (np.vdot(gpsi[i], gpsi[j]) + np.vdot(gpsi[j], gpsi[i])).real
                    - means[i] * means[j]
                )
    else:
        dec = (
            state
            if isinstance(state, SpectralDecomposition)
            else SpectralDecomposition.from_density_matrix(state)
        )
        gv = [op @ dec.eigenvectors for op in ops]
        a = [dec.eigenvectors.conj().T @ g for g in gv]
        w = _pair_weights(dec.eigenvalues)
        lam = dec.eigenvalues
        M = np.zeros((3, 3))
        for i in range(3):
            for j in range(3):
                # <k|S_i|l><l|S_j|k> = a_i[k,l] conj(a_j[k,l]) for Hermitian S_j
                cross = 2.0 * np.sum(w * np.real(a[i] * np.conj(a[j])))
                g2 = np.einsum("dk,dk->k", gv[i].conj(), gv[j]).real
                inplane = np.real(a[i] * np.conj(a[j])).sum(axis=1)
                M[i, j] = cross + 4.0 * np.sum(lam * (g2 - inplane))
    M = (M + M.T) / 2.0
    vals, vecs = np.linalg.eigh(M)
    best = vecs[:, -1]
    return float(vals[-1]), GeneratorSpec.from_vector(best)


# ---------------------------------------------------------------------------
# disentangling protocol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisentangleSpec:
    """Hold protocol mapping phonon branches back to vacuum at B = 0.

    quench_2delta: detuning quenched to 2 delta, hold t_d = pi/|2 delta|;
    resonant: detuning quenched to zero with the drive phase shifted by
    pi/2, hold t_d = 1/|delta|.
    """

    variant: str = "quench_2delta"

    def hold_time(self, params):
        if self.variant == "quench_2delta":
            return np.pi / abs(2.0 * params.delta)
        if self.variant == "resonant":
            return 1.0 / abs(params.delta)
        raise ValueError(f"unknown variant {self.variant!r}")


@dataclass
class CoherenceReport:
    """Reduced spin state after disentangling, with the extremal coherence."""

    reduced: DensityMatrix
    coherence: float  # |rho_{N/2, -N/2}|
    residual_displacement: float  # max |<a>| over branches
    residual_occupation: float  # ensemble <n> after the protocol
    meta: dict = field(default_factory=dict)


def _apply_disentangle(params, basis, amps, spec):
    t_d = spec.hold_time(params)
    if spec.variant == "quench_2delta":
        return zero_field_apply(params, basis, amps, t_d, delta=2.0 * params.delta)
    return resonant_apply(params, basis, amps, t_d)


def _branch_displacement(basis, amps, a_mode):
    """Largest |<a>| conditioned on a populated Sz column.

    The whole-state <a> of a parity-symmetric cat vanishes identically, so
    the protocol residual is judged per spin sector."""
    cols = basis.reshape(amps)
    worst = 0.0
    for i in range(cols.shape[1]):
        pop = np.vdot(cols[:, i], cols[:, i]).real
        if pop > 1e-9:
            worst = max(worst, abs(np.vdot(cols[:, i], a_mode @ cols[:, i])) / pop)
    return worst


def disentangle(states, params, spec=DisentangleSpec(), weights=None, self_test=True):
    """Apply the hold protocol to ramp-end states and report spin coherence.

    states: StateVector or list of them (thermal branches) on ProductBasis.
    The ideal-cat self-test applies the same protocol to the exact cat on
    the same cutoff and raises ProtocolError if the residual phonon
    displacement exceeds 1e-3 |alpha0|.
    """
    if isinstance(states, StateVector):
        states = [states]
    if weights is None:
        weights = [1.0] * len(states)
    basis = states[0].basis
    if not isinstance(basis, ProductBasis):
        raise BasisMismatch("disentangle acts on spin-phonon states")

    a_op, _, n_op = build_mode_ops(basis.mode)
    if self_test and abs(params.alpha0) > 0:
        cat = cat_state_target(params, basis)
        out = _apply_disentangle(params, basis, cat.amplitudes, spec)
        residual = _branch_displacement(basis, out, a_op)
        if residual > 1e-3 * abs(params.alpha0):
            raise ProtocolError(
                f"ideal-cat self-test leaves branch |<a>| = {residual:.3e} "
                f"(> 1e-3 |alpha0| = {1e-3 * abs(params.alpha0):.3e})"
            )

    n_full = sp.kron(n_op, sp.identity(basis.spin.dimension)).tocsr()
    finals = []
    max_disp = 0.0
    occupation = 0.0
    for w, s in zip(weights, states):
        out_amps = _apply_disentangle(params, basis, s.amplitudes, spec)
        out = StateVector(basis, out_amps)
        finals.append(out)
        max_disp = max(max_disp, _branch_displacement(basis, out_amps, a_op))
        occupation += w * np.vdot(out_amps, n_full @ out_amps).real
    reduced = partial_trace_mode_states(basis, finals, weights)
    coherence = abs(reduced.matrix[-1, 0])
    report = CoherenceReport(
        reduced=reduced,
        coherence=float(coherence),
        residual_displacement=float(max_disp),
        residual_occupation=float(occupation),
        meta={"variant": spec.variant, "hold_time": spec.hold_time(params)},
    )
    return finals, report


# ---------------------------------------------------------------------------
# closed-form decoherence / thermal fidelity estimates
# ---------------------------------------------------------------------------

def fidelity_estimates(N, Gamma, t, n_bar):
    """(dephasing bound, thermal factor, combined) for cat preparation.

    dephasing bound (1 + e^{-N Gamma t})/2, thermal factor 1/(n_bar + 1);
    Gamma in 1/ms, t in ms.
    """
    if min(N, t, n_bar) < 0 or Gamma < 0:
        raise ValueError("arguments must be >= 0")
    dephasing = (1.0 + np.exp(-N * Gamma * t)) / 2.0
    thermal = 1.0 / (n_bar + 1.0)
    return dephasing, thermal, dephasing * thermal


# ---------------------------------------------------------------------------
# longitudinal-field scans
# ---------------------------------------------------------------------------

def _ramp_and_disentangle(params, schedule, n_max=None, spec=None, sample_times=None,
                          variant="quench_2delta"):
    from .evolve import EvolutionSpec, evolve_thermal

    run_spec = EvolutionSpec(
        model="dicke",
        params=params,
        schedule=schedule,
        sample_times=np.array([0.0, schedule.tau_ramp]) if sample_times is None else sample_times,
        n_max=n_max,
    )
    result = evolve_thermal(run_spec)
    finals, report = disentangle(
        result.branch_finals,
        params,
        DisentangleSpec(variant),
        weights=result.branch_weights,
        self_test=False,
    )
    return result, finals, report


def bz_resilience_scan(params, schedule, bz_grid, n_max=None, variant="quench_2delta"):
    """Spin coherence after ramp + disentangle vs longitudinal field.

    Returns a list of (Bz, coherence).  Bz enters the Hamiltonian during
    the ramp and the hold; the curve is symmetric under Bz -> -Bz with the
    branches swapped, so grids are conventionally >= 0.
    """
    from dataclasses import replace as dc_replace

    out = []
    for bz in bz_grid:
        p = dc_replace(params, Bz=float(bz))
        _, _, report = _ramp_and_disentangle(p, schedule, n_max=n_max, variant=variant)
        out.append((float(bz), report.coherence))
    return out


def balance_scan(params, schedule, offset_grid, n_max=None):
    """<Sz> at the ramp end vs a constant longitudinal offset, with the zero
    crossing interpolated linearly between the bracketing grid points.

    Models the experimental drive-frequency offset used to balance the
    final magnetization distribution; params.Bz acts as a stray field and
    the returned crossing sits at -Bz_stray.
    """
    from dataclasses import replace as dc_replace

    from .evolve import EvolutionSpec, evolve_thermal

    offsets = np.asarray(offset_grid, dtype=float)
    sz = []
    for off in offsets:
        p = dc_replace(params, Bz=params.Bz + float(off))
        spec = EvolutionSpec(
            model="dicke", params=p, schedule=schedule,
            sample_times=np.array([0.0, schedule.tau_ramp]), n_max=n_max,
        )
        res = evolve_thermal(spec)
        sz.append(res.Sz[-1])
    sz = np.asarray(sz)
    sign_change = np.nonzero(np.diff(np.sign(sz)) != 0)[0]
    if sign_change.size == 0:
        raise NoBracket("final <Sz> does not change sign on the offset grid")
    i = int(sign_change[0])
    x0, x1, y0, y1 = offsets[i], offsets[i + 1], sz[i], sz[i + 1]
    crossing = x0 - y0 * (x1 - x0) / (y1 - y0)
    return offsets, sz, float(crossing)
