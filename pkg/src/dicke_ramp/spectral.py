"""Parity-resolved low-lying spectra and gap curves of the ramp Hamiltonians.

The "main gap" is the distance from the ground state to the lowest excited
state sharing its parity; the "low gap" goes to the lowest excited state of
opposite parity (nearly degenerate with the ground state below the critical
point).  Ramp optimization consumes the main gap.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, EdgeMinimum, ParityAmbiguous
from .hilbert import ModeBasis, ProductBasis, SpinBasis
from .models import build_dicke, build_lipkin, parity_operator

DENSE_DIMENSION_LIMIT = 3000
PARITY_THRESHOLD = 0.9
DEGENERACY_TOL = 1e-10


def fock_cutoff(params, headroom=0.0):
    """Fock cutoff policy for spectral runs.

    n_max = max(8 |alpha0|^2, |alpha0|^2 + 10 |alpha0| + 20) evaluated with
    an optional headroom added to |alpha0| (used for thermally excited
    initial states); runs double it once to confirm convergence.
    """
    a = abs(params.alpha0) + headroom
    return int(np.ceil(max(8.0 * a * a, a * a + 10.0 * a + 20.0)))


@dataclass
class SpectrumSlice:
    """k lowest eigenpairs at one field value, with parity expectations."""

    B: float
    eigenvalues: np.ndarray
    parities: np.ndarray
    eigenvectors: Optional[np.ndarray] = None


@dataclass
class GapCurve:
    """Main/low gap samples over a transverse-field grid (all >= 0)."""

    B_grid: np.ndarray
    main_gap: np.ndarray
    low_gap: np.ndarray
    model: str = "lipkin"
    meta: dict = field(default_factory=dict)


def lowest_eigenpairs(H, k, parity=None):
    """k lowest eigenpairs of a Hermitian sparse matrix.

    Dense LAPACK below DENSE_DIMENSION_LIMIT, ARPACK Lanczos (shift-free,
    smallest-algebraic, full reorthogonalization inside the implicitly
    restarted iteration) above.  When a parity operator is supplied the
    eigenvectors are rotated inside numerically degenerate clusters so each
    carries a sharp parity expectation.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    dim = H.shape[0]
    if dim <= DENSE_DIMENSION_LIMIT:
        dense = H.toarray() if sp.issparse(H) else np.asarray(H)
        if np.abs(dense.imag).max() if np.iscomplexobj(dense) else 0.0:
            vals, vecs = la.eigh(dense, subset_by_index=[0, k - 1])
        else:
            vals, vecs = la.eigh(dense.real, subset_by_index=[0, k - 1])
    else:
        try:
            vals, vecs = spla.eigsh(
                H.tocsc() if sp.issparse(H) else H,
                k=k,
                which="SA",
                ncv=max(4 * k + 8, 40),
                maxiter=5000,
                tol=0,
            )
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"Lanczos failed after {exc.args}", residuals=getattr(exc, "eigenvalues", None)
            ) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    vecs = vecs.astype(complex)
    if parity is None:
        parities = np.full(k, np.nan + 0j)
    else:
        vecs, parities = _sharpen_parity(vals, vecs, parity)
    return vals, vecs, parities


def _sharpen_parity(vals, vecs, parity):
    """Parity expectations per eigenvector, rotating degenerate clusters.

    Clusters are eigenvalue runs closer than DEGENERACY_TOL; any state whose
    parity magnitude stays below PARITY_THRESHOLD is re-clustered with a
    looser energy window before giving up with ParityAmbiguous.
    """
    pv = parity @ vecs
    parities = np.einsum("ij,ij->j", vecs.conj(), pv)

    def rotate(cluster):
        sub = vecs[:, cluster]
        p_sub = sub.conj().T @ (parity @ sub)
        _, rot = np.linalg.eig(p_sub)
        # unitary normal matrix: orthonormalize the eigenvectors for safety
        rot, _ = np.linalg.qr(rot)
        vecs[:, cluster] = sub @ rot
        block = vecs[:, cluster]
        parities[cluster] = np.einsum("ij,ij->j", block.conj(), parity @ block)

    scale = max(abs(vals[0]), abs(vals[-1]), 1.0)
    for tol in (DEGENERACY_TOL, 1e-7 * scale):
        if np.all(np.abs(parities) >= PARITY_THRESHOLD):
            break
        start = 0
        for i in range(1, len(vals) + 1):
            if i == len(vals) or vals[i] - vals[i - 1] > tol:
                cluster = list(range(start, i))
                if len(cluster) > 1 and np.any(
                    np.abs(parities[cluster]) < PARITY_THRESHOLD
                ):
                    rotate(cluster)
                start = i
    if np.any(np.abs(parities) < PARITY_THRESHOLD):
        bad = np.abs(parities).min()
        raise ParityAmbiguous(
            f"parity magnitude {bad:.3f} below {PARITY_THRESHOLD} after degenerate rotation"
        )
    return vecs, parities


def _gaps_from_slice(vals, parities):
    """(main_gap, low_gap) from parity-classified ascending levels."""
    p0 = parities[0]
    same = np.abs(parities[1:] - p0) < 0.5
    main = low = None
    for idx in range(1, len(vals)):
        if same[idx - 1] and main is None:
            main = vals[idx] - vals[0]
        if not same[idx - 1] and low is None:
            low = vals[idx] - vals[0]
        if main is not None and low is not None:
            break
    return main, low


def _spectrum_at_field(split, parity, B, k):
    vals, vecs, parities = lowest_eigenpairs(split.at_field(B), k, parity=parity)
    return SpectrumSlice(B=B, eigenvalues=vals, parities=parities, eigenvectors=vecs)


def _hamiltonian_for(params, model, n_max=None):
    if model == "dicke":
        n_max = fock_cutoff(params) if n_max is None else n_max
        basis = ProductBasis(SpinBasis(params.N), ModeBasis(n_max))
        return build_dicke(params, basis), parity_operator(basis)
    if model == "lipkin":
        spin = SpinBasis(params.N)
        return build_lipkin(params, spin), parity_operator(spin)
    raise ValueError(f"unknown model {model!r}")


def _gap_point(args):
    split, parity, B, k = args
    slc = _spectrum_at_field(split, parity, B, k)
    main, low = _gaps_from_slice(slc.eigenvalues, slc.parities)
    if main is None or low is None:
        # widen the window until both parity classes appear
        for bigger in (2 * k, 4 * k):
            slc = _spectrum_at_field(split, parity, B, bigger)
            main, low = _gaps_from_slice(slc.eigenvalues, slc.parities)
            if main is not None and low is not None:
                break
    if main is None or low is None:
        raise ParityAmbiguous(f"could not find both parity classes at B={B}")
    return main, low


def gap_curve(params, model, B_grid, k=6, n_max=None, threads=1):
    """Main/low gap curves over B_grid for the chosen model.

    Requires Bz = 0 (parity must be conserved).  Grid points are
    independent; with threads > 1 they run in a process pool and are
    assembled in input order.
    """
    if params.Bz != 0.0:
        raise ParityAmbiguous("gap classification needs Bz = 0")
    split, parity = _hamiltonian_for(params, model, n_max=n_max)
    B_grid = np.asarray(B_grid, dtype=float)
    jobs = [(split, parity, B, k) for B in B_grid]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_gap_point, jobs, chunksize=1))
    else:
        results = [_gap_point(j) for j in jobs]
    main = np.array([r[0] for r in results])
    low = np.array([r[1] for r in results])
    meta = {"model": model, "k": k}
    if model == "dicke":
        meta["n_max"] = split.basis.mode.n_max
    return GapCurve(B_grid=B_grid, main_gap=main, low_gap=low, model=model, meta=meta)


def critical_field_estimate(curve):
    """argmin of the main gap via a local quadratic fit around the grid
    minimum (finite-size proxy for the critical field)."""
    return _quadratic_min(curve.B_grid, curve.main_gap)[0]


def _quadratic_min(x, y):
    i = int(np.argmin(y))
    if i == 0 or i == len(x) - 1:
        raise EdgeMinimum(f"main-gap minimum at grid boundary (index {i})")
    sel = slice(max(0, i - 2), min(len(x), i + 3))
    coeff = np.polyfit(x[sel], y[sel], 2)
    if coeff[0] <= 0:  # flat or concave sample: fall back to the grid point
        return x[i], y[i]
    x_min = -coeff[1] / (2 * coeff[0])
    x_min = min(max(x_min, x[i - 1]), x[i + 1])
    y_min = np.polyval(coeff, x_min)
    return float(x_min), float(min(y_min, y[i]))


def min_main_gap(params, model, B_window=None, coarse=41, fine=17, k=6, n_max=None):
    """Minimum of the main gap over B: coarse scan, refined window, fit.

    Returns (B_at_min, gap_min).  The default window brackets the critical
    region [0.2, 2.2] |J|.
    """
    if B_window is None:
        B_window = (0.2 * abs(params.J), 2.2 * abs(params.J))
    grid = np.linspace(B_window[0], B_window[1], coarse)
    curve = gap_curve(params, model, grid, k=k, n_max=n_max)
    i = int(np.argmin(curve.main_gap))
    if i == 0 or i == len(grid) - 1:
        raise EdgeMinimum("window does not bracket the main-gap minimum")
    fine_grid = np.linspace(grid[i - 1], grid[i + 1], fine)
    fine_curve = gap_curve(params, model, fine_grid, k=k, n_max=n_max)
    return _quadratic_min(fine_curve.B_grid, fine_curve.main_gap)


def gap_ratio_scan(J_mag, N, delta_list, k=6, confirm_doubling=False):
    """Dicke/Lipkin minimum-main-gap ratio vs detuning at fixed |J|.

    g0 is recomputed as sqrt(|J delta|) per detuning so the effective
    spin-spin coupling stays constant.  Returns a list of
    (delta, ratio, diagnostics) with ratio -> 1 from below as |delta| grows.
    """
    from .models import DickeParams

    ref = DickeParams.from_J(N=N, delta=delta_list[0], J_mag=J_mag)
    _, lipkin_min = min_main_gap(ref, "lipkin")
    out = []
    for delta in delta_list:
        if delta >= 0:
            raise ValueError("detunings must be negative")
        params = DickeParams.from_J(N=N, delta=delta, J_mag=J_mag)
        n_max = fock_cutoff(params)
        B_star, dicke_min = min_main_gap(params, "dicke", n_max=n_max, k=k)
        diag = {"B_at_min": B_star, "n_max": n_max}
        if confirm_doubling:
            _, doubled = min_main_gap(params, "dicke", n_max=2 * n_max, k=k)
            diag["doubling_rel_change"] = abs(doubled - dicke_min) / max(dicke_min, 1e-300)
        out.append((delta, dicke_min / lipkin_min, diag))
    return out
