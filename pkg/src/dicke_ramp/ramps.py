"""Transverse-field ramp-down schedules: LIN, EXP and the gap-weighted LAA.

All schedules start at B0 and end at (or are clamped to) zero after
tau_ramp.  The LAA profile solves dB/dt = -Delta(B)^2 / gamma with the
normalization gamma = tau_ramp / integral_0^B0 dB / Delta(B)^2, so the
sweep is slowest where the gap is smallest; the law is separable, so the
schedule is obtained by cumulative quadrature and monotone inversion
rather than an ODE stepper.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import CoverageError, RangeError, SingularGap

LAA_GRID_POINTS = 4096


@dataclass
class RampSchedule:
    """Sampled monotone ramp B(t) with protocol metadata.

    samples hold (t, B) nodes covering [0, tau_ramp]; value() evaluates the
    schedule with monotone (PCHIP) interpolation between nodes and is exact
    at the nodes.
    """

    protocol: str
    B0: float
    tau_ramp: float
    times: np.ndarray
    fields: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._interp = PchipInterpolator(self.times, self.fields, extrapolate=False)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -1e-12) or np.any(t > self.tau_ramp * (1 + 1e-12)):
            raise RangeError(f"times outside [0, {self.tau_ramp}] ms")
        out = self._interp(np.clip(t, self.times[0], self.times[-1]))
        return float(out) if out.ndim == 0 else out

    def __call__(self, t):
        return self.value(t)


def sample_schedule(schedule, times):
    """Schedule values at the requested times (must lie in [0, tau_ramp])."""
    return np.atleast_1d(schedule.value(np.asarray(times, dtype=float)))


def build_lin(B0, tau_ramp):
    """Linear ramp B(t) = B0 (1 - t/tau_ramp)."""
    if B0 <= 0 or tau_ramp <= 0:
        raise ValueError("need B0 > 0 and tau_ramp > 0")
    t = np.linspace(0.0, tau_ramp, 257)
    return RampSchedule("LIN", B0, tau_ramp, t, B0 * (1.0 - t / tau_ramp))


def build_exp(B0, tau_ramp, tau):
    """Exponential ramp B(t) = B0 e^{-t/tau}, clamped to zero at tau_ramp.

    The analytic exponential never reaches zero; the experiment switches the
    field off at the end of the ramp, so the final node is clamped and the
    residual fraction e^{-tau_ramp/tau} is reported in meta.
    """
    if B0 <= 0 or tau_ramp <= 0 or tau <= 0:
        raise ValueError("need positive B0, tau_ramp, tau")
    t = np.linspace(0.0, tau_ramp, 1025)
    B = B0 * np.exp(-t / tau)
    residual = B[-1] / B0
    B[-1] = 0.0
    return RampSchedule(
        "EXP", B0, tau_ramp, t, B, meta={"tau": tau, "clamp_residual_fraction": residual}
    )


def _laa_refined_grid(B0, gap_B, gap_values):
    """B grid for the LAA quadrature, log-densified around the gap minimum
    (the 1/Delta^2 weight concentrates the ramp time there)."""
    B_min = float(gap_B[np.argmin(gap_values)])
    base = np.linspace(0.0, B0, LAA_GRID_POINTS // 2)
    spans = np.geomspace(1e-4 * B0, B0, LAA_GRID_POINTS // 4)
    around = np.concatenate([B_min - spans, B_min + spans])
    grid = np.concatenate([base, around, [B_min]])
    grid = np.unique(np.clip(grid, 0.0, B0))
    return grid


def build_laa(B0, tau_ramp, gapcurve):
    """Local-adiabatic schedule from the main-gap curve of the target model.

    Solves dB/dt = -(1/gamma) Delta(B)^2 with
    gamma = tau_ramp / int_0^B0 dB/Delta^2 by cumulative trapezoidal
    quadrature of t(B) = gamma int_B^B0 dB'/Delta(B')^2 on a refined grid,
    then inverts the monotone map.  meta records gamma and the gap source.
    """
    if B0 <= 0 or tau_ramp <= 0:
        raise ValueError("need B0 > 0 and tau_ramp > 0")
    gap_B = np.asarray(gapcurve.B_grid, dtype=float)
    gap_v = np.asarray(gapcurve.main_gap, dtype=float)
    if gap_B[0] > 1e-9 * B0 or gap_B[-1] < B0 * (1 - 1e-12):
        raise CoverageError(
            f"gap curve covers [{gap_B[0]}, {gap_B[-1]}], ramp needs [0, {B0}]"
        )
    if np.any(gap_v <= 0.0):
        raise SingularGap("main gap must be positive on the ramp interval")
    gap_of_B = PchipInterpolator(gap_B, gap_v, extrapolate=False)
    grid = _laa_refined_grid(B0, gap_B, gap_v)
    delta2 = gap_of_B(grid) ** 2
    if np.any(delta2 <= 0.0):
        raise SingularGap("interpolated gap vanishes inside (0, B0)")
    w = 1.0 / delta2
    # cumulative integral from B0 down to each grid node (descending in B)
    rev_b = grid[::-1]
    seg = -np.diff(rev_b) * 0.5 * (w[::-1][1:] + w[::-1][:-1])
    integral = np.concatenate([[0.0], np.cumsum(seg)])
    gamma = tau_ramp / integral[-1]
    t_of_B = gamma * integral  # ascending in t, rev_b descending from B0 to 0
    t_nodes, first = np.unique(t_of_B, return_index=True)
    b_nodes = rev_b[first]
    # merge nodes separated by less than ~fp resolution in t: where the gap
    # is huge the quadrature segments underflow and near-duplicate abscissae
    # would give the monotone interpolant effectively infinite slope
    keep = np.concatenate([[True], np.diff(t_nodes) > 1e-12 * tau_ramp])
    keep[0] = keep[-1] = True
    t_nodes, b_nodes = t_nodes[keep].copy(), b_nodes[keep].copy()
    t_nodes[0], t_nodes[-1] = 0.0, tau_ramp  # pin fp endpoints exactly
    b_nodes[-1] = 0.0
    return RampSchedule(
        "LAA",
        B0,
        tau_ramp,
        t_nodes,
        b_nodes,
        meta={"gamma": gamma, "gap_source": gapcurve.model, "grid_points": grid.size},
    )
