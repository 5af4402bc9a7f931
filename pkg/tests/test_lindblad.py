"""Permutation-invariant master equation vs brute-force 2^N Lindblad oracle."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dicke_ramp.errors import CostGuard
from dicke_ramp.evolve import EvolutionSpec, evolve_lindblad_lipkin, evolve_thermal
from dicke_ramp.lindblad import (
    DecoherenceParams,
    DickeBlocks,
    cg1,
    multiplicity,
    spin_cat_fidelity,
)
from dicke_ramp.models import DickeParams
from dicke_ramp.ramps import build_lin
from dicke_ramp.units import khz_to_angular as k2a

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
SM = np.array([[0, 0], [1, 0]], dtype=complex)  # |down><up|, up = index 0
SP = SM.conj().T


def embed(op, site, N):
    out = np.array([[1.0 + 0j]])
    for k in range(N):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def collective(op, N):
    return sum(embed(op, i, N) for i in range(N))


def brute_force_run(N, params, schedule, dec, times):
    """Full 2^N Lindblad integration; returns observable series dict."""
    dim = 2**N
    sx, sy, sz = collective(SX, N), collective(SY, N), collective(SZ, N)
    h0 = (params.J / params.N) * (sz @ sz) + params.Bz * sz
    eye = np.eye(dim)

    def com(h):
        return -1j * (np.kron(h, eye) - np.kron(eye, h.T))

    l0 = com(h0)
    for rate, jump in (
        (dec.Gamma_ud, SM),
        (dec.Gamma_du, SP),
        (dec.Gamma_el, SZ),  # sigma_z/2 jump at rate Gamma_el
    ):
        if rate == 0:
            continue
        for i in range(N):
            a = embed(jump, i, N)
            ada = a.conj().T @ a
            l0 = l0 + rate * (
                np.kron(a, a.conj())
                - 0.5 * (np.kron(ada, eye) + np.kron(eye, ada.T))
            )
    l_drive = com(sx)

    down_x = np.array([1.0, -1.0]) / np.sqrt(2.0)  # sigma_x eigenvalue -1
    psi = np.array([1.0])
    for _ in range(N):
        psi = np.kron(psi, down_x)
    rho0 = np.outer(psi, psi.conj()).reshape(-1)

    def rhs(t, v):
        return l0 @ v + schedule.value(t) * (l_drive @ v)

    sol = solve_ivp(rhs, (0, times[-1]), rho0.astype(complex), t_eval=times,
                    method="DOP853", rtol=1e-10, atol=1e-12)
    assert sol.success
    out = {"Sx": [], "Sy": [], "Sz": [], "abs_Sz": [], "cat_plus": [], "parity": []}
    mz = np.array([N / 2 - bin(i).count("1") for i in range(dim)])
    cat = np.zeros(dim, complex)
    cat[0] = 1 / np.sqrt(2)  # all up
    cat[-1] = 1 / np.sqrt(2)  # all down
    parity_full = np.array([[1.0 + 0j]])
    for _ in range(N):
        parity_full = np.kron(parity_full, 1j * 2 * SX)  # e^{i pi sx} per spin
    for k in range(len(times)):
        rho = sol.y[:, k].reshape(dim, dim)
        out["Sx"].append(np.trace(sx @ rho).real)
        out["Sy"].append(np.trace(sy @ rho).real)
        out["Sz"].append(np.trace(sz @ rho).real)
        out["abs_Sz"].append(float(np.abs(mz) @ np.diag(rho).real))
        out["cat_plus"].append(float((cat.conj() @ rho @ cat).real))
        out["parity"].append(complex(np.trace(parity_full @ rho)))
    return {k: np.asarray(v) for k, v in out.items()}


class TestCoefficients:
    @pytest.mark.parametrize("j", [0.5, 1.0, 1.5, 2.0, 3.5, 5.0])
    def test_cg_against_sympy(self, j):
        from sympy import Rational, S
        from sympy.physics.quantum.cg import CG

        two_j = int(round(2 * j))
        for two_m in range(-two_j, two_j + 1, 2):
            m = two_m / 2.0
            for q in (-1, 0, 1):
                for jp in (j - 1, j, j + 1):
                    if jp < 0 or abs(m + q) > jp:
                        continue
                    want = float(
                        CG(Rational(two_j, 2), Rational(two_m, 2), S(1), S(q),
                           Rational(int(round(2 * jp)), 2), Rational(two_m, 2) + q)
                        .doit()
                        .evalf()
                    )
                    assert cg1(j, m, q, jp) == pytest.approx(want, abs=1e-12)

    def test_multiplicities_sum_to_full_space(self):
        for N in (2, 3, 4, 5, 8, 21):
            total = sum(
                multiplicity(N, j) * (int(round(2 * j)) + 1)
                for j in DickeBlocks(N).j_values
            )
            assert total == 2**N

    def test_wigner_eckart_ratio_against_direct_sigma_z_solve(self):
        # the sigma_z sum rule is rank-deficient alone, but must be satisfied
        # by 2x the sigma_- strengths (checked inside sector_strengths);
        # verify the sandwich reproduces sum_i sigma_z rho sigma_z on a
        # simple N=2 case by hand: triplet |1,1><1,1| -> stays, coefficient
        # CG(1,1;1,0|1,1)^2 * 2 g(1,1) + CG(1,1;1,0|2?..) .. == sum rule N=2
        blocks = DickeBlocks(2)
        g = blocks.strengths[1.0]
        total = sum(
            cg1(1.0, 1.0, 0, jp) ** 2 * 2 * gv for jp, gv in g.items()
        )
        assert total == pytest.approx(2.0, abs=1e-10)  # = N


class TestAgainstBruteForce:
    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_observables_match(self, N):
        params = DickeParams.from_J(N=N, delta=k2a(-2.0), J_mag=k2a(1.75))
        schedule = build_lin(k2a(3.0), 1.5)
        dec = DecoherenceParams.from_per_second(Gamma_el=80.0, Gamma_ud=30.0, Gamma_du=10.0)
        times = np.linspace(0.0, 1.5, 7)
        spec = EvolutionSpec(model="lipkin", params=params, schedule=schedule,
                             sample_times=times)
        res = evolve_lindblad_lipkin(spec, dec)
        oracle = brute_force_run(N, params, schedule, dec, times)
        np.testing.assert_allclose(res.Sx, oracle["Sx"], atol=2e-6)
        np.testing.assert_allclose(res.Sy, oracle["Sy"], atol=2e-6)
        np.testing.assert_allclose(res.Sz, oracle["Sz"], atol=2e-6)
        np.testing.assert_allclose(res.abs_Sz, oracle["abs_Sz"], atol=2e-6)
        np.testing.assert_allclose(res.parity, oracle["parity"], atol=2e-6)
        fid = res.meta["cat_fidelity_series"]
        # series reports max over signs; compare at the end via meta
        assert res.meta["cat_fidelity"]["plus"] == pytest.approx(
            oracle["cat_plus"][-1], abs=2e-6
        )
        assert fid.shape == times.shape

    def test_zero_rates_match_pure_evolution(self):
        params = DickeParams.from_J(N=6, delta=k2a(-4.0), J_mag=k2a(1.75))
        schedule = build_lin(k2a(5.0), 1.0)
        times = np.linspace(0.0, 1.0, 5)
        spec = EvolutionSpec(model="lipkin", params=params, schedule=schedule,
                             sample_times=times)
        res_l = evolve_lindblad_lipkin(spec, DecoherenceParams())
        res_p = evolve_thermal(spec)
        np.testing.assert_allclose(res_l.Sx, res_p.Sx, atol=1e-8)
        np.testing.assert_allclose(res_l.Sz, res_p.Sz, atol=1e-8)
        np.testing.assert_allclose(res_l.abs_Sz, res_p.abs_Sz, atol=1e-8)

    def test_free_dephasing_decay_law(self):
        # J = 0, B = 0: <Sx>(t) = <Sx>(0) e^{-Gamma_el t / 2}
        params = DickeParams(N=8, delta=k2a(-1.0), g0=0.0)
        schedule = build_lin(1e-12, 2.0)
        times = np.linspace(0.0, 2.0, 9)
        spec = EvolutionSpec(model="lipkin", params=params, schedule=schedule,
                             sample_times=times)
        gamma_el = 0.4  # 1/ms
        res = evolve_lindblad_lipkin(spec, DecoherenceParams(Gamma_el=gamma_el))
        expected = -4.0 * np.exp(-gamma_el * times / 2.0)
        np.testing.assert_allclose(res.Sx, expected, atol=1e-7)
        np.testing.assert_allclose(res.Sz, np.zeros_like(times), atol=1e-10)

    def test_trace_and_positivity(self):
        params = DickeParams.from_J(N=10, delta=k2a(-4.0), J_mag=k2a(1.75))
        schedule = build_lin(k2a(7.1), 1.0)
        spec = EvolutionSpec(model="lipkin", params=params, schedule=schedule,
                             sample_times=np.linspace(0, 1.0, 5))
        dec = DecoherenceParams.from_per_second(Gamma_el=20.0, Gamma_ud=2.0, Gamma_du=2.0)
        res = evolve_lindblad_lipkin(spec, dec)
        assert res.norm_drift.max() <= 1e-7  # trace drift series
        assert res.meta["min_eigenvalue"] >= -1e-8

    def test_cost_guard(self):
        params = DickeParams.from_J(N=40, delta=k2a(-4.0), J_mag=k2a(1.75))
        spec = EvolutionSpec(model="lipkin", params=params,
                             schedule=build_lin(k2a(1.0), 0.1),
                             sample_times=np.array([0.0, 0.1]))
        with pytest.raises(CostGuard):
            evolve_lindblad_lipkin(spec, DecoherenceParams())


class TestRateBookkeeping:
    def test_total_decoherence_rate(self):
        dec = DecoherenceParams.from_per_second(Gamma_el=20.0, Gamma_ud=2.0, Gamma_du=2.0)
        assert dec.Gamma == pytest.approx(0.012, rel=1e-12)  # 12/s in 1/ms
