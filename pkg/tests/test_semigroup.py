import numpy as np
import pytest

from lorentzheat import spectral
from lorentzheat.harmonic import solve_h
from lorentzheat.params import INF, LorentzParams, RadialProfile, unit_ball_volume
from lorentzheat.quadrature import make_grid
from lorentzheat.semigroup import (
    DEFAULT_SCHEME,
    SchemeParams,
    assemble_sum,
    build_test_family,
    estimate_operator_norm,
    evolve_mode,
    evolve_modes,
    gaussian_exact,
    heat_kernel_sup,
    norm_on_region,
    operator_norm_sweep,
    radial_derivative,
)

GRID = make_grid(1e-7, 2e3, 3072)


@pytest.fixture(scope="module")
def h0_zero():
    return solve_h(spectral.PotentialSpec.zero(3), 0, GRID)


@pytest.fixture(scope="module")
def h_hardy():
    spec = spectral.PotentialSpec.hardy(3, 2.0)
    return {k: solve_h(spec, k, GRID) for k in (0, 1)}


class TestScheme:
    def test_steady_state_exact(self, h_hardy):
        hk = h_hardy[0]
        scheme = SchemeParams(boundary="reflecting")
        ws, _ = evolve_modes(hk, np.ones_like(GRID), [0.5, 2.0], scheme)
        # ~2000 steps at <= 5e-15 drift per step
        for w in ws:
            assert np.max(np.abs(w - 1.0)) < 1e-10

    def test_mass_conservation_reflecting(self, h0_zero):
        from lorentzheat.semigroup import _Operator
        scheme = SchemeParams(boundary="reflecting")
        w0 = np.where(GRID < 1.0, 1.0, 0.0)
        op = _Operator(h0_zero, "reflecting")
        m0 = float(op.mass @ w0)
        ws, _ = evolve_modes(h0_zero, w0, [0.1, 1.0, 10.0], scheme)
        for w in ws:
            assert float(op.mass @ w[:, 0]) == pytest.approx(m0, rel=1e-10)

    def test_mass_monotone_absorbing(self, h0_zero):
        from lorentzheat.semigroup import _Operator
        w0 = np.where(GRID < 1.0, 1.0, 0.0)
        op = _Operator(h0_zero, "absorbing")
        t_far = (GRID[-1] / 4.0) ** 2  # heat genuinely reaches the boundary
        ws, _ = evolve_modes(h0_zero, w0, [1.0, 100.0, t_far], DEFAULT_SCHEME)
        m_init = float(op.mass @ w0)
        masses = [float(op.mass @ w[:, 0]) for w in ws]
        slack = 1e-12 * m_init
        assert masses[0] <= m_init + slack
        assert masses[1] <= masses[0] + slack
        assert masses[2] < 0.99 * masses[1]  # real absorption by t_far

    def test_max_principle(self, h_hardy):
        hk = h_hardy[1]
        w0 = np.where(GRID < 0.5, 2.0, 0.5)
        ws, warnings = evolve_modes(hk, w0, [0.2, 5.0],
                                    SchemeParams(boundary="reflecting"))
        for w in ws:
            assert np.min(w) > 0.5 - 1e-8
            assert np.max(w) < 2.0 + 1e-8
        assert not any("positivity" in msg for msg in warnings)

    def test_gaussian_oracle(self, h0_zero):
        # V = 0, k = 0: Gaussians evolve in closed form
        width = 1.0
        phi = gaussian_exact(3, width, GRID, 0.0)
        scheme = SchemeParams(dt_cap=256.0)
        states = evolve_mode(h0_zero.spec, h0_zero, phi, [0.1, 1.0, 10.0], scheme)
        for st in states:
            exact = gaussian_exact(3, width, GRID, st.t)
            err = np.max(np.abs(st.v_values() - exact)) / np.max(exact)
            assert err < 1e-4, f"t={st.t}"

    def test_hardy_self_similarity(self, h_hardy):
        # V homogeneous of degree -2: r -> 2r, t -> 4t maps solutions
        hk = h_hardy[0]
        phi = np.where(GRID < 1.0, hk.values, 0.0)
        phi_scaled = np.where(GRID < 2.0, hk.eval(GRID / 2.0), 0.0)
        st = evolve_mode(hk.spec, hk, phi, [1.0])[0]
        st_scaled = evolve_mode(hk.spec, hk, phi_scaled, [4.0])[0]
        mid = (GRID > 1e-3) & (GRID < 30.0)
        v1 = st.v_profile().eval(GRID[mid] / 2.0)
        v2 = st_scaled.v_values()[mid]
        # indicator edges land mid-cell, so the sampled data are only
        # rescalings of each other to ~1 cell volume
        assert np.max(np.abs(v2 - v1)) < 2e-2 * np.max(np.abs(v1))

    def test_boundary_contamination_warns(self, h0_zero):
        # pushing heat to t with sqrt(t) ~ r_max trips the monitor
        phi = np.where(GRID < 1.0, 1.0, 0.0)
        t_big = (GRID[-1] / 3.0) ** 2
        states = evolve_mode(h0_zero.spec, h0_zero, phi, [t_big])
        assert any("contamination" in msg for msg in states[0].warnings)


class TestRadialDerivative:
    def test_alpha0_identity(self, h0_zero):
        phi = gaussian_exact(3, 1.0, GRID, 0.0)
        st = evolve_mode(h0_zero.spec, h0_zero, phi, [1.0])[0]
        assert np.allclose(radial_derivative(st, 0).values, st.v_values())

    def test_gaussian_first_derivative(self, h0_zero):
        phi = gaussian_exact(3, 1.0, GRID, 0.0)
        scheme = SchemeParams(dt_cap=256.0)
        st = evolve_mode(h0_zero.spec, h0_zero, phi, [1.0], scheme)[0]
        d1 = radial_derivative(st, 1).values
        s2 = 1.0 + 2.0 * st.t
        exact = -GRID / s2 * gaussian_exact(3, 1.0, GRID, st.t)
        mask = GRID < 20.0
        err = np.max(np.abs(d1[mask] - exact[mask])) / np.max(np.abs(exact))
        assert err < 1e-3

    def test_hardy_derivative_envelope(self, h_hardy):
        # |d_r v| ~ r^(A_1 - 1) near the origin at fixed t
        hk = h_hardy[1]
        phi = np.where(GRID < 1.0, hk.values, 0.0)
        st = evolve_mode(hk.spec, hk, phi, [1.0])[0]
        d1 = np.abs(radial_derivative(st, 1).values)
        small = (GRID > 1e-6) & (GRID < 1e-3)
        slope = np.polyfit(np.log(GRID[small]), np.log(d1[small]), 1)[0]
        assert slope == pytest.approx(hk.inner_exponent - 1.0, abs=1e-2)


class TestFamilyAndNorms:
    def test_family_normalization(self, h_hardy):
        fam = build_test_family(h_hardy[0], 4.0)
        labels = {d.label for d in fam}
        assert "ball_j0" in labels and "annulus_j3" in labels and "hk_bump" in labels
        for d in fam:
            nrm = d.source_norm(2.0, 2.0)
            assert 0.0 < nrm < INF

    def test_region_norms(self, h0_zero):
        prof = RadialProfile.indicator_ball(2.0, 3)
        a3 = unit_ball_volume(3)
        assert norm_on_region(prof, 1.0, 1.0, "full") == pytest.approx(8 * a3)
        assert norm_on_region(prof, 1.0, 1.0, ("ball", 1.0)) == pytest.approx(a3)
        assert norm_on_region(prof, 1.0, 1.0, ("annulus", 1.0, 2.0)) == \
            pytest.approx(7 * a3, rel=1e-9)
        assert norm_on_region(prof, 1.0, 1.0, ("annulus", 2.0, 1.0)) == 0.0

    def test_gaussian_operator_norm_window(self, h0_zero):
        # L^1 -> L^inf estimate must catch at least half the kernel sup
        lp = LorentzParams(1.0, INF, 1.0, INF)
        for t in (0.5, 4.0):
            est = estimate_operator_norm(h0_zero.spec, h0_zero, 0, lp, t)
            assert 0.5 * heat_kernel_sup(3, t) <= est.value \
                <= 1.05 * heat_kernel_sup(3, t)
            assert est.lower_bound

    def test_hardy_scale_invariance_of_estimates(self, h_hardy):
        # estimate(t) * t^(N/2 (1/p - 1/q) + alpha/2) constant within 5%
        hk = h_hardy[0]
        lp = LorentzParams(1.0, INF, 1.0, INF)
        ts = [0.25, 1.0, 4.0, 16.0]
        sweep = operator_norm_sweep(hk.spec, hk, [0], [lp], ts)
        vals = [e.value * e.t ** 1.5 for e in sweep[(0, 0)]]
        assert max(vals) / min(vals) < 1.05

    def test_empty_region_zero(self, h_hardy):
        hk = h_hardy[0]
        lp = LorentzParams(1.0, 2.0, 1.0, 2.0)
        est = estimate_operator_norm(hk.spec, hk, 0, lp, 1.0,
                                     region=("annulus", 3.0, 3.0))
        assert est.value == 0.0


class TestAssembly:
    def test_single_mode(self, h_hardy):
        hk = h_hardy[0]
        phi = np.where(GRID < 1.0, hk.values, 0.0)
        st = evolve_mode(hk.spec, hk, phi, [1.0])[0]
        env, tail = assemble_sum([(st, 1.0)], 1.0)
        assert np.allclose(env.values, np.abs(st.v_values()))
        assert tail == 0.0

    def test_low_mode_dominates_near_origin(self, h_hardy):
        states = []
        for k in (0, 1):
            hk = h_hardy[k]
            phi = np.where(GRID < 1.0, hk.values, 0.0)
            states.append((evolve_mode(hk.spec, hk, phi, [4.0])[0], 1.0))
        v0 = np.abs(states[0][0].v_values())
        v1 = np.abs(states[1][0].v_values())
        small = (GRID > 1e-5) & (GRID < 1e-2)
        assert np.all(v0[small] > v1[small])

    def test_time_mismatch_rejected(self, h_hardy):
        hk = h_hardy[0]
        phi = np.where(GRID < 1.0, hk.values, 0.0)
        st = evolve_mode(hk.spec, hk, phi, [1.0])[0]
        with pytest.raises(ValueError):
            assemble_sum([(st, 1.0)], 2.0)

    def test_geometric_tail_estimate(self, h_hardy):
        states = []
        for k in (0, 1):
            hk = h_hardy[k]
            phi = np.where(GRID < 1.0, hk.values, 0.0)
            states.append((evolve_mode(hk.spec, hk, phi, [9.0])[0], 1.0))
        _, tail = assemble_sum(states, 9.0)
        sup1 = np.max(np.abs(states[1][0].v_values()))
        assert 0.0 < tail < sup1  # higher modes decay geometrically
