import numpy as np
import pytest

from star_secrecy.model import (TarcConfig, effective_gain, harvested_energy,
                                secrecy_rate, tarc_matrix)
from star_secrecy.optimizer import (OptimizerSettings, build_lifted,
                                    dinkelbach_update, energy_ceiling,
                                    extract_rank_one, initial_gamma,
                                    lifted_vector, optimize, solve_baseline,
                                    solve_es, solve_ms, solve_ts)
from star_secrecy.oracle import brute_force_oracle
from star_secrecy.scenario import (ChannelSet, Protocol, Scenario,
                                   generate_channels, trial_rng)

SET = OptimizerSettings()


def channels_for(scenario, seed=1, trial=0):
    return generate_channels(scenario, trial_rng(seed, trial))


def symmetric_channels(m, seed=0):
    """Identical r and t sides (mirror geometry with equal draws)."""
    sc = Scenario(m=m)
    ch = channels_for(sc, seed)
    return sc, ChannelSet(H=ch.H, h_r=ch.h_r, h_t=ch.h_r.copy(),
                          v_r=ch.v_r, v_t=ch.v_r.copy(),
                          f_r=ch.f_r, f_t=ch.f_r, g_r=ch.g_r, g_t=ch.g_r)


class TestLifting:
    def test_zero_channels_zero_lift(self):
        z = np.zeros(2, dtype=complex)
        ch = ChannelSet(H=z, h_r=z, h_t=z, v_r=z, v_t=z,
                        f_r=0, f_t=0, g_r=0, g_t=0)
        lift = build_lifted(ch, 20.0)
        assert np.all(lift.w_b["r"] == 0) and np.all(lift.g_e["t"] == 0)

    def test_single_element_hand_outer_product(self):
        one = np.ones(1, dtype=complex)
        ch = ChannelSet(H=one, h_r=one, h_t=one, v_r=one, v_t=one,
                        f_r=1, f_t=1, g_r=1, g_t=1)
        lift = build_lifted(ch, 20.0)
        assert np.allclose(lift.w["r"], [1, 1])
        assert np.allclose(lift.w_b["r"], 20.0 * np.ones((2, 2)))

    def test_quadratic_form_matches_model_gain(self):
        sc = Scenario(m=5)
        ch = channels_for(sc)
        lift = build_lifted(ch, sc.p_s)
        rng = np.random.default_rng(0)
        for _ in range(100):
            cfg = TarcConfig.es(rng.uniform(0, 1, 5), rng.uniform(0, 6.28, 5),
                                rng.uniform(0, 6.28, 5))
            for side in ("r", "t"):
                q = lifted_vector(cfg, side)
                lhs = float(np.vdot(q, lift.w_b[side] @ q).real)
                hv, f = ch.bob(side)
                gain = effective_gain(hv, tarc_matrix(cfg, side), ch.H, f)
                rhs = sc.p_s * abs(gain) ** 2
                assert abs(lhs - rhs) <= 1e-10 * max(rhs, 1e-12)


class TestDinkelbachUpdate:
    def test_zero_iterate_gives_unity(self):
        sc = Scenario(m=3)
        lift = build_lifted(channels_for(sc), sc.p_s)
        n = sc.m + 1
        g_r, g_t = dinkelbach_update(lift, np.zeros((n, n)), np.zeros((n, n)),
                                     sigma2=1.0)
        assert g_r == pytest.approx(1.0) and g_t == pytest.approx(1.0)

    def test_planted_trace_ratio_gives_two(self):
        # build a rank-two iterate whose numerator trace is 3 sigma^2 and
        # denominator trace is sigma^2: gamma = (1 + 3)/(1 + 1) = 2
        sc = Scenario(m=2)
        lift = build_lifted(channels_for(sc), sc.p_s)
        sigma2 = 1.0
        w, g = lift.w["r"], lift.g["r"]
        basis = np.linalg.qr(np.column_stack([g, w, np.ones(3)]))[0]
        u = basis[:, 1]                      # orthogonal to g, not to w
        v_w = np.linalg.qr(np.column_stack([w, g, np.ones(3)]))[0][:, 1]
        alpha = 3 * sigma2 / (sc.p_s * abs(np.vdot(w, u)) ** 2)
        beta = sigma2 / (sc.p_s * abs(np.vdot(g, v_w)) ** 2)
        qm = alpha * np.outer(u, u.conj()) + beta * np.outer(v_w, v_w.conj())
        assert np.trace(lift.w_b["r"] @ qm).real == pytest.approx(3.0, rel=1e-9)
        assert np.trace(lift.g_e["r"] @ qm).real == pytest.approx(1.0, rel=1e-9)
        g_r, _ = dinkelbach_update(lift, qm, qm, sigma2)
        assert g_r == pytest.approx(2.0, rel=1e-9)

    def test_matches_elementwise_trace_oracle(self):
        sc = Scenario(m=2)
        lift = build_lifted(channels_for(sc), sc.p_s)
        rng = np.random.default_rng(1)
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        qm = a @ a.conj().T
        g_r, g_t = dinkelbach_update(lift, qm, qm, 1.0)
        for side, got in (("r", g_r), ("t", g_t)):
            num = 1.0 + sum((lift.w_b[side][i, j] * qm[j, i]).real
                            for i in range(3) for j in range(3))
            den = 1.0 + sum((lift.g_e[side][i, j] * qm[j, i]).real
                            for i in range(3) for j in range(3))
            assert got == pytest.approx(num / den, rel=1e-12)

    def test_initial_gamma_is_direct_ratio(self):
        sc = Scenario(m=4)
        ch = channels_for(sc)
        lift = build_lifted(ch, sc.p_s)
        g0 = initial_gamma(lift, sc.sigma2)
        expect = (1 + sc.p_s * abs(ch.f_r) ** 2) / (1 + sc.p_s * abs(ch.g_r) ** 2)
        assert g0["r"] == pytest.approx(expect, rel=1e-12)


class TestExtraction:
    def test_exact_rank_one_recovered(self):
        sc = Scenario(m=3)
        lift = build_lifted(channels_for(sc), sc.p_s)
        rng = np.random.default_rng(0)
        cfg = TarcConfig.es(rng.uniform(0, 1, 3), rng.uniform(0, 6, 3),
                            rng.uniform(0, 6, 3))
        q0 = lifted_vector(cfg, "r")
        qm = np.outer(q0, q0.conj())
        got, ok = extract_rank_one(qm, cfg.beta_r, Protocol.ES, lift, "r",
                                   0.0, 1.0, 1.0, SET, rng)
        assert ok
        assert np.allclose(got, q0, atol=1e-8)

    def test_identity_projects_to_unit_modulus(self):
        sc = Scenario(m=4)
        lift = build_lifted(channels_for(sc), sc.p_s)
        rng = np.random.default_rng(3)
        q, ok = extract_rank_one(np.eye(5, dtype=complex), 1.0, Protocol.TS,
                                 lift, "r", 0.0, 1.0, 1.0, SET, rng)
        assert ok
        assert np.allclose(np.abs(q), 1.0, atol=1e-12)
        assert q[-1] == pytest.approx(1.0)

    def test_non_psd_rejected(self):
        sc = Scenario(m=2)
        lift = build_lifted(channels_for(sc), sc.p_s)
        bad = np.diag([1.0, 1.0, -0.5]).astype(complex)
        with pytest.raises(ValueError, match="PSD"):
            extract_rank_one(bad, 1.0, Protocol.TS, lift, "r", 0.0, 1.0, 1.0,
                             SET, np.random.default_rng(0))

    def test_energy_filter_flags_infeasible(self):
        sc = Scenario(m=2)
        lift = build_lifted(channels_for(sc), sc.p_s)
        ceiling = energy_ceiling(lift, "r")
        _, ok = extract_rank_one(np.eye(3, dtype=complex), 1.0, Protocol.TS,
                                 lift, "r", 10 * ceiling, 1.0, 1.0, SET,
                                 np.random.default_rng(0))
        assert not ok

    def test_surrogate_near_bound_at_small_m(self):
        violations = 0
        for seed in range(40):
            sc = Scenario(m=2, e_r=0.0, e_t=0.0)
            ch = channels_for(sc, seed=101, trial=seed)
            res = solve_es(ch, sc, rng=trial_rng(7101, seed))
            if res.rank_gap > 0.05:
                violations += 1
        assert violations <= 4          # rank-one extraction near the bound


class TestPenaltyFunction:
    @pytest.mark.parametrize("point", [0.0, 1.0])
    def test_binary_points_penalty_free(self, point):
        # f(b, b) = b^2 + (1 - 2 b) b = b - b^2 = 0 at binary points
        assert point ** 2 + (1 - 2 * point) * point == pytest.approx(0.0)


class TestEsSolver:
    def test_unreachable_energy_infeasible(self):
        sc = Scenario(m=3, e_r=1e6)
        ch = channels_for(sc)
        res = solve_es(ch, sc, rng=trial_rng(0, 0))
        assert not res.feasible
        assert res.status == "infeasible"
        assert np.all(res.config.beta_r == 0)     # all-off fallback

    def test_energy_ceiling_matches_alignment_bound(self):
        sc = Scenario(m=3)
        ch = channels_for(sc)
        lift = build_lifted(ch, sc.p_s)
        gv = np.abs(np.conj(ch.v_r) * ch.H)
        expect = sc.p_s * (gv.sum() + abs(ch.g_r)) ** 2
        assert energy_ceiling(lift, "r") == pytest.approx(expect, rel=1e-12)

    def test_beats_grid_oracle_small(self):
        for seed in range(3):
            sc = Scenario(m=2, e_r=0.0, e_t=0.0)
            ch = channels_for(sc, seed=7, trial=seed)
            res = solve_es(ch, sc, rng=trial_rng(1007, seed))
            orc = brute_force_oracle(ch, sc, 16, 11)
            assert res.metrics.rate_sum >= orc.rate * 0.95
            assert res.sdr_bound >= orc.surrogate - 1e-6

    def test_feasible_results_meet_energy(self):
        for seed in range(5):
            sc = Scenario(m=6)
            ch = channels_for(sc, seed=31, trial=seed)
            res = solve_es(ch, sc, rng=trial_rng(131, seed))
            if res.feasible:
                assert harvested_energy(ch, res.config, "r", sc.p_s) \
                    >= sc.e_r - 1e-6
                assert harvested_energy(ch, res.config, "t", sc.p_s) \
                    >= sc.e_t - 1e-6

    def test_bound_monotone_in_energy_requirement(self):
        sc0 = Scenario(m=4)
        ch = channels_for(sc0, seed=17)
        bounds = []
        for e in (0.0, 0.05, 0.1, 0.12):
            sc = sc0.with_overrides(e_r=e, e_t=e)
            res = solve_es(ch, sc, rng=trial_rng(17, 0))
            bounds.append(res.sdr_bound)
        for a, b in zip(bounds, bounds[1:]):
            assert b <= a + 1e-6


class TestMsSolver:
    def test_single_element_matches_exhaustive(self):
        for seed in range(4):
            sc = Scenario(m=1, e_r=0.0, e_t=0.0, protocol=Protocol.MS)
            ch = channels_for(sc, seed=53, trial=seed)
            res = solve_ms(ch, sc, rng=trial_rng(153, seed))
            orc = brute_force_oracle(ch, sc, 64, 2)
            assert res.metrics.rate_sum >= orc.rate * 0.95 - 1e-9

    def test_binary_output_and_counts(self):
        sc = Scenario(m=6, protocol=Protocol.MS)
        ch = channels_for(sc, seed=3)
        res = solve_ms(ch, sc, rng=trial_rng(103, 0))
        assert res.status == "ok"
        beta = np.concatenate([res.config.beta_r, res.config.beta_t])
        assert np.all(np.abs(beta - np.round(beta)) <= 1e-6)
        m_r = int(res.config.beta_r.sum())
        m_t = int(res.config.beta_t.sum())
        assert m_r + m_t == sc.m
        assert res.iterations_id <= SET.max_penalty_outer


class TestTsSolver:
    def test_symmetric_sides_tie_on_value(self):
        sc, ch = symmetric_channels(4, seed=2)
        sc = sc.with_overrides(protocol=Protocol.TS)
        res = solve_ts(ch, sc, rng=trial_rng(11, 0))
        value_at_half = secrecy_rate(
            ch, TarcConfig.ts(res.config.phi_r, res.config.phi_t, 0.5),
            sc.p_s, sc.sigma2).rate_sum
        assert res.metrics.rate_sum == pytest.approx(value_at_half, rel=1e-9)

    def test_endpoint_share_kills_other_side(self):
        sc = Scenario(m=4, protocol=Protocol.TS)
        ch = channels_for(sc, seed=5)
        res = solve_ts(ch, sc, rng=trial_rng(15, 0))
        cfg = TarcConfig.ts(res.config.phi_r, res.config.phi_t, lambda_r=1.0)
        met = secrecy_rate(ch, cfg, sc.p_s, sc.sigma2)
        assert met.rate_t == 0.0

    def test_decoupled_convergence_and_monotone_gamma(self):
        for seed in range(5):
            sc = Scenario(m=6, protocol=Protocol.TS)
            ch = channels_for(sc, seed=71, trial=seed)
            res = solve_ts(ch, sc, rng=trial_rng(171, seed))
            assert res.status == "ok"
            for side in ("r", "t"):
                trace = res.side_traces[side]
                gammas = [g for g, _ in trace]
                assert all(b >= a - 1e-9 for a, b in zip(gammas, gammas[1:]))
                assert abs(trace[-1][1]) <= SET.eps1
                assert len(trace) <= 30

    def test_grid_oracle_comparison(self):
        sc = Scenario(m=2, e_r=0.0, e_t=0.0, protocol=Protocol.TS)
        ch = channels_for(sc, seed=23)
        res = solve_ts(ch, sc, rng=trial_rng(123, 0))
        orc = brute_force_oracle(ch, sc, 16, 11)
        assert res.metrics.rate_sum >= orc.rate * 0.95
        assert res.sdr_bound >= orc.surrogate - 1e-6


class TestBaselines:
    def test_none_infeasible_when_direct_too_weak(self):
        sc = Scenario(m=3, e_r=0.5, protocol=Protocol.NONE)  # direct max 0.192
        ch = channels_for(sc)
        res = solve_baseline(ch, sc, rng=trial_rng(0, 0), kind=Protocol.NONE)
        assert not res.feasible

    def test_ris_infeasible_without_surface_path_to_t(self):
        sc = Scenario(m=3, e_t=0.5, protocol=Protocol.RIS)
        ch = channels_for(sc)
        res = solve_baseline(ch, sc, rng=trial_rng(0, 0), kind=Protocol.RIS)
        assert not res.feasible

    def test_ris_never_beats_es(self):
        wins = 0
        for seed in range(10):
            sc = Scenario(m=5)
            ch = channels_for(sc, seed=211, trial=seed)
            es = solve_es(ch, sc, rng=trial_rng(311, seed))
            ris = solve_baseline(ch, sc, rng=trial_rng(311, seed),
                                 kind=Protocol.RIS)
            if ris.metrics.rate_sum > es.metrics.rate_sum * (1 + 1e-6):
                wins += 1
        assert wins == 0

    def test_dispatch_by_protocol(self):
        sc = Scenario(m=3, protocol=Protocol.NONE)
        ch = channels_for(sc)
        res = optimize(ch, sc)
        assert res.config.protocol is Protocol.NONE
        assert res.metrics.energy_eve_r == pytest.approx(20 / 104, rel=1e-9)
