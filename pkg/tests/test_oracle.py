import numpy as np
import pytest

from star_secrecy.model import secrecy_rate
from star_secrecy.oracle import _element_choices, brute_force_oracle
from star_secrecy.scenario import (ChannelSet, Protocol, Scenario,
                                   generate_channels, trial_rng)


def test_complexity_guard():
    sc = Scenario(m=4)
    ch = generate_channels(sc, trial_rng(0, 0))
    with pytest.raises(ValueError, match="at most"):
        brute_force_oracle(ch, sc)
    sc3 = Scenario(m=3)
    ch3 = generate_channels(sc3, trial_rng(0, 0))
    with pytest.raises(ValueError, match="grid too large"):
        brute_force_oracle(ch3, sc3, phase_points=16, beta_points=11)


def test_enumeration_count_single_element():
    # ES with 16 phases and 11 amplitude splits: the two sides share the
    # split, so one element has at most 16*16*11 joint choices
    b, pr, pt = _element_choices(Protocol.ES, 16, 11)
    assert b.shape[0] == 16 * 16 * 11
    b2, _, _ = _element_choices(Protocol.MS, 16, 11)
    assert b2.shape[0] == 2 * 16          # active side and its phase only


def test_best_rate_matches_model_evaluation():
    sc = Scenario(m=2, e_r=0.0, e_t=0.0)
    ch = generate_channels(sc, trial_rng(3, 0))
    res = brute_force_oracle(ch, sc, phase_points=8, beta_points=5)
    met = secrecy_rate(ch, res.config, sc.p_s, sc.sigma2)
    assert res.rate == pytest.approx(met.rate_sum, rel=1e-12)
    assert res.feasible


def test_constructive_phase_alignment_without_eves():
    # with no Eve channels and no energy requirement the best phases align
    # each surface term with the direct link
    sc = Scenario(m=1, e_r=0.0, e_t=0.0)
    ch = generate_channels(sc, trial_rng(5, 0))
    z = np.zeros(1, dtype=complex)
    ch = ChannelSet(H=ch.H, h_r=ch.h_r, h_t=ch.h_t, v_r=z, v_t=z,
                    f_r=ch.f_r, f_t=ch.f_t, g_r=0.0, g_t=0.0)
    points = 64
    res = brute_force_oracle(ch, sc, phase_points=points, beta_points=11)
    expect = (np.angle(ch.f_r) - np.angle(np.conj(ch.h_r[0]) * ch.H[0]))
    got = res.config.phi_r[0]
    delta = (got - expect) % (2 * np.pi)
    delta = min(delta, 2 * np.pi - delta)
    assert delta <= 2 * np.pi / points + 1e-9


def test_infeasible_energies_reported():
    sc = Scenario(m=1, e_r=100.0, e_t=100.0)
    ch = generate_channels(sc, trial_rng(1, 0))
    res = brute_force_oracle(ch, sc, phase_points=4, beta_points=3)
    assert not res.feasible
    assert res.rate == 0.0


def test_ts_grid_includes_time_share():
    sc = Scenario(m=1, e_r=0.0, e_t=0.0, protocol=Protocol.TS)
    ch = generate_channels(sc, trial_rng(9, 0))
    res = brute_force_oracle(ch, sc, phase_points=8, beta_points=5)
    assert res.config.lambda_r in np.linspace(0, 1, 5)
    met = secrecy_rate(ch, res.config, sc.p_s, sc.sigma2)
    assert res.rate == pytest.approx(met.rate_sum, rel=1e-12)
