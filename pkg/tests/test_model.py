"""Core quantities: conversions, secrecy rates, harvest, evaluation."""
import numpy as np
import pytest

from swiptsec import (AllocationPA, AllocationUB, ChannelState, SystemConfig,
                      dbm_to_mw, evaluate, harvested_power_pa,
                      harvested_power_ub, mw_to_dbm, pa_as_ub, rate_matrix,
                      secrecy_rate_pa, secrecy_rate_ub, user_secrecy_rate)


def tiny_case():
    # two users, two subcarriers, mirror-symmetric gains; with C=[1,1] the
    # split ratio that makes log2((4(1-rho)+1)/2) hit 1 bit is exactly 0.25
    gain = np.array([[4.0, 1.0], [1.0, 4.0]])
    ch = ChannelState.from_gains(gain)
    cfg = SystemConfig(2, 2, np.ones(2), 1.0, 1.0, np.array([1.0, 1.0]))
    return cfg, ch


def test_dbm_frozen_values():
    assert dbm_to_mw(0.0) == pytest.approx(1.0, abs=1e-15)
    assert dbm_to_mw(15.0) == pytest.approx(31.622776601683793, rel=1e-12)
    assert dbm_to_mw(-30.0) == pytest.approx(1e-3, rel=1e-12)


def test_dbm_round_trip():
    rng = np.random.default_rng(0)
    for v in rng.uniform(-60.0, 40.0, size=200):
        assert mw_to_dbm(dbm_to_mw(v)) == pytest.approx(v, abs=1e-12)


def test_rate_frozen_value():
    # p=1, h=1, beta=0.25, sigma2=0.25, rho=0.5 -> log2(0.75/0.5)
    ch = ChannelState(gain=np.array([[1.0], [0.1]]),
                      eaves_gain=np.array([[0.25], [1.0]]))
    cfg = SystemConfig(2, 1, np.ones(1), 0.25, 1.0, np.zeros(2))
    assert secrecy_rate_pa(0, 0, 0.5, cfg, ch) == pytest.approx(
        0.5849625007211562, rel=1e-12)


def test_rate_positive_iff_live():
    rng = np.random.default_rng(1)
    for _ in range(300):
        h = rng.exponential() + 1e-9
        beta = h * rng.uniform(0.0, 1.5)
        rho = rng.uniform(0.0, 1.0)
        ch = ChannelState(gain=np.array([[h], [beta]]),
                          eaves_gain=np.array([[beta], [h]]))
        cfg = SystemConfig(2, 1, np.ones(1), 10 ** rng.uniform(-3, 0), 1.0,
                           np.zeros(2))
        r = secrecy_rate_pa(0, 0, rho, cfg, ch)
        if (1.0 - rho) * h > beta:
            assert r > 0.0
        else:
            assert r == 0.0


def test_rate_monotone_in_rho_and_dead_at_one():
    cfg, ch = tiny_case()
    grid = np.linspace(0.0, 1.0, 101)
    rates = [secrecy_rate_pa(0, 0, r, cfg, ch) for r in grid]
    assert all(a >= b - 1e-12 for a, b in zip(rates, rates[1:]))
    assert rates[-1] == 0.0
    assert secrecy_rate_ub(0, 0, 1.0, cfg, ch) == 0.0


def test_rate_matrix_matches_scalar():
    rng = np.random.default_rng(2)
    gain = rng.exponential(size=(3, 4)) + 1e-9
    ch = ChannelState.from_gains(gain)
    cfg = SystemConfig(3, 4, rng.uniform(0.1, 2.0, 4), 0.3, 0.7, np.zeros(3))
    rho = rng.uniform(0, 1, 3)
    mat = rate_matrix(rho, cfg, ch)
    for k in range(3):
        for n in range(4):
            assert mat[k, n] == pytest.approx(
                secrecy_rate_pa(k, n, rho[k], cfg, ch), abs=1e-12)


def test_harvest_frozen_and_linear():
    ch = ChannelState(gain=np.array([[1.0, 0.5], [0.2, 0.2]]),
                      eaves_gain=np.array([[0.2, 0.2], [1.0, 0.5]]))
    cfg = SystemConfig(2, 2, np.array([1.0, 2.0]), 0.1, 0.5, np.zeros(2))
    # zeta * rho * (p1*h1 + p2*h2) = 0.5 * 0.5 * 2.0
    assert harvested_power_pa(0, 0.5, cfg, ch) == pytest.approx(0.5, rel=1e-12)
    assert harvested_power_pa(0, 1.0, cfg, ch) == pytest.approx(1.0, rel=1e-12)
    alloc = AllocationUB(assign=np.zeros((2, 2), dtype=np.int8),
                         split_ratio=np.array([[1.0, 0.25], [1.0, 1.0]]))
    assert harvested_power_ub(0, alloc, cfg, ch) == pytest.approx(
        0.5 * (1.0 * 1.0 * 1.0 + 0.25 * 2.0 * 0.5), rel=1e-12)


def test_evaluate_tiny_case():
    cfg, ch = tiny_case()
    assign = np.eye(2, dtype=np.int8)
    alloc = AllocationPA(assign=assign, split_ratio=np.array([0.25, 0.25]))
    rep = evaluate(alloc, cfg, ch)
    assert rep.feasible
    assert rep.objective_mw == pytest.approx(2.5, rel=1e-12)
    assert rep.per_user_rate == pytest.approx([1.0, 1.0], abs=1e-12)
    assert rep.per_user_harvest == pytest.approx([1.25, 1.25], rel=1e-12)
    assert rep.violation == 0.0
    assert rep.info_power_mw == pytest.approx(0.75 * 4 * 2, rel=1e-12)
    assert rep.objective_mw == pytest.approx(sum(rep.per_user_harvest))


def test_evaluate_violation_path():
    cfg, ch = tiny_case()
    alloc = AllocationPA(assign=np.zeros((2, 2), dtype=np.int8),
                         split_ratio=np.ones(2))
    rep = evaluate(alloc, cfg, ch)
    assert not rep.feasible
    assert rep.violation == pytest.approx(1.0)
    assert rep.per_user_rate == pytest.approx([0.0, 0.0])


def test_pa_embeds_into_ub():
    rng = np.random.default_rng(3)
    for _ in range(50):
        gain = rng.exponential(size=(3, 5)) + 1e-9
        ch = ChannelState.from_gains(gain)
        cfg = SystemConfig(3, 5, rng.uniform(0.1, 2.0, 5), 0.2, 0.6,
                           rng.uniform(0, 0.5, 3))
        assign = np.zeros((3, 5), dtype=np.int8)
        assign[rng.integers(0, 3, 5), np.arange(5)] = 1
        pa = AllocationPA(assign=assign, split_ratio=rng.uniform(0, 1, 3))
        ra, rb = evaluate(pa, cfg, ch), evaluate(pa_as_ub(pa), cfg, ch)
        assert rb.objective_mw == pytest.approx(ra.objective_mw, rel=1e-9)
        assert rb.per_user_rate == pytest.approx(ra.per_user_rate, abs=1e-9)
        assert rb.info_power_mw == pytest.approx(ra.info_power_mw, rel=1e-9)


def test_user_rate_counts_assigned_only():
    cfg, ch = tiny_case()
    assign = np.zeros((2, 2), dtype=np.int8)
    assign[0] = [1, 1]  # second subcarrier is eavesdropper-dominated, rate 0
    alloc = AllocationPA(assign=assign, split_ratio=np.zeros(2))
    assert user_secrecy_rate(0, alloc, cfg, ch) == pytest.approx(
        np.log2(5.0 / 2.0), rel=1e-12)
    assert user_secrecy_rate(1, alloc, cfg, ch) == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        SystemConfig(1, 2, np.ones(2), 0.1, 0.5, np.zeros(1))
    with pytest.raises(ValueError):
        SystemConfig(2, 2, np.ones(2), 0.1, 0.0, np.zeros(2))
    with pytest.raises(ValueError):
        SystemConfig(2, 2, np.ones(2), 0.1, 1.5, np.zeros(2))
    with pytest.raises(ValueError):
        SystemConfig(2, 2, -np.ones(2), 0.1, 0.5, np.zeros(2))
    with pytest.raises(ValueError):
        SystemConfig(2, 3, np.ones(2), 0.1, 0.5, np.zeros(2))


def test_allocation_validation():
    with pytest.raises(ValueError):
        AllocationPA(assign=np.array([[2, 0]], dtype=np.int8),
                     split_ratio=np.array([0.5]))
    with pytest.raises(ValueError):
        AllocationPA(assign=np.array([[1, 0]], dtype=np.int8),
                     split_ratio=np.array([1.5]))
