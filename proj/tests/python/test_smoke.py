import json
import math

import numpy as np
import pytest

import wavecollapse as wc


@pytest.fixture(scope="module")
def grid():
    return wc.default_grid()


@pytest.fixture(scope="module")
def psi0(grid):
    return wc.init_gaussian(grid, 0.0, 0.02)


def test_grid_and_state(grid, psi0):
    assert len(grid) == 4097
    x = grid.points()
    assert x[2048] == 0.0
    assert wc.norm2(psi0) == pytest.approx(1.0, abs=1e-12)
    assert wc.position_variance(psi0) == pytest.approx(4e-4, rel=1e-9)
    amps = psi0.amplitudes
    assert amps.dtype == np.complex128
    rebuilt = wc.Wavefunction(grid, amps)
    assert wc.l2_distance(rebuilt, psi0) == 0.0


def test_operators_vectorize():
    x = np.linspace(-0.7, 0.7, 11)
    total = wc.port_a_weight(x, 1.0) + wc.port_b_weight(x, 1.0)
    np.testing.assert_allclose(total, 1.0, atol=1e-15)
    np.testing.assert_allclose(np.abs(wc.m_a(x, 1.0)) ** 2, wc.port_a_weight(x, 1.0), atol=1e-15)
    assert wc.port_a_weight(0.1, 1.0) == pytest.approx(0.40066533460246939, abs=1e-15)


def test_single_photon(psi0):
    state, p = wc.apply_outcome(psi0, "b", 1.0)
    assert p == pytest.approx(0.5, abs=1e-12)
    assert wc.position_mean(state) > 0.0
    with pytest.raises(wc.Error):
        wc.apply_outcome(psi0, "c", 1.0)


def test_trajectory_reproducible(psi0):
    a = wc.run_trajectory(psi0, 2000, 1.0, 7)
    b = wc.run_trajectory(psi0, 2000, 1.0, 7)
    assert a.outcomes == b.outcomes
    assert a.n_a + a.n_b == 2000
    assert a.x_est == wc.estimate_position(a.n_a, a.n_b, 2000, 1.0)
    assert len(a.step_probabilities) == 2000
    record = json.loads(a.to_json())
    assert record["N"] == 2000
    dense = wc.run_trajectory(psi0, 2000, 1.0, 7, kernel="state-vector")
    assert dense.outcomes == a.outcomes


def test_collapse_narrows(psi0):
    rec = wc.run_trajectory(psi0, 10000, 1.0, 3)
    assert wc.position_variance(rec.final_state) == pytest.approx(2.5e-5, rel=0.1)
    assert wc.momentum_mean(rec.final_state) == pytest.approx(10000.0, abs=50.0)


def test_sequence_probability(psi0):
    p = wc.sequence_probability(psi0, "abba", 1.0)
    assert p["step_product"] == pytest.approx(p["closed_form"], rel=1e-10)
    total = sum(
        wc.sequence_probability(psi0, s, 1.0)["closed_form"]
        for s in ("aa", "ab", "ba", "bb")
    )
    assert total == pytest.approx(1.0, abs=1e-12)


def test_aggregate_matches_sequence(psi0):
    seq = psi0
    for o in "abbab":
        seq, _ = wc.apply_outcome(seq, o, 1.0)
    agg = wc.aggregate_operator(psi0, 2, 3, 1.0)
    assert wc.l2_distance(seq, agg) < 1e-10


def test_count_distribution(psi0):
    p = wc.outcome_distribution(psi0, 100, 1.0)
    assert p.shape == (101,)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)


def test_ensemble():
    cfg = wc.SimConfig()
    cfg.grid_points = 1025
    cfg.n_photons = 1000
    cfg.trajectories = 200
    stats = wc.run_ensemble(cfg)
    assert stats.m_trajectories == 200
    assert stats.histogram_counts.sum() == 200
    assert stats.var_xest == pytest.approx(6.5e-4, rel=0.3)
    names = {c["name"] for c in stats.comparisons}
    assert "xest_variance" in names
    report = json.loads(stats.to_json())
    assert report["m_trajectories"] == 200


def test_two_lobe_defaults():
    cfg = wc.SimConfig("two-lobe")
    assert cfg.x0 == 0.03
    assert cfg.sigma0 == 0.005
    psi = cfg.initial_state()
    assert wc.norm2(psi) == pytest.approx(1.0, abs=1e-12)


def test_errors_carry_codes(psi0):
    with pytest.raises(wc.Error) as info:
        wc.estimate_position(1, 1, 3, 1.0)
    assert info.value.code == "count-mismatch"
    with pytest.raises(wc.Error) as info:
        wc.predicted_xest_density(psi0, 10, 1.0, 0.0)
    assert info.value.code == "small-n"
    cfg = wc.SimConfig()
    cfg.x_max = 1.0
    cfg.x_min = -1.0
    with pytest.raises(wc.Error) as info:
        cfg.validate()
    assert info.value.code == "branch-violation"


def test_de_broglie():
    wavelength, momentum, product = wc.de_broglie_check(100, 1.0)
    assert wavelength == pytest.approx(2 * math.pi / 100)
    assert momentum == 100.0
    assert product == pytest.approx(1.0, abs=1e-15)


def test_criterion_runs():
    result = wc.run_criterion(2)
    assert result["passed"]
    assert result["summary"].startswith("[PASS]")
