"""Tests for the equity, error, and orthant-form dynamics."""

import csv
import json

import numpy as np
import pytest

from fincascade import (
    FinancialNetwork,
    external_fractions,
    failure_penalty,
    orthant_system,
    signature_of,
    simulate,
    state_from_equity,
    state_from_error,
    step_equity,
    step_error,
    step_orthant,
)
from fincascade.dynamics import write_events_json, write_trajectory_csv

from helpers import loose_instance


def oracle_net(prices=None, thresholds=None, beta=5.0):
    # hand-checkable 3-company chain: holdings 0.1 along both off-diagonals
    # of the tridiagonal band, external fractions (0.9, 0.8, 0.9)
    C = np.array(
        [
            [0.0, 0.1, 0.0],
            [0.1, 0.0, 0.1],
            [0.0, 0.1, 0.0],
        ]
    )
    if prices is None:
        prices = np.array([10.0, 12.0, 9.0])
    if thresholds is None:
        thresholds = np.array([5.0, 6.0, 4.0])
    return FinancialNetwork(C, np.eye(3), prices, thresholds, beta)


def flat_net(n, prices, thresholds, beta=1.0):
    return FinancialNetwork(
        np.zeros((n, n)), np.eye(n), np.asarray(prices, dtype=float),
        np.asarray(thresholds, dtype=float), beta,
    )


def test_penalty_cases():
    np.testing.assert_array_equal(
        failure_penalty(np.array([1.0, -1.0]), 5000.0), [0.0, 5000.0]
    )
    np.testing.assert_array_equal(failure_penalty(np.zeros(3), 7.0), np.zeros(3))
    np.testing.assert_array_equal(
        failure_penalty(np.array([-0.5, -2.0]), 2.0), [2.0, 2.0]
    )


def test_signature_boundary():
    np.testing.assert_array_equal(
        signature_of(np.array([0.0, -1e-4, 3.0])), [1.0, -1.0, 1.0]
    )
    np.testing.assert_array_equal(signature_of(np.ones(4)), np.ones(4))
    np.testing.assert_array_equal(signature_of(-np.ones(4)), -np.ones(4))


def test_step_equity_decoupled_fixed_point():
    v_lo = np.array([3.0, 4.0])
    net = flat_net(2, v_lo, v_lo)
    ext = external_fractions(net)
    state = state_from_equity(net, ext, v_lo.copy())
    nxt = step_equity(net, ext, state)
    np.testing.assert_allclose(nxt.equity, v_lo, atol=1e-12)
    np.testing.assert_allclose(nxt.error, np.zeros(2), atol=1e-12)
    assert nxt.t == 1


def test_step_equity_memoryless_without_holdings():
    prices = np.array([9.0, 2.5])
    net = flat_net(2, prices, np.array([1.0, 1.0]))
    ext = external_fractions(net)
    state = state_from_equity(net, ext, np.array([100.0, 50.0]))
    nxt = step_equity(net, ext, state)
    np.testing.assert_allclose(nxt.equity, prices, atol=1e-12)


def test_equity_error_equivalence_oracle():
    net = oracle_net()
    ext = external_fractions(net)
    x = np.array([2.0, -1.5, 0.5])
    via_error = step_error(net, ext, x)
    via_equity = step_equity(net, ext, state_from_error(net, ext, x))
    np.testing.assert_allclose(via_equity.error, via_error, atol=1e-10)


def test_step_error_decoupled_healthy():
    prices = np.array([4.0, 7.0])
    v_lo = np.array([1.0, 2.0])
    net = flat_net(2, prices, v_lo)
    ext = external_fractions(net)
    out = step_error(net, ext, np.array([0.5, 3.0]))
    np.testing.assert_allclose(out, prices - v_lo, atol=1e-12)


def test_step_error_single_failure_penalty():
    prices = np.array([4.0, 7.0])
    v_lo = np.array([1.0, 2.0])
    beta = 2.5
    net = flat_net(2, prices, v_lo, beta=beta)
    ext = external_fractions(net)
    x = np.array([0.5, -3.0])
    out = step_error(net, ext, x)
    expected = prices - v_lo - failure_penalty(x, beta)
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_orthant_system_all_healthy():
    net = oracle_net()
    ext = external_fractions(net)
    signs = np.ones(3)
    system = orthant_system(net, ext, signs)
    W = net.cross_holdings * (ext[:, None] / ext[None, :])
    np.testing.assert_allclose(system.coupling, W, atol=1e-15)
    expected_offset = W @ net.thresholds - net.thresholds + ext * net.external_income()
    np.testing.assert_allclose(system.offset, expected_offset, atol=1e-12)


def test_orthant_system_mixed_sign_flip():
    C = np.zeros((2, 2))
    C[0, 1] = 0.2  # company 1 holds company 2
    C[1, 0] = 0.1
    net = FinancialNetwork(C, np.eye(2), np.ones(2), np.ones(2), 1.0)
    ext = external_fractions(net)
    system = orthant_system(net, ext, np.array([1.0, -1.0]))
    # cross-orthant coupling flips sign: a_12 = -ext_1 c_12 / ext_2
    assert system.coupling[0, 1] == pytest.approx(-ext[0] * 0.2 / ext[1])
    assert system.coupling[0, 1] < 0.0
    assert system.coupling[0, 0] == 0.0


def test_orthant_system_no_holdings():
    net = flat_net(3, np.ones(3), np.ones(3))
    ext = external_fractions(net)
    for signs in (np.ones(3), -np.ones(3), np.array([1.0, -1.0, 1.0])):
        system = orthant_system(net, ext, signs)
        assert not system.coupling.any()


def test_step_orthant_affine_offset():
    net = oracle_net()
    ext = external_fractions(net)
    system = orthant_system(net, ext, np.ones(3))
    np.testing.assert_allclose(step_orthant(system, np.zeros(3)), system.offset)


def test_three_steppers_agree():
    rng = np.random.default_rng(500)
    for _ in range(500):
        net, ext = loose_instance(rng)
        n = net.n_companies
        x = rng.uniform(-50.0, 50.0, size=n)
        via_error = step_error(net, ext, x)
        via_equity = step_equity(net, ext, state_from_error(net, ext, x)).error
        signs = signature_of(x)
        system = orthant_system(net, ext, signs)
        via_orthant = signs * step_orthant(system, signs * x)
        np.testing.assert_allclose(via_equity, via_error, atol=1e-9)
        np.testing.assert_allclose(via_orthant, via_error, atol=1e-9)


def test_involution():
    rng = np.random.default_rng(1)
    x = rng.uniform(-5.0, 5.0, size=8)
    signs = signature_of(x)
    np.testing.assert_array_equal(signs * (signs * x), x)


def test_affine_within_orthant():
    rng = np.random.default_rng(2)
    for _ in range(50):
        net, ext = loose_instance(rng)
        n = net.n_companies
        x1 = rng.uniform(0.1, 10.0, size=n)
        x2 = rng.uniform(0.1, 10.0, size=n)
        W = net.cross_holdings * (ext[:, None] / ext[None, :])
        lhs = step_error(net, ext, x1) - step_error(net, ext, x2)
        np.testing.assert_allclose(lhs, W @ (x1 - x2), atol=1e-10)


def test_no_events_in_healthy_decoupled_market():
    prices = np.array([5.0, 6.0, 7.0])
    v_lo = prices - 1.5  # income exceeds thresholds by a margin
    net = flat_net(3, prices, v_lo)
    ext = external_fractions(net)
    traj = simulate(net, ext, np.array([0.2, 1.0, 3.0]), 50)
    assert traj.events == []
    assert traj.failed_counts().max() == 0


def test_events_match_sign_changes():
    rng = np.random.default_rng(3)
    net, ext = loose_instance(rng, n=6)
    x0 = rng.uniform(-20.0, 20.0, size=6)
    traj = simulate(net, ext, x0, 40)
    np.testing.assert_array_equal(traj.signs, np.where(traj.errors < 0.0, -1.0, 1.0))
    rebuilt = set()
    for t in range(1, traj.signs.shape[0]):
        for i in range(6):
            if traj.signs[t, i] != traj.signs[t - 1, i]:
                kind = "fail" if traj.signs[t, i] < 0 else "recover"
                rebuilt.add((t, i, kind))
    assert {(e.t, e.company, e.direction) for e in traj.events} == rebuilt


def test_trajectory_csv_format(tmp_path):
    net = oracle_net()
    ext = external_fractions(net)
    traj = simulate(net, ext, np.array([1.0, -2.0, 3.0]), 5)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x_1", "x_2", "x_3", "failed_count"]
    assert len(rows) == 7  # header + x0 row + 5 steps
    assert rows[1][0] == "0"
    # repr round-trip: parsing the text recovers the exact float
    assert float(rows[1][2]) == -2.0
    assert rows[1][4] == "1"


def test_events_json_format(tmp_path):
    net = oracle_net(prices=np.array([1.0, 1.0, 1.0]), thresholds=np.array([5.0, 6.0, 4.0]))
    ext = external_fractions(net)
    traj = simulate(net, ext, np.array([1.0, 1.0, 1.0]), 10)
    path = tmp_path / "events.json"
    write_events_json(path, traj)
    doc = json.loads(path.read_text())
    assert isinstance(doc, list)
    assert doc, "starving market must produce failure events"
    assert set(doc[0]) == {"t", "company", "direction"}
