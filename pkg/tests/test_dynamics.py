import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad_vec
from scipy.linalg import expm

from coopetition import (
    GraphSpec,
    ParameterError,
    build_laplacian,
    cascading_benchmark,
    flow,
    influence_power,
    jump,
    opinion_vector,
    propagator,
)
from coopetition.dynamics import sample_flow, write_trajectory_csv

PAIR = build_laplacian(GraphSpec(2, ((1, 2, 1.0), (2, 1, 1.0))))
LAPLACIANS = {n: build_laplacian(cascading_benchmark(n)) for n in (5, 10, 50)}


def test_opinion_vector_rejects_boundary():
    for bad in ([0.0, 0.5], [0.5, 1.0], [1.2], [], [[0.5]]):
        with pytest.raises(ParameterError):
            opinion_vector(bad)


def test_flow_zero_duration_is_identity():
    x = np.array([0.2, 0.8])
    np.testing.assert_array_equal(flow(x, PAIR, 0.0), x)


def test_flow_pair_averages():
    np.testing.assert_allclose(flow([0.2, 0.8], PAIR, 40.0), [0.5, 0.5], atol=1e-12)
    # closed form at t = 1: deviation from the mean decays as exp(-2t)
    d = 0.3 * math.exp(-2)
    np.testing.assert_allclose(flow([0.2, 0.8], PAIR, 1.0), [0.5 - d, 0.5 + d], atol=1e-15)


@pytest.mark.parametrize("n", [5, 10, 50])
@pytest.mark.parametrize("gamma", [0.01, 1 / 3, 0.9])
def test_consensus_is_fixed(n, gamma):
    x = np.full(n, gamma)
    np.testing.assert_allclose(flow(x, LAPLACIANS[n], 2.5), x, atol=1e-14)
    np.testing.assert_array_equal(jump(x, np.zeros(n), np.zeros(n)), x)


def test_flow_dimension_mismatch():
    with pytest.raises(ParameterError):
        flow([0.5, 0.5, 0.5], PAIR, 1.0)


def test_jump_examples():
    np.testing.assert_array_equal(jump([0.5], [0.0], [0.0]), [0.5])
    assert jump([0.5], [1.0], [0.0])[0] == 0.75
    assert jump([0.5], [1 / 6], [5 / 6])[0] == pytest.approx(1 / 3, abs=1e-15)


def test_jump_rejects_negative_spend():
    with pytest.raises(ParameterError):
        jump([0.5], [-0.1], [0.0])


@pytest.mark.parametrize("n", [5, 10, 50])
@pytest.mark.parametrize("T", [0.1, 1.0, 7.0])
def test_propagator_row_stochastic(n, T):
    P = propagator(LAPLACIANS[n], T)
    assert np.max(np.abs(P.sum(axis=1) - 1)) < 1e-10
    assert P.min() >= 0


@pytest.mark.parametrize("n", [10, 50])
def test_semigroup(n):
    rng = np.random.default_rng(n)
    x = rng.uniform(0.05, 0.95, n)
    L = LAPLACIANS[n]
    np.testing.assert_allclose(flow(flow(x, L, 0.3), L, 1.1), flow(x, L, 1.4), atol=1e-8)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-6, 1 - 1e-6), st.floats(0, 100), st.floats(0, 100)), min_size=1, max_size=20))
def test_jump_stays_open(triples):
    x, a1, a2 = map(np.array, zip(*triples))
    out = jump(x, a1, a2)
    assert np.all((out > 0) & (out < 1))


def test_final_mode_sums_to_n():
    for n, L in LAPLACIANS.items():
        assert influence_power(L, 1.0).total == pytest.approx(n, abs=1e-10)


def test_integral_mode_without_edges():
    rho = influence_power(np.zeros((3, 3)), 1.0, "integral")
    np.testing.assert_allclose(rho.rho, 1.0, atol=1e-12)
    rho = influence_power(np.zeros((3, 3)), 2.5, "integral")
    np.testing.assert_allclose(rho.rho, 2.5, atol=1e-12)


def mp_row_exp(L, T, dps=40):
    """1^T exp(-L T) by direct high-precision series on the row vector."""
    with mpmath.workdps(dps):
        A = -mpmath.matrix(L.tolist()) * T
        n = A.rows
        row = mpmath.matrix(1, n)
        for j in range(n):
            row[0, j] = 1
        total = row.copy()
        for k in range(1, 400):
            row = row * A / k
            total += row
            if max(abs(v) for v in row) < mpmath.mpf(10) ** (-dps + 5):
                break
        return np.array([float(total[0, j]) for j in range(n)])


def test_final_mode_benchmark_against_series():
    L = LAPLACIANS[50]
    np.testing.assert_allclose(influence_power(L, 1.0).rho, mp_row_exp(L, 1.0), atol=1e-8)


@pytest.mark.parametrize("n, T", [(10, 1.0), (50, 1.0), (10, 2.0)])
def test_integral_mode_against_adaptive_quadrature(n, T):
    L = LAPLACIANS[n]
    oracle, _ = quad_vec(lambda s: expm(-L * s).sum(axis=0), 0.0, T, epsabs=1e-12, epsrel=1e-12)
    rho = influence_power(L, T, "integral")
    np.testing.assert_allclose(rho.rho, oracle, atol=1e-8)
    assert rho.total == pytest.approx(n * T, abs=1e-8)


def test_rho_positive_on_benchmarks():
    for L in LAPLACIANS.values():
        assert np.all(influence_power(L, 1.0).rho > 0)
        assert np.all(influence_power(L, 1.0, "integral").rho > 0)


def test_bad_rho_inputs():
    with pytest.raises(ParameterError):
        influence_power(PAIR, 0.0)
    with pytest.raises(ParameterError):
        influence_power(PAIR, 1.0, "average")


def test_sample_flow_and_csv(tmp_path):
    samples = sample_flow([0.2, 0.8], PAIR, 1.0, 1.0, 4)
    assert [t for t, _ in samples] == [1.0, 1.25, 1.5, 1.75]
    np.testing.assert_allclose(samples[2][1], flow([0.2, 0.8], PAIR, 0.5), atol=1e-14)
    path = tmp_path / "traj.csv"
    write_trajectory_csv([(1, t, x) for t, x in samples], path, nodes=[2])
    lines = path.read_text().splitlines()
    assert lines[0] == "k,t,node,opinion"
    assert len(lines) == 5 and lines[1] == "1,1.0,2,0.8"
