import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kernhalf.errors import InvalidArgumentError, InvalidInputError, ResourceError
from kernhalf.kernel import gram
from kernhalf.solver import (
    SolverOptions,
    exhaustive_erm_small,
    objective,
    oracle_grid_slack,
    predict_label,
    predict_prob,
    predict_raw,
    solve_erm,
)
from solver_refs import convex_reference, random_instance

ACCURATE = SolverOptions(max_iters=60_000)


class TestOneExample:
    # K = [[2]] (a unit point), y = 1: the prediction is 2a with 2a^2 <= B

    def test_budget_one_interpolates(self):
        _, rep = solve_erm([[2.0]], [1], 1.0, ACCURATE)
        assert rep.final_objective == pytest.approx(0.0, abs=1e-6)
        _, obj = exhaustive_erm_small([[2.0]], [1], 1.0, 41)
        assert obj == pytest.approx(0.0, abs=1e-9)

    def test_binding_budget(self):
        # at B = 3 - 2 sqrt 2 the largest prediction is sqrt(2B) = 2 - sqrt 2
        B = 3 - 2 * math.sqrt(2)
        pred, rep = solve_erm([[2.0]], [1], B, ACCURATE)
        assert rep.final_objective == pytest.approx(math.sqrt(2) - 1, abs=1e-6)
        assert rep.constraint_active
        assert pred.alpha[0] == pytest.approx(math.sqrt(B / 2), rel=1e-6)

    def test_zero_label(self):
        pred, rep = solve_erm([[2.0]], [0], 1.0)
        assert rep.final_objective == 0.0 and pred.alpha[0] == 0.0
        assert rep.iters_used == 0


def test_starts_from_zero_and_never_worsens():
    K, y = gram([[0.6, 0.0], [0.0, -0.6], [0.3, 0.3]]), [1, 0, 1]
    _, rep = solve_erm(K, y, 1.0, SolverOptions(max_iters=500))
    assert rep.objective_trace[0] == pytest.approx(2 / 3)
    assert rep.final_objective == pytest.approx(min(rep.objective_trace), abs=1e-12)
    assert len(rep.objective_trace) == rep.iters_used + 1


@pytest.mark.parametrize("schedule", ["inverse-sqrt", "constant", "restart"])
@pytest.mark.parametrize("batch", ["full", "single"])
def test_feasible_and_deterministic(schedule, batch):
    rng = np.random.default_rng(11)
    X = rng.uniform(-0.5, 0.5, (30, 3))
    y = rng.integers(0, 2, 30)
    G = gram(X)
    opts = SolverOptions(max_iters=3000, step_schedule=schedule, batch=batch, seed=4)
    pred, rep = solve_erm(G, y, 2.0, opts)
    assert pred.squared_norm() <= 2.0 * (1 + 1e-6)
    assert objective(pred.alpha, G, y) == pytest.approx(rep.final_objective, abs=1e-12)
    again, _ = solve_erm(G, y, 2.0, opts)
    assert np.array_equal(again.alpha, pred.alpha)


def test_single_sample_depends_on_seed():
    rng = np.random.default_rng(1)
    X = rng.uniform(-0.5, 0.5, (20, 2))
    y = rng.integers(0, 2, 20)
    a, _ = solve_erm(gram(X), y, 5.0, SolverOptions(max_iters=500, batch="single", seed=1))
    b, _ = solve_erm(gram(X), y, 5.0, SolverOptions(max_iters=500, batch="single", seed=2))
    assert not np.array_equal(a.alpha, b.alpha)


def test_predictions():
    X = np.array([[0.5, 0.0], [-0.5, 0.0]])
    pred, _ = solve_erm(gram(X), [1, 0], 10.0, ACCURATE)
    assert predict_label(pred, [0.9, 0.1]) == 1
    assert predict_label(pred, [-0.9, 0.1]) == 0
    assert 0.0 <= predict_prob(pred, [0.9, 0.1]) <= 1.0
    assert predict_raw(pred, X[0]) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(InvalidInputError):
        pred.raw([[0.1, 0.1, 0.1]])


def test_default_iteration_budget():
    assert SolverOptions().iteration_budget(3) == 10**6
    assert SolverOptions(tolerance=0.1).iteration_budget(3) == 3000


class TestValidation:
    def test_not_psd(self):
        with pytest.raises(InvalidInputError):
            solve_erm([[1.0, 2.0], [2.0, 1.0]], [0, 1], 1.0)

    def test_bad_budget(self):
        for B in (0.0, -1.0, math.inf):
            with pytest.raises(InvalidArgumentError):
                solve_erm([[2.0]], [1], B)

    def test_bad_labels(self):
        with pytest.raises(InvalidArgumentError):
            solve_erm([[2.0]], [0.5], 1.0)

    def test_bad_options(self):
        with pytest.raises(InvalidArgumentError):
            SolverOptions(step_schedule="adam")
        with pytest.raises(InvalidArgumentError):
            SolverOptions(max_iters=0)

    def test_oracle_limits(self):
        with pytest.raises(ResourceError):
            exhaustive_erm_small(np.eye(7), [0] * 7, 1.0)
        with pytest.raises(InvalidArgumentError):
            exhaustive_erm_small(np.eye(2), [0, 1], 1.0, grid_resolution=60)


cvxpy = pytest.importorskip("cvxpy")


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), B=st.sampled_from([0.5, 1.0, 4.0]))
def test_oracle_bracketed_by_convex_reference(seed, B):
    K, y = random_instance(np.random.default_rng(seed), m_max=4)
    ref = convex_reference(K.entries, y, B)
    res = 21
    alpha, obj = exhaustive_erm_small(K, y, B, res)
    assert float(alpha @ K.entries @ alpha) <= B * (1 + 1e-9)
    assert obj == pytest.approx(objective(alpha, K, y), abs=1e-12)
    assert ref - 1e-6 <= obj <= ref + oracle_grid_slack(K, B, res) + 1e-6


@pytest.mark.parametrize("schedule", ["inverse-sqrt", "restart"])
@pytest.mark.parametrize("seed", range(12))
def test_solver_near_convex_optimum(seed, schedule):
    rng = np.random.default_rng(1000 + seed)
    K, y = random_instance(rng)
    B = [0.5, 1.0, 4.0][seed % 3]
    ref = convex_reference(K.entries, y, B)
    pred, rep = solve_erm(K, y, B, SolverOptions(max_iters=60_000, step_schedule=schedule))
    # never below the true optimum (up to interior-point accuracy), and close to it
    assert ref - 1e-6 <= rep.final_objective <= ref + 1e-3
    assert pred.squared_norm() <= B * (1 + 1e-6)
