import numpy as np
import pytest

from stochtopo.mma import GcmmaState, gcmma_step
from stochtopo.optim import (
    AdamState,
    PenaltySpec,
    adam_step,
    adam_step_bound,
    penalty_descent_direction,
    sgd_step,
)

WIDE = (-1e9, 1e9)


class TestPenalty:
    def test_satisfied_constraints_passthrough(self):
        grad = np.array([1.0, -2.0, 3.0])
        h = penalty_descent_direction(grad, np.array([-0.5]),
                                      np.ones((1, 3)),
                                      PenaltySpec(kappa=np.array([1000.0])))
        np.testing.assert_array_equal(h, grad)

    def test_zero_kappa_passthrough(self):
        grad = np.array([1.0, -2.0])
        h = penalty_descent_direction(grad, np.array([0.7]),
                                      np.ones((1, 2)),
                                      PenaltySpec(kappa=np.array([0.0])))
        np.testing.assert_array_equal(h, grad)

    def test_scalar_chain_rule(self):
        # g = 0.1, grad g = 1, kappa = 1000: h = 2 * 1000 * 0.1 * 1 = 200
        h = penalty_descent_direction(np.zeros(1), np.array([0.1]),
                                      np.ones((1, 1)),
                                      PenaltySpec(kappa=np.array([1000.0])))
        assert h[0] == pytest.approx(200.0)

    def test_descent_for_merit_function(self):
        # with exact gradients h equals the merit gradient, so their inner
        # product is positive whenever h is nonzero
        rng = np.random.default_rng(0)
        for _ in range(10):
            grad = rng.normal(size=6)
            g = rng.normal(size=2)
            dg = rng.normal(size=(2, 6))
            kappa = PenaltySpec(kappa=np.array([10.0, 5.0]))
            h = penalty_descent_direction(grad, g, dg, kappa)
            assert h @ h > 0.0

    def test_negative_kappa_rejected(self):
        with pytest.raises(ValueError):
            PenaltySpec(kappa=np.array([-1.0]))


class TestSgd:
    def test_zero_direction(self):
        theta = np.array([0.3, -0.2])
        np.testing.assert_array_equal(
            sgd_step(0.05, theta, np.zeros(2), WIDE), theta)

    def test_formula(self):
        out = sgd_step(0.05, np.zeros(2), np.array([1.0, -1.0]), WIDE)
        np.testing.assert_allclose(out, [-0.05, 0.05])

    def test_clamp(self):
        out = sgd_step(1.0, np.zeros(1), np.array([10.0]), (-0.5, 0.5))
        assert out[0] == -0.5


class TestAdam:
    def test_first_step_is_signed_learning_rate(self):
        state = AdamState.fresh(3, eta=0.05)
        h = np.array([2.0, -0.3, 1e-4])
        theta, state = adam_step(state, np.zeros(3), h, WIDE)
        np.testing.assert_allclose(theta, -0.05 * np.sign(h), rtol=1e-3)
        assert state.k == 1

    def test_zero_gradient_never_moves(self):
        state = AdamState.fresh(2, eta=0.1)
        theta = np.array([0.4, -0.4])
        for _ in range(5):
            theta, state = adam_step(state, theta, np.zeros(2), WIDE)
        np.testing.assert_array_equal(theta, [0.4, -0.4])

    def test_two_constant_steps(self):
        # hand iteration: constant gradient keeps hat m / sqrt(hat v) = 1,
        # so each step moves by about -eta
        state = AdamState.fresh(1, eta=0.1)
        theta = np.zeros(1)
        theta, state = adam_step(state, theta, np.array([2.0]), WIDE)
        assert theta[0] == pytest.approx(-0.1, rel=1e-6)
        theta, state = adam_step(state, theta, np.array([2.0]), WIDE)
        assert theta[0] == pytest.approx(-0.2, rel=1e-6)

    def test_constant_gradient_steps_bounded_by_eta(self):
        state = AdamState.fresh(1, eta=0.05)
        theta = np.zeros(1)
        for _ in range(50):
            new, state = adam_step(state, theta, np.array([3.7]), WIDE)
            assert abs(new[0] - theta[0]) <= 0.05 * (1.0 + 1e-8)
            theta = new

    def test_step_bound_at_k1_is_one(self):
        state = AdamState.fresh(1)
        assert adam_step_bound(state, 1) == pytest.approx(1.0)

    def test_quiet_then_spike_exceeds_eta_but_not_bound(self):
        # a long quiet history followed by constant gradients produces
        # steps larger than eta; the provable bound still holds
        state = AdamState.fresh(1, eta=1.0)
        theta = np.zeros(1)
        for _ in range(400):
            theta, state = adam_step(state, theta, np.array([1e-12]), WIDE)
        deltas = []
        for _ in range(5):
            new, state = adam_step(state, theta, np.array([1.0]), WIDE)
            deltas.append(abs(new[0] - theta[0]))
            theta = new
        assert max(deltas) > 1.0  # the naive eta bound genuinely fails
        assert max(deltas) <= adam_step_bound(state, state.k) * (1 + 1e-9)

    def test_bounds_respected(self):
        state = AdamState.fresh(1, eta=0.5)
        theta = np.array([0.0])
        theta, state = adam_step(state, theta, np.array([5.0]), (-0.1, 0.1))
        assert theta[0] == -0.1


def quadratic_problem(theta):
    f = float((theta[0] - 1.0) ** 2)
    df = np.array([2.0 * (theta[0] - 1.0)])
    g = np.array([theta[0] - 0.4])
    dg = np.array([[1.0]])
    return f, df, g, dg


class TestGcmma:
    def test_constrained_quadratic(self):
        # min (t-1)^2 s.t. t <= 0.4 on [0, 1]: KKT point is t = 0.4
        theta = np.array([0.0])
        state = GcmmaState.fresh(0.0, 1.0, 1)
        for _ in range(30):
            f, df, g, dg = quadratic_problem(theta)
            theta, state = gcmma_step(state, theta, f, df, g, dg)
        assert abs(theta[0] - 0.4) < 1e-4
        assert state.kkt_residual < 1e-8

    def test_stationary_point_does_not_move(self):
        # residual motion is the interior-point bias of the inactive
        # constraint's multiplier at the final barrier value
        theta = np.array([0.3])
        state = GcmmaState.fresh(0.0, 1.0, 1)
        f, df, g, dg = 0.0, np.zeros(1), np.array([-0.1]), np.array([[1.0]])
        new, state = gcmma_step(state, theta, f, df, g, dg)
        assert abs(new[0] - 0.3) < 1e-3

    def test_monotone_decrease_on_convex_linear(self):
        # on a linear objective every move-limited step is a strict
        # improvement, so the no-inner-iteration update is monotone
        cost = np.array([1.0, -2.0, 0.5])
        theta = np.array([0.5, 0.5, 0.5])
        state = GcmmaState.fresh(0.0, 1.0, 3)
        prev = float(cost @ theta)
        for _ in range(15):
            theta, state = gcmma_step(state, theta, prev, cost,
                                      np.array([-1.0]), np.zeros((1, 3)))
            now = float(cost @ theta)
            assert now < prev + 1e-12
            prev = now
        np.testing.assert_allclose(theta, [0.0, 1.0, 0.0], atol=1e-6)

    def test_bounded_overshoot_on_convex_quadratic(self):
        # without conservative inner iterations, components with small
        # gradients take full move-limit hops across their optimum, so the
        # objective can rise transiently; any single increase is bounded
        # by the move-limit crossing bound sum_i curv_i * move^2, and the
        # best iterate still settles near the optimum
        target = np.array([0.7, 0.2, 0.55])

        def func(t):
            return float(np.sum((t - target) ** 2)), 2.0 * (t - target)

        theta = np.array([0.05, 0.9, 0.1])
        state = GcmmaState.fresh(0.0, 1.0, 3)
        crossing_bound = 3 * 1.0 * 0.1**2  # n * curvature * move^2
        prev, _ = func(theta)
        best = prev
        for _ in range(60):
            f, df = func(theta)
            theta, state = gcmma_step(state, theta, f, df,
                                      np.array([-1.0]), np.zeros((1, 3)))
            now, _ = func(theta)
            assert now <= prev + crossing_bound
            best = min(best, now)
            prev = now
        # terminal limit cycle sits at the 0.01-range asymptote floor
        assert best < 1e-4
        np.testing.assert_allclose(theta, target, atol=0.02)

    def test_move_limit_respected(self):
        theta = np.array([0.0])
        state = GcmmaState.fresh(0.0, 1.0, 1, move_limit=0.1)
        f, df, g, dg = quadratic_problem(theta)
        new, _ = gcmma_step(state, theta, f, df, g, dg)
        assert new[0] <= 0.1 + 1e-12

    def test_box_bounds_respected(self):
        rng = np.random.default_rng(1)
        theta = np.array([0.5, 0.5])
        state = GcmmaState.fresh(0.0, 1.0, 2, move_limit=0.5)
        for _ in range(10):
            df = rng.normal(size=2) * 10.0
            g = np.array([rng.normal()])
            dg = rng.normal(size=(1, 2))
            theta, state = gcmma_step(state, theta, 0.0, df, g, dg)
            assert np.all(theta >= 0.0) and np.all(theta <= 1.0)

    def test_infeasible_approximation_restores(self):
        # constraints that cannot both hold: elastic slack reports it
        theta = np.array([0.5])
        state = GcmmaState.fresh(0.0, 1.0, 1)
        g = np.array([theta[0] - 0.1, -theta[0] + 0.9])  # t<=0.1 and t>=0.9
        dg = np.array([[1.0], [-1.0]])
        new, state = gcmma_step(state, theta, 0.0, np.zeros(1), g, dg)
        assert state.elastic_violation > 1e-6
        assert 0.0 <= new[0] <= 1.0
