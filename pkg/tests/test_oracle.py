import numpy as np
import pytest

from decsub.errors import InvalidParameterError
from decsub.oracle import (
    LinearOracle,
    measured_regret,
    oracle_feedback,
    oracle_init,
    oracle_predict,
)
from decsub.region import FeasibleRegion


@pytest.fixture
def region():
    return FeasibleRegion(2, budget=1.0)


def test_fresh_oracle_at_origin(region):
    s = oracle_init(region)
    assert np.array_equal(oracle_predict(s), np.zeros(2))
    assert s.rounds == 0


def test_default_step_scale_is_diameter(region):
    assert oracle_init(region).step_scale == region.diameter


def test_init_deterministic(region):
    a, b = oracle_init(region, 1.0), oracle_init(region, 1.0)
    assert np.array_equal(a.point, b.point)
    assert a.rounds == b.rounds and a.step_scale == b.step_scale


def test_first_feedback_big_step(region):
    # eta_1 = sqrt(2)/(1*1) so 0 + sqrt(2)*(1,0) clamps to (1,0), budget ok
    s = oracle_init(region, step_scale=np.sqrt(2))
    oracle_feedback(s, np.array([1.0, 0.0]))
    assert np.allclose(oracle_predict(s), [1.0, 0.0], atol=1e-9)
    assert s.rounds == 1


def test_predictions_constant_between_feedbacks(region):
    s = oracle_init(region)
    oracle_feedback(s, np.array([1.0, 0.5]))
    assert np.array_equal(oracle_predict(s), oracle_predict(s))


def test_zero_payoffs_keep_origin(region):
    s = oracle_init(region)
    for _ in range(20):
        oracle_feedback(s, np.zeros(2))
    assert np.allclose(oracle_predict(s), 0.0, atol=1e-12)


def test_nonfinite_payoff_rejected(region):
    with pytest.raises(InvalidParameterError):
        oracle_init(region).feedback(np.array([np.inf, 0.0]))


def test_points_stay_feasible(region):
    rng = np.random.default_rng(0)
    s = LinearOracle(region)
    for _ in range(300):
        s.feedback(rng.standard_normal(2) * 3)
        assert region.contains(s.predict(), 1e-9)


def test_constant_payoff_average_approaches_lmo(region):
    s = LinearOracle(region)
    d = np.array([1.0, 0.0])
    payoffs = []
    for _ in range(200):
        payoffs.append(d @ s.predict())
        s.feedback(d)
    assert abs(np.mean(payoffs) - 1.0) <= 0.15


def test_alternating_payoffs_regret(region):
    payoffs = [((-1) ** t) * np.array([1.0, 0.0]) for t in range(10_000)]
    regret = measured_regret(region, payoffs)
    bound = 3 * region.diameter * np.sqrt(np.arange(1, 10_001))
    assert np.all(regret <= bound)


@pytest.mark.parametrize("kind", ["constant", "random", "sign_flip"])
def test_sqrt_t_regret_bound(kind, region):
    rng = np.random.default_rng(5)
    t_max = 10_000
    if kind == "constant":
        payoffs = [np.array([0.7, 0.3])] * t_max
    elif kind == "random":
        payoffs = [rng.standard_normal(2) for _ in range(t_max)]
    else:
        payoffs = [((-1) ** t) * np.array([1.0, -1.0]) for t in range(t_max)]
    g = max(np.linalg.norm(d) for d in payoffs)
    regret = measured_regret(region, payoffs)
    bound = 1.5 * region.diameter * g * np.sqrt(np.arange(1, t_max + 1))
    assert np.all(regret <= bound)
