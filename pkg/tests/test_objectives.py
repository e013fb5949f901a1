import numpy as np
import pytest

from decsub.errors import InvalidParameterError, PreconditionViolationError
from decsub.objectives import (
    FacilityLocationObjective,
    ObjectiveStream,
    QuadraticObjective,
    facility_set_value,
    facility_stream,
    noisy_gradient,
    quadratic_stream,
)


def test_set_value_max():
    assert facility_set_value(np.array([[4.0, 2.0]]), {0, 1}) == 4.0


def test_set_value_empty():
    assert facility_set_value(np.array([[4.0, 2.0]]), set()) == 0.0


def test_set_value_two_users():
    r = np.array([[4.0, 2.0], [1.0, 5.0]])
    assert facility_set_value(r, {1}) == 7.0


def test_set_value_index_out_of_range():
    with pytest.raises(InvalidParameterError):
        facility_set_value(np.array([[4.0, 2.0]]), {2})


def test_multilinear_value_half_half():
    f = FacilityLocationObjective(np.array([[4.0, 2.0]]))
    # brute force over 4 subsets: .25*4 + .25*4 + .25*2 + .25*0
    assert abs(f.value(np.array([0.5, 0.5])) - 2.5) <= 1e-12


def test_multilinear_value_zero():
    f = FacilityLocationObjective(np.array([[4.0, 2.0]]))
    assert f.value(np.zeros(2)) == 0.0


def test_multilinear_value_deterministic_set():
    f = FacilityLocationObjective(np.array([[4.0, 2.0]]))
    assert abs(f.value(np.array([1.0, 0.0])) - 4.0) <= 1e-12


def test_multilinear_gradient_by_hand():
    f = FacilityLocationObjective(np.array([[4.0, 2.0]]))
    # coord 0: .5*(4-2) + .5*4 = 3; coord 1: .5*0 + .5*2 = 1
    assert np.allclose(f.gradient(np.array([0.5, 0.5])), [3.0, 1.0],
                       atol=1e-12)


def test_gradient_at_zero_is_rating_sum():
    rng = np.random.default_rng(0)
    r = rng.uniform(0, 5, size=(3, 6))
    f = FacilityLocationObjective(r)
    assert np.allclose(f.gradient(np.zeros(6)), r.sum(axis=0), atol=1e-12)


def test_gradient_zero_rated_coordinate():
    r = np.array([[4.0, 0.0, 2.0], [1.0, 0.0, 3.0]])
    f = FacilityLocationObjective(r)
    x = np.random.default_rng(1).uniform(0, 1, size=3)
    assert abs(f.gradient(x)[1]) <= 1e-12


def test_value_matches_enumeration():
    rng = np.random.default_rng(2)
    r = rng.uniform(0, 5, size=(2, 8))
    f = FacilityLocationObjective(r)
    for _ in range(20):
        x = rng.uniform(0, 1, size=8)
        assert abs(f.value(x) - f.value_by_enumeration(x)) <= 1e-10


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    r = rng.uniform(0, 5, size=(4, 7))
    f = FacilityLocationObjective(r)
    h = 1e-5
    for _ in range(10):
        x = rng.uniform(0.1, 0.9, size=7)
        g = f.gradient(x)
        for m in range(7):
            e = np.zeros(7)
            e[m] = h
            fd = (f.value(x + e) - f.value(x - e)) / (2 * h)
            assert abs(g[m] - fd) <= 1e-5


def test_dr_gradient_antitone_and_value_monotone():
    rng = np.random.default_rng(4)
    r = rng.uniform(0, 5, size=(3, 6))
    f = FacilityLocationObjective(r)
    for _ in range(200):
        x = rng.uniform(0, 1, size=6)
        y = np.clip(x + rng.uniform(0, 1, size=6) * (1 - x), 0, 1)
        assert np.all(f.gradient(x) >= f.gradient(y) - 1e-8)
        assert f.value(x) <= f.value(y) + 1e-10


def test_up_concavity():
    rng = np.random.default_rng(5)
    r = rng.uniform(0, 5, size=(3, 5))
    f = FacilityLocationObjective(r)
    for _ in range(200):
        x = rng.uniform(0, 0.8, size=5)
        y = np.clip(x + rng.uniform(0, 1, size=5) * (1 - x), 0, 1)
        assert f.value(y) <= f.value(x) + f.gradient(x) @ (y - x) + 1e-8


def test_domain_rejected():
    f = FacilityLocationObjective(np.array([[1.0, 1.0]]))
    with pytest.raises(InvalidParameterError):
        f.value(np.array([1.2, 0.0]))


def test_quadratic_value_gradient():
    q = QuadraticObjective(H=np.array([[0.0, -1.0], [-1.0, 0.0]]),
                           h=np.array([1.0, 1.0]))
    assert q.value(np.zeros(2)) == 0.0
    assert np.allclose(q.gradient(np.zeros(2)), [1.0, 1.0])
    assert abs(q.value(np.ones(2)) - 1.0) <= 1e-12  # 2 + (-2)/2
    assert np.allclose(q.gradient(np.array([0.5, 0.5])), [0.5, 0.5])


def test_quadratic_auto_h_monotone_on_box():
    rng = np.random.default_rng(6)
    H = -rng.random((4, 4))
    H = 0.5 * (H + H.T)
    q = QuadraticObjective(H)
    for _ in range(50):
        x = rng.uniform(0, 1, size=4)
        assert np.all(q.gradient(x) >= -1e-12)


def test_quadratic_rejects_positive_H():
    with pytest.raises(InvalidParameterError):
        QuadraticObjective(H=np.array([[0.5]]))


def test_quadratic_rejects_small_h():
    with pytest.raises(InvalidParameterError):
        QuadraticObjective(H=np.array([[-2.0]]), h=np.array([0.5]))


def test_noisy_gradient_sigma_zero():
    q = QuadraticObjective(H=-np.eye(2))
    rng = np.random.default_rng(7)
    x = np.array([0.3, 0.4])
    assert np.array_equal(noisy_gradient(q, x, 0.0, rng), q.gradient(x))


def test_noisy_gradient_mean_and_variance():
    q = QuadraticObjective(H=-np.eye(3))
    rng = np.random.default_rng(8)
    x = np.array([0.2, 0.5, 0.1])
    sigma = 0.1
    draws = np.stack([noisy_gradient(q, x, sigma, rng) for _ in range(10_000)])
    assert np.max(np.abs(draws.mean(axis=0) - q.gradient(x))) \
        <= 4 * sigma / 100
    assert np.max(np.abs(draws.var(axis=0) - sigma ** 2)) <= 0.1 * sigma ** 2


def test_stream_counts_queries_per_node():
    stream = quadratic_stream(4, 3, 2, sigma=0.0, seed=9)
    rng = np.random.default_rng(0)
    stream.noisy_gradient(0, 1, np.zeros(2), rng)
    stream.noisy_gradient(1, 1, np.zeros(2), rng)
    stream.noisy_gradient(2, 2, np.zeros(2), rng)
    assert list(stream.grad_counts) == [0, 2, 1]
    stream.reset_counters()
    assert list(stream.grad_counts) == [0, 0, 0]


def test_stream_requires_zero_at_origin():
    class Shifted:
        dimension = 2
        domain_upper = np.ones(2)

        def value(self, x):
            return 1.0

        def gradient(self, x):
            return np.zeros(2)

    with pytest.raises(PreconditionViolationError):
        ObjectiveStream([[Shifted()]])


def test_stream_grad_bound_certified():
    stream = quadratic_stream(3, 2, 4, seed=10)
    rng = np.random.default_rng(11)
    for t in range(3):
        for i in range(2):
            for _ in range(20):
                x = rng.uniform(0, 1, size=4)
                g = stream.gradient(t, i, x)
                assert np.linalg.norm(g) <= stream.grad_bound + 1e-12


def test_facility_stream_average_value():
    blocks = [[np.array([[4.0, 2.0]]), np.array([[1.0, 5.0]])]]
    stream = facility_stream(blocks)
    x = np.array([1.0, 0.0])
    assert abs(stream.average_value(x) - (4.0 + 1.0) / 2) <= 1e-12
