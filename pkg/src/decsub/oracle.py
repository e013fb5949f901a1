"""No-regret online linear optimization over the feasible region.

Projected online gradient ascent on linear payoffs <d_t, v>: after each
payoff vector the point moves along d_t with step c / (B_t * sqrt(t)), where
B_t is a running max of observed payoff norms, and projects back onto K.
Measured regret against the best fixed point stays O(sqrt(t)).
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError
from .region import FeasibleRegion

_NORM_FLOOR = 1e-9


class LinearOracle:
    """State of one projected-ascent oracle; one instance per (node, phase)."""

    def __init__(self, region: FeasibleRegion, step_scale: float = None):
        if step_scale is None:
            step_scale = region.diameter
        if step_scale <= 0:
            raise InvalidParameterError("step_scale must be positive")
        self.region = region
        self.step_scale = float(step_scale)
        self.point = np.zeros(region.dimension)
        self.rounds = 0
        self._norm_bound = _NORM_FLOOR

    def predict(self) -> np.ndarray:
        return self.point.copy()

    def feedback(self, d: np.ndarray):
        d = np.asarray(d, dtype=float)
        if not np.all(np.isfinite(d)):
            raise InvalidParameterError("non-finite payoff vector")
        self.rounds += 1
        self._norm_bound = max(self._norm_bound, float(np.linalg.norm(d)))
        eta = self.step_scale / (self._norm_bound * np.sqrt(self.rounds))
        self.point = self.region.project(self.point + eta * d)


def oracle_init(region: FeasibleRegion, step_scale: float = None):
    return LinearOracle(region, step_scale)


def oracle_predict(state: LinearOracle) -> np.ndarray:
    return state.predict()


def oracle_feedback(state: LinearOracle, d) -> LinearOracle:
    state.feedback(d)
    return state


def measured_regret(region: FeasibleRegion, payoffs) -> np.ndarray:
    """Regret trajectory of a fresh oracle on the given payoff sequence.

    Compared against the best vertex of K in hindsight at every horizon
    (linear payoffs attain their optimum at a vertex).
    """
    vertices = region.extreme_points()
    if vertices is None:
        raise InvalidParameterError("region too large for vertex enumeration")
    oracle = LinearOracle(region)
    algo_payoff = np.zeros(len(payoffs))
    vertex_payoff = np.zeros((len(payoffs), len(vertices)))
    for t, d in enumerate(payoffs):
        v = oracle.predict()
        algo_payoff[t] = d @ v
        vertex_payoff[t] = vertices @ d
        oracle.feedback(d)
    best_fixed = np.cumsum(vertex_payoff, axis=0).max(axis=1)
    return best_fixed - np.cumsum(algo_payoff)
