"""Post-processing: offline benchmark, regret curves, audits, lemma probes.

The hindsight supremum in the regret definition is NP-hard to compute
exactly, so the benchmark point is produced by offline continuous greedy
(Frank-Wolfe with exact average gradients) and reports label it as
approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algorithms import Trace
from .boosting import ONE_MINUS_INV_E
from .errors import AuditFailureError, InvalidParameterError
from .objectives import ObjectiveStream
from .region import FeasibleRegion


def offline_opt(stream: ObjectiveStream, region: FeasibleRegion,
                steps: int = 200):
    """Continuous greedy on the average objective.

    x advances by lmo(grad)/steps from 0 for `steps` iterations; the result
    stays in K by convexity.  Returns (x_star, average value at x_star).
    """
    if steps < 10:
        raise InvalidParameterError("steps must be >= 10")
    x = np.zeros(stream.dimension)
    for _ in range(steps):
        x = x + region.lmo(stream.average_gradient(x)) / steps
    x = np.clip(x, 0.0, region.upper)
    return x, stream.average_value(x)


@dataclass
class RegretReport:
    alpha: float
    benchmark_point: np.ndarray
    benchmark_value: float        # per-round network-average value at x*
    cum_regret: np.ndarray        # (T, N): R_alpha(t, j)
    ratio: np.ndarray             # (T, N): R_alpha(t, j) / t
    meta: dict = field(default_factory=dict)

    @property
    def final_ratio(self) -> np.ndarray:
        return self.ratio[-1]


def alpha_regret(trace: Trace, stream: ObjectiveStream, x_star: np.ndarray,
                 alpha: float = ONE_MINUS_INV_E,
                 region: FeasibleRegion = None) -> RegretReport:
    """Cumulative alpha-regret of every node against the benchmark point.

    Uses exact (noise-free) objective values: the regret is defined over the
    true functions even when the algorithm saw noisy gradients.
    """
    if not (0.0 < alpha <= 1.0):
        raise InvalidParameterError("alpha must be in (0, 1]")
    if region is not None and not region.contains(x_star, 1e-9):
        raise InvalidParameterError("benchmark point outside K")
    horizon, n_nodes = trace.horizon, trace.node_count
    bench = np.zeros(horizon)          # (1/N) sum_i f_{t,i}(x*)
    cross = np.zeros((horizon, n_nodes))  # (1/N) sum_i f_{t,i}(x_j(t))
    for t in range(horizon):
        vals_star = [stream.value(t, i, x_star) for i in range(n_nodes)]
        bench[t] = np.mean(vals_star)
        for j in range(n_nodes):
            cross[t, j] = np.mean([stream.value(t, i, trace.actions[t, j])
                                   for i in range(n_nodes)])
    cum = alpha * np.cumsum(bench)[:, None] - np.cumsum(cross, axis=0)
    rounds = np.arange(1, horizon + 1)[:, None]
    return RegretReport(alpha=alpha, benchmark_point=x_star,
                        benchmark_value=float(bench.mean()),
                        cum_regret=cum, ratio=cum / rounds,
                        meta={"benchmark_method": "continuous_greedy",
                              "algorithm": trace.algorithm})


_EXPECTED_RATES = {"mono_dmfw": lambda tr: (1, 1),
                   "dobga": lambda tr: (tr.meta.get("grad_samples", 1), 1),
                   "dmfw": lambda tr: (tr.meta["phases"], tr.meta["phases"])}


def audit_counters(trace: Trace, algorithm_kind: str = None) -> dict:
    """Check per-node-per-round gradient queries and exchanges against the
    complexity table for the algorithm."""
    kind = algorithm_kind or trace.algorithm
    if kind not in _EXPECTED_RATES:
        raise InvalidParameterError(f"unknown algorithm kind {kind!r}")
    expected = _EXPECTED_RATES[kind](trace)
    grads = np.diff(trace.grad_queries, axis=0, prepend=0)
    exch = np.diff(trace.exchanges, axis=0, prepend=0)
    observed = (int(grads.max()), int(exch.max()))
    uniform = bool(np.all(grads == grads.max()) and np.all(exch == exch.max()))
    table = {"algorithm": kind, "grads_per_round": observed[0],
             "exchanges_per_round": observed[1],
             "expected": expected, "uniform": uniform}
    if not uniform or observed != tuple(expected):
        raise AuditFailureError(
            f"{kind}: observed per-round counters {observed} "
            f"(uniform={uniform}), expected {tuple(expected)}")
    return table


def probe_report(trace: Trace, tolerance: float = 1e-9) -> list:
    """Numeric checks of the drift/deviation/residual lemmas on a trace.

    Returns one entry per probe: observed max, analytic bound, margin
    (bound - observed, minimum over rounds), pass flag.
    """
    entries = []
    meta = trace.meta
    n_nodes = trace.node_count
    beta = meta["beta"]
    radius = meta["region_radius"]

    if trace.algorithm in ("mono_dmfw",) and "phase_x" in trace.probes:
        phase_x = trace.probes["phase_x"]     # (Q, K+1, N, n)
        phases = phase_x.shape[1] - 1
        xbar = phase_x.mean(axis=2)           # (Q, K+1, n)
        drift = np.linalg.norm(np.diff(xbar, axis=1), axis=2)
        bound = radius / phases
        entries.append(_entry("average_iterate_drift", drift.max(), bound,
                              tolerance))
        dev = np.linalg.norm(phase_x - xbar[:, :, None, :], axis=(2, 3))
        dev_bound = np.sqrt(n_nodes) * radius / (phases * (1.0 - beta))
        entries.append(_entry("consensus_deviation", dev.max(), dev_bound,
                              tolerance))
    elif trace.algorithm == "dobga":
        g1 = meta["g1_observed"]
        etas = trace.probes["etas"]
        residuals = trace.probes["residuals"]
        res_bound = etas[:, None] * ONE_MINUS_INV_E * g1
        margin = float((res_bound - residuals).min())
        entries.append({"name": "projection_residual",
                        "observed": float(residuals.max()),
                        "bound": float(res_bound.max()),
                        "margin": margin,
                        "passed": bool(margin >= -tolerance)})
        dev = trace.probes["consensus_dev"]
        decay = np.zeros_like(dev)
        for t in range(1, len(dev)):
            decay[t] = beta * decay[t - 1] + etas[t - 1]
        dev_bound = 2.0 * ONE_MINUS_INV_E * g1 * np.sqrt(n_nodes) * decay
        margin = float((dev_bound - dev).min())
        entries.append({"name": "consensus_deviation",
                        "observed": float(dev.max()),
                        "bound": float(dev_bound.max()),
                        "margin": margin,
                        "passed": bool(margin >= -1e-6)})
    return entries


def _entry(name, observed, bound, tolerance):
    return {"name": name, "observed": float(observed), "bound": float(bound),
            "margin": float(bound - observed),
            "passed": bool(observed <= bound + tolerance)}
