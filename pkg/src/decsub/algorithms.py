"""The three decentralized online maximization algorithms.

* run_mono_dmfw: blocked meta-Frank-Wolfe. T rounds are split into Q blocks
  of K; each block runs K Frank-Wolfe phases fed by per-phase no-regret
  linear oracles, plays the final phase point for the whole block, then
  replays the stored phase points against a random permutation of the
  block's objectives to build gradient-tracking feedback.  One gradient
  query and one neighbor exchange per node per original round.
* run_dobga: projected gradient ascent on the boosting auxiliary function
  with consensus mixing of the actions.  One query, one exchange per round.
* run_dmfw: the K-phases-per-round baseline (block length 1); K queries and
  K exchanges per node per round.

All runs produce a Trace with per-round actions, exact rewards, cumulative
counters, and the consensus snapshots the lemma probes need.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .boosting import ONE_MINUS_INV_E, ZSampler
from .errors import AssumptionViolatedError, InvalidParameterError
from .network import WeightMatrix
from .objectives import ObjectiveStream
from .oracle import LinearOracle
from .region import FeasibleRegion


@dataclass(frozen=True)
class MonoDmfwConfig:
    phases: int          # K: block length and Frank-Wolfe phase count
    blocks: int          # Q: number of blocks; horizon must equal K * Q
    gamma: float

    def __post_init__(self):
        if self.phases < 1 or self.blocks < 1:
            raise InvalidParameterError("phases and blocks must be positive")
        if not (0.0 < self.gamma <= 1.0):
            raise InvalidParameterError("gamma must be in (0, 1]")


@dataclass(frozen=True)
class DobgaConfig:
    step_schedule: callable = None   # t (1-based) -> step size, nonincreasing
    grad_samples: int = 1
    initial_point: np.ndarray = None

    def __post_init__(self):
        if self.step_schedule is None:
            object.__setattr__(self, "step_schedule", dobga_eta)
        if self.grad_samples < 1:
            raise InvalidParameterError("grad_samples must be >= 1")


@dataclass(frozen=True)
class DmfwConfig:
    phases: int                      # K inner Frank-Wolfe iterations
    eta: float = None                # default 2 / K^(2/3)
    gamma: float = None              # default 1 / K^(1/2)

    def __post_init__(self):
        if self.phases < 1:
            raise InvalidParameterError("phases must be >= 1")
        if self.eta is None:
            object.__setattr__(self, "eta", 2.0 / self.phases ** (2.0 / 3.0))
        if self.gamma is None:
            object.__setattr__(self, "gamma", 1.0 / np.sqrt(self.phases))


def mono_dmfw_eta(k: int, phases: int) -> float:
    """Tracking step schedule: 2/(k+3)^(2/3) up to floor(K/2)+1, then
    1.5/(K-k+2)^(2/3)."""
    if not 1 <= k <= phases:
        raise InvalidParameterError(f"phase index {k} outside [1, {phases}]")
    if k <= phases // 2 + 1:
        return min(1.0, 2.0 / (k + 3) ** (2.0 / 3.0))
    return min(1.0, 1.5 / (phases - k + 2) ** (2.0 / 3.0))


def dobga_eta(t: int) -> float:
    """Default projected-ascent schedule 1/sqrt(t)."""
    if t < 1:
        raise InvalidParameterError("round index must be >= 1")
    return 1.0 / np.sqrt(t)


def suggest_blocking(horizon: int):
    """(K, Q) with K ~ T^(3/5) for a power-of-two horizon."""
    if horizon < 2 or horizon & (horizon - 1):
        raise InvalidParameterError("horizon must be a power of 2")
    log2_t = horizon.bit_length() - 1
    phases = 1 << -(-3 * log2_t // 5)
    return phases, horizon // phases


@dataclass
class Trace:
    """Per-round record of one algorithm run."""

    algorithm: str
    actions: np.ndarray        # (T, N, n)
    rewards: np.ndarray        # (T, N), exact objective values
    grad_queries: np.ndarray   # (T, N) cumulative per node
    exchanges: np.ndarray      # (T, N) cumulative per node
    probes: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def horizon(self):
        return self.actions.shape[0]

    @property
    def node_count(self):
        return self.actions.shape[1]

    def save(self, path):
        arrays = {"actions": self.actions, "rewards": self.rewards,
                  "grad_queries": self.grad_queries,
                  "exchanges": self.exchanges}
        for key, val in self.probes.items():
            arrays[f"probe_{key}"] = np.asarray(val)
        meta = dict(self.meta, algorithm=self.algorithm)
        np.savez_compressed(path, _meta=np.frombuffer(
            json.dumps(meta, default=float).encode(), dtype=np.uint8),
            **arrays)

    @classmethod
    def load(cls, path):
        data = np.load(path)
        meta = json.loads(bytes(data["_meta"]).decode())
        probes = {k[len("probe_"):]: data[k] for k in data.files
                  if k.startswith("probe_")}
        return cls(algorithm=meta.pop("algorithm"), actions=data["actions"],
                   rewards=data["rewards"], grad_queries=data["grad_queries"],
                   exchanges=data["exchanges"], probes=probes, meta=meta)


def _validate_inputs(stream: ObjectiveStream, weights: WeightMatrix,
                     region: FeasibleRegion):
    if weights.node_count != stream.node_count:
        raise InvalidParameterError("weight matrix / stream node mismatch")
    if region.dimension != stream.dimension:
        raise InvalidParameterError("region / stream dimension mismatch")
    if weights.beta >= 1.0:
        raise AssumptionViolatedError("consensus matrix does not mix")
    dom = stream.grid[0][0].domain_upper
    if np.any(region.upper > dom + 1e-9):
        raise AssumptionViolatedError(
            "feasible region exceeds the objective domain box")


def _base_meta(stream, weights, region, seed, **extra):
    r, diam, diam_exact = region.radius_diameter()
    meta = {"seed": int(seed), "nodes": stream.node_count,
            "dimension": stream.dimension, "horizon": stream.horizon,
            "sigma": stream.sigma, "beta": weights.beta,
            "region_radius": r, "region_diameter": diam,
            "diameter_exact": bool(diam_exact),
            "grad_bound": stream.grad_bound}
    meta.update(extra)
    return meta


def run_mono_dmfw(stream: ObjectiveStream, weights: WeightMatrix,
                  region: FeasibleRegion, cfg: MonoDmfwConfig,
                  seed: int = 0) -> Trace:
    _validate_inputs(stream, weights, region)
    n_phases, n_blocks = cfg.phases, cfg.blocks
    horizon, n_nodes, dim = stream.horizon, stream.node_count, stream.dimension
    if horizon != n_phases * n_blocks:
        raise InvalidParameterError(
            f"horizon {horizon} != phases {n_phases} * blocks {n_blocks}")
    node_rngs = [np.random.default_rng(s)
                 for s in np.random.SeedSequence(seed).spawn(n_nodes)]
    oracles = [[LinearOracle(region) for _ in range(n_phases)]
               for _ in range(n_nodes)]
    etas = np.array([mono_dmfw_eta(k, n_phases)
                     for k in range(1, n_phases + 1)])

    actions = np.zeros((horizon, n_nodes, dim))
    rewards = np.zeros((horizon, n_nodes))
    phase_x = np.zeros((n_blocks, n_phases + 1, n_nodes, dim))
    stream.reset_counters()

    for q in range(n_blocks):
        # phase loop: build the K Frank-Wolfe iterates from oracle directions
        for k in range(1, n_phases + 1):
            directions = np.stack([oracles[i][k - 1].predict()
                                   for i in range(n_nodes)])
            phase_x[q, k] = weights.entries @ phase_x[q, k - 1] \
                + directions / n_phases

        # play loop: the final phase point serves the whole block
        block_rounds = range(q * n_phases, (q + 1) * n_phases)
        for t in block_rounds:
            actions[t] = phase_x[q, n_phases]
            for i in range(n_nodes):
                rewards[t, i] = stream.value(t, i, actions[t, i])

        # feedback loop: replay stored phase points against a per-node
        # random permutation of the block's objectives
        perms = [node_rngs[i].permutation(np.array(block_rounds))
                 for i in range(n_nodes)]
        g = np.zeros((n_nodes, dim))
        d = np.zeros((n_nodes, dim))
        for k in range(1, n_phases + 1):
            for i in range(n_nodes):
                grad = stream.noisy_gradient(perms[i][k - 1], i,
                                             phase_x[q, k, i], node_rngs[i])
                g[i] = (1.0 - etas[k - 1]) * g[i] + etas[k - 1] * grad
            d = (1.0 - cfg.gamma) * (weights.entries @ d) + cfg.gamma * g
            for i in range(n_nodes):
                oracles[i][k - 1].feedback(d[i])

    rounds = np.arange(1, horizon + 1)[:, None]
    counters = np.broadcast_to(rounds, (horizon, n_nodes)).copy()
    meta = _base_meta(stream, weights, region, seed, algorithm="mono_dmfw",
                      phases=n_phases, blocks=n_blocks, gamma=cfg.gamma)
    return Trace("mono_dmfw", actions, rewards, counters, counters.copy(),
                 probes={"phase_x": phase_x}, meta=meta)


def run_dobga(stream: ObjectiveStream, weights: WeightMatrix,
              region: FeasibleRegion, cfg: DobgaConfig = None,
              seed: int = 0) -> Trace:
    cfg = cfg or DobgaConfig()
    _validate_inputs(stream, weights, region)
    horizon, n_nodes, dim = stream.horizon, stream.node_count, stream.dimension
    etas = np.array([cfg.step_schedule(t) for t in range(1, horizon + 1)])
    if np.any(np.diff(etas) > 1e-12):
        raise InvalidParameterError("step schedule must be nonincreasing")
    seqs = np.random.SeedSequence(seed).spawn(n_nodes)
    node_rngs = [np.random.default_rng(s) for s in seqs]
    samplers = [ZSampler(np.random.default_rng(s.spawn(1)[0]))
                for s in seqs]

    if cfg.initial_point is None:
        x = np.zeros((n_nodes, dim))
    else:
        x = np.tile(np.asarray(cfg.initial_point, dtype=float), (n_nodes, 1))
        for i in range(n_nodes):
            if not region.contains(x[i], 1e-9):
                raise InvalidParameterError("initial point outside K")

    actions = np.zeros((horizon, n_nodes, dim))
    rewards = np.zeros((horizon, n_nodes))
    residuals = np.zeros((horizon, n_nodes))
    consensus_dev = np.zeros(horizon)
    g1_observed = 0.0
    stream.reset_counters()

    for t in range(horizon):
        actions[t] = x
        consensus_dev[t] = np.linalg.norm(x - x.mean(axis=0))
        for i in range(n_nodes):
            rewards[t, i] = stream.value(t, i, x[i])
        mixed = weights.entries @ x
        new_x = np.zeros_like(x)
        for i in range(n_nodes):
            est = np.zeros(dim)
            for _ in range(cfg.grad_samples):
                z = samplers[i].sample()
                raw = stream.noisy_gradient(t, i, z * x[i], node_rngs[i])
                g1_observed = max(g1_observed, float(np.linalg.norm(raw)))
                est += ONE_MINUS_INV_E * raw
            est /= cfg.grad_samples
            y = mixed[i] + etas[t] * est
            new_x[i] = region.project(y)
            residuals[t, i] = np.linalg.norm(new_x[i] - y)
        x = new_x

    rounds = np.arange(1, horizon + 1)[:, None]
    exchanges = np.broadcast_to(rounds, (horizon, n_nodes)).copy()
    grads = cfg.grad_samples * exchanges
    meta = _base_meta(stream, weights, region, seed, algorithm="dobga",
                      grad_samples=cfg.grad_samples,
                      g1_observed=g1_observed)
    return Trace("dobga", actions, rewards, grads, exchanges,
                 probes={"residuals": residuals, "etas": etas,
                         "consensus_dev": consensus_dev},
                 meta=meta)


def run_dmfw(stream: ObjectiveStream, weights: WeightMatrix,
             region: FeasibleRegion, cfg: DmfwConfig,
             seed: int = 0) -> Trace:
    """Baseline: per round, the full K-phase Frank-Wolfe pass with gradient
    tracking on the single revealed objective (block length 1)."""
    _validate_inputs(stream, weights, region)
    n_phases = cfg.phases
    horizon, n_nodes, dim = stream.horizon, stream.node_count, stream.dimension
    node_rngs = [np.random.default_rng(s)
                 for s in np.random.SeedSequence(seed).spawn(n_nodes)]
    oracles = [[LinearOracle(region) for _ in range(n_phases)]
               for _ in range(n_nodes)]

    actions = np.zeros((horizon, n_nodes, dim))
    rewards = np.zeros((horizon, n_nodes))
    stream.reset_counters()

    for t in range(horizon):
        phase_x = np.zeros((n_nodes, dim))
        phase_points = np.zeros((n_phases + 1, n_nodes, dim))
        for k in range(1, n_phases + 1):
            directions = np.stack([oracles[i][k - 1].predict()
                                   for i in range(n_nodes)])
            phase_x = weights.entries @ phase_x + directions / n_phases
            phase_points[k] = phase_x
        actions[t] = phase_x
        for i in range(n_nodes):
            rewards[t, i] = stream.value(t, i, phase_x[i])
        g = np.zeros((n_nodes, dim))
        d = np.zeros((n_nodes, dim))
        for k in range(1, n_phases + 1):
            for i in range(n_nodes):
                grad = stream.noisy_gradient(t, i, phase_points[k, i],
                                             node_rngs[i])
                g[i] = (1.0 - cfg.eta) * g[i] + cfg.eta * grad
            d = (1.0 - cfg.gamma) * (weights.entries @ d) + cfg.gamma * g
            for i in range(n_nodes):
                oracles[i][k - 1].feedback(d[i])

    rounds = np.arange(1, horizon + 1)[:, None]
    counters = n_phases * np.broadcast_to(rounds, (horizon, n_nodes)).copy()
    meta = _base_meta(stream, weights, region, seed, algorithm="dmfw",
                      phases=n_phases, eta=cfg.eta, gamma=cfg.gamma)
    return Trace("dmfw", actions, rewards, counters, counters.copy(),
                 meta=meta)
