"""Monotone continuous DR-submodular local objectives.

Two built-in families:

* the multilinear extension of a facility-location function over per-user
  ratings, with exact closed-form value and gradient via per-user sorted
  orders (no sampling noise), and
* an analytic quadratic f(x) = <h, x> + x'Hx/2 with H <= 0 entrywise and h
  large enough that the gradient stays nonnegative on the box.

A stream holds the T x N grid of local functions plus the Gaussian
stochastic-gradient oracle and per-node query counters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, PreconditionViolationError

_DOMAIN_TOL = 1e-9


def facility_set_value(ratings: np.ndarray, subset) -> float:
    """sum_u max_{m in S} r_{u,m}; the empty-set max is 0."""
    ratings = np.atleast_2d(np.asarray(ratings, dtype=float))
    subset = list(subset)
    if not subset:
        return 0.0
    n = ratings.shape[1]
    if any(m < 0 or m >= n for m in subset):
        raise InvalidParameterError("subset index out of range")
    return float(ratings[:, subset].max(axis=1).sum())


class FacilityLocationObjective:
    """Exact multilinear extension of facility location over one ratings block.

    Per user, with ratings sorted descending r_(1) >= r_(2) >= ... (ties by
    ascending movie index), the extension is
    sum_j r_(j) x_(j) prod_{l<j} (1 - x_(l)), summed over users.
    """

    def __init__(self, ratings: np.ndarray):
        ratings = np.atleast_2d(np.asarray(ratings, dtype=float))
        if ratings.size == 0:
            raise InvalidParameterError("ratings block must be nonempty")
        if not np.all(np.isfinite(ratings)) or np.any(ratings < 0):
            raise InvalidParameterError("ratings must be finite and >= 0")
        self.ratings = ratings
        self.dimension = ratings.shape[1]
        self.domain_upper = np.ones(self.dimension)
        # stable argsort of -ratings: descending rating, ascending index ties
        self._order = np.argsort(-ratings, axis=1, kind="stable")
        self._sorted_r = np.take_along_axis(ratings, self._order, axis=1)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise InvalidParameterError("dimension mismatch")
        if np.any(x < -_DOMAIN_TOL) or np.any(x > 1.0 + _DOMAIN_TOL):
            raise InvalidParameterError("point outside [0,1]^n")
        return np.clip(x, 0.0, 1.0)

    def value(self, x) -> float:
        x = self._check(x)
        xs = x[self._order]                       # (U, n) in sorted order
        keep = np.cumprod(1.0 - xs, axis=1)
        prefix = np.ones_like(xs)
        prefix[:, 1:] = keep[:, :-1]              # prod_{l<j} (1 - x_(l))
        return float((self._sorted_r * xs * prefix).sum())

    def gradient(self, x) -> np.ndarray:
        x = self._check(x)
        xs = x[self._order]
        rs = self._sorted_r
        n_users, n = xs.shape
        prefix = np.ones_like(xs)
        prefix[:, 1:] = np.cumprod(1.0 - xs, axis=1)[:, :-1]
        # tail[:, j] = expected max among items after sorted position j
        tail = np.zeros_like(xs)
        for j in range(n - 2, -1, -1):
            tail[:, j] = xs[:, j + 1] * rs[:, j + 1] \
                + (1.0 - xs[:, j + 1]) * tail[:, j + 1]
        grad_sorted = prefix * (rs - tail)
        grad = np.zeros(n)
        np.add.at(grad, self._order.ravel(), grad_sorted.ravel())
        return grad

    def value_by_enumeration(self, x) -> float:
        """Brute-force subset enumeration; testing oracle, O(2^n)."""
        x = self._check(x)
        n = self.dimension
        if n > 20:
            raise InvalidParameterError("enumeration limited to n <= 20")
        total = 0.0
        for mask in range(1 << n):
            subset = [m for m in range(n) if mask >> m & 1]
            p = np.prod([x[m] if m in subset else 1.0 - x[m]
                         for m in range(n)])
            if p > 0:
                total += p * facility_set_value(self.ratings, subset)
        return total


@dataclass(frozen=True)
class QuadraticObjective:
    """f(x) = <h, x> + x'Hx/2 with H <= 0 entrywise.

    When h is omitted it is completed as h_i = sum_j |H_ij| u_j + 0.1, which
    keeps the gradient h + Hx nonnegative over the box [0, u].
    """

    H: np.ndarray
    h: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise InvalidParameterError("H must be square")
        if np.max(H) > 0:
            raise InvalidParameterError("H must have all entries <= 0")
        n = H.shape[0]
        u = np.ones(n) if self.upper is None else \
            np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        h = self.h
        if h is None:
            h = np.abs(H) @ u + 0.1
        else:
            h = np.asarray(h, dtype=float)
            if np.any(h + H @ u < -1e-12):
                raise InvalidParameterError(
                    "h too small: gradient would go negative on the box")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "upper", u)

    @property
    def dimension(self):
        return self.H.shape[0]

    @property
    def domain_upper(self):
        return self.upper

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.h @ x + 0.5 * x @ self.H @ x)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.h + self.H @ x


def noisy_gradient(f, x, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Exact gradient plus sigma * iid standard normal noise."""
    if sigma < 0:
        raise InvalidParameterError("sigma must be >= 0")
    g = f.gradient(x)
    if sigma == 0:
        return g
    return g + sigma * rng.standard_normal(g.shape)


class ObjectiveStream:
    """T x N grid of local objectives with a shared noise level.

    Gradient queries through the stream are counted per node; the counters
    back the complexity audits.
    """

    def __init__(self, grid, sigma: float = 0.0, grad_bound: float = None,
                 smoothness: float = None):
        if not grid or not grid[0]:
            raise InvalidParameterError("empty objective grid")
        self.grid = grid
        self.horizon = len(grid)
        self.node_count = len(grid[0])
        if any(len(row) != self.node_count for row in grid):
            raise InvalidParameterError("ragged objective grid")
        self.sigma = float(sigma)
        self.dimension = grid[0][0].dimension
        zero = np.zeros(self.dimension)
        for row in grid:
            for f in row:
                if abs(f.value(zero)) > 1e-9:
                    raise PreconditionViolationError(
                        "local objectives must satisfy f(0) = 0")
        self.grad_bound = grad_bound if grad_bound is not None \
            else self._estimate_grad_bound()
        self.smoothness = smoothness
        self.grad_counts = np.zeros(self.node_count, dtype=np.int64)

    def _estimate_grad_bound(self):
        # gradient antitonicity: coordinates are nonnegative and maximal at
        # x = 0, so ||grad f(0)|| certifies the bound for both families
        zero = np.zeros(self.dimension)
        return max(float(np.linalg.norm(f.gradient(zero)))
                   for row in self.grid for f in row)

    def objective(self, t: int, i: int):
        return self.grid[t][i]

    def value(self, t, i, x) -> float:
        return self.grid[t][i].value(x)

    def gradient(self, t, i, x) -> np.ndarray:
        return self.grid[t][i].gradient(x)

    def noisy_gradient(self, t, i, x, rng) -> np.ndarray:
        self.grad_counts[i] += 1
        return noisy_gradient(self.grid[t][i], x, self.sigma, rng)

    def reset_counters(self):
        self.grad_counts[:] = 0

    def average_value(self, x) -> float:
        return sum(f.value(x) for row in self.grid for f in row) \
            / (self.horizon * self.node_count)

    def average_gradient(self, x) -> np.ndarray:
        g = np.zeros(self.dimension)
        for row in self.grid:
            for f in row:
                g += f.gradient(x)
        return g / (self.horizon * self.node_count)


def quadratic_stream(horizon: int, node_count: int, dimension: int,
                     sigma: float = 0.0, seed: int = 0,
                     scale: float = 1.0) -> ObjectiveStream:
    """Random quadratic grid: each cell gets an independent H <= 0."""
    rng = np.random.default_rng(seed)
    grid = []
    for _ in range(horizon):
        row = []
        for _ in range(node_count):
            H = -scale * rng.random((dimension, dimension))
            H = 0.5 * (H + H.T)
            row.append(QuadraticObjective(H))
        grid.append(row)
    ops = [float(np.linalg.norm(f.H, 2)) for row in grid for f in row]
    grads = [float(np.linalg.norm(f.gradient(np.zeros(dimension))))
             for row in grid for f in row]
    return ObjectiveStream(grid, sigma=sigma, grad_bound=max(grads),
                           smoothness=max(ops))


def facility_stream(blocks, sigma: float = 0.0) -> ObjectiveStream:
    """Build a stream from per-round, per-node ratings blocks.

    blocks[t][i] is the (users x movies) ratings array of node i at round t.
    """
    grid = [[FacilityLocationObjective(cell) for cell in row]
            for row in blocks]
    return ObjectiveStream(grid, sigma=sigma)
