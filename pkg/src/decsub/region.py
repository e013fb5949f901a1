"""The feasible set K: a coordinate box intersected with a budget constraint.

K = {x : 0 <= x <= upper, sum(x) <= budget}.  The origin is always a member,
which the algorithms rely on for their zero initialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import InvalidParameterError

_PROJ_TOL = 1e-10
_PROJ_MAX_ITERS = 200
_EXTREME_POINT_CAP = 10_000


@dataclass(frozen=True)
class FeasibleRegion:
    dimension: int
    upper: np.ndarray = None
    budget: float = 1.0

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidParameterError("dimension must be positive")
        u = self.upper
        if u is None:
            u = np.ones(self.dimension)
        else:
            u = np.broadcast_to(np.asarray(u, dtype=float),
                                (self.dimension,)).copy()
        if np.any(u <= 0):
            raise InvalidParameterError("upper bounds must be positive")
        if self.budget <= 0:
            raise InvalidParameterError("budget must be positive")
        object.__setattr__(self, "upper", u)
        object.__setattr__(self, "budget", float(self.budget))
        object.__setattr__(self, "_rd_cache", None)

    def _check_dim(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise InvalidParameterError(
                f"expected vector of dimension {self.dimension}, "
                f"got shape {x.shape}")
        return x

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = self._check_dim(x)
        if tol < 0:
            raise InvalidParameterError("tol must be >= 0")
        return bool(np.all(x >= -tol) and np.all(x <= self.upper + tol)
                    and x.sum() <= self.budget + tol)

    def project(self, y) -> np.ndarray:
        """Euclidean projection onto K.

        Clamp to the box; if the budget holds we are done, otherwise bisect
        on the dual variable lam >= 0 with x(lam) = clip(y - lam, 0, upper).
        The budget residual is continuous and nonincreasing in lam.
        """
        y = self._check_dim(y)
        if not np.all(np.isfinite(y)):
            raise InvalidParameterError("cannot project a non-finite point")
        x = np.clip(y, 0.0, self.upper)
        if x.sum() <= self.budget + _PROJ_TOL:
            return x
        lo, hi = 0.0, float(np.max(y))  # at lam = max(y), x(lam) = 0
        for _ in range(_PROJ_MAX_ITERS):
            lam = 0.5 * (lo + hi)
            x = np.clip(y - lam, 0.0, self.upper)
            s = x.sum()
            if abs(s - self.budget) <= _PROJ_TOL:
                break
            if s > self.budget:
                lo = lam
            else:
                hi = lam
        return x

    def lmo(self, d) -> np.ndarray:
        """Linear maximization oracle: argmax_{v in K} <d, v>.

        Greedy: fill coordinates with d_i > 0 in descending d_i order (ties
        by ascending index) until the budget is spent.
        """
        d = self._check_dim(d)
        if not np.all(np.isfinite(d)):
            raise InvalidParameterError("non-finite direction")
        v = np.zeros(self.dimension)
        remaining = self.budget
        # stable sort on -d keeps ascending-index tie-breaking
        for i in np.argsort(-d, kind="stable"):
            if d[i] <= 0 or remaining <= 0:
                break
            take = min(self.upper[i], remaining)
            v[i] = take
            remaining -= take
        return v

    def extreme_points(self, cap: int = _EXTREME_POINT_CAP):
        """Vertices of K, or None when there would be more than cap.

        A vertex saturates a full set of box/budget constraints: a subset S
        of coordinates at their caps with sum(u_S) <= budget, plus at most
        one coordinate holding the budget remainder.
        """
        n = self.dimension
        u = self.upper
        points = [np.zeros(n)]
        for size in range(1, n + 1):
            # cheapest fill of this size must fit the budget to continue
            if np.sort(u)[:size].sum() > self.budget + 1e-12:
                break
            for S in combinations(range(n), size):
                s_sum = u[list(S)].sum()
                slack = self.budget - s_sum
                if slack < -1e-12:
                    continue
                v = np.zeros(n)
                v[list(S)] = u[list(S)]
                points.append(v)
                if slack > 1e-12:
                    for j in range(n):
                        if j in S or u[j] <= slack + 1e-12:
                            continue
                        w = v.copy()
                        w[j] = slack
                        points.append(w)
                        if len(points) > cap:
                            return None
                if len(points) > cap:
                    return None
        return np.array(points)

    def radius_diameter(self):
        """(r, diam, diam_is_exact).

        r = max ||x|| over K; diam = max ||x - y||.  Exact by vertex
        enumeration when the vertex count is small; otherwise r comes from
        greedy budget allocation and diam falls back to the sqrt(2) * r
        upper bound (flagged by diam_is_exact = False).
        """
        if self._rd_cache is not None:
            return self._rd_cache
        result = self._radius_diameter()
        object.__setattr__(self, "_rd_cache", result)
        return result

    def _radius_diameter(self):
        pts = self.extreme_points()
        if pts is not None:
            norms = np.linalg.norm(pts, axis=1)
            r = float(norms.max())
            gram = pts @ pts.T
            sq = norms[:, None] ** 2 + norms[None, :] ** 2 - 2 * gram
            diam = float(np.sqrt(max(sq.max(), 0.0)))
            return r, diam, True
        # greedy l2 maximizer: spend the budget on the largest caps
        v = np.zeros(self.dimension)
        remaining = self.budget
        for i in np.argsort(-self.upper, kind="stable"):
            take = min(self.upper[i], remaining)
            v[i] = take
            remaining -= take
            if remaining <= 0:
                break
        r = float(np.linalg.norm(v))
        return r, float(np.sqrt(2.0) * r), False

    @property
    def radius(self) -> float:
        return self.radius_diameter()[0]

    @property
    def diameter(self) -> float:
        return self.radius_diameter()[1]
