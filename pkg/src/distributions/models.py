"""
Cost priors of the agents.

Each prior is an immutable pydantic model tagged by `dist`, so the descriptors found in model
files validate directly into these classes through the `CostDistribution` union:

- `Uniform`:         uniform prior on [lo, hi]; virtual cost 2x - lo.
- `IdentityVirtual`: degenerate prior at `point` whose virtual cost is the bid itself.
- `ZeroVirtual`:     virtual cost constantly zero; only meaningful for reduction instances.
- `PiecewiseCdf`:    piecewise-linear cumulative distribution given by knots.

Virtual costs are continued linearly past the support upper bound with the left-limit slope
at the bound, which keeps them strictly increasing on [lower, +inf) for regular priors. Costs
below the lower bound of a uniform prior are rejected.
"""

import bisect
import math
from typing import Annotated, ClassVar, List, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, model_validator

from src.exceptions import DistributionDomainError, NonRegularDistributionError


def _check_bid(x: float) -> None:
    if x < 0 or math.isnan(x):
        raise DistributionDomainError(f"virtual cost is defined for x >= 0, got {x}")


class BaseDistribution(BaseModel):
    model_config = ConfigDict(frozen=True)

    supports_payments: ClassVar[bool] = True

    @property
    def lower(self) -> float:
        return 0.0

    @property
    def upper(self) -> float:
        raise NotImplementedError

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def virtual_cost(self, x: float) -> float:
        raise NotImplementedError

    def inverse_virtual_cost(self, y: float) -> float:
        raise NotImplementedError

    def is_regular(self, grid_points: int) -> bool:
        return True

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise DistributionDomainError(f"'{self.dist}' prior has no sampler")


class Uniform(BaseDistribution):
    dist: Literal["uniform"] = "uniform"
    lo: NonNegativeFloat = 0.0
    hi: PositiveFloat

    @model_validator(mode="after")
    def check_bounds(self):
        if self.hi <= self.lo:
            raise ValueError(f"uniform prior needs lo < hi, got [{self.lo}, {self.hi}]")
        return self

    @property
    def lower(self) -> float:
        return self.lo

    @property
    def upper(self) -> float:
        return self.hi

    def pdf(self, x: float) -> float:
        return 1.0 / (self.hi - self.lo) if self.lo <= x <= self.hi else 0.0

    def cdf(self, x: float) -> float:
        return min(max((x - self.lo) / (self.hi - self.lo), 0.0), 1.0)

    def virtual_cost(self, x: float) -> float:
        _check_bid(x)
        if x < self.lo:
            raise DistributionDomainError(f"cost {x} lies below the uniform support [{self.lo}, {self.hi}]")
        return 2.0 * x - self.lo

    def inverse_virtual_cost(self, y: float) -> float:
        return max((y + self.lo) / 2.0, self.lo)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size)


class IdentityVirtual(BaseDistribution):
    dist: Literal["identity_virtual"] = "identity_virtual"
    point: NonNegativeFloat = 0.0

    @property
    def upper(self) -> float:
        return math.inf

    def pdf(self, x: float) -> float:
        return math.inf if x == self.point else 0.0

    def cdf(self, x: float) -> float:
        return 1.0 if x >= self.point else 0.0

    def virtual_cost(self, x: float) -> float:
        _check_bid(x)
        return x

    def inverse_virtual_cost(self, y: float) -> float:
        return max(y, 0.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.point)


class ZeroVirtual(BaseDistribution):
    dist: Literal["zero_virtual"] = "zero_virtual"

    supports_payments: ClassVar[bool] = False

    @property
    def upper(self) -> float:
        return math.inf

    def pdf(self, x: float) -> float:
        return 0.0

    def cdf(self, x: float) -> float:
        return 0.0

    def virtual_cost(self, x: float) -> float:
        _check_bid(x)
        return 0.0

    def inverse_virtual_cost(self, y: float) -> float:
        raise NonRegularDistributionError(
            "zero_virtual has a constant virtual cost and cannot be inverted; "
            "it is not usable for payment computation"
        )


class PiecewiseCdf(BaseDistribution):
    dist: Literal["piecewise_cdf"] = "piecewise_cdf"
    knots: Tuple[Tuple[float, float], ...]

    @model_validator(mode="after")
    def check_knots(self):
        if len(self.knots) < 2:
            raise ValueError("piecewise_cdf needs at least two knots")
        if self.knots[0] != (0.0, 0.0):
            raise ValueError("piecewise_cdf must start at knot [0, 0]")
        for (x0, f0), (x1, f1) in zip(self.knots, self.knots[1:]):
            if x1 <= x0:
                raise ValueError("piecewise_cdf knots must have strictly increasing x")
            if f1 < f0 or f1 > 1:
                raise ValueError("piecewise_cdf values must be nondecreasing within [0, 1]")
        if self.knots[-1][1] != 1.0:
            raise ValueError("piecewise_cdf must end with F = 1")
        return self

    @property
    def xs(self) -> List[float]:
        return [x for x, _ in self.knots]

    @property
    def values(self) -> List[float]:
        return [f for _, f in self.knots]

    @property
    def densities(self) -> List[float]:
        return [(f1 - f0) / (x1 - x0) for (x0, f0), (x1, f1) in zip(self.knots, self.knots[1:])]

    @property
    def upper(self) -> float:
        return self.knots[-1][0]

    def _segment(self, x: float) -> int:
        return min(bisect.bisect_right(self.xs, x) - 1, len(self.knots) - 2)

    def pdf(self, x: float) -> float:
        if x < 0 or x > self.upper:
            return 0.0
        return self.densities[self._segment(x)]

    def cdf(self, x: float) -> float:
        return float(np.interp(x, self.xs, self.values))

    def virtual_cost(self, x: float) -> float:
        _check_bid(x)
        if x > self.upper:
            # linear continuation with the left-limit slope 2 at the upper bound
            return self.upper + 1.0 / self.densities[-1] + 2.0 * (x - self.upper)
        density = self.densities[self._segment(x)]
        if density <= 0:
            raise DistributionDomainError(f"density vanishes at x={x}; virtual cost undefined")
        return x + self.cdf(x) / density

    def _virtual_cost_grid(self, grid: np.ndarray) -> np.ndarray:
        xs = np.asarray(self.xs)
        densities = np.asarray(self.densities)
        segments = np.clip(np.searchsorted(xs, grid, side="right") - 1, 0, len(densities) - 1)
        local = densities[segments]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(local > 0, grid + np.interp(grid, xs, self.values) / local, np.nan)

    def _closed_form_regular(self) -> bool:
        densities = self.densities
        if any(d <= 0 for d in densities):
            return False
        # at knot j the virtual cost jumps from F_j / f_{j-1} to F_j / f_j
        return all(
            f_j == 0 or densities[j] <= densities[j - 1]
            for j, f_j in enumerate(self.values[1:-1], start=1)
        )

    def is_regular(self, grid_points: int) -> bool:
        grid = np.linspace(0.0, self.upper, grid_points)
        lam = self._virtual_cost_grid(grid)
        if np.isnan(lam).any():
            return False
        return bool(np.all(np.diff(lam) >= -1e-12)) and self._closed_form_regular()

    def inverse_virtual_cost(self, y: float) -> float:
        if not self._closed_form_regular():
            raise NonRegularDistributionError(
                "piecewise_cdf prior is not regular; run check_regularity before computing payments"
            )
        if y <= 0:
            return 0.0
        for (a, f_a), (b, f_b), density in zip(self.knots, self.knots[1:], self.densities):
            lam_a = a + f_a / density
            lam_b = b + f_b / density
            if y <= lam_a:
                return a
            if y <= lam_b:
                return a + (y - lam_a) / 2.0
        lam_top = self.upper + 1.0 / self.densities[-1]
        return self.upper + (y - lam_top) / 2.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.interp(rng.uniform(0.0, 1.0, size), self.values, self.xs)


CostDistribution = Annotated[
    Union[Uniform, IdentityVirtual, ZeroVirtual, PiecewiseCdf],
    Field(discriminator="dist"),
]
