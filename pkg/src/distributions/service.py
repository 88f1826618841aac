"""
Operations on cost priors.

Key functionalities include:
- Building priors from the descriptors found in model files.
- Evaluating the virtual cost and its inverse with the linear right-extension.
- Checking regularity on a numeric grid.
- Drawing seeded samples for the Monte-Carlo estimators.
"""

import logging
from typing import Any, Dict, Optional

import numpy as np
from pydantic import TypeAdapter, ValidationError

from src.config import settings
from src.distributions.models import CostDistribution
from src.exceptions import DistributionDomainError, NonRegularDistributionError

logger = logging.getLogger(__name__)

distribution_adapter = TypeAdapter(CostDistribution)


def build_distribution(descriptor: Dict[str, Any]) -> CostDistribution:
    """
    Validates a distribution descriptor.

    Args:
        descriptor (Dict[str, Any]): A mapping such as `{"dist": "uniform", "lo": 0, "hi": 30}`.

    Returns:
        CostDistribution: The immutable prior.

    Raises:
        DistributionDomainError: If the descriptor is malformed or names an unknown kind.
    """
    try:
        return distribution_adapter.validate_python(descriptor)
    except ValidationError as e:
        raise DistributionDomainError(f"malformed distribution {descriptor!r}: {e}") from e


def describe(distribution: CostDistribution) -> Dict[str, Any]:
    return distribution.model_dump(mode="json")


def virtual_cost(distribution: CostDistribution, x: float) -> float:
    return distribution.virtual_cost(x)


def inverse_virtual_cost(distribution: CostDistribution, y: float) -> float:
    """
    Returns the smallest cost whose virtual cost reaches `y`.

    Tiny negative arguments (floating-point noise of payment thresholds) are clamped to zero;
    larger negative ones are left to the prior, which maps them to the bottom of its support.

    Raises:
        NonRegularDistributionError: If the prior is not regular or cannot be inverted.
    """
    if -settings.tolerance <= y < 0:
        y = 0.0
    return distribution.inverse_virtual_cost(y)


def check_regularity(distribution: CostDistribution, grid_points: Optional[int] = None) -> bool:
    grid_points = grid_points or settings.regularity_grid_points
    if grid_points < 2:
        raise DistributionDomainError("regularity grid needs at least two points")
    regular = distribution.is_regular(grid_points)
    logger.debug("Regularity of %s on %d points: %s", distribution.dist, grid_points, regular)
    return regular


def require_payment_support(distribution: CostDistribution, agent: int) -> None:
    if not distribution.supports_payments:
        raise NonRegularDistributionError(
            f"agent {agent} has a '{distribution.dist}' prior which cannot be used for payments"
        )


def sample(distribution: CostDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    if size < 1:
        raise DistributionDomainError("sample size must be positive")
    return distribution.sample(rng, size)
