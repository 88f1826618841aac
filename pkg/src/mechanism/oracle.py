"""
Brute-force oracles for the mechanism.

`allocation_oracle` scans every social law for the best virtual objective without the
count-vector shortcut of the law table. `payment_oracle` recomputes an agent's payment
numerically: its bid times its restriction count, plus the integral of the count as its bid
sweeps upward. The count is a nonincreasing step function, so every grid cell with distinct
end values is bisected down to the jump before integrating.
"""

import logging
from typing import Optional, Sequence, Tuple

from src.config import settings
from src.distributions.service import inverse_virtual_cost
from src.exceptions import InputError
from src.ilp.builder import virtual_costs
from src.ilp.solver import Candidate, better
from src.mechanism.service import ProfitOptimalMechanism
from src.model.models import SocialLaw
from src.model.service import apply_law, check_bids, check_enumeration_limit, enumerate_social_laws, law_indicator, restrictable_count
from src.valuation.service import valuate

logger = logging.getLogger(__name__)


def allocation_oracle(mechanism: ProfitOptimalMechanism, bids: Sequence[float], fixed: Optional[Tuple[int, int]] = None) -> Tuple[SocialLaw, float]:
    """
    The best law and its objective, by valuating every social law under the bid profile.

    Returns:
        Tuple[SocialLaw, float]: The chosen law under the shared tie-break and its objective.

    Raises:
        InputError: If no law forbids exactly the fixed count.
    """
    structure = mechanism.structure
    check_enumeration_limit(structure)
    costs = virtual_costs(structure, bids)
    incumbent: Optional[Candidate] = None
    chosen: Optional[SocialLaw] = None
    for law in enumerate_social_laws(structure):
        if fixed is not None and law.size(fixed[0]) != fixed[1]:
            continue
        value = valuate(apply_law(structure, law), mechanism.feature_set)
        objective = value - sum(costs[agent] * law.size(agent) for agent in structure.agents)
        candidate = (objective, sum(law.size(agent) for agent in structure.agents), law_indicator(structure, law))
        if better(candidate, incumbent):
            incumbent, chosen = candidate, law
    if chosen is None:
        raise InputError(f"no social law forbids exactly {fixed[1]} actions of agent {fixed[0]}")
    return chosen, incumbent[0]


def default_horizon(mechanism: ProfitOptimalMechanism, bids: Sequence[float], agent: int, step: float) -> float:
    """
    A bid beyond which the agent is never restricted.

    No restriction of the agent can gain more than the total feature value plus whatever the
    other agents' negative virtual costs could add.
    """
    structure = mechanism.structure
    costs = virtual_costs(structure, bids)
    gain = mechanism.feature_set.total_value + sum(
        max(0.0, -costs[other]) * restrictable_count(structure, other)
        for other in structure.agents if other != agent
    )
    return inverse_virtual_cost(structure.cost_models[agent], gain) + step


def payment_oracle(
    mechanism: ProfitOptimalMechanism,
    bids: Sequence[float],
    agent: int,
    t_max: Optional[float] = None,
    step: Optional[float] = None,
) -> float:
    """
    The agent's threshold payment by sweeping its bid from its report up to `t_max`.

    Args:
        mechanism (ProfitOptimalMechanism): Allocation used for every evaluation.
        bids (Sequence[float]): The bid profile.
        agent (int): The paid agent.
        t_max (Optional[float]): End of the sweep; past the last turning point by default.
        step (Optional[float]): Grid step; settings default.

    Raises:
        InputError: If the step is not positive, or the agent is still restricted at `t_max`.
    """
    step = settings.oracle_step if step is None else step
    if step <= 0:
        raise InputError(f"oracle step must be positive, got {step}")
    profile = list(check_bids(mechanism.structure, bids))
    bid = profile[agent - 1]
    if t_max is None:
        t_max = max(default_horizon(mechanism, profile, agent, step), bid + step)
    resolution = settings.bisection_tolerance

    def count(t: float) -> int:
        profile[agent - 1] = t
        return mechanism.restricted_count(profile, agent)

    def integrate(a: float, b: float, count_a: int, count_b: int) -> float:
        if count_a == count_b:
            return count_a * (b - a)
        if b - a <= resolution:
            return 0.5 * (count_a + count_b) * (b - a)
        middle = 0.5 * (a + b)
        count_middle = count(middle)
        return integrate(a, middle, count_a, count_middle) + integrate(middle, b, count_middle, count_b)

    initial = count(bid)
    final = count(t_max)
    if final > 0:
        raise InputError(
            f"agent {agent} is still restricted ({final} actions) at t_max={t_max}; use a larger bound"
        )
    total = initial * bid
    a, count_a = bid, initial
    while a < t_max:
        b = min(a + step, t_max)
        count_b = count(b)
        total += integrate(a, b, count_a, count_b)
        a, count_a = b, count_b
    logger.debug("Oracle payment of agent %d at %s: %s", agent, bids, total)
    return total
