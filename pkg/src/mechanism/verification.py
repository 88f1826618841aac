"""
Empirical checks of the mechanism's incentive properties.

- `verify_truthfulness`: the truthful bid maximizes the agent's utility over a bid grid.
- `verify_ir`: the truthful bid yields nonnegative utility.
- `estimate_interim`: Monte-Carlo estimates of an agent's expected restrictions, payment and
  utility at a fixed cost, others' costs drawn from their priors.
- `estimate_expected_profit`: Monte-Carlo estimate of the designer's expected profit under
  truthful bidding.

Samples come from a seeded numpy generator, so estimates are reproducible.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from src.config import settings
from src.distributions.service import sample
from src.exceptions import BidProfileError, InputError
from src.mechanism.schemas import InterimEstimate, IrVerdict, ProfitEstimate, TruthfulnessVerdict
from src.mechanism.service import PaymentRule, ProfitOptimalMechanism
from src.model.service import check_bids

logger = logging.getLogger(__name__)


def utility(
    mechanism: ProfitOptimalMechanism,
    bids: Sequence[float],
    agent: int,
    true_cost: float,
    rule: PaymentRule = PaymentRule.MECHANISM,
) -> float:
    """Payment received minus the true cost of the restrictions the agent bears."""
    payment = mechanism.agent_payment(bids, agent, rule)
    return payment - true_cost * mechanism.restricted_count(bids, agent)


def bid_grid(upper: float, points: int, lower: float = 0.0) -> np.ndarray:
    if points < 2:
        raise BidProfileError("a bid grid needs at least two points")
    return np.linspace(lower, upper, points)


def _with_bid(bids: Sequence[float], agent: int, bid: float) -> list:
    profile = list(bids)
    profile[agent - 1] = float(bid)
    return profile


def verify_truthfulness(
    mechanism: ProfitOptimalMechanism,
    agent: int,
    true_cost: float,
    others_bids: Sequence[float],
    grid: Sequence[float],
    rule: PaymentRule = PaymentRule.MECHANISM,
    tolerance: Optional[float] = None,
) -> TruthfulnessVerdict:
    """
    Compares the truthful utility with the utility of every misreport on a grid.

    Args:
        mechanism (ProfitOptimalMechanism): The mechanism under test.
        agent (int): The bidding agent.
        true_cost (float): The agent's private unit cost.
        others_bids (Sequence[float]): A full bid profile; the agent's entry is overwritten.
        grid (Sequence[float]): Misreports to try.
        rule (PaymentRule): Payment rule paired with the mechanism's allocation.

    Returns:
        TruthfulnessVerdict: Whether truthful bidding is optimal within the tolerance, and the
            most profitable misreport.
    """
    tolerance = settings.tolerance if tolerance is None else tolerance
    profile = list(check_bids(mechanism.structure, others_bids))
    truthful = utility(mechanism, _with_bid(profile, agent, true_cost), agent, true_cost, rule)
    best_bid, best_utility = true_cost, truthful
    for bid in grid:
        value = utility(mechanism, _with_bid(profile, agent, bid), agent, true_cost, rule)
        if value > best_utility:
            best_bid, best_utility = float(bid), value
    violation = max(0.0, best_utility - truthful)
    holds = violation <= tolerance
    logger.info(
        "Truthfulness of agent %d at cost %s (%s): %s, worst violation %s",
        agent, true_cost, PaymentRule(rule).value, holds, violation,
    )
    return TruthfulnessVerdict(
        agent=agent,
        true_cost=true_cost,
        payment_rule=PaymentRule(rule).value,
        holds=holds,
        truthful_utility=truthful,
        best_bid=best_bid,
        best_utility=best_utility,
        worst_violation=violation,
    )


def verify_ir(
    mechanism: ProfitOptimalMechanism,
    agent: int,
    true_cost: float,
    others_bids: Sequence[float],
    tolerance: Optional[float] = None,
) -> IrVerdict:
    tolerance = settings.tolerance if tolerance is None else tolerance
    profile = _with_bid(check_bids(mechanism.structure, others_bids), agent, true_cost)
    value = utility(mechanism, profile, agent, true_cost)
    return IrVerdict(agent=agent, true_cost=true_cost, holds=value >= -tolerance, utility=value)


def _mean_and_error(values: np.ndarray) -> tuple:
    if len(values) < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values)))


def _sample_count(samples: Optional[int]) -> int:
    if samples is None:
        return settings.default_samples
    if samples < 1:
        raise InputError(f"at least one sample is needed, got {samples}")
    return samples


def _draw_profiles(mechanism: ProfitOptimalMechanism, samples: int, seed: int, skip: Optional[int] = None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    structure = mechanism.structure
    columns = []
    for agent in structure.agents:
        if agent == skip:
            columns.append(np.zeros(samples))
        else:
            columns.append(sample(structure.cost_models[agent], rng, samples))
    return np.column_stack(columns)


def estimate_interim(
    mechanism: ProfitOptimalMechanism,
    agent: int,
    cost: float,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> InterimEstimate:
    """
    Expected restrictions, payment and utility of a truthful agent with a known cost.

    Raises:
        DistributionDomainError: If another agent's prior has no sampler.
    """
    samples = _sample_count(samples)
    seed = settings.default_seed if seed is None else seed
    profiles = _draw_profiles(mechanism, samples, seed, skip=agent)
    profiles[:, agent - 1] = cost
    restrictions = np.empty(samples)
    payments = np.empty(samples)
    for row, profile in enumerate(profiles):
        bids = profile.tolist()
        restrictions[row] = mechanism.restricted_count(bids, agent)
        payments[row] = mechanism.payment(bids, agent) if restrictions[row] > 0 else 0.0
    utilities = payments - cost * restrictions
    r, r_se = _mean_and_error(restrictions)
    p, p_se = _mean_and_error(payments)
    u, u_se = _mean_and_error(utilities)
    return InterimEstimate(
        agent=agent, cost=cost, samples=samples, seed=seed,
        restrictions=r, restrictions_se=r_se,
        payment=p, payment_se=p_se,
        utility=u, utility_se=u_se,
    )


def estimate_expected_profit(
    mechanism: ProfitOptimalMechanism,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> ProfitEstimate:
    """Mean and standard error of valuation minus payments over sampled truthful cost profiles."""
    samples = _sample_count(samples)
    seed = settings.default_seed if seed is None else seed
    profiles = _draw_profiles(mechanism, samples, seed)
    profits = np.array([mechanism.run(profile.tolist()).profit for profile in profiles])
    profit, profit_se = _mean_and_error(profits)
    logger.info("Expected profit over %d samples: %s (se %s)", samples, profit, profit_se)
    return ProfitEstimate(samples=samples, seed=seed, profit=profit, profit_se=profit_se)
