"""
The profit-optimal social-law mechanism.

Given a structure, a feature set and a bid per agent, the mechanism selects the social law
maximizing the virtual objective

    g(law, bids) = value of the restricted structure - sum_i lambda_i(bid_i) * restrictions_i

and pays every agent the threshold payment of its restriction count, computed from the
turning points of the count as the agent's bid rises.

Key functionalities include:
- `ProfitOptimalMechanism`: allocation (optionally with one agent's count fixed), turning
  points, payments and full runs, over either allocation backend.
- `turning_points_from_levels`: the threshold sequence of a set of level values.
- `PaymentRule`: the mechanism's threshold payment and the pay-your-bid baseline.
"""

import logging
import math
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from src.config import settings
from src.distributions.service import inverse_virtual_cost, require_payment_support
from src.exceptions import BidProfileError, ConsistencyError, InfeasibleAllocationError, InputError
from src.ilp.builder import virtual_costs
from src.mechanism.allocation import BRUTE, ILP, Allocation, LawTable, allocate_brute, allocate_ilp, check_backend
from src.mechanism.schemas import MechanismReport, TurningPoint, TurningPointSeq
from src.model.models import CCGS, SocialLaw
from src.model.service import apply_law, check_bids, save_law
from src.valuation.models import FeatureSet
from src.valuation.service import check_features, valuate

logger = logging.getLogger(__name__)


class PaymentRule(str, Enum):
    MECHANISM = "mechanism"
    PAY_YOUR_BID = "pay-your-bid"


def turning_points_from_levels(
    levels: Dict[int, Optional[float]],
    initial_count: int,
    bid: float,
    inverse: Callable[[float], float],
    tolerance: Optional[float] = None,
) -> List[Tuple[float, int]]:
    """
    Walks down from the allocated count to zero along the first intersections of the levels.

    From count n at threshold p, the next turning point is the smallest bid at which some
    lower level m overtakes n, i.e. `inverse((v_n - v_m) / (n - m))`; among equal
    thresholds the smallest m wins. Infeasible levels (value `None`) are skipped.

    Args:
        levels (Dict[int, Optional[float]]): v_n for 0 <= n <= initial_count.
        initial_count (int): The count allocated at `bid`.
        bid (float): The agent's bid, the anchor of the sequence.
        inverse (Callable[[float], float]): Inverse of the agent's virtual cost.

    Returns:
        List[Tuple[float, int]]: (threshold, count) pairs; empty when `initial_count` is 0.

    Raises:
        ConsistencyError: If a threshold falls below its predecessor beyond the tolerance or
            level 0 is missing.
    """
    tolerance = settings.tolerance if tolerance is None else tolerance
    points: List[Tuple[float, int]] = []
    count, threshold = initial_count, bid
    while count > 0:
        current = levels.get(count)
        if current is None:
            raise ConsistencyError(f"level {count} is allocated but has no value")
        best_threshold, best_count = math.inf, None
        for lower in range(count):
            value = levels.get(lower)
            if value is None:
                continue
            candidate = inverse((current - value) / (count - lower))
            if best_count is None or candidate < best_threshold - tolerance:
                best_threshold, best_count = candidate, lower
        if best_count is None:
            raise ConsistencyError(f"no feasible level below {count}")
        if best_threshold < threshold:
            if threshold - best_threshold > tolerance:
                raise ConsistencyError(
                    f"turning point {best_threshold} precedes the previous threshold {threshold}"
                )
            best_threshold = threshold
        points.append((best_threshold, best_count))
        count, threshold = best_count, best_threshold
    return points


def threshold_payment(initial_count: int, points: Sequence[Tuple[float, int]]) -> float:
    payment, previous = 0.0, initial_count
    for threshold, count in points:
        payment += (previous - count) * threshold
        previous = count
    return payment


class ProfitOptimalMechanism:
    """
    Allocation and payments of the mechanism for one structure and feature set.

    Attributes:
        structure (CCGS): The unrestricted structure, carrying each agent's cost prior.
        feature_set (FeatureSet): Features defining the designer's valuation.
        backend (str): `ilp` (exact solver on the allocation program) or `brute` (law table).
        table (Optional[LawTable]): A prebuilt table of the same game, whose priors may differ.
    """

    def __init__(self, structure: CCGS, feature_set: FeatureSet, backend: str = ILP, table: Optional[LawTable] = None):
        check_features(structure, feature_set)
        if table is not None and not table.serves(structure, feature_set):
            raise InputError("the law table was built for another structure or feature set")
        self.structure = structure
        self.feature_set = feature_set
        self.backend = check_backend(backend)
        self._table: Optional[LawTable] = table

    @property
    def table(self) -> LawTable:
        if self._table is None:
            self._table = LawTable(self.structure, self.feature_set)
        return self._table

    def _check_agent(self, agent: int) -> None:
        if agent not in self.structure.agents:
            raise BidProfileError(f"agent {agent} is outside 1..{self.structure.agent_count}")

    def objective(self, bids: Sequence[float], law: SocialLaw) -> float:
        costs = virtual_costs(self.structure, bids)
        value = valuate(apply_law(self.structure, law), self.feature_set)
        return value - sum(costs[agent] * law.size(agent) for agent in self.structure.agents)

    def _allocate(self, bids: Sequence[float], fixed: Optional[Tuple[int, int]] = None) -> Optional[Allocation]:
        if self.backend == BRUTE:
            return allocate_brute(self.table, bids, fixed, self.structure)
        return allocate_ilp(self.structure, self.feature_set, bids, fixed)

    def allocate(self, bids: Sequence[float]) -> Allocation:
        allocation = self._allocate(bids)
        if allocation is None:
            raise ConsistencyError("the empty law is always feasible but no allocation was found")
        return allocation

    def allocate_fixed(self, bids: Sequence[float], agent: int, count: int) -> Allocation:
        """
        The dominant law among those forbidding exactly `count` actions of `agent`.

        The choice does not depend on the agent's own bid, so it is made at the bottom of the
        agent's cost support.

        Raises:
            InfeasibleAllocationError: If no social law forbids exactly `count` of its actions.
        """
        self._check_agent(agent)
        profile = list(check_bids(self.structure, bids))
        profile[agent - 1] = self.structure.cost_models[agent].lower
        allocation = self._allocate(profile, (agent, count)) if 0 <= count else None
        if allocation is None:
            raise InfeasibleAllocationError(
                f"no social law forbids exactly {count} actions of agent {agent}"
            )
        return allocation

    def restricted_count(self, bids: Sequence[float], agent: int) -> int:
        self._check_agent(agent)
        return self.allocate(bids).law.size(agent)

    def level_values(self, bids: Sequence[float], agent: int, top: int) -> Dict[int, Optional[float]]:
        """v_n for 0 <= n <= top: the objective of the dominant (agent, n)-law without the agent's own cost."""
        costs = virtual_costs(self.structure, bids)
        levels: Dict[int, Optional[float]] = {}
        for count in range(top + 1):
            try:
                allocation = self.allocate_fixed(bids, agent, count)
            except InfeasibleAllocationError:
                levels[count] = None
                continue
            law = allocation.law
            levels[count] = allocation.valuation - sum(
                costs[other] * law.size(other) for other in self.structure.agents if other != agent
            )
        return levels

    def turning_points(self, bids: Sequence[float], agent: int, initial_count: Optional[int] = None) -> TurningPointSeq:
        """
        The turning points of `agent`'s restriction count as its bid rises from its report.

        Raises:
            NonRegularDistributionError: If the agent's prior cannot be inverted.
        """
        self._check_agent(agent)
        profile = check_bids(self.structure, bids)
        prior = self.structure.cost_models[agent]
        require_payment_support(prior, agent)
        bid = profile[agent - 1]
        if initial_count is None:
            initial_count = self.restricted_count(profile, agent)
        if initial_count == 0:
            return TurningPointSeq(agent=agent, bid=bid, initial_count=0)
        levels = self.level_values(profile, agent, initial_count)
        points = turning_points_from_levels(
            levels, initial_count, bid, lambda y: inverse_virtual_cost(prior, y)
        )
        logger.debug("Turning points of agent %d at %s: %s", agent, profile, points)
        return TurningPointSeq(
            agent=agent,
            bid=bid,
            initial_count=initial_count,
            points=[TurningPoint(threshold=threshold, count=count) for threshold, count in points],
            level_values=levels,
        )

    def payment(self, bids: Sequence[float], agent: int) -> float:
        sequence = self.turning_points(bids, agent)
        return threshold_payment(sequence.initial_count, sequence.as_pairs())

    def agent_payment(self, bids: Sequence[float], agent: int, rule: PaymentRule = PaymentRule.MECHANISM) -> float:
        if PaymentRule(rule) == PaymentRule.PAY_YOUR_BID:
            profile = check_bids(self.structure, bids)
            return profile[agent - 1] * self.restricted_count(profile, agent)
        return self.payment(bids, agent)

    def run(self, bids: Sequence[float], with_turning_points: bool = False) -> MechanismReport:
        """
        Allocates, pays every agent and assembles the report.

        Args:
            bids (Sequence[float]): One bid per agent.
            with_turning_points (bool): Include every agent's turning-point sequence.

        Returns:
            MechanismReport: The chosen law, payments, counts, valuation, objective and profit.
        """
        profile = check_bids(self.structure, bids)
        allocation = self.allocate(profile)
        law = allocation.law
        payments: Dict[str, float] = {}
        sequences: Dict[str, TurningPointSeq] = {}
        for agent in self.structure.agents:
            if law.size(agent) == 0:
                payments[str(agent)] = 0.0
                if with_turning_points:
                    sequences[str(agent)] = TurningPointSeq(agent=agent, bid=profile[agent - 1], initial_count=0)
                continue
            sequence = self.turning_points(profile, agent, law.size(agent))
            payments[str(agent)] = threshold_payment(sequence.initial_count, sequence.as_pairs())
            sequences[str(agent)] = sequence
        profit = allocation.valuation - sum(payments.values())
        logger.info("Mechanism at %s: objective %s, profit %s", profile, allocation.objective, profit)
        return MechanismReport(
            law=save_law(self.structure, law),
            payments=payments,
            restricted_counts={str(agent): law.size(agent) for agent in self.structure.agents},
            valuation=allocation.valuation,
            virtual_objective=allocation.objective,
            profit=profit,
            turning_points=sequences if with_turning_points else None,
        )


def run_mechanism(structure: CCGS, feature_set: FeatureSet, bids: Sequence[float], backend: str = ILP, with_turning_points: bool = False) -> MechanismReport:
    return ProfitOptimalMechanism(structure, feature_set, backend).run(bids, with_turning_points)
