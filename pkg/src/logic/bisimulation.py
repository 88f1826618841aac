"""
Alternating bisimulation between two structures over the same agents.

The greatest relation is computed by refinement: start from all label-equal state pairs and
repeatedly drop pairs where, for some coalition, a move on one side cannot be matched by a
move on the other side whose outcomes are all related to some outcome of the first. All
2^k coalitions are tried, which is fine for a handful of agents.
"""

import itertools
import logging
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from src.exceptions import InvalidCoalitionError
from src.logic.checker import ModelChecker, StateSet
from src.model.models import CCGS

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]


def all_coalitions(agent_count: int) -> List[FrozenSet[int]]:
    agents = range(1, agent_count + 1)
    return [
        frozenset(members)
        for size in range(agent_count + 1)
        for members in itertools.combinations(agents, size)
    ]


def _simulates(moves: List[StateSet], answers: List[StateSet], relation: Set[Pair], flipped: bool) -> bool:
    # every move must have an answer whose outcomes are each related to some outcome of the move
    def related(a: str, b: str) -> bool:
        return ((b, a) if flipped else (a, b)) in relation

    return all(
        any(all(any(related(x, y) for x in move) for y in answer) for answer in answers)
        for move in moves
    )


def check_bisimulation(left: CCGS, right: CCGS) -> Optional[Set[Pair]]:
    """
    Computes the greatest alternating bisimulation between two structures.

    Args:
        left (CCGS): The structure S.
        right (CCGS): The structure S'.

    Returns:
        Optional[Set[Pair]]: The relation when it relates the two initial states, else None.

    Raises:
        InvalidCoalitionError: If the structures have different agent counts.
    """
    if left.agent_count != right.agent_count:
        raise InvalidCoalitionError(
            f"structures have {left.agent_count} and {right.agent_count} agents"
        )
    coalitions = all_coalitions(left.agent_count)
    left_moves = ModelChecker(left)
    right_moves = ModelChecker(right)
    tables: Dict[FrozenSet[int], Tuple[dict, dict]] = {
        coalition: (left_moves.outcomes(coalition), right_moves.outcomes(coalition))
        for coalition in coalitions
    }

    relation: Set[Pair] = {
        (q, r) for q in left.states for r in right.states if left.label(q) == right.label(r)
    }
    rounds = 0
    while True:
        rounds += 1
        kept = {
            (q, r) for q, r in relation
            if all(
                _simulates(tables[c][0][q], tables[c][1][r], relation, flipped=False)
                and _simulates(tables[c][1][r], tables[c][0][q], relation, flipped=True)
                for c in coalitions
            )
        }
        if kept == relation:
            break
        relation = kept
    logger.debug("Bisimulation refinement stabilised after %d rounds with %d pairs", rounds, len(relation))
    if (left.initial, right.initial) not in relation:
        return None
    return relation
