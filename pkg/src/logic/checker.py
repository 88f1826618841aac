"""
Explicit-state ATL model checking.

Satisfaction sets are computed bottom-up over the formula tree. Path quantifiers go through
the coalition pre-image: a state is in Pre_A(X) when coalition A has a move all of whose
outcomes, whatever the other agents do, fall into X. `Always` is a greatest fixpoint and
`Until` a least fixpoint of the corresponding monotone operators; both stabilise within
|Q| rounds.
"""

import logging
from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, List, Tuple

from src.exceptions import InvalidCoalitionError, UnknownPropositionError
from src.logic.formula import (
    Always, Coalition, Formula, Next, Not, Or, Prop, Top, Until, desugar,
)
from src.model.models import CCGS

logger = logging.getLogger(__name__)

StateSet = FrozenSet[str]


class ModelChecker:
    """
    Evaluates formulas on one structure, sharing a memo of satisfaction sets and the
    per-coalition outcome tables across calls.

    Attributes:
        structure (CCGS): The structure being checked.
    """

    def __init__(self, structure: CCGS):
        self.structure = structure
        self.all_states: StateSet = frozenset(structure.states)
        self._outcomes: Dict[Coalition, Dict[str, List[StateSet]]] = {}
        self._memo: Dict[Formula, StateSet] = {}

    def outcomes(self, coalition: Coalition) -> Dict[str, List[StateSet]]:
        """For every state, the outcome sets out(q, m_A) of each move of the coalition."""
        table = self._outcomes.get(coalition)
        if table is None:
            for agent in coalition:
                if agent not in self.structure.agents:
                    raise InvalidCoalitionError(
                        f"coalition member {agent} is outside 1..{self.structure.agent_count}"
                    )
            members = sorted(coalition)
            table = {}
            for state in self.structure.states:
                grouped: Dict[Tuple[str, ...], set] = defaultdict(set)
                for joint in self.structure.joint_actions(state):
                    move = tuple(joint[agent - 1] for agent in members)
                    grouped[move].add(self.structure.successor(state, joint))
                table[state] = [frozenset(targets) for targets in grouped.values()]
            self._outcomes[coalition] = table
        return table

    def pre(self, coalition: Coalition, target: StateSet) -> StateSet:
        return frozenset(
            state for state, moves in self.outcomes(coalition).items()
            if any(outcome <= target for outcome in moves)
        )

    def check(self, formula: Formula) -> StateSet:
        return self._sat(desugar(formula))

    def _sat(self, formula: Formula) -> StateSet:
        cached = self._memo.get(formula)
        if cached is not None:
            return cached
        if isinstance(formula, Prop):
            if formula.name not in self.structure.propositions:
                raise UnknownPropositionError(f"unknown proposition '{formula.name}'")
            result = frozenset(q for q in self.structure.states if formula.name in self.structure.label(q))
        elif isinstance(formula, Top):
            result = self.all_states
        elif isinstance(formula, Not):
            result = self.all_states - self._sat(formula.arg)
        elif isinstance(formula, Or):
            result = self._sat(formula.left) | self._sat(formula.right)
        elif isinstance(formula, Next):
            result = self.pre(formula.coalition, self._sat(formula.arg))
        elif isinstance(formula, Always):
            invariant = self._sat(formula.arg)
            result = self.all_states
            while True:
                refined = invariant & self.pre(formula.coalition, result)
                if refined == result:
                    break
                result = refined
        elif isinstance(formula, Until):
            hold, goal = self._sat(formula.left), self._sat(formula.right)
            result = frozenset()
            while True:
                grown = goal | (hold & self.pre(formula.coalition, result))
                if grown == result:
                    break
                result = grown
        else:
            raise TypeError(f"formula {formula} is not desugared")
        self._memo[formula] = result
        return result


def model_check(structure: CCGS, formula: Formula) -> StateSet:
    """
    Returns the exact set of states of `structure` satisfying `formula`.

    Raises:
        UnknownPropositionError: If the formula names a proposition the structure lacks.
        InvalidCoalitionError: If a coalition member is not an agent of the structure.
    """
    return ModelChecker(structure).check(formula)


def satisfaction_sets(structure: CCGS, formulas: Iterable[Formula]) -> List[StateSet]:
    checker = ModelChecker(structure)
    return [checker.check(formula) for formula in formulas]


def holds(structure: CCGS, formula: Formula) -> bool:
    return structure.initial in model_check(structure, formula)
