"""
Exact solver for the allocation programs, plus decoding and verification of assignments.

Only the y variables (which actions are forbidden) are branched on. Every other class is a
function of them: coalition moves are forbidden when a member's action is, x values follow
the formula semantics on the restricted structure (least fixpoint for until, greatest for
always), and s/z/e/r follow from x and y. The search is a depth-first enumeration of y in
canonical order, 0 before 1, pruned by an optimistic objective bound.

Among optimal assignments the one with fewest forbidden actions wins, then the
lexicographically smallest y vector; `better` implements that order and is shared with the
enumeration backend of the mechanism.
"""

import logging
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from src.config import settings
from src.exceptions import InfeasibleAllocationError
from src.ilp.builder import combine, complement, encode, next_state_needs, quantifier_coalitions
from src.ilp.models import (
    INFEASIBLE, OPTIMAL, Assignment, IlpModel,
    e_name, r_name, s_name, x_name, y_name, ya_name, z_name,
)
from src.logic.checker import model_check
from src.logic.formula import Always, Coalition, Formula, Next, Not, Or, Prop, Top, Until
from src.model.models import CCGS, SocialLaw
from src.model.service import apply_law, y_slots
from src.valuation.models import FeatureSet

logger = logging.getLogger(__name__)

Candidate = Tuple[float, int, Tuple[int, ...]]
Forbidden = Set[Tuple[str, int, str]]


def better(candidate: Candidate, incumbent: Optional[Candidate], tolerance: Optional[float] = None) -> bool:
    """Objective descending, then fewer restrictions, then the smaller indicator vector."""
    if incumbent is None:
        return True
    tolerance = settings.tolerance if tolerance is None else tolerance
    if candidate[0] > incumbent[0] + tolerance:
        return True
    if candidate[0] < incumbent[0] - tolerance:
        return False
    if candidate[1] != incumbent[1]:
        return candidate[1] < incumbent[1]
    return candidate[2] < incumbent[2]


class Propagator:
    """
    Derives the values of all non-y variables from a set of forbidden actions.

    Attributes:
        structure (CCGS): The unrestricted structure.
        closure (List[Formula]): Desugared formulas, every subformula before its parents.
    """

    def __init__(self, structure: CCGS, closure: List[Formula]):
        self.structure = structure
        self.closure = closure
        self.fid = {formula: index for index, formula in enumerate(self.closure)}
        self.all_states = frozenset(self.structure.states)
        self.tables: Dict[Tuple[str, Coalition], tuple] = {}
        for coalition in quantifier_coalitions(self.structure, self.closure):
            others = complement(self.structure, coalition)
            for q in self.structure.states:
                moves = list(self.structure.coalition_moves(q, coalition))
                completions = list(self.structure.coalition_moves(q, others))
                successors = [
                    [self.structure.successor(q, combine(self.structure, coalition, move, completion))
                     for completion in completions]
                    for move in moves
                ]
                self.tables[(q, coalition)] = (moves, completions, successors)

    def _blocked(self, q: str, coalition: Coalition, move: Tuple[str, ...], forbidden: Forbidden) -> bool:
        return any((q, agent, action) in forbidden for agent, action in zip(sorted(coalition), move))

    def guaranteed(self, q: str, coalition: Coalition, target: FrozenSet[str], forbidden: Forbidden) -> List[Tuple[bool, bool]]:
        """(z, e) per coalition move: every allowed completion reaches target; e also needs the move allowed."""
        moves, completions, successors = self.tables[(q, coalition)]
        others = complement(self.structure, coalition)
        completion_blocked = [self._blocked(q, others, completion, forbidden) for completion in completions]
        result = []
        for move, row in zip(moves, successors):
            z = all(blocked or successor in target for blocked, successor in zip(completion_blocked, row))
            result.append((z, z and not self._blocked(q, coalition, move, forbidden)))
        return result

    def pre(self, coalition: Coalition, target: FrozenSet[str], forbidden: Forbidden) -> FrozenSet[str]:
        return frozenset(
            q for q in self.structure.states
            if any(e for _, e in self.guaranteed(q, coalition, target, forbidden))
        )

    def truth(self, forbidden: Forbidden) -> List[FrozenSet[str]]:
        """Satisfaction set of every closure formula on the restricted structure."""
        sat: List[FrozenSet[str]] = []
        for formula in self.closure:
            if isinstance(formula, Prop):
                value = frozenset(q for q in self.structure.states if formula.name in self.structure.label(q))
            elif isinstance(formula, Top):
                value = self.all_states
            elif isinstance(formula, Not):
                value = self.all_states - sat[self.fid[formula.arg]]
            elif isinstance(formula, Or):
                value = sat[self.fid[formula.left]] | sat[self.fid[formula.right]]
            elif isinstance(formula, Next):
                value = self.pre(formula.coalition, sat[self.fid[formula.arg]], forbidden)
            elif isinstance(formula, Until):
                hold, goal = sat[self.fid[formula.left]], sat[self.fid[formula.right]]
                value = frozenset()
                while True:
                    grown = goal | (hold & self.pre(formula.coalition, value, forbidden))
                    if grown == value:
                        break
                    value = grown
            elif isinstance(formula, Always):
                invariant = sat[self.fid[formula.arg]]
                value = self.all_states
                while True:
                    refined = invariant & self.pre(formula.coalition, value, forbidden)
                    if refined == value:
                        break
                    value = refined
            else:
                raise TypeError(f"formula {formula} is not desugared")
            sat.append(value)
        return sat

    def materialize(self, forbidden: Forbidden) -> Dict[str, int]:
        """A full 0/1 assignment of every variable of the model."""
        structure = self.structure
        sat = self.truth(forbidden)
        values: Dict[str, int] = {}
        for q in structure.states:
            for index in range(len(self.closure)):
                values[x_name(q, index)] = int(q in sat[index])
        for q, agent, action in y_slots(structure):
            values[y_name(q, agent, action)] = int((q, agent, action) in forbidden)
        for (q, coalition), (moves, _, _) in self.tables.items():
            for move in moves:
                values[ya_name(q, coalition, move)] = int(self._blocked(q, coalition, move, forbidden))
        for target, coalition in next_state_needs(self.closure):
            index = self.fid[target]
            others = complement(structure, coalition)
            for q in structure.states:
                moves, completions, successors = self.tables[(q, coalition)]
                flags = self.guaranteed(q, coalition, sat[index], forbidden)
                for move, row, (z, e) in zip(moves, successors, flags):
                    for completion, successor in zip(completions, row):
                        values[s_name(q, index, coalition, move, completion)] = int(
                            self._blocked(q, others, completion, forbidden) or successor in sat[index]
                        )
                    values[z_name(q, index, coalition, move)] = int(z)
                    values[e_name(q, index, coalition, move)] = int(e)
        for index, formula in enumerate(self.closure):
            if isinstance(formula, Until):
                hold = sat[self.fid[formula.left]]
                for q in structure.states:
                    moves = self.tables[(q, formula.coalition)][0]
                    any_e = any(values[e_name(q, index, formula.coalition, move)] for move in moves)
                    values[r_name(q, index)] = int(q in hold and any_e)
        return values


def solve_exact(model: IlpModel) -> Assignment:
    """
    Finds an optimal assignment by branching on the y variables only.

    Args:
        model (IlpModel): A model built by `build_dom_sl` or `build_dom_in_sl`.

    Returns:
        Assignment: Status `optimal` with the full assignment, or status `infeasible` when no
            choice of forbidden actions satisfies the survivor and fixed-count constraints.
    """
    structure = model.structure
    propagator = Propagator(model.structure, model.closure)
    slots = y_slots(structure)
    y_coefficients = [model.objective.get(y_name(*slot), 0.0) for slot in slots]
    x_terms: List[Tuple[str, int, float]] = []
    for name, coefficient in model.objective.items():
        variable = model.variable(name)
        if variable.kind == "x":
            x_terms.append((variable.index[0], variable.index[1], coefficient))
    x_upper = sum(max(0.0, coefficient) for _, _, coefficient in x_terms)
    gains = [max(0.0, coefficient) for coefficient in y_coefficients]
    suffix_gain = [sum(gains[j:]) for j in range(len(slots) + 1)]

    group_of = [(q, agent) for q, agent, _ in slots]
    group_size: Dict[Tuple[str, int], int] = {}
    for group in group_of:
        group_size[group] = group_size.get(group, 0) + 1
    fixed_agent, fixed_count = model.fixed if model.fixed else (None, None)
    fixed_remaining = [
        sum(1 for q, agent, _ in slots[j:] if agent == fixed_agent) for j in range(len(slots) + 1)
    ]
    tolerance = settings.tolerance

    stats = {"nodes": 0, "leaves": 0, "pruned": 0}
    best: List[Optional[Candidate]] = [None]
    vector = [0] * len(slots)
    group_ones: Dict[Tuple[str, int], int] = {group: 0 for group in group_size}

    def leaf(committed: float) -> None:
        stats["leaves"] += 1
        forbidden = {slot for slot, bit in zip(slots, vector) if bit}
        sat = propagator.truth(forbidden)
        objective = committed + sum(coefficient for q, index, coefficient in x_terms if q in sat[index])
        candidate = (objective, len(forbidden), tuple(vector))
        if better(candidate, best[0], tolerance):
            best[0] = candidate

    def search(j: int, committed: float, count: int) -> None:
        stats["nodes"] += 1
        if best[0] is not None and x_upper + committed + suffix_gain[j] < best[0][0] - tolerance:
            stats["pruned"] += 1
            return
        if j == len(slots):
            if fixed_agent is None or count == fixed_count:
                leaf(committed)
            return
        group = group_of[j]
        mine = slots[j][1] == fixed_agent
        if not mine or count + fixed_remaining[j + 1] >= fixed_count:
            search(j + 1, committed, count)
        if group_ones[group] + 1 < group_size[group] and (not mine or count + 1 <= fixed_count):
            vector[j] = 1
            group_ones[group] += 1
            search(j + 1, committed + y_coefficients[j], count + int(mine))
            group_ones[group] -= 1
            vector[j] = 0

    search(0, 0.0, 0)
    if best[0] is None:
        logger.info("Model %s is infeasible (%d nodes)", model.name, stats["nodes"])
        return Assignment(status=INFEASIBLE, stats=stats)
    forbidden = {slot for slot, bit in zip(slots, best[0][2]) if bit}
    values = propagator.materialize(forbidden)
    objective = model.objective_value(values)
    logger.info(
        "Solved %s: objective %s, %d leaves, %d pruned", model.name, objective, stats["leaves"], stats["pruned"]
    )
    return Assignment(status=OPTIMAL, values=values, objective=objective, stats=stats)


def decode_law(assignment: Assignment, structure: CCGS) -> SocialLaw:
    """
    Reads the forbidden actions off the y variables.

    Raises:
        InfeasibleAllocationError: If the assignment is not a feasible solution.
    """
    if not assignment.feasible:
        raise InfeasibleAllocationError("no social law satisfies the program")
    restrictions: Dict[Tuple[int, str], frozenset] = {}
    for q, agent, action in y_slots(structure):
        if assignment.values.get(y_name(q, agent, action)) == 1:
            restrictions[(agent, q)] = restrictions.get((agent, q), frozenset()) | {action}
    return SocialLaw(restrictions=restrictions)


def _semantics_hold(model: IlpModel, values: Dict[str, int]) -> Optional[str]:
    """Checks the functional dependencies of the derived variables; returns the first mismatch."""
    structure = model.structure
    propagator = Propagator(model.structure, model.closure)
    forbidden = {
        slot for slot in y_slots(structure) if values[y_name(*slot)] == 1
    }
    for (q, coalition), (moves, _, _) in propagator.tables.items():
        for move in moves:
            if values[ya_name(q, coalition, move)] != int(propagator._blocked(q, coalition, move, forbidden)):
                return f"coalition move {ya_name(q, coalition, move)}"
    for target, coalition in next_state_needs(model.closure):
        index = propagator.fid[target]
        others = complement(structure, coalition)
        for q in structure.states:
            moves, completions, successors = propagator.tables[(q, coalition)]
            for move, row in zip(moves, successors):
                s_values = []
                for completion, successor in zip(completions, row):
                    s = values[s_name(q, index, coalition, move, completion)]
                    expected = int(values[ya_name(q, others, completion)] == 1 or values[x_name(successor, index)] == 1)
                    if s != expected:
                        return f"completion {s_name(q, index, coalition, move, completion)}"
                    s_values.append(s)
                z = values[z_name(q, index, coalition, move)]
                if z != int(all(s_values)):
                    return f"guarantee {z_name(q, index, coalition, move)}"
                e = values[e_name(q, index, coalition, move)]
                if e != int(z == 1 and values[ya_name(q, coalition, move)] == 0):
                    return f"enabled guarantee {e_name(q, index, coalition, move)}"
    for index, formula in enumerate(model.closure):
        if isinstance(formula, Until):
            hold = propagator.fid[formula.left]
            for q in structure.states:
                moves = propagator.tables[(q, formula.coalition)][0]
                expected = int(
                    values[x_name(q, hold)] == 1
                    and any(values[e_name(q, index, formula.coalition, move)] for move in moves)
                )
                if values[r_name(q, index)] != expected:
                    return f"until step {r_name(q, index)}"
    return None


def verify_assignment(assignment: Assignment, structure: CCGS, feature_set: FeatureSet) -> bool:
    """
    Checks an assignment against the semantics it encodes.

    Every constraint of the encoding must hold, every derived variable must equal the function
    of y it stands for, and every x value must agree with model checking the closure formula
    on the structure restricted by the decoded law.
    """
    if not assignment.feasible:
        return False
    model = encode(structure, feature_set)
    values = assignment.values
    missing = [variable.name for variable in model.variables if values.get(variable.name) not in (0, 1)]
    if missing:
        logger.info("Assignment lacks a 0/1 value for %s", missing[0])
        return False
    violated = model.violated(values)
    if violated:
        logger.info("Assignment violates %s (family %s)", violated[0].name, violated[0].family)
        return False
    mismatch = _semantics_hold(model, values)
    if mismatch is not None:
        logger.info("Assignment is inconsistent at %s", mismatch)
        return False
    restricted = apply_law(structure, decode_law(assignment, structure))
    for index, formula in enumerate(model.closure):
        satisfied = model_check(restricted, formula)
        for q in structure.states:
            if values[x_name(q, index)] != int(q in satisfied):
                logger.info("x value of %s at %s disagrees with model checking", formula, q)
                return False
    return True
