"""
Compilation of allocation problems into 0/1 integer programs.

`encode` instantiates every constraint family over the states of the structure and the union
closure of the feature set; `build_dom_sl` adds the bid-specific objective and
`build_dom_in_sl` additionally fixes how many actions one agent gives up. Constraint family
tags follow the order in which the families are listed:

- 25, 26, 28, 31, 35, 44, 50: variable classes (x, y, yA, s, z, e, r);
- 27: at least one action survives at every state for every agent;
- 29, 30: a coalition move is forbidden iff some member's action in it is forbidden;
- 32-34: s = forbidden completion OR successor satisfies the target formula;
- 36, 37: z = AND of s over all completions;
- 38, 39 (and 38top): proposition and truth-constant pinning;
- 40-43: negation and disjunction;
- 45-47: e = z AND the coalition move is allowed;
- 48, 49: next; 51-56: until via r; 57-59: always;
- 60: fixed restriction count of one agent.
"""

import logging
from typing import Dict, List, Sequence, Set, Tuple

from src.exceptions import BidProfileError
from src.ilp.models import (
    IlpModel, e_name, r_name, s_name, x_name, y_name, ya_name, z_name,
)
from src.logic.formula import (
    Always, Coalition, Formula, Next, Not, Or, Prop, Top, Until,
)
from src.model.models import CCGS
from src.model.service import check_bids, y_slots
from src.valuation.models import FeatureSet
from src.valuation.service import check_features, union_closure

logger = logging.getLogger(__name__)

Need = Tuple[Formula, Coalition]


def complement(structure: CCGS, coalition: Coalition) -> Coalition:
    return frozenset(structure.agents) - coalition


def combine(structure: CCGS, coalition: Coalition, move: Tuple[str, ...], completion: Tuple[str, ...]) -> Tuple[str, ...]:
    """Merges a coalition move and a move of the complement into a joint action."""
    members = sorted(coalition)
    others = sorted(complement(structure, coalition))
    chosen = dict(zip(members, move))
    chosen.update(zip(others, completion))
    return tuple(chosen[agent] for agent in structure.agents)


def next_state_needs(closure: List[Formula]) -> List[Need]:
    """
    (target, coalition) pairs for which s/z/e variables exist: the argument of a next
    formula, and an until or always formula itself.
    """
    needs: List[Need] = []
    for formula in closure:
        if isinstance(formula, Next):
            need = (formula.arg, formula.coalition)
        elif isinstance(formula, (Until, Always)):
            need = (formula, formula.coalition)
        else:
            continue
        if need not in needs:
            needs.append(need)
    return needs


def quantifier_coalitions(structure: CCGS, closure: List[Formula]) -> List[Coalition]:
    found: Set[Coalition] = set()
    for formula in closure:
        if isinstance(formula, (Next, Until, Always)):
            found.add(formula.coalition)
            found.add(complement(structure, formula.coalition))
    return sorted(found, key=lambda c: (len(c), sorted(c)))


def constraint_bound(structure: CCGS, closure_size: int) -> int:
    return 39 * structure.agent_count * structure.transition_count * len(structure.states) * closure_size ** 2


def encode(structure: CCGS, feature_set: FeatureSet, name: str = "dom_sl") -> IlpModel:
    """
    Builds every variable and constraint of the encoding, without an objective.

    Args:
        structure (CCGS): The structure to restrict.
        feature_set (FeatureSet): The features whose closure indexes the x variables.
        name (str): Model name written to LP files.

    Returns:
        IlpModel: The encoding; the objective is empty.

    Raises:
        FeatureError: If the features do not fit the structure.
    """
    check_features(structure, feature_set)
    closure = union_closure(feature_set)
    model = IlpModel(name=name, structure=structure, feature_set=feature_set, closure=closure)
    fid = {formula: index for index, formula in enumerate(closure)}
    states = structure.states

    for q in states:
        for index in range(len(closure)):
            model.add_variable(x_name(q, index), "x", (q, index))

    for q, agent, action in y_slots(structure):
        model.add_variable(y_name(q, agent, action), "y", (q, agent, action))
    for q in states:
        for agent in structure.agents:
            available = structure.available(agent, q)
            model.add_constraint(
                "27", [(y_name(q, agent, a), 1.0) for a in available], "<=", len(available) - 1
            )

    for q in states:
        for coalition in quantifier_coalitions(structure, closure):
            members = sorted(coalition)
            for move in structure.coalition_moves(q, coalition):
                ya = model.add_variable(ya_name(q, coalition, move), "yA", (q, tuple(members), move))
                member_ys = [y_name(q, agent, action) for agent, action in zip(members, move)]
                for y in member_ys:
                    model.add_constraint("29", [(ya, 1.0), (y, -1.0)], ">=", 0)
                model.add_constraint("30", [(ya, 1.0)] + [(y, -1.0) for y in member_ys], "<=", 0)

    for target, coalition in next_state_needs(closure):
        index = fid[target]
        others = complement(structure, coalition)
        for q in states:
            completions = list(structure.coalition_moves(q, others))
            for move in structure.coalition_moves(q, coalition):
                z = model.add_variable(z_name(q, index, coalition, move), "z", (q, index, tuple(sorted(coalition)), move))
                s_names = []
                for completion in completions:
                    successor = structure.successor(q, combine(structure, coalition, move, completion))
                    s = model.add_variable(
                        s_name(q, index, coalition, move, completion), "s",
                        (q, index, tuple(sorted(coalition)), move, completion),
                    )
                    y_other = ya_name(q, others, completion)
                    x_next = x_name(successor, index)
                    model.add_constraint("32", [(s, 1.0), (y_other, -1.0)], ">=", 0)
                    model.add_constraint("33", [(s, 1.0), (x_next, -1.0)], ">=", 0)
                    model.add_constraint("34", [(s, 1.0), (y_other, -1.0), (x_next, -1.0)], "<=", 0)
                    model.add_constraint("36", [(z, 1.0), (s, -1.0)], "<=", 0)
                    s_names.append(s)
                model.add_constraint(
                    "37", [(z, 1.0)] + [(s, -1.0) for s in s_names], ">=", 1 - len(s_names)
                )
                e = model.add_variable(e_name(q, index, coalition, move), "e", (q, index, tuple(sorted(coalition)), move))
                ya = ya_name(q, coalition, move)
                model.add_constraint("45", [(e, 1.0), (z, -1.0), (ya, 1.0)], ">=", 0)
                model.add_constraint("46", [(e, 1.0), (z, -1.0)], "<=", 0)
                model.add_constraint("47", [(e, 1.0), (ya, 1.0)], "<=", 1)

    for index, formula in enumerate(closure):
        for q in states:
            x = x_name(q, index)
            if isinstance(formula, Prop):
                pinned = 1 if formula.name in structure.label(q) else 0
                model.add_constraint("38" if pinned else "39", [(x, 1.0)], "=", pinned)
            elif isinstance(formula, Top):
                model.add_constraint("38top", [(x, 1.0)], "=", 1)
            elif isinstance(formula, Not):
                model.add_constraint("40", [(x, 1.0), (x_name(q, fid[formula.arg]), 1.0)], "=", 1)
            elif isinstance(formula, Or):
                left, right = x_name(q, fid[formula.left]), x_name(q, fid[formula.right])
                model.add_constraint("41", [(x, 1.0), (left, -1.0)], ">=", 0)
                model.add_constraint("42", [(x, 1.0), (right, -1.0)], ">=", 0)
                model.add_constraint("43", [(x, 1.0), (left, -1.0), (right, -1.0)], "<=", 0)
            elif isinstance(formula, Next):
                es = _e_names(structure, q, fid[formula.arg], formula.coalition)
                for e in es:
                    model.add_constraint("48", [(x, 1.0), (e, -1.0)], ">=", 0)
                model.add_constraint("49", [(x, 1.0)] + [(e, -1.0) for e in es], "<=", 0)
            elif isinstance(formula, Until):
                es = _e_names(structure, q, index, formula.coalition)
                r = model.add_variable(r_name(q, index), "r", (q, index))
                hold, goal = x_name(q, fid[formula.left]), x_name(q, fid[formula.right])
                model.add_constraint("51", [(r, 1.0), (hold, -1.0)], "<=", 0)
                model.add_constraint("52", [(r, 1.0)] + [(e, -1.0) for e in es], "<=", 0)
                for e in es:
                    model.add_constraint("53", [(r, 1.0), (hold, -1.0), (e, -1.0)], ">=", -1)
                model.add_constraint("54", [(x, 1.0), (goal, -1.0)], ">=", 0)
                model.add_constraint("55", [(x, 1.0), (r, -1.0)], ">=", 0)
                model.add_constraint("56", [(x, 1.0), (goal, -1.0), (r, -1.0)], "<=", 0)
            elif isinstance(formula, Always):
                es = _e_names(structure, q, index, formula.coalition)
                arg = x_name(q, fid[formula.arg])
                model.add_constraint("57", [(x, 1.0), (arg, -1.0)], "<=", 0)
                model.add_constraint("58", [(x, 1.0)] + [(e, -1.0) for e in es], "<=", 0)
                for e in es:
                    model.add_constraint("59", [(x, 1.0), (arg, -1.0), (e, -1.0)], ">=", -1)
            else:
                raise TypeError(f"formula {formula} is not desugared")

    logger.info(
        "Encoded %s: %d variables, %d constraints, closure size %d",
        name, len(model.variables), len(model.constraints), len(closure),
    )
    return model


def _e_names(structure: CCGS, q: str, index: int, coalition: Coalition) -> List[str]:
    return [e_name(q, index, coalition, move) for move in structure.coalition_moves(q, coalition)]


def virtual_costs(structure: CCGS, bids: Sequence[float]) -> Dict[int, float]:
    profile = check_bids(structure, bids)
    return {
        agent: structure.cost_models[agent].virtual_cost(profile[agent - 1])
        for agent in structure.agents
    }


def build_dom_sl(structure: CCGS, feature_set: FeatureSet, bids: Sequence[float]) -> IlpModel:
    """
    Builds the program whose optima are the dominant social laws under a bid profile.

    The objective is the value of the features satisfied at the initial state minus the
    virtual cost of every forbidden action.

    Raises:
        BidProfileError: If the bid vector does not match the agents.
        FeatureError: If the features do not fit the structure.
    """
    costs = virtual_costs(structure, bids)
    model = encode(structure, feature_set)
    model.virtual_costs = costs
    fid = {formula: index for index, formula in enumerate(model.closure)}
    for feature in feature_set.features:
        x = x_name(structure.initial, fid[feature.formula])
        model.objective[x] = model.objective.get(x, 0.0) + feature.value
    for q, agent, action in y_slots(structure):
        if costs[agent] != 0:
            model.objective[y_name(q, agent, action)] = -costs[agent]
    model.objective = {name: value for name, value in model.objective.items() if value != 0}
    return model


def build_dom_in_sl(structure: CCGS, feature_set: FeatureSet, bids: Sequence[float], agent: int, count: int) -> IlpModel:
    """
    Builds the program for dominant laws that forbid exactly `count` actions of `agent`.

    An impossible count still yields a program; the solver reports it infeasible.
    """
    if agent not in structure.agents:
        raise BidProfileError(f"agent {agent} is outside 1..{structure.agent_count}")
    if count < 0:
        raise BidProfileError(f"restriction count must be nonnegative, got {count}")
    model = build_dom_sl(structure, feature_set, bids)
    model.name = f"dom_in_sl_{agent}_{count}"
    model.fixed = (agent, count)
    model.add_constraint(
        "60",
        [(y_name(q, owner, action), 1.0) for q, owner, action in y_slots(structure) if owner == agent],
        "=", count,
    )
    return model
