"""
This module provides the operations on game structures and social laws.

Key functionalities include:
- Loading, validating and saving model and law documents.
- Implementing a social law on a structure (the restricted structure S†η).
- Enumerating every valid social law of a structure in a deterministic order.
- Counting restrictions per agent and encoding laws as 0/1 indicator vectors.

Canonical orders follow the document: states as listed in `states`, actions as listed per
agent and state. Enumeration, tie-breaking and ILP variable naming all depend on them.
"""

import itertools
import logging
import math
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple, Union

from pydantic import ValidationError

from src.config import settings
from src.distributions.models import CostDistribution
from src.exceptions import BidProfileError, InvalidLawError, ModelValidationError
from src.ingestion.tools import parse_document, read_document
from src.model.models import CCGS, JointAction, SocialLaw
from src.model.schemas import LawDocument, ModelDocument, RestrictionSchema, TransitionSchema

logger = logging.getLogger(__name__)

YSlot = Tuple[str, int, str]


def _agent_key(key: str, agent_count: int) -> int:
    try:
        agent = int(key)
    except ValueError as e:
        raise ModelValidationError(f"agent key '{key}' is not an integer") from e
    if not 1 <= agent <= agent_count:
        raise ModelValidationError(f"agent {agent} is outside 1..{agent_count}")
    return agent


def load_model(document: Union[dict, ModelDocument]) -> CCGS:
    """
    Builds a validated structure from a model document.

    Args:
        document (Union[dict, ModelDocument]): The decoded JSON document or its schema.

    Returns:
        CCGS: The immutable structure; canonical orders are those of the document.

    Raises:
        ModelValidationError: On a non-total or nondeterministic transition function, an
            unknown state, action or proposition, an empty action set or a malformed prior.
    """
    if not isinstance(document, ModelDocument):
        document = parse_document(document, ModelDocument, ModelValidationError)
    k = document.agents

    unknown_states = (set(document.labels) | set(document.actions)) - set(document.states)
    if unknown_states:
        raise ModelValidationError(f"unknown states {sorted(unknown_states)}")

    actions: Dict[Tuple[int, str], Tuple[str, ...]] = {}
    for state, per_agent in document.actions.items():
        for key, names in per_agent.items():
            actions[(_agent_key(key, k), state)] = tuple(names)

    transitions: Dict[Tuple[str, JointAction], str] = {}
    for row in document.transitions:
        if len(row.joint) != k:
            raise ModelValidationError(
                f"joint action {row.joint} from '{row.source}' does not have {k} components"
            )
        key = (row.source, tuple(row.joint))
        if key in transitions and transitions[key] != row.to:
            raise ModelValidationError(
                f"nondeterministic transition from '{row.source}' on {row.joint}"
            )
        transitions[key] = row.to

    try:
        structure = CCGS(
            agent_count=k,
            states=tuple(document.states),
            initial=document.initial,
            propositions=tuple(document.propositions),
            labels={state: frozenset(names) for state, names in document.labels.items()},
            actions=actions,
            transitions=transitions,
            cost_models={_agent_key(key, k): dist for key, dist in document.costs.items()},
        )
    except ValidationError as e:
        raise ModelValidationError(f"invalid model: {e}") from e
    logger.info(
        "Loaded model with %d agents, %d states, %d transitions",
        k, len(structure.states), structure.transition_count,
    )
    return structure


def read_model(file_path: Union[str, Path]) -> CCGS:
    return load_model(read_document(file_path))


def save_model(structure: CCGS) -> ModelDocument:
    actions = {
        state: {str(agent): list(structure.available(agent, state)) for agent in structure.agents}
        for state in structure.states
    }
    transitions = [
        TransitionSchema(source=state, joint=list(joint), to=structure.successor(state, joint))
        for state in structure.states
        for joint in structure.joint_actions(state)
    ]
    return ModelDocument(
        agents=structure.agent_count,
        states=list(structure.states),
        initial=structure.initial,
        propositions=list(structure.propositions),
        labels={
            state: [p for p in structure.propositions if p in structure.label(state)]
            for state in structure.states
        },
        actions=actions,
        transitions=transitions,
        costs={str(agent): dist for agent, dist in sorted(structure.cost_models.items())},
    )


def replace_costs(structure: CCGS, cost_models: Mapping[int, CostDistribution]) -> CCGS:
    missing = [agent for agent in structure.agents if agent not in cost_models]
    if missing:
        raise ModelValidationError(f"missing cost model for agents {missing}")
    return structure.model_copy(update={"cost_models": dict(cost_models)})


def validate_law(structure: CCGS, law: SocialLaw) -> None:
    """
    Checks that a law only forbids available actions and leaves one action at every slot.

    Raises:
        InvalidLawError: Naming the offending (agent, state).
    """
    for (agent, state), forbidden in law.restrictions.items():
        if agent not in structure.agents or state not in structure.states:
            raise InvalidLawError(f"law restricts unknown slot (agent {agent}, state '{state}')")
        available = set(structure.available(agent, state))
        unknown = forbidden - available
        if unknown:
            raise InvalidLawError(
                f"law forbids unavailable actions {sorted(unknown)} of agent {agent} at state '{state}'"
            )
        if forbidden == available:
            raise InvalidLawError(
                f"law forbids every action of agent {agent} at state '{state}'"
            )


def apply_law(structure: CCGS, law: SocialLaw) -> CCGS:
    """
    Implements a social law: removes the forbidden actions and every transition using them.

    Args:
        structure (CCGS): The structure S.
        law (SocialLaw): A law valid for S.

    Returns:
        CCGS: The restricted structure S†η; labels, states and priors are unchanged.

    Raises:
        InvalidLawError: If the law would empty an action set or names unknown actions.
    """
    validate_law(structure, law)
    if not law.restrictions:
        return structure
    actions = {
        slot: tuple(a for a in available if a not in law.forbidden(*slot))
        for slot, available in structure.actions.items()
    }
    transitions = {
        (state, joint): target
        for (state, joint), target in structure.transitions.items()
        if all(joint[agent - 1] not in law.forbidden(agent, state) for agent in structure.agents)
    }
    return structure.model_copy(update={"actions": actions, "transitions": transitions})


def law_size(law: SocialLaw, agent: int) -> int:
    return law.size(agent)


def restrictable_count(structure: CCGS, agent: int) -> int:
    return sum(len(structure.available(agent, state)) - 1 for state in structure.states)


def _proper_subsets(actions: Tuple[str, ...]) -> List[frozenset]:
    return [
        frozenset(subset)
        for size in range(len(actions))
        for subset in itertools.combinations(actions, size)
    ]


def count_social_laws(structure: CCGS) -> int:
    return math.prod(2 ** len(structure.available(*slot)) - 1 for slot in structure.slots())


def enumerate_social_laws(structure: CCGS) -> Iterator[SocialLaw]:
    """
    Yields every valid social law exactly once.

    Slots are ordered agent-major then by state; per slot the proper subsets of the action set
    are ordered by size and then in combination order. The first slot varies slowest, so
    the empty law comes first.
    """
    slots = structure.slots()
    logger.debug("Enumerating %d social laws", count_social_laws(structure))
    choices = [_proper_subsets(structure.available(*slot)) for slot in slots]
    for combination in itertools.product(*choices):
        yield SocialLaw(restrictions=dict(zip(slots, combination)))


def y_slots(structure: CCGS) -> List[YSlot]:
    """(state, agent, action) triples of every restrictable action in canonical order."""
    return [
        (state, agent, action)
        for state in structure.states
        for agent in structure.agents
        for action in structure.available(agent, state)
    ]


def law_indicator(structure: CCGS, law: SocialLaw) -> Tuple[int, ...]:
    return tuple(
        int(action in law.forbidden(agent, state)) for state, agent, action in y_slots(structure)
    )


def load_law(document: Union[dict, LawDocument], structure: CCGS) -> SocialLaw:
    """
    Builds a social law from a law document and validates it against a structure.

    Raises:
        InvalidLawError: If the document is malformed or the law is invalid for the structure.
    """
    if not isinstance(document, LawDocument):
        document = parse_document(document, LawDocument, InvalidLawError)
    restrictions: Dict[Tuple[int, str], frozenset] = {}
    for row in document.restrict:
        slot = (row.agent, row.state)
        restrictions[slot] = restrictions.get(slot, frozenset()) | {row.action}
    law = SocialLaw(restrictions=restrictions)
    validate_law(structure, law)
    return law


def read_law(file_path: Union[str, Path], structure: CCGS) -> SocialLaw:
    return load_law(read_document(file_path), structure)


def save_law(structure: CCGS, law: SocialLaw) -> LawDocument:
    return LawDocument(restrict=[
        RestrictionSchema(agent=agent, state=state, action=action)
        for state, agent, action in y_slots(structure)
        if action in law.forbidden(agent, state)
    ])


def check_bids(structure: CCGS, bids: Sequence[float]) -> Tuple[float, ...]:
    """
    Raises:
        BidProfileError: If there is not exactly one nonnegative bid per agent.
    """
    profile = tuple(float(bid) for bid in bids)
    if len(profile) != structure.agent_count:
        raise BidProfileError(f"expected {structure.agent_count} bids, got {len(profile)}")
    for agent, bid in enumerate(profile, start=1):
        if not bid >= 0 or math.isinf(bid):
            raise BidProfileError(f"bid of agent {agent} must be a finite nonnegative number, got {bid}")
    return profile


def check_enumeration_limit(structure: CCGS) -> int:
    total = count_social_laws(structure)
    if total > settings.max_enumerated_laws:
        raise ModelValidationError(
            f"{total} social laws exceed the enumeration limit of {settings.max_enumerated_laws}"
        )
    return total
