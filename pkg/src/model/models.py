import itertools
import re
from typing import Dict, FrozenSet, Iterable, Iterator, List, Tuple

from pydantic import BaseModel, ConfigDict, PositiveInt, field_validator, model_validator

from src.distributions.models import CostDistribution
from src.exceptions import ModelValidationError

JointAction = Tuple[str, ...]
Slot = Tuple[int, str]

IDENTIFIER = re.compile(r"[A-Za-z0-9_]+")
RESERVED = frozenset({"true", "false", "X", "G", "F", "U"})


def check_identifier(kind: str, name: str) -> None:
    if not IDENTIFIER.fullmatch(name) or name in RESERVED:
        raise ModelValidationError(f"invalid {kind} identifier '{name}'")


class CCGS(BaseModel):
    model_config = ConfigDict(frozen=True)

    agent_count: PositiveInt
    states: Tuple[str, ...]
    initial: str
    propositions: Tuple[str, ...] = ()
    labels: Dict[str, FrozenSet[str]]
    actions: Dict[Slot, Tuple[str, ...]]
    transitions: Dict[Tuple[str, JointAction], str]
    cost_models: Dict[int, CostDistribution]

    @model_validator(mode="after")
    def check_structure(self):
        if len(set(self.states)) != len(self.states):
            raise ModelValidationError("duplicate state identifiers")
        if len(set(self.propositions)) != len(self.propositions):
            raise ModelValidationError("duplicate proposition identifiers")
        for state in self.states:
            check_identifier("state", state)
        for proposition in self.propositions:
            check_identifier("proposition", proposition)
        if self.initial not in self.states:
            raise ModelValidationError(f"initial state '{self.initial}' is not a state")

        known = set(self.states)
        for state, label in self.labels.items():
            if state not in known:
                raise ModelValidationError(f"labels refer to unknown state '{state}'")
            unknown = label - set(self.propositions)
            if unknown:
                raise ModelValidationError(
                    f"unknown proposition {sorted(unknown)} labelled at state '{state}'"
                )

        for (agent, state), available in self.actions.items():
            if agent not in self.agents or state not in known:
                raise ModelValidationError(f"actions given for unknown slot (agent {agent}, state '{state}')")
            if len(set(available)) != len(available):
                raise ModelValidationError(f"duplicate actions for agent {agent} at state '{state}'")
            for action in available:
                check_identifier("action", action)
        for agent in self.agents:
            for state in self.states:
                if not self.actions.get((agent, state)):
                    raise ModelValidationError(f"empty action set for agent {agent} at state '{state}'")

        expected = 0
        for state in self.states:
            for joint in self.joint_actions(state):
                expected += 1
                target = self.transitions.get((state, joint))
                if target is None:
                    raise ModelValidationError(
                        f"non-total transition function: no transition from '{state}' on {list(joint)}"
                    )
                if target not in known:
                    raise ModelValidationError(f"transition from '{state}' leads to unknown state '{target}'")
        if expected != len(self.transitions):
            stray = next(
                (state, joint) for state, joint in self.transitions
                if state not in known or joint not in set(self.joint_actions(state))
            )
            raise ModelValidationError(
                f"transition from '{stray[0]}' on {list(stray[1])} uses unavailable actions"
            )

        missing = [agent for agent in self.agents if agent not in self.cost_models]
        if missing:
            raise ModelValidationError(f"missing cost model for agents {missing}")
        return self

    @property
    def agents(self) -> range:
        return range(1, self.agent_count + 1)

    @property
    def transition_count(self) -> int:
        return len(self.transitions)

    def available(self, agent: int, state: str) -> Tuple[str, ...]:
        return self.actions[(agent, state)]

    def label(self, state: str) -> FrozenSet[str]:
        return self.labels.get(state, frozenset())

    def joint_actions(self, state: str) -> Iterator[JointAction]:
        return itertools.product(*(self.actions.get((agent, state), ()) for agent in self.agents))

    def coalition_moves(self, state: str, coalition: Iterable[int]) -> Iterator[JointAction]:
        return itertools.product(*(self.actions[(agent, state)] for agent in sorted(coalition)))

    def successor(self, state: str, joint: JointAction) -> str:
        return self.transitions[(state, joint)]

    def slots(self) -> List[Slot]:
        """(agent, state) pairs, agent-major, in canonical order."""
        return [(agent, state) for agent in self.agents for state in self.states]


class SocialLaw(BaseModel):
    model_config = ConfigDict(frozen=True)

    restrictions: Dict[Slot, FrozenSet[str]] = {}

    @field_validator("restrictions")
    def drop_empty(cls, value):
        return {slot: actions for slot, actions in value.items() if actions}

    def forbidden(self, agent: int, state: str) -> FrozenSet[str]:
        return self.restrictions.get((agent, state), frozenset())

    def size(self, agent: int) -> int:
        return sum(len(actions) for (owner, _), actions in self.restrictions.items() if owner == agent)

    def union(self, other: "SocialLaw") -> "SocialLaw":
        merged = dict(self.restrictions)
        for slot, actions in other.restrictions.items():
            merged[slot] = merged.get(slot, frozenset()) | actions
        return SocialLaw(restrictions=merged)

    def triples(self) -> List[Tuple[int, str, str]]:
        return sorted(
            (agent, state, action)
            for (agent, state), actions in self.restrictions.items()
            for action in actions
        )
