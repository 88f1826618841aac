"""
This module defines the Pydantic documents read from and written to model and law files.

The module includes the following models:
- `TransitionSchema`:   One row `{"from", "joint", "to"}` of the transition table.
- `ModelDocument`:      A cost-aware concurrent game structure as stored on disk.
- `RestrictionSchema`:  One forbidden action `{"agent", "state", "action"}`.
- `LawDocument`:        A social law as a list of restrictions.

Agent indices are written as strings where they are object keys (`actions`, `costs`), as
JSON requires.
"""

from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from src.distributions.models import CostDistribution


class TransitionSchema(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    source: str = Field(alias="from")
    joint: List[str]
    to: str


class ModelDocument(BaseModel):
    agents: PositiveInt
    states: List[str]
    initial: str
    propositions: List[str] = []
    labels: Dict[str, List[str]] = {}
    actions: Dict[str, Dict[str, List[str]]]
    transitions: List[TransitionSchema]
    costs: Dict[str, CostDistribution]


class RestrictionSchema(BaseModel):
    agent: PositiveInt
    state: str
    action: str

    class Config:
        strict = True


class LawDocument(BaseModel):
    restrict: List[RestrictionSchema] = []
