from typing import List, Optional

from pydantic import BaseModel, NonNegativeFloat


class ClauseSchema(BaseModel):
    formula: str
    weight: NonNegativeFloat


class ClauseFileDocument(BaseModel):
    vars: List[str] = []
    clauses: List[ClauseSchema] = []


class IlpSummary(BaseModel):
    name: str
    variables: int
    constraints: int
    closure_size: int
    constraint_bound: int
    lp: Optional[str] = None
