"""
This module defines the Pydantic documents produced and consumed by the mechanism.

The module includes the following models:
- `TurningPoint`:       A bid threshold and the restriction count that holds beyond it.
- `TurningPointSeq`:    The anchor (bid, allocated count), the turning points and the level
                        values v_n of one agent.
- `MechanismReport`:    Chosen law, payments, restriction counts, valuation, virtual objective
                        and realized profit of one run.
- `TruthfulnessVerdict`, `InterimEstimate`, `ProfitEstimate`: results of the verification
                        routines.

Level values of infeasible counts are written as `null`.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, NonNegativeFloat, NonNegativeInt

from src.model.schemas import LawDocument


class TurningPoint(BaseModel):
    threshold: NonNegativeFloat
    count: NonNegativeInt


class TurningPointSeq(BaseModel):
    agent: int
    bid: NonNegativeFloat
    initial_count: NonNegativeInt
    points: List[TurningPoint] = []
    level_values: Dict[int, Optional[float]] = {}

    def as_pairs(self) -> List[tuple]:
        return [(point.threshold, point.count) for point in self.points]


class MechanismReport(BaseModel):
    law: LawDocument
    payments: Dict[str, float]
    restricted_counts: Dict[str, int]
    valuation: float
    virtual_objective: float
    profit: float
    turning_points: Optional[Dict[str, TurningPointSeq]] = None


class TruthfulnessVerdict(BaseModel):
    agent: int
    true_cost: float
    payment_rule: str
    holds: bool
    truthful_utility: float
    best_bid: float
    best_utility: float
    worst_violation: float


class IrVerdict(BaseModel):
    agent: int
    true_cost: float
    holds: bool
    utility: float


class InterimEstimate(BaseModel):
    agent: int
    cost: float
    samples: int
    seed: int
    restrictions: float
    restrictions_se: float
    payment: float
    payment_se: float
    utility: float
    utility_se: float


class ProfitEstimate(BaseModel):
    samples: int
    seed: int
    profit: float
    profit_se: float
