"""
Allocation backends: find the social law maximizing the virtual objective.

Two interchangeable backends return identical laws under the shared tie-break
(`src.ilp.solver.better`):

- `ilp`:    builds the allocation program and solves it with the exact solver.
- `brute`:  a `LawTable` valuates every social law once, keeps the best law per vector of
            restriction counts, and answers each bid profile by scanning those vectors.

Both optionally fix the number of restrictions of one agent.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Sequence, Tuple

from src.config import settings
from src.exceptions import InputError
from src.ilp.builder import build_dom_in_sl, build_dom_sl, virtual_costs
from src.ilp.solver import Candidate, better, decode_law, solve_exact
from src.model.models import CCGS, SocialLaw
from src.model.service import apply_law, check_enumeration_limit, enumerate_social_laws, law_indicator, replace_costs
from src.valuation.models import FeatureSet
from src.valuation.service import check_features, valuate

logger = logging.getLogger(__name__)

ILP = "ilp"
BRUTE = "brute"
BACKENDS = (ILP, BRUTE)

Counts = Tuple[int, ...]


@dataclass(frozen=True)
class LawLevel:
    counts: Counts
    value: float
    law: SocialLaw
    indicator: Tuple[int, ...]


@dataclass(frozen=True)
class Allocation:
    law: SocialLaw
    valuation: float
    objective: float


class LawTable:
    """
    Valuations of every social law of a structure, grouped by restriction-count vector.

    Within a vector the virtual cost of a law does not depend on which actions it forbids, so
    only the law with the highest value (smallest indicator on ties) can ever be selected.

    Attributes:
        structure (CCGS): The unrestricted structure.
        feature_set (FeatureSet): Features defining the valuation.
        levels (Dict[Counts, LawLevel]): Best law per vector of per-agent restriction counts.
        law_count (int): Number of social laws enumerated.
    """

    def __init__(self, structure: CCGS, feature_set: FeatureSet):
        check_features(structure, feature_set)
        self.law_count = check_enumeration_limit(structure)
        self.structure = structure
        self.feature_set = feature_set
        self.levels: Dict[Counts, LawLevel] = {}
        tolerance = settings.tolerance
        for law in enumerate_social_laws(structure):
            value = valuate(apply_law(structure, law), feature_set)
            counts = tuple(law.size(agent) for agent in structure.agents)
            indicator = law_indicator(structure, law)
            current = self.levels.get(counts)
            if (
                current is None
                or value > current.value + tolerance
                or (value >= current.value - tolerance and indicator < current.indicator)
            ):
                self.levels[counts] = LawLevel(counts, value, law, indicator)
        logger.info("Tabulated %d social laws into %d count vectors", self.law_count, len(self.levels))

    def serves(self, structure: CCGS, feature_set: FeatureSet) -> bool:
        """True when `structure` differs from the tabulated one at most in its cost priors."""
        return feature_set == self.feature_set and replace_costs(structure, self.structure.cost_models) == self.structure

    def candidates(self, costs: Dict[int, float], fixed: Optional[Tuple[int, int]] = None) -> Iterator[Tuple[Candidate, LawLevel]]:
        for counts, level in self.levels.items():
            if fixed is not None and counts[fixed[0] - 1] != fixed[1]:
                continue
            objective = level.value - sum(costs[agent] * counts[agent - 1] for agent in self.structure.agents)
            yield (objective, sum(counts), level.indicator), level

    def best(self, costs: Dict[int, float], fixed: Optional[Tuple[int, int]] = None) -> Optional[Tuple[float, LawLevel]]:
        incumbent: Optional[Candidate] = None
        chosen: Optional[LawLevel] = None
        for candidate, level in self.candidates(costs, fixed):
            if better(candidate, incumbent):
                incumbent, chosen = candidate, level
        if chosen is None:
            return None
        return incumbent[0], chosen


def allocate_ilp(structure: CCGS, feature_set: FeatureSet, bids: Sequence[float], fixed: Optional[Tuple[int, int]] = None) -> Optional[Allocation]:
    if fixed is None:
        model = build_dom_sl(structure, feature_set, bids)
    else:
        model = build_dom_in_sl(structure, feature_set, bids, *fixed)
    assignment = solve_exact(model)
    if not assignment.feasible:
        return None
    law = decode_law(assignment, structure)
    value = valuate(apply_law(structure, law), feature_set)
    return Allocation(law=law, valuation=value, objective=assignment.objective)


def allocate_brute(
    table: LawTable,
    bids: Sequence[float],
    fixed: Optional[Tuple[int, int]] = None,
    structure: Optional[CCGS] = None,
) -> Optional[Allocation]:
    """Scans the table with the bids priced by the priors of `structure` (default: the table's)."""
    pricing = table.structure if structure is None else structure
    found = table.best(virtual_costs(pricing, bids), fixed)
    if found is None:
        return None
    objective, level = found
    return Allocation(law=level.law, valuation=level.value, objective=objective)


def check_backend(backend: str) -> str:
    if backend not in BACKENDS:
        raise InputError(f"unknown backend '{backend}', expected one of {', '.join(BACKENDS)}")
    return backend
