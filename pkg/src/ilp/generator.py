"""
Weighted MAX-SAT instances as allocation problems.

A single agent sits in a start state `qs` with one action `a_j` per boolean variable, each
leading to a state `q_j` labelled with the variable, plus an `idle` self-loop. A variable is
true when its action stays available, so each clause becomes a feature in which every
variable `v` is replaced by `<<1>> X v`. The agent's virtual cost is constantly zero, so the
optimum of the allocation program is the maximum satisfiable weight.
"""

import itertools
import logging
from typing import List, Tuple, Union

from src.config import settings
from src.distributions.models import ZeroVirtual
from src.exceptions import FormulaSyntaxError, GeneratorLimitError
from src.ilp.schemas import ClauseFileDocument
from src.ingestion.tools import parse_document
from src.logic.formula import Formula, Next, evaluate_propositional, is_propositional, propositions, substitute
from src.logic.parser import parse_formula
from src.model.models import CCGS, check_identifier
from src.valuation.models import FeatureSet
from src.valuation.service import make_feature

logger = logging.getLogger(__name__)

START = "qs"
IDLE = "idle"
STAY = "stay"

Clause = Tuple[Formula, float]


def parse_clauses(document: Union[dict, ClauseFileDocument]) -> Tuple[List[str], List[Clause]]:
    """
    Validates a clause file.

    Raises:
        GeneratorLimitError: If the file is malformed, has too many variables, or a clause is
            not a propositional formula over the declared variables.
    """
    if not isinstance(document, ClauseFileDocument):
        document = parse_document(document, ClauseFileDocument, GeneratorLimitError)
    variables = list(document.vars)
    if len(set(variables)) != len(variables):
        raise GeneratorLimitError("duplicate variable names")
    check_variable_limit(variables)
    for name in variables:
        check_identifier("variable", name)
    clauses = []
    for index, row in enumerate(document.clauses):
        try:
            formula = parse_formula(row.formula)
        except FormulaSyntaxError as e:
            raise GeneratorLimitError(f"clause {index}: {e.detail}") from e
        if not is_propositional(formula):
            raise GeneratorLimitError(f"clause {index} is not propositional")
        unknown = propositions(formula) - set(variables)
        if unknown:
            raise GeneratorLimitError(f"clause {index} uses undeclared variables {sorted(unknown)}")
        clauses.append((formula, float(row.weight)))
    return variables, clauses


def check_variable_limit(variables: List[str]) -> None:
    if len(variables) > settings.max_generator_vars:
        raise GeneratorLimitError(
            f"{len(variables)} variables exceed the generator limit of {settings.max_generator_vars}"
        )


def gen_maxwsat_instance(variables: List[str], clauses: List[Clause]) -> Tuple[CCGS, FeatureSet]:
    check_variable_limit(variables)
    states = (START,) + tuple(f"q{j}" for j in range(1, len(variables) + 1))
    actions = {(1, START): tuple(f"a{j}" for j in range(1, len(variables) + 1)) + (IDLE,)}
    transitions = {(START, (IDLE,)): START}
    labels = {START: frozenset()}
    for j, name in enumerate(variables, start=1):
        state = f"q{j}"
        actions[(1, state)] = (STAY,)
        transitions[(START, (f"a{j}",))] = state
        transitions[(state, (STAY,))] = state
        labels[state] = frozenset({name})
    structure = CCGS(
        agent_count=1,
        states=states,
        initial=START,
        propositions=tuple(variables),
        labels=labels,
        actions=actions,
        transitions=transitions,
        cost_models={1: ZeroVirtual()},
    )
    features = tuple(
        make_feature(substitute(formula, lambda leaf: Next(frozenset({1}), leaf)), weight)
        for formula, weight in clauses
    )
    logger.info("Generated MAX-SAT instance with %d variables and %d clauses", len(variables), len(clauses))
    return structure, FeatureSet(features=features)


def brute_force_maxwsat(variables: List[str], clauses: List[Clause]) -> float:
    """The largest total weight of clauses satisfied by a single truth assignment."""
    check_variable_limit(variables)
    best = 0.0
    for bits in itertools.product((False, True), repeat=len(variables)):
        valuation = dict(zip(variables, bits))
        weight = sum(w for formula, w in clauses if evaluate_propositional(formula, valuation))
        best = max(best, weight)
    return best
