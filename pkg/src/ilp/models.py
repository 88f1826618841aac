"""
This module defines the 0/1 integer programs that encode allocation problems.

The module includes the following models:
- `Variable`:     A named binary variable with its class (`x`, `y`, `yA`, `s`, `z`, `e`, `r`) and index.
- `Constraint`:   A linear (in)equality tagged with the constraint family it instantiates.
- `IlpModel`:     Variables, objective and constraints, plus the encoding metadata the exact
                  solver and the decoder need (structure, closure, fixed count).
- `Assignment`:   A solver result: status, 0/1 values, objective and search statistics.

Variable names are deterministic: `x__{state}__{fid}`, `y__{state}__{agent}__{action}`,
`yA__{state}__{coalition}__{move}`, `s__{state}__{fid}__{coalition}__{move}__{completion}`,
`z__...` and `e__...` as `s` without the completion, `r__{state}__{fid}`. `fid` is the position
of the formula in the union closure; coalitions and moves are underscore-joined.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from src.exceptions import ModelValidationError
from src.logic.formula import Coalition, Formula
from src.model.models import CCGS
from src.valuation.models import FeatureSet

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"


def coalition_key(coalition: Iterable[int]) -> str:
    return "_".join(str(agent) for agent in sorted(coalition))


def move_key(move: Iterable[str]) -> str:
    return "_".join(move)


def x_name(state: str, fid: int) -> str:
    return f"x__{state}__{fid}"


def y_name(state: str, agent: int, action: str) -> str:
    return f"y__{state}__{agent}__{action}"


def ya_name(state: str, coalition: Coalition, move: Tuple[str, ...]) -> str:
    return f"yA__{state}__{coalition_key(coalition)}__{move_key(move)}"


def s_name(state: str, fid: int, coalition: Coalition, move: Tuple[str, ...], completion: Tuple[str, ...]) -> str:
    return f"s__{state}__{fid}__{coalition_key(coalition)}__{move_key(move)}__{move_key(completion)}"


def z_name(state: str, fid: int, coalition: Coalition, move: Tuple[str, ...]) -> str:
    return f"z__{state}__{fid}__{coalition_key(coalition)}__{move_key(move)}"


def e_name(state: str, fid: int, coalition: Coalition, move: Tuple[str, ...]) -> str:
    return f"e__{state}__{fid}__{coalition_key(coalition)}__{move_key(move)}"


def r_name(state: str, fid: int) -> str:
    return f"r__{state}__{fid}"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    index: tuple


@dataclass(frozen=True)
class Constraint:
    name: str
    family: str
    terms: Tuple[Tuple[str, float], ...]
    sense: str
    rhs: float

    def lhs(self, values: Mapping[str, int]) -> float:
        return sum(coefficient * values[name] for name, coefficient in self.terms)

    def holds(self, values: Mapping[str, int], tolerance: float = 1e-9) -> bool:
        lhs = self.lhs(values)
        if self.sense == "<=":
            return lhs <= self.rhs + tolerance
        if self.sense == ">=":
            return lhs >= self.rhs - tolerance
        return abs(lhs - self.rhs) <= tolerance


@dataclass
class IlpModel:
    name: str
    structure: CCGS
    feature_set: FeatureSet
    closure: List[Formula]
    variables: List[Variable] = field(default_factory=list)
    objective: Dict[str, float] = field(default_factory=dict)
    constraints: List[Constraint] = field(default_factory=list)
    virtual_costs: Dict[int, float] = field(default_factory=dict)
    fixed: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        self._by_name: Dict[str, Variable] = {variable.name: variable for variable in self.variables}

    def add_variable(self, name: str, kind: str, index: tuple) -> str:
        existing = self._by_name.get(name)
        if existing is not None:
            if existing.index != index:
                raise ModelValidationError(f"variable name {name} is shared by {existing.index} and {index}")
            return name
        variable = Variable(name, kind, index)
        self.variables.append(variable)
        self._by_name[name] = variable
        return name

    def add_constraint(self, family: str, terms: Iterable[Tuple[str, float]], sense: str, rhs: float) -> None:
        name = f"f{family}_{len(self.constraints) + 1}"
        self.constraints.append(Constraint(name, family, tuple(terms), sense, float(rhs)))

    def has_variable(self, name: str) -> bool:
        return name in self._by_name

    def variable(self, name: str) -> Variable:
        return self._by_name[name]

    def variables_of(self, kind: str) -> List[Variable]:
        return [variable for variable in self.variables if variable.kind == kind]

    def fid(self, formula: Formula) -> int:
        return self.closure.index(formula)

    def objective_value(self, values: Mapping[str, int]) -> float:
        return sum(coefficient * values[name] for name, coefficient in self.objective.items())

    def violated(self, values: Mapping[str, int], tolerance: float = 1e-9) -> List[Constraint]:
        return [constraint for constraint in self.constraints if not constraint.holds(values, tolerance)]

    def is_satisfied(self, values: Mapping[str, int], tolerance: float = 1e-9) -> bool:
        if any(values.get(variable.name) not in (0, 1) for variable in self.variables):
            return False
        return not self.violated(values, tolerance)


@dataclass
class Assignment:
    status: str
    values: Dict[str, int] = field(default_factory=dict)
    objective: Optional[float] = None
    stats: Dict[str, int] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL
