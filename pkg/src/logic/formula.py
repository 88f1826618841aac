"""
ATL formula syntax trees.

Nodes are frozen dataclasses; structural equality and hashing ignore source positions, so
formulas can key memo tables and be de-duplicated directly. `str()` gives the canonical
serialization: fully parenthesized, coalition members ascending and comma-separated. It is
accepted back by the parser.

Core kinds: `Prop`, `Top`, `Not`, `Or`, `Next`, `Always`, `Until`.
Sugar kinds, removed by `desugar`: `And`, `Implies`, `Eventually`.
"""

from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Iterable, List, Mapping, Optional, Set

from src.exceptions import FormulaSyntaxError

Coalition = FrozenSet[int]


def coalition_text(coalition: Iterable[int]) -> str:
    return "<<" + ",".join(str(agent) for agent in sorted(coalition)) + ">>"


@dataclass(frozen=True)
class Formula:
    pos: Optional[int] = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self) -> tuple:
        return ()

    def __str__(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Prop(Formula):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Top(Formula):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self) -> tuple:
        return (self.arg,)

    def __str__(self) -> str:
        return f"(!{self.arg})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self) -> tuple:
        return (self.left, self.right)

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self) -> tuple:
        return (self.left, self.right)

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self) -> tuple:
        return (self.left, self.right)

    def __str__(self) -> str:
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True)
class Next(Formula):
    coalition: Coalition
    arg: Formula

    def children(self) -> tuple:
        return (self.arg,)

    def __str__(self) -> str:
        return f"({coalition_text(self.coalition)} X {self.arg})"


@dataclass(frozen=True)
class Always(Formula):
    coalition: Coalition
    arg: Formula

    def children(self) -> tuple:
        return (self.arg,)

    def __str__(self) -> str:
        return f"({coalition_text(self.coalition)} G {self.arg})"


@dataclass(frozen=True)
class Eventually(Formula):
    coalition: Coalition
    arg: Formula

    def children(self) -> tuple:
        return (self.arg,)

    def __str__(self) -> str:
        return f"({coalition_text(self.coalition)} F {self.arg})"


@dataclass(frozen=True)
class Until(Formula):
    coalition: Coalition
    left: Formula
    right: Formula

    def children(self) -> tuple:
        return (self.left, self.right)

    def __str__(self) -> str:
        return f"({coalition_text(self.coalition)} ({self.left} U {self.right}))"


QUANTIFIED = (Next, Always, Eventually, Until)


def false() -> Formula:
    return Not(Top())


def desugar(formula: Formula) -> Formula:
    """Rewrites conjunction, implication and eventually into the core kinds."""
    if isinstance(formula, (Prop, Top)):
        return formula
    if isinstance(formula, Not):
        return Not(desugar(formula.arg))
    if isinstance(formula, Or):
        return Or(desugar(formula.left), desugar(formula.right))
    if isinstance(formula, And):
        return Not(Or(Not(desugar(formula.left)), Not(desugar(formula.right))))
    if isinstance(formula, Implies):
        return Or(Not(desugar(formula.left)), desugar(formula.right))
    if isinstance(formula, Next):
        return Next(formula.coalition, desugar(formula.arg))
    if isinstance(formula, Always):
        return Always(formula.coalition, desugar(formula.arg))
    if isinstance(formula, Eventually):
        return Until(formula.coalition, Top(), desugar(formula.arg))
    if isinstance(formula, Until):
        return Until(formula.coalition, desugar(formula.left), desugar(formula.right))
    raise TypeError(f"unknown formula node {type(formula).__name__}")


def formula_size(formula: Formula) -> int:
    return 1 + sum(formula_size(child) for child in formula.children())


def subformulas(formula: Formula) -> Set[Formula]:
    found = {formula}
    for child in formula.children():
        found |= subformulas(child)
    return found


def canonical_order(formulas: Iterable[Formula]) -> List[Formula]:
    return sorted(set(formulas), key=lambda f: (formula_size(f), str(f)))


def closure(formula: Formula) -> List[Formula]:
    """
    The closure of a desugared formula: the formula and all of its subformulas, ordered by
    node count and then by canonical serialization.
    """
    return canonical_order(subformulas(formula))


def propositions(formula: Formula) -> Set[str]:
    return {f.name for f in subformulas(formula) if isinstance(f, Prop)}


def coalitions(formula: Formula) -> Set[Coalition]:
    return {f.coalition for f in subformulas(formula) if isinstance(f, QUANTIFIED)}


def is_propositional(formula: Formula) -> bool:
    return not coalitions(formula)


def substitute(formula: Formula, replace: Callable[[Prop], Formula]) -> Formula:
    """Replaces every proposition leaf by `replace(leaf)`; other nodes are rebuilt unchanged."""
    if isinstance(formula, Prop):
        return replace(formula)
    if isinstance(formula, Top):
        return formula
    if isinstance(formula, Not):
        return Not(substitute(formula.arg, replace))
    if isinstance(formula, (Or, And, Implies)):
        return type(formula)(substitute(formula.left, replace), substitute(formula.right, replace))
    if isinstance(formula, (Next, Always, Eventually)):
        return type(formula)(formula.coalition, substitute(formula.arg, replace))
    if isinstance(formula, Until):
        return Until(
            formula.coalition, substitute(formula.left, replace), substitute(formula.right, replace)
        )
    raise TypeError(f"unknown formula node {type(formula).__name__}")


def evaluate_propositional(formula: Formula, valuation: Mapping[str, bool]) -> bool:
    """
    Evaluates a formula without path quantifiers under a truth assignment.

    Raises:
        FormulaSyntaxError: If the formula has a path quantifier or an unassigned variable.
    """
    if isinstance(formula, Prop):
        if formula.name not in valuation:
            raise FormulaSyntaxError(f"variable '{formula.name}' has no value", formula.pos)
        return bool(valuation[formula.name])
    if isinstance(formula, Top):
        return True
    if isinstance(formula, Not):
        return not evaluate_propositional(formula.arg, valuation)
    if isinstance(formula, Or):
        return evaluate_propositional(formula.left, valuation) or evaluate_propositional(formula.right, valuation)
    if isinstance(formula, And):
        return evaluate_propositional(formula.left, valuation) and evaluate_propositional(formula.right, valuation)
    if isinstance(formula, Implies):
        return not evaluate_propositional(formula.left, valuation) or evaluate_propositional(formula.right, valuation)
    raise FormulaSyntaxError(f"path quantifier in propositional formula {formula}", formula.pos)
