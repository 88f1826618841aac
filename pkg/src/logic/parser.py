#
# Parser for the concrete ATL syntax
#
# Precedence: "!" > "&" > "|" > "->" (right associative). A coalition binds the operator
# and the unary operand right after it: <<1>> X p, <<>> G p, <<2>> F p, <<1,2>> (p U q).
#

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from src.exceptions import FormulaSyntaxError
from src.logic.formula import Always, And, Eventually, Formula, Implies, Next, Not, Or, Prop, Top, Until, false

GRAMMAR = r'''
TRUE: "true"
FALSE: "false"
_NEXT: "X"
_ALWAYS: "G"
_EVENTUALLY: "F"
_UNTIL: "U"
IDENT: /[A-Za-z0-9_]+/

?start: implication

?implication: disjunction
    | disjunction "->" implication                      -> implies

?disjunction: conjunction
    | disjunction "|" conjunction                       -> or_

?conjunction: unary
    | conjunction "&" unary                             -> and_

?unary: atom
    | "!" unary                                         -> not_
    | coalition _NEXT unary                             -> next
    | coalition _ALWAYS unary                           -> always
    | coalition _EVENTUALLY unary                       -> eventually
    | coalition "(" implication _UNTIL implication ")"  -> until

coalition: "<<" (IDENT ("," IDENT)*)? ">>"

?atom: TRUE                                             -> top
    | FALSE                                             -> bottom
    | IDENT                                             -> prop
    | "(" implication ")"

%import common.WS
%ignore WS
'''

_parser = Lark(GRAMMAR, parser="lalr", propagate_positions=True)


def _pos(meta):
    return getattr(meta, "start_pos", None)


@v_args(meta=True)
class FormulaBuilder(Transformer):
    """Translates the lark tree into formula nodes."""

    def top(self, meta, children):
        return Top(pos=_pos(meta))

    def bottom(self, meta, children):
        return false()

    def prop(self, meta, children):
        return Prop(str(children[0]), pos=children[0].start_pos)

    def not_(self, meta, children):
        return Not(children[0], pos=_pos(meta))

    def and_(self, meta, children):
        return And(children[0], children[1], pos=_pos(meta))

    def or_(self, meta, children):
        return Or(children[0], children[1], pos=_pos(meta))

    def implies(self, meta, children):
        return Implies(children[0], children[1], pos=_pos(meta))

    def coalition(self, meta, children):
        members = []
        for token in children:
            if not token.isdigit() or int(token) < 1:
                raise FormulaSyntaxError(f"coalition member '{token}' is not an agent index", token.start_pos)
            members.append(int(token))
        return frozenset(members)

    def next(self, meta, children):
        return Next(children[0], children[1], pos=_pos(meta))

    def always(self, meta, children):
        return Always(children[0], children[1], pos=_pos(meta))

    def eventually(self, meta, children):
        return Eventually(children[0], children[1], pos=_pos(meta))

    def until(self, meta, children):
        return Until(children[0], children[1], children[2], pos=_pos(meta))


def _describe(error: UnexpectedInput, text: str) -> FormulaSyntaxError:
    if isinstance(error, UnexpectedEOF) or (
        isinstance(error, UnexpectedToken) and error.token.type == "$END"
    ):
        return FormulaSyntaxError("syntax error at end of input", len(text))
    if isinstance(error, UnexpectedCharacters):
        return FormulaSyntaxError(
            f"unknown token {text[error.pos_in_stream]!r} at position {error.pos_in_stream}",
            error.pos_in_stream,
        )
    if isinstance(error, UnexpectedToken):
        position = error.token.start_pos
        return FormulaSyntaxError(f"syntax error at position {position}: unexpected {str(error.token)!r}", position)
    return FormulaSyntaxError(f"syntax error: {error}")


def parse_formula(text: str) -> Formula:
    """
    Parses the concrete syntax into a formula tree (sugar kinds kept).

    Raises:
        FormulaSyntaxError: With the character position of the offending input.
    """
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as e:
        raise _describe(e, text) from e
    try:
        formula = FormulaBuilder().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, FormulaSyntaxError):
            raise e.orig_exc from e
        raise
    if isinstance(formula, Token):
        return Prop(str(formula), pos=formula.start_pos)
    return formula
