#
# CPLEX LP format writer
#
# One linear term per line, coefficients with a fixed number of significant digits, so
# identical models produce byte-identical files.
#

import logging
from pathlib import Path
from typing import IO, Iterable, List, Optional, Tuple, Union

from src.config import settings
from src.exceptions import InputError
from src.ilp.models import IlpModel

logger = logging.getLogger(__name__)

CONSTANT_VARIABLE = "ONE_VAR_CONSTANT"


def _no_negative_zero(value: float) -> float:
    return 0.0 if value == 0 else value


def _number(value: float, digits: int) -> str:
    return f"{_no_negative_zero(value):.{digits}g}"


def _terms(terms: Iterable[Tuple[str, float]], digits: int) -> List[str]:
    return [f"{_no_negative_zero(coefficient):+.{digits}g} {name}\n" for name, coefficient in terms]


def format_lp(model: IlpModel, verbose: bool = False, digits: Optional[int] = None) -> str:
    """
    Renders a model in LP format with `Maximize`, `Subject To`, `Binary` and `End` sections.

    Args:
        model (IlpModel): The model to render.
        verbose (bool): Precede every constraint with a `\\ family (N)` comment.
        digits (Optional[int]): Significant digits of coefficients; settings default.

    Returns:
        str: The LP text.
    """
    digits = digits or settings.lp_significant_digits
    output: List[str] = [f"\\ Problem: {model.name}\n", "\n", "Maximize\n", "obj:\n"]
    objective = _terms(model.objective.items(), digits)
    uses_constant = not objective
    output.extend(objective or [f"+0 {CONSTANT_VARIABLE}\n"])
    output.append("\n")
    output.append("Subject To\n")
    for constraint in model.constraints:
        if verbose:
            output.append(f"\\ family ({constraint.family})\n")
        output.append(f"{constraint.name}:\n")
        output.extend(_terms(constraint.terms, digits))
        output.append(f"{constraint.sense} {_number(constraint.rhs, digits)}\n\n")
    if uses_constant:
        output.append("Bounds\n")
        output.append(f" {CONSTANT_VARIABLE} = 1\n\n")
    output.append("Binary\n")
    for variable in model.variables:
        output.append(f"{variable.name}\n")
    output.append("\n")
    output.append("End\n")
    return "".join(output)


def emit_lp(model: IlpModel, sink: Union[str, Path, IO[str], None] = None, verbose: bool = False) -> str:
    """
    Writes the LP text of a model to a path or an open text stream and returns it.

    Raises:
        InputError: If the sink cannot be written.
    """
    text = format_lp(model, verbose=verbose)
    if sink is None:
        return text
    try:
        if isinstance(sink, (str, Path)):
            with open(sink, "w", encoding="utf-8", newline="\n") as file:
                file.write(text)
        else:
            sink.write(text)
    except OSError as e:
        raise InputError(f"Error during writing LP file: {e}") from e
    logger.info("Wrote LP model %s with %d constraints", model.name, len(model.constraints))
    return text
