"""
Commands for model checking formulas and comparing structures.
"""

from pathlib import Path
from typing import Optional

import typer

from src.cli.schemas import OutputFormat, RunConfig
from src.cli.tools import console, emit, handle_errors, mark, table
from src.logic.bisimulation import check_bisimulation
from src.logic.checker import model_check
from src.logic.parser import parse_formula
from src.model.service import apply_law, read_law, read_model

router = typer.Typer()


@router.command("check")
@handle_errors
def check(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    formula: str = typer.Option(..., "--formula", "-f", help="ATL formula."),
    law: Optional[Path] = typer.Option(None, "--law", "-l", help="Social law applied before checking."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Lists the states satisfying a formula, on the structure or on its restriction by a law.
    """
    config = RunConfig(subcommand="check", model=model, law=law, output_format=output_format, verbose=verbose)
    structure = read_model(config.model)
    if config.law is not None:
        structure = apply_law(structure, read_law(config.law, structure))
    parsed = parse_formula(formula)
    satisfied = model_check(structure, parsed)
    document = {
        "formula": str(parsed),
        "initial": structure.initial in satisfied,
        "states": {state: state in satisfied for state in structure.states},
    }

    def render():
        table(
            str(parsed),
            ["state", "holds"],
            [(f"{state} (initial)" if state == structure.initial else state, mark(state in satisfied))
             for state in structure.states],
        )

    emit(document, config.output_format, render)


@router.command("bisim")
@handle_errors
def bisim(
    model: Path = typer.Option(..., "--model", "-m", help="First model file."),
    other: Path = typer.Option(..., "--other", "-M", help="Second model file."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Reports whether the initial states of two structures are alternating-bisimilar.
    """
    relation = check_bisimulation(read_model(model), read_model(other))
    document = {
        "equivalent": relation is not None,
        "relation": sorted([left, right] for left, right in relation or ()),
    }

    def render():
        console.print("equivalent" if relation is not None else "not equivalent")
        if relation:
            table("relation", ["left", "right"], sorted(relation))

    emit(document, output_format, render)
