"""
Command implementing a social law on a model file.
"""

from pathlib import Path
from typing import Optional

import typer

from src.cli.tools import handle_errors
from src.ingestion.tools import write_document
from src.model.service import apply_law, read_law, read_model, save_model

router = typer.Typer()


@router.command("apply")
@handle_errors
def apply(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    law: Path = typer.Option(..., "--law", "-l", help="Social law file."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Target file; standard output by default."),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Writes the restricted model: forbidden actions and the transitions using them removed.
    """
    structure = read_model(model)
    restricted = apply_law(structure, read_law(law, structure))
    write_document(save_model(restricted), output)
