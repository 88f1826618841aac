"""
Command valuating a structure, or its restriction by a social law, against a feature set.
"""

from pathlib import Path
from typing import Optional

import typer

from src.cli.schemas import OutputFormat
from src.cli.tools import console, emit, handle_errors, mark, table
from src.model.service import apply_law, read_law, read_model
from src.valuation.service import check_features, read_features, satisfied_features

router = typer.Typer()


@router.command("value")
@handle_errors
def value(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    law: Optional[Path] = typer.Option(None, "--law", "-l", help="Social law applied before valuating."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Prints the value and the +/- row of satisfied features.
    """
    structure = read_model(model)
    feature_set = read_features(features)
    check_features(structure, feature_set)
    if law is not None:
        structure = apply_law(structure, read_law(law, structure))
    satisfied = satisfied_features(structure, feature_set)
    total = sum(feature.value for feature, flag in zip(feature_set.features, satisfied) if flag)
    document = {
        "value": total,
        "satisfied": satisfied,
        "row": "".join(mark(flag) for flag in satisfied),
    }

    def render():
        table(
            "features",
            ["#", "formula", "value", "holds"],
            [(index + 1, str(feature.source), feature.value, mark(flag))
             for index, (feature, flag) in enumerate(zip(feature_set.features, satisfied))],
        )
        console.print(f"value: {total}")

    emit(document, output_format, render)
