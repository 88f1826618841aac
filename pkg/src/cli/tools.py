"""
Output and error plumbing shared by the command routers.

Documents go to standard output, either as a rich table for people or as a single sorted
JSON document; diagnostics go to standard error. Toolkit errors end the process with the exit
code they carry, anything else is reported as an internal failure.
"""

import functools
import logging
from typing import Any, Callable, Iterable, Sequence

import typer
from rich.console import Console
from rich.table import Table

from src.cli.schemas import OutputFormat
from src.config import configure_logging
from src.exceptions import ConsistencyError, SocialLawError
from src.ingestion.tools import write_document

logger = logging.getLogger(__name__)

console = Console()
error_console = Console(stderr=True)


def handle_errors(command: Callable) -> Callable:
    """Runs a command, mapping toolkit errors to their exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        configure_logging(kwargs.get("verbose", False))
        try:
            return command(*args, **kwargs)
        except typer.Exit:
            raise
        except SocialLawError as e:
            error_console.print(f"[red]error:[/red] {e.detail}", highlight=False)
            raise typer.Exit(code=e.exit_code) from e
        except Exception as e:
            logger.exception("Unexpected failure")
            error_console.print(f"[red]internal error:[/red] {e}", highlight=False)
            raise typer.Exit(code=ConsistencyError.exit_code) from e

    return wrapper


def emit(document: Any, output_format: OutputFormat, render: Callable[[], None]) -> None:
    if output_format == OutputFormat.JSON:
        write_document(document)
    else:
        render()


def table(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    view = Table(title=title)
    for column in columns:
        view.add_column(column)
    for row in rows:
        view.add_row(*(str(cell) for cell in row))
    console.print(view)


def mark(flag: bool) -> str:
    return "+" if flag else "-"
