"""
Commands writing allocation programs and generating Max-Weight-SAT instances.
"""

from pathlib import Path
from typing import Optional

import typer

from src.cli.schemas import OutputFormat, parse_bids
from src.cli.tools import console, emit, error_console, handle_errors
from src.exceptions import BidProfileError
from src.ilp.builder import build_dom_in_sl, build_dom_sl, constraint_bound
from src.ilp.generator import brute_force_maxwsat, gen_maxwsat_instance, parse_clauses
from src.ilp.schemas import IlpSummary
from src.ilp.writer import emit_lp
from src.ingestion.tools import read_document, write_document
from src.model.service import read_model, save_model
from src.valuation.service import read_features, save_features

router = typer.Typer()
gen = typer.Typer(name="gen", help="Instance generators.", no_args_is_help=True)


@router.command("emit-ilp")
@handle_errors
def emit_ilp(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    bids: str = typer.Option(..., "--bids", help="Comma-separated bids in agent order."),
    agent: Optional[int] = typer.Option(None, "--agent", help="Fix the restriction count of this agent."),
    count: Optional[int] = typer.Option(None, "--count", help="Restriction count of --agent."),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="LP file; standard output by default."),
    verbose_lp: bool = typer.Option(False, "--verbose-lp", help="Annotate constraints with their family."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Writes the allocation program of a bid profile in LP format.
    """
    structure = read_model(model)
    feature_set = read_features(features)
    profile = parse_bids(bids)
    if (agent is None) != (count is None):
        raise BidProfileError("--agent and --count go together")
    if agent is None:
        program = build_dom_sl(structure, feature_set, profile)
    else:
        program = build_dom_in_sl(structure, feature_set, profile, agent, count)
    text = emit_lp(program, output, verbose=verbose_lp)
    summary = IlpSummary(
        name=program.name,
        variables=len(program.variables),
        constraints=len(program.constraints),
        closure_size=len(program.closure),
        constraint_bound=constraint_bound(structure, len(program.closure)),
    )
    if output is None:
        emit(summary.model_copy(update={"lp": text}), output_format, lambda: typer.echo(text, nl=False))
        return
    emit(summary, output_format, lambda: console.print(
        f"{summary.name}: {summary.variables} variables, {summary.constraints} constraints "
        f"(bound {summary.constraint_bound}) written to {output}"
    ))


@gen.command("maxwsat")
@handle_errors
def maxwsat(
    clauses: Path = typer.Argument(..., help="Clause file."),
    prefix: Path = typer.Option(..., "--output", "-o", help="Prefix of the generated model and feature files."),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Turns weighted clauses into a one-agent model and feature set whose optimum is the best
    satisfiable weight.
    """
    variables, parsed = parse_clauses(read_document(clauses))
    structure, feature_set = gen_maxwsat_instance(variables, parsed)
    model_file = Path(f"{prefix}.model.json")
    features_file = Path(f"{prefix}.features.json")
    write_document(save_model(structure), model_file)
    write_document(save_features(feature_set), features_file)
    error_console.print(f"wrote {model_file} and {features_file}")
    console.print(f"optimum: {brute_force_maxwsat(variables, parsed)}")
