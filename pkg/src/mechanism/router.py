"""
Commands running the mechanism, its oracles and its verification routines.

`verify` subcommands exit with code 4 when the checked property fails.
"""

import math
from pathlib import Path
from typing import Optional

import typer

from src.cli.schemas import Backend, OutputFormat, RunConfig, parse_bids
from src.cli.tools import console, emit, handle_errors, table
from src.exceptions import BidProfileError, PropertyViolation
from src.ilp.builder import build_dom_in_sl, build_dom_sl
from src.ilp.solver import solve_exact, verify_assignment
from src.ilp.writer import emit_lp
from src.logic.bisimulation import check_bisimulation
from src.mechanism.oracle import allocation_oracle, payment_oracle
from src.mechanism.service import PaymentRule, ProfitOptimalMechanism, threshold_payment
from src.mechanism.verification import (
    bid_grid, estimate_expected_profit, estimate_interim, verify_ir, verify_truthfulness,
)
from src.model.service import law_indicator, read_model, save_law
from src.valuation.service import read_features

router = typer.Typer()
verify = typer.Typer(name="verify", help="Property checks; exit code 4 on violation.", no_args_is_help=True)
oracle = typer.Typer(name="oracle", help="Brute-force reference computations.", no_args_is_help=True)


def _mechanism(config: RunConfig) -> ProfitOptimalMechanism:
    structure = read_model(config.model)
    return ProfitOptimalMechanism(structure, read_features(config.features), config.backend.value)


def _fail_unless(holds: bool, detail: str) -> None:
    if not holds:
        raise PropertyViolation(detail)


@router.command("mechanism")
@handle_errors
def mechanism(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    bids: Optional[str] = typer.Option(None, "--bids", help="Comma-separated bids in agent order."),
    backend: Backend = typer.Option(Backend.ILP, "--backend", help="Allocation backend."),
    emit_ilp: Optional[Path] = typer.Option(None, "--emit-ilp", help="Also write the allocation program here."),
    turning_points: bool = typer.Option(False, "--turning-points", help="Include per-agent turning points."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Allocates a social law for the bids and pays every agent.
    """
    config = RunConfig(
        subcommand="mechanism", model=model, features=features, bids=parse_bids(bids),
        backend=backend, output_format=output_format, verbose=verbose,
    )
    engine = _mechanism(config)
    report = engine.run(config.bids, with_turning_points=turning_points)
    if emit_ilp is not None:
        emit_lp(build_dom_sl(engine.structure, engine.feature_set, config.bids), emit_ilp)

    def render():
        table(
            "restrictions",
            ["agent", "state", "action"],
            [(row.agent, row.state, row.action) for row in report.law.restrict],
        )
        table(
            "agents",
            ["agent", "restricted", "payment"],
            [(agent, report.restricted_counts[agent], report.payments[agent]) for agent in report.payments],
        )
        console.print(f"valuation: {report.valuation}")
        console.print(f"virtual objective: {report.virtual_objective}")
        console.print(f"profit: {report.profit}")
        for agent, sequence in (report.turning_points or {}).items():
            console.print(f"agent {agent} turning points: {sequence.as_pairs()}")

    emit(report, config.output_format, render)


@router.command("allocate")
@handle_errors
def allocate(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    bids: Optional[str] = typer.Option(None, "--bids", help="Comma-separated bids in agent order."),
    backend: Backend = typer.Option(Backend.ILP, "--backend", help="Allocation backend."),
    agent: Optional[int] = typer.Option(None, "--agent", help="Fix the restriction count of this agent."),
    count: Optional[int] = typer.Option(None, "--count", help="Restriction count of --agent."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Prints the dominant social law, or the dominant law with one agent's count fixed.
    """
    config = RunConfig(
        subcommand="allocate", model=model, features=features, bids=parse_bids(bids),
        backend=backend, agent=agent, count=count, output_format=output_format, verbose=verbose,
    )
    engine = _mechanism(config)
    if (agent is None) != (count is None):
        raise BidProfileError("--agent and --count go together")
    if agent is None:
        allocation = engine.allocate(config.bids)
    else:
        allocation = engine.allocate_fixed(config.bids, agent, count)
    document = {
        "law": save_law(engine.structure, allocation.law).model_dump(mode="json"),
        "valuation": allocation.valuation,
        "objective": allocation.objective,
        "restricted_counts": {str(i): allocation.law.size(i) for i in engine.structure.agents},
    }
    emit(document, config.output_format, lambda: console.print(document))


@router.command("payment")
@handle_errors
def payment(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    bids: Optional[str] = typer.Option(None, "--bids", help="Comma-separated bids in agent order."),
    agent: int = typer.Option(..., "--agent", help="Paid agent."),
    backend: Backend = typer.Option(Backend.ILP, "--backend", help="Allocation backend."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Prints an agent's turning points and threshold payment.
    """
    config = RunConfig(
        subcommand="payment", model=model, features=features, bids=parse_bids(bids),
        backend=backend, agent=agent, output_format=output_format, verbose=verbose,
    )
    engine = _mechanism(config)
    sequence = engine.turning_points(config.bids, agent)
    amount = threshold_payment(sequence.initial_count, sequence.as_pairs())
    document = {"agent": agent, "payment": amount, "turning_points": sequence.model_dump(mode="json")}

    def render():
        table("turning points", ["threshold", "count"], sequence.as_pairs())
        console.print(f"payment: {amount}")

    emit(document, config.output_format, render)


@verify.command("truthful")
@handle_errors
def verify_truthful(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    agent: int = typer.Option(..., "--agent", help="Bidding agent."),
    true_cost: float = typer.Option(..., "--true-cost", help="The agent's private cost."),
    bids: Optional[str] = typer.Option(None, "--bids", help="Bids of all agents; the agent's entry is ignored."),
    grid: int = typer.Option(101, "--grid", help="Number of misreports tried."),
    upper: Optional[float] = typer.Option(None, "--upper", help="Largest misreport; the prior's upper bound by default."),
    payment_rule: PaymentRule = typer.Option(PaymentRule.MECHANISM, "--payment-rule"),
    backend: Backend = typer.Option(Backend.BRUTE, "--backend", help="Allocation backend."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Checks that bidding the true cost maximizes the agent's utility over a bid grid.
    """
    config = RunConfig(
        subcommand="verify truthful", model=model, features=features, bids=parse_bids(bids),
        backend=backend, agent=agent, grid=grid, output_format=output_format, verbose=verbose,
    )
    engine = _mechanism(config)
    prior = engine.structure.cost_models.get(agent)
    lower = prior.lower if prior is not None else 0.0
    if upper is None:
        upper = prior.upper if prior is not None else 0.0
        if math.isinf(upper):
            upper = 2.0 * max([true_cost, *config.bids]) + 1.0
    grid_bids = bid_grid(upper, grid, lower)
    verdict = verify_truthfulness(engine, agent, true_cost, config.bids, grid_bids, payment_rule)
    emit(verdict, config.output_format, lambda: console.print(verdict))
    _fail_unless(verdict.holds, f"misreport {verdict.best_bid} gains {verdict.worst_violation} over the truthful bid")


@verify.command("ir")
@handle_errors
def verify_individual_rationality(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    agent: int = typer.Option(..., "--agent", help="Bidding agent."),
    true_cost: float = typer.Option(..., "--true-cost", help="The agent's private cost."),
    bids: Optional[str] = typer.Option(None, "--bids", help="Bids of all agents; the agent's entry is ignored."),
    backend: Backend = typer.Option(Backend.BRUTE, "--backend", help="Allocation backend."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Checks that a truthful agent's utility is nonnegative.
    """
    config = RunConfig(
        subcommand="verify ir", model=model, features=features, bids=parse_bids(bids),
        backend=backend, agent=agent, output_format=output_format, verbose=verbose,
    )
    verdict = verify_ir(_mechanism(config), agent, true_cost, config.bids)
    emit(verdict, config.output_format, lambda: console.print(verdict))
    _fail_unless(verdict.holds, f"truthful utility {verdict.utility} is negative")


@verify.command("interim")
@handle_errors
def verify_interim(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    agent: int = typer.Option(..., "--agent", help="Agent whose cost is fixed."),
    cost: float = typer.Option(..., "--cost", help="The agent's cost."),
    samples: Optional[int] = typer.Option(None, "--samples", help="Monte-Carlo samples."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed."),
    backend: Backend = typer.Option(Backend.BRUTE, "--backend", help="Allocation backend."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Estimates an agent's expected restrictions, payment and utility at a fixed cost.
    """
    config = RunConfig(
        subcommand="verify interim", model=model, features=features, backend=backend, agent=agent,
        samples=samples, seed=seed, output_format=output_format, verbose=verbose,
    )
    estimate = estimate_interim(_mechanism(config), agent, cost, config.samples, config.seed)
    emit(estimate, config.output_format, lambda: console.print(estimate))
    _fail_unless(estimate.utility + 3 * estimate.utility_se >= 0, f"expected utility {estimate.utility} is negative")


@verify.command("profit")
@handle_errors
def verify_profit(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    samples: Optional[int] = typer.Option(None, "--samples", help="Monte-Carlo samples."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed."),
    backend: Backend = typer.Option(Backend.BRUTE, "--backend", help="Allocation backend."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Estimates the designer's expected profit under truthful bidding.
    """
    config = RunConfig(
        subcommand="verify profit", model=model, features=features, backend=backend,
        samples=samples, seed=seed, output_format=output_format, verbose=verbose,
    )
    engine = _mechanism(config)
    estimate = estimate_expected_profit(engine, config.samples, config.seed)
    emit(estimate, config.output_format, lambda: console.print(estimate))
    ceiling = engine.feature_set.total_value
    _fail_unless(
        estimate.profit <= ceiling + 3 * estimate.profit_se,
        f"expected profit {estimate.profit} exceeds the total feature value {ceiling}",
    )


@verify.command("bisim")
@handle_errors
def verify_bisim(
    model: Path = typer.Option(..., "--model", "-m", help="First model file."),
    other: Path = typer.Option(..., "--other", "-M", help="Second model file."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Fails unless the initial states of two structures are alternating-bisimilar.
    """
    relation = check_bisimulation(read_model(model), read_model(other))
    document = {"equivalent": relation is not None}
    emit(document, output_format, lambda: console.print(document))
    _fail_unless(relation is not None, "the initial states are not alternating-bisimilar")


@verify.command("assignment")
@handle_errors
def verify_solver_assignment(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    bids: Optional[str] = typer.Option(None, "--bids", help="Comma-separated bids in agent order."),
    agent: Optional[int] = typer.Option(None, "--agent", help="Fix the restriction count of this agent."),
    count: Optional[int] = typer.Option(None, "--count", help="Restriction count of --agent."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Solves the allocation program and checks the optimal assignment against the semantics.
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
    assignment = solve_exact(program)
    holds = verify_assignment(assignment, structure, feature_set)
    document = {"status": assignment.status, "objective": assignment.objective, "valid": holds, "stats": assignment.stats}
    emit(document, output_format, lambda: console.print(document))
    _fail_unless(holds, f"the {assignment.status} assignment does not match the encoded semantics")


@oracle.command("allocate")
@handle_errors
def oracle_allocate(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    bids: Optional[str] = typer.Option(None, "--bids", help="Comma-separated bids in agent order."),
    agent: Optional[int] = typer.Option(None, "--agent", help="Fix the restriction count of this agent."),
    count: Optional[int] = typer.Option(None, "--count", help="Restriction count of --agent."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Finds the dominant social law by valuating every social law.
    """
    config = RunConfig(
        subcommand="oracle allocate", model=model, features=features, bids=parse_bids(bids),
        backend=Backend.BRUTE, agent=agent, count=count, output_format=output_format, verbose=verbose,
    )
    if (agent is None) != (count is None):
        raise BidProfileError("--agent and --count go together")
    engine = _mechanism(config)
    law, objective = allocation_oracle(engine, config.bids, None if agent is None else (agent, count))
    document = {
        "law": save_law(engine.structure, law).model_dump(mode="json"),
        "objective": objective,
        "indicator": list(law_indicator(engine.structure, law)),
    }
    emit(document, config.output_format, lambda: console.print(document))


@oracle.command("payment")
@handle_errors
def oracle_payment(
    model: Path = typer.Option(..., "--model", "-m", help="Model file."),
    features: Path = typer.Option(..., "--features", "-F", help="Feature file."),
    bids: Optional[str] = typer.Option(None, "--bids", help="Comma-separated bids in agent order."),
    agent: int = typer.Option(..., "--agent", help="Paid agent."),
    t_max: Optional[float] = typer.Option(None, "--t-max", help="End of the bid sweep."),
    step: Optional[float] = typer.Option(None, "--step", help="Sweep grid step."),
    output_format: OutputFormat = typer.Option(OutputFormat.HUMAN, "--format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """
    Recomputes an agent's payment by sweeping its bid and integrating its restriction count.
    """
    config = RunConfig(
        subcommand="oracle payment", model=model, features=features, bids=parse_bids(bids),
        backend=Backend.BRUTE, agent=agent, output_format=output_format, verbose=verbose,
    )
    amount = payment_oracle(_mechanism(config), config.bids, agent, t_max, step)
    document = {"agent": agent, "payment": amount}
    emit(document, config.output_format, lambda: console.print(f"payment: {amount}"))
