import random
import re

import pytest

from src.exceptions import InfeasibleAllocationError
from src.ilp.builder import build_dom_in_sl, build_dom_sl, constraint_bound, encode
from src.ilp.models import INFEASIBLE, OPTIMAL, x_name
from src.ilp.solver import decode_law, solve_exact, verify_assignment
from src.ilp.writer import CONSTANT_VARIABLE, emit_lp, format_lp
from src.mechanism.allocation import BRUTE, allocate_brute
from src.mechanism.oracle import allocation_oracle
from src.mechanism.service import ProfitOptimalMechanism
from src.model.service import count_social_laws, load_model
from src.valuation.models import FeatureSet
from src.valuation.service import load_features
from tests.conftest import random_features, random_model_document


def test_constraint_count_is_bounded(duo, duo_features):
    model = encode(duo, duo_features)
    assert 0 < len(model.constraints) <= constraint_bound(duo, len(model.closure))
    assert len({variable.name for variable in model.variables}) == len(model.variables)


def test_lp_text_is_deterministic(duo_identity, duo_features):
    first = format_lp(build_dom_sl(duo_identity, duo_features, [10, 15]))
    second = format_lp(build_dom_sl(duo_identity, duo_features, [10, 15]))
    assert first == second
    assert first.startswith("\\ Problem: dom_sl\n")
    for section in ("Maximize\n", "Subject To\n", "Binary\n"):
        assert section in first
    assert first.endswith("End\n")
    assert "-0 " not in first


def test_verbose_lp_names_constraint_families(duo_identity, duo_features):
    text = format_lp(build_dom_sl(duo_identity, duo_features, [10, 15]), verbose=True)
    assert "\\ family (27)\n" in text
    assert "\\ family (29)\n" in text


def test_lp_names_are_valid_identifiers(duo_identity, duo_features):
    identifier = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")
    text = format_lp(build_dom_sl(duo_identity, duo_features, [10, 15]))
    constraints = text.split("Subject To\n")[1].split("Binary\n")[0]
    rows = [line[:-1] for line in constraints.splitlines() if line.endswith(":")]
    columns = [line for line in text.split("Binary\n")[1].splitlines() if line and line != "End"]
    assert any(row.startswith("f38top_") for row in rows)
    assert len(rows) == len(set(rows))
    for name in rows + columns:
        assert identifier.fullmatch(name), name


def test_emit_lp_writes_the_same_text(tmp_path, duo_identity, duo_features):
    model = build_dom_sl(duo_identity, duo_features, [10, 15])
    target = tmp_path / "duo.lp"
    text = emit_lp(model, target)
    assert target.read_text() == text == format_lp(model)


def test_empty_objective_uses_a_constant(duo_identity):
    text = format_lp(build_dom_sl(duo_identity, FeatureSet(), [0, 0]))
    assert f"+0 {CONSTANT_VARIABLE}\n" in text
    assert "Bounds\n" in text


def test_objective_prices_features_and_restrictions(duo_identity, duo_features):
    model = build_dom_sl(duo_identity, duo_features, [10, 15])
    assert model.virtual_costs == {1: 10, 2: 15}
    assert model.objective["y__q0__1__r"] == -10
    assert model.objective["y__q0__2__a"] == -15
    initial_terms = sum(
        coefficient for name, coefficient in model.objective.items() if name.startswith("x__q0__")
    )
    assert initial_terms == 114


def test_exact_solution_on_the_example(duo_identity, duo_features, brute_identity):
    assignment = solve_exact(build_dom_sl(duo_identity, duo_features, [10, 15]))
    assert assignment.status == OPTIMAL
    expected = brute_identity.allocate([10, 15])
    assert assignment.objective == pytest.approx(expected.objective)
    assert assignment.objective >= 65
    assert decode_law(assignment, duo_identity) == expected.law
    assert verify_assignment(assignment, duo_identity, duo_features)


def test_exact_solution_matches_law_enumeration(duo_identity, duo_features):
    mechanism = ProfitOptimalMechanism(duo_identity, duo_features, BRUTE)
    law, objective = allocation_oracle(mechanism, [10, 15])
    assignment = solve_exact(build_dom_sl(duo_identity, duo_features, [10, 15]))
    assert assignment.objective == pytest.approx(objective)
    assert decode_law(assignment, duo_identity) == law


@pytest.mark.parametrize("bids", [[10, 15], [3, 22], [30, 0]])
def test_exact_solution_under_uniform_priors(duo, duo_features, brute_uniform, bids):
    assignment = solve_exact(build_dom_sl(duo, duo_features, bids))
    expected = brute_uniform.allocate(bids)
    assert assignment.objective == pytest.approx(expected.objective)
    assert decode_law(assignment, duo) == expected.law
    assert verify_assignment(assignment, duo, duo_features)


def test_tampered_assignment_fails_verification(duo_identity, duo_features):
    assignment = solve_exact(build_dom_sl(duo_identity, duo_features, [10, 15]))
    name = x_name("q4", 0)
    assignment.values[name] = 1 - assignment.values[name]
    assert not verify_assignment(assignment, duo_identity, duo_features)


def test_fixed_count_program(duo_identity, duo_features, brute_identity):
    model = build_dom_in_sl(duo_identity, duo_features, [10, 15], 1, 1)
    assert model.name == "dom_in_sl_1_1"
    assert [constraint.family for constraint in model.constraints][-1] == "60"
    assignment = solve_exact(model)
    law = decode_law(assignment, duo_identity)
    assert law.size(1) == 1
    expected = allocate_brute(brute_identity.table, [10, 15], (1, 1), duo_identity)
    assert assignment.objective == pytest.approx(expected.objective)
    assert law == expected.law


def test_impossible_count_is_infeasible(duo_identity, duo_features):
    assignment = solve_exact(build_dom_in_sl(duo_identity, duo_features, [10, 15], 1, 5))
    assert assignment.status == INFEASIBLE
    assert not assignment.feasible
    with pytest.raises(InfeasibleAllocationError):
        decode_law(assignment, duo_identity)
    assert not verify_assignment(assignment, duo_identity, duo_features)


def test_exact_solver_agrees_with_enumeration_on_random_models():
    rng = random.Random(2024)
    for _ in range(20):
        structure = load_model(random_model_document(rng))
        assert count_social_laws(structure) <= 2000
        agents = list(structure.agents)
        features = load_features(random_features(rng, ["p1", "p2"], agents, size=3))
        bids = [rng.randint(0, 10) for _ in agents]
        model = build_dom_sl(structure, features, bids)
        assert len(model.constraints) <= constraint_bound(structure, len(model.closure))
        assignment = solve_exact(model)
        law, objective = allocation_oracle(ProfitOptimalMechanism(structure, features, BRUTE), bids)
        assert assignment.objective == pytest.approx(objective, abs=1e-9)
        assert decode_law(assignment, structure) == law
        assert verify_assignment(assignment, structure, features)
