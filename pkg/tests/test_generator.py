import random

import pytest

from src.exceptions import GeneratorLimitError
from src.ilp.builder import build_dom_sl
from src.ilp.generator import brute_force_maxwsat, gen_maxwsat_instance, parse_clauses
from src.ilp.solver import solve_exact, verify_assignment
from src.ingestion.tools import read_document
from src.mechanism.allocation import BRUTE
from src.mechanism.service import ProfitOptimalMechanism
from src.model.service import count_social_laws
from tests.conftest import DATA


def random_clause(rng: random.Random, variables) -> str:
    literals = [("!" if rng.random() < 0.5 else "") + name for name in rng.sample(variables, rng.randint(1, min(3, len(variables))))]
    return (" & " if rng.random() < 0.2 else " | ").join(literals)


def test_clause_file_optimum():
    variables, clauses = parse_clauses(read_document(DATA / "clauses.json"))
    assert variables == ["x1", "x2", "x3"]
    assert brute_force_maxwsat(variables, clauses) == 9
    structure, features = gen_maxwsat_instance(variables, clauses)
    assert structure.agent_count == 1
    assert len(structure.states) == 4
    assert count_social_laws(structure) == 2 ** 4 - 1
    assignment = solve_exact(build_dom_sl(structure, features, [0]))
    assert assignment.objective == pytest.approx(9)
    assert verify_assignment(assignment, structure, features)


def test_random_instances_match_brute_force():
    rng = random.Random(7)
    for _ in range(20):
        variables = [f"v{j}" for j in range(1, rng.randint(1, 10) + 1)]
        document = {
            "vars": variables,
            "clauses": [
                {"formula": random_clause(rng, variables), "weight": rng.randint(1, 9)}
                for _ in range(rng.randint(1, 6))
            ],
        }
        names, clauses = parse_clauses(document)
        structure, features = gen_maxwsat_instance(names, clauses)
        assignment = solve_exact(build_dom_sl(structure, features, [0]))
        assert assignment.objective == pytest.approx(brute_force_maxwsat(names, clauses))


def test_complementary_unit_clauses():
    variables, clauses = parse_clauses({"vars": ["x1"], "clauses": [
        {"formula": "x1", "weight": 3},
        {"formula": "!x1", "weight": 4},
    ]})
    assert brute_force_maxwsat(variables, clauses) == 4
    structure, features = gen_maxwsat_instance(variables, clauses)
    assignment = solve_exact(build_dom_sl(structure, features, [0]))
    assert assignment.objective == pytest.approx(4)
    assert verify_assignment(assignment, structure, features)


def test_brute_backend_reaches_the_same_optimum():
    variables, clauses = parse_clauses(read_document(DATA / "clauses.json"))
    structure, features = gen_maxwsat_instance(variables, clauses)
    mechanism = ProfitOptimalMechanism(structure, features, BRUTE)
    assert mechanism.allocate([0]).objective == pytest.approx(9)


def test_bids_do_not_matter_under_zero_virtual_cost():
    variables, clauses = parse_clauses(read_document(DATA / "clauses.json"))
    structure, features = gen_maxwsat_instance(variables, clauses)
    assert solve_exact(build_dom_sl(structure, features, [50])).objective == pytest.approx(9)


def test_empty_instance_has_optimum_zero():
    variables, clauses = parse_clauses({"vars": [], "clauses": []})
    assert brute_force_maxwsat(variables, clauses) == 0
    structure, features = gen_maxwsat_instance(variables, clauses)
    assert solve_exact(build_dom_sl(structure, features, [0])).objective == 0


def test_variable_limit():
    with pytest.raises(GeneratorLimitError, match="limit"):
        parse_clauses({"vars": [f"v{j}" for j in range(21)], "clauses": []})
    names = [f"v{j}" for j in range(21)]
    with pytest.raises(GeneratorLimitError, match="limit"):
        gen_maxwsat_instance(names, [])
    with pytest.raises(GeneratorLimitError, match="limit"):
        brute_force_maxwsat(names, [])


@pytest.mark.parametrize("document", [
    {"vars": ["x", "x"], "clauses": []},
    {"vars": ["x"], "clauses": [{"formula": "<<1>> X x", "weight": 1}]},
    {"vars": ["x"], "clauses": [{"formula": "y", "weight": 1}]},
    {"vars": ["x"], "clauses": [{"formula": "x |", "weight": 1}]},
    {"vars": ["x"], "clauses": [{"formula": "x", "weight": -1}]},
])
def test_malformed_clause_files(document):
    with pytest.raises(GeneratorLimitError):
        parse_clauses(document)
