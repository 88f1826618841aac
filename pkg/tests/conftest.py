import itertools
import random
from pathlib import Path

import pytest

from src.mechanism.allocation import BRUTE
from src.mechanism.service import ProfitOptimalMechanism
from src.model.service import load_model, read_law, read_model
from src.valuation.service import load_features, read_features

DATA = Path(__file__).resolve().parent.parent / "data"

LAW_NAMES = [f"law{index}" for index in range(8)]

# law2 leaves agent 1 only r at q0, q1 and q3, so only q0 and q3 are
# reachable and every a2- or b1-guarded feature holds vacuously.
LAW_VALUES = [32, 74, 92, 90, 86, 98, 62, 106]
LAW_PROFITS = [32, 49, 62, 65, 41, 58, 37, 56]
LAW_ROWS = [
    "-++----++--",
    "+-+++---+++",
    "+-+++-+++++",
    "+++++--++++",
    "++-+++--+++",
    "++++++-+++-",
    "+++----++--",
    "+++++++++--",
]


@pytest.fixture(scope="session")
def duo():
    return read_model(DATA / "duo.json")


@pytest.fixture(scope="session")
def duo_identity():
    return read_model(DATA / "duo_identity.json")


@pytest.fixture(scope="session")
def duo_features():
    return read_features(DATA / "duo_features.json")


@pytest.fixture(scope="session")
def laws(duo):
    return [read_law(DATA / "laws" / f"{name}.json", duo) for name in LAW_NAMES]


@pytest.fixture(scope="session")
def brute_uniform(duo, duo_features):
    mechanism = ProfitOptimalMechanism(duo, duo_features, BRUTE)
    mechanism.table
    return mechanism


@pytest.fixture(scope="session")
def brute_identity(duo_identity, duo_features, brute_uniform):
    return ProfitOptimalMechanism(duo_identity, duo_features, BRUTE, table=brute_uniform.table)


def single_agent_document(prior=None):
    """One agent choosing among a, b, c at s; a and b are worth forbidding."""
    return {
        "agents": 1,
        "states": ["s", "ta", "tb", "tc"],
        "initial": "s",
        "propositions": ["pa", "pb", "pc"],
        "labels": {"ta": ["pa"], "tb": ["pb"], "tc": ["pc"]},
        "actions": {
            "s": {"1": ["a", "b", "c"]},
            "ta": {"1": ["stay"]},
            "tb": {"1": ["stay"]},
            "tc": {"1": ["stay"]},
        },
        "transitions": [
            {"from": "s", "joint": ["a"], "to": "ta"},
            {"from": "s", "joint": ["b"], "to": "tb"},
            {"from": "s", "joint": ["c"], "to": "tc"},
            {"from": "ta", "joint": ["stay"], "to": "ta"},
            {"from": "tb", "joint": ["stay"], "to": "tb"},
            {"from": "tc", "joint": ["stay"], "to": "tc"},
        ],
        "costs": {"1": prior or {"dist": "identity_virtual"}},
    }


def synthetic_features():
    """Level values v_0 = 70, v_1 = 90, v_2 = 100 on the single-agent document."""
    return load_features({"features": [
        {"formula": "true", "value": 70},
        {"formula": "!<<1>> X pa", "value": 20},
        {"formula": "!<<1>> X pb", "value": 10},
    ]})


@pytest.fixture
def synthetic():
    return load_model(single_agent_document()), synthetic_features()


def random_formula(rng: random.Random, props, agents, depth: int) -> str:
    if depth == 0 or rng.random() < 0.25:
        return rng.choice(props + ["true"])
    coalition = "<<" + ",".join(str(a) for a in sorted(rng.sample(agents, rng.randint(0, len(agents))))) + ">>"
    kind = rng.choice(["!", "&", "|", "->", "X", "G", "F", "U"])
    left = random_formula(rng, props, agents, depth - 1)
    if kind == "!":
        return f"!({left})"
    if kind in ("X", "G", "F"):
        return f"{coalition} {kind} ({left})"
    right = random_formula(rng, props, agents, depth - 1)
    if kind == "U":
        return f"{coalition} ({left} U {right})"
    return f"({left} {kind} {right})"


def random_features(rng: random.Random, props, agents, size: int = 4) -> dict:
    return {"features": [
        {"formula": random_formula(rng, props, agents, 3), "value": rng.randint(1, 20)}
        for _ in range(size)
    ]}


def random_model_document(rng: random.Random, max_laws: int = 2000) -> dict:
    """A small total deterministic structure with identity virtual costs."""
    while True:
        agents = list(range(1, rng.randint(1, 2) + 1))
        states = [f"q{index}" for index in range(rng.randint(2, 4))]
        actions = {
            state: {str(agent): [f"m{j}" for j in range(rng.randint(1, 3))] for agent in agents}
            for state in states
        }
        laws = 1
        for per_agent in actions.values():
            for names in per_agent.values():
                laws *= 2 ** len(names) - 1
        if laws <= max_laws:
            break
    transitions = [
        {"from": state, "joint": list(joint), "to": rng.choice(states)}
        for state in states
        for joint in itertools.product(*(actions[state][str(agent)] for agent in agents))
    ]
    return {
        "agents": len(agents),
        "states": states,
        "initial": states[0],
        "propositions": ["p1", "p2"],
        "labels": {state: sorted(rng.sample(["p1", "p2"], rng.randint(0, 2))) for state in states},
        "actions": actions,
        "transitions": transitions,
        "costs": {str(agent): {"dist": "identity_virtual"} for agent in agents},
    }
