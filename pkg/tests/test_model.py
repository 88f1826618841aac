import copy
import random

import orjson
import pytest

from src.exceptions import BidProfileError, InvalidLawError, ModelValidationError
from src.ingestion.tools import dumps
from src.model.models import SocialLaw
from src.model.service import (
    apply_law, check_bids, count_social_laws, enumerate_social_laws, law_indicator, load_law,
    load_model, restrictable_count, save_law, save_model, y_slots,
)
from tests.conftest import DATA


def duo_document():
    return orjson.loads((DATA / "duo.json").read_bytes())


def test_load_example(duo):
    assert duo.agent_count == 2
    assert duo.states == ("q0", "q1", "q2", "q3", "q4")
    assert duo.transition_count == 17
    assert duo.available(1, "q2") == ("r", "w")
    assert duo.successor("q0", ("r", "a")) == "q3"
    assert duo.label("q4") == frozenset({"eps"})


def test_save_model_round_trip(duo):
    again = load_model(orjson.loads(dumps(save_model(duo))))
    assert again == duo


def test_missing_transition_is_rejected():
    document = duo_document()
    document["transitions"] = [row for row in document["transitions"] if row["joint"] != ["w", "w"]]
    with pytest.raises(ModelValidationError, match="non-total"):
        load_model(document)


def test_nondeterministic_transition_is_rejected():
    document = duo_document()
    document["transitions"].append({"from": "q0", "joint": ["r", "r"], "to": "q1"})
    with pytest.raises(ModelValidationError, match="nondeterministic"):
        load_model(document)


def test_empty_action_set_is_rejected():
    document = duo_document()
    document["actions"]["q4"]["2"] = []
    with pytest.raises(ModelValidationError):
        load_model(document)


def test_missing_cost_model_is_rejected():
    document = duo_document()
    del document["costs"]["2"]
    with pytest.raises(ModelValidationError, match="cost model"):
        load_model(document)


def test_apply_law_removes_transitions(duo, laws):
    restricted = apply_law(duo, laws[3])
    assert restricted.available(2, "q2") == ("r",)
    assert restricted.available(1, "q3") == ("r",)
    assert ("q2", ("w", "w")) not in restricted.transitions
    assert ("q3", ("w", "w")) not in restricted.transitions
    assert restricted.transition_count == 13
    assert restricted.states == duo.states


def test_empty_law_is_identity(duo, laws):
    assert apply_law(duo, laws[0]) == duo
    assert apply_law(duo, SocialLaw(restrictions={})) == duo


def test_applying_laws_in_sequence_applies_their_union(duo):
    rng = random.Random(13)
    laws = list(enumerate_social_laws(duo))
    for first in rng.sample(laws, 15):
        restricted = apply_law(duo, first)
        for second in rng.sample(list(enumerate_social_laws(restricted)), 5):
            assert apply_law(restricted, second) == apply_law(duo, first.union(second))


def test_law_forbidding_every_action_is_invalid(duo):
    law = SocialLaw(restrictions={(1, "q2"): frozenset({"r", "w"})})
    with pytest.raises(InvalidLawError, match="agent 1 at state 'q2'"):
        apply_law(duo, law)


def test_law_with_unknown_action_is_invalid(duo):
    with pytest.raises(InvalidLawError):
        load_law({"restrict": [{"agent": 1, "state": "q4", "action": "w"}]}, duo)


def test_law_round_trip(duo, laws):
    for law in laws:
        assert load_law(orjson.loads(dumps(save_law(duo, law))), duo) == law


def test_law_sizes(laws):
    assert [(law.size(1), law.size(2)) for law in laws] == [
        (0, 0), (1, 1), (3, 0), (1, 1), (0, 3), (1, 2), (1, 1), (2, 2),
    ]


def test_count_social_laws(duo):
    assert count_social_laws(duo) == 6561
    assert restrictable_count(duo, 1) == 4
    assert restrictable_count(duo, 2) == 4


def test_enumeration_is_complete_and_starts_empty(duo):
    laws = list(enumerate_social_laws(duo))
    assert len(laws) == 6561
    assert laws[0].restrictions == {}
    assert len({law_indicator(duo, law) for law in laws}) == 6561


def test_law_indicator_order(duo, laws):
    slots = y_slots(duo)
    assert slots[:4] == [("q0", 1, "r"), ("q0", 1, "a"), ("q0", 2, "r"), ("q0", 2, "a")]
    indicator = law_indicator(duo, laws[1])
    assert [slot for slot, bit in zip(slots, indicator) if bit] == [("q0", 1, "a"), ("q0", 2, "a")]


@pytest.mark.parametrize("bids", [[10], [10, 15, 20], [-1, 3], [float("nan"), 1]])
def test_bad_bid_profiles(duo, bids):
    with pytest.raises(BidProfileError):
        check_bids(duo, bids)


def test_bid_profile_is_normalized(duo):
    assert check_bids(duo, [10, 15]) == (10.0, 15.0)


def test_model_document_is_not_mutated_by_loading():
    document = duo_document()
    snapshot = copy.deepcopy(document)
    load_model(document)
    assert document == snapshot
