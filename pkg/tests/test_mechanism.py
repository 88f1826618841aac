import random

import numpy as np
import pytest

from src.distributions.models import IdentityVirtual, Uniform
from src.exceptions import ConsistencyError, DistributionDomainError, InfeasibleAllocationError, InputError
from src.mechanism.allocation import BRUTE, ILP, allocate_brute
from src.mechanism.oracle import allocation_oracle, payment_oracle
from src.mechanism.service import (
    PaymentRule, ProfitOptimalMechanism, run_mechanism, threshold_payment, turning_points_from_levels,
)
from src.mechanism.verification import (
    bid_grid, estimate_expected_profit, estimate_interim, utility, verify_ir, verify_truthfulness,
)
from src.model.service import load_model, replace_costs
from src.valuation.models import FeatureSet
from tests.conftest import LAW_PROFITS, single_agent_document, synthetic_features


def test_objective_of_reference_laws(brute_identity, brute_uniform, laws):
    assert [brute_identity.objective([10, 15], law) for law in laws] == LAW_PROFITS
    assert brute_uniform.objective([10, 15], laws[3]) == 40


@pytest.mark.parametrize("bids", [[10, 15], [0, 0], [30, 30]])
def test_backends_choose_the_same_law(duo_identity, duo_features, brute_identity, bids):
    expected = brute_identity.allocate(bids)
    chosen = ProfitOptimalMechanism(duo_identity, duo_features, ILP).allocate(bids)
    assert chosen.law == expected.law
    assert chosen.objective == pytest.approx(expected.objective)
    assert chosen.valuation == expected.valuation


def test_dominant_law_beats_every_reference_law(brute_identity):
    assert brute_identity.allocate([10, 15]).objective >= max(LAW_PROFITS)


def test_shared_table_prices_with_the_mechanisms_priors(duo_identity, brute_uniform, brute_identity):
    assert brute_identity.table is brute_uniform.table
    law, objective = allocation_oracle(brute_identity, [10, 15])
    allocation = brute_identity.allocate([10, 15])
    assert allocation.law == law
    assert allocation.objective == pytest.approx(objective)
    uniform = allocate_brute(brute_uniform.table, [10, 15])
    identity = allocate_brute(brute_uniform.table, [10, 15], structure=duo_identity)
    assert uniform.objective == pytest.approx(brute_uniform.allocate([10, 15]).objective)
    assert identity.objective == pytest.approx(objective)
    assert identity.objective > uniform.objective


def test_table_of_another_game_is_rejected(duo, brute_uniform):
    with pytest.raises(InputError, match="law table"):
        ProfitOptimalMechanism(duo, FeatureSet(), BRUTE, table=brute_uniform.table)


def test_allocation_matches_the_enumeration_oracle(brute_uniform):
    law, objective = allocation_oracle(brute_uniform, [12, 7])
    allocation = brute_uniform.allocate([12, 7])
    assert allocation.law == law
    assert allocation.objective == pytest.approx(objective)


def test_fixed_allocation_ignores_the_agents_own_bid(brute_uniform):
    chosen = {brute_uniform.allocate_fixed([bid, 15], 1, 1).law for bid in (0, 5, 50)}
    assert len(chosen) == 1
    assert chosen.pop().size(1) == 1


def test_impossible_fixed_count(brute_uniform):
    with pytest.raises(InfeasibleAllocationError):
        brute_uniform.allocate_fixed([10, 15], 1, 5)
    with pytest.raises(InputError):
        allocation_oracle(brute_uniform, [10, 15], (1, 5))


def test_level_values_are_linear_in_the_bid(brute_uniform):
    bids = [10, 15]
    levels = brute_uniform.level_values(bids, 1, 4)
    prior = brute_uniform.structure.cost_models[1]
    for count, value in levels.items():
        law = brute_uniform.allocate_fixed(bids, 1, count).law
        for t in (0.0, 7.5, 22.0):
            expected = value - count * prior.virtual_cost(t)
            assert brute_uniform.objective([t, 15], law) == pytest.approx(expected)


def test_turning_points_from_levels():
    identity = lambda y: y
    assert turning_points_from_levels({0: 70, 1: 90, 2: 100}, 2, 5, identity) == [(10, 1), (20, 0)]
    assert turning_points_from_levels({0: 0, 1: 10, 2: 20}, 2, 0, identity) == [(10, 0)]
    assert turning_points_from_levels({0: 70, 1: None, 2: 100}, 2, 0, identity) == [(15, 0)]
    assert turning_points_from_levels({0: 70}, 0, 3, identity) == []


def test_thresholds_within_tolerance_are_clamped():
    points = turning_points_from_levels({0: 70, 1: 90}, 1, 20 + 1e-12, lambda y: y)
    assert points == [(20 + 1e-12, 0)]


def test_threshold_below_the_bid_is_inconsistent():
    with pytest.raises(ConsistencyError):
        turning_points_from_levels({0: 70, 1: 90, 2: 100}, 2, 15, lambda y: y)
    with pytest.raises(ConsistencyError):
        turning_points_from_levels({0: None, 1: 90}, 1, 0, lambda y: y)


def test_threshold_payment():
    assert threshold_payment(2, [(10, 1), (20, 0)]) == 30
    assert threshold_payment(0, []) == 0


@pytest.mark.parametrize("backend", [BRUTE, ILP])
def test_synthetic_turning_points_and_payment(synthetic, backend):
    mechanism = ProfitOptimalMechanism(*synthetic, backend)
    assert mechanism.level_values([5], 1, 2) == {0: 70, 1: 90, 2: 100}
    sequence = mechanism.turning_points([5], 1)
    assert sequence.initial_count == 2
    assert sequence.as_pairs() == [(10, 1), (20, 0)]
    assert mechanism.payment([5], 1) == pytest.approx(30)
    assert payment_oracle(mechanism, [5], 1) == pytest.approx(30, abs=1e-6)


def test_synthetic_report(synthetic):
    report = run_mechanism(*synthetic, [5], backend=BRUTE, with_turning_points=True)
    assert report.restricted_counts == {"1": 2}
    assert report.payments == {"1": pytest.approx(30)}
    assert report.valuation == 100
    assert report.virtual_objective == 90
    assert report.profit == pytest.approx(70)
    assert report.turning_points["1"].as_pairs() == [(10, 1), (20, 0)]
    assert {(row.agent, row.state) for row in report.law.restrict} == {(1, "s")}


def test_oracle_rejects_a_short_horizon(synthetic):
    mechanism = ProfitOptimalMechanism(*synthetic, BRUTE)
    with pytest.raises(InputError, match="larger bound"):
        payment_oracle(mechanism, [5], 1, t_max=15)
    with pytest.raises(InputError):
        payment_oracle(mechanism, [5], 1, step=0)


def test_payment_matches_the_oracle(brute_uniform):
    rng = random.Random(3)
    for _ in range(10):
        bids = [rng.randint(0, 30), rng.randint(0, 30)]
        for agent in (1, 2):
            assert brute_uniform.payment(bids, agent) == pytest.approx(
                payment_oracle(brute_uniform, bids, agent), abs=1e-6
            )


def test_unrestricted_agents_are_not_paid(brute_uniform):
    report = brute_uniform.run([30, 30])
    for agent, count in report.restricted_counts.items():
        if count == 0:
            assert report.payments[agent] == 0


@pytest.mark.parametrize("agent", [1, 2])
def test_restriction_count_is_monotone(brute_uniform, agent):
    counts = []
    for t in np.linspace(0, 60, 201):
        bids = [15.0, 15.0]
        bids[agent - 1] = float(t)
        counts.append(brute_uniform.restricted_count(bids, agent))
    assert all(later <= earlier for earlier, later in zip(counts, counts[1:]))
    assert counts[-1] == 0


@pytest.mark.parametrize("true_cost", [0.0, 4.0, 10.0, 17.5, 29.0])
def test_truthful_bidding_is_optimal(brute_uniform, true_cost):
    grid = bid_grid(30, 101)
    for agent in (1, 2):
        verdict = verify_truthfulness(brute_uniform, agent, true_cost, [10, 15], grid)
        assert verdict.holds, verdict
        assert verify_ir(brute_uniform, agent, true_cost, [10, 15]).holds


def test_pay_your_bid_invites_overbidding(synthetic):
    mechanism = ProfitOptimalMechanism(*synthetic, BRUTE)
    grid = bid_grid(30, 101)
    assert verify_truthfulness(mechanism, 1, 5, [5], grid).holds
    verdict = verify_truthfulness(mechanism, 1, 5, [5], grid, PaymentRule.PAY_YOUR_BID)
    assert not verdict.holds
    assert verdict.best_bid > 5
    assert verdict.worst_violation > 0


def test_truthful_utility(synthetic):
    mechanism = ProfitOptimalMechanism(*synthetic, BRUTE)
    assert utility(mechanism, [5], 1, 5) == pytest.approx(20)
    assert utility(mechanism, [5], 1, 5, PaymentRule.PAY_YOUR_BID) == pytest.approx(0)


def test_bid_grid_needs_two_points():
    assert list(bid_grid(10, 3)) == [0, 5, 10]
    with pytest.raises(InputError):
        bid_grid(10, 1)


def test_interim_estimate_with_a_degenerate_opponent(duo, duo_features, brute_uniform):
    structure = replace_costs(duo, {1: Uniform(hi=30), 2: IdentityVirtual(point=15)})
    mechanism = ProfitOptimalMechanism(structure, duo_features, BRUTE, table=brute_uniform.table)
    estimate = estimate_interim(mechanism, 1, 10, samples=5, seed=1)
    count = mechanism.restricted_count([10, 15], 1)
    assert estimate.restrictions == count
    assert estimate.restrictions_se == 0
    expected_payment = mechanism.payment([10, 15], 1) if count else 0.0
    assert estimate.payment == pytest.approx(expected_payment)
    assert estimate.utility == pytest.approx(expected_payment - 10 * count)
    assert estimate.utility >= 0


def test_interim_restrictions_fall_with_the_cost(brute_uniform):
    estimates = [estimate_interim(brute_uniform, 1, cost, samples=20, seed=5) for cost in (0.0, 7.5, 15.0, 22.5, 30.0)]
    for earlier, later in zip(estimates, estimates[1:]):
        assert later.restrictions <= earlier.restrictions + 3 * max(earlier.restrictions_se, later.restrictions_se)
    for estimate in estimates:
        assert estimate.utility >= -1e-9


def test_interim_utility_vanishes_at_the_top_of_the_support():
    structure = load_model(single_agent_document({"dist": "uniform", "lo": 0, "hi": 30}))
    mechanism = ProfitOptimalMechanism(structure, synthetic_features(), BRUTE)
    top = estimate_interim(mechanism, 1, 30.0, samples=10, seed=2)
    assert top.restrictions == 0
    assert top.utility == pytest.approx(0, abs=1e-9)
    assert estimate_interim(mechanism, 1, 2.0, samples=10, seed=2).utility > 0


def test_shifted_uniform_prior():
    structure = load_model(single_agent_document({"dist": "uniform", "lo": 5, "hi": 40}))
    mechanism = ProfitOptimalMechanism(structure, synthetic_features(), BRUTE)
    assert mechanism.level_values([5], 1, 2) == {0: 70, 1: 90, 2: 100}
    assert mechanism.turning_points([5], 1).as_pairs() == [(7.5, 1), (12.5, 0)]
    assert mechanism.payment([5], 1) == pytest.approx(20)
    assert payment_oracle(mechanism, [5], 1) == pytest.approx(20, abs=1e-6)
    with pytest.raises(DistributionDomainError):
        mechanism.allocate([3])


def test_expected_profit_beats_the_empty_law(brute_uniform):
    estimate = estimate_expected_profit(brute_uniform, samples=30, seed=4)
    assert estimate.samples == 30
    assert estimate.profit >= 32 - 3 * estimate.profit_se
    assert estimate.profit <= brute_uniform.feature_set.total_value == 114


def test_estimates_need_a_sample(synthetic):
    mechanism = ProfitOptimalMechanism(*synthetic, BRUTE)
    with pytest.raises(InputError, match="sample"):
        estimate_interim(mechanism, 1, 5, samples=0)
    with pytest.raises(InputError, match="sample"):
        estimate_expected_profit(mechanism, samples=0)


def test_estimates_are_reproducible(synthetic):
    mechanism = ProfitOptimalMechanism(*synthetic, BRUTE)
    first = estimate_expected_profit(mechanism, samples=4, seed=9)
    second = estimate_expected_profit(mechanism, samples=4, seed=9)
    assert first == second


def test_empty_feature_set_selects_the_empty_law(duo):
    report = run_mechanism(duo, FeatureSet(), [10, 15])
    assert report.law.restrict == []
    assert report.valuation == 0
    assert report.profit == 0
    assert report.payments == {"1": 0, "2": 0}
