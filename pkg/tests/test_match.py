"""Match-level enumeration, transition algebra and betting-line probabilities."""

import math
import random

import pytest

from serveorder import (
    GameProbs,
    ServeParams,
    SetScore,
    match_distribution,
    match_expectations,
    match_win_prob,
    over_line_prob,
    set_score_distribution,
    set_summary,
    shift_approx_error,
    transition_quantities,
)


def _transition(g: GameProbs):
    return transition_quantities(set_score_distribution(g, "A"),
                                 set_score_distribution(g, "B"))


class TestSetScoreType:
    def test_accepts_terminal_scores(self):
        assert SetScore(7, 6).total == 13
        assert SetScore(6, 4).server_won
        assert not SetScore(5, 7).server_won

    def test_rejects_non_terminal(self):
        with pytest.raises(ValueError):
            SetScore(6, 5)
        with pytest.raises(ValueError):
            SetScore(8, 6)


class TestTransitionQuantities:
    def test_symmetric_holds_split_marginals(self):
        tq = _transition(GameProbs(0.7, 0.7))
        assert math.isclose(tq.alpha_e + tq.alpha_o, 0.5, abs_tol=1e-12)
        assert math.isclose(tq.p_set, 0.5, abs_tol=1e-12)

    def test_marginals_match_set_win_probability(self):
        rng = random.Random(3)
        for _ in range(100):
            g = GameProbs(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
            tq = _transition(g)
            assert abs(tq.alpha_e + tq.alpha_o - (tq.gamma_e + tq.gamma_o)) < 1e-12
            assert abs(tq.beta_e + tq.beta_o - (tq.delta_e + tq.delta_o)) < 1e-12
            assert abs((tq.alpha_e + tq.alpha_o) + (tq.beta_e + tq.beta_o) - 1.0) < 1e-12

    def test_difference_identities(self):
        rng = random.Random(4)
        for _ in range(100):
            g = GameProbs(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
            tq = _transition(g)
            assert abs((tq.q_a - tq.q_b) - (tq.x + tq.y)) < 1e-12
            assert abs((tq.rho_a - tq.rho_b) - 2 * tq.x * tq.y) < 1e-12
            assert abs((tq.m_a - tq.m_b) - (1 + tq.x + tq.y + 2 * tq.x * tq.y)) < 1e-12
            assert tq.m_a - tq.m_b > 0.0

    def test_mismatched_distributions_rejected(self):
        dist_a = set_score_distribution(GameProbs(0.8, 0.7), "A")
        dist_b = set_score_distribution(GameProbs(0.6, 0.55), "B")
        with pytest.raises(ValueError):
            transition_quantities(dist_a, dist_b)
        with pytest.raises(ValueError):
            transition_quantities(dist_a, dist_a)


class TestMatchDistribution:
    def test_structure(self):
        g = GameProbs.from_params(ServeParams(0.68, 0.62))
        for server in ("A", "B"):
            dist = match_distribution(g, server)
            assert math.isclose(sum(dist.outcomes.values()), 1.0, abs_tol=1e-12)
            for key in dist.outcomes:
                assert 12 <= key.total_games <= 39
                assert key.sets_played in (2, 3)
                assert 0 <= key.sets_started_by_a <= key.sets_played
                assert key.winner in ("A", "B")

    def test_expected_sets_independent_of_first_server(self):
        rng = random.Random(8)
        for _ in range(25):
            g = GameProbs(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
            dist_a = match_distribution(g, "A")
            dist_b = match_distribution(g, "B")
            assert abs(dist_a.expected_sets() - dist_b.expected_sets()) < 1e-12

    def test_totals_decomposition(self):
        # E(T | first server) splits into set-length terms weighted by
        # expected sets and expected sets started by A
        rng = random.Random(9)
        for _ in range(25):
            g = GameProbs(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
            sum_a = set_summary(set_score_distribution(g, "A"))
            sum_b = set_summary(set_score_distribution(g, "B"))
            for server in ("A", "B"):
                dist = match_distribution(g, server)
                expected = (sum_b.t_set * dist.expected_sets()
                            + (sum_a.t_set - sum_b.t_set)
                            * dist.expected_sets_started_by_a())
                assert abs(dist.expected_total() - expected) < 1e-12

    def test_margin_decomposition(self):
        rng = random.Random(10)
        for _ in range(25):
            g = GameProbs(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
            sum_a = set_summary(set_score_distribution(g, "A"))
            sum_b = set_summary(set_score_distribution(g, "B"))
            tq = _transition(g)
            exp = match_expectations(g)
            lhs = exp.h_match_a - exp.h_match_b
            rhs = (sum_a.h_set - sum_b.h_set) * (tq.m_a - tq.m_b)
            assert abs(lhs - rhs) < 1e-12

    def test_sets_started_by_a_matches_transition_expectation(self):
        g = GameProbs.from_params(ServeParams(0.7, 0.6))
        tq = _transition(g)
        assert abs(match_distribution(g, "A").expected_sets_started_by_a()
                   - tq.m_a) < 1e-12
        assert abs(match_distribution(g, "B").expected_sets_started_by_a()
                   - tq.m_b) < 1e-12


class TestMatchExpectations:
    def test_symmetric_parameters(self):
        # totals do not depend on the opener for equal players; margins are
        # antisymmetric in the opener and still favour whoever serves first
        exp = match_expectations(GameProbs(0.72, 0.72))
        assert math.isclose(exp.t_match_a, exp.t_match_b, abs_tol=1e-12)
        assert math.isclose(exp.h_match_a, -exp.h_match_b, abs_tol=1e-12)
        assert exp.h_match_a > 0.0

    def test_stronger_server_first_shortens(self):
        exp = match_expectations(GameProbs.from_params(ServeParams(0.7, 0.6)))
        assert exp.t_match_a < exp.t_match_b
        assert exp.h_match_a > exp.h_match_b


class TestOverLine:
    def test_support_bounds(self):
        dist = match_distribution(GameProbs.from_params(ServeParams(0.65, 0.6)), "A")
        assert math.isclose(over_line_prob(dist, 11.5), 1.0, abs_tol=1e-12)
        assert over_line_prob(dist, 39.5) == 0.0

    def test_rejects_non_half_integer(self):
        dist = match_distribution(GameProbs.from_params(ServeParams(0.65, 0.6)), "A")
        with pytest.raises(ValueError):
            over_line_prob(dist, 19.0)
        with pytest.raises(ValueError):
            over_line_prob(dist, 19.25)

    def test_headline_shift_at_seven_six(self):
        g = GameProbs.from_params(ServeParams(0.70, 0.60))
        diff = (over_line_prob(match_distribution(g, "A"), 19.5)
                - over_line_prob(match_distribution(g, "B"), 19.5))
        assert diff < 0.0  # stronger server opening shortens the match
        assert 0.08 <= abs(diff) <= 0.10


class TestMatchWinProb:
    def test_symmetric(self):
        assert math.isclose(match_win_prob(GameProbs(0.66, 0.66)), 0.5,
                            abs_tol=1e-12)

    def test_equals_winner_marginal_for_both_servers(self):
        rng = random.Random(12)
        for _ in range(25):
            g = GameProbs(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95))
            closed = match_win_prob(g)
            assert abs(closed - match_distribution(g, "A").win_prob("A")) < 1e-12
            assert abs(closed - match_distribution(g, "B").win_prob("A")) < 1e-12


class TestShiftApprox:
    def test_zero_at_reference_point(self):
        assert shift_approx_error(ServeParams(0.6, 0.6)) == 0.0

    def test_small_error_at_moderate_shift(self):
        assert shift_approx_error(ServeParams(0.65, 0.55)) < 0.02

    def test_off_reference_symmetric_point_reported(self):
        err = shift_approx_error(ServeParams(0.55, 0.55))
        assert 0.0 <= err < 0.01

    def test_rejects_shift_outside_unit_interval(self):
        with pytest.raises(ValueError):
            shift_approx_error(ServeParams(0.99, 0.01))
