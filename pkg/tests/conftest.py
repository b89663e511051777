"""Shared test oracles, independent of the library's computation paths."""

import math
from functools import lru_cache

from serveorder import (
    MatchRecord,
    ParsedSet,
    SET_TOTALS,
    ServeLine,
    TERMINAL_SCORES,
    match_distribution,
    over_line_prob,
    set_score_distribution,
    set_summary,
)


def game_win_oracle(p: float) -> float:
    """Game win probability from a state DP over point scores.

    States are 0-3 points each side; deuce resolves to the geometric
    closed form p^2 / (p^2 + (1-p)^2).
    """

    @lru_cache(maxsize=None)
    def win(a: int, b: int) -> float:
        if a == 3 and b == 3:
            return p * p / (p * p + (1.0 - p) * (1.0 - p))
        if a == 4:
            return 1.0
        if b == 4:
            return 0.0
        return p * win(a + 1, b) + (1.0 - p) * win(a, b + 1)

    return win(0, 0)


def enumerate_set_distribution(g_first: float, g_other: float,
                               tiebreak_first: float) -> dict:
    """Brute-force terminal-score distribution by walking every legal
    game-by-game set trajectory with an alternating server.

    Keys are (first server's games, other player's games); the 6-6 state
    splits into 7-6 / 6-7 with the supplied tiebreak probability.
    """
    out: dict[tuple[int, int], float] = {}

    def walk(a: int, b: int, first_serves: bool, prob: float):
        if (a >= 6 or b >= 6) and abs(a - b) >= 2:
            out[(a, b)] = out.get((a, b), 0.0) + prob
            return
        if (a, b) in ((7, 5), (5, 7)):
            out[(a, b)] = out.get((a, b), 0.0) + prob
            return
        if (a, b) == (6, 6):
            out[(7, 6)] = out.get((7, 6), 0.0) + prob * tiebreak_first
            out[(6, 7)] = out.get((6, 7), 0.0) + prob * (1.0 - tiebreak_first)
            return
        hold = g_first if first_serves else g_other
        if first_serves:
            walk(a + 1, b, False, prob * hold)
            walk(a, b + 1, False, prob * (1.0 - hold))
        else:
            walk(a, b + 1, True, prob * hold)
            walk(a + 1, b, True, prob * (1.0 - hold))

    walk(0, 0, True, 1.0)
    return out


def tally_z_scores(result, g, first_server: str) -> list[tuple[str, float]]:
    """z-scores of every tallied quantity against its exact value."""
    dist = match_distribution(g, first_server)
    set_dist = set_score_distribution(g, first_server)
    summary = set_summary(set_dist)
    n = result.n
    z_list = []

    def z_freq(label, simulated, exact):
        se = math.sqrt(exact * (1.0 - exact) / n)
        if se == 0.0:
            z = 0.0 if simulated == exact else float("inf")
        else:
            z = (simulated - exact) / se
        z_list.append((label, z))

    for score in TERMINAL_SCORES:
        z_freq(f"set1 {score}", result.set1_score_freq(score)[0],
               set_dist.prob(*score))
    for games in SET_TOTALS:
        z_freq(f"pi_{games}", result.set1_total_freq(games)[0],
               summary.pi[games])
    for line in (18.5, 19.5, 20.5, 21.5, 22.5):
        z_freq(f"over {line}", result.over_line_freq(line)[0],
               over_line_prob(dist, line))
    z_freq("P(A wins)", result.winner_freq("A")[0], dist.win_prob("A"))

    for label, (mean, se), exact in (
            ("E[T]", result.total_games_mean(), dist.expected_total()),
            ("E[H]", result.margin_mean(), dist.expected_margin()),
            ("E[N]", result.sets_played_mean(), dist.expected_sets()),
            ("E[N_A]", result.sets_started_by_a_mean(),
             dist.expected_sets_started_by_a())):
        z_list.append((label, (mean - exact) / se))
    return z_list


def score_string(sets) -> str:
    return " ".join(
        f"{s.winner_games}-{s.loser_games}" + ("(4)" if s.tiebreak else "")
        for s in sets)


def record_from_outcome(outcome, tour: str = "ATP",
                        match_id: str = "sim") -> MatchRecord:
    """Synthesize a pipeline record from one simulated match.

    Break-point counts are idealized (faced = converted against, none
    saved) and include tiebreaks as a break of the set's first server, so
    the service-game accounting is exact.
    """
    winner = outcome.winner
    loser = "B" if winner == "A" else "A"
    sets = []
    for set_first, score in outcome.set_scores:
        a_games = score.server_games if set_first == "A" else score.receiver_games
        b_games = score.receiver_games if set_first == "A" else score.server_games
        wg = a_games if winner == "A" else b_games
        lg = b_games if winner == "A" else a_games
        sets.append(ParsedSet(wg, lg, score.total == 13))

    breaks_by = {"A": outcome.breaks_a, "B": outcome.breaks_b}
    points = {"A": outcome.serve_points_a, "B": outcome.serve_points_b}
    points_won = {"A": outcome.serve_points_won_a, "B": outcome.serve_points_won_b}

    def line(player, opponent):
        return ServeLine(
            serve_points=points[player],
            first_in=points[player],
            first_won=points_won[player],
            second_won=0,
            bp_saved=0,
            bp_faced=breaks_by[opponent],
        )

    return MatchRecord(
        tour=tour,
        match_id=match_id,
        score=score_string(sets),
        best_of=3,
        winner_serve=line(winner, loser),
        loser_serve=line(loser, winner),
        sets=tuple(sets),
    )
