"""Exact best-of-three match distributions and expectations by first server.

Everything here is driven by the set-score distributions: the first server
of set j+1 is determined by the parity of set j's length (a 7-6 set counts
13 games), so the joint law of (winner, total games, margin, sets played,
sets started by A) conditional on the opening server follows from exhaustive
enumeration over per-set terminal scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .analytic import (
    GameProbs,
    ServeParams,
    SetScoreDistribution,
    TERMINAL_SCORES,
    _check_player,
    next_first_server,
    set_score_distribution,
    set_summary,
)

MIN_MATCH_GAMES = 12
MAX_MATCH_GAMES = 39

_EVEN_TOTALS = frozenset((6, 8, 10, 12))


@dataclass(frozen=True)
class SetScore:
    """One terminal set score keyed by the set's first server."""

    server_games: int
    receiver_games: int

    def __post_init__(self):
        if (self.server_games, self.receiver_games) not in TERMINAL_SCORES:
            raise ValueError(
                f"({self.server_games}, {self.receiver_games}) is not a terminal set score"
            )

    @property
    def total(self) -> int:
        return self.server_games + self.receiver_games

    @property
    def server_won(self) -> bool:
        return self.server_games > self.receiver_games


class MatchKey(NamedTuple):
    """Aggregation key for match outcomes."""

    winner: str
    total_games: int
    margin: int
    sets_played: int
    sets_started_by_a: int


@dataclass(frozen=True)
class MatchOutcome:
    """A fully resolved best-of-three match.

    ``set_scores`` lists (set first server, SetScore) in playing order.
    Break counts and serve-point counts are simulation detail: a tiebreak is
    treated as one service game of the set's first server, so losing it
    counts as a break against that player.
    """

    first_server: str
    winner: str
    set_scores: tuple[tuple[str, SetScore], ...]
    total_games: int
    margin: int
    sets_played: int
    sets_started_by_a: int
    breaks_a: int = 0
    breaks_b: int = 0
    serve_points_a: int = 0
    serve_points_won_a: int = 0
    serve_points_b: int = 0
    serve_points_won_b: int = 0

    @property
    def key(self) -> MatchKey:
        return MatchKey(self.winner, self.total_games, self.margin,
                        self.sets_played, self.sets_started_by_a)


@dataclass(frozen=True)
class MatchOutcomeDistribution:
    """Exact joint distribution over MatchKey conditional on the first server."""

    first_server: str
    outcomes: dict[MatchKey, float]

    def __post_init__(self):
        _check_player(self.first_server)
        total = sum(self.outcomes.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"outcome probabilities sum to {total!r}, not 1")
        for key in self.outcomes:
            if not MIN_MATCH_GAMES <= key.total_games <= MAX_MATCH_GAMES:
                raise ValueError(f"impossible total games in {key}")
            if key.sets_played not in (2, 3) or not (
                    0 <= key.sets_started_by_a <= key.sets_played):
                raise ValueError(f"impossible set counts in {key}")

    def expected_total(self) -> float:
        return sum(k.total_games * p for k, p in self.outcomes.items())

    def expected_margin(self) -> float:
        return sum(k.margin * p for k, p in self.outcomes.items())

    def expected_sets(self) -> float:
        return sum(k.sets_played * p for k, p in self.outcomes.items())

    def expected_sets_started_by_a(self) -> float:
        return sum(k.sets_started_by_a * p for k, p in self.outcomes.items())

    def win_prob(self, player: str) -> float:
        _check_player(player)
        return sum(p for k, p in self.outcomes.items() if k.winner == player)


@dataclass(frozen=True)
class TransitionQuantities:
    """Winner-by-length-parity set probabilities and the derived serve-order terms.

    alpha/beta are A-win/B-win probabilities when A serves first; gamma/delta
    the same when B serves first; the _e/_o suffix is the set-length parity.
    q_a, q_b give P(set 2 starts with A | set 1 server), rho_a, rho_b give
    P(set 3 exists and starts with A | set 1 server).
    """

    alpha_e: float
    alpha_o: float
    beta_e: float
    beta_o: float
    gamma_e: float
    gamma_o: float
    delta_e: float
    delta_o: float
    p_set: float
    q_a: float
    q_b: float
    rho_a: float
    rho_b: float
    x: float
    y: float

    @property
    def m_a(self) -> float:
        """E(sets started by A | A serves set 1)."""
        return 1.0 + self.q_a + self.rho_a

    @property
    def m_b(self) -> float:
        """E(sets started by A | B serves set 1)."""
        return self.q_b + self.rho_b


def transition_quantities(dist_a: SetScoreDistribution,
                          dist_b: SetScoreDistribution) -> TransitionQuantities:
    """Parity aggregation of the two set distributions.

    ``dist_a`` and ``dist_b`` must come from the same hold probabilities with
    first servers A and B; the mirror identities between them are used as a
    cheap consistency guard against mismatched parameters.
    """
    if dist_a.first_server != "A" or dist_b.first_server != "B":
        raise ValueError("expected distributions with first servers A and B")
    if (abs(dist_a.prob(6, 0) - dist_b.prob(0, 6)) > 1e-9
            or abs(dist_a.prob(7, 5) - dist_b.prob(5, 7)) > 1e-9):
        raise ValueError("set distributions disagree; were they built from the same GameProbs?")

    alpha = {True: 0.0, False: 0.0}
    beta = {True: 0.0, False: 0.0}
    gamma = {True: 0.0, False: 0.0}
    delta = {True: 0.0, False: 0.0}
    for (s, r), p in dist_a.probs.items():
        even = (s + r) in _EVEN_TOTALS
        if s > r:
            alpha[even] += p
        else:
            beta[even] += p
    for (s, r), p in dist_b.probs.items():
        even = (s + r) in _EVEN_TOTALS
        if s > r:
            delta[even] += p
        else:
            gamma[even] += p

    alpha_e, alpha_o = alpha[True], alpha[False]
    beta_e, beta_o = beta[True], beta[False]
    gamma_e, gamma_o = gamma[True], gamma[False]
    delta_e, delta_o = delta[True], delta[False]
    x = alpha_e - gamma_o
    y = beta_e - delta_o
    return TransitionQuantities(
        alpha_e=alpha_e, alpha_o=alpha_o, beta_e=beta_e, beta_o=beta_o,
        gamma_e=gamma_e, gamma_o=gamma_o, delta_e=delta_e, delta_o=delta_o,
        p_set=alpha_e + alpha_o,
        q_a=alpha_e + beta_e,
        q_b=gamma_o + delta_o,
        rho_a=2 * alpha_e * beta_e + alpha_o * delta_o + beta_o * gamma_o,
        rho_b=gamma_e * delta_o + gamma_o * beta_e + delta_e * gamma_o + delta_o * alpha_e,
        x=x, y=y,
    )


def _set_distributions(g: GameProbs) -> dict[str, SetScoreDistribution]:
    return {"A": set_score_distribution(g, "A"), "B": set_score_distribution(g, "B")}


def match_distribution(g: GameProbs, first_server: str) -> MatchOutcomeDistribution:
    """Exhaustive enumeration of the best-of-three match given the opening server.

    Set 1 is drawn from the first server's distribution, set 2's server
    follows the parity rule, and a third set is played only on a 1-1 split.
    Path probabilities are products of per-set score probabilities.
    """
    _check_player(first_server)
    dists = _set_distributions(g)
    outcomes: dict[MatchKey, float] = {}

    def outcomes_for(server: str):
        d = dists[server]
        for (s, r), p in d.probs.items():
            a = s if server == "A" else r
            b = r if server == "A" else s
            yield a, b, p, next_first_server(server, s + r)

    for a1, b1, p1, srv2 in outcomes_for(first_server):
        started_a1 = (first_server == "A")
        for a2, b2, p2, srv3 in outcomes_for(srv2):
            started_a2 = started_a1 + (srv2 == "A")
            if (a1 > b1) == (a2 > b2):
                key = MatchKey(
                    winner="A" if a1 > b1 else "B",
                    total_games=a1 + b1 + a2 + b2,
                    margin=(a1 - b1) + (a2 - b2),
                    sets_played=2,
                    sets_started_by_a=started_a2,
                )
                outcomes[key] = outcomes.get(key, 0.0) + p1 * p2
            else:
                for a3, b3, p3, _ in outcomes_for(srv3):
                    key = MatchKey(
                        winner="A" if a3 > b3 else "B",
                        total_games=a1 + b1 + a2 + b2 + a3 + b3,
                        margin=(a1 - b1) + (a2 - b2) + (a3 - b3),
                        sets_played=3,
                        sets_started_by_a=started_a2 + (srv3 == "A"),
                    )
                    outcomes[key] = outcomes.get(key, 0.0) + p1 * p2 * p3

    return MatchOutcomeDistribution(first_server, outcomes)


class MatchExpectations(NamedTuple):
    t_match_a: float
    t_match_b: float
    h_match_a: float
    h_match_b: float


def match_expectations(g: GameProbs) -> MatchExpectations:
    """Expected total games and A-minus-B margin for both opening servers."""
    dist_a = match_distribution(g, "A")
    dist_b = match_distribution(g, "B")
    return MatchExpectations(
        t_match_a=dist_a.expected_total(),
        t_match_b=dist_b.expected_total(),
        h_match_a=dist_a.expected_margin(),
        h_match_b=dist_b.expected_margin(),
    )


def over_line_prob(dist: MatchOutcomeDistribution, line: float) -> float:
    """P(total games > line) for a half-integer betting line."""
    doubled = line * 2.0
    if doubled != int(doubled) or int(doubled) % 2 == 0:
        raise ValueError(f"line must be a half-integer, got {line!r}")
    return sum(p for k, p in dist.outcomes.items() if k.total_games > line)


def match_win_prob(g: GameProbs) -> float:
    """P(A wins the match); independent of who serves first.

    The set win probability p does not depend on the opening server, and set
    winners are independent given constant serve probabilities, so the match
    win probability is p^2 + 2 p^2 (1-p).
    """
    p = set_summary(set_score_distribution(g, "A")).p_set_a
    return p * p * (3.0 - 2.0 * p)


def shift_approx_error(params: ServeParams) -> float:
    """Absolute error of the equal-shift approximation of match win probability.

    Compares the exact win probability at (p_a, p_b) with the average of the
    exact values at (0.6 + d, 0.6) and (0.6, 0.6 - d) where d = p_a - p_b.
    Intended as a diagnostic for small |d|.
    """
    params.require_interior()
    d = params.p_a - params.p_b
    if not (0.0 < 0.6 + d < 1.0 and 0.0 < 0.6 - d < 1.0):
        raise ValueError(f"shift d = {d!r} moves the reference points out of (0, 1)")
    exact = match_win_prob(GameProbs.from_params(params))
    up = match_win_prob(GameProbs.from_params(ServeParams(0.6 + d, 0.6)))
    down = match_win_prob(GameProbs.from_params(ServeParams(0.6, 0.6 - d)))
    return abs(exact - 0.5 * (up + down))
