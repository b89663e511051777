"""Closed-form game and set probabilities under constant serve-point win probabilities.

Model: player A wins any point served by A with probability ``p_a`` and
player B wins any point served by B with probability ``p_b``, both constant.
Games are scored to 4 points win-by-2, sets to 6 games win-by-2 with a
tiebreak at 6-6 (counted as one game, so a 7-6 set totals 13 games), and
service alternates game by game.

Probabilities are plain floats validated at the API boundary; score
distributions are keyed by ``(server_games, receiver_games)`` together with
an explicit first-server tag, never by player name alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

PLAYERS = ("A", "B")

# The 14 terminal set scores, keyed (first server's games, receiver's games).
TERMINAL_SCORES = (
    (6, 0), (6, 1), (6, 2), (6, 3), (6, 4), (7, 5), (7, 6),
    (0, 6), (1, 6), (2, 6), (3, 6), (4, 6), (5, 7), (6, 7),
)

SET_TOTALS = (6, 7, 8, 9, 10, 11, 12, 13)  # 11 is unreachable and carries 0


def other_player(tag: str) -> str:
    return "B" if tag == "A" else "A"


def next_first_server(first_server: str, set_games: int) -> str:
    """First server of the next set: an even-length set keeps the server, odd flips.

    A tiebreak counts as one game, so a 7-6 set has 13 games and flips.
    """
    return first_server if set_games % 2 == 0 else other_player(first_server)


def _check_player(tag: str) -> str:
    if tag not in PLAYERS:
        raise ValueError(f"player tag must be 'A' or 'B', got {tag!r}")
    return tag


def _check_prob(value: float, name: str, *, interior: bool = False) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    if interior and not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {value!r}")
    return value


@dataclass(frozen=True)
class ServeParams:
    """Serve-point win probabilities, the model's only free parameters."""

    p_a: float
    p_b: float

    def __post_init__(self):
        _check_prob(self.p_a, "p_a")
        _check_prob(self.p_b, "p_b")

    @property
    def interior(self) -> bool:
        return 0.0 < self.p_a < 1.0 and 0.0 < self.p_b < 1.0

    def require_interior(self) -> "ServeParams":
        if not self.interior:
            raise ValueError(
                f"serve probabilities must be strictly inside (0, 1) for "
                f"analytic operations, got ({self.p_a}, {self.p_b})"
            )
        return self


def game_win_prob(p: float) -> float:
    """Probability the server wins a game given point win probability p.

    Standard scoring: first to 4 points, win by two, with the deuce cycle
    summed as a geometric series. Continuous and strictly increasing on (0,1).
    """
    p = _check_prob(p, "p")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    return p ** 4 * (15.0 - 4.0 * p - 10.0 * p * p / (1.0 - 2.0 * p * (1.0 - p)))


@lru_cache(maxsize=4096)
def invert_game_win_prob(g: float) -> float:
    """Point win probability whose game win probability equals g (bisection)."""
    g = _check_prob(g, "g", interior=True)
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if game_win_prob(mid) < g:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class GameProbs:
    """Game hold probabilities for both players.

    ``params`` is retained when derived from serve-point probabilities; for
    raw hold probabilities the point parameters are recovered by inverting
    the game-win function (it is a strictly increasing bijection).
    """

    g_a: float
    g_b: float
    params: ServeParams | None = None

    def __post_init__(self):
        _check_prob(self.g_a, "g_a")
        _check_prob(self.g_b, "g_b")

    @classmethod
    def from_params(cls, params: ServeParams) -> "GameProbs":
        return cls(game_win_prob(params.p_a), game_win_prob(params.p_b), params)

    @property
    def interior(self) -> bool:
        return 0.0 < self.g_a < 1.0 and 0.0 < self.g_b < 1.0

    def require_interior(self) -> "GameProbs":
        if not self.interior:
            raise ValueError(
                f"hold probabilities must be strictly inside (0, 1), "
                f"got ({self.g_a}, {self.g_b})"
            )
        return self

    def point_params(self) -> ServeParams:
        if self.params is not None:
            return self.params
        self.require_interior()
        return ServeParams(invert_game_win_prob(self.g_a), invert_game_win_prob(self.g_b))


def _tiebreak_server_is_first(point_index: int) -> bool:
    """Whether the tiebreak's opening server serves the given 0-indexed point.

    Rotation: one point by the opener, then two points each, alternating.
    """
    if point_index == 0:
        return True
    return ((point_index - 1) // 2) % 2 == 1


def tiebreak_win_prob(params: ServeParams, first_server: str) -> float:
    """Probability the named player wins a tiebreak they serve first.

    First to 7 points win by two. From 6-6 every two-point exchange has one
    point on each racquet, so the remainder collapses to the geometric
    closed form p1*(1-p2) / (p1*(1-p2) + (1-p1)*p2).
    """
    _check_player(first_server)
    if first_server == "A":
        return _tiebreak_first_server_wins(params.p_a, params.p_b)
    return _tiebreak_first_server_wins(params.p_b, params.p_a)


def _tiebreak_first_server_wins(p1: float, p2: float) -> float:
    @lru_cache(maxsize=None)
    def rec(a: int, b: int) -> float:
        if a >= 7 and a - b >= 2:
            return 1.0
        if b >= 7 and b - a >= 2:
            return 0.0
        if a == 6 and b == 6:
            num = p1 * (1.0 - p2)
            den = num + (1.0 - p1) * p2
            return 0.5 if den == 0.0 else num / den
        p = p1 if _tiebreak_server_is_first(a + b) else 1.0 - p2
        return p * rec(a + 1, b) + (1.0 - p) * rec(a, b + 1)

    return rec(0, 0)


# Terminal-score polynomials in (x1, x2, y1, y2) = (hold of the set's first
# server, its complement, hold of the other player, its complement). Each
# term counts the orderings of held and broken games consistent with the
# score, with the set's final game won by the set winner.
def _s60(x1, y2):
    return (x1 * y2) ** 3


def _s61(x1, x2, y1, y2):
    return 3 * x1 ** 3 * x2 * y2 ** 3 + 3 * x1 ** 4 * y1 * y2 ** 2


def _s62(x1, x2, y1, y2):
    return (12 * x1 ** 3 * x2 * y1 * y2 ** 3 + 6 * x1 ** 2 * x2 ** 2 * y2 ** 4
            + 3 * x1 ** 4 * y1 ** 2 * y2 ** 2)


def _s63(x1, x2, y1, y2):
    return (24 * x1 ** 3 * x2 ** 2 * y1 * y2 ** 3 + 24 * x1 ** 4 * x2 * y1 ** 2 * y2 ** 2
            + 4 * x1 ** 2 * x2 ** 3 * y2 ** 4 + 4 * x1 ** 5 * y1 ** 3 * y2)


def _s64(x1, x2, y1, y2):
    return (60 * x1 ** 3 * x2 ** 2 * y1 ** 2 * y2 ** 3 + 40 * x1 ** 2 * x2 ** 3 * y1 * y2 ** 4
            + 20 * x1 ** 4 * x2 * y1 ** 3 * y2 ** 2 + 5 * x1 * x2 ** 4 * y2 ** 5
            + x1 ** 5 * y1 ** 4 * y2)


def _s75(x1, x2, y1, y2):
    return (100 * x1 ** 3 * x2 ** 3 * y1 ** 2 * y2 ** 4 + 100 * x1 ** 4 * x2 ** 2 * y1 ** 3 * y2 ** 3
            + 25 * x1 ** 2 * x2 ** 4 * y1 * y2 ** 5 + 25 * x1 ** 5 * x2 * y1 ** 4 * y2 ** 2
            + x1 * x2 ** 5 * y2 ** 6 + x1 ** 6 * y1 ** 5 * y2)


_POLYS = ((6, 1, _s61), (6, 2, _s62), (6, 3, _s63), (6, 4, _s64), (7, 5, _s75))


@dataclass(frozen=True)
class SetScoreDistribution:
    """Exact probabilities of the 14 terminal set scores for one first server.

    Keys are ``(server_games, receiver_games)`` where "server" is the set's
    first server.
    """

    first_server: str
    probs: dict[tuple[int, int], float]

    def __post_init__(self):
        _check_player(self.first_server)
        if set(self.probs) != set(TERMINAL_SCORES):
            raise ValueError("distribution must cover exactly the 14 terminal scores")
        total = sum(self.probs.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        if any(p < 0.0 for p in self.probs.values()):
            raise ValueError("negative probability in set score distribution")

    def prob(self, server_games: int, receiver_games: int) -> float:
        return self.probs[(server_games, receiver_games)]

    def games_for(self, player: str, score: tuple[int, int]) -> int:
        """Games won by the named player at the given (server, receiver) score."""
        server_games, receiver_games = score
        return server_games if player == self.first_server else receiver_games

    def win_prob(self, player: str) -> float:
        """Probability the named player wins the set."""
        _check_player(player)
        won_by_server = player == self.first_server
        return sum(p for (s, r), p in self.probs.items() if (s > r) == won_by_server)


def set_score_distribution(g: GameProbs, first_server: str) -> SetScoreDistribution:
    """Exact terminal set-score distribution given the set's first server.

    The twelve non-tiebreak scores are closed-form polynomials in the two
    hold probabilities; the 6-6 mass is their complement and is split into
    7-6 / 6-7 by the tiebreak win probability of the set's first server
    (after twelve games the alternation hands the tiebreak's opening serve
    back to the set's first server).
    """
    _check_player(first_server)
    g.require_interior()
    g_first = g.g_a if first_server == "A" else g.g_b
    g_other = g.g_b if first_server == "A" else g.g_a
    x1, x2 = g_first, 1.0 - g_first
    y1, y2 = g_other, 1.0 - g_other

    probs: dict[tuple[int, int], float] = {}
    probs[(6, 0)] = _s60(x1, y2)
    probs[(0, 6)] = _s60(x2, y1)
    for n, m, poly in _POLYS:
        probs[(n, m)] = poly(x1, x2, y1, y2)
        probs[(m, n)] = poly(x2, x1, y2, y1)

    reach_tiebreak = 1.0 - sum(probs.values())
    params = g.point_params()
    t_first = tiebreak_win_prob(params, first_server)
    probs[(7, 6)] = reach_tiebreak * t_first
    probs[(6, 7)] = reach_tiebreak * (1.0 - t_first)
    return SetScoreDistribution(first_server, probs)


@dataclass(frozen=True)
class SetSummary:
    """Set-level aggregates: win probability, length distribution, expectations."""

    first_server: str
    p_set_a: float
    pi: dict[int, float]
    t_set: float
    h_set: float


def set_summary(dist: SetScoreDistribution) -> SetSummary:
    """Aggregate a set-score distribution by winner, total games and margin.

    ``t_set`` is the expected number of games, ``h_set`` the expected
    (A games - B games) margin, both conditional on the first server.
    """
    pi = {n: 0.0 for n in SET_TOTALS}
    t_set = 0.0
    h_set = 0.0
    for score, p in dist.probs.items():
        n = score[0] + score[1]
        pi[n] += p
        t_set += n * p
        h_set += (dist.games_for("A", score) - dist.games_for("B", score)) * p
    return SetSummary(dist.first_server, dist.win_prob("A"), pi, t_set, h_set)
