"""Point-level Monte Carlo simulation of best-of-three matches.

The simulator is an independent oracle for every analytic quantity: games
are played point by point (no closed-form shortcuts), tiebreaks follow the
official one-then-two serve rotation, and the next set's opening server is
taken from the continuing game-by-game alternation, which is asserted to
match the parity rule on every trajectory.

Randomness comes from SplitMix64 streams. The master generator seeded with
``seed`` emits one 64-bit sub-seed per partition, and partition ``i``
simulates its share of matches from a SplitMix64 stream over sub-seed ``i``.
Results are therefore bit-for-bit reproducible for a fixed partition count,
and partitions may run in parallel. A numba-compiled kernel provides the
fast path; a pure-Python twin with the identical draw order is used when
numba is unavailable and doubles as an equivalence check.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .analytic import ServeParams, _check_player, next_first_server, other_player
from .match import MatchKey, MatchOutcome, SetScore

try:
    from numba import njit, uint64

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

RNG_ALGORITHM = "splitmix64"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53

# flat tally layout: winner(2) x total-12(28) x margin+39(79) x sets-2(2) x N_A(4)
_KEY_CELLS = 2 * 28 * 79 * 2 * 4

# canonical order of the 14 terminal scores used by the set-1 tally
_SET1_SCORES = (
    (6, 0), (6, 1), (6, 2), (6, 3), (6, 4), (7, 5), (7, 6),
    (0, 6), (1, 6), (2, 6), (3, 6), (4, 6), (5, 7), (6, 7),
)


class SplitMix64:
    """Minimal SplitMix64 generator: 64-bit state, one mix per draw."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_uint64() >> 11) * _INV_2_53


def partition_seeds(seed: int, partitions: int) -> list[int]:
    """Derive one independent sub-seed per partition from the master seed."""
    master = SplitMix64(seed)
    return [master.next_uint64() for _ in range(partitions)]


def simulate_match(params: ServeParams, first_server: str, rng) -> MatchOutcome:
    """Simulate one best-of-three match point by point.

    ``rng`` only needs a ``random()`` method returning uniforms in [0, 1).
    The draw order (one uniform per point, in playing order) matches the
    compiled kernel exactly, so identical streams give identical matches.
    """
    _check_player(first_server)
    pa, pb = params.p_a, params.p_b

    sets_a = sets_b = 0
    total = margin = 0
    started_by_a = 0
    breaks = {"A": 0, "B": 0}
    serve_pts = {"A": 0, "B": 0}
    serve_won = {"A": 0, "B": 0}
    set_scores: list[tuple[str, SetScore]] = []
    server = first_server

    while sets_a < 2 and sets_b < 2:
        set_first = server
        if set_first == "A":
            started_by_a += 1
        a = b = 0
        while True:
            if (a >= 6 or b >= 6) and abs(a - b) >= 2:
                break
            if (a, b) in ((7, 5), (5, 7)):
                break
            if (a, b) == (6, 6):
                # game 13 is the tiebreak; alternation puts it on the set's
                # first server, and it counts as one game of theirs
                assert server == set_first
                winner = _simulate_tiebreak(pa, pb, set_first, rng, serve_pts, serve_won)
                if winner == "A":
                    a += 1
                else:
                    b += 1
                if winner != set_first:
                    breaks[winner] += 1
                server = other_player(server)
                break
            p = pa if server == "A" else pb
            won = lost = 0
            while True:
                serve_pts[server] += 1
                if rng.random() < p:
                    won += 1
                    serve_won[server] += 1
                else:
                    lost += 1
                if won >= 4 and won - lost >= 2:
                    held = True
                    break
                if lost >= 4 and lost - won >= 2:
                    held = False
                    break
            game_winner = server if held else other_player(server)
            if not held:
                breaks[game_winner] += 1
            if game_winner == "A":
                a += 1
            else:
                b += 1
            server = other_player(server)

        games = a + b
        total += games
        margin += a - b
        if a > b:
            sets_a += 1
        else:
            sets_b += 1
        if set_first == "A":
            set_scores.append((set_first, SetScore(a, b)))
        else:
            set_scores.append((set_first, SetScore(b, a)))
        assert server == next_first_server(set_first, games)

    return MatchOutcome(
        first_server=first_server,
        winner="A" if sets_a == 2 else "B",
        set_scores=tuple(set_scores),
        total_games=total,
        margin=margin,
        sets_played=len(set_scores),
        sets_started_by_a=started_by_a,
        breaks_a=breaks["A"],
        breaks_b=breaks["B"],
        serve_points_a=serve_pts["A"],
        serve_points_won_a=serve_won["A"],
        serve_points_b=serve_pts["B"],
        serve_points_won_b=serve_won["B"],
    )


def _simulate_tiebreak(pa, pb, first_server, rng, serve_pts, serve_won):
    a = b = 0
    second = other_player(first_server)
    while True:
        k = a + b
        if k == 0 or ((k - 1) // 2) % 2 == 1:
            srv = first_server
        else:
            srv = second
        p = pa if srv == "A" else pb
        serve_pts[srv] += 1
        if rng.random() < p:
            serve_won[srv] += 1
            point_winner = srv
        else:
            point_winner = other_player(srv)
        if point_winner == "A":
            a += 1
        else:
            b += 1
        if a >= 7 and a - b >= 2:
            return "A"
        if b >= 7 and b - a >= 2:
            return "B"


def _score_index(s: int, r: int) -> int:
    if s > r:
        return r if s == 6 else (5 if r == 5 else 6)
    return 7 + s if r == 6 else (12 if s == 5 else 13)


def _key_index(winner_a: int, total: int, margin: int, sets_played: int, started_a: int) -> int:
    return ((((winner_a * 28 + (total - 12)) * 79 + (margin + 39)) * 2
             + (sets_played - 2)) * 4 + started_a)


def _tally_partition_python(pa, pb, a_first, n_matches, seed):
    """Pure-Python partition tally; same draw order as the compiled kernel."""
    key_counts = np.zeros(_KEY_CELLS, np.int64)
    set1_counts = np.zeros(14, np.int64)
    rng = SplitMix64(seed)
    params = ServeParams(pa, pb)
    first = "A" if a_first else "B"
    for _ in range(n_matches):
        out = simulate_match(params, first, rng)
        winner_a = 1 if out.winner == "A" else 0
        key_counts[_key_index(winner_a, out.total_games, out.margin,
                              out.sets_played, out.sets_started_by_a)] += 1
        set1_counts[_score_index(out.set_scores[0][1].server_games,
                                 out.set_scores[0][1].receiver_games)] += 1
    return key_counts, set1_counts, 0


if HAVE_NUMBA:
    _NB_GOLDEN = np.uint64(_GOLDEN)
    _NB_MIX1 = np.uint64(_MIX1)
    _NB_MIX2 = np.uint64(_MIX2)

    @njit(cache=True, nogil=True)
    def _tally_partition_numba(pa, pb, a_first, n_matches, seed):  # pragma: no cover
        key_counts = np.zeros(_KEY_CELLS, np.int64)
        set1_counts = np.zeros(14, np.int64)
        parity_bad = 0
        state = uint64(seed)
        for _ in range(n_matches):
            sets_a = 0
            sets_b = 0
            total = 0
            margin = 0
            n_sets = 0
            started_a = 0
            srv = 0 if a_first else 1  # 0 = A serves the next game
            while sets_a < 2 and sets_b < 2:
                set_first = srv
                n_sets += 1
                if set_first == 0:
                    started_a += 1
                a = 0
                b = 0
                while True:
                    if (a >= 6 or b >= 6) and (a - b >= 2 or b - a >= 2):
                        break
                    if (a == 7 and b == 5) or (a == 5 and b == 7):
                        break
                    if a == 6 and b == 6:
                        if srv != set_first:
                            parity_bad += 1
                        ta = 0
                        tb = 0
                        while True:
                            k = ta + tb
                            if k == 0 or (((k - 1) // 2) % 2) == 1:
                                tsrv = set_first
                            else:
                                tsrv = 1 - set_first
                            p = pa if tsrv == 0 else pb
                            state = state + _NB_GOLDEN
                            z = state
                            z = (z ^ (z >> uint64(30))) * _NB_MIX1
                            z = (z ^ (z >> uint64(27))) * _NB_MIX2
                            z = z ^ (z >> uint64(31))
                            u = (z >> uint64(11)) * _INV_2_53
                            if (tsrv == 0) == (u < p):
                                ta += 1
                            else:
                                tb += 1
                            if ta >= 7 and ta - tb >= 2:
                                a += 1
                                break
                            if tb >= 7 and tb - ta >= 2:
                                b += 1
                                break
                        srv = 1 - srv
                        break
                    p = pa if srv == 0 else pb
                    won = 0
                    lost = 0
                    while True:
                        state = state + _NB_GOLDEN
                        z = state
                        z = (z ^ (z >> uint64(30))) * _NB_MIX1
                        z = (z ^ (z >> uint64(27))) * _NB_MIX2
                        z = z ^ (z >> uint64(31))
                        u = (z >> uint64(11)) * _INV_2_53
                        if u < p:
                            won += 1
                        else:
                            lost += 1
                        if won >= 4 and won - lost >= 2:
                            held = True
                            break
                        if lost >= 4 and lost - won >= 2:
                            held = False
                            break
                    if (srv == 0) == held:
                        a += 1
                    else:
                        b += 1
                    srv = 1 - srv
                games = a + b
                total += games
                margin += a - b
                if a > b:
                    sets_a += 1
                else:
                    sets_b += 1
                expected = set_first if games % 2 == 0 else 1 - set_first
                if srv != expected:
                    parity_bad += 1
                if n_sets == 1:
                    s = a if set_first == 0 else b
                    r = b if set_first == 0 else a
                    if s > r:
                        idx = r if s == 6 else (5 if r == 5 else 6)
                    else:
                        idx = 7 + s if r == 6 else (12 if s == 5 else 13)
                    set1_counts[idx] += 1
            winner_a = 1 if sets_a == 2 else 0
            idx = ((((winner_a * 28 + (total - 12)) * 79 + (margin + 39)) * 2
                    + (n_sets - 2)) * 4 + started_a)
            key_counts[idx] += 1
        return key_counts, set1_counts, parity_bad


@dataclass(frozen=True)
class SimConfig:
    """Reproducible simulation request: identical configs give identical tallies."""

    params: ServeParams
    first_server: str = "A"
    n_matches: int = 1
    seed: int = 0
    partitions: int = 1

    def __post_init__(self):
        _check_player(self.first_server)
        if self.n_matches < 1:
            raise ValueError(f"n_matches must be >= 1, got {self.n_matches}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.partitions < 1:
            raise ValueError(f"partitions must be >= 1, got {self.partitions}")
        if self.partitions > self.n_matches:
            raise ValueError("more partitions than matches")


@dataclass(frozen=True)
class SimTally:
    """Aggregated counts from n independent simulated matches.

    ``key_counts`` maps MatchKey to counts; ``set1_counts`` counts the 14
    terminal scores of set 1 (whose first server is the config's). Metadata
    records the generator so outputs are auditable.
    """

    config: SimConfig
    key_counts: dict[MatchKey, int]
    set1_counts: dict[tuple[int, int], int]
    rng_algorithm: str = RNG_ALGORITHM

    @property
    def n(self) -> int:
        return self.config.n_matches

    def merge(self, other: "SimTally") -> "SimTally":
        """Associative merge of two tallies over the same parameter point."""
        if (self.config.params, self.config.first_server) != (
                other.config.params, other.config.first_server):
            raise ValueError("cannot merge tallies with different parameters")
        keys = dict(self.key_counts)
        for k, c in other.key_counts.items():
            keys[k] = keys.get(k, 0) + c
        scores = dict(self.set1_counts)
        for k, c in other.set1_counts.items():
            scores[k] = scores.get(k, 0) + c
        merged_config = SimConfig(
            params=self.config.params,
            first_server=self.config.first_server,
            n_matches=self.config.n_matches + other.config.n_matches,
            seed=self.config.seed,
            partitions=self.config.partitions + other.config.partitions,
        )
        return SimTally(merged_config, keys, scores, self.rng_algorithm)

    # -- frequency estimates with binomial standard errors ------------------

    def _freq(self, count: int) -> tuple[float, float]:
        p = count / self.n
        return p, sqrt(p * (1.0 - p) / self.n)

    def set1_score_freq(self, score: tuple[int, int]) -> tuple[float, float]:
        return self._freq(self.set1_counts.get(score, 0))

    def set1_total_freq(self, games: int) -> tuple[float, float]:
        count = sum(c for (s, r), c in self.set1_counts.items() if s + r == games)
        return self._freq(count)

    def over_line_freq(self, line: float) -> tuple[float, float]:
        count = sum(c for k, c in self.key_counts.items() if k.total_games > line)
        return self._freq(count)

    def winner_freq(self, player: str) -> tuple[float, float]:
        count = sum(c for k, c in self.key_counts.items() if k.winner == player)
        return self._freq(count)

    def _mean_se(self, values) -> tuple[float, float]:
        total = 0.0
        total_sq = 0.0
        for v, c in values:
            total += v * c
            total_sq += v * v * c
        mean = total / self.n
        var = max(total_sq / self.n - mean * mean, 0.0) * self.n / max(self.n - 1, 1)
        return mean, sqrt(var / self.n)

    def total_games_mean(self) -> tuple[float, float]:
        return self._mean_se((k.total_games, c) for k, c in self.key_counts.items())

    def margin_mean(self) -> tuple[float, float]:
        return self._mean_se((k.margin, c) for k, c in self.key_counts.items())

    def sets_played_mean(self) -> tuple[float, float]:
        return self._mean_se((k.sets_played, c) for k, c in self.key_counts.items())

    def sets_started_by_a_mean(self) -> tuple[float, float]:
        return self._mean_se((k.sets_started_by_a, c) for k, c in self.key_counts.items())


def _partition_sizes(n_matches: int, partitions: int) -> list[int]:
    base, extra = divmod(n_matches, partitions)
    return [base + (1 if i < extra else 0) for i in range(partitions)]


def tally(config: SimConfig) -> SimTally:
    """Run the configured simulation and aggregate the outcome counts.

    Partitions use independent derived streams and merge deterministically,
    so results depend only on (params, first_server, n_matches, seed,
    partitions), never on scheduling.
    """
    seeds = partition_seeds(config.seed, config.partitions)
    sizes = _partition_sizes(config.n_matches, config.partitions)
    a_first = config.first_server == "A"
    run = _tally_partition_numba if HAVE_NUMBA else _tally_partition_python

    def one(args):
        sub_seed, size = args
        if HAVE_NUMBA:
            sub_seed = np.uint64(sub_seed)  # keep the kernel's dispatch on uint64
        return run(config.params.p_a, config.params.p_b, a_first, size, sub_seed)

    jobs = list(zip(seeds, sizes))
    if HAVE_NUMBA and config.partitions > 1:
        with ThreadPoolExecutor(max_workers=min(config.partitions, 8)) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(job) for job in jobs]

    key_counts = np.zeros(_KEY_CELLS, np.int64)
    set1_counts = np.zeros(14, np.int64)
    parity_bad = 0
    for kc, sc, bad in results:
        key_counts += kc
        set1_counts += sc
        parity_bad += bad
    if parity_bad:
        raise AssertionError(
            f"simulator violated the serve-parity rule on {parity_bad} sets")

    keys: dict[MatchKey, int] = {}
    for flat in np.nonzero(key_counts)[0]:
        count = int(key_counts[flat])
        rest, started_a = divmod(int(flat), 4)
        rest, sets_idx = divmod(rest, 2)
        rest, margin_idx = divmod(rest, 79)
        winner_idx, total_idx = divmod(rest, 28)
        keys[MatchKey("A" if winner_idx else "B", total_idx + 12,
                      margin_idx - 39, sets_idx + 2, started_a)] = count
    scores = {score: int(set1_counts[i]) for i, score in enumerate(_SET1_SCORES)
              if set1_counts[i]}
    return SimTally(config, keys, scores)
