"""Ingestion and analysis of professional match records.

Takes delimiter-separated match files (Sackmann-style column names by
default, remappable), parses score lines, estimates serve-point win
probabilities from serve totals, infers the opening server from game counts
and break statistics, and produces model residuals for the total-games
model together with grouped summary tables and logistic-regression inputs.

The opening-server inference rests on two facts: a set of n games gives the
set's first server ceil(n/2) service games and the other player floor(n/2),
and the first server of the next set follows the parity of n (a tiebreak
counts as one game). Observed service games for the match winner satisfy
SG_W = G_W + (breaks of W's serve) - (breaks of L's serve); each hypothesis
about the opening server implies a service-game split, and a verdict is
returned when exactly one hypothesis matches the observed split.

Note: break counts derived from break-point statistics treat a lost
tiebreak as a hold, so matches with tiebreak sets can come out inconsistent
on real data; the simulator-generated counts used in tests include
tiebreaks and are exact.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import ceil, floor
from pathlib import Path

import numpy as np

from .analytic import GameProbs, ServeParams
from .match import MatchExpectations, match_expectations

TOURS = ("ATP", "WTA")

REJECT_UNPARSEABLE = "unparseable"
REJECT_RETIRED = "retired"
REJECT_WRONG_FORMAT = "wrong_format"
REJECT_SUPER_TIEBREAK = "super_tiebreak"
REJECT_MISSING_STATS = "missing_stats"

REJECT_REASONS = (REJECT_UNPARSEABLE, REJECT_RETIRED, REJECT_WRONG_FORMAT,
                  REJECT_SUPER_TIEBREAK, REJECT_MISSING_STATS)

INDETERMINATE_SYMMETRIC = "symmetric"
INDETERMINATE_INCONSISTENT = "inconsistent"

_MARKERS = frozenset({"RET", "W/O", "DEF", "ABN", "ABD"})
_TOKEN = re.compile(r"^(\d{1,2})-(\d{1,2})(?:\([^)]*\))?$")
_LEGAL_SETS = frozenset({
    (6, 0), (6, 1), (6, 2), (6, 3), (6, 4), (7, 5), (7, 6),
    (0, 6), (1, 6), (2, 6), (3, 6), (4, 6), (5, 7), (6, 7),
})


class RecordRejected(ValueError):
    """A match record that cannot enter the pipeline, tagged with a reason."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class ScoreParseError(RecordRejected):
    pass


class MissingStatsError(RecordRejected):
    def __init__(self, message: str):
        super().__init__(REJECT_MISSING_STATS, message)


@dataclass(frozen=True)
class ParsedSet:
    """One completed set from the match winner's perspective."""

    winner_games: int
    loser_games: int
    tiebreak: bool

    @property
    def total(self) -> int:
        return self.winner_games + self.loser_games


def parse_score(score: str, best_of: int) -> list[ParsedSet]:
    """Parse a score line like "7-6(5) 3-6 6-3" into completed sets.

    The first number of each token is the match winner's games. Rejects
    retirements and walkovers, match-tiebreak deciders, non-best-of-three
    formats and anything that is not a sequence of terminal set scores.
    """
    if score is None or not score.strip():
        raise ScoreParseError(REJECT_UNPARSEABLE, "empty score")
    tokens = score.split()
    for token in tokens:
        if token.upper() in _MARKERS:
            raise ScoreParseError(REJECT_RETIRED, f"unfinished match: {score!r}")
    for token in tokens:
        if token.startswith("[") and token.endswith("]"):
            raise ScoreParseError(REJECT_SUPER_TIEBREAK,
                                  f"match-tiebreak token {token!r}")
    parsed: list[tuple[int, int, bool]] = []
    for token in tokens:
        m = _TOKEN.match(token)
        if m is None:
            raise ScoreParseError(REJECT_UNPARSEABLE, f"bad set token {token!r}")
        a, b = int(m.group(1)), int(m.group(2))
        if {a, b} == {1, 0} or max(a, b) >= 10:
            raise ScoreParseError(REJECT_SUPER_TIEBREAK,
                                  f"super-tiebreak encoding {token!r}")
        parsed.append((a, b, (a, b) in ((7, 6), (6, 7))))
    if best_of != 3:
        raise ScoreParseError(REJECT_WRONG_FORMAT, f"best_of={best_of} is not 3")
    for a, b, _ in parsed:
        if (a, b) not in _LEGAL_SETS:
            raise ScoreParseError(REJECT_WRONG_FORMAT,
                                  f"{a}-{b} is not a completed set")
    if len(parsed) not in (2, 3):
        raise ScoreParseError(REJECT_WRONG_FORMAT,
                              f"{len(parsed)} sets in a best-of-three match")
    wins = [a > b for a, b, _ in parsed]
    if sum(wins) != 2 or not wins[-1]:
        raise ScoreParseError(REJECT_WRONG_FORMAT,
                              f"set wins {wins} do not form a finished match")
    return [ParsedSet(a, b, tb) for a, b, tb in parsed]


@dataclass(frozen=True)
class ServeLine:
    """Raw serving counts for one player."""

    serve_points: int
    first_in: int
    first_won: int
    second_won: int
    bp_saved: int
    bp_faced: int


@dataclass(frozen=True)
class MatchRecord:
    """One parsed match: score-derived games plus both players' serve counts."""

    tour: str
    match_id: str
    score: str
    best_of: int
    winner_serve: ServeLine
    loser_serve: ServeLine
    sets: tuple[ParsedSet, ...]

    @property
    def g_w(self) -> int:
        return sum(s.winner_games for s in self.sets)

    @property
    def g_l(self) -> int:
        return sum(s.loser_games for s in self.sets)

    @property
    def total_games(self) -> int:
        return self.g_w + self.g_l

    @property
    def breaks_w(self) -> int:
        """Breaks converted by the winner (loser's unsaved break points)."""
        return self.loser_serve.bp_faced - self.loser_serve.bp_saved

    @property
    def breaks_l(self) -> int:
        """Breaks converted by the loser (winner's unsaved break points)."""
        return self.winner_serve.bp_faced - self.winner_serve.bp_saved

    @property
    def set_lengths(self) -> tuple[int, ...]:
        return tuple(s.total for s in self.sets)


def estimate_serve_probs(record: MatchRecord) -> tuple[float, float]:
    """Serve-point win probabilities: (first + second serve points won) / points."""
    return (_serve_prob(record.winner_serve, "winner"),
            _serve_prob(record.loser_serve, "loser"))


def _serve_prob(line: ServeLine, who: str) -> float:
    if line.serve_points <= 0:
        raise MissingStatsError(f"{who} has no serve points")
    won = line.first_won + line.second_won
    if won < 0 or won > line.serve_points:
        raise MissingStatsError(
            f"{who} serve counts inconsistent: {won} won of {line.serve_points}")
    p = won / line.serve_points
    if not 0.0 < p < 1.0:
        raise MissingStatsError(f"{who} serve probability {p} is degenerate")
    return p


@dataclass(frozen=True)
class ServerInference:
    """Outcome of the opening-server inference.

    ``verdict`` is "W" or "L" when determined, else None with ``reason``
    "symmetric" (both hypotheses imply the same split) or "inconsistent"
    (observed split matches neither hypothesis).
    """

    verdict: str | None
    reason: str | None
    sg_w_if_winner_first: int
    sg_w_if_loser_first: int
    observed_sg_w: int

    @property
    def determined(self) -> bool:
        return self.verdict is not None


def implied_service_games(set_lengths, winner_first: bool) -> tuple[int, int]:
    """Winner's and loser's service-game counts implied by a first-server hypothesis."""
    sg_w = 0
    current = "W" if winner_first else "L"
    for n in set_lengths:
        first_games, other_games = ceil(n / 2), floor(n / 2)
        sg_w += first_games if current == "W" else other_games
        if n % 2 == 1:
            current = "L" if current == "W" else "W"
    return sg_w, sum(set_lengths) - sg_w


def infer_first_server(record: MatchRecord) -> ServerInference:
    """Compare the two hypotheses' implied service-game splits with the observed one.

    Observed SG_W = G_W + (breaks of the winner's serve) - (breaks of the
    loser's serve), the breaks being the opponent's conversions.
    """
    if record.breaks_w < 0 or record.breaks_l < 0:
        raise MissingStatsError("negative break count")
    sg_w_winner_first, _ = implied_service_games(record.set_lengths, True)
    sg_w_loser_first, _ = implied_service_games(record.set_lengths, False)
    observed = record.g_w + record.breaks_l - record.breaks_w
    if sg_w_winner_first == sg_w_loser_first:
        verdict, reason = None, INDETERMINATE_SYMMETRIC
    elif observed == sg_w_winner_first:
        verdict, reason = "W", None
    elif observed == sg_w_loser_first:
        verdict, reason = "L", None
    else:
        verdict, reason = None, INDETERMINATE_INCONSISTENT
    return ServerInference(verdict, reason, sg_w_winner_first,
                           sg_w_loser_first, observed)


@lru_cache(maxsize=200_000)
def _expectations_for(p_w: float, p_l: float) -> MatchExpectations:
    return match_expectations(GameProbs.from_params(ServeParams(p_w, p_l)))


def expected_total_games(p_w: float, p_l: float, first_server: str) -> float:
    """Model expectation of total games with the winner as player A."""
    exp = _expectations_for(p_w, p_l)
    if first_server not in ("W", "L"):
        raise ValueError(f"first_server must be 'W' or 'L', got {first_server!r}")
    return exp.t_match_a if first_server == "W" else exp.t_match_b


@dataclass(frozen=True)
class ResidualRow:
    """Observed minus expected total games for one match."""

    tour: str
    first_server: str  # "W" | "L"
    residual: float
    p_w: float
    p_l: float


@dataclass(frozen=True)
class ProcessedMatch:
    """A record that passed all filters, with estimates, verdict and residual."""

    record: MatchRecord
    p_w: float
    p_l: float
    inference: ServerInference
    expected_total: float | None
    residual: float | None


def process_record(record: MatchRecord,
                   indeterminate_policy: str = "exclude") -> ProcessedMatch:
    """Estimate serve probabilities, infer the opening server, compute the residual.

    Indeterminate matches get no residual under the default "exclude"
    policy; under "average" the expectation is the mean over both
    opening-server hypotheses.
    """
    if indeterminate_policy not in ("exclude", "average"):
        raise ValueError(f"unknown indeterminate policy {indeterminate_policy!r}")
    p_w, p_l = estimate_serve_probs(record)
    inference = infer_first_server(record)
    expected: float | None
    if inference.determined:
        expected = expected_total_games(p_w, p_l, inference.verdict)
    elif indeterminate_policy == "average":
        expected = 0.5 * (expected_total_games(p_w, p_l, "W")
                          + expected_total_games(p_w, p_l, "L"))
    else:
        expected = None
    residual = None if expected is None else record.total_games - expected
    return ProcessedMatch(record, p_w, p_l, inference, expected, residual)


def residual_rows(processed) -> list[ResidualRow]:
    """Residual rows for matches with a determined opening server."""
    rows = []
    for pm in processed:
        if pm.residual is not None and pm.inference.determined:
            rows.append(ResidualRow(pm.record.tour, pm.inference.verdict,
                                    pm.residual, pm.p_w, pm.p_l))
    return rows


@dataclass(frozen=True)
class GroupStats:
    """Residual summary for one (tour, first server) group."""

    tour: str
    first_server: str
    n: int
    mean: float
    std: float | None
    se: float | None
    median: float
    q25: float
    q75: float


@dataclass(frozen=True)
class OverallStats:
    tour: str
    n: int
    mean: float
    se: float | None


def residual_table(rows) -> tuple[list[GroupStats], list[OverallStats]]:
    """Grouped residual statistics (n-1 denominators, linear-interpolated quantiles)."""
    groups: dict[tuple[str, str], list[float]] = {}
    tours: dict[str, list[float]] = {}
    for row in rows:
        groups.setdefault((row.tour, row.first_server), []).append(row.residual)
        tours.setdefault(row.tour, []).append(row.residual)

    group_stats = []
    for (tour, server) in sorted(groups):
        values = np.asarray(groups[(tour, server)])
        n = len(values)
        std = float(np.std(values, ddof=1)) if n > 1 else None
        group_stats.append(GroupStats(
            tour=tour,
            first_server=server,
            n=n,
            mean=float(values.mean()),
            std=std,
            se=std / np.sqrt(n) if std is not None else None,
            median=float(np.percentile(values, 50)),
            q25=float(np.percentile(values, 25)),
            q75=float(np.percentile(values, 75)),
        ))

    overall = []
    for tour in sorted(tours):
        values = np.asarray(tours[tour])
        n = len(values)
        se = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else None
        overall.append(OverallStats(tour, n, float(values.mean()), se))
    return group_stats, overall


def logit_data(processed, tour: str) -> list[tuple[int, float]]:
    """(y, delta) pairs for one tour: y=1 when the winner served first."""
    return [(1 if pm.inference.verdict == "W" else 0, pm.p_w - pm.p_l)
            for pm in processed
            if pm.record.tour == tour and pm.inference.determined]


def inference_counts(processed) -> list[dict]:
    """Per-tour determined/indeterminate counts with percentages."""
    by_tour: dict[str, Counter] = {}
    for pm in processed:
        c = by_tour.setdefault(pm.record.tour, Counter())
        c["total"] += 1
        c["determined" if pm.inference.determined else "indeterminate"] += 1
    rows = []
    for tour in sorted(by_tour):
        c = by_tour[tour]
        rows.append({
            "tour": tour,
            "total_matches": c["total"],
            "determined": c["determined"],
            "indeterminate": c["indeterminate"],
            "determined_pct": 100.0 * c["determined"] / c["total"] if c["total"] else 0.0,
        })
    return rows


# ---------------------------------------------------------------------------
# CSV ingestion

DEFAULT_COLUMNS = {
    "score": "score",
    "best_of": "best_of",
    "date": "tourney_date",
    "tourney_id": "tourney_id",
    "match_num": "match_num",
    "w_svpt": "w_svpt",
    "w_1stIn": "w_1stIn",
    "w_1stWon": "w_1stWon",
    "w_2ndWon": "w_2ndWon",
    "w_bpSaved": "w_bpSaved",
    "w_bpFaced": "w_bpFaced",
    "l_svpt": "l_svpt",
    "l_1stIn": "l_1stIn",
    "l_1stWon": "l_1stWon",
    "l_2ndWon": "l_2ndWon",
    "l_bpSaved": "l_bpSaved",
    "l_bpFaced": "l_bpFaced",
}

_STAT_FIELDS = ("svpt", "1stIn", "1stWon", "2ndWon", "bpSaved", "bpFaced")

REQUIRED_LOGICAL = ("score", "best_of") + tuple(
    f"{side}_{stat}" for side in ("w", "l") for stat in _STAT_FIELDS)


@dataclass
class IngestResult:
    """Accepted matches plus a per-reason audit of everything rejected."""

    processed: list[ProcessedMatch]
    rejections: Counter
    total: int

    @property
    def accepted(self) -> int:
        return len(self.processed)

    def merge(self, other: "IngestResult") -> "IngestResult":
        return IngestResult(self.processed + other.processed,
                            self.rejections + other.rejections,
                            self.total + other.total)


def parse_years(spec: str) -> set[int]:
    """Parse a season filter like "2010-2024" or "2015,2017"."""
    years: set[int] = set()
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            years.update(range(int(lo), int(hi) + 1))
        else:
            years.add(int(part))
    if not years:
        raise ValueError(f"empty year specification {spec!r}")
    return years


def tour_from_filename(path) -> str | None:
    name = Path(path).name.lower()
    if "atp" in name:
        return "ATP"
    if "wta" in name:
        return "WTA"
    return None


def _int_field(row: dict, column: str, context: str) -> int:
    raw = row.get(column)
    if raw is None or str(raw).strip() == "":
        raise MissingStatsError(f"missing {context} ({column})")
    try:
        return int(float(raw))
    except ValueError as err:
        raise MissingStatsError(f"bad {context} value {raw!r}") from err


def _serve_line(row: dict, side: str, columns: dict) -> ServeLine:
    values = {}
    for stat in _STAT_FIELDS:
        column = columns[f"{side}_{stat}"]
        values[stat] = _int_field(row, column, f"{side}_{stat}")
        if values[stat] < 0:
            raise MissingStatsError(f"negative {side}_{stat}")
    if values["bpSaved"] > values["bpFaced"]:
        raise MissingStatsError(f"{side} break points saved exceed faced")
    return ServeLine(
        serve_points=values["svpt"],
        first_in=values["1stIn"],
        first_won=values["1stWon"],
        second_won=values["2ndWon"],
        bp_saved=values["bpSaved"],
        bp_faced=values["bpFaced"],
    )


def record_from_row(row: dict, tour: str, columns: dict | None = None,
                    match_id: str | None = None) -> MatchRecord:
    """Build a MatchRecord from one csv row; raises RecordRejected on filters."""
    columns = dict(DEFAULT_COLUMNS, **(columns or {}))
    score = row.get(columns["score"], "")
    raw_best_of = row.get(columns["best_of"])
    try:
        best_of = int(float(raw_best_of)) if raw_best_of not in (None, "") else 0
    except ValueError:
        raise ScoreParseError(REJECT_WRONG_FORMAT, f"bad best_of {raw_best_of!r}")
    sets = parse_score(score, best_of)
    if match_id is None:
        tid = row.get(columns.get("tourney_id", ""), "")
        num = row.get(columns.get("match_num", ""), "")
        match_id = f"{tid}-{num}" if tid or num else ""
    return MatchRecord(
        tour=tour,
        match_id=match_id,
        score=score,
        best_of=best_of,
        winner_serve=_serve_line(row, "w", columns),
        loser_serve=_serve_line(row, "l", columns),
        sets=tuple(sets),
    )


def ingest_csv(path, tour: str | None = None, columns: dict | None = None,
               years: set[int] | None = None,
               indeterminate_policy: str = "exclude") -> IngestResult:
    """Stream one csv file of matches through the full pipeline.

    Per-record failures are counted, never fatal. Raises ValueError when a
    required column is absent from the header and OSError when the file
    cannot be read.
    """
    columns = dict(DEFAULT_COLUMNS, **(columns or {}))
    if tour is None:
        tour = tour_from_filename(path)
    if tour is None:
        raise ValueError(f"cannot infer tour from {path!r}; pass one explicitly")
    tour = tour.upper()
    if tour not in TOURS:
        raise ValueError(f"tour must be one of {TOURS}, got {tour!r}")

    processed: list[ProcessedMatch] = []
    rejections: Counter = Counter()
    total = 0
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            return IngestResult([], rejections, 0)
        missing = [columns[name] for name in REQUIRED_LOGICAL
                   if columns[name] not in reader.fieldnames]
        if years is not None and columns["date"] not in reader.fieldnames:
            missing.append(columns["date"])
        if missing:
            raise ValueError(f"{path}: required columns missing: {missing}")
        for index, row in enumerate(reader):
            if years is not None:
                raw_date = str(row.get(columns["date"], "")).strip()
                if len(raw_date) < 4 or not raw_date[:4].isdigit():
                    total += 1
                    rejections[REJECT_UNPARSEABLE] += 1
                    continue
                if int(raw_date[:4]) not in years:
                    continue  # filtered out, not a rejection
            total += 1
            try:
                record = record_from_row(row, tour, columns)
                processed.append(process_record(record, indeterminate_policy))
            except RecordRejected as err:
                rejections[err.reason] += 1
    return IngestResult(processed, rejections, total)


def ingest_files(paths, tour: str | None = None, columns: dict | None = None,
                 years: set[int] | None = None,
                 indeterminate_policy: str = "exclude") -> IngestResult:
    result = IngestResult([], Counter(), 0)
    for path in paths:
        result = result.merge(ingest_csv(path, tour, columns, years,
                                         indeterminate_policy))
    return result
