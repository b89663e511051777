"""Serve-order effects on best-of-three tennis: exact engine, simulator, pipeline."""

from .analytic import (
    GameProbs,
    ServeParams,
    SetScoreDistribution,
    SetSummary,
    SET_TOTALS,
    TERMINAL_SCORES,
    game_win_prob,
    invert_game_win_prob,
    next_first_server,
    other_player,
    set_score_distribution,
    set_summary,
    tiebreak_win_prob,
)
from .logit import LogitFit, SeparationError, fit_logit
from .match import (
    MatchExpectations,
    MatchKey,
    MatchOutcome,
    MatchOutcomeDistribution,
    SetScore,
    TransitionQuantities,
    match_distribution,
    match_expectations,
    match_win_prob,
    over_line_prob,
    shift_approx_error,
    transition_quantities,
)
from .montecarlo import (
    SimConfig,
    SimTally,
    SplitMix64,
    partition_seeds,
    simulate_match,
    tally,
)
from .pipeline import (
    IngestResult,
    MatchRecord,
    ParsedSet,
    ProcessedMatch,
    ResidualRow,
    ScoreParseError,
    ServeLine,
    ServerInference,
    estimate_serve_probs,
    expected_total_games,
    infer_first_server,
    ingest_csv,
    ingest_files,
    parse_score,
    process_record,
    residual_rows,
    residual_table,
)
from .scan import ScanSpec, ScanSummary, run_scan

__version__ = "0.1.0"

__all__ = [
    "GameProbs",
    "IngestResult",
    "LogitFit",
    "MatchExpectations",
    "MatchKey",
    "MatchOutcome",
    "MatchOutcomeDistribution",
    "MatchRecord",
    "ParsedSet",
    "ProcessedMatch",
    "ResidualRow",
    "ScanSpec",
    "ScanSummary",
    "ScoreParseError",
    "SeparationError",
    "ServeLine",
    "ServeParams",
    "ServerInference",
    "SetScore",
    "SetScoreDistribution",
    "SetSummary",
    "SET_TOTALS",
    "SimConfig",
    "SimTally",
    "SplitMix64",
    "TERMINAL_SCORES",
    "TransitionQuantities",
    "estimate_serve_probs",
    "expected_total_games",
    "fit_logit",
    "game_win_prob",
    "infer_first_server",
    "ingest_csv",
    "ingest_files",
    "invert_game_win_prob",
    "match_distribution",
    "match_expectations",
    "match_win_prob",
    "next_first_server",
    "other_player",
    "over_line_prob",
    "parse_score",
    "partition_seeds",
    "process_record",
    "residual_rows",
    "residual_table",
    "run_scan",
    "set_score_distribution",
    "set_summary",
    "shift_approx_error",
    "simulate_match",
    "tally",
    "tiebreak_win_prob",
    "transition_quantities",
]
