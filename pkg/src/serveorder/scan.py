"""Parameter-grid scans behind the heatmap and over-line analyses.

Grids run over serve-point probabilities with p_b <= p_a (player A is the
stronger server by convention) and all differences are reported signed as
(A serves first) minus (B serves first). The default heatmap region is
[0.50, 0.85] at step 0.005, wide enough to contain the ~0.4-game peak
shift; over-line scans default to [0.50, 0.70] at step 0.01.

Grid points are independent, so scans can fan out over worker processes;
rows always come back in grid order regardless of the worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat

from .analytic import (
    GameProbs,
    ServeParams,
    set_score_distribution,
    set_summary,
    tiebreak_win_prob,
)
from .match import (
    match_distribution,
    match_win_prob,
    over_line_prob,
    shift_approx_error,
)

DEFAULT_LINES = (18.5, 19.5, 20.5, 21.5, 22.5)

HEATMAP_MIN, HEATMAP_MAX, HEATMAP_STEP = 0.50, 0.85, 0.005
OVERLINE_MIN, OVERLINE_MAX, OVERLINE_STEP = 0.50, 0.70, 0.01

QUANTITIES = ("totals-diff", "margin-diff", "set-vs-match-diff",
              "overline-diff", "shift-approx")


@dataclass(frozen=True)
class ScanSpec:
    """A triangular grid p_min <= p_b <= p_a <= p_max with given step."""

    p_min: float
    p_max: float
    step: float
    lines: tuple[float, ...] = DEFAULT_LINES

    def __post_init__(self):
        if not 0.0 < self.p_min <= self.p_max < 1.0:
            raise ValueError(
                f"need 0 < p_min <= p_max < 1, got [{self.p_min}, {self.p_max}]")
        if self.step <= 0.0:
            raise ValueError(f"step must be positive, got {self.step}")
        for line in self.lines:
            doubled = line * 2.0
            if doubled != int(doubled) or int(doubled) % 2 == 0:
                raise ValueError(f"line must be a half-integer, got {line!r}")

    def values(self) -> list[float]:
        count = int(round((self.p_max - self.p_min) / self.step))
        points = [round(self.p_min + i * self.step, 10) for i in range(count + 1)]
        return [p for p in points if p <= self.p_max + 1e-12]

    def grid(self) -> list[tuple[float, float]]:
        """(p_a, p_b) pairs with p_b <= p_a, row-major in (p_a, p_b)."""
        values = self.values()
        return [(pa, pb) for i, pa in enumerate(values) for pb in values[:i + 1]]


@dataclass(frozen=True)
class ScanSummary:
    """Mean and absolute maximum of one scanned difference over the grid."""

    label: str
    n_points: int
    mean: float
    max_abs: float
    argmax_pa: float
    argmax_pb: float


@dataclass(frozen=True)
class ScanResult:
    quantity: str
    header: tuple[str, ...]
    rows: list[tuple]
    summaries: list[ScanSummary]


def _header_for(spec: ScanSpec, quantity: str) -> tuple[str, ...]:
    if quantity == "totals-diff":
        return ("p_a", "p_b", "t_match_a", "t_match_b", "diff")
    if quantity == "margin-diff":
        return ("p_a", "p_b", "h_match_a", "h_match_b", "diff")
    if quantity == "set-vs-match-diff":
        return ("p_a", "p_b", "t_set_diff", "t_match_diff", "t_attenuation",
                "h_set_diff", "h_match_diff", "h_attenuation")
    if quantity == "shift-approx":
        return ("p_a", "p_b", "delta", "approx_error")
    header = ["p_a", "p_b"]
    for line in spec.lines:
        header += [f"over_{line}_a_first", f"over_{line}_b_first",
                   f"over_{line}_diff"]
    return tuple(header)


def _point_row(spec: ScanSpec, quantity: str, pa: float, pb: float) -> tuple:
    if quantity == "shift-approx":
        return (pa, pb, pa - pb, shift_approx_error(ServeParams(pa, pb)))

    g = GameProbs.from_params(ServeParams(pa, pb))
    if quantity == "overline-diff":
        dist_a = match_distribution(g, "A")
        dist_b = match_distribution(g, "B")
        row = [pa, pb]
        for line in spec.lines:
            over_a = over_line_prob(dist_a, line)
            over_b = over_line_prob(dist_b, line)
            row += [over_a, over_b, over_a - over_b]
        return tuple(row)

    dist_a = match_distribution(g, "A")
    dist_b = match_distribution(g, "B")
    t_a, t_b = dist_a.expected_total(), dist_b.expected_total()
    h_a, h_b = dist_a.expected_margin(), dist_b.expected_margin()
    if quantity == "totals-diff":
        return (pa, pb, t_a, t_b, t_a - t_b)
    if quantity == "margin-diff":
        return (pa, pb, h_a, h_b, h_a - h_b)
    sum_a = set_summary(set_score_distribution(g, "A"))
    sum_b = set_summary(set_score_distribution(g, "B"))
    ts_diff = sum_a.t_set - sum_b.t_set
    hs_diff = sum_a.h_set - sum_b.h_set
    return (pa, pb, ts_diff, t_a - t_b, (t_a - t_b) - ts_diff,
            hs_diff, h_a - h_b, (h_a - h_b) - hs_diff)


def _compute_rows(spec: ScanSpec, quantity: str, points) -> list[tuple]:
    return [_point_row(spec, quantity, pa, pb) for pa, pb in points]


def _summarize(label: str, rows, column: int) -> ScanSummary:
    best = 0.0
    arg = (rows[0][0], rows[0][1])
    total = 0.0
    for row in rows:
        value = row[column]
        total += value
        if abs(value) > best:
            best = abs(value)
            arg = (row[0], row[1])
    return ScanSummary(label, len(rows), total / len(rows), best, arg[0], arg[1])


def _summaries_for(spec: ScanSpec, quantity: str, rows) -> list[ScanSummary]:
    if quantity == "totals-diff":
        return [_summarize("totals-diff", rows, 4)]
    if quantity == "margin-diff":
        return [_summarize("margin-diff", rows, 4)]
    if quantity == "set-vs-match-diff":
        return [_summarize("t-attenuation", rows, 4),
                _summarize("h-attenuation", rows, 7)]
    if quantity == "shift-approx":
        return [_summarize("shift-approx-error", rows, 3)]
    return [_summarize(f"over-{line}", rows, 4 + 3 * i)
            for i, line in enumerate(spec.lines)]


def run_scan(spec: ScanSpec, quantity: str, jobs: int = 1) -> ScanResult:
    """Evaluate one scan quantity on every grid point of the spec.

    ``jobs`` > 1 distributes grid chunks over worker processes; the result
    is identical to a sequential run.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    points = spec.grid()

    if jobs == 1 or len(points) < 2 * jobs:
        rows = _compute_rows(spec, quantity, points)
    else:
        bounds = [round(i * len(points) / jobs) for i in range(jobs + 1)]
        chunks = [points[bounds[i]:bounds[i + 1]] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_compute_rows, repeat(spec), repeat(quantity), chunks)
            rows = [row for part in parts for row in part]

    return ScanResult(quantity, _header_for(spec, quantity), rows,
                      _summaries_for(spec, quantity, rows))


def point_report(params: ServeParams, lines=DEFAULT_LINES) -> dict:
    """All single-point quantities the CLI prints, as one flat mapping."""
    g = GameProbs.from_params(params.require_interior())
    sum_a = set_summary(set_score_distribution(g, "A"))
    sum_b = set_summary(set_score_distribution(g, "B"))
    dist_a = match_distribution(g, "A")
    dist_b = match_distribution(g, "B")
    report = {
        "p_a": params.p_a,
        "p_b": params.p_b,
        "g_a": g.g_a,
        "g_b": g.g_b,
        "tiebreak_a_first": tiebreak_win_prob(params, "A"),
        "tiebreak_b_first": tiebreak_win_prob(params, "B"),
        "set_win_a_first": sum_a.p_set_a,
        "set_win_b_first": sum_b.p_set_a,
        "t_set_a": sum_a.t_set,
        "t_set_b": sum_b.t_set,
        "h_set_a": sum_a.h_set,
        "h_set_b": sum_b.h_set,
        "t_match_a": dist_a.expected_total(),
        "t_match_b": dist_b.expected_total(),
        "h_match_a": dist_a.expected_margin(),
        "h_match_b": dist_b.expected_margin(),
        "match_win_a": match_win_prob(g),
        "overlines": [(line, over_line_prob(dist_a, line), over_line_prob(dist_b, line))
                      for line in lines],
    }
    return report
