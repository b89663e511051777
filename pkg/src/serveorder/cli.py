"""Command-line front end: analytic point reports, grid scans, simulation
and the empirical pipeline.

Exit codes: 0 success, 1 usage, 2 I/O, 3 validation. Numeric output uses 12
significant digits; CSV files start with a ``#``-prefixed metadata line and
JSONL files carry one record per line, both UTF-8 with LF endings.
"""

from __future__ import annotations

import argparse
import json
import sys
from math import sqrt

from . import __version__
from .analytic import ServeParams
from .logit import SeparationError, fit_logit
from .montecarlo import RNG_ALGORITHM, SimConfig, tally
from .pipeline import (
    REJECT_REASONS,
    ingest_files,
    inference_counts,
    logit_data,
    parse_years,
    residual_rows,
    residual_table,
)
from .scan import (
    DEFAULT_LINES,
    HEATMAP_MAX,
    HEATMAP_MIN,
    HEATMAP_STEP,
    OVERLINE_MAX,
    OVERLINE_MIN,
    OVERLINE_STEP,
    QUANTITIES,
    ScanSpec,
    point_report,
    run_scan,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3


def fmt(value) -> str:
    """12 significant digits, enough to audit 1e-12 identities externally."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _meta_line(**fields) -> str:
    parts = [f"version={__version__}"] + [f"{k}={fmt(v)}" for k, v in fields.items()]
    return "# " + " ".join(parts)


def _write_csv(path: str, header, rows, meta: str, extra_comments=()):
    lines = [meta]
    lines.extend(extra_comments)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _write_jsonl(path: str, records):
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _parse_lines(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError as err:
        raise ValueError(f"bad --lines value {raw!r}") from err


# ---------------------------------------------------------------------------
# subcommands

def cmd_point(args) -> int:
    params = ServeParams(args.pa, args.pb)
    lines = _parse_lines(args.lines)
    report = point_report(params, lines)
    out = sys.stdout
    out.write(f"point P_A={fmt(report['p_a'])} P_B={fmt(report['p_b'])}\n")
    out.write(f"hold probabilities: G_A={fmt(report['g_a'])} G_B={fmt(report['g_b'])}\n")
    out.write("tiebreak win probability serving first: "
              f"A={fmt(report['tiebreak_a_first'])} B={fmt(report['tiebreak_b_first'])}\n")
    for tag in ("a", "b"):
        out.write(
            f"set with {tag.upper()} serving first: "
            f"P(A wins)={fmt(report[f'set_win_{tag}_first'])} "
            f"E[games]={fmt(report[f't_set_{tag}'])} "
            f"E[margin]={fmt(report[f'h_set_{tag}'])}\n")
    out.write(f"set diff (A-first minus B-first): "
              f"totals={fmt(report['t_set_a'] - report['t_set_b'])} "
              f"margin={fmt(report['h_set_a'] - report['h_set_b'])}\n")
    out.write(f"match totals: T_A={fmt(report['t_match_a'])} "
              f"T_B={fmt(report['t_match_b'])} "
              f"diff={fmt(report['t_match_a'] - report['t_match_b'])}\n")
    out.write(f"match margins: H_A={fmt(report['h_match_a'])} "
              f"H_B={fmt(report['h_match_b'])} "
              f"diff={fmt(report['h_match_a'] - report['h_match_b'])}\n")
    out.write(f"match win probability (A): {fmt(report['match_win_a'])}\n")
    out.write("over-line probabilities:\n")
    out.write("line,a_first,b_first,diff\n")
    for line, over_a, over_b in report["overlines"]:
        out.write(f"{fmt(line)},{fmt(over_a)},{fmt(over_b)},{fmt(over_a - over_b)}\n")
    return EXIT_OK


def cmd_scan(args) -> int:
    defaults = {
        "overline-diff": (OVERLINE_MIN, OVERLINE_MAX, OVERLINE_STEP),
        "shift-approx": (OVERLINE_MIN, OVERLINE_MAX, OVERLINE_STEP),
    }
    d_min, d_max, d_step = defaults.get(args.quantity,
                                        (HEATMAP_MIN, HEATMAP_MAX, HEATMAP_STEP))
    spec = ScanSpec(
        p_min=args.grid_min if args.grid_min is not None else d_min,
        p_max=args.grid_max if args.grid_max is not None else d_max,
        step=args.step if args.step is not None else d_step,
        lines=_parse_lines(args.lines),
    )
    result = run_scan(spec, args.quantity, jobs=args.jobs)
    meta = _meta_line(command="scan", quantity=args.quantity, p_min=spec.p_min,
                      p_max=spec.p_max, step=spec.step,
                      lines=";".join(fmt(l) for l in spec.lines))
    comments = [
        f"# summary {s.label} n={s.n_points} mean={fmt(s.mean)} "
        f"max_abs={fmt(s.max_abs)} argmax_pa={fmt(s.argmax_pa)} "
        f"argmax_pb={fmt(s.argmax_pb)}"
        for s in result.summaries
    ]
    if args.format == "csv":
        _write_csv(args.out, result.header, result.rows, meta, comments)
    else:
        records = [dict(zip(result.header, row)) for row in result.rows]
        _write_jsonl(args.out, records)
    for comment in comments:
        print(comment.lstrip("# "))
    return EXIT_OK


def _freq_z(simulated: float, analytic: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if simulated == analytic else float("inf")
    return (simulated - analytic) / se


def cmd_simulate(args) -> int:
    params = ServeParams(args.pa, args.pb)
    config = SimConfig(params=params, first_server=args.server,
                       n_matches=args.n, seed=args.seed,
                       partitions=args.partitions)
    lines = _parse_lines(args.lines)
    result = tally(config)

    if args.out:
        payload = {
            "meta": {
                "version": __version__,
                "rng": RNG_ALGORITHM,
                "p_a": params.p_a,
                "p_b": params.p_b,
                "first_server": config.first_server,
                "n_matches": config.n_matches,
                "seed": config.seed,
                "partitions": config.partitions,
            },
            "key_counts": [
                {"winner": k.winner, "total_games": k.total_games,
                 "margin": k.margin, "sets_played": k.sets_played,
                 "sets_started_by_a": k.sets_started_by_a, "count": c}
                for k, c in sorted(result.key_counts.items())
            ],
            "set1_counts": [
                {"server_games": s, "receiver_games": r, "count": c}
                for (s, r), c in sorted(result.set1_counts.items())
            ],
        }
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
        if args.out == "-":
            sys.stdout.write(text)
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)

    print(f"simulated {config.n_matches} matches at "
          f"(P_A={fmt(params.p_a)}, P_B={fmt(params.p_b)}) "
          f"first_server={config.first_server} seed={config.seed} "
          f"partitions={config.partitions} rng={RNG_ALGORITHM}")

    if not params.interior:
        print("degenerate parameters: analytic comparison skipped")
        print("outcome frequencies:")
        for k, c in sorted(result.key_counts.items()):
            print(f"  winner={k.winner} total={k.total_games} margin={k.margin} "
                  f"sets={k.sets_played} started_by_a={k.sets_started_by_a} "
                  f"freq={fmt(c / result.n)}")
        return EXIT_OK

    from . import analytic, match  # deferred: only needed for comparisons

    g = analytic.GameProbs.from_params(params)
    dist = match.match_distribution(g, config.first_server)
    set_dist = analytic.set_score_distribution(g, config.first_server)
    summary = analytic.set_summary(set_dist)

    header = f"{'quantity':<28}{'simulated':>16}{'analytic':>16}{'z':>10}"
    print(header)
    rows = []

    sim, _ = result.winner_freq("A")
    rows.append(("P(A wins match)", sim, dist.win_prob("A")))
    mean, mean_se = result.total_games_mean()
    rows.append(("E[total games]", (mean, mean_se), dist.expected_total()))
    mean, mean_se = result.margin_mean()
    rows.append(("E[margin A-B]", (mean, mean_se), dist.expected_margin()))
    mean, mean_se = result.sets_played_mean()
    rows.append(("E[sets played]", (mean, mean_se), dist.expected_sets()))
    mean, mean_se = result.sets_started_by_a_mean()
    rows.append(("E[sets started by A]", (mean, mean_se),
                 dist.expected_sets_started_by_a()))
    for line in lines:
        sim, _ = result.over_line_freq(line)
        rows.append((f"P(T > {fmt(line)})", sim, match.over_line_prob(dist, line)))
    for score in analytic.TERMINAL_SCORES:
        sim, _ = result.set1_score_freq(score)
        rows.append((f"set1 {score[0]}-{score[1]}", sim, set_dist.prob(*score)))
    for games in analytic.SET_TOTALS:
        sim, _ = result.set1_total_freq(games)
        rows.append((f"set1 total {games}", sim, summary.pi[games]))

    worst = 0.0
    for label, sim_val, ana_val in rows:
        if isinstance(sim_val, tuple):
            sim_mean, sim_se = sim_val
            z = _freq_z(sim_mean, ana_val, sim_se)
            sim_text = fmt(sim_mean)
        else:
            se = sqrt(ana_val * (1.0 - ana_val) / result.n)
            z = _freq_z(sim_val, ana_val, se)
            sim_text = fmt(sim_val)
        worst = max(worst, abs(z))
        print(f"{label:<28}{sim_text:>16}{fmt(ana_val):>16}{z:>10.2f}")
    print(f"max |z| = {worst:.2f}")
    return EXIT_OK


def _ingest_from_args(args):
    years = parse_years(args.years) if args.years else None
    columns = None
    if args.columns:
        columns = {}
        for pair in args.columns.split(","):
            if "=" not in pair:
                raise ValueError(f"bad --columns entry {pair!r}; expected logical=actual")
            logical, actual = pair.split("=", 1)
            columns[logical.strip()] = actual.strip()
    return ingest_files(args.input, tour=args.tour, columns=columns, years=years,
                        indeterminate_policy=args.indeterminate)


def _record_json(pm) -> dict:
    record = pm.record
    inf = pm.inference
    return {
        "match_id": record.match_id,
        "tour": record.tour,
        "score": record.score,
        "best_of": record.best_of,
        "sets": [[s.winner_games, s.loser_games, s.tiebreak] for s in record.sets],
        "g_w": record.g_w,
        "g_l": record.g_l,
        "breaks_w": record.breaks_w,
        "breaks_l": record.breaks_l,
        "p_w": pm.p_w,
        "p_l": pm.p_l,
        "sg_w_observed": inf.observed_sg_w,
        "sg_w_if_winner_first": inf.sg_w_if_winner_first,
        "sg_w_if_loser_first": inf.sg_w_if_loser_first,
        "verdict": inf.verdict,
        "indeterminate_reason": inf.reason,
        "expected_total": pm.expected_total,
        "residual": pm.residual,
    }


def cmd_ingest(args) -> int:
    result = _ingest_from_args(args)
    if args.out:
        _write_jsonl(args.out, [_record_json(pm) for pm in result.processed])
    if args.audit:
        rows = [(reason, result.rejections.get(reason, 0)) for reason in REJECT_REASONS]
        rows.append(("accepted", result.accepted))
        rows.append(("total", result.total))
        _write_csv(args.audit, ("reason", "count"), rows,
                   _meta_line(command="ingest"))
    print(f"read {result.total} rows: accepted {result.accepted}, "
          f"rejected {result.total - result.accepted}")
    for reason in REJECT_REASONS:
        if result.rejections.get(reason):
            print(f"  {reason}: {result.rejections[reason]}")
    return EXIT_OK


def cmd_infer(args) -> int:
    result = _ingest_from_args(args)
    rows = [(r["tour"], r["total_matches"], r["determined"], r["indeterminate"],
             r["determined_pct"]) for r in inference_counts(result.processed)]
    header = ("tour", "total_matches", "determined", "indeterminate", "determined_pct")
    _write_csv(args.out, header, rows, _meta_line(command="infer"))
    for row in rows:
        print(f"{row[0]}: {row[2]} of {row[1]} determined ({fmt(row[4])}%)")
    if not rows:
        print("no matches accepted")
    return EXIT_OK


def cmd_residuals(args) -> int:
    result = _ingest_from_args(args)
    groups, overall = residual_table(residual_rows(result.processed))
    header = ("tour", "first_server", "n", "mean", "std", "se",
              "median", "q25", "q75")
    rows = [(g.tour, g.first_server, g.n, g.mean, g.std, g.se,
             g.median, g.q25, g.q75) for g in groups]
    rows += [(o.tour, "ALL", o.n, o.mean, None, o.se, None, None, None)
             for o in overall]
    _write_csv(args.out, header, rows,
               _meta_line(command="residuals", indeterminate=args.indeterminate))
    print(f"residual groups: {len(groups)} (rows written: {len(rows)})")
    return EXIT_OK


def cmd_logit(args) -> int:
    result = _ingest_from_args(args)
    tours = sorted({pm.record.tour for pm in result.processed})
    header = ("tour", "beta1", "se", "odds_ratio", "ci_low", "ci_high",
              "p_value", "n", "converged", "beta0", "se0")
    rows = []
    for tour in tours:
        data = logit_data(result.processed, tour)
        try:
            fit = fit_logit(data)
        except (ValueError, SeparationError) as err:
            print(f"{tour}: logit not fitted ({err})", file=sys.stderr)
            continue
        rows.append((tour, fit.beta1, fit.se1, fit.odds_ratio, fit.ci_low,
                     fit.ci_high, fit.p_value, fit.n, fit.converged,
                     fit.beta0, fit.se0))
        print(f"{tour}: beta1={fmt(fit.beta1)} se={fmt(fit.se1)} "
              f"odds_ratio={fmt(fit.odds_ratio)} p={fmt(fit.p_value)}")
    _write_csv(args.out, header, rows,
               _meta_line(command="logit", p_value="wald"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="serveorder",
                     description="Serve-order effects on best-of-three tennis totals")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_params(p):
        p.add_argument("--pa", type=float, required=True,
                       help="serve-point win probability of player A")
        p.add_argument("--pb", type=float, required=True,
                       help="serve-point win probability of player B")

    def add_lines(p):
        p.add_argument("--lines", default=",".join(str(l) for l in DEFAULT_LINES),
                       help="comma-separated half-integer total lines")

    p = sub.add_parser("point", help="analytic report for one parameter point")
    add_params(p)
    add_lines(p)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("scan", help="grid scan of serve-order differences")
    p.add_argument("--quantity", choices=QUANTITIES, required=True)
    p.add_argument("--grid-min", type=float, default=None)
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    add_lines(p)
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for the grid (same output as 1)")
    p.add_argument("--out", required=True, help="output file ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="Monte Carlo tally with analytic comparison")
    add_params(p)
    p.add_argument("--server", choices=("A", "B"), default="A")
    p.add_argument("--n", type=int, default=100_000, help="number of matches")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--partitions", type=int, default=1)
    add_lines(p)
    p.add_argument("--out", default=None, help="tally JSON path ('-' for stdout)")
    p.set_defaults(func=cmd_simulate)

    def add_pipeline_args(p, needs_out=True):
        p.add_argument("--input", nargs="+", required=True, help="csv files")
        p.add_argument("--tour", choices=("ATP", "WTA"), default=None,
                       help="tour tag; inferred from file names when omitted")
        p.add_argument("--years", default=None,
                       help="season filter, e.g. 2010-2024 or 2015,2016")
        p.add_argument("--columns", default=None,
                       help="column remapping logical=actual[,logical=actual...]")
        p.add_argument("--indeterminate", choices=("exclude", "average"),
                       default="exclude",
                       help="residual policy for indeterminate matches")
        if needs_out:
            p.add_argument("--out", required=True,
                           help="output file ('-' for stdout)")

    p = sub.add_parser("ingest", help="parse matches to JSONL with a rejection audit")
    add_pipeline_args(p, needs_out=False)
    p.add_argument("--out", default=None, help="records JSONL path")
    p.add_argument("--audit", default=None, help="rejection audit CSV path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("infer", help="first-server inference summary table")
    add_pipeline_args(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("residuals", help="grouped total-games residual statistics")
    add_pipeline_args(p)
    p.set_defaults(func=cmd_residuals)

    p = sub.add_parser("logit", help="logistic regression of first server on serve edge")
    add_pipeline_args(p)
    p.set_defaults(func=cmd_logit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except OSError as err:
        print(f"serveorder: i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, SeparationError, AssertionError) as err:
        print(f"serveorder: {err}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
