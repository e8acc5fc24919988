"""Command-line interface.

Four commands:

- analyze: run one partial order over a trace file with tree clocks,
  vector clocks, or both (lockstep comparison), print a summary,
  optionally append a CSV row per run, list races, or cross-check
  against the brute-force oracle on small inputs.
- gen: write a synthetic trace from the deterministic generator.
- bench: run a (pattern x thread-count x clock) matrix, append all rows
  to a CSV, and optionally emit a dependency-free SVG chart of the
  work ratios.
- selfcheck: run the embedded fixture suite.

Exit codes: 0 success; 1 divergence, race-check mismatch, or assertion
failure; 2 usage or I/O errors. Timing uses a monotonic clock, excludes
parsing, and reports the median over --repeat runs (default 3). Bench
cells can run on a process pool sized by the CLOCKTRACE_WORKERS
environment variable (default 1); rows are written by the parent in
submission order, so output is deterministic regardless of pool size.
"""

import argparse
import csv
import os
import statistics
import sys

from . import selfcheck as selfcheck_mod
from .analyses import CLOCK_KINDS, ORDERS, race_event_indices, run_analysis
from .metrics import CSV_COLUMNS, collect, verify_bounds
from .oracle import ORACLE_MAX_EVENTS, oracle_races, oracle_timestamps
from .trace import TraceParseError, parse_trace, serialize_trace
from .tracegen import PATTERNS, STAR_STYLES, GenSpec, generate

WORKERS_ENV = "CLOCKTRACE_WORKERS"


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, TraceParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return 1


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="clocktrace",
        description="Tree-clock and vector-clock analyses over concurrent traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run one partial order over a trace file")
    p.add_argument("--po", choices=ORDERS, required=True)
    p.add_argument("--clock", choices=CLOCK_KINDS + ("both",), default="both")
    p.add_argument("--input", required=True, help="trace file, or - for stdin")
    p.add_argument("--csv", help="append one CSV row per run to this file")
    p.add_argument("--races", action="store_true", help="print each race report")
    p.add_argument("--oracle", action="store_true",
                   help=f"cross-check against the brute-force oracle (<= {ORACLE_MAX_EVENTS} events)")
    p.add_argument("--debug", action="store_true",
                   help="re-verify structural invariants after every clock operation")
    p.add_argument("--repeat", type=int, default=3, metavar="N",
                   help="timing repetitions; the median is reported (default 3)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("gen", help="write a synthetic trace")
    p.add_argument("--pattern", choices=PATTERNS, required=True)
    p.add_argument("--threads", type=int, required=True)
    p.add_argument("--events", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--lock-count", type=int, default=50, help="skewed_locks only")
    p.add_argument("--hot-fraction", type=float, default=0.2, help="skewed_locks only")
    p.add_argument("--hot-weight", type=int, default=5, help="skewed_locks only")
    p.add_argument("--star-style", choices=STAR_STYLES, default="paired", help="star only")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="run a generator/analysis matrix")
    p.add_argument("--patterns", default=",".join(PATTERNS),
                   help="comma-separated generator patterns (default: all)")
    p.add_argument("--threads", default="10,40,160",
                   help="comma-separated thread counts (default 10,40,160)")
    p.add_argument("--events", type=int, default=0,
                   help="events per trace (default 0 = 100 per thread)")
    p.add_argument("--po", choices=ORDERS, default="hb")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--star-style", choices=STAR_STYLES, default="paired")
    p.add_argument("--csv", default="bench.csv", help="output CSV (default bench.csv)")
    p.add_argument("--svg", help="also write a work-ratio bar chart here")
    p.add_argument("--repeat", type=int, default=3, metavar="N")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("selfcheck", help="run the embedded fixture suite")
    p.set_defaults(func=_cmd_selfcheck)
    return parser


def _read_trace(path):
    if path == "-":
        return parse_trace(sys.stdin.read())
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace(fh.read())


def _timed_runs(trace, po, kind, repeat, debug, record_timestamps):
    """Run `repeat` times; return (last run, median elapsed ms)."""
    elapsed = []
    run = None
    for _ in range(max(1, repeat)):
        run = run_analysis(trace, po, kind, debug=debug,
                           record_timestamps=record_timestamps)
        elapsed.append(run.elapsed)
    return run, statistics.median(elapsed) * 1000.0


def _append_csv(path, records):
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.row())


def _summary_line(rec):
    pairs = "-" if rec.pairs_unordered is None else rec.pairs_unordered
    return (
        f"po={rec.po} clock={rec.clock} events={rec.events} threads={rec.threads} "
        f"locks={rec.locks} vars={rec.vars} races={rec.races} "
        f"pairs_unordered={pairs} vt_work={rec.vt_work} "
        f"impl_work={rec.impl_work} deep_copies={rec.deep_copies} "
        f"time_ms={rec.time_ms:.3f}"
    )


def _cmd_analyze(args):
    trace = _read_trace(args.input)
    kinds = [args.clock] if args.clock != "both" else ["tree", "vector"]
    compare = args.clock == "both" or args.oracle
    if args.oracle and len(trace) > ORACLE_MAX_EVENTS:
        print(f"error: --oracle is limited to {ORACLE_MAX_EVENTS} events, "
              f"trace has {len(trace)}", file=sys.stderr)
        return 2

    name = "-" if args.input == "-" else os.path.basename(args.input)
    runs, records = {}, []
    for kind in kinds:
        run, ms = _timed_runs(trace, args.po, kind, args.repeat,
                              args.debug, record_timestamps=compare)
        verify_bounds(run)
        runs[kind] = run
        rec = collect(run, name, time_ms=ms)
        records.append(rec)
        print(_summary_line(rec))

    if args.races:
        shown = runs[kinds[0]].races
        for r in shown:
            print(f"race {r.kind} var=x{r.var} earlier=t{r.earlier.tid}@{r.earlier.clk} "
                  f"later=t{r.later.tid}@{r.later.clk} event={r.index}")

    if args.csv:
        _append_csv(args.csv, records)

    if args.clock == "both":
        a, b = runs["tree"], runs["vector"]
        if a.timestamps != b.timestamps:
            print("divergence: tree and vector timestamps differ", file=sys.stderr)
            return 1
        if a.races != b.races:
            print("divergence: tree and vector race reports differ", file=sys.stderr)
            return 1
        if a.vt_work != b.vt_work:
            print(f"divergence: vt_work differs (tree={a.vt_work}, vector={b.vt_work})",
                  file=sys.stderr)
            return 1
        print("clocks agree: timestamps, races, and entries changed identical")

    if args.oracle:
        run = runs[kinds[0]]
        if list(run.timestamps) != oracle_timestamps(trace, args.po):
            print("divergence: engine timestamps differ from oracle", file=sys.stderr)
            return 1
        if race_event_indices(trace, run.races) != oracle_races(trace, args.po):
            print("divergence: engine races differ from oracle", file=sys.stderr)
            return 1
        print("oracle agreement: timestamps and races match")
    return 0


def _cmd_gen(args):
    spec = GenSpec(
        pattern=args.pattern,
        threads=args.threads,
        events=args.events,
        seed=args.seed,
        lock_count=args.lock_count,
        hot_fraction=args.hot_fraction,
        hot_weight=args.hot_weight,
        star_style=args.star_style,
    )
    text = serialize_trace(generate(spec))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _bench_cell(cell):
    """One (pattern, threads, clock) cell; module-level so pools can pickle it."""
    (pattern, threads, events, seed, star_style, po, kind, repeat) = cell
    spec = GenSpec(pattern, threads, events, seed=seed, star_style=star_style)
    trace = generate(spec)
    elapsed = []
    run = None
    for _ in range(max(1, repeat)):
        run = run_analysis(trace, po, kind, count_unordered=False)
        elapsed.append(run.elapsed)
    verify_bounds(run)
    name = f"{pattern}-k{threads}"
    if pattern == "star":
        name += f"-{star_style}"
    return collect(run, name, time_ms=statistics.median(elapsed) * 1000.0)


def _cmd_bench(args):
    patterns = [p.strip() for p in args.patterns.split(",") if p.strip()]
    for p in patterns:
        if p not in PATTERNS:
            print(f"error: unknown pattern {p!r}", file=sys.stderr)
            return 2
    try:
        grid = [int(s) for s in args.threads.split(",") if s.strip()]
    except ValueError:
        print(f"error: bad thread grid {args.threads!r}", file=sys.stderr)
        return 2

    cells = []
    for pattern in patterns:
        for k in grid:
            n = args.events if args.events else 100 * k
            for kind in ("tree", "vector"):
                cells.append((pattern, k, n, args.seed, args.star_style,
                              args.po, kind, args.repeat))

    workers = int(os.environ.get(WORKERS_ENV, "1") or "1")
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_bench_cell, cells))
    else:
        records = [_bench_cell(c) for c in cells]

    _append_csv(args.csv, records)
    for rec in records:
        print(f"{rec.trace}: {_summary_line(rec)}")
    _print_speedups(records)
    if args.svg:
        _write_ratio_chart(args.svg, records)
        print(f"wrote {args.svg}")
    return 0


def _print_speedups(records):
    """Informational wall-clock comparison per (trace, po); no threshold."""
    by_cell = {}
    for rec in records:
        by_cell.setdefault((rec.trace, rec.po), {})[rec.clock] = rec
    for (name, po), kinds in sorted(by_cell.items()):
        if "tree" in kinds and "vector" in kinds and kinds["tree"].time_ms > 0:
            ratio = kinds["vector"].time_ms / kinds["tree"].time_ms
            print(f"speedup {name} {po}: vector/tree wall time = {ratio:.2f}x")


def _write_ratio_chart(path, records):
    """Grouped bar chart of impl_work / vt_work per cell, one bar per
    clock kind. Hand-written SVG, no dependencies, deterministic."""
    cells = {}
    for rec in records:
        if rec.vt_work:
            cells.setdefault((rec.trace, rec.po), {})[rec.clock] = (
                rec.impl_work / rec.vt_work
            )
    groups = sorted(cells.items())
    if not groups:
        raise ValueError("no rows with nonzero vt_work to chart")

    bar_w, gap, group_gap, left, top, plot_h = 18, 4, 26, 60, 30, 220
    colors = {"tree": "#2a7f4f", "vector": "#9e3a3a"}
    max_ratio = max(max(kinds.values()) for _, kinds in groups)
    scale = plot_h / max_ratio
    group_w = 2 * bar_w + gap
    width = left + len(groups) * (group_w + group_gap) + 20
    height = top + plot_h + 70

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{left}" y="16" font-size="13">work per changed entry '
        f'(impl_work / vt_work)</text>',
        f'<line x1="{left - 6}" y1="{top + plot_h}" x2="{width - 10}" '
        f'y2="{top + plot_h}" stroke="#444"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        y = top + plot_h - frac * plot_h
        parts.append(f'<text x="{left - 54}" y="{y + 4}">{frac * max_ratio:.1f}</text>')
        parts.append(f'<line x1="{left - 6}" y1="{y}" x2="{left}" y2="{y}" stroke="#444"/>')
    x = left
    for (name, po), kinds in groups:
        for j, kind in enumerate(("tree", "vector")):
            if kind not in kinds:
                continue
            ratio = kinds[kind]
            h = ratio * scale
            bx = x + j * (bar_w + gap)
            by = top + plot_h - h
            parts.append(f'<rect x="{bx:.1f}" y="{by:.1f}" width="{bar_w}" '
                         f'height="{h:.1f}" fill="{colors[kind]}"/>')
            parts.append(f'<text x="{bx:.1f}" y="{by - 3:.1f}" font-size="9">'
                         f'{ratio:.1f}</text>')
        label_x = x + group_w / 2
        label_y = top + plot_h + 12
        parts.append(f'<text x="{label_x:.1f}" y="{label_y}" font-size="9" '
                     f'text-anchor="middle" transform="rotate(30 {label_x:.1f} '
                     f'{label_y})">{name} {po}</text>')
        x += group_w + group_gap
    ly = height - 14
    parts.append(f'<rect x="{left}" y="{ly - 10}" width="10" height="10" fill="{colors["tree"]}"/>')
    parts.append(f'<text x="{left + 14}" y="{ly}">tree</text>')
    parts.append(f'<rect x="{left + 60}" y="{ly - 10}" width="10" height="10" fill="{colors["vector"]}"/>')
    parts.append(f'<text x="{left + 74}" y="{ly}">vector</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def _cmd_selfcheck(args):
    failures = selfcheck_mod.run(report=print)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
