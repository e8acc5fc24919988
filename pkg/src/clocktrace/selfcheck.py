"""Embedded fixture suite behind the `selfcheck` CLI command.

Everything here is self-contained and deterministic: a 16-event lock
trace walked through event by event with its expected per-event
timestamps and two expected tree shapes, two small traces spotlighting
the join prunings (the final acquire must touch fewer nodes than a flat
vector scan), pinned vector-clock arithmetic, and a randomized
mini-sweep cross-checking both engines against the brute-force oracle
with debug assertions on.

Each check returns a list of failure strings; `run` aggregates them.
"""

from .analyses import HB, ORDERS, race_event_indices, run_analysis
from .metrics import verify_bounds, vtwork
from .oracle import oracle_races, oracle_timestamps
from .trace import ACQ, REL, READ, WRITE, Event, Trace, parse_trace
from .tracegen import SplitMix64
from .vclock import vt_increment, vt_join, vt_leq

# A five-thread, three-lock trace whose processing exercises joins that
# carry whole subtrees, nested acquires, and an early-exit reacquire.
WALKTHROUGH_TRACE = """\
t1 acq l1
t1 rel l1
t4 acq l2
t4 rel l2
t5 acq l3
t5 rel l3
t3 acq l1
t3 acq l3
t3 rel l3
t3 rel l1
t4 acq l2
t4 rel l2
t2 acq l1
t2 rel l1
t2 acq l2
t2 rel l2
"""

# Thread ids below are interned in order of first appearance:
# t1 -> 0, t4 -> 1, t5 -> 2, t3 -> 3, t2 -> 4.
WALKTHROUGH_TIMESTAMPS = [
    (1, 0, 0, 0, 0),
    (2, 0, 0, 0, 0),
    (0, 1, 0, 0, 0),
    (0, 2, 0, 0, 0),
    (0, 0, 1, 0, 0),
    (0, 0, 2, 0, 0),
    (2, 0, 0, 1, 0),
    (2, 0, 2, 2, 0),
    (2, 0, 2, 3, 0),
    (2, 0, 2, 4, 0),
    (0, 3, 0, 0, 0),
    (0, 4, 0, 0, 0),
    (2, 0, 2, 4, 1),
    (2, 0, 2, 4, 2),
    (2, 4, 2, 4, 3),
    (2, 4, 2, 4, 4),
]

# Tree of the acting thread right after the eighth event (t3 has pulled
# l1's and l3's releases under its root)...
WALKTHROUGH_DUMP_E8 = (
    "tid=3 clk=2 aclk=⊥\n"
    "  tid=2 clk=2 aclk=2\n"
    "  tid=0 clk=2 aclk=1\n"
)
# ...and after the fifteenth (t2 adopts t4's root and keeps t3's whole
# subtree in place one level down).
WALKTHROUGH_DUMP_E15 = (
    "tid=4 clk=3 aclk=⊥\n"
    "  tid=1 clk=4 aclk=3\n"
    "  tid=3 clk=4 aclk=1\n"
    "    tid=2 clk=2 aclk=2\n"
    "    tid=0 clk=2 aclk=1\n"
)


def _sync(t, lock):
    return f"{t} acq {lock}\n{t} rel {lock}\n"


# Direct-monotonicity showcase: the final acquire pulls a clock whose
# subtree is already fully known to the target, so the traversal stops
# at the subtree's root instead of walking all of it.
INTUITION_DIRECT = (
    _sync("t1", "l0") + _sync("t2", "l0") + _sync("t3", "l0")
    + _sync("t2", "l1") + _sync("t4", "l1") + _sync("t3", "l2")
    + "t4 acq l2\n"
)

# Indirect-monotonicity showcase: a child edge carries an attachment
# time the target already covers, so the siblings attached before it
# are skipped without being visited.
INTUITION_INDIRECT = (
    _sync("t1", "l0") + _sync("t3", "l0") + _sync("t2", "l1")
    + _sync("t3", "l1") + _sync("t4", "l1") + _sync("t3", "l2")
    + "t4 acq l2\n"
)

# Cost of the spotlight event (local increment plus the acquire's join):
# the tree walk touches 3 nodes, a flat vector always scans all 4.
INTUITION_TREE_COST = 4
INTUITION_VECTOR_COST = 5


def check_walkthrough():
    fails = []
    trace = parse_trace(WALKTHROUGH_TRACE)
    dumps = {}

    def grab(i, ev, engine):
        if i in (7, 14):
            dumps[i] = engine.thread_clocks[ev.tid].dump()

    for kind in ("tree", "vector"):
        run = run_analysis(
            trace, HB, kind, debug=True, record_timestamps=True,
            inspect=grab if kind == "tree" else None,
        )
        if list(run.timestamps) != WALKTHROUGH_TIMESTAMPS:
            fails.append(f"walkthrough {kind}: timestamps diverge: {run.timestamps}")
        if run.races:
            fails.append(f"walkthrough {kind}: unexpected races {run.races}")
    if dumps.get(7) != WALKTHROUGH_DUMP_E8:
        fails.append(f"walkthrough: tree after event 8:\n{dumps.get(7)}")
    if dumps.get(14) != WALKTHROUGH_DUMP_E15:
        fails.append(f"walkthrough: tree after event 15:\n{dumps.get(14)}")
    if oracle_timestamps(trace, HB) != WALKTHROUGH_TIMESTAMPS:
        fails.append("walkthrough: oracle disagrees with pinned timestamps")
    return fails


def check_intuitions():
    fails = []
    for name, text in (("direct", INTUITION_DIRECT), ("indirect", INTUITION_INDIRECT)):
        trace = parse_trace(text)
        last = len(trace.events) - 1
        costs = {}
        for kind in ("tree", "vector"):
            marks = {}

            def grab(i, ev, engine):
                marks[i] = engine.counter.impl_work

            run = run_analysis(
                trace, HB, kind, debug=True, record_timestamps=True, inspect=grab
            )
            costs[kind] = marks[last] - marks[last - 1]
            if list(run.timestamps) != oracle_timestamps(trace, HB):
                fails.append(f"intuition {name} {kind}: timestamps diverge")
        if costs["tree"] != INTUITION_TREE_COST:
            fails.append(f"intuition {name}: tree spotlight cost {costs['tree']} != {INTUITION_TREE_COST}")
        if costs["vector"] != INTUITION_VECTOR_COST:
            fails.append(f"intuition {name}: vector spotlight cost {costs['vector']} != {INTUITION_VECTOR_COST}")
    return fails


def check_vector_arithmetic():
    fails = []
    a = [11, 6, 5, 32, 14, 20]
    b = [28, 6, 9, 45, 17, 26]
    c = [28, 5, 9, 45, 17, 26]
    if not vt_leq(a, b):
        fails.append("vector arithmetic: pointwise order on the pinned pair")
    if vt_leq(b, a):
        fails.append("vector arithmetic: pointwise order is not antisymmetric here")
    if vt_join(c, a) != tuple(b):
        fails.append(f"vector arithmetic: join gave {vt_join(c, a)}")
    if vt_increment([27, 5], 0) != (28, 5):
        fails.append("vector arithmetic: increment")
    return fails


def random_trace(seed, events=120, threads=4, locks=3, variables=3):
    """Small legal trace, deterministic in seed (lock discipline holds)."""
    if locks == 0 and variables == 0:
        raise ValueError("need at least one lock or variable to emit events")
    rng = SplitMix64(seed)
    held = {}
    out = []
    while len(out) < events:
        t = rng.below(threads)
        c = rng.below(10)
        if c < 2:
            free = [l for l in range(locks) if l not in held]
            if free:
                lock = free[rng.below(len(free))]
                held[lock] = t
                out.append(Event(t, ACQ, lock))
        elif c < 4:
            mine = [l for l, h in held.items() if h == t]
            if mine:
                lock = mine[rng.below(len(mine))]
                del held[lock]
                out.append(Event(t, REL, lock))
        elif c < 7:
            if variables:
                out.append(Event(t, READ, rng.below(variables)))
        elif variables:
            out.append(Event(t, WRITE, rng.below(variables)))
    return Trace(out, threads, locks, variables)


def check_sweep(seeds=range(6)):
    fails = []
    for seed in seeds:
        trace = random_trace(seed)
        for po in ORDERS:
            want_ts = oracle_timestamps(trace, po)
            want_races = oracle_races(trace, po)
            want_vt = vtwork(trace, po)
            for kind in ("tree", "vector"):
                run = run_analysis(trace, po, kind, debug=True, record_timestamps=True)
                where = f"sweep seed={seed} po={po} {kind}"
                if list(run.timestamps) != want_ts:
                    fails.append(f"{where}: timestamps diverge from oracle")
                if race_event_indices(trace, run.races) != want_races:
                    fails.append(f"{where}: races diverge from oracle")
                if run.vt_work != want_vt:
                    fails.append(f"{where}: vt_work {run.vt_work} != snapshot-diff {want_vt}")
                try:
                    verify_bounds(run)
                except AssertionError as exc:
                    fails.append(f"{where}: {exc}")
    return fails


CHECKS = (
    ("walkthrough", check_walkthrough),
    ("intuitions", check_intuitions),
    ("vector arithmetic", check_vector_arithmetic),
    ("randomized sweep", check_sweep),
)


def run(report=print):
    """Run every embedded check; returns the list of failure strings."""
    failures = []
    for name, check in CHECKS:
        fails = check()
        failures.extend(fails)
        if report is not None:
            status = "ok" if not fails else f"FAIL ({len(fails)})"
            report(f"selfcheck {name}: {status}")
            for f in fails:
                report(f"  - {f}")
    return failures
