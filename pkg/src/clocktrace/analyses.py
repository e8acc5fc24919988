"""Streaming partial-order analyses over traces.

Three orders, one engine. Every event first advances its thread's clock by
one, then performs the order-specific joins, then runs a uniform set of
race checks against per-variable epochs, then updates the bookkeeping:

- "hb":  acquires join the lock's clock; releases copy the thread's clock
  into it. Accesses touch no clocks, so conflicting accesses stay
  unordered unless locks order them, and the checks report races.
- "shb": additionally, each read joins the last-write clock of its
  variable, ordering every write before the reads that see it. Races
  between a write and a later read can no longer fire; write-write and
  read-write races still do. Sound first-race reports.
- "maz": additionally, each write joins the last-write clock and the
  clocks of all intervening readers, ordering all conflicting accesses.
  The same checks run but, by construction, nothing ever fires.

Race checks follow the epoch discipline: one (thread, clock) pair per
variable for the last write, one per reader thread since that write. At
most one race is reported per (variable, later access): write-write takes
priority, then the first unordered reader in first-read order. Race kinds
name the earlier access first ("write-read" = earlier write, later read).
"""

import time
from dataclasses import dataclass

from .trace import ACQ, REL, READ, WRITE, Trace
from .vclock import Epoch, VectorClock, WorkCounter
from .treeclock import TreeClock

HB = "hb"
SHB = "shb"
MAZ = "maz"
ORDERS = (HB, SHB, MAZ)

CLOCK_KINDS = ("tree", "vector")


@dataclass(frozen=True)
class RaceReport:
    kind: str  # "write-write" | "write-read" | "read-write"
    var: int
    earlier: Epoch
    later: Epoch
    index: int  # position of the later access in the trace


@dataclass
class AnalysisRun:
    po: str
    clock_kind: str
    events: int
    threads: int
    locks: int
    vars: int
    races: list
    counter: WorkCounter
    deep_copies: int  # non-fresh last-write copies that had to rebuild
    fresh_copies: int  # first write to a variable (empty target)
    unordered_pairs: int | None
    timestamps: list | None
    elapsed: float  # seconds spent processing events (parsing excluded)

    @property
    def vt_work(self):
        return self.counter.vt_work

    @property
    def impl_work(self):
        return self.counter.impl_work


class Engine:
    """One analysis in progress. Feed events in trace order via process()."""

    def __init__(self, po, thread_count, clock_kind="tree", *, debug=False,
                 count_unordered=True, record_timestamps=False):
        if po not in ORDERS:
            raise ValueError(f"unknown partial order {po!r}")
        if clock_kind not in CLOCK_KINDS:
            raise ValueError(f"unknown clock kind {clock_kind!r}")
        self.po = po
        self.clock_kind = clock_kind
        self.k = thread_count
        self.counter = WorkCounter(debug=debug)
        cls = TreeClock if clock_kind == "tree" else VectorClock
        self._owned = lambda t: cls.owned(t, thread_count, self.counter)
        self._aux = lambda: cls.aux(thread_count, self.counter)
        self.thread_clocks = [self._owned(t) for t in range(thread_count)]
        self.lock_clocks = {}
        self.write_clocks = {}  # var -> clock of the last write (shb/maz)
        self.read_clocks = {}  # (var, tid) -> clock at that thread's last read (maz)
        self.write_epochs = {}  # var -> Epoch of last write
        self.read_epochs = {}  # var -> {tid: clk since last write}, first-read order
        self.races = []
        self.deep_copies = 0
        self.fresh_copies = 0
        self.unordered_pairs = 0 if count_unordered else None
        self._access_log = {} if count_unordered else None
        self.timestamps = [] if record_timestamps else None
        self.index = 0

    def process(self, ev):
        i = self.index
        self.index = i + 1
        t = ev.tid
        C = self.thread_clocks[t]
        C.increment()
        po = self.po
        if ev.op == ACQ:
            L = self.lock_clocks.get(ev.target)
            if L is not None:
                C.join(L)
        elif ev.op == REL:
            L = self.lock_clocks.get(ev.target)
            if L is None:
                L = self.lock_clocks[ev.target] = self._aux()
            L.monotone_copy(C)
        elif ev.op == READ:
            x = ev.target
            if po != HB:
                lw = self.write_clocks.get(x)
                if lw is not None:
                    C.join(lw)
            self._check_read(x, t, C, i)
            if po == MAZ:
                rc = self.read_clocks.get((x, t))
                if rc is None:
                    rc = self.read_clocks[(x, t)] = self._aux()
                rc.monotone_copy(C)
            reads = self.read_epochs.setdefault(x, {})
            reads[t] = C.get(t)  # re-reads keep the thread's original position
        elif ev.op == WRITE:
            x = ev.target
            lw = self.write_clocks.get(x)
            if po == MAZ:
                rts = self.read_epochs.get(x, ())
                # vt_work counts entries changed per event, not per join:
                # with several join sources one entry may rise twice, so
                # net the tally against before/after snapshots
                multi = (lw is not None) + len(rts) > 1
                if multi:
                    pre = C.flatten()
                    vt0 = self.counter.vt_work
                if lw is not None:
                    C.join(lw)
                for rt in rts:
                    C.join(self.read_clocks[(x, rt)])
                if multi:
                    net = sum(1 for a, b in zip(pre, C.flatten()) if a != b)
                    self.counter.vt_work = vt0 + net
            self._check_write(x, t, C, i)
            if po == SHB:
                # the last write need not be ordered before us; test first
                if lw is None:
                    lw = self.write_clocks[x] = self._aux()
                    self.fresh_copies += 1
                    lw.copy_check_monotone(C)
                else:
                    # a full rebuild is forced exactly when this write is
                    # unordered with the previous one — an O(1) epoch test
                    # that both clock structures answer the same way
                    ew = self.write_epochs[x]
                    forced = C.get(ew.tid) < ew.clk
                    if forced:
                        self.deep_copies += 1
                    status = lw.copy_check_monotone(C)
                    if self.counter.debug and self.clock_kind == "tree":
                        assert status == ("deep" if forced else "monotone")
            elif po == MAZ:
                # we just joined the last write, so the copy is monotone
                if lw is None:
                    lw = self.write_clocks[x] = self._aux()
                    self.fresh_copies += 1
                lw.monotone_copy(C)
            self.write_epochs[x] = Epoch(t, C.get(t))
            self.read_epochs[x] = {}
        if self._access_log is not None and (ev.op == READ or ev.op == WRITE):
            self._count_unordered(ev, C)
        if self.timestamps is not None:
            self.timestamps.append(C.flatten())

    def _check_read(self, x, t, C, i):
        ew = self.write_epochs.get(x)
        if ew is not None and C.get(ew.tid) < ew.clk:
            self.races.append(
                RaceReport("write-read", x, ew, Epoch(t, C.get(t)), i)
            )

    def _check_write(self, x, t, C, i):
        ew = self.write_epochs.get(x)
        if ew is not None and C.get(ew.tid) < ew.clk:
            self.races.append(
                RaceReport("write-write", x, ew, Epoch(t, C.get(t)), i)
            )
            return
        for rt, rc in self.read_epochs.get(x, {}).items():
            if C.get(rt) < rc:
                self.races.append(
                    RaceReport("read-write", x, Epoch(rt, rc), Epoch(t, C.get(t)), i)
                )
                return

    def _count_unordered(self, ev, C):
        # a prior access (t2, c2) is ordered before this event iff this
        # event's timestamp covers t2 through c2 (its joins are all done)
        log = self._access_log.setdefault(ev.target, [])
        wr = ev.op == WRITE
        for t2, c2, w2 in log:
            if (w2 or wr) and C.get(t2) < c2:
                self.unordered_pairs += 1
        log.append((ev.tid, C.get(ev.tid), wr))


def run_analysis(trace, po, clock_kind="tree", *, debug=False,
                 count_unordered=True, record_timestamps=False, inspect=None):
    """Run one analysis over a whole trace and return an AnalysisRun.

    With debug set, structural invariants are re-verified after every
    clock operation (slow; for tests). inspect, if given, is called as
    inspect(index, event, engine) after each event.
    """
    engine = Engine(
        po, trace.thread_count, clock_kind, debug=debug,
        count_unordered=count_unordered, record_timestamps=record_timestamps,
    )
    t0 = time.perf_counter()
    if inspect is None:
        for ev in trace.events:
            engine.process(ev)
    else:
        for i, ev in enumerate(trace.events):
            engine.process(ev)
            inspect(i, ev, engine)
    elapsed = time.perf_counter() - t0
    return AnalysisRun(
        po=po,
        clock_kind=clock_kind,
        events=len(trace),
        threads=trace.thread_count,
        locks=trace.lock_count,
        vars=trace.var_count,
        races=engine.races,
        counter=engine.counter,
        deep_copies=engine.deep_copies,
        fresh_copies=engine.fresh_copies,
        unordered_pairs=engine.unordered_pairs,
        timestamps=engine.timestamps,
        elapsed=elapsed,
    )


def run_hb(trace, clock_kind="tree", **kw):
    kw.setdefault("record_timestamps", True)
    return run_analysis(trace, HB, clock_kind, **kw)


def run_shb(trace, clock_kind="tree", **kw):
    kw.setdefault("record_timestamps", True)
    return run_analysis(trace, SHB, clock_kind, **kw)


def run_maz(trace, clock_kind="tree", **kw):
    kw.setdefault("record_timestamps", True)
    return run_analysis(trace, MAZ, clock_kind, **kw)


def race_event_indices(trace, races):
    """Map race reports to (kind, var, earlier_index, later_index) using
    each thread's event positions; the brute-force oracle reports races
    in this index form."""
    nth = {}
    for i, ev in enumerate(trace.events):
        nth.setdefault(ev.tid, []).append(i)
    return [(r.kind, r.var, nth[r.earlier.tid][r.earlier.clk - 1], r.index)
            for r in races]


def unordered_conflicting_pairs(trace, timestamps):
    """Count conflicting access pairs (same variable, at least one write)
    whose recorded timestamps are incomparable. Works per variable; in
    these orders an earlier event is ordered at-or-before a later one
    exactly when its timestamp is pointwise below the later one's."""
    by_var = {}
    count = 0
    for i, ev in enumerate(trace.events):
        if ev.op == READ or ev.op == WRITE:
            prior = by_var.setdefault(ev.target, [])
            ts = timestamps[i]
            wr = ev.op == WRITE
            for ts2, t2, w2 in prior:
                if (w2 or wr) and any(a > b for a, b in zip(ts2, ts)):
                    count += 1
            prior.append((ts, ev.tid, wr))
    return count
