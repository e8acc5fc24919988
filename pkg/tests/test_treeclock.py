"""Tests for the tree clock structure.

Covers hand-built trees (display order, integrity, flatten, dump),
differential runs against vector clock mirrors, the join early exit and
its contract error, both copy operations, the masked-max semantics of
sub_root_join, the learned-edge invariant that justifies pruning, and
the pruning soundness checker itself.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clocktrace.analyses import HB, MAZ, run_analysis
from clocktrace.selfcheck import random_trace
from clocktrace.tracegen import GenSpec, SplitMix64, generate
from clocktrace.treeclock import BOT, NIL, TreeClock, pruning_violations
from clocktrace.vclock import ClockContractError, VectorClock, WorkCounter


def build(k, spec, counter=None):
    """White-box constructor: spec is (tid, clk, aclk, [children]) with
    children given in display (most recently attached first) order."""
    tc = TreeClock(k, counter=counter)
    tc.root = spec[0]

    def place(node, parent_tid):
        tid, clk, aclk, kids = node
        tc.clk[tid] = clk
        tc.aclk[tid] = aclk
        tc.intree[tid] = True
        for kid in reversed(kids):
            place(kid, tid)
            tc._link_front(tid, kid[0])

    place(spec, None)
    return tc


# Two four-thread trees with the same root but different histories: in the
# first, thread 3 learned of threads 2 and 1 separately; in the second it
# learned everything through thread 2.
TREE_A = (3, 2, BOT, [(2, 2, 2, []), (1, 2, 1, [(0, 1, 1, [])])])
TREE_B = (3, 2, BOT, [(2, 3, 2, [(1, 1, 2, []), (0, 1, 1, [])])])

TREE_A_FLAT = (1, 2, 2, 2)
TREE_B_FLAT = (1, 1, 3, 2)

TREE_A_DUMP = (
    "tid=3 clk=2 aclk=⊥\n"
    "  tid=2 clk=2 aclk=2\n"
    "  tid=1 clk=2 aclk=1\n"
    "    tid=0 clk=1 aclk=1\n"
)
TREE_B_DUMP = (
    "tid=3 clk=2 aclk=⊥\n"
    "  tid=2 clk=3 aclk=2\n"
    "    tid=1 clk=1 aclk=2\n"
    "    tid=0 clk=1 aclk=1\n"
)


class TestHandBuiltTrees:
    def test_flatten(self):
        assert build(4, TREE_A).flatten() == TREE_A_FLAT
        assert build(4, TREE_B).flatten() == TREE_B_FLAT

    def test_dump(self):
        assert build(4, TREE_A).dump() == TREE_A_DUMP
        assert build(4, TREE_B).dump() == TREE_B_DUMP

    def test_integrity(self):
        build(4, TREE_A).check_integrity()
        build(4, TREE_B).check_integrity()

    def test_get(self):
        a = build(4, TREE_A)
        assert [a.get(t) for t in range(4)] == [1, 2, 2, 2]

    def test_incomparable(self):
        a, b = build(4, TREE_A), build(4, TREE_B)
        assert not a.leq(b)
        assert not b.leq(a)

    def test_leq_reflexive_and_clone(self):
        a = build(4, TREE_A)
        c = a.clone()
        assert a.leq(c) and c.leq(a)
        assert c.dump() == a.dump()
        c.clk[2] = 9
        assert a.clk[2] == 2  # clones share no arrays


class TestBasics:
    def test_owned_starts_at_zero(self):
        t = TreeClock.owned(2, 5)
        assert not t.is_empty()
        assert t.root == 2
        assert t.flatten() == (0, 0, 0, 0, 0)

    def test_aux_starts_empty(self):
        l = TreeClock.aux(3)
        assert l.is_empty()
        assert l.dump() == "(empty)\n"
        assert l.flatten() == (0, 0, 0)
        assert l.get(0) == 0
        l.check_integrity()

    def test_empty_leq_anything(self):
        l = TreeClock.aux(3)
        t = TreeClock.owned(0, 3)
        assert l.leq(t)
        assert l.leq(TreeClock.aux(3))

    def test_increment_empty_raises(self):
        with pytest.raises(ClockContractError):
            TreeClock.aux(3).increment()

    def test_increment(self):
        c = WorkCounter()
        t = TreeClock.owned(1, 3, c)
        t.increment()
        t.increment(4)
        assert t.flatten() == (0, 5, 0)
        assert c.increments == 2
        assert c.impl_work == 2
        assert c.vt_work == 2  # one entry changed per increment event


class TestJoin:
    def _lock_snapshot(self, k, counter):
        """An owned clock at time 1 published through an aux clock."""
        a = TreeClock.owned(0, k, counter)
        a.increment()
        l = TreeClock.aux(k, counter)
        l.monotone_copy(a)
        return a, l

    def test_join_brings_new_subtree(self):
        c = WorkCounter()
        a, l = self._lock_snapshot(4, c)
        b = TreeClock.owned(1, 4, c)
        b.increment()
        b.join(l)
        assert b.flatten() == (1, 1, 0, 0)
        b.check_integrity()
        assert b.dump() == (
            "tid=1 clk=1 aclk=⊥\n"
            "  tid=0 clk=1 aclk=1\n"
        )

    def test_join_early_exit_is_constant_and_silent(self):
        c = WorkCounter()
        _, l = self._lock_snapshot(4, c)
        b = TreeClock.owned(1, 4, c)
        b.increment()
        b.join(l)
        before = b.dump()
        w0, vt0 = c.impl_work, c.vt_work
        b.join(l)  # nothing new: root of l already known
        assert c.impl_work == w0 + 1
        assert c.vt_work == vt0
        assert b.dump() == before

    def test_join_empty_source_is_noop(self):
        b = TreeClock.owned(1, 3)
        b.increment()
        before = b.dump()
        b.join(TreeClock.aux(3))
        assert b.dump() == before

    def test_join_source_ahead_on_own_thread_raises(self):
        c = WorkCounter()
        a = TreeClock.owned(0, 3, c)
        a.increment()
        a.increment()
        l = TreeClock.aux(3, c)
        l.monotone_copy(a)
        fresh = TreeClock.owned(0, 3, c)
        fresh.increment()  # at time 1, but l claims thread 0 reached 2
        with pytest.raises(ClockContractError):
            fresh.join(l)


class TestMonotoneCopy:
    def test_onto_empty_becomes_deep_copy(self):
        c = WorkCounter()
        a = TreeClock.owned(0, 4, c)
        a.increment()
        l = TreeClock.aux(4, c)
        w0, cp0 = c.impl_work, c.copies
        l.monotone_copy(a)
        assert c.copies == cp0 + 1
        assert c.impl_work == w0 + 2  # two array touches per copied node
        assert l.flatten() == a.flatten()
        assert l.root == a.root
        l.check_integrity()

    def test_handoff_reroots(self):
        c = WorkCounter()
        t0 = TreeClock.owned(0, 3, c)
        t1 = TreeClock.owned(1, 3, c)
        lk = TreeClock.aux(3, c)
        t0.increment()
        lk.monotone_copy(t0)
        t1.increment()
        t1.join(lk)
        t1.increment()
        lk.monotone_copy(t1)
        assert lk.root == 1
        assert lk.aclk[lk.root] == BOT
        assert lk.flatten() == t1.flatten() == (1, 2, 0)
        lk.check_integrity()
        assert lk.dump() == (
            "tid=1 clk=2 aclk=⊥\n"
            "  tid=0 clk=1 aclk=1\n"
        )

    def test_debug_precondition_rejects_unordered_source(self):
        c = WorkCounter(debug=True)
        t0 = TreeClock.owned(0, 3, c)
        t1 = TreeClock.owned(1, 3, c)
        lk = TreeClock.aux(3, c)
        t0.increment()
        lk.monotone_copy(t0)
        t1.increment()  # t1 never joined lk, so lk is not below t1
        with pytest.raises(ClockContractError):
            lk.monotone_copy(t1)

    def test_steady_state_handoff_cost_stays_small(self):
        # Server/client rounds over shared locks: once the tree has settled,
        # re-rooting the lock clock touches a handful of nodes while a
        # vector copy always rewrites all k entries.
        k = 30
        trace = generate(GenSpec(pattern="star", star_style="relay",
                                 threads=k, events=3000, seed=7))
        deltas = []
        state = {"prev": 0}

        def watch(i, ev, engine):
            w = engine.counter.impl_work
            if ev.op == "rel" and i > len(trace.events) // 10:
                deltas.append(w - state["prev"])
            state["prev"] = w

        run_analysis(trace, HB, "tree", inspect=watch)
        assert deltas, "trace has no steady-state releases"
        deltas.sort()
        median = deltas[len(deltas) // 2]
        assert median <= 8
        # the same event under vector clocks costs exactly k + 1
        assert median < k + 1


class TestCopyCheckMonotone:
    def test_empty_target_reports_deep(self):
        c = WorkCounter()
        a = TreeClock.owned(0, 4, c)
        a.increment()
        l = TreeClock.aux(4, c)
        w0, cp0 = c.impl_work, c.copies
        assert l.copy_check_monotone(a) == "deep"
        assert c.copies == cp0 + 1
        assert c.impl_work == w0 + 2
        assert l.flatten() == (1, 0, 0, 0)

    def test_unordered_source_reports_deep_with_full_cost(self):
        c = WorkCounter()
        a = TreeClock.owned(0, 4, c)
        a.increment()
        b = TreeClock.owned(1, 4, c)
        b.increment()
        l = TreeClock.aux(4, c)
        l.copy_check_monotone(a)
        w0 = c.impl_work
        # b knows nothing of thread 0, so this replacement is not monotone
        assert l.copy_check_monotone(b) == "deep"
        # deep copy rebuilds from scratch: 2 touches per source node plus
        # one per node discarded from the old tree
        assert c.impl_work == w0 + 2 * 1 + 1
        assert l.flatten() == (0, 1, 0, 0)
        assert l.root == 1
        l.check_integrity()

    def test_source_above_root_reports_monotone(self):
        c = WorkCounter()
        a = TreeClock.owned(0, 4, c)
        a.increment()
        b = TreeClock.owned(1, 4, c)
        b.increment()
        l = TreeClock.aux(4, c)
        l.copy_check_monotone(a)
        l.copy_check_monotone(b)  # deep; l now rooted at thread 1
        b.increment()
        w0 = c.impl_work
        # the O(1) test: b's own entry moved past l's root time
        assert l.copy_check_monotone(b) == "monotone"
        assert c.impl_work == w0 + 2
        assert l.flatten() == (0, 2, 0, 0)
        assert l.root == 1
        l.check_integrity()


# --- differential against vector clocks ----------------------------------


class Mirror:
    """Apply the same clock-level script to tree and vector clocks."""

    def __init__(self, k, locks):
        self.k = k
        self.tcnt = WorkCounter()
        self.vcnt = WorkCounter()
        self.trees = [TreeClock.owned(t, k, self.tcnt) for t in range(k)]
        self.vecs = [VectorClock.owned(t, k, self.vcnt) for t in range(k)]
        self.tlocks = [TreeClock.aux(k, self.tcnt) for _ in range(locks)]
        self.vlocks = [VectorClock.aux(k, self.vcnt) for _ in range(locks)]

    def step(self, op, t, l):
        if op == "inc":
            self.trees[t].increment()
            self.vecs[t].increment()
            touched = [(self.trees[t], self.vecs[t])]
        elif op == "acq":
            self.trees[t].increment()
            self.vecs[t].increment()
            self.trees[t].join(self.tlocks[l])
            self.vecs[t].join(self.vlocks[l])
            touched = [(self.trees[t], self.vecs[t])]
        else:  # rel
            self.trees[t].increment()
            self.vecs[t].increment()
            self.tlocks[l].monotone_copy(self.trees[t])
            self.vlocks[l].monotone_copy(self.vecs[t])
            touched = [(self.trees[t], self.vecs[t]),
                       (self.tlocks[l], self.vlocks[l])]
        for tree, vec in touched:
            assert tree.flatten() == vec.flatten()
            tree.check_integrity()

    def finish(self):
        pairs = list(zip(self.trees, self.vecs)) + list(zip(self.tlocks, self.vlocks))
        for tree, vec in pairs:
            assert tree.flatten() == vec.flatten()
            tree.check_integrity()
        assert self.tcnt.vt_work == self.vcnt.vt_work
        assert self.tcnt.increments == self.vcnt.increments
        trees = [t for t, _ in pairs if not t.is_empty()]
        for a in trees:
            for b in trees:
                assert pruning_violations(a, b) == []


def run_script(seed, k, locks, steps):
    rng = SplitMix64(seed)
    m = Mirror(k, locks)
    held = [set() for _ in range(k)]
    lock_owner = {}
    for _ in range(steps):
        t = rng.below(k)
        c = rng.below(8)
        mine = sorted(held[t])
        free = [l for l in range(locks) if l not in lock_owner]
        if c < 3 and mine:
            l = mine[rng.below(len(mine))]
            m.step("rel", t, l)
            held[t].discard(l)
            del lock_owner[l]
        elif c < 7 and free:
            l = free[rng.below(len(free))]
            m.step("acq", t, l)
            held[t].add(l)
            lock_owner[l] = t
        else:
            m.step("inc", t, 0)
    m.finish()


@pytest.mark.parametrize("seed", range(12))
def test_differential_scripts(seed):
    run_script(seed * 7919 + 1, k=2 + seed % 5, locks=1 + seed % 4,
               steps=160)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), k=st.integers(2, 6),
       locks=st.integers(1, 4), steps=st.integers(1, 120))
def test_differential_scripts_hypothesis(seed, k, locks, steps):
    run_script(seed, k, locks, steps)


# --- sub_root_join ---------------------------------------------------------


def masked_max(target, src):
    mx = [max(a, b) for a, b in zip(target.flatten(), src.flatten())]
    mx[target.root] = target.clk[target.root]
    return tuple(mx)


def harvest_pairs(seeds, per_event=2, limit=600):
    """(target, source) tree clock pairs drawn from live analysis states,
    filtered to the documented precondition: the source must not be ahead
    of the target on the target's own root thread."""
    pairs = []

    def grab(i, ev, engine):
        if len(pairs) >= limit:
            return
        rng = SplitMix64((i << 16) ^ ev.tid ^ 0xABCDEF)
        clocks = list(engine.thread_clocks) + list(engine.lock_clocks.values()) \
            + list(engine.write_clocks.values()) + list(engine.read_clocks.values())
        clocks = [c for c in clocks if not c.is_empty()]
        for _ in range(per_event):
            a = clocks[rng.below(len(clocks))]
            b = clocks[rng.below(len(clocks))]
            if b.get(a.root) <= a.clk[a.root]:
                pairs.append((a.clone(), b.clone()))

    for seed in seeds:
        trace = random_trace(seed, events=120, threads=5, locks=3, variables=3)
        run_analysis(trace, MAZ, "tree", inspect=grab)
        if len(pairs) >= limit:
            break
    return pairs


def test_sub_root_join_matches_masked_max_on_live_pairs():
    pairs = harvest_pairs(range(20))
    assert len(pairs) >= 400
    for target, src in pairs:
        root, root_clk = target.root, target.clk[target.root]
        expected = masked_max(target, src)
        target.sub_root_join(src)
        assert target.flatten() == expected
        assert target.root == root
        assert target.clk[root] == root_clk
        target.check_integrity(strict_aclk=False)


def test_sub_root_join_never_raises_root_thread_entry():
    # Synthetic pair where the source IS ahead on the target's root thread:
    # the masked semantics must leave that entry alone.
    c = WorkCounter()
    a = TreeClock.owned(0, 3, c)
    a.increment()
    t0 = TreeClock.owned(0, 3, c)
    t0.increment()
    t0.increment()
    t0.increment()
    b = TreeClock.owned(1, 3, c)
    b.increment()
    b.increment()
    b.join(t0)  # b = {0: 3, 1: 2}
    a.sub_root_join(b)
    assert a.flatten() == (1, 2, 0)
    assert a.root == 0
    a.check_integrity(strict_aclk=False)


def test_sub_root_join_empty_source_is_noop():
    a = TreeClock.owned(0, 3)
    a.increment()
    before = a.dump()
    a.sub_root_join(TreeClock.aux(3))
    assert a.dump() == before


# --- learned-edge invariant -------------------------------------------------


def walk_edges(tc):
    """Yield (parent_tid, child_tid, child_clk, attach_time) for every edge."""
    stack = [tc.root]
    while stack:
        u = stack.pop()
        v = tc.head[u]
        while v != NIL:
            yield u, v, tc.clk[v], tc.aclk[v]
            stack.append(v)
            v = tc.nxt[v]


@pytest.mark.parametrize("po", [HB, MAZ])
@pytest.mark.parametrize("seed", range(4))
def test_every_edge_records_a_first_learn(po, seed):
    """Each edge (child u at time c, attached to parent w at time a) claims
    that thread w first learned of u's time c at w's own local time a: w's
    timestamp after its a-th event covers u@c, and after a-1 events it did
    not. This is the property that makes aclk-based pruning sound."""
    trace = random_trace(seed, events=100, threads=4, locks=3, variables=3)
    k = trace.thread_count
    histories = [[(0,) * k] for _ in range(k)]

    def check(i, ev, engine):
        tc = engine.thread_clocks[ev.tid]
        histories[ev.tid].append(tc.flatten())
        assert len(histories[ev.tid]) - 1 == tc.clk[tc.root]
        clocks = list(engine.thread_clocks) + list(engine.lock_clocks.values()) \
            + list(engine.write_clocks.values()) + list(engine.read_clocks.values())
        for clock in clocks:
            if clock.is_empty():
                continue
            for w, u, c, a in walk_edges(clock):
                assert 1 <= a < len(histories[w])
                assert histories[w][a][u] >= c
                assert histories[w][a - 1][u] < c

    run_analysis(trace, po, "tree", inspect=check)


# --- pruning soundness checker ----------------------------------------------


def test_pruning_violations_reports_corruption():
    c = WorkCounter()
    v = TreeClock.owned(2, 4, c)
    v.increment()
    w = TreeClock.owned(1, 4, c)
    w.increment()
    v.join(w)
    full = TreeClock.owned(3, 4, c)
    full.increment()
    full.join(v)
    assert pruning_violations(v, full) == []
    v.clk[1] = 9  # claim a descendant time the other clock has never seen
    out = pruning_violations(v, full)
    assert len(out) == 2
    assert any(s.startswith("direct:") for s in out)
    assert any(s.startswith("indirect:") for s in out)
