"""Vector times and vector clocks.

A vector time over k threads is a length-k tuple/list of ints ordered
pointwise; join is the pointwise max. ``VectorClock`` is the mutable clock
used by the analysis engines: a dense int list plus bookkeeping hooks so
runs can report how many entries each operation touched.
"""

from typing import NamedTuple


class ClockContractError(Exception):
    """An operation was called outside its contract (e.g. a supposedly
    monotone copy whose target is not below the source)."""


class Epoch(NamedTuple):
    """A single (thread, local clock) component, enough to identify one event."""

    tid: int
    clk: int


# --- pure vector-time helpers -------------------------------------------

def vt_leq(a, b):
    """Pointwise <= on two equal-length vector times."""
    return all(x <= y for x, y in zip(a, b))


def vt_join(a, b):
    """Pointwise max of two equal-length vector times."""
    return tuple(x if x >= y else y for x, y in zip(a, b))


def vt_increment(v, tid, amount=1):
    """Copy of v with v[tid] bumped by amount."""
    out = list(v)
    out[tid] += amount
    return tuple(out)


class WorkCounter:
    """Tallies work done by clock operations during one analysis run.

    vt_work counts entries whose value actually changed (implementation
    independent); impl_work counts what the specific structure touched:
    k per vector join/copy, nodes examined/moved for tree clocks, and 1
    per increment for both. With debug set, structural invariants and
    copy preconditions are re-checked after every mutation.
    """

    __slots__ = ("vt_work", "impl_work", "joins", "copies", "increments", "debug")

    def __init__(self, debug=False):
        self.vt_work = 0
        self.impl_work = 0
        self.joins = 0
        self.copies = 0
        self.increments = 0
        self.debug = debug


class VectorClock:
    __slots__ = ("clk", "owner", "counter")

    def __init__(self, size, owner=None, counter=None):
        self.clk = [0] * size
        self.owner = owner
        self.counter = counter

    @classmethod
    def owned(cls, tid, size, counter=None):
        return cls(size, owner=tid, counter=counter)

    @classmethod
    def aux(cls, size, counter=None):
        return cls(size, counter=counter)

    @property
    def size(self):
        return len(self.clk)

    def get(self, tid):
        return self.clk[tid]

    def increment(self, amount=1):
        if self.owner is None:
            raise ClockContractError("increment on a clock with no owning thread")
        self.clk[self.owner] += amount
        c = self.counter
        if c is not None:
            c.increments += 1
            c.impl_work += 1
            if amount:
                c.vt_work += 1

    def join(self, src):
        """self <- self max src, entry by entry."""
        mine, theirs = self.clk, src.clk
        changed = 0
        for i, v in enumerate(theirs):
            if v > mine[i]:
                mine[i] = v
                changed += 1
        c = self.counter
        if c is not None:
            c.joins += 1
            c.impl_work += len(mine)
            c.vt_work += changed
        return changed

    def monotone_copy(self, src):
        """self <- src. For vector clocks this is a plain entrywise copy;
        the name records the contract the engines rely on (self <= src)."""
        c = self.counter
        if c is not None and c.debug and not self.leq(src):
            raise ClockContractError("monotone copy target is not below source")
        mine, theirs = self.clk, src.clk
        changed = 0
        for i, v in enumerate(theirs):
            if mine[i] != v:
                mine[i] = v
                changed += 1
        if c is not None:
            c.copies += 1
            c.impl_work += len(mine)
            c.vt_work += changed
        return changed

    def copy_check_monotone(self, src):
        """Copy src into self. Vector clocks have no cheaper monotone path,
        so this is always a plain copy; the return value mirrors the tree
        clock API and never reports a deep rebuild."""
        mine, theirs = self.clk, src.clk
        changed = 0
        for i, v in enumerate(theirs):
            if mine[i] != v:
                mine[i] = v
                changed += 1
        c = self.counter
        if c is not None:
            c.copies += 1
            c.impl_work += len(mine)
            c.vt_work += changed
        return "monotone"

    def leq(self, other):
        return vt_leq(self.clk, other.clk)

    def flatten(self):
        return tuple(self.clk)

    def clone(self):
        out = VectorClock(len(self.clk), owner=self.owner)
        out.clk = list(self.clk)
        return out

    def __repr__(self):
        return f"VectorClock({self.clk!r}, owner={self.owner!r})"
