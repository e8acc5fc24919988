"""Tree clocks: vector times stored as a rooted tree of (tid, clk, aclk) nodes.

The tree of a clock C places one node per thread C knows about. A node's clk
is C's entry for that thread; its aclk ("attachment clock") is the local time
of the *parent's* thread at the moment the parent learned this clk. The root
is the thread whose history the clock follows and carries no aclk. Child
lists are kept in order of attachment, newest first, which means aclk values
never increase along a sibling list.

That layout is what makes join and copy cheap: while scanning the source
tree we can stop descending as soon as a node has not progressed past what
the target already knows (all its descendants are then stale too), and stop
scanning a sibling list as soon as the target has seen the parent's thread
past the attachment time of the current child (all later siblings were
attached even earlier). Both prunings are exercised and cross-checked
against flat vector clocks throughout the test suite.

Nodes live in dense arrays indexed by thread id, so thread-id lookup is O(1)
and a structural copy is an array copy. All traversals are iterative.
"""

from .vclock import ClockContractError

NIL = -1  # empty link
BOT = -1  # "no attachment time" marker for the root; never compared, only shown


class TreeClock:
    __slots__ = (
        "k", "clk", "aclk", "parent", "head", "nxt", "prv", "intree",
        "root", "counter",
    )

    def __init__(self, size, counter=None):
        self.k = size
        self.clk = [0] * size
        self.aclk = [BOT] * size
        self.parent = [NIL] * size
        self.head = [NIL] * size  # first (most recently attached) child
        self.nxt = [NIL] * size   # next younger sibling
        self.prv = [NIL] * size   # previous (more recently attached) sibling
        self.intree = [False] * size
        self.root = NIL
        self.counter = counter

    # --- construction -----------------------------------------------------

    @classmethod
    def owned(cls, tid, size, counter=None):
        """A thread's own clock: a single root node at time 0."""
        tc = cls(size, counter=counter)
        tc.root = tid
        tc.intree[tid] = True
        return tc

    @classmethod
    def aux(cls, size, counter=None):
        """An auxiliary clock (for a lock or a variable): starts empty."""
        return cls(size, counter=counter)

    # --- basic queries ------------------------------------------------------

    def is_empty(self):
        return self.root == NIL

    def get(self, tid):
        return self.clk[tid] if self.intree[tid] else 0

    def flatten(self):
        clk, intree = self.clk, self.intree
        return tuple(clk[t] if intree[t] else 0 for t in range(self.k))

    def leq(self, other):
        """True iff every entry of self is <= the matching entry of other.
        Walks only self's nodes."""
        stack = [self.root] if self.root != NIL else []
        while stack:
            u = stack.pop()
            if self.clk[u] > other.get(u):
                return False
            v = self.head[u]
            while v != NIL:
                stack.append(v)
                v = self.nxt[v]
        return True

    # --- mutation ------------------------------------------------------------

    def increment(self, amount=1):
        if self.root == NIL:
            raise ClockContractError("increment on an empty tree clock")
        self.clk[self.root] += amount
        c = self.counter
        if c is not None:
            c.increments += 1
            c.impl_work += 1
            if amount:
                c.vt_work += 1

    def join(self, src):
        """self <- self max src.

        Gathers the source nodes that are ahead of self (with the two
        prunings described in the module docstring), detaches self's stale
        counterparts, rebuilds them mirroring the source, and hangs the
        rebuilt subtree at the front of self's root. A source that is
        strictly ahead on self's *own* root thread is outside this
        operation's contract (see sub_root_join).
        """
        c = self.counter
        if src.root == NIL:
            return
        if self.root == NIL:
            raise ClockContractError("join into an uninitialized tree clock")
        if c is not None:
            c.joins += 1
        z = src.root
        if src.clk[z] <= self.get(z):
            if c is not None:
                c.impl_work += 1  # examined the source root, nothing to do
            return
        if z == self.root:
            raise ClockContractError(
                "join source is ahead on the target's own root thread"
            )
        stack, visited = self._gather(src, sub_root=False)
        touched = self._detach_and_attach(src, stack, z, copy_mode=False, skip=NIL)
        # hang the rebuilt subtree as the newest child of our root
        self.aclk[z] = self.clk[self.root]
        self._link_front(self.root, z)
        if c is not None:
            c.impl_work += visited + touched
            if c.debug:
                self.check_integrity()

    def sub_root_join(self, src):
        """self <- self max src on every thread except self's own root thread.

        Same machinery as join with three changes: no early exit on an
        unprogressed source root, the sibling-list pruning is not applied
        when scanning children of a node for self's root thread, and the
        node for self's root thread is never updated or moved. Needed by
        analyses whose partial order does not include each thread's own
        program order, where the target's entry for its own thread says
        nothing about what hangs below that thread's node in the source.

        Precondition (free in any live run, since a thread's own entry is
        authored only by that thread): the source's entry for self's root
        thread does not exceed self's root time.
        """
        c = self.counter
        if src.root == NIL:
            return
        if self.root == NIL:
            raise ClockContractError("join into an uninitialized tree clock")
        if c is not None:
            c.joins += 1
        t = self.root
        z = src.root
        stack, visited = self._gather(src, sub_root=True)
        touched = self._detach_and_attach(src, stack, z, copy_mode=False, skip=t)
        if z != t:
            self.aclk[z] = self.clk[self.root]
            self._link_front(self.root, z)
        if c is not None:
            c.impl_work += visited + touched
            if c.debug:
                self.check_integrity(strict_aclk=False)

    def monotone_copy(self, src):
        """self <- src, assuming self <= src entrywise.

        Like join, but the target is wholly superseded: the result's root
        moves to the source's root thread. The node for self's current root
        thread is always regathered (even if its time is unchanged) so it
        can be reseated wherever the source holds it.
        """
        c = self.counter
        if src.root == NIL:
            raise ClockContractError("monotone copy from an empty clock")
        if self.root == NIL:
            self._become_copy_of(src)
            return
        if c is not None:
            c.copies += 1
            if c.debug and not self.leq(src):
                raise ClockContractError("monotone copy target is not below source")
        z = src.root
        stack, visited = self._gather(src, sub_root=False, copy_mode=True)
        old_root = self.root
        touched = self._detach_and_attach(src, stack, z, copy_mode=True, skip=NIL)
        self.aclk[z] = BOT
        self.parent[z] = NIL
        self.prv[z] = NIL
        self.nxt[z] = NIL
        self.root = z
        if c is not None:
            c.impl_work += visited + touched
            if c.debug:
                self.check_integrity()

    def copy_check_monotone(self, src):
        """Copy src into self, deciding in O(1) whether the cheap monotone
        path applies: it does iff the source's entry for self's root thread
        has not fallen behind self's root time. Returns "monotone" or
        "deep". An empty target takes the deep (full structural) path."""
        if self.root == NIL:
            self._become_copy_of(src)
            return "deep"
        r = self.root
        monotone = src.get(r) >= self.clk[r]
        if self.counter is not None and self.counter.debug:
            # a non-monotone target must be caught by the single-entry test
            if monotone and not self.leq(src):
                raise ClockContractError(
                    "single-entry monotonicity test missed a non-monotone target"
                )
        if monotone:
            self.monotone_copy(src)
            return "monotone"
        self._become_copy_of(src)
        return "deep"

    def clone(self):
        """Standalone structural copy (no work accounting)."""
        out = TreeClock(self.k)
        out.clk = self.clk[:]
        out.aclk = self.aclk[:]
        out.parent = self.parent[:]
        out.head = self.head[:]
        out.nxt = self.nxt[:]
        out.prv = self.prv[:]
        out.intree = self.intree[:]
        out.root = self.root
        return out

    # --- internals -------------------------------------------------------

    def _gather(self, src, sub_root, copy_mode=False):
        """Walk src from its root, collecting nodes ahead of self in
        post-order (so the stack pops parents before children). Returns
        (stack, examined-node count)."""
        get = self.get
        z = src.root
        # (node, next child to look at); the root itself is always gathered
        frames = [(z, src.head[z])]
        out = []
        visited = 1
        while frames:
            u, v = frames[-1]
            if v == NIL:
                frames.pop()
                out.append(u)
                continue
            visited += 1
            descend = src.clk[v] > get(v)
            if copy_mode and v == self.root:
                descend = True  # the old root must be regathered to be reseated
            # later siblings were attached no later than v; if we already
            # know the parent's thread past v's attachment, they are stale
            stop = src.aclk[v] <= get(u) and not (sub_root and u == self.root)
            frames[-1] = (u, NIL if stop else src.nxt[v])
            if descend:
                if v == self.root and not copy_mode and not sub_root:
                    raise ClockContractError(
                        "join source is ahead on the target's own root thread"
                    )
                frames.append((v, src.head[v]))
        return out, visited

    def _detach_and_attach(self, src, stack, z, copy_mode, skip):
        """Unlink every gathered node from self, then rebuild them in
        stack order (parents first) mirroring the source's shape. Nodes
        equal to `skip` are left entirely alone. Returns touched count."""
        intree = self.intree
        for u in stack:
            if u != skip and intree[u] and u != self.root:
                self._unlink(u)
        touched = 0
        for i in range(len(stack) - 1, -1, -1):
            u = stack[i]
            if u == skip:
                continue
            touched += 1
            fresh = not intree[u]
            if fresh:
                intree[u] = True
                self.head[u] = NIL
                self.clk[u] = 0
            newclk = src.clk[u]
            if copy_mode:
                if self.counter is not None and newclk != self.clk[u]:
                    self.counter.vt_work += 1
                self.clk[u] = newclk
            elif newclk > self.clk[u]:
                if self.counter is not None:
                    self.counter.vt_work += 1
                self.clk[u] = newclk
            if u != z:
                self.aclk[u] = src.aclk[u]
                self._link_front(src.parent[u], u)
        return touched

    def _unlink(self, u):
        p, before, after = self.parent[u], self.prv[u], self.nxt[u]
        if before != NIL:
            self.nxt[before] = after
        else:
            self.head[p] = after
        if after != NIL:
            self.prv[after] = before
        self.parent[u] = NIL
        self.prv[u] = NIL
        self.nxt[u] = NIL

    def _link_front(self, p, u):
        old = self.head[p]
        self.head[p] = u
        self.prv[u] = NIL
        self.nxt[u] = old
        if old != NIL:
            self.prv[old] = u
        self.parent[u] = p

    def _become_copy_of(self, src):
        """Full structural copy (the deep path). Arena layout makes this an
        array copy; work is everything discarded plus everything built."""
        c = self.counter
        vt_changed = 0
        old_nodes = sum(self.intree)
        if c is not None:
            before = self.flatten()
            after = src.flatten()
            vt_changed = sum(1 for a, b in zip(before, after) if a != b)
        self.clk = src.clk[:]
        self.aclk = src.aclk[:]
        self.parent = src.parent[:]
        self.head = src.head[:]
        self.nxt = src.nxt[:]
        self.prv = src.prv[:]
        self.intree = src.intree[:]
        self.root = src.root
        if c is not None:
            c.copies += 1
            src_nodes = sum(src.intree)
            c.impl_work += 2 * src_nodes + old_nodes
            c.vt_work += vt_changed
            if c.debug:
                self.check_integrity()

    # --- diagnostics -------------------------------------------------------

    def dump(self):
        """Tree as indented text, one node per line, children in list order."""
        if self.root == NIL:
            return "(empty)\n"
        lines = []
        stack = [(self.root, 0)]
        while stack:
            u, depth = stack.pop()
            a = "⊥" if u == self.root else str(self.aclk[u])
            lines.append(f"{'  ' * depth}tid={u} clk={self.clk[u]} aclk={a}")
            kids = []
            v = self.head[u]
            while v != NIL:
                kids.append(v)
                v = self.nxt[v]
            for v in reversed(kids):
                stack.append((v, depth + 1))
        return "\n".join(lines) + "\n"

    def check_integrity(self, strict_aclk=True):
        """Verify the structural invariants; raises AssertionError if broken.

        Checked: the in-tree flags agree with what is reachable from the
        root, parent/sibling links are mutually consistent, sibling aclk
        values never increase front to back, and (unless strict_aclk is
        off, for clocks just touched by sub_root_join) every non-root
        node's aclk is at most its parent's clk.
        """
        if self.root == NIL:
            assert not any(self.intree), "nodes present in an empty clock"
            return
        assert self.intree[self.root], "root not marked in-tree"
        assert self.parent[self.root] == NIL, "root has a parent"
        seen = [False] * self.k
        stack = [self.root]
        while stack:
            u = stack.pop()
            assert not seen[u], f"node {u} reached twice"
            seen[u] = True
            v = self.head[u]
            last_aclk = None
            while v != NIL:
                assert self.intree[v], f"linked node {v} not marked in-tree"
                assert self.parent[v] == u, f"parent link of {v} is stale"
                if self.prv[v] == NIL:
                    assert self.head[u] == v
                else:
                    assert self.nxt[self.prv[v]] == v
                if strict_aclk:
                    assert self.aclk[v] <= self.clk[u], (
                        f"child {v} attached later ({self.aclk[v]}) than its "
                        f"parent's time ({self.clk[u]})"
                    )
                if last_aclk is not None:
                    assert self.aclk[v] <= last_aclk, (
                        f"sibling list of {u} not ordered by attachment time"
                    )
                last_aclk = self.aclk[v]
                stack.append(v)
                v = self.nxt[v]
        for t in range(self.k):
            assert seen[t] == self.intree[t], (
                f"node {t}: reachable={seen[t]} but intree={self.intree[t]}"
            )

    def __repr__(self):
        return f"TreeClock(root={self.root}, {list(self.flatten())!r})"


def pruning_violations(a, b):
    """Check the two pruning soundness conditions of tree clock a against
    clock b (any clock with .get). Returns a list of human-readable
    violation strings; empty means both hold.

    Direct: if b knows a's node u at least to u's clk, then every
    descendant of u is also known to b. Indirect: if b knows u's thread at
    least to child v's attachment time, then v's whole subtree is known.
    """
    if a.root == NIL:
        return []
    out = []
    # bottom-up flag: does the subtree under u contain something b misses?
    order = []
    stack = [a.root]
    while stack:
        u = stack.pop()
        order.append(u)
        v = a.head[u]
        while v != NIL:
            stack.append(v)
            v = a.nxt[v]
    stale = [False] * a.k  # "subtree of u holds a node b does not know"
    for u in reversed(order):
        miss = a.clk[u] > b.get(u)
        v = a.head[u]
        while not miss and v != NIL:
            miss = stale[v]
            v = a.nxt[v]
        stale[u] = miss
    for u in order:
        known = a.clk[u] <= b.get(u)
        v = a.head[u]
        while v != NIL:
            if known and stale[v]:
                out.append(
                    f"direct: node {u} is known to the other clock but its "
                    f"descendant subtree under {v} is not"
                )
            if a.aclk[v] <= b.get(u) and (stale[v] or a.clk[v] > b.get(v)):
                out.append(
                    f"indirect: child {v} of {u} attached within the other "
                    f"clock's knowledge yet its subtree is not covered"
                )
            v = a.nxt[v]
    return out
