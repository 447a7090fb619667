"""Small finite-domain solver for timing + shared-resource models.

Domains are integer bitmasks (bit c set = cycle c allowed).  Constraints:

* difference constraints ``lo <= x - y <= hi``;
* a per-cycle demand limit: at cycle t the demand is the sum over actions
  of the largest number of instances any one property places at t, and it
  must not exceed `gamma`;
* nogoods: conjunctions of ``var == value`` that must not all hold.

Search is depth-first, smallest domain first (ties by variable index),
lowest value first, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def bits_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def interval_mask(lo: int, hi: int) -> int:
    if hi < lo:
        return 0
    return ((1 << (hi - lo + 1)) - 1) << lo


def _shift_range(mask: int, lo: int, hi: int) -> int:
    out = 0
    for d in range(lo, hi + 1):
        out |= mask << d if d >= 0 else mask >> -d
    return out


@dataclass
class Model:
    domains: list[int]
    # (action, property) of every variable, for the demand limit
    owners: list[tuple[str, str]]
    diffs: list[tuple[int, int, int, int]] = field(default_factory=list)
    nogoods: list[tuple[tuple[int, int], ...]] = field(default_factory=list)
    gamma: int | None = None


@dataclass
class SolveStats:
    nodes: int = 0
    failures: int = 0


class _State:
    __slots__ = ("dom", "committed", "counts", "demand")

    def __init__(self, dom, committed, counts, demand):
        self.dom = dom
        self.committed = committed
        self.counts = counts      # (t, action) -> {property: n}
        self.demand = demand      # t -> demand

    def copy(self) -> "_State":
        return _State(list(self.dom), list(self.committed),
                      {k: dict(v) for k, v in self.counts.items()},
                      dict(self.demand))


class Solver:
    def __init__(self, model: Model, node_limit: int | None = None):
        self.m = model
        self.n = len(model.domains)
        self.node_limit = node_limit
        self.stats = SolveStats()
        self.watch: list[list[int]] = [[] for _ in range(self.n)]
        for ci, (x, y, _, _) in enumerate(model.diffs):
            self.watch[x].append(ci)
            self.watch[y].append(ci)
        self.nogood_watch: list[list[int]] = [[] for _ in range(self.n)]
        for gi, ng in enumerate(model.nogoods):
            for var, _ in ng:
                self.nogood_watch[var].append(gi)
        self.by_owner: dict[tuple[str, str], list[int]] = {}
        for v, own in enumerate(model.owners):
            self.by_owner.setdefault(own, []).append(v)

    # -- demand bookkeeping ------------------------------------------------

    def _extra(self, st: _State, t: int, var: int) -> int:
        action, prop = self.m.owners[var]
        per_prop = st.counts.get((t, action))
        if not per_prop:
            return 1
        mine = per_prop.get(prop, 0)
        return 1 if mine + 1 > max(per_prop.values()) else 0

    def _commit(self, st: _State, var: int, queue: list[int]) -> bool:
        t = st.dom[var].bit_length() - 1
        st.committed[var] = True
        if self.m.gamma is None:
            return True
        extra = self._extra(st, t, var)
        action, prop = self.m.owners[var]
        per_prop = st.counts.setdefault((t, action), {})
        per_prop[prop] = per_prop.get(prop, 0) + 1
        st.demand[t] = st.demand.get(t, 0) + extra
        if st.demand[t] > self.m.gamma:
            return False
        if st.demand[t] == self.m.gamma:
            bit = 1 << t
            for u in range(self.n):
                if not st.committed[u] and st.dom[u] & bit:
                    if self._extra(st, t, u):
                        st.dom[u] &= ~bit
                        if not st.dom[u]:
                            return False
                        queue.append(u)
        return True

    # -- propagation ---------------------------------------------------------

    def _propagate(self, st: _State, queue: list[int]) -> bool:
        diffs = self.m.diffs
        dom = st.dom
        while queue:
            v = queue.pop()
            for ci in self.watch[v]:
                x, y, lo, hi = diffs[ci]
                nx = dom[x] & _shift_range(dom[y], lo, hi)
                if nx != dom[x]:
                    if not nx:
                        return False
                    dom[x] = nx
                    queue.append(x)
                ny = dom[y] & _shift_range(dom[x], -hi, -lo)
                if ny != dom[y]:
                    if not ny:
                        return False
                    dom[y] = ny
                    queue.append(y)
            for gi in self.nogood_watch[v]:
                open_lit = None
                live = True
                for var, val in self.m.nogoods[gi]:
                    bit = 1 << val
                    if not dom[var] & bit:
                        live = False
                        break
                    if dom[var] != bit:
                        if open_lit is not None:
                            live = False
                            break
                        open_lit = (var, bit)
                if not live:
                    continue
                if open_lit is None:
                    return False
                var, bit = open_lit
                dom[var] &= ~bit
                queue.append(var)
            if not st.committed[v] and dom[v] & (dom[v] - 1) == 0:
                if not self._commit(st, v, queue):
                    return False
        return True

    # -- search --------------------------------------------------------------

    def solve(self) -> list[int] | None:
        st = _State(list(self.m.domains), [False] * self.n, {}, {})
        if any(d == 0 for d in st.dom):
            return None
        if not self._propagate(st, list(range(self.n))):
            return None
        return self._search(st)

    def _search(self, st: _State) -> list[int] | None:
        self.stats.nodes += 1
        if self.node_limit is not None and self.stats.nodes > self.node_limit:
            raise RuntimeError("node limit reached")
        best, best_size = -1, None
        for v in range(self.n):
            if not st.committed[v]:
                size = bin(st.dom[v]).count("1")
                if best_size is None or size < best_size:
                    best, best_size = v, size
        if best < 0:
            return [d.bit_length() - 1 for d in st.dom]
        for val in bits_of(st.dom[best]):
            child = st.copy()
            child.dom[best] = 1 << val
            if self._propagate(child, [best]):
                found = self._search(child)
                if found is not None:
                    return found
            self.stats.failures += 1
        return None
