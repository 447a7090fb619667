"""Instance tables and action-strategy enumeration.

A reliability spec is flattened into one row per action occurrence.  Each
row carries a time prefix ``<lo, hi>`` relative to the row it links to (or
to the anchor cycle for the root row), a spatial redundancy factor, and a
timing variable.  Enumerating every assignment of timing variables that
respects all prefixes gives the action strategies of the property.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .errors import ExplorationCapExceeded, NoAdmissibleStrategy
from .spec_model import (
    Chain, Consec, DelayWindow, PropertyPair, SeqExpr, Spatial, SpecSuite,
    Step, Temporal, correctness_steps, sequential_depth,
)

DEFAULT_MAX_STRATEGIES = 200_000


@dataclass(frozen=True)
class Delta:
    """Unresolved latest start offset of re-execution `index`."""
    index: int

    def __str__(self) -> str:
        return "Δ" if self.index == 1 else f"Δ{self.index}"


@dataclass(frozen=True)
class TimePrefix:
    lo: int
    hi: int | Delta

    def resolve(self, delta: Mapping[int, int]) -> tuple[int, int]:
        if isinstance(self.hi, Delta):
            if self.hi.index not in delta:
                raise ValueError(f"unresolved {self.hi}")
            return self.lo, delta[self.hi.index]
        return self.lo, self.hi

    def __str__(self) -> str:
        return f"<{self.lo},{self.hi}>"


@dataclass(frozen=True)
class ActionInstance:
    id: int
    property: str
    action: str
    prefix: TimePrefix
    spatial_factor: int
    timing_var: str
    link: str | None
    reexec_index: int = 0
    # timing variable of the first replica of this row's spatial set
    replica_root: str = ""


@dataclass(frozen=True)
class InstanceTable:
    property: str
    rows: tuple[ActionInstance, ...]
    anchor: int = 0
    prop_index: int = 1

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(r.timing_var for r in self.rows)

    def row(self, var: str) -> ActionInstance:
        for r in self.rows:
            if r.timing_var == var:
                return r
        raise KeyError(var)

    def reexec_starts(self) -> dict[int, ActionInstance]:
        """First row of every re-execution i >= 1, keyed by i."""
        return {r.prefix.hi.index: r for r in self.rows
                if isinstance(r.prefix.hi, Delta)}


@dataclass(frozen=True)
class Strategy:
    vars: tuple[str, ...]
    values: tuple[int, ...]

    @property
    def assignment(self) -> dict[str, int]:
        return dict(zip(self.vars, self.values))

    def __getitem__(self, var: str) -> int:
        return self.values[self.vars.index(var)]

    @property
    def last_cycle(self) -> int:
        return max(self.values)

    def shifted(self, offset: int) -> "Strategy":
        return Strategy(self.vars, tuple(v + offset for v in self.values))


@dataclass(frozen=True)
class AdmissibilityBounds:
    delta: dict[int, int]
    horizon_T: int
    # per-variable [min, max] over admissible strategies (absolute cycles)
    domains: dict[str, tuple[int, int]] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Flattening
# ---------------------------------------------------------------------------


class _Flattener:
    def __init__(self, prop_id: str, prop_index: int):
        self.prop_id = prop_id
        self.prop_index = prop_index
        self.rows: list[ActionInstance] = []

    def add(self, action, prefix, link, reexec, sf=1, root=None):
        var = f"tau{self.prop_index}_{len(self.rows) + 1}"
        self.rows.append(ActionInstance(
            id=len(self.rows) + 1, property=self.prop_id, action=action,
            prefix=prefix, spatial_factor=sf, timing_var=var, link=link,
            reexec_index=reexec, replica_root=root or var))
        return var

    @staticmethod
    def _prefix(window: DelayWindow, override: TimePrefix | None):
        if override is not None:
            return override
        return TimePrefix(window.lo, window.hi)

    def emit(self, expr: SeqExpr, link, reexec: int,
             override: TimePrefix | None = None) -> tuple[str, str]:
        if isinstance(expr, Step):
            v = self.add(expr.event, self._prefix(expr.window, override),
                         link, reexec)
            return v, v
        if isinstance(expr, Spatial):
            step = expr.step
            first = self.add(step.event, self._prefix(step.window, override),
                             link, reexec)
            last = first
            for k in range(2, expr.n + 1):
                last = self.add(step.event, TimePrefix(0, 0), first, reexec,
                                sf=k, root=first)
            return first, last
        if isinstance(expr, Consec):
            step = expr.step
            first = self.add(step.event, self._prefix(step.window, override),
                             link, reexec)
            last = first
            for _ in range(expr.k - 1):
                last = self.add(step.event, TimePrefix(1, 1), last, reexec)
            return first, last
        if isinstance(expr, Temporal):
            first, last = self.emit(expr.block, link, reexec, override)
            prev_first = first
            for i in range(1, expr.m):
                start, last = self.emit(expr.block, prev_first, i,
                                        TimePrefix(1, Delta(i)))
                prev_first = start
            return first, last
        first = None
        cur = link
        for n, item in enumerate(expr.items):
            f, cur = self.emit(item, cur, reexec, override if n == 0 else None)
            first = first or f
        return first, cur


def flatten(prop: PropertyPair, anchor: int = 0,
            prop_index: int = 1) -> InstanceTable:
    """Flatten a property's reliability spec into its instance table."""
    fl = _Flattener(prop.id, prop_index)
    fl.emit(prop.reliability_spec, None, 0)
    return InstanceTable(prop.id, tuple(fl.rows), anchor, prop_index)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def enumerate_strategies(table: InstanceTable,
                         delta: Mapping[int, int] | None = None,
                         horizon: int | None = None,
                         max_strategies: int = DEFAULT_MAX_STRATEGIES,
                         ) -> list[Strategy]:
    """All assignments satisfying every time prefix, in lexicographic order.

    `delta` resolves re-execution bounds; `horizon` optionally caps every
    cycle (absolute).  More than `max_strategies` results raises
    ExplorationCapExceeded.
    """
    delta = delta or {}
    rows = table.rows
    index = {r.timing_var: i for i, r in enumerate(rows)}
    bounds = [r.prefix.resolve(delta) for r in rows]
    links = [None if r.link is None else index[r.link] for r in rows]
    values = [0] * len(rows)
    out: list[Strategy] = []
    names = table.variables

    def walk(i: int):
        if i == len(rows):
            if len(out) >= max_strategies:
                raise ExplorationCapExceeded(max_strategies)
            out.append(Strategy(names, tuple(values)))
            return
        lo, hi = bounds[i]
        base = table.anchor if links[i] is None else values[links[i]]
        top = base + hi
        if horizon is not None:
            top = min(top, horizon)
        for v in range(base + lo, top + 1):
            values[i] = v
            walk(i + 1)

    walk(0)
    return out


def temporal_counts(expr: SeqExpr) -> Iterator[int]:
    if isinstance(expr, Temporal):
        yield expr.m
        yield from temporal_counts(expr.block)
    elif isinstance(expr, Chain):
        for item in expr.items:
            yield from temporal_counts(item)


def safe_delta_cap(prop: PropertyPair) -> int:
    """Re-execution offsets beyond this cannot add ways to the correctness."""
    m = max(temporal_counts(prop.reliability_spec), default=1)
    window_sum = sum(s.window.hi for s in correctness_steps(prop))
    return (sequential_depth(prop.reliability_spec) + 1) * m + window_sum


def exploration_delta(table: InstanceTable, prop: PropertyPair) -> dict[int, int]:
    cap = safe_delta_cap(prop)
    return {i: cap for i in table.reexec_starts()}


def compute_bounds(suite: SpecSuite, prop_id: str,
                   anchor: int = 0) -> AdmissibilityBounds:
    """Derive the re-execution offsets and horizon from admissible strategies."""
    from .reliability import admissible_strategies

    prop = suite.property(prop_id)
    reports = admissible_strategies(suite, prop_id, anchor)
    good = [r.strategy for r in reports if r.admissible]
    if not good:
        raise NoAdmissibleStrategy(prop_id, prop.target)
    table = flatten(prop, anchor, suite.property_index(prop_id))
    delta = {}
    for i, row in table.reexec_starts().items():
        delta[i] = max(s[row.timing_var] - s[row.link] for s in good)
    horizon = max(s.last_cycle for s in good)
    domains = {}
    for k, var in enumerate(table.variables):
        vals = [s.values[k] for s in good]
        domains[var] = (min(vals), max(vals))
    return AdmissibilityBounds(delta, horizon, domains)
