"""Reliability of an action strategy against its correctness property.

A *way* picks one action instance per correctness step such that the first
instance falls in the first window measured from the anchor and every later
instance falls in its window measured from the previous one.  The closed
form treats ways as independent:

    R = 1 - prod_over_ways(1 - prod_over_steps(R_step))

where replicas of one spatially redundant action at one cycle count as a
single step with reliability ``1 - (1 - R)**n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .spec_model import PROB_SLACK, SpecSuite, Step, correctness_steps
from .strategy import (
    DEFAULT_MAX_STRATEGIES, InstanceTable, Strategy, enumerate_strategies,
    exploration_delta, flatten,
)

EXACT_MAX_INSTANCES = 24


@dataclass(frozen=True)
class MergedInstance:
    action: str
    cycle: int
    effective_reliability: float
    members: tuple[str, ...]


Way = tuple[MergedInstance, ...]


@dataclass(frozen=True)
class ReliabilityReport:
    strategy: Strategy
    ways: tuple[Way, ...]
    computed: float
    admissible: bool
    label: str = ""


def option_label(prop_index: int, k: int) -> str:
    """Option label: 1A, 1B, ..., 1Z, 1A*, ..."""
    return f"{prop_index}{chr(ord('A') + k % 26)}{'*' * (k // 26)}"


def merge_spatial(strategy: Strategy, table: InstanceTable,
                  reliability: Mapping[str, float]) -> list[MergedInstance]:
    """Collapse co-located replicas of one spatial set into one instance.

    Coincident rows from different re-executions stay distinct.
    """
    groups: dict[tuple[str, int], list[str]] = {}
    for row in table.rows:
        key = (row.replica_root, strategy[row.timing_var])
        groups.setdefault(key, []).append(row.timing_var)
    merged = []
    for (root, cycle), members in groups.items():
        action = table.row(root).action
        r = reliability[action]
        merged.append(MergedInstance(action, cycle,
                                     1.0 - (1.0 - r) ** len(members),
                                     tuple(members)))
    return merged


def count_ways(merged: Sequence[MergedInstance], correctness: Sequence[Step],
               anchor: int, outcome_of: Mapping[str, str]) -> list[Way]:
    candidates = [[m for m in merged if outcome_of[m.action] == step.event]
                  for step in correctness]
    ways: list[Way] = []

    def extend(j: int, prev_cycle: int, acc: tuple):
        if j == len(correctness):
            ways.append(acc)
            return
        w = correctness[j].window
        for m in candidates[j]:
            if w.lo <= m.cycle - prev_cycle <= w.hi:
                extend(j + 1, m.cycle, acc + (m,))

    extend(0, anchor, ())
    return ways


def computed_reliability(ways: Sequence[Way]) -> float:
    miss = 1.0
    for way in ways:
        miss *= 1.0 - math.prod(m.effective_reliability for m in way)
    return 1.0 - miss


def exact_reliability(strategy: Strategy, table: InstanceTable,
                      correctness: Sequence[Step], anchor: int,
                      reliability: Mapping[str, float],
                      outcome_of: Mapping[str, str]) -> float:
    """Exact satisfaction probability by enumerating every success vector.

    Works directly on (outcome, cycle) occurrences, without ways, so it is
    an independent check of the closed form.
    """
    rows = table.rows
    n = len(rows)
    if n > EXACT_MAX_INSTANCES:
        raise ValueError(f"{n} instances exceed the exact-oracle cap "
                         f"of {EXACT_MAX_INSTANCES}")
    cycles = [strategy[r.timing_var] for r in rows]
    probs = np.array([reliability[r.action] for r in rows])
    lo_c = min([anchor] + cycles)
    width = max(cycles) - lo_c + 1
    total = 0.0
    chunk = 1 << min(n, 16)
    for start in range(0, 1 << n, chunk):
        states = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = ((states[:, None] >> np.arange(n)) & 1).astype(bool)
        weight = np.where(bits, probs, 1.0 - probs).prod(axis=1)
        reach = None
        for j, step in enumerate(correctness):
            occ = np.zeros((len(states), width), dtype=bool)
            for i, r in enumerate(rows):
                if outcome_of[r.action] == step.event:
                    occ[:, cycles[i] - lo_c] |= bits[:, i]
            ok = np.zeros_like(occ)
            for c in range(width):
                for d in range(step.window.lo, step.window.hi + 1):
                    p = c - d
                    if j == 0:
                        if p + lo_c == anchor:
                            ok[:, c] = True
                    elif 0 <= p < width:
                        ok[:, c] |= reach[:, p]
            reach = occ & ok
        satisfied = reach.any(axis=1) if reach is not None else np.ones(
            len(states), dtype=bool)
        total += float(weight[satisfied].sum())
    return total


def strategy_reliability(suite: SpecSuite, prop_id: str, table: InstanceTable,
                         strategy: Strategy) -> ReliabilityReport:
    prop = suite.property(prop_id)
    rel = {a.name: suite.action_reliability(a.name) for a in suite.actions}
    outcome_of = {a.name: a.causes for a in suite.actions}
    merged = merge_spatial(strategy, table, rel)
    ways = count_ways(merged, correctness_steps(prop), table.anchor,
                      outcome_of)
    value = computed_reliability(ways)
    return ReliabilityReport(strategy, tuple(ways), value,
                             value >= prop.target - PROB_SLACK)


@lru_cache(maxsize=256)
def _admissible(suite: SpecSuite, prop_id: str, anchor: int,
                delta: tuple | None, max_strategies: int):
    prop = suite.property(prop_id)
    idx = suite.property_index(prop_id)
    table = flatten(prop, anchor, idx)
    d = dict(delta) if delta is not None else exploration_delta(table, prop)
    out = []
    for k, s in enumerate(enumerate_strategies(table, d,
                                               max_strategies=max_strategies)):
        rep = strategy_reliability(suite, prop_id, table, s)
        out.append(ReliabilityReport(rep.strategy, rep.ways, rep.computed,
                                     rep.admissible, option_label(idx, k)))
    return tuple(out)


def admissible_strategies(suite: SpecSuite, prop_id: str, anchor: int = 0,
                          delta: Mapping[int, int] | None = None,
                          max_strategies: int = DEFAULT_MAX_STRATEGIES,
                          ) -> list[ReliabilityReport]:
    """Report every enumerated strategy of a property, flagged admissible.

    Without `delta`, re-execution offsets are explored up to the safe cap.
    """
    key = tuple(sorted(delta.items())) if delta is not None else None
    return list(_admissible(suite, prop_id, anchor, key, max_strategies))


def clear_caches() -> None:
    _admissible.cache_clear()
