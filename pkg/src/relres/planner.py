"""Constraint generation, minimum-resource search and schedules.

Demand at cycle t is ``sum over actions a of max over properties i of
n(a, i, t)``: one execution of an action serves every property that needs it
at that cycle, while repeats inside one property need separate processors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .reliability import admissible_strategies, option_label, strategy_reliability
from .solver import Model, Solver, interval_mask
from .spec_model import Scenario, SpecSuite
from .strategy import AdmissibilityBounds, InstanceTable, Strategy, compute_bounds, flatten


@dataclass(frozen=True)
class TimingConstraint:
    var: str
    base: str | None
    lo: int
    hi: int

    def holds(self, assignment: Mapping[str, int], anchor: int = 0) -> bool:
        ref = anchor if self.base is None else assignment[self.base]
        return self.lo <= assignment[self.var] - ref <= self.hi


@dataclass(frozen=True)
class Group:
    id: int
    action: str
    members: tuple[str, ...]


@dataclass
class ConstraintSet:
    variables: dict[str, tuple[int, int]]
    owners: dict[str, tuple[str, str]]           # var -> (action, property)
    anchors: dict[str, int]                      # var -> anchor of its property
    timing: list[TimingConstraint]
    groups: list[Group]
    gamma: int
    horizons: dict[str, tuple[str, int]]         # property -> (last var, bound)
    cycles: tuple[int, ...]
    blocked: list[tuple[tuple[str, int], ...]] = field(default_factory=list)
    tables: dict[str, InstanceTable] = field(default_factory=dict)

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")


@dataclass
class Probe:
    gamma: int
    feasible: bool
    blocked: int = 0


@dataclass
class Schedule:
    scenario: str
    strategies: dict[str, Strategy]
    labels: dict[str, str]
    reliabilities: dict[str, float]
    allocation: dict[int, list[str]]
    demand: dict[int, int]
    gamma_star: int
    upper_bound: int
    probes: list[Probe] = field(default_factory=list)
    tables: dict[str, InstanceTable] = field(default_factory=dict)

    @property
    def assignment(self) -> dict[str, int]:
        out = {}
        for s in self.strategies.values():
            out.update(s.assignment)
        return out


def natural_key(name: str):
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name)]


def _resolve_scenario(suite: SpecSuite, scenario) -> Scenario:
    if isinstance(scenario, Scenario):
        return scenario
    return suite.scenario(scenario)


def scenario_tables(suite: SpecSuite, scenario) -> dict[str, InstanceTable]:
    sc = _resolve_scenario(suite, scenario)
    return {pid: flatten(suite.property(pid), anchor, suite.property_index(pid))
            for pid, anchor in sc.firings}


def scenario_bounds(suite: SpecSuite, scenario) -> dict[str, AdmissibilityBounds]:
    sc = _resolve_scenario(suite, scenario)
    return {pid: compute_bounds(suite, pid, anchor) for pid, anchor in sc.firings}


def build_groups(tables: Iterable[InstanceTable]) -> list[Group]:
    """Group timing variables by (action, replica index), first appearance order."""
    members: dict[tuple[str, int], list[str]] = {}
    for table in tables:
        for row in table.rows:
            members.setdefault((row.action, row.spatial_factor), []).append(
                row.timing_var)
    return [Group(i + 1, action, tuple(vs))
            for i, ((action, _), vs) in enumerate(members.items())]


def build_constraints(suite: SpecSuite, scenario, gamma: int,
                      bounds: Mapping[str, AdmissibilityBounds] | None = None,
                      blocked: Sequence[tuple[tuple[str, int], ...]] = (),
                      ) -> ConstraintSet:
    sc = _resolve_scenario(suite, scenario)
    tables = scenario_tables(suite, sc)
    if bounds is None:
        bounds = scenario_bounds(suite, sc)
    variables, owners, anchors, timing, horizons = {}, {}, {}, [], {}
    for pid, table in tables.items():
        b = bounds[pid]
        for row in table.rows:
            var = row.timing_var
            variables[var] = b.domains[var]
            owners[var] = (row.action, pid)
            anchors[var] = table.anchor
            if row.link is None:
                # root window tightened to its admissible range
                lo, hi = b.domains[var]
                timing.append(TimingConstraint(var, None, lo - table.anchor,
                                               hi - table.anchor))
            else:
                lo, hi = row.prefix.resolve(b.delta)
                timing.append(TimingConstraint(var, row.link, lo, hi))
        horizons[pid] = (table.rows[-1].timing_var, b.horizon_T)
    top = max((h for _, h in horizons.values()), default=0)
    return ConstraintSet(variables, owners, anchors, timing,
                         build_groups(tables.values()), gamma, horizons,
                         tuple(range(1, top + 1)), list(blocked), tables)


# ---------------------------------------------------------------------------
# Demand
# ---------------------------------------------------------------------------


def action_counts(assignment: Mapping[str, int],
                  owners: Mapping[str, tuple[str, str]]):
    """(cycle, action) -> {property: instance count}."""
    counts: dict[tuple[int, str], dict[str, int]] = {}
    for var, t in assignment.items():
        action, prop = owners[var]
        per = counts.setdefault((t, action), {})
        per[prop] = per.get(prop, 0) + 1
    return counts


def owners_of(tables: Iterable[InstanceTable]) -> dict[str, tuple[str, str]]:
    return {r.timing_var: (r.action, t.property)
            for t in tables for r in t.rows}


def demand_profile(assignment: Mapping[str, int],
                   tables: Iterable[InstanceTable],
                   horizon: int | None = None) -> list[int]:
    """Per-cycle demand; entry k is cycle k + 1."""
    counts = action_counts(assignment, owners_of(tables))
    top = max(assignment.values(), default=0)
    if horizon is not None:
        top = max(top, horizon)
    out = [0] * top
    for (t, _), per in counts.items():
        if t >= 1:
            out[t - 1] += max(per.values())
    return out


def group_demand(assignment: Mapping[str, int], groups: Sequence[Group],
               owners: Mapping[str, tuple[str, str]], t: int) -> int:
    """Group/sub-group arithmetic for one cycle, read literally.

    count(G) is 1 when any member sits at t; SUB(G) is the largest
    per-property member count at t; SUP(G) sums count over all groups of
    the same action.  Each group contributes count + max(0, SUB - SUP).
    """
    hit = {g.id: int(any(assignment[v] == t for v in g.members)) for g in groups}
    sup: dict[str, int] = {}
    for g in groups:
        sup[g.action] = sup.get(g.action, 0) + hit[g.id]
    total = 0
    for g in groups:
        per: dict[str, int] = {}
        for v in g.members:
            if assignment[v] == t:
                prop = owners[v][1]
                per[prop] = per.get(prop, 0) + 1
        sub = max(per.values(), default=0)
        total += hit[g.id] + max(0, sub - sup[g.action])
    return total


def allocation(assignment: Mapping[str, int],
               owners: Mapping[str, tuple[str, str]]) -> dict[int, list[str]]:
    """Cycle -> multiset of executed actions after cross-property sharing."""
    out: dict[int, list[str]] = {}
    counts = action_counts(assignment, owners)
    for (t, action), per in sorted(counts.items(),
                                   key=lambda kv: (kv[0][0], natural_key(kv[0][1]))):
        out.setdefault(t, []).extend([action] * max(per.values()))
    return out


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------


def to_model(cs: ConstraintSet) -> tuple[Model, list[str]]:
    names = list(cs.variables)
    index = {v: i for i, v in enumerate(names)}
    domains = [interval_mask(lo, hi) for lo, hi in cs.variables.values()]
    diffs = []
    for tc in cs.timing:
        x = index[tc.var]
        if tc.base is None:
            a = cs.anchors[tc.var]
            domains[x] &= interval_mask(max(0, a + tc.lo), a + tc.hi)
        else:
            diffs.append((x, index[tc.base], tc.lo, tc.hi))
    for var, bound in cs.horizons.values():
        domains[index[var]] &= interval_mask(0, bound)
    nogoods = [tuple((index[v], val) for v, val in ng) for ng in cs.blocked]
    owners = [cs.owners[v] for v in names]
    return Model(domains, owners, diffs, nogoods, cs.gamma), names


def solve_feasible(cs: ConstraintSet) -> dict[str, int] | None:
    """A total assignment meeting every constraint, or None if infeasible."""
    model, names = to_model(cs)
    values = Solver(model).solve()
    if values is None:
        return None
    return dict(zip(names, values))


def _strategy_of(table: InstanceTable, assignment: Mapping[str, int]) -> Strategy:
    return Strategy(table.variables,
                    tuple(assignment[v] for v in table.variables))


def _label_of(suite: SpecSuite, table: InstanceTable, strategy: Strategy) -> str:
    reports = admissible_strategies(suite, table.property, table.anchor)
    for k, rep in enumerate(reports):
        if rep.strategy.values == strategy.values:
            return option_label(table.prop_index, k)
    return "?"


def min_resources(suite: SpecSuite, scenario) -> Schedule:
    """Smallest resource limit with an admissible witness, by bisection.

    Every feasible witness is re-checked property by property; an
    inadmissible per-property assignment is blocked and the same limit is
    solved again.  Blocks persist across probes.
    """
    sc = _resolve_scenario(suite, scenario)
    bounds = scenario_bounds(suite, sc)
    tables = scenario_tables(suite, sc)
    owners = owners_of(tables.values())

    # pessimistic bound: densest cycle of the first admissible choices, no sharing
    first: dict[str, int] = {}
    for pid, table in tables.items():
        rep = next(r for r in admissible_strategies(suite, pid, table.anchor)
                   if r.admissible)
        first.update(rep.strategy.assignment)
    per_cycle: dict[int, int] = {}
    for t in first.values():
        per_cycle[t] = per_cycle.get(t, 0) + 1
    upper = max(per_cycle.values(), default=1)

    blocked: list[tuple[tuple[str, int], ...]] = []
    probes: list[Probe] = []

    def attempt(gamma: int) -> dict[str, int] | None:
        while True:
            cs = build_constraints(suite, sc, gamma, bounds, blocked)
            sol = solve_feasible(cs)
            if sol is None:
                probes.append(Probe(gamma, False, len(blocked)))
                return None
            bad = False
            for pid, table in tables.items():
                strat = _strategy_of(table, sol)
                if not strategy_reliability(suite, pid, table, strat).admissible:
                    blocked.append(tuple(zip(strat.vars, strat.values)))
                    bad = True
            if not bad:
                probes.append(Probe(gamma, True, len(blocked)))
                return sol

    lo, hi = 1, upper
    witness = None
    while lo < hi:
        mid = (lo + hi) // 2
        sol = attempt(mid)
        if sol is not None:
            hi, witness = mid, sol
        else:
            lo = mid + 1
    if witness is None:
        witness = attempt(hi)
        if witness is None:         # cannot happen: first choices fit `upper`
            raise RuntimeError("upper bound infeasible")

    strategies = {pid: _strategy_of(t, witness) for pid, t in tables.items()}
    reliabilities = {pid: strategy_reliability(suite, pid, tables[pid], s).computed
                     for pid, s in strategies.items()}
    labels = {pid: _label_of(suite, tables[pid], s) for pid, s in strategies.items()}
    top = max(b.horizon_T for b in bounds.values())
    prof = demand_profile(witness, tables.values(), top)
    return Schedule(sc.id, strategies, labels, reliabilities,
                    allocation(witness, owners),
                    {t + 1: d for t, d in enumerate(prof)}, hi, upper, probes,
                    tables)
