"""Text tables and the JSON mirror for analysis results."""

from __future__ import annotations

import hashlib
import os
import sys
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from .planner import Schedule, natural_key
from .reliability import ReliabilityReport
from .spec_model import SpecSuite, format_suite
from .strategy import InstanceTable


def round4(x: float) -> str:
    """Half-up rounding to four decimals of the shortest repr of `x`."""
    return str(Decimal(repr(x)).quantize(Decimal("0.0001"), ROUND_HALF_UP))


def suite_digest(suite: SpecSuite) -> str:
    return hashlib.sha256(format_suite(suite).encode()).hexdigest()[:16]


def use_color(stream=None) -> bool:
    stream = stream or sys.stdout
    if "NO_COLOR" in os.environ:
        return False
    return hasattr(stream, "isatty") and stream.isatty()


@dataclass
class StrategyRow:
    label: str
    # one lane per (re-execution, replica) pair: cycle -> actions
    lanes: list[dict[int, list[str]]]
    values: dict[str, int]
    reliability: float
    admissible: bool

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "assignment": self.values,
            "lanes": [{str(t): acts for t, acts in sorted(lane.items())}
                      for lane in self.lanes],
            "reliability": self.reliability,
            "reliability_4dp": round4(self.reliability),
            "admissible": self.admissible,
        }


@dataclass
class StrategyTable:
    property: str
    target: float
    rows: list[StrategyRow]

    @property
    def horizon(self) -> int:
        return max((t for r in self.rows for lane in r.lanes for t in lane),
                   default=0)

    def to_json(self) -> dict:
        return {"property": self.property, "target": self.target,
                "horizon": self.horizon,
                "strategies": [r.to_json() for r in self.rows]}


@dataclass
class Report:
    digest: str
    tables: list[StrategyTable] = field(default_factory=list)
    schedule: Schedule | None = None

    def to_json(self) -> dict:
        out: dict = {"suite_digest": self.digest,
                     "properties": [t.to_json() for t in self.tables]}
        if self.schedule is not None:
            out["schedule"] = schedule_json(self.schedule)
        return out


def strategy_table(suite: SpecSuite, table: InstanceTable,
                   reports: Sequence[ReliabilityReport]) -> StrategyTable:
    prop = suite.property(table.property)
    lane_keys = sorted({(r.reexec_index, r.spatial_factor) for r in table.rows})
    rows = []
    for rep in reports:
        lanes = []
        for key in lane_keys:
            lane: dict[int, list[str]] = {}
            for row in table.rows:
                if (row.reexec_index, row.spatial_factor) == key:
                    lane.setdefault(rep.strategy[row.timing_var], []).append(row.action)
            lanes.append(lane)
        rows.append(StrategyRow(rep.label, lanes, rep.strategy.assignment,
                                rep.computed, rep.admissible))
    return StrategyTable(prop.id, prop.target, rows)


def _grid(header: list[str], body: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    fmt = lambda r: " | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
    sep = "-+-".join("-" * w for w in widths)
    return [fmt(header), sep] + [fmt(r) for r in body]


def render_strategy_table(st: StrategyTable, color: bool = False) -> str:
    horizon = st.horizon
    header = ["Option"] + [f"C{t}" for t in range(1, horizon + 1)] + [
        "Reliability", "Admissible"]
    body, marks = [], []
    for row in st.rows:
        for k, lane in enumerate(row.lanes):
            cells = [",".join(lane.get(t, [])) for t in range(1, horizon + 1)]
            if k == 0:
                body.append([row.label] + cells
                            + [round4(row.reliability), "yes" if row.admissible else "no"])
            else:
                body.append([""] + cells + ["", ""])
            marks.append(row.admissible)
    lines = _grid(header, body)
    if color:
        lines = lines[:2] + [f"\x1b[32m{l}\x1b[0m" if ok else l
                             for l, ok in zip(lines[2:], marks)]
    title = f"{st.property} (target {st.target})"
    return "\n".join([title] + lines)


def schedule_json(s: Schedule) -> dict:
    return {
        "scenario": s.scenario,
        "gamma_star": s.gamma_star,
        "upper_bound": s.upper_bound,
        "properties": [{
            "property": pid,
            "label": s.labels[pid],
            "assignment": strat.assignment,
            "reliability": s.reliabilities[pid],
            "reliability_4dp": round4(s.reliabilities[pid]),
        } for pid, strat in s.strategies.items()],
        "allocation": {str(t): acts for t, acts in sorted(s.allocation.items())},
        "demand": {str(t): d for t, d in sorted(s.demand.items())},
        "probes": [{"gamma": p.gamma, "feasible": p.feasible,
                    "blocked": p.blocked} for p in s.probes],
    }


def render_schedule(s: Schedule) -> str:
    horizon = max(s.demand, default=0)
    header = ["Property", "Option"] + [f"C{t}" for t in range(1, horizon + 1)]
    body = []
    for pid, strat in s.strategies.items():
        table = s.tables[pid]
        cells = []
        for t in range(1, horizon + 1):
            acts = [r.action for r in table.rows if strat[r.timing_var] == t]
            cells.append(",".join(sorted(acts, key=natural_key)))
        body.append([pid, s.labels[pid]] + cells)
    body.append(["Allocation", ""] + [
        "<" + ",".join(s.allocation.get(t, [])) + ">"
        for t in range(1, horizon + 1)])
    body.append(["Demand", ""] + [str(s.demand.get(t, 0))
                                  for t in range(1, horizon + 1)])
    lines = [f"scenario {s.scenario}: gamma_star = {s.gamma_star}"]
    return "\n".join(lines + _grid(header, body))


def render_report(report: Report, color: bool = False) -> str:
    parts = [f"suite {report.digest}"]
    parts += [render_strategy_table(t, color) for t in report.tables]
    if report.schedule is not None:
        parts.append(render_schedule(report.schedule))
    return "\n\n".join(parts) + "\n"
