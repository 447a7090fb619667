"""Seeded random suites for scalability runs."""

from __future__ import annotations

import csv
import io
import random
import statistics
import time
from dataclasses import dataclass
from typing import Iterable

from .errors import RelresError
from .planner import min_resources
from .reliability import clear_caches
from .spec_model import SpecSuite, parse_suite

MAX_PROPERTIES = 50
MAX_ACTIONS = 20
MAX_DEPTH = 2000
MAX_SPATIAL = 4
MAX_TEMPORAL = 3

CSV_FIELDS = ["seed", "properties", "actions_per_property", "depth", "spatial",
              "temporal", "gamma_star", "millis"]


class BenchCapExceeded(RelresError):
    pass


@dataclass(frozen=True)
class BenchSpec:
    properties: int
    actions_per_property: int
    depth: int
    spatial: tuple[int, int] = (1, 1)
    temporal: tuple[int, int] = (1, 1)
    seed: int = 0

    def check(self) -> None:
        for name, val in [("properties", self.properties),
                          ("actions", self.actions_per_property),
                          ("depth", self.depth)]:
            if val < 1:
                raise ValueError(f"{name} must be >= 1")
        for name, (lo, hi) in [("spatial", self.spatial),
                               ("temporal", self.temporal)]:
            if not 1 <= lo <= hi:
                raise ValueError(f"bad {name} range {lo}..{hi}")
        if self.depth < self.actions_per_property:
            raise ValueError("depth must be >= actions per property")
        caps = [("properties", self.properties, MAX_PROPERTIES),
                ("actions", self.actions_per_property, MAX_ACTIONS),
                ("depth", self.depth, MAX_DEPTH),
                ("spatial", self.spatial[1], MAX_SPATIAL),
                ("temporal", self.temporal[1], MAX_TEMPORAL)]
        for name, val, cap in caps:
            if val > cap:
                raise BenchCapExceeded(f"{name} {val} exceeds cap {cap}")


def parse_range(text: str) -> tuple[int, int]:
    """'2' -> (2, 2); '1..3' -> (1, 3)."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    return int(text), int(text)


def _split(total: int, parts: int, rng: random.Random) -> list[int]:
    """Random composition of `total` into `parts` positive integers."""
    cuts = sorted(rng.sample(range(1, total), parts - 1)) if parts > 1 else []
    edges = [0] + cuts + [total]
    return [b - a for a, b in zip(edges, edges[1:])]


def generate_text(spec: BenchSpec) -> str:
    spec.check()
    rng = random.Random(spec.seed)
    pool = spec.actions_per_property + spec.properties - 1
    lines = ["timebase 10 ms", ""]
    rel = {}
    for k in range(1, pool + 1):
        rel[k] = rng.randint(900, 990) / 1000
        lines.append(f"action a{k} causes o{k} reliability {rel[k]}")
    lines.append("")
    ids = []
    for p in range(1, spec.properties + 1):
        acts = sorted(rng.sample(range(1, pool + 1), spec.actions_per_property))
        his = _split(spec.depth, len(acts), rng)
        m = rng.randint(*spec.temporal)
        correct, rely = [], []
        target = 1.0
        for k, hi in zip(acts, his):
            window = "##1" if hi == 1 else f"##[1:{hi}]"
            n = rng.randint(*spec.spatial)
            correct.append(f"{window} o{k}")
            rely.append(f"{window} a{k}" + (f"[~{n}]" if n > 1 else ""))
            target *= rel[k]
        if m > 1:
            window, first = rely[0].split(" ", 1)
            body = " ".join([window, f"({' '.join([first] + rely[1:])})[={m}]"])
        else:
            body = " ".join(rely)
        pid = f"P{p}"
        ids.append(pid)
        lines += [f"property {pid} target {target - 1e-4:.4f} {{",
                  f"  correct: e{p} |-> {' '.join(correct)}",
                  f"  rely:    e{p} |-> {body}",
                  "}", ""]
    lines.append("scenario all: " + ", ".join(f"{pid}@0" for pid in ids))
    return "\n".join(lines) + "\n"


def generate(spec: BenchSpec) -> SpecSuite:
    return parse_suite(generate_text(spec))


def run_one(spec: BenchSpec, repeats: int = 1) -> dict:
    suite = generate(spec)
    times, gamma = [], None
    for _ in range(repeats):
        clear_caches()
        t0 = time.perf_counter()
        gamma = min_resources(suite, "all").gamma_star
        times.append((time.perf_counter() - t0) * 1000)
    return {
        "seed": spec.seed, "properties": spec.properties,
        "actions_per_property": spec.actions_per_property, "depth": spec.depth,
        "spatial": f"{spec.spatial[0]}..{spec.spatial[1]}",
        "temporal": f"{spec.temporal[0]}..{spec.temporal[1]}",
        "gamma_star": gamma, "millis": round(statistics.median(times), 3),
    }


def run(specs: Iterable[BenchSpec], repeats: int = 1) -> list[dict]:
    return [run_one(s, repeats) for s in specs]


def to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()
