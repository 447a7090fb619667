"""One test per acceptance criterion; each prints [PASS]/[FAIL] lines."""

import json
import random
import time

import pytest

from relres import bench
from relres.cli import main
from relres.planner import (
    build_constraints, demand_profile, group_demand, min_resources, owners_of,
    scenario_tables, solve_feasible,
)
from relres.reliability import admissible_strategies, exact_reliability
from relres.report import round4
from relres.smtlib import export_smtlib
from relres.spec_model import correctness_steps
from relres.strategy import Strategy, compute_bounds, flatten

from conftest import ACC_R1_SHAPES, ACC_R2_SHAPES, CORPUS
from test_planner import DEMANDS, _random_assignment, brute_min, random_suite
from test_reliability import _ctx, _disjoint


class Checks:
    """Prints a pass/fail line per check; `verify` fails the test on any miss."""

    def __init__(self, capsys):
        self.capsys = capsys
        self.failed = []

    def __call__(self, criterion, ok, detail):
        if not ok:
            self.failed.append(criterion)
        with self.capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}", end="")
        return ok

    def verify(self):
        assert not self.failed, f"failed: {', '.join(self.failed)}"


@pytest.fixture
def check(capsys):
    return Checks(capsys)


def _cli_json(capsys, *argv):
    code = main(list(argv))
    out, _ = capsys.readouterr()
    return code, json.loads(out) if code == 0 else None


def test_c1_acc_r1_strategies(capsys, check):
    t0 = time.perf_counter()
    code, data = _cli_json(capsys, "strategies", str(CORPUS / "acc.spec"),
                           "--property", "ACC_R1", "--json")
    elapsed = time.perf_counter() - t0
    rows = data["properties"][0]["strategies"]
    check("C1 count", code == 0 and len(rows) == 4, f"{len(rows)} strategies")
    check("C1 reliability", all(abs(r["reliability"] - 0.9504) <= 5e-5 for r in rows),
          ", ".join(r["reliability_4dp"] for r in rows))
    check("C1 admissible", all(r["admissible"] for r in rows), "all at target 0.95")
    check("C1 runtime", elapsed < 1.0, f"{elapsed:.3f} s")
    check.verify()


def test_c2_acc_r2_table(acc, check):
    by_shape = {r.strategy.values: r for r in admissible_strategies(acc, "ACC_R2")}
    want = {"2A": "0.9999", "2B": "0.9939", "2C": "0.9216",
            "2D": "0.9995", "2E": "0.9780", "2F": "0.9216"}
    for name, text in want.items():
        got = round4(by_shape[ACC_R2_SHAPES[name]].computed)
        check(f"C2 {name}", got == text, f"{got} (expected {text})")
    good = {n for n, v in ACC_R2_SHAPES.items() if by_shape[v].admissible}
    check("C2 admissible set", good == {"2A", "2B", "2D"}, str(sorted(good)))
    check.verify()


def test_c3_bounds(acc, check):
    b = compute_bounds(acc, "ACC_R2")
    top = max(compute_bounds(acc, p.id).horizon_T for p in acc.properties)
    check("C3 delta", b.delta == {1: 2}, f"Δ = {b.delta.get(1)}")
    check("C3 horizon", top == 5, f"𝒯 = {top}")
    check.verify()


def test_c4_acc_valuation(acc, check):
    tables = scenario_tables(acc, "all").values()
    sol = solve_feasible(build_constraints(acc, "all", 2))
    peak = max(demand_profile(sol, tables)) if sol else None
    check("C4 gamma 2", sol is not None and peak <= 2, f"witness peak demand {peak}")
    check("C4 gamma 1", solve_feasible(build_constraints(acc, "all", 1)) is None,
          "infeasible")
    g = min_resources(acc, "all").gamma_star
    check("C4 min-resources", g == 2, f"gamma_star = {g}")
    check.verify()


def test_c5_combination_demands(acc, check):
    tables = scenario_tables(acc, "all")
    got = []
    for r1, r2, _ in DEMANDS:
        a = dict(zip(tables["ACC_R1"].variables, ACC_R1_SHAPES[r1]))
        a.update(zip(tables["ACC_R2"].variables, ACC_R2_SHAPES[r2]))
        got.append(max(demand_profile(a, tables.values())))
    want = [d for *_, d in DEMANDS]
    check("C5 resource column", got == want, ",".join(map(str, got)))
    check.verify()


# printed per-property cycles of the simultaneous-failure allocation
PRINTED_ALLOCATION = {1: (1, 2, 2, 5, 5), 2: (1, 4, 5), 3: (2, 4, 5), 4: (1, 2, 4, 3, 5),
          5: (1, 3), 6: (2, 2, 5, 5), 7: (2, 4, 3, 5), 8: (3, 4, 7), 9: (2, 3),
          10: (1, 2, 2, 5, 5), 11: (3, 6, 6), 12: (2, 4, 3, 5), 13: (1, 4, 5),
          14: (6, 7), 15: (1, 2, 4, 3, 5)}


def test_c6_ngc_case_study(ngc, check):
    a, tables = {}, []
    for i, vals in PRINTED_ALLOCATION.items():
        t = flatten(ngc.property(f"NGCS_R{i}"), 0, i)
        tables.append(t)
        a.update(Strategy(t.variables, vals).assignment)
    peak = max(demand_profile(a, tables))
    check("C6 printed allocation", peak == 3, f"max demand {peak}")

    t0 = time.perf_counter()
    want = {"simultaneous": 3, "temporary": 2, "permanent": 2}
    for sid, expected in want.items():
        g = min_resources(ngc, sid).gamma_star
        check(f"C6 {sid}", g == expected, f"gamma_star = {g} (expected {expected})")
    infeasible = solve_feasible(build_constraints(ngc, "simultaneous", 2)) is None
    check("C6 simultaneous gamma 2", infeasible, "infeasible" if infeasible else "feasible")
    elapsed = time.perf_counter() - t0
    check("C6 runtime", elapsed < 60, f"{elapsed:.2f} s")
    check.verify()


R4_BASE = [(1, 2, 3), (1, 2, 3), (1, 2, 4), (1, 2, 4), (2, 3, 4), (2, 3, 4),
           (2, 3, 5), (2, 3, 5), (1, 3, 4), (1, 3, 4), (1, 3, 5), (1, 3, 5),
           (2, 4, 5), (2, 4, 5), (2, 4, 6), (2, 4, 6)]


def r4_rows():
    """Printed R4 shapes as (act6, act1, act2, act1', act2') cycles."""
    rows = {}
    for star, offset in (("", 1), ("*", 2)):
        for i, (a6, a1, a2) in enumerate(R4_BASE):
            second = a1 + offset
            rows[f"4{'ABCDEFGHIJKLMNOP'[i]}{star}"] = (a6, a1, a2, second,
                                                       second + 1 + i % 2)
    return rows


def test_c7_ngc_admissible_sets(ngc, check):
    reps = admissible_strategies(ngc, "NGCS_R13")
    good = {r.label for r in reps if r.admissible}
    want = {"13A", "13B", "13C", "13E", "13F", "13G"}
    check("C7 R13", good == want, str(sorted(good)))

    by_shape = {r.strategy.values: r for r in admissible_strategies(ngc, "NGCS_R4")}
    wrong = []
    for name, shape in r4_rows().items():
        expected = not (name.endswith("*") and name[1] >= "I")
        if by_shape[shape].admissible != expected:
            wrong.append(name)
    check("C7 R4 partition", not wrong,
          "4A-4H* admissible, 4I*-4P* not" if not wrong else f"mismatch {wrong}")
    check.verify()


def test_c8_property_suites(acc, ngc, check):
    bad = 0
    for suite, pid in [(acc, "ACC_R1"), (acc, "ACC_R2"), (ngc, "NGCS_R13")]:
        prop, table, rel, outcome = _ctx(suite, pid)
        steps = correctness_steps(prop)
        for rep in admissible_strategies(suite, pid):
            exact = exact_reliability(rep.strategy, table, steps, 0, rel, outcome)
            if exact > rep.computed + 1e-12 or (
                    _disjoint(rep.ways) and abs(exact - rep.computed) > 1e-12):
                bad += 1
    check("C8a exact vs closed form", bad == 0, f"{bad} violations")

    rng = random.Random(2024)
    mismatches = 0
    cases = [(acc, "all"), (ngc, "simultaneous"), (ngc, "temporary"), (ngc, "permanent")]
    for k in range(1000):
        suite, sid = cases[k % len(cases)]
        a, tables = _random_assignment(suite, sid, rng)
        cs = build_constraints(suite, sid, 1)
        owners = owners_of(tables.values())
        prof = demand_profile(a, tables.values())
        mismatches += any(group_demand(a, cs.groups, owners, t) != d
                          for t, d in enumerate(prof, start=1))
    check("C8b group arithmetic", mismatches == 0, f"{mismatches}/1000 differ")

    differ = []
    for seed in range(50):
        suite = random_suite(random.Random(seed))
        if min_resources(suite, "s").gamma_star != brute_min(suite, "s"):
            differ.append(seed)
    check("C8c bisection vs brute force", not differ, f"{len(differ)}/50 differ")

    try:
        import z3
    except ImportError:
        check("C8d SMT agreement", True, "z3 not installed, skipped")
    else:
        agree = []
        for g in (1, 2, 3):
            cs = build_constraints(acc, "all", g)
            s = z3.Solver()
            s.from_string(export_smtlib(cs))
            agree.append((s.check() == z3.sat) == (solve_feasible(cs) is not None))
        check("C8d SMT agreement", all(agree), "gamma 1, 2, 3")
    check.verify()


def test_c9_bench_trend(check):
    rows = [bench.run_one(bench.BenchSpec(3, 3, d, seed=1), repeats=5)
            for d in (5, 10, 20, 40)]
    ms = [r["millis"] for r in rows]
    check("C9 trend", ms == sorted(ms), " -> ".join(f"{m:.1f} ms" for m in ms))
    check.verify()
