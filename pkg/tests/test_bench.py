import pytest

from relres.bench import (
    BenchCapExceeded, BenchSpec, CSV_FIELDS, generate, generate_text, parse_range,
    run_one, to_csv,
)
from relres.reliability import admissible_strategies
from relres.spec_model import sequential_depth


def test_deterministic():
    spec = BenchSpec(3, 2, 8, (1, 2), (1, 2), seed=11)
    assert generate_text(spec) == generate_text(spec)
    assert generate_text(spec) != generate_text(BenchSpec(3, 2, 8, (1, 2), (1, 2), seed=12))


def test_smallest_case():
    row = run_one(BenchSpec(1, 1, 1, seed=0))
    assert row["gamma_star"] == 1 and row["millis"] >= 0


def test_depth_and_admissibility():
    suite = generate(BenchSpec(2, 3, 9, (1, 2), (1, 2), seed=5))
    for p in suite.properties:
        assert sequential_depth(p.reliability_spec) == 9
        assert all(r.admissible for r in admissible_strategies(suite, p.id))


def test_spatial_and_temporal_shapes():
    text = generate_text(BenchSpec(4, 2, 6, (2, 2), (2, 2), seed=1))
    assert text.count("[~2]") == 8 and text.count("[=2]") == 4


def test_caps():
    with pytest.raises(BenchCapExceeded):
        BenchSpec(1, 1, 2001).check()
    with pytest.raises(BenchCapExceeded):
        BenchSpec(1, 21, 30).check()
    with pytest.raises(BenchCapExceeded):
        BenchSpec(1, 1, 3, spatial=(1, 5)).check()
    with pytest.raises(ValueError):
        BenchSpec(1, 3, 2).check()


def test_parse_range():
    assert parse_range("2") == (2, 2) and parse_range("1..3") == (1, 3)


def test_csv_header():
    text = to_csv([run_one(BenchSpec(1, 1, 2, seed=3))])
    assert text.splitlines()[0] == ",".join(CSV_FIELDS)
