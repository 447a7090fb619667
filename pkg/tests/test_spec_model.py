import pytest
from hypothesis import given, settings, strategies as st

from relres.errors import SpecError
from relres.spec_model import (
    Chain, Consec, DelayWindow, Spatial, Step, Temporal, format_seq,
    format_suite, parse_clause, parse_sequence, parse_suite, sequential_depth,
    validate_suite,
)

HEADER = "action a causes o reliability 0.9\naction b causes q reliability 0.8\n"


def diags(text):
    with pytest.raises(SpecError) as info:
        parse_suite(text)
    return [str(d) for d in info.value.diagnostics]


def test_spatial_chain_clause():
    label, ante, cons = parse_clause(
        "rely: lead_obs |-> ##[1:2] act1[~2] ##[1:2] act2[~2]")
    assert label == "rely"
    assert ante.event == "lead_obs"
    assert cons == Chain((Spatial(Step("act1", DelayWindow(1, 2)), 2),
                          Spatial(Step("act2", DelayWindow(1, 2)), 2)))


def test_temporal_block_takes_outer_delay():
    _, _, cons = parse_clause("rely: lead_gap |-> ##[1:3] (act1[*2] ##1 act2)[=2]")
    assert cons == Temporal(Chain((Consec(Step("act1", DelayWindow(1, 3)), 2),
                                   Step("act2", DelayWindow(1, 1)))), 2)


def test_empty_block_reports_empty_chain():
    out = diags("property P target 0.9 { correct: e |-> rely: e |-> }")
    assert any("empty chain" in d for d in out)


def test_corpus_suites_validate(acc, ngc):
    assert validate_suite(acc) == []
    assert validate_suite(ngc) == []
    assert len(ngc.properties) == 15 and len(ngc.actions) == 12
    assert ngc.action_reliability("act6") == 0.996


def test_unknown_outcome_single_diagnostic():
    out = diags(HEADER + "property P target 0.9 {\n"
                "  correct: e |-> ##1 o ##1 zz\n  rely: e |-> ##1 a }")
    assert len(out) == 1 and "zz" in out[0]


def test_outcome_without_causing_rely_action():
    out = diags(HEADER + "property P target 0.9 {\n"
                "  correct: e |-> ##1 o ##1 q\n  rely: e |-> ##1 a }")
    assert len(out) == 1 and "[P]" in out[0]


def test_target_one_rejected():
    out = diags(HEADER + "property P target 1.0 { correct: e |-> ##1 o  rely: e |-> ##1 a }")
    assert any("target must be < 1" in d for d in out)


def test_dollar_only_in_antecedent():
    out = diags(HEADER + "property P target 0.9 { correct: e |-> ##[1:$] o  rely: e |-> ##1 a }")
    assert any("'$'" in d for d in out)
    parse_suite(HEADER + "property P target 0.9 {\n"
                "  correct: e |-> ##1 o\n  rely: e ##[1:$] e |-> ##1 a }")


@pytest.mark.parametrize("body, fragment", [
    ("##1 a[~1]", ">= 2"),
    ("##1 (a ##1 b)[~2]", "single"),
    ("##1 ((a)[=2] ##1 b)[=2]", "nested"),
])
def test_shape_errors(body, fragment):
    out = diags(HEADER + "property P target 0.5 {\n"
                f"  correct: e |-> ##1 o\n  rely: e |-> {body} }}")
    assert any(fragment in d for d in out), out


def test_duplicate_and_scenario_errors():
    text = (HEADER + "action a causes o reliability 0.7\n"
            "property P target 0.5 { correct: e |-> ##1 o  rely: e |-> ##1 a }\n"
            "scenario s: P@0, Q@1\n")
    out = diags(text)
    assert any("duplicate" in d for d in out)
    assert any("'Q'" in d for d in out)


def test_syntax_error_has_position_and_recovers():
    out = diags("bogus stuff\n" + HEADER + "property P target 0.9 { correct: e |-> ##1 o\n"
                "  rely: e |-> ##1 a }\nfoo\n")
    assert out[0].startswith("1:1:")
    assert any(d.startswith("6:") for d in out)


def test_comments_and_hash_delay():
    suite = parse_suite("# header comment\n" + HEADER +
                        "property P target 0.5 {  # trailing\n"
                        "  correct: e |-> ##2 o\n  rely: e |-> ##2 a\n}\n")
    assert suite.properties[0].reliability_spec == Step("a", DelayWindow(2, 2))


def test_sequential_depth_examples():
    assert sequential_depth(parse_sequence("##[1:2] act1 ##[1:2] act2")) == 4
    assert sequential_depth(parse_sequence("##[1:3] act1[*2] ##1 act2")) == 5
    assert sequential_depth(parse_sequence("##0 act1")) == 0
    with pytest.raises(ValueError):
        sequential_depth(parse_sequence("##[1:$] act1"))


def test_sequential_depth_counts_one_temporal_execution():
    assert sequential_depth(parse_sequence("##[1:3] (act1[*2] ##1 act2)[=2]")) == 5


def test_corpus_round_trip(acc, ngc):
    for suite in (acc, ngc):
        again = parse_suite(format_suite(suite))
        assert again == suite


def test_parse_is_deterministic():
    text = "bogus\n" + HEADER + "property P target 2 { correct: e |-> ##1 o rely: e |-> ##1 a }"
    assert diags(text) == diags(text)


# -- generated sequences ----------------------------------------------------

windows = st.tuples(st.integers(0, 4), st.integers(0, 3)).map(
    lambda p: DelayWindow(p[0], p[0] + p[1]))
names = st.sampled_from(["a", "b", "c1", "act_2"])
steps = st.builds(Step, names, windows)


@st.composite
def items(draw):
    kind = draw(st.sampled_from(["step", "spatial", "consec"]))
    s = draw(steps)
    if kind == "spatial":
        return Spatial(s, draw(st.integers(2, 4)))
    if kind == "consec":
        return Consec(s, draw(st.integers(2, 4)))
    return s


@st.composite
def sequences(draw):
    parts = draw(st.lists(items(), min_size=1, max_size=4))
    if draw(st.booleans()) and len(parts) >= 2:
        k = draw(st.integers(0, len(parts) - 1))
        block = parts[k:] if len(parts[k:]) > 1 else parts[k]
        block = Chain(tuple(block)) if isinstance(block, list) else block
        parts = parts[:k] + [Temporal(block, draw(st.integers(2, 3)))]
    return parts[0] if len(parts) == 1 else Chain(tuple(parts))


@settings(max_examples=200, deadline=None)
@given(sequences())
def test_format_parse_round_trip(expr):
    text = format_seq(expr)
    assert parse_sequence(text) == expr
    assert format_seq(parse_sequence(text)) == text


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="actionpryg0123456789 #[]()~*=:$|->{}.@\n", max_size=80))
def test_parser_is_total(text):
    try:
        parse_suite(text)
    except SpecError as exc:
        assert exc.diagnostics
