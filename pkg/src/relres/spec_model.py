"""Specification language: AST, parser, validator and pretty-printer.

A suite file is a sequence of declarations::

    timebase 50 ms
    action act1 causes thrt_adj reliability 0.8
    property ACC_R1 target 0.95 {
      correct: lead_obs |-> ##[1:2] thrt_adj ##[1:2] brk_adj
      rely:    lead_obs |-> ##[1:2] act1[~2] ##[1:2] act2[~2]
    }
    scenario all: ACC_R1@0, ACC_R2@0

``#`` starts a line comment (``##`` is the delay operator).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Union

from .errors import Diagnostic, SpecError

Pos = tuple[int, int]

# reliabilities and targets are compared with this much slack
PROB_SLACK = 1e-9


@dataclass(frozen=True)
class DelayWindow:
    lo: int
    hi: int | None  # None: unbounded (`$`)

    @property
    def bounded(self) -> bool:
        return self.hi is not None

    def __str__(self) -> str:
        if self.hi == self.lo:
            return f"##{self.lo}"
        hi = "$" if self.hi is None else self.hi
        return f"##[{self.lo}:{hi}]"


ZERO = DelayWindow(0, 0)


@dataclass(frozen=True)
class Step:
    event: str
    window: DelayWindow
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Spatial:
    step: Step
    n: int


@dataclass(frozen=True)
class Consec:
    step: Step
    k: int


@dataclass(frozen=True)
class Temporal:
    block: "SeqExpr"
    m: int


@dataclass(frozen=True)
class Chain:
    items: tuple["SeqExpr", ...]


SeqExpr = Union[Step, Spatial, Consec, Temporal, Chain]


@dataclass(frozen=True)
class OutcomeDef:
    name: str
    reliability: float


@dataclass(frozen=True)
class ActionDef:
    name: str
    causes: str
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PropertyPair:
    id: str
    target: float
    trigger: SeqExpr
    correctness: SeqExpr
    reliability_spec: SeqExpr
    # antecedent as written on the `correct:` clause; anchoring ignores it
    correct_trigger: SeqExpr | None = None
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Scenario:
    id: str
    firings: tuple[tuple[str, int], ...]
    pos: Pos | None = field(default=None, compare=False, repr=False)

    @property
    def anchors(self) -> dict[str, int]:
        return dict(self.firings)


@dataclass(frozen=True)
class SpecSuite:
    timebase_ms: int | None
    actions: tuple[ActionDef, ...]
    outcomes: tuple[OutcomeDef, ...]
    properties: tuple[PropertyPair, ...]
    scenarios: tuple[Scenario, ...] = ()

    def property(self, pid: str) -> PropertyPair:
        for p in self.properties:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def property_index(self, pid: str) -> int:
        """1-based position of a property in declaration order."""
        for i, p in enumerate(self.properties, 1):
            if p.id == pid:
                return i
        raise KeyError(pid)

    def scenario(self, sid: str) -> Scenario:
        for s in self.scenarios:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def outcome_reliability(self, outcome: str) -> float:
        for o in self.outcomes:
            if o.name == outcome:
                return o.reliability
        raise KeyError(outcome)

    def causes(self, action: str) -> str:
        for a in self.actions:
            if a.name == action:
                return a.causes
        raise KeyError(action)

    def action_reliability(self, action: str) -> float:
        return self.outcome_reliability(self.causes(action))


# ---------------------------------------------------------------------------
# AST helpers
# ---------------------------------------------------------------------------


def first_step(expr: SeqExpr) -> Step:
    if isinstance(expr, Step):
        return expr
    if isinstance(expr, (Spatial, Consec)):
        return expr.step
    if isinstance(expr, Temporal):
        return first_step(expr.block)
    return first_step(expr.items[0])


def with_first_window(expr: SeqExpr, window: DelayWindow) -> SeqExpr:
    if isinstance(expr, Step):
        return replace(expr, window=window)
    if isinstance(expr, (Spatial, Consec)):
        return replace(expr, step=replace(expr.step, window=window))
    if isinstance(expr, Temporal):
        return replace(expr, block=with_first_window(expr.block, window))
    return Chain((with_first_window(expr.items[0], window),) + expr.items[1:])


def iter_steps(expr: SeqExpr) -> Iterator[Step]:
    if isinstance(expr, Step):
        yield expr
    elif isinstance(expr, (Spatial, Consec)):
        yield expr.step
    elif isinstance(expr, Temporal):
        yield from iter_steps(expr.block)
    else:
        for item in expr.items:
            yield from iter_steps(item)


def chain_items(expr: SeqExpr) -> tuple[SeqExpr, ...]:
    return expr.items if isinstance(expr, Chain) else (expr,)


def correctness_steps(prop: PropertyPair) -> tuple[Step, ...]:
    """The correctness consequent as an ordered tuple of outcome steps."""
    items = chain_items(prop.correctness)
    if not all(isinstance(i, Step) for i in items):
        raise ValueError(f"{prop.id}: correctness is not a plain chain")
    return items  # type: ignore[return-value]


def sequential_depth(expr: SeqExpr) -> int:
    """Latest cycle, relative to the anchor, that one execution can reach.

    Temporal blocks count once: re-execution offsets are not known here.
    """
    if isinstance(expr, Step):
        if expr.window.hi is None:
            raise ValueError(f"unbounded window on {expr.event} in consequent")
        return expr.window.hi
    if isinstance(expr, Spatial):
        return sequential_depth(expr.step)
    if isinstance(expr, Consec):
        return sequential_depth(expr.step) + expr.k - 1
    if isinstance(expr, Temporal):
        return sequential_depth(expr.block)
    return sum(sequential_depth(i) for i in expr.items)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<impl>\|->)
  | (?P<delay>\#\#)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[\[\]\(\)\{\}:,@~*=$])
""", re.VERBOSE)

KEYWORDS = ("timebase", "action", "property", "scenario")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    first_on_line: bool


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, line_start, pos = 1, 0, 0
    line_has_token = False
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            diags.append(Diagnostic(f"unexpected character {text[pos]!r}",
                                    line, col))
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
            line_has_token = False
        elif kind not in ("ws", "comment"):
            if kind == "punct":
                kind = m.group()
            tokens.append(Token(kind, m.group(), line, col, not line_has_token))
            line_has_token = True
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, True))
    return tokens, diags


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Abort(Exception):
    pass


class Parser:
    def __init__(self, text: str):
        self.tokens, self.diagnostics = tokenize(text)
        self.i = 0

    # token plumbing

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        self.diagnostics.append(Diagnostic(message, tok.line, tok.col))
        raise _Abort()

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            self.error(f"expected {what or kind!r}, found {found!r}")
        return self.advance()

    def expect_word(self, word: str) -> Token:
        if self.tok.kind != "ident" or self.tok.text != word:
            found = self.tok.text or "end of input"
            self.error(f"expected {word!r}, found {found!r}")
        return self.advance()

    def integer(self) -> int:
        t = self.expect("number", "integer")
        if not t.text.isdigit():
            self.error(f"expected integer, found {t.text!r}", t)
        return int(t.text)

    def number(self) -> float:
        return float(self.expect("number", "number").text)

    def at_word(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    def recover(self):
        self.advance()
        while self.tok.kind != "eof":
            if (self.tok.first_on_line and self.tok.kind == "ident"
                    and self.tok.text in KEYWORDS):
                return
            self.advance()

    # sequences

    def delay(self) -> DelayWindow:
        self.expect("delay", "##")
        if self.tok.kind == "number":
            n = self.integer()
            return DelayWindow(n, n)
        self.expect("[")
        lo = self.integer()
        self.expect(":")
        if self.tok.kind == "$":
            self.advance()
            hi = None
        else:
            hi = self.integer()
        self.expect("]")
        return DelayWindow(lo, hi)

    def sequence(self, closers: tuple[str, ...]) -> SeqExpr:
        items: list[SeqExpr] = []
        while self.tok.kind not in closers and self.tok.kind != "eof":
            if items and self.tok.kind != "delay":
                self.error("expected '##' delay between sequence elements")
            items.extend(chain_items(self.element()))
        if not items:
            self.error("empty chain")
        return items[0] if len(items) == 1 else Chain(tuple(items))

    def element(self) -> SeqExpr:
        window = self.delay() if self.tok.kind == "delay" else ZERO
        if self.tok.kind == "(":
            self.advance()
            if self.tok.kind == "delay":
                self.error("a parenthesised block takes its delay from outside")
            inner = self.sequence(closers=(")",))
            self.expect(")")
            expr = with_first_window(inner, window)
            if self.tok.kind == "[":
                op, count = self.postfix()
                if op != "=":
                    self.error(f"[{op}n] applies only to a single action")
                expr = Temporal(expr, count)
            return expr
        t = self.expect("ident", "event name")
        expr: SeqExpr = Step(t.text, window, (t.line, t.col))
        seen: list[str] = []
        while self.tok.kind == "[":
            op_tok = self.tokens[self.i + 1]
            op, count = self.postfix()
            if op == "=":
                expr = Temporal(expr, count)
            elif seen or isinstance(expr, Temporal):
                self.error(f"cannot combine [{op}n] with another operator",
                           op_tok)
            elif op == "~":
                expr = Spatial(expr, count)
            else:
                expr = Consec(expr, count)
            seen.append(op)
        return expr

    def postfix(self) -> tuple[str, int]:
        self.expect("[")
        if self.tok.kind not in ("~", "*", "="):
            self.error("expected one of '~', '*', '=' after '['")
        op = self.advance().kind
        count = self.integer()
        self.expect("]")
        return op, count

    # clause bodies stop at the next `rely:`/`correct:` label

    def _clause_end(self) -> bool:
        t, nxt = self.tok, self.tokens[min(self.i + 1, len(self.tokens) - 1)]
        return (t.kind == "ident" and t.text in ("correct", "rely")
                and nxt.kind == ":")

    def clause(self) -> tuple[str, SeqExpr, SeqExpr]:
        label = self.expect("ident", "'correct' or 'rely'")
        if label.text not in ("correct", "rely"):
            self.error(f"expected 'correct' or 'rely', found {label.text!r}",
                       label)
        self.expect(":")
        ante = self.sequence(closers=("impl",))
        self.expect("impl", "|->")
        items: list[SeqExpr] = []
        while (self.tok.kind not in ("}", "eof") and not self._clause_end()
               and not (self.tok.first_on_line and self.tok.kind == "ident"
                        and self.tok.text in KEYWORDS)):
            if items and self.tok.kind != "delay":
                self.error("expected '##' delay between sequence elements")
            items.extend(chain_items(self.element()))
        if not items:
            self.error("empty chain")
        cons = items[0] if len(items) == 1 else Chain(tuple(items))
        return label.text, ante, cons

    # declarations

    def suite(self) -> SpecSuite:
        timebase = None
        actions: list[ActionDef] = []
        outcomes: list[OutcomeDef] = []
        props: list[PropertyPair] = []
        scenarios: list[Scenario] = []
        while self.tok.kind != "eof":
            try:
                t = self.tok
                if self.at_word("timebase"):
                    self.advance()
                    timebase = self.integer()
                    self.expect_word("ms")
                elif self.at_word("action"):
                    self.advance()
                    name = self.expect("ident", "action name")
                    self.expect_word("causes")
                    outcome = self.expect("ident", "outcome name").text
                    self.expect_word("reliability")
                    rel = self.number()
                    actions.append(ActionDef(name.text, outcome,
                                             (name.line, name.col)))
                    outcomes.append(OutcomeDef(outcome, rel))
                elif self.at_word("property"):
                    props.append(self.property_decl())
                elif self.at_word("scenario"):
                    self.advance()
                    sid = self.expect("ident", "scenario name")
                    self.expect(":")
                    firings = [self.firing()]
                    while self.tok.kind == ",":
                        self.advance()
                        firings.append(self.firing())
                    scenarios.append(Scenario(sid.text, tuple(firings),
                                              (sid.line, sid.col)))
                else:
                    self.error(f"expected declaration, found {t.text!r}")
            except _Abort:
                self.recover()
        return SpecSuite(timebase, tuple(actions), tuple(outcomes),
                         tuple(props), tuple(scenarios))

    def firing(self) -> tuple[str, int]:
        pid = self.expect("ident", "property name").text
        anchor = 0
        if self.tok.kind == "@":
            self.advance()
            anchor = self.integer()
        return pid, anchor

    def property_decl(self) -> PropertyPair:
        self.advance()
        pid = self.expect("ident", "property name")
        self.expect_word("target")
        target = self.number()
        self.expect("{")
        clauses: dict[str, tuple[SeqExpr, SeqExpr]] = {}
        while self.tok.kind != "}":
            if self.tok.kind == "eof":
                self.error("unterminated property block")
            label_tok = self.tok
            label, ante, cons = self.clause()
            if label in clauses:
                self.error(f"duplicate '{label}' clause", label_tok)
            clauses[label] = (ante, cons)
        close = self.advance()
        if not clauses:
            self.error("empty chain", close)
        for label in ("correct", "rely"):
            if label not in clauses:
                self.error(f"property {pid.text} has no '{label}' clause",
                           close)
        correct_ante, correctness = clauses["correct"]
        trigger, rely = clauses["rely"]
        return PropertyPair(pid.text, target, trigger, correctness, rely,
                            correct_ante, (pid.line, pid.col))


def parse_suite(text: str, validate: bool = True) -> SpecSuite:
    """Parse a suite; raises SpecError carrying every diagnostic found."""
    parser = Parser(text)
    suite = parser.suite()
    diags = list(parser.diagnostics)
    if not diags and validate:
        diags = validate_suite(suite)
    if diags:
        raise SpecError(diags)
    return suite


def parse_clause(text: str) -> tuple[str, SeqExpr, SeqExpr]:
    """Parse one `correct:`/`rely:` clause into (label, antecedent, consequent)."""
    parser = Parser(text)
    try:
        result = parser.clause()
        if parser.tok.kind != "eof":
            parser.error(f"unexpected {parser.tok.text!r}")
    except _Abort:
        result = None
    if parser.diagnostics or result is None:
        raise SpecError(parser.diagnostics)
    return result


def parse_sequence(text: str) -> SeqExpr:
    parser = Parser(text)
    try:
        expr = parser.sequence(closers=())
    except _Abort:
        raise SpecError(parser.diagnostics) from None
    if parser.diagnostics:
        raise SpecError(parser.diagnostics)
    return expr


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _shape_errors(expr: SeqExpr, in_temporal: bool = False) -> Iterator[str]:
    if isinstance(expr, Step):
        return
    if isinstance(expr, Spatial):
        if not isinstance(expr.step, Step):
            yield "[~n] applies only to a single action"
        if expr.n < 2:
            yield f"spatial count must be >= 2, got {expr.n}"
    elif isinstance(expr, Consec):
        if not isinstance(expr.step, Step):
            yield "[*k] applies only to a single action"
        if expr.k < 2:
            yield f"repetition count must be >= 2, got {expr.k}"
    elif isinstance(expr, Temporal):
        if in_temporal:
            yield "[=m] blocks cannot be nested"
        if expr.m < 2:
            yield f"re-execution count must be >= 2, got {expr.m}"
        yield from _shape_errors(expr.block, True)
    else:
        if not expr.items:
            yield "empty chain"
        for item in expr.items:
            if isinstance(item, Chain):
                yield "nested chain"
            yield from _shape_errors(item, in_temporal)


def validate_suite(suite: SpecSuite) -> list[Diagnostic]:
    """Check every suite invariant; an empty list means the suite is sound."""
    diags: list[Diagnostic] = []

    def add(msg, pos=None, prop=None):
        line, col = pos if pos else (None, None)
        diags.append(Diagnostic(msg, line, col, prop))

    if not suite.properties:
        add("suite defines no properties")
    if suite.timebase_ms is not None and suite.timebase_ms <= 0:
        add("timebase must be positive")

    causes: dict[str, str] = {}
    for a in suite.actions:
        if a.name in causes:
            add(f"duplicate action {a.name!r}", a.pos)
        causes[a.name] = a.causes
    declared = {a.causes: a.pos for a in reversed(suite.actions)}
    seen_outcomes: set[str] = set()
    for o in suite.outcomes:
        if o.name in seen_outcomes:
            add(f"duplicate outcome {o.name!r}")
        seen_outcomes.add(o.name)
        if not 0.0 < o.reliability <= 1.0:
            add(f"reliability of {o.name!r} must be in (0, 1]", declared.get(o.name))

    seen_props: set[str] = set()
    for p in suite.properties:
        if p.id in seen_props:
            add(f"duplicate property {p.id!r}", p.pos, p.id)
        seen_props.add(p.id)
        if p.target >= 1.0:
            add("target must be < 1", p.pos, p.id)
        elif p.target <= 0.0:
            add("target must be > 0", p.pos, p.id)

        for expr in (p.trigger, p.correct_trigger):
            if expr is None:
                continue
            for msg in _shape_errors(expr):
                add(f"antecedent: {msg}", p.pos, p.id)
            if not all(isinstance(i, Step) for i in chain_items(expr)):
                add("antecedent must be a plain chain of events", p.pos, p.id)

        for msg in _shape_errors(p.correctness):
            add(f"correctness: {msg}", p.pos, p.id)
        for msg in _shape_errors(p.reliability_spec):
            add(f"reliability spec: {msg}", p.pos, p.id)

        rely_actions = set()
        for step in iter_steps(p.reliability_spec):
            if not step.window.bounded:
                add("'$' window only allowed in antecedent", step.pos, p.id)
            if step.event not in causes:
                add(f"unknown action {step.event!r}", step.pos, p.id)
            rely_actions.add(step.event)
        if first_step(p.reliability_spec).window.lo < 1:
            add("first action must start at cycle >= 1",
                first_step(p.reliability_spec).pos, p.id)

        caused = {causes[a] for a in rely_actions if a in causes}
        items = chain_items(p.correctness)
        if not all(isinstance(i, Step) for i in items):
            add("correctness must be a plain chain of outcome steps",
                p.pos, p.id)
        for step in iter_steps(p.correctness):
            if not step.window.bounded:
                add("'$' window only allowed in antecedent", step.pos, p.id)
            if step.event not in seen_outcomes:
                add(f"unknown outcome {step.event!r}", step.pos, p.id)
            elif step.event not in caused:
                add(f"outcome {step.event!r} is not caused by any action "
                    f"of the reliability spec", step.pos, p.id)

    seen_scen: set[str] = set()
    for s in suite.scenarios:
        if s.id in seen_scen:
            add(f"duplicate scenario {s.id!r}", s.pos)
        seen_scen.add(s.id)
        fired: set[str] = set()
        for pid, anchor in s.firings:
            if pid not in seen_props:
                add(f"scenario {s.id!r} references unknown property {pid!r}",
                    s.pos)
            if pid in fired:
                add(f"scenario {s.id!r} fires {pid!r} twice", s.pos)
            fired.add(pid)
            if anchor < 0:
                add(f"scenario {s.id!r}: anchor cycle must be >= 0", s.pos)
    return diags


# ---------------------------------------------------------------------------
# Pretty-printing
# ---------------------------------------------------------------------------


def _fmt_item(expr: SeqExpr, show_window: bool) -> str:
    w = first_step(expr).window
    prefix = f"{w} " if show_window else ""
    if isinstance(expr, Step):
        return prefix + expr.event
    if isinstance(expr, Spatial):
        return f"{prefix}{expr.step.event}[~{expr.n}]"
    if isinstance(expr, Consec):
        return f"{prefix}{expr.step.event}[*{expr.k}]"
    if isinstance(expr, Temporal):
        if isinstance(expr.block, Chain):
            return f"{prefix}({format_seq(expr.block, lead=False)})[={expr.m}]"
        return f"{_fmt_item(expr.block, show_window)}[={expr.m}]"
    raise TypeError("nested chain")


def format_seq(expr: SeqExpr, lead: bool = True) -> str:
    """Render a sequence; `lead=False` drops the first element's delay."""
    parts = []
    for i, item in enumerate(chain_items(expr)):
        if i == 0:
            show = lead and first_step(item).window != ZERO
        else:
            show = True
        parts.append(_fmt_item(item, show))
    return " ".join(parts)


def _fmt_prob(x: float) -> str:
    return repr(float(x))


def format_suite(suite: SpecSuite) -> str:
    lines = []
    if suite.timebase_ms is not None:
        lines.append(f"timebase {suite.timebase_ms} ms")
    rel = {o.name: o.reliability for o in suite.outcomes}
    for a in suite.actions:
        lines.append(f"action {a.name} causes {a.causes} "
                     f"reliability {_fmt_prob(rel[a.causes])}")
    for p in suite.properties:
        ante = p.correct_trigger if p.correct_trigger is not None else p.trigger
        lines.append(f"property {p.id} target {_fmt_prob(p.target)} {{")
        lines.append(f"  correct: {format_seq(ante)} |-> "
                     f"{format_seq(p.correctness)}")
        lines.append(f"  rely: {format_seq(p.trigger)} |-> "
                     f"{format_seq(p.reliability_spec)}")
        lines.append("}")
    for s in suite.scenarios:
        firings = ", ".join(f"{pid}@{a}" for pid, a in s.firings)
        lines.append(f"scenario {s.id}: {firings}")
    return "\n".join(lines) + "\n"
