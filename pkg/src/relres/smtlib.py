"""SMT-LIB2 (QF_LIA) rendering of a constraint set."""

from __future__ import annotations

from .planner import ConstraintSet, natural_key

TRAILER = "(check-sat)\n(get-model)\n"


def _num(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def _sum(terms: list[str]) -> str:
    if not terms:
        return "0"
    if len(terms) == 1:
        return terms[0]
    return f"(+ {' '.join(terms)})"


def export_smtlib(cs: ConstraintSet, optimize: bool = False) -> str:
    """Render `cs` as an SMT-LIB2 document.

    With `optimize`, the limit becomes a free constant `gamma` and the
    document asks for its minimization (an optimization extension).
    """
    if not cs.variables:
        return TRAILER
    out = ["(set-logic QF_LIA)", "(set-option :produce-models true)"]
    for var in cs.variables:
        out.append(f"(declare-const {var} Int)")
    if optimize:
        out.append("(declare-const gamma Int)")
        out.append("(assert (>= gamma 1))")
        limit = "gamma"
    else:
        limit = str(cs.gamma)

    for var, (lo, hi) in cs.variables.items():
        out.append(f"(assert (and (>= {var} {_num(lo)}) (<= {var} {_num(hi)})))")
    for tc in cs.timing:
        if tc.base is None:
            a = cs.anchors[tc.var]
            out.append(f"(assert (and (>= {tc.var} {_num(a + tc.lo)}) "
                       f"(<= {tc.var} {_num(a + tc.hi)})))")
        else:
            diff = f"(- {tc.var} {tc.base})"
            out.append(f"(assert (and (>= {diff} {_num(tc.lo)}) "
                       f"(<= {diff} {_num(tc.hi)})))")
    for var, bound in cs.horizons.values():
        out.append(f"(assert (<= {var} {_num(bound)}))")

    # per (action, property) variable lists, in stable order
    by_action: dict[str, dict[str, list[str]]] = {}
    for var, (action, prop) in cs.owners.items():
        by_action.setdefault(action, {}).setdefault(prop, []).append(var)
    actions = sorted(by_action, key=natural_key)

    for t in cs.cycles:
        terms = []
        for action in actions:
            props = [(p, [v for v in vs if cs.variables[v][0] <= t <= cs.variables[v][1]])
                     for p, vs in by_action[action].items()]
            props = [(p, vs) for p, vs in props if vs]
            if not props:
                continue
            name = f"dem_{t}_{action}"
            partials = []
            for k, (_, vs) in enumerate(props):
                ind = [f"(ite (= {v} {t}) 1 0)" for v in vs]
                sname = f"{name}_p{k + 1}"
                out.append(f"(define-fun {sname} () Int {_sum(ind)})")
                partials.append(sname)
            acc = partials[0]
            for k, s in enumerate(partials[1:], start=2):
                mname = f"{name}_m{k}"
                out.append(f"(define-fun {mname} () Int (ite (>= {acc} {s}) {acc} {s}))")
                acc = mname
            out.append(f"(define-fun {name} () Int {acc})")
            terms.append(name)
        if terms:
            out.append(f"(assert (<= {_sum(terms)} {limit}))")

    for ng in cs.blocked:
        lits = [f"(= {v} {_num(val)})" for v, val in ng]
        conj = lits[0] if len(lits) == 1 else f"(and {' '.join(lits)})"
        out.append(f"(assert (not {conj}))")
    if optimize:
        out.append("(minimize gamma)")
    return "\n".join(out) + "\n" + TRAILER
