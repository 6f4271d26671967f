"""Parsing and emission of explicit models and relational properties.

Model files are UTF-8 JSON:

    {
      "states": [{"id": "s0", "labels": ["init"]}, ...],
      "actions": ["alpha", ...],
      "transitions": [
        {"from": "s0", "action": "alpha", "to": "s1", "prob": "59/100"},
        ...
      ],
      "init": {"start": "s0"}
    }

Probabilities may be fraction strings ("59/100"), decimal strings ("0.59")
or JSON numbers; all become exact rationals.

Properties are one formula per line, e.g.

    forall s1 . P[s1,init](F goal1) ~eq(0.1)~ P[s1,init](F goal2)
    exists s1 exists s2 . P[s1,a](F T) >= 2 * P[s2,b](F T)

with comparison operators >, >=, =, !=, <=, <, ~eq~, ~neq~, ~eq(eps)~ and
~neq(eps)~, and path operators F (eventually), G (always), GF (infinitely
often) and FG (eventually always) over propositional formulas built from
atomic propositions with !, &, | and parentheses.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .core import Mdp, check_mdp
from .errors import (
    AlternationNotSupported,
    MixedTemporalOperators,
    ModelSyntaxError,
    PropertySyntaxError,
    UnboundSchedulerVariable,
    UnknownLabel,
    UnknownProposition,
)
from .query import (
    APPROX,
    EVENTUALLY,
    GE,
    GT,
    INF_OFTEN,
    NAPPROX,
    Operator,
    Predicate,
    RelationalQuery,
)


def parse_rational(value) -> Fraction:
    """Exact rational from a fraction string, decimal string or number."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelSyntaxError(f"bad rational literal {value!r}") from exc
    raise ModelSyntaxError(f"bad rational literal {value!r}")


@dataclass
class LoadedModel:
    """An explicit model plus its initial-state label mapping."""

    mdp: Mdp
    init: Dict[str, str]


def parse_model(text) -> LoadedModel:
    """Parse and validate a model file; raises on syntax or invariant errors."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelSyntaxError("top level must be an object")
    state_entries = doc.get("states")
    if not state_entries:
        raise ModelSyntaxError("empty or missing 'states' array")
    states = []
    labels = {}
    for entry in state_entries:
        sid = entry["id"] if isinstance(entry, dict) else entry
        states.append(sid)
        if isinstance(entry, dict):
            labels[sid] = set(entry.get("labels", ()))
    known = set(states)
    if len(known) != len(states):
        raise ModelSyntaxError("duplicate state ids")
    actions = list(doc.get("actions", ()))
    transitions: Dict[str, Dict[str, Dict[str, Fraction]]] = {s: {} for s in states}
    for tr in doc.get("transitions", ()):
        try:
            src, act, dst = tr["from"], tr["action"], tr["to"]
            prob = parse_rational(tr["prob"])
        except KeyError as exc:
            raise ModelSyntaxError(f"transition missing field {exc}") from exc
        if src not in known or dst not in known:
            raise ModelSyntaxError(f"transition references unknown state: {tr}")
        if act not in actions:
            raise ModelSyntaxError(f"transition references unknown action: {tr}")
        row = transitions[src].setdefault(act, {})
        row[dst] = row.get(dst, Fraction(0)) + prob
    init = dict(doc.get("init", {}))
    for label, sid in init.items():
        if sid not in known:
            raise ModelSyntaxError(f"init label {label!r} maps to unknown state {sid!r}")
    mdp = check_mdp(Mdp(states, actions, transitions, labels))
    return LoadedModel(mdp, init)


def emit_model(model: LoadedModel) -> str:
    mdp = model.mdp
    doc = {
        "states": [
            {"id": s, "labels": sorted(mdp.labels[s])} for s in mdp.states
        ],
        "actions": list(mdp.actions),
        "transitions": [
            {"from": s, "action": a, "to": t, "prob": str(p)}
            for s in mdp.states
            for a in mdp.enabled_actions(s)
            for t, p in sorted(mdp.successors(s, a).items(), key=lambda kv: str(kv[0]))
        ],
        "init": dict(model.init),
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# Property grammar
# ---------------------------------------------------------------------------

PropAst = tuple  # ("ap", name) | ("not", p) | ("and", p, q) | ("or", p, q)


@dataclass(frozen=True)
class ProbAst:
    scheduler_variable: str
    init_label: str
    temporal: str  # "F" | "G" | "GF" | "FG"
    proposition: PropAst


@dataclass(frozen=True)
class TermAst:
    coefficient: Fraction
    prob: Optional[ProbAst]  # None: constant term


@dataclass(frozen=True)
class ComparisonAst:
    terms: Tuple[TermAst, ...]  # lhs - rhs, flattened
    op: str  # ">", ">=", "=", "!=", "<=", "<", "~eq~", "~neq~"
    epsilon: Fraction


@dataclass(frozen=True)
class RelationalFormulaAst:
    quantifier: str  # "exists" | "forall"
    variables: Tuple[str, ...]
    comparisons: Tuple[ComparisonAst, ...]


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:/\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<aeq>~eq(?:\(([^)]*)\))?~)"
    r"|(?P<aneq>~neq(?:\(([^)]*)\))?~)"
    r"|(?P<sym>>=|<=|!=|[><=+\-*().,&|!\[\]]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise PropertySyntaxError(f"cannot tokenize near {rest[:20]!r}", pos)
        pos = m.end()
        if m.group("num"):
            tokens.append(("num", m.group("num")))
        elif m.group("name"):
            tokens.append(("name", m.group("name")))
        elif m.group("aeq"):
            tokens.append(("approx", m.group(4) if m.group(4) is not None else "0"))
        elif m.group("aneq"):
            tokens.append(("napprox", m.group(6) if m.group(6) is not None else "0"))
        else:
            tokens.append(("sym", m.group("sym")))
    tokens.append(("end", ""))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            raise PropertySyntaxError(
                f"expected {value or kind}, found {tok[1]!r}", self.i
            )
        return tok

    # formula := quant+ '.' conj
    def formula(self) -> RelationalFormulaAst:
        quantifier = None
        variables: List[str] = []
        while self.peek() == ("name", "forall") or self.peek() == ("name", "exists"):
            kind = self.next()[1]
            if quantifier is None:
                quantifier = kind
            elif quantifier != kind:
                raise AlternationNotSupported(
                    "quantifier alternation is not supported"
                )
            var = self.expect("name")[1]
            if var in variables:
                raise PropertySyntaxError(f"duplicate scheduler variable {var!r}")
            variables.append(var)
        if quantifier is None:
            raise PropertySyntaxError("formula must start with forall/exists")
        self.expect("sym", ".")
        comparisons = [self.comparison(variables)]
        while self.peek() == ("sym", "&"):
            self.next()
            comparisons.append(self.comparison(variables))
        self.expect("end")
        return RelationalFormulaAst(quantifier, tuple(variables), tuple(comparisons))

    def comparison(self, variables) -> ComparisonAst:
        lhs = self.expr(variables)
        kind, value = self.next()
        if kind == "approx":
            op, eps = "~eq~", parse_rational(value)
        elif kind == "napprox":
            op, eps = "~neq~", parse_rational(value)
        elif kind == "sym" and value in {">", ">=", "<", "<=", "=", "!="}:
            op, eps = value, Fraction(0)
        else:
            raise PropertySyntaxError(f"expected comparison operator, found {value!r}")
        if eps < 0:
            raise PropertySyntaxError("epsilon must be non-negative")
        rhs = self.expr(variables)
        terms = lhs + [TermAst(-t.coefficient, t.prob) for t in rhs]
        return ComparisonAst(tuple(terms), op, eps)

    def expr(self, variables) -> List[TermAst]:
        terms = [self.term(variables, self._sign())]
        while self.peek()[1] in {"+", "-"} and self.peek()[0] == "sym":
            sign = Fraction(1) if self.next()[1] == "+" else Fraction(-1)
            terms.append(self.term(variables, sign))
        return terms

    def _sign(self) -> Fraction:
        if self.peek() == ("sym", "-"):
            self.next()
            return Fraction(-1)
        return Fraction(1)

    def term(self, variables, sign: Fraction) -> TermAst:
        kind, value = self.peek()
        if kind == "num":
            self.next()
            coeff = sign * parse_rational(value)
            if self.peek() == ("sym", "*"):
                self.next()
                return TermAst(coeff, self.prob(variables))
            return TermAst(coeff, None)
        return TermAst(sign, self.prob(variables))

    def prob(self, variables) -> ProbAst:
        tok = self.expect("name")
        if tok[1] != "P":
            raise PropertySyntaxError(f"expected probability operator P, found {tok[1]!r}")
        self.expect("sym", "[")
        var = self.expect("name")[1]
        if var not in variables:
            raise UnboundSchedulerVariable(f"scheduler variable {var!r} is not quantified")
        self.expect("sym", ",")
        label = self.expect("name")[1]
        self.expect("sym", "]")
        self.expect("sym", "(")
        temporal = self.expect("name")[1]
        if temporal not in {"F", "G", "GF", "FG"}:
            raise PropertySyntaxError(f"unknown path operator {temporal!r}")
        prop = self.prop_or()
        self.expect("sym", ")")
        return ProbAst(var, label, temporal, prop)

    # propositional formulas with standard precedence ! > & > |
    def prop_or(self) -> PropAst:
        left = self.prop_and()
        while self.peek() == ("sym", "|"):
            self.next()
            left = ("or", left, self.prop_and())
        return left

    def prop_and(self) -> PropAst:
        left = self.prop_not()
        while self.peek() == ("sym", "&"):
            self.next()
            left = ("and", left, self.prop_not())
        return left

    def prop_not(self) -> PropAst:
        if self.peek() == ("sym", "!"):
            self.next()
            return ("not", self.prop_not())
        if self.peek() == ("sym", "("):
            self.next()
            inner = self.prop_or()
            self.expect("sym", ")")
            return inner
        tok = self.expect("name")
        if tok[1] == "P":
            raise PropertySyntaxError("nested probability operators are not allowed")
        return ("ap", tok[1])


def parse_property(text: str) -> RelationalFormulaAst:
    """Parse a single relational formula."""
    return _Parser(text).formula()


def parse_property_file(text: str) -> List[RelationalFormulaAst]:
    """One formula per non-empty, non-comment line."""
    formulas = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        formulas.append(parse_property(stripped))
    return formulas


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def _eval_prop(prop: PropAst, mdp: Mdp, known: set) -> frozenset:
    tag = prop[0]
    if tag == "ap":
        name = prop[1]
        if name not in known:
            raise UnknownProposition(f"proposition {name!r} does not label any state")
        return mdp.states_with_label(name)
    if tag == "not":
        return frozenset(mdp.states) - _eval_prop(prop[1], mdp, known)
    if tag == "and":
        return _eval_prop(prop[1], mdp, known) & _eval_prop(prop[2], mdp, known)
    if tag == "or":
        return _eval_prop(prop[1], mdp, known) | _eval_prop(prop[2], mdp, known)
    raise PropertySyntaxError(f"bad proposition node {prop!r}")


def normalize(ast: RelationalFormulaAst, mdp: Mdp, init_map: Dict[str, str]) -> RelationalQuery:
    """Resolve labels/propositions against the model and bring the formula
    into normal form: safety becomes reachability on the complement,
    eventually-always becomes infinitely-often on the complement, < and <=
    flip signs, = and != become (dis)equality with epsilon 0; a forall
    prefix is recorded and decided through the negated existential form."""
    known = {p for s in mdp.states for p in mdp.labels[s]}
    all_states = frozenset(mdp.states)

    used_vars: List[str] = []
    for cmp_ast in ast.comparisons:
        for t in cmp_ast.terms:
            if t.prob and t.prob.scheduler_variable not in used_vars:
                used_vars.append(t.prob.scheduler_variable)
    index = {v: i + 1 for i, v in enumerate(used_vars)}

    predicates = []
    temporals = set()
    for cmp_ast in ast.comparisons:
        operators = []
        bound = Fraction(0)
        for t in cmp_ast.terms:
            if t.prob is None:
                bound -= t.coefficient
                continue
            label = t.prob.init_label
            if label not in init_map:
                raise UnknownLabel(f"initial-state label {label!r} is not declared")
            start = init_map[label]
            target = _eval_prop(t.prob.proposition, mdp, known)
            coeff = t.coefficient
            if t.prob.temporal == "F":
                temporal = EVENTUALLY
            elif t.prob.temporal == "G":
                # q*Pr(G T) = q - q*Pr(F (S-T))
                temporal = EVENTUALLY
                target = all_states - target
                bound -= coeff
                coeff = -coeff
            elif t.prob.temporal == "GF":
                temporal = INF_OFTEN
            else:  # FG: q*Pr(FG T) = q - q*Pr(GF (S-T))
                temporal = INF_OFTEN
                target = all_states - target
                bound -= coeff
                coeff = -coeff
            temporals.add(temporal)
            operators.append(
                Operator(coeff, start, index[t.prob.scheduler_variable], temporal, target)
            )
        op = cmp_ast.op
        eps = cmp_ast.epsilon
        if op in {"<", "<="}:
            operators = [
                Operator(-o.coefficient, o.initial_state, o.scheduler, o.temporal, o.target)
                for o in operators
            ]
            bound = -bound
            op = ">" if op == "<" else ">="
        if op == ">":
            comparison, eps = GT, Fraction(0)
        elif op == ">=":
            comparison, eps = GE, Fraction(0)
        elif op in {"=", "~eq~"}:
            comparison = APPROX
        elif op in {"!=", "~neq~"}:
            comparison = NAPPROX
        else:
            raise PropertySyntaxError(f"bad comparison {op!r}")
        predicates.append(Predicate(tuple(operators), comparison, bound, eps))

    if len(temporals) > 1:
        raise MixedTemporalOperators(
            "a query must be reachability-only or Buchi-only after normalization"
        )
    return RelationalQuery(
        tuple(predicates),
        scheduler_count=len(used_vars),
        universal=(ast.quantifier == "forall"),
        scheduler_names=tuple(used_vars),
    )
