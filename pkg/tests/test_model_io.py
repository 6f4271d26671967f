import json
from fractions import Fraction as F

import pytest

from relcheck.errors import (
    AlternationNotSupported,
    MixedTemporalOperators,
    ModelSyntaxError,
    PropertySyntaxError,
    UnboundSchedulerVariable,
    UnknownLabel,
    UnknownProposition,
)
from relcheck.model_io import (
    emit_model,
    normalize,
    parse_model,
    parse_property,
    parse_property_file,
    parse_rational,
)
from relcheck.query import APPROX, EVENTUALLY, GE, GT, INF_OFTEN, NAPPROX


def test_parse_rational_forms():
    assert parse_rational("0.59") == F(59, 100)
    assert parse_rational("59/100") == F(59, 100)
    assert parse_rational(1) == 1
    assert parse_rational(0.5) == F(1, 2)
    with pytest.raises(ModelSyntaxError):
        parse_rational("1/0")


def test_parse_model_memory_necessary(memory_necessary):
    m = memory_necessary.mdp
    assert len(m.states) == 3
    assert set(m.actions) == {"alpha", "beta", "gamma"}
    assert memory_necessary.init == {"i": "s"}


def test_parse_model_empty_states():
    with pytest.raises(ModelSyntaxError):
        parse_model(json.dumps({"states": [], "actions": [], "transitions": []}))


def test_parse_model_decimal_probability():
    doc = {
        "states": [{"id": "a"}, {"id": "b"}],
        "actions": ["x"],
        "transitions": [
            {"from": "a", "action": "x", "to": "b", "prob": "0.59"},
            {"from": "a", "action": "x", "to": "a", "prob": "0.41"},
            {"from": "b", "action": "x", "to": "b", "prob": 1},
        ],
        "init": {},
    }
    model = parse_model(json.dumps(doc))
    assert model.mdp.successors("a", "x")["b"] == F(59, 100)


def test_model_roundtrip(running_example):
    again = parse_model(emit_model(running_example))
    assert again.mdp.states == running_example.mdp.states
    assert again.mdp.transitions == running_example.mdp.transitions
    assert again.mdp.labels == running_example.mdp.labels
    assert again.init == running_example.init


def test_parse_property_forall():
    ast = parse_property("forall s1 . P[s1,init](F goal1) ~eq~ P[s1,init](F goal2)")
    assert ast.quantifier == "forall"
    assert ast.variables == ("s1",)
    assert len(ast.comparisons) == 1
    assert len([t for t in ast.comparisons[0].terms if t.prob]) == 2


def test_parse_property_two_exists():
    ast = parse_property("exists s1 exists s2 . P[s1,a](F T) >= 2 * P[s2,b](F T)")
    assert ast.quantifier == "exists"
    assert ast.variables == ("s1", "s2")
    (cmp_ast,) = ast.comparisons
    coeffs = sorted(t.coefficient for t in cmp_ast.terms)
    assert coeffs == [F(-2), F(1)]


def test_parse_property_alternation_rejected():
    with pytest.raises(AlternationNotSupported):
        parse_property("forall s1 exists s2 . P[s1,a](F T) >= P[s2,a](F T)")


def test_parse_property_unbound_variable():
    with pytest.raises(UnboundSchedulerVariable):
        parse_property("exists s1 . P[s2,a](F T) >= 1/2")


def test_parse_property_nested_probability():
    with pytest.raises(PropertySyntaxError):
        parse_property("exists s1 . P[s1,a](F P) >= P[s1,a](F T)")


def test_parse_property_file_comments():
    text = "# comment\n\nexists s1 . P[s1,i](F T) >= 0\n"
    assert len(parse_property_file(text)) == 1


def test_normalize_universal_equality(memory_necessary):
    ast = parse_property("forall s1 . P[s1,i](F T1) = P[s1,i](F T2)")
    q = normalize(ast, memory_necessary.mdp, memory_necessary.init)
    assert q.universal
    (pred,) = q.predicates
    assert pred.comparison == APPROX and pred.epsilon == 0
    neg = pred.negated()
    assert neg.comparison == NAPPROX and neg.epsilon == 0


def test_normalize_safety_complement(memory_necessary):
    # Pr(G T1) >= 1/2 becomes -Pr(F complement) >= -1/2
    ast = parse_property("exists s1 . P[s1,i](G T1) >= 1/2")
    q = normalize(ast, memory_necessary.mdp, memory_necessary.init)
    (pred,) = q.predicates
    (op,) = pred.operators
    assert op.temporal == EVENTUALLY
    assert op.target == frozenset({"s", "t2"})
    assert op.coefficient == -1
    assert pred.bound == F(-1, 2)


def test_normalize_cobuechi_complement(memory_necessary):
    # Pr(FG T1) <= q becomes Pr(GF complement) >= 1 - q
    ast = parse_property("exists s1 . P[s1,i](FG T1) <= 1/4")
    q = normalize(ast, memory_necessary.mdp, memory_necessary.init)
    (pred,) = q.predicates
    (op,) = pred.operators
    assert op.temporal == INF_OFTEN
    assert op.target == frozenset({"s", "t2"})
    assert op.coefficient == 1
    assert pred.comparison == GE
    assert pred.bound == F(3, 4)


def test_normalize_less_than_flip(memory_necessary):
    ast = parse_property("exists s1 . P[s1,i](F T1) < 1/3")
    q = normalize(ast, memory_necessary.mdp, memory_necessary.init)
    (pred,) = q.predicates
    assert pred.comparison == GT
    assert pred.operators[0].coefficient == -1
    assert pred.bound == F(-1, 3)


def test_normalize_comparisons_restricted(memory_necessary):
    for text, expected in [
        ("exists s1 . P[s1,i](F T1) > 0", GT),
        ("exists s1 . P[s1,i](F T1) >= 0", GE),
        ("exists s1 . P[s1,i](F T1) != 0", NAPPROX),
        ("exists s1 . P[s1,i](F T1) ~neq(0.25)~ 1/2", NAPPROX),
    ]:
        q = normalize(parse_property(text), memory_necessary.mdp, memory_necessary.init)
        assert q.predicates[0].comparison == expected


def test_normalize_propositional_evaluation(memory_necessary):
    ast = parse_property("exists s1 . P[s1,i](F (T1 | T2)) >= 0")
    q = normalize(ast, memory_necessary.mdp, memory_necessary.init)
    assert q.predicates[0].operators[0].target == frozenset({"t1", "t2"})
    ast = parse_property("exists s1 . P[s1,i](F !(T1 | T2)) >= 0")
    q = normalize(ast, memory_necessary.mdp, memory_necessary.init)
    assert q.predicates[0].operators[0].target == frozenset({"s"})


def test_normalize_unknown_label(memory_necessary):
    ast = parse_property("exists s1 . P[s1,nolabel](F T1) >= 0")
    with pytest.raises(UnknownLabel):
        normalize(ast, memory_necessary.mdp, memory_necessary.init)


def test_normalize_unknown_proposition(memory_necessary):
    ast = parse_property("exists s1 . P[s1,i](F nothing) >= 0")
    with pytest.raises(UnknownProposition):
        normalize(ast, memory_necessary.mdp, memory_necessary.init)


def test_normalize_mixed_temporal_rejected(memory_necessary):
    ast = parse_property("exists s1 . P[s1,i](F T1) >= P[s1,i](GF T2)")
    with pytest.raises(MixedTemporalOperators):
        normalize(ast, memory_necessary.mdp, memory_necessary.init)


def test_normalize_agrees_with_direct_md_semantics(memory_necessary):
    """Brute-force MD verdicts agree before and after normalization for
    MD-sufficient shapes (here: same initial state, absorbing target)."""
    from relcheck.chains import reach_probability
    from relcheck.core import induce_dtmc
    from relcheck.oracle import enumerate_md_schedulers, oracle_holds_md

    m = memory_necessary.mdp
    # direct semantics of "exists sched . Pr(G !T2) >= 1/2": stay away from t2
    ast = parse_property("exists s1 . P[s1,i](G !T2) >= 1/2")
    q = normalize(ast, m, memory_necessary.init)
    direct = False
    for sched in enumerate_md_schedulers(m):
        chain = induce_dtmc(m, sched)
        stays = 1 - reach_probability(chain, "s", {"t2"})
        direct = direct or stays >= F(1, 2)
    assert oracle_holds_md(m, q)[0] == direct


def _direct_md_verdict(m, ast, init_map):
    """Evaluate the raw formula over all MD schedulers: probabilities of
    F/G/GF/FG come straight from chain analyses, comparisons are applied as
    written. This is independent of the normalizer."""
    from itertools import product

    from relcheck.chains import buechi_probability, reach_probability
    from relcheck.core import induce_dtmc
    from relcheck.model_io import _eval_prop
    from relcheck.oracle import enumerate_md_schedulers

    known = {p for s in m.states for p in m.labels[s]}
    all_states = frozenset(m.states)
    schedulers = list(enumerate_md_schedulers(m))

    def prob(chain, node):
        target = _eval_prop(node.proposition, m, known)
        start = init_map[node.init_label]
        if node.temporal == "F":
            return reach_probability(chain, start, set(target))
        if node.temporal == "G":
            return 1 - reach_probability(chain, start, set(all_states - target))
        if node.temporal == "GF":
            return buechi_probability(chain, start, set(target))
        return 1 - buechi_probability(chain, start, set(all_states - target))

    names = list(ast.variables)
    for combo in product(schedulers, repeat=len(names)):
        chains = {name: induce_dtmc(m, sched) for name, sched in zip(names, combo)}
        ok = True
        for cmp_ast in ast.comparisons:
            total = F(0)
            for term in cmp_ast.terms:
                if term.prob is None:
                    total += term.coefficient
                else:
                    total += term.coefficient * prob(
                        chains[term.prob.scheduler_variable], term.prob
                    )
            op, eps = cmp_ast.op, cmp_ast.epsilon
            if op == ">":
                ok = total > 0
            elif op == ">=":
                ok = total >= 0
            elif op == "<":
                ok = total < 0
            elif op == "<=":
                ok = total <= 0
            elif op in ("=", "~eq~"):
                ok = abs(total) <= eps
            else:
                ok = abs(total) > eps
            if not ok:
                break
        if ok:
            return True
    return False


def test_normalize_preserves_md_semantics_random(memory_necessary, running_example):
    """Normalization is a per-scheduler semantic identity, so brute-force MD
    verdicts agree before and after it on random single-comparison formulas
    over all temporal shapes and comparison operators."""
    import random

    from relcheck.oracle import oracle_holds_md

    rng = random.Random(88)
    cases = 0
    for model in (memory_necessary, running_example):
        m = model.mdp
        props = sorted({p for s in m.states for p in m.labels[s]})
        labels = sorted(model.init)
        for _ in range(25):
            joined = ""
            for position in range(rng.randint(1, 2)):
                coeff = rng.choice(["", "2 * ", "1/2 * "])
                temporal = rng.choice(["F", "G", "GF", "FG"])
                prop = rng.choice(props)
                if rng.random() < 0.3:
                    prop = f"!{prop}"
                label = rng.choice(labels)
                term = f"{coeff}P[s1,{label}]({temporal} {prop})"
                if position == 0:
                    joined = rng.choice(["", "- "]) + term
                else:
                    joined += rng.choice([" + ", " - "]) + term
            op = rng.choice([">", ">=", "<", "<=", "=", "!=", "~eq(1/4)~", "~neq(1/4)~"])
            bound = rng.choice(["0", "1/2", "-1/2", "1"])
            text = f"exists s1 . {joined} {op} {bound}"
            ast = parse_property(text)
            temporals = {t.prob.temporal for t in ast.comparisons[0].terms if t.prob}
            if temporals <= {"F", "G"} or temporals <= {"GF", "FG"}:
                query = normalize(ast, m, model.init)
                assert oracle_holds_md(m, query)[0] == _direct_md_verdict(
                    m, ast, model.init
                ), text
                cases += 1
    assert cases > 20
