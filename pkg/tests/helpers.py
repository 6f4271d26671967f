"""Random model/query generators and a direct evaluator used to cross-check
the solvers against brute-force MD enumeration."""

import random
from fractions import Fraction

from relcheck.chains import buechi_probability, reach_probability
from relcheck.core import Mdp, induce_dtmc
from relcheck.query import (
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

COMPARISONS = (GT, GE, NAPPROX)


def random_mdp(rng: random.Random, max_states=6, max_actions=2, absorbing_targets=False):
    """Small random MDP with two labelled target groups. With
    `absorbing_targets` the target states are absorbing."""
    n = rng.randint(2, max_states)
    states = [f"s{i}" for i in range(n)]
    target_a = set(rng.sample(states, rng.randint(1, max(1, n // 2))))
    target_b = set(rng.sample(states, rng.randint(1, max(1, n // 2))))
    absorbing = (target_a | target_b) if absorbing_targets else set()
    trans = {}
    for s in states:
        if s in absorbing:
            trans[s] = {"a0": {s: Fraction(1)}}
            continue
        row = {}
        for k in range(rng.randint(1, max_actions)):
            succ_count = rng.randint(1, min(3, n))
            succs = rng.sample(states, succ_count)
            weights = [rng.randint(1, 4) for _ in succs]
            total = sum(weights)
            dist = {}
            for t, w in zip(succs, weights):
                dist[t] = dist.get(t, Fraction(0)) + Fraction(w, total)
            row[f"a{k}"] = dist
        trans[s] = row
    labels = {}
    for s in states:
        lab = set()
        if s in target_a:
            lab.add("A")
        if s in target_b:
            lab.add("B")
        labels[s] = lab
    return Mdp(states, [f"a{k}" for k in range(max_actions)], trans, labels)


def _random_bound(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-4, 4), rng.choice([1, 2, 3, 4]))


def random_md_sufficient_query(rng: random.Random, m: Mdp, temporal: str) -> RelationalQuery:
    """A single-predicate query from the classes where memoryless
    deterministic schedulers provably suffice for {>, >=, napprox}:

    * each operator has its own scheduler variable, or
    * (reachability with absorbing targets) operators sharing a scheduler
      share the initial state, or
    * operators sharing a scheduler have a shared target and equal signs.
    """
    targets = {
        "A": frozenset(s for s in m.states if "A" in m.labels[s]),
        "B": frozenset(s for s in m.states if "B" in m.labels[s]),
    }
    comparison = rng.choice(COMPARISONS)
    eps = Fraction(rng.randint(0, 2), 4) if comparison == NAPPROX else Fraction(0)
    case = rng.choice(["independent", "shared-init", "equal-sign"])
    if temporal == INF_OFTEN and case == "shared-init":
        case = "independent"  # the absorbing-targets case is reach-only
    ops = []
    m_count = rng.randint(1, 3)
    if case == "independent":
        for i in range(m_count):
            ops.append(
                Operator(
                    Fraction(rng.choice([-2, -1, 1, 2])),
                    rng.choice(m.states),
                    i + 1,
                    temporal,
                    targets[rng.choice("AB")],
                )
            )
        n = m_count
    elif case == "shared-init":
        start = rng.choice(m.states)
        for _ in range(m_count):
            ops.append(
                Operator(
                    Fraction(rng.choice([-2, -1, 1, 2])),
                    start,
                    1,
                    temporal,
                    targets[rng.choice("AB")],
                )
            )
        n = 1
    else:  # equal-sign, shared target per scheduler
        sign = rng.choice([1, -1])
        target = targets[rng.choice("AB")]
        for _ in range(m_count):
            ops.append(
                Operator(
                    Fraction(sign * rng.choice([1, 2])),
                    rng.choice(m.states),
                    1,
                    temporal,
                    target,
                )
            )
        n = 1
    return RelationalQuery(
        (Predicate(tuple(ops), comparison, _random_bound(rng), eps),),
        scheduler_count=n,
        scheduler_names=tuple(f"s{k + 1}" for k in range(n)),
    )


def evaluate_assignment(m: Mdp, query: RelationalQuery, assignment) -> bool:
    """Directly evaluate all predicates under a memoryless assignment."""
    chains = {name: induce_dtmc(m, sched) for name, sched in assignment.items()}
    for pred in query.predicates:
        total = Fraction(0)
        for op in pred.operators:
            if op.coefficient == 0:
                continue
            chain = chains[query.scheduler_name(op.scheduler)]
            if op.temporal == EVENTUALLY:
                p = reach_probability(chain, op.initial_state, set(op.target))
            else:
                p = buechi_probability(chain, op.initial_state, set(op.target))
            total += op.coefficient * p
        if pred.comparison == GT:
            ok = total > pred.bound
        elif pred.comparison == GE:
            ok = total >= pred.bound
        elif pred.comparison == APPROX:
            ok = abs(total - pred.bound) <= pred.epsilon
        else:
            ok = abs(total - pred.bound) > pred.epsilon
        if not ok:
            return False
    return True
