"""Top-level checking interface: routes a normal-form query to the right
decision procedure and decomposes universal conjunctions per predicate."""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

from .core import Mdp, ZERO
from .errors import MultiPredicate
from .moa import solve_conjrelreach
from .query import RelationalQuery
from .relbuechi import solve_relbuechi
from .relreach import CheckResult, Verdict, solve_relreach


def check_query(
    m: Mdp, query: RelationalQuery, tolerance: Fraction = ZERO, want_witness: bool = True
) -> CheckResult:
    """Decide a normalized relational query against a model.

    Reach-only single predicates go to the reachability engine, Buchi-only
    ones through the MEC-quotient reduction, existential conjunctions to the
    multi-objective engine. A universal conjunction holds iff every conjunct
    holds universally, so it splits into per-predicate universal checks.
    """
    if len(query.predicates) == 1:
        if query.is_buechi_only():
            return solve_relbuechi(m, query, tolerance, want_witness)
        return solve_relreach(m, query, tolerance, want_witness)
    if query.universal:
        outcome = Verdict.TRUE
        notes = []
        for j in range(len(query.predicates)):
            sub = RelationalQuery(
                (query.predicates[j],),
                query.scheduler_count,
                universal=True,
                scheduler_names=query.scheduler_names,
            )
            result = check_query(m, sub, tolerance, want_witness)
            notes.append(f"conjunct {j + 1}: {result.verdict.value}")
            if result.verdict is Verdict.FALSE:
                return replace(result, note="; ".join(notes))
            if result.verdict is Verdict.INCONCLUSIVE:
                outcome = Verdict.INCONCLUSIVE
        return CheckResult(outcome, universal=True, note="; ".join(notes))
    if not query.is_reach_only():
        raise MultiPredicate("conjunctions of Buchi objectives are not supported")
    return solve_conjrelreach(m, query, tolerance, want_witness)
