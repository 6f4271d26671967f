"""Normal-form relational queries.

A query is a conjunction of predicates; each predicate compares a weighted
sum of reachability or infinitely-often probabilities against a rational
bound using one of {>, >=, approx(eps), napprox(eps)}. Universal formulas
carry a flag and are decided through their negated existential form.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Hashable, Tuple

EVENTUALLY = "F"
INF_OFTEN = "GF"

GT = ">"
GE = ">="
APPROX = "~eq~"
NAPPROX = "~neq~"


@dataclass(frozen=True)
class Operator:
    """One weighted probability term: coeff * P^(sched k)_(s)(heart target)."""

    coefficient: Fraction
    initial_state: Hashable
    scheduler: int  # 1-based scheduler variable index
    temporal: str  # EVENTUALLY or INF_OFTEN
    target: frozenset


@dataclass(frozen=True)
class Predicate:
    operators: Tuple[Operator, ...]
    comparison: str  # GT, GE, APPROX, NAPPROX
    bound: Fraction
    epsilon: Fraction = Fraction(0)

    def negated(self) -> "Predicate":
        if self.comparison == GT:  # not(E > q)  ==  -E >= -q
            return replace(
                self,
                operators=tuple(
                    replace(op, coefficient=-op.coefficient) for op in self.operators
                ),
                comparison=GE,
                bound=-self.bound,
            )
        if self.comparison == GE:  # not(E >= q)  ==  -E > -q
            return replace(
                self,
                operators=tuple(
                    replace(op, coefficient=-op.coefficient) for op in self.operators
                ),
                comparison=GT,
                bound=-self.bound,
            )
        if self.comparison == APPROX:
            return replace(self, comparison=NAPPROX)
        if self.comparison == NAPPROX:
            return replace(self, comparison=APPROX)
        raise ValueError(self.comparison)


@dataclass(frozen=True)
class RelationalQuery:
    predicates: Tuple[Predicate, ...]
    scheduler_count: int
    universal: bool = False
    scheduler_names: Tuple[str, ...] = ()

    @property
    def temporals(self) -> set:
        return {op.temporal for p in self.predicates for op in p.operators}

    def is_reach_only(self) -> bool:
        return self.temporals <= {EVENTUALLY}

    def is_buechi_only(self) -> bool:
        return self.temporals <= {INF_OFTEN}

    def scheduler_name(self, k: int) -> str:
        if 1 <= k <= len(self.scheduler_names):
            return self.scheduler_names[k - 1]
        return f"sched{k}"
