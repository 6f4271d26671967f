"""Exact rational linear programming (two-phase simplex, Bland's rule).

Small dense tableau implementation over `fractions.Fraction`. Bland's rule
guarantees termination; everything stays in exact arithmetic, which the
correctness argument of the occupation-measure encoding requires.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

ZERO = Fraction(0)
ONE = Fraction(1)

LE, EQ, GE = "<=", "=", ">="


@dataclass
class LinearProgram:
    """maximize objective . x subject to rows, x >= 0."""

    num_vars: int
    rows: List[Tuple[Dict[int, Fraction], str, Fraction]] = field(default_factory=list)
    objective: Dict[int, Fraction] = field(default_factory=dict)

    def add_row(self, coeffs: Dict[int, Fraction], rel: str, rhs) -> None:
        assert rel in (LE, EQ, GE)
        self.rows.append(
            ({j: Fraction(c) for j, c in coeffs.items() if c != 0}, rel, Fraction(rhs))
        )


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    solution: Optional[List[Fraction]] = None
    objective: Optional[Fraction] = None


class _Tableau:
    def __init__(self, lp: LinearProgram):
        self.n = lp.num_vars
        rows = []
        for coeffs, rel, rhs in lp.rows:
            if rhs < 0:  # normalize to rhs >= 0
                coeffs = {j: -c for j, c in coeffs.items()}
                rhs = -rhs
                rel = {LE: GE, GE: LE, EQ: EQ}[rel]
            rows.append((coeffs, rel, rhs))
        self.m = len(rows)
        slack: Dict[int, int] = {}
        total = self.n
        for i, (_, rel, _) in enumerate(rows):
            if rel in (LE, GE):
                slack[i] = total
                total += 1
        self.art: Dict[int, int] = {}
        for i, (_, rel, _) in enumerate(rows):
            if rel in (EQ, GE):
                self.art[i] = total
                total += 1
        self.total = total
        self.rows = [[ZERO] * (total + 1) for _ in range(self.m)]
        self.basis = [0] * self.m
        for i, (coeffs, rel, rhs) in enumerate(rows):
            row = self.rows[i]
            for j, c in coeffs.items():
                row[j] = c
            if rel == LE:
                row[slack[i]] = ONE
                self.basis[i] = slack[i]
            elif rel == GE:
                row[slack[i]] = -ONE
            if i in self.art:
                row[self.art[i]] = ONE
                self.basis[i] = self.art[i]
            row[total] = rhs
        self.art_set = frozenset(self.art.values())

    def pivot(self, r: int, c: int) -> None:
        inv = ONE / self.rows[r][c]
        if inv != 1:
            self.rows[r] = [v * inv for v in self.rows[r]]
        row_r = self.rows[r]
        for i in range(self.m):
            if i == r:
                continue
            factor = self.rows[i][c]
            if factor != 0:
                self.rows[i] = [a - factor * b for a, b in zip(self.rows[i], row_r)]
        self.basis[r] = c

    def reduced_costs(self, costs: List[Fraction]) -> List[Fraction]:
        red = list(costs)
        for i in range(self.m):
            cb = costs[self.basis[i]]
            if cb == 0:
                continue
            row = self.rows[i]
            for j in range(self.total):
                if row[j] != 0:
                    red[j] -= cb * row[j]
        return red

    def run(self, costs: List[Fraction], exclude=frozenset()) -> str:
        while True:
            red = self.reduced_costs(costs)
            entering = -1
            for j in range(self.total):  # Bland: first improving column
                if j not in exclude and red[j] > 0:
                    entering = j
                    break
            if entering < 0:
                return "optimal"
            leaving, best = -1, None
            for i in range(self.m):
                a = self.rows[i][entering]
                if a > 0:
                    ratio = self.rows[i][self.total] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basis[i] < self.basis[leaving])
                    ):
                        best, leaving = ratio, i
            if leaving < 0:
                return "unbounded"
            self.pivot(leaving, entering)


def solve_lp(lp: LinearProgram) -> LpResult:
    t = _Tableau(lp)
    if t.art:
        costs1 = [ZERO] * t.total
        for j in t.art_set:
            costs1[j] = -ONE
        t.run(costs1)
        infeasibility = sum(
            (t.rows[i][t.total] for i in range(t.m) if t.basis[i] in t.art_set), ZERO
        )
        if infeasibility != 0:
            return LpResult("infeasible")
        for i in range(t.m):  # pivot degenerate artificials out where possible
            if t.basis[i] in t.art_set:
                for j in range(t.total):
                    if j not in t.art_set and t.rows[i][j] != 0:
                        t.pivot(i, j)
                        break
    costs2 = [ZERO] * t.total
    for j, c in lp.objective.items():
        costs2[j] = Fraction(c)
    status = t.run(costs2, exclude=t.art_set)
    if status == "unbounded":
        return LpResult("unbounded")
    solution = [ZERO] * t.n
    for i in range(t.m):
        if t.basis[i] < t.n:
            solution[t.basis[i]] = t.rows[i][t.total]
    objective = sum((costs2[j] * solution[j] for j in range(t.n)), ZERO)
    return LpResult("optimal", solution, objective)
