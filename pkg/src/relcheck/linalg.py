"""Sparse exact linear-system solving over rationals.

All model analyses (reachability probabilities, expected rewards, policy
evaluation) reduce to square sparse systems with a unique solution. We use
Gaussian elimination with a fill-in-avoiding pivot rule; coefficients are
`fractions.Fraction`, so results are exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, List, Tuple

Vector = Dict[Hashable, Fraction]

_ZERO = Fraction(0)


class SingularSystem(ArithmeticError):
    """The system has no unique solution."""


def solve_sparse(equations: List[Tuple[Vector, Fraction]]) -> Vector:
    """Solve a square sparse linear system given as rows (coeffs, rhs).

    Every variable occurring in some row is solved for; the number of rows
    must equal the number of variables and the system must be non-singular.
    Pivots are chosen Markowitz-style (short row, then rare column) which
    keeps fill-in small on the banded/layered systems produced by chain and
    policy evaluation.
    """
    rows: Dict[int, Vector] = {}
    rhs: Dict[int, Fraction] = {}
    columns: Dict[Hashable, set] = {}
    for i, (coeffs, b) in enumerate(equations):
        row = {v: c for v, c in coeffs.items() if c != 0}
        rows[i] = row
        rhs[i] = b
        for v in row:
            columns.setdefault(v, set()).add(i)

    variables = set(columns)
    if len(variables) != len(rows):
        raise SingularSystem(
            f"system has {len(rows)} rows but {len(variables)} variables"
        )

    elimination: List[Tuple[Hashable, Vector, Fraction]] = []
    active = set(rows)
    while active:
        # Pivot rule: smallest row; inside it, the variable hit by the
        # fewest other rows.
        pivot_row = min(active, key=lambda i: (len(rows[i]), i))
        row = rows[pivot_row]
        if not row:
            raise SingularSystem("zero row encountered")
        pivot_var = min(row, key=lambda v: (len(columns[v]), str(v)))
        pivot_coeff = row[pivot_var]

        inv = Fraction(1) / pivot_coeff
        norm_row = {v: c * inv for v, c in row.items() if v != pivot_var}
        norm_rhs = rhs[pivot_row] * inv
        elimination.append((pivot_var, norm_row, norm_rhs))

        active.discard(pivot_row)
        for v in row:
            columns[v].discard(pivot_row)
        del rows[pivot_row]

        for other in list(columns[pivot_var]):
            orow = rows[other]
            factor = orow.pop(pivot_var)
            columns[pivot_var].discard(other)
            if factor == 0:
                continue
            for v, c in norm_row.items():
                new = orow.get(v, _ZERO) - factor * c
                if new == 0:
                    if v in orow:
                        del orow[v]
                        columns[v].discard(other)
                else:
                    if v not in orow:
                        columns[v].add(other)
                    orow[v] = new
            rhs[other] = rhs[other] - factor * norm_rhs

    solution: Vector = {}
    for pivot_var, norm_row, norm_rhs in reversed(elimination):
        value = norm_rhs
        for v, c in norm_row.items():
            value -= c * solution[v]
        solution[pivot_var] = value
    return solution
