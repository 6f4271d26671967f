"""Conjunctions of relational reachability predicates.

The query is split into classes of predicates connected through shared
scheduler variables; each class reduces to an extended multi-objective
achievability query on the pre-processed combined MDP of its combinations
and is decided through an occupation-measure encoding in linear real
arithmetic, solved by iterated exact LPs:

* approximate-equality rows expand into two weak inequalities;
* strict rows share one maximized slack variable (feasible iff its
  optimum is positive);
* exact disequalities are checked one by one against the weak system;
* each eps-disequality doubles the branch count (sign vectors are tried
  lexicographically, the below-branch first).

Everything stays in rational arithmetic, so this path never returns
"inconclusive".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from .core import ExplicitMemoryScheduler, Mdp, MRScheduler, RewardStructure, ONE, ZERO
from .errors import MixedTemporalOperators, RelcheckError
from .query import APPROX, GE, GT, NAPPROX, Predicate, RelationalQuery
from .relreach import CheckResult, Verdict, detect_fast_path
from .simplex import EQ, GE as ROW_GE, LE as ROW_LE, LinearProgram, solve_lp
from .unfolding import (
    DAGGER,
    INIT,
    CombinedMdp,
    ProcessedMdp,
    build_combined,
    collect_combinations,
    goal_unfold,
    predicate_rewards,
    preprocess_combined,
)

__all__ = [
    "split_query",
    "build_moa_query",
    "encode_lra",
    "solve_lra",
    "extract_scheduler",
    "solve_conjrelreach",
]


def split_query(query: RelationalQuery) -> List[List[int]]:
    """Partition predicate indices into classes closed under scheduler
    sharing; classes are solved independently and conjoined."""
    n = len(query.predicates)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    by_sched: Dict[int, int] = {}
    for j, pred in enumerate(query.predicates):
        for op in pred.operators:
            if op.coefficient == 0:
                continue
            if op.scheduler in by_sched:
                union(by_sched[op.scheduler], j)
            else:
                by_sched[op.scheduler] = j
    groups: Dict[int, List[int]] = {}
    for j in range(n):
        groups.setdefault(find(j), []).append(j)
    return [groups[r] for r in sorted(groups)]


@dataclass
class MoaProblem:
    """One class's extended multi-objective achievability query."""

    processed: ProcessedMdp
    combined: CombinedMdp
    subquery: RelationalQuery
    predicate_indices: List[int]  # original indices, aligned with rewards
    rewards: List[RewardStructure]
    predicates: List[Predicate]


def build_moa_query(m: Mdp, query: RelationalQuery, indices: Sequence[int]) -> MoaProblem:
    """Combined MDP over the class's combinations, per-predicate rewards
    scaled by the combination count, and the stay-committed pre-processing."""
    indices = list(indices)
    subquery = RelationalQuery(
        tuple(query.predicates[j] for j in indices),
        query.scheduler_count,
        universal=False,
        scheduler_names=query.scheduler_names,
    )
    combos = collect_combinations(subquery)
    if not combos:
        raise RelcheckError("class has no probability operators")
    units = []
    for combo in combos:
        units.append((combo, goal_unfold(m, combo.targets, combo.initial_state)))
    combined = build_combined(units)
    rewards = [predicate_rewards(combined, subquery, j) for j in range(len(indices))]
    processed = preprocess_combined(combined)
    return MoaProblem(
        processed,
        combined,
        subquery,
        indices,
        rewards,
        [subquery.predicates[j] for j in range(len(indices))],
    )


# ---------------------------------------------------------------------------
# Linear real arithmetic encoding
# ---------------------------------------------------------------------------


@dataclass
class LraConstraint:
    coeffs: Dict[int, Fraction]
    comparison: str  # GT, GE, APPROX, NAPPROX
    bound: Fraction
    epsilon: Fraction


@dataclass
class LraSystem:
    variables: List[Tuple]  # (state, action) in index order
    index: Dict[Tuple, int]
    equalities: List[Tuple[Dict[int, Fraction], Fraction]]  # flow + sink rows
    constraints: List[LraConstraint]  # the predicate rows


def encode_lra(problem: MoaProblem) -> LraSystem:
    """Expected-visiting-times encoding: flow balance per combined state, a
    unit of dagger outflow, predicate rows over state inflows, and implicit
    non-negativity."""
    processed = problem.processed
    combined_states = [s for s in processed.mdp.states if s not in processed.sink_states]
    variables: List[Tuple] = []
    index: Dict[Tuple, int] = {}
    for s in combined_states:
        for a in processed.mdp.enabled_actions(s):
            index[(s, a)] = len(variables)
            variables.append((s, a))

    # inflow(s) as a linear form over the variables (dagger rows lead only
    # to sinks and never contribute)
    inflow: Dict[Tuple, Dict[int, Fraction]] = {s: {} for s in combined_states}
    for s in combined_states:
        for a in processed.mdp.enabled_actions(s):
            for t, p in processed.mdp.successors(s, a).items():
                if t in inflow:
                    row = inflow[t]
                    j = index[(s, a)]
                    row[j] = row.get(j, ZERO) + p

    equalities = []
    for s in combined_states:
        coeffs = dict(inflow[s])
        coeffs = {j: -c for j, c in coeffs.items()}
        for a in processed.mdp.enabled_actions(s):
            j = index[(s, a)]
            coeffs[j] = coeffs.get(j, ZERO) + ONE
        rhs = ONE if s == INIT else ZERO
        equalities.append((coeffs, rhs))
    sink_row = {
        index[(s, DAGGER)]: ONE for s in processed.mec_states
    }
    equalities.append((sink_row, ONE))

    constraints = []
    for rewards, pred in zip(problem.rewards, problem.predicates):
        coeffs: Dict[int, Fraction] = {}
        for s, r in rewards.rewards.items():
            if r == 0 or s not in inflow:
                continue
            for j, p in inflow[s].items():
                coeffs[j] = coeffs.get(j, ZERO) + r * p
        constraints.append(LraConstraint(coeffs, pred.comparison, pred.bound, pred.epsilon))
    return LraSystem(variables, index, equalities, constraints)


def _value(coeffs: Dict[int, Fraction], point: List[Fraction]) -> Fraction:
    return sum((c * point[j] for j, c in coeffs.items()), ZERO)


def _solve_branch(system: LraSystem, branch: Dict[int, str]) -> Optional[List[Fraction]]:
    """Solve one sign-vector branch: weak rows as an LP (strict rows share a
    maximized slack), exact disequalities checked one by one and combined by
    convex mixing."""
    nvars = len(system.variables)

    weak_rows: List[Tuple[Dict[int, Fraction], str, Fraction]] = []
    strict_rows: List[Tuple[Dict[int, Fraction], str, Fraction]] = []  # need slack
    disequalities: List[LraConstraint] = []
    for idx, con in enumerate(system.constraints):
        if con.comparison == GE:
            weak_rows.append((con.coeffs, ROW_GE, con.bound))
        elif con.comparison == GT:
            strict_rows.append((con.coeffs, ROW_GE, con.bound))
        elif con.comparison == APPROX:
            weak_rows.append((con.coeffs, ROW_LE, con.bound + con.epsilon))
            weak_rows.append((con.coeffs, ROW_GE, con.bound - con.epsilon))
        elif con.comparison == NAPPROX:
            if con.epsilon == 0:
                disequalities.append(con)
            elif branch[idx] == "<":
                strict_rows.append((con.coeffs, ROW_LE, con.bound - con.epsilon))
            else:
                strict_rows.append((con.coeffs, ROW_GE, con.bound + con.epsilon))
        else:
            raise ValueError(con.comparison)

    def feasible_point(extra_strict=()) -> Optional[List[Fraction]]:
        stricts = strict_rows + list(extra_strict)
        lp = LinearProgram(nvars + (1 if stricts else 0))
        z = nvars
        for coeffs, rhs in system.equalities:
            lp.add_row(coeffs, EQ, rhs)
        for coeffs, rel, rhs in weak_rows:
            lp.add_row(coeffs, rel, rhs)
        for coeffs, rel, rhs in stricts:
            padded = dict(coeffs)
            padded[z] = -ONE if rel == ROW_GE else ONE
            lp.add_row(padded, rel, rhs)
        if stricts:
            lp.add_row({z: ONE}, ROW_LE, ONE)
            lp.objective = {z: ONE}
        result = solve_lp(lp)
        if result.status != "optimal":
            return None
        if stricts and result.solution[z] <= 0:
            return None
        return result.solution[:nvars]

    point = feasible_point()
    if point is None:
        return None
    satisfied = [
        con for con in disequalities if _value(con.coeffs, point) != con.bound
    ]
    for con in disequalities:
        if _value(con.coeffs, point) != con.bound:
            continue
        # check the hyperplane both ways; by the independence of negative
        # constraints, failure of both means the whole branch is infeasible
        side = feasible_point([(con.coeffs, ROW_LE, con.bound)])
        if side is None:
            side = feasible_point([(con.coeffs, ROW_GE, con.bound)])
        if side is None:
            return None
        # mix towards `side`: any positive weight fixes `con`; previously
        # satisfied rows exclude at most one weight each
        lam = Fraction(1, 2)
        while True:
            candidate = [(1 - lam) * a + lam * b for a, b in zip(point, side)]
            if all(_value(d.coeffs, candidate) != d.bound for d in satisfied):
                break
            lam /= 2
        point = candidate
        satisfied.append(con)
    return point


def solve_lra(system: LraSystem) -> Optional[Dict[Tuple, Fraction]]:
    """Feasible assignment of the encoding or None. Branches over the sign
    vectors of eps-disequalities, below-branch first."""
    napprox_eps = [
        idx
        for idx, con in enumerate(system.constraints)
        if con.comparison == NAPPROX and con.epsilon > 0
    ]
    for signs in product("<>", repeat=len(napprox_eps)):
        branch = dict(zip(napprox_eps, signs))
        point = _solve_branch(system, branch)
        if point is not None:
            return {var: point[j] for var, j in system.index.items()}
    return None


def extract_scheduler(assignment: Dict[Tuple, Fraction], processed: ProcessedMdp) -> MRScheduler:
    """Memoryless randomized scheduler from an occupation measure: normalize
    the per-state action mass; states with zero mass (unreached) choose
    uniformly."""
    totals: Dict = {}
    for (s, a), y in assignment.items():
        totals[s] = totals.get(s, ZERO) + y
    choices = {}
    for s in processed.mdp.states:
        enabled = processed.mdp.enabled_actions(s)
        if totals.get(s, ZERO) > 0:
            choices[s] = {
                a: assignment.get((s, a), ZERO) / totals[s] for a in enabled
            }
        else:
            share = Fraction(1, len(enabled))
            choices[s] = {a: share for a in enabled}
    return MRScheduler(choices)


# ---------------------------------------------------------------------------
# Witness projection back to the original MDP
# ---------------------------------------------------------------------------


def _project_witnesses(m: Mdp, problem: MoaProblem, sched: MRScheduler) -> Dict[str, object]:
    """Turn the memoryless witness of the processed combined MDP into one
    explicit-memory scheduler per scheduler variable on the original MDP.

    Modes track (combination, visited targets, current state, committed?);
    dagger mass becomes a lazily sampled commitment to stay inside the
    current end component, realized by a deterministic in-component action.
    """
    processed = problem.processed
    combined = problem.combined
    by_var: Dict[int, List[int]] = {}
    for cid, combo in enumerate(combined.combos):
        by_var.setdefault(combo.scheduler, []).append(cid)

    witnesses: Dict[str, object] = {}
    for k, cids in sorted(by_var.items()):
        modes = []
        init = {}
        act = {}
        update = {}
        for cid in cids:
            combo = combined.combos[cid]
            u = combined.unfoldings[cid]
            targets = u.targets

            def membership(s):
                return frozenset(t for t in targets if s in t)

            for (s, visited) in u.mdp.states:
                cstate = ((s, visited), cid)
                follow = ("f", cid, visited, s)
                commit = ("c", cid, visited, s)
                modes += [follow, commit]
                dist = dict(sched.choices[cstate])
                dagger_mass = dist.pop(DAGGER, ZERO)
                stay_action = None
                if cstate in processed.mec_actions:
                    stay_action = sorted(processed.mec_actions[cstate], key=str)[0]
                nu = dict(dist)
                if dagger_mass > 0:
                    nu[stay_action] = nu.get(stay_action, ZERO) + dagger_mass
                act[(follow, s)] = nu
                if stay_action is not None:
                    act[(commit, s)] = {stay_action: ONE}
                new_visited = visited | membership(s)
                for a in u.mdp.enabled_actions((s, visited)):
                    for (t, _v2) in u.mdp.successors((s, visited), a):
                        nf = ("f", cid, new_visited, t)
                        nc = ("c", cid, new_visited, t)
                        update[(commit, a, t)] = {nc: ONE}
                        p_commit = dagger_mass if a == stay_action else ZERO
                        p_follow = dist.get(a, ZERO)
                        total = p_commit + p_follow
                        if total > 0 and p_commit > 0:
                            r = p_commit / total
                            update[(follow, a, t)] = {nc: r, nf: 1 - r}
                        else:
                            update[(follow, a, t)] = {nf: ONE}
            init[combo.initial_state] = {("f", cid, frozenset(), combo.initial_state): ONE}
        witnesses[problem.subquery.scheduler_name(k)] = ExplicitMemoryScheduler(
            modes, init, update, act
        )
    return witnesses


def solve_conjrelreach(
    m: Mdp, query: RelationalQuery, tolerance=ZERO, want_witness: bool = True
) -> CheckResult:
    """Decide a conjunction of reachability predicates; exact, so the
    verdict is never inconclusive and the tolerance argument is ignored."""
    if not query.is_reach_only():
        raise MixedTemporalOperators("solve_conjrelreach expects eventually-operators only")
    if query.universal:
        raise RelcheckError(
            "universal conjunctions decompose per predicate; use check_query"
        )

    fast = detect_fast_path(query, m)
    classes = split_query(query)
    witnesses: Dict[str, object] = {}
    for indices in classes:
        if all(
            op.coefficient == 0
            for j in indices
            for op in query.predicates[j].operators
        ):
            # constant predicates
            for j in indices:
                pred = query.predicates[j]
                if not _constant_holds(pred):
                    return CheckResult(Verdict.FALSE, fast, note=f"predicate {j + 1} fails")
            continue
        problem = build_moa_query(m, query, indices)
        system = encode_lra(problem)
        assignment = solve_lra(system)
        if assignment is None:
            return CheckResult(
                Verdict.FALSE, fast, note=f"class {indices} has no achieving scheduler"
            )
        if want_witness:
            sched = extract_scheduler(assignment, problem.processed)
            witnesses.update(_project_witnesses(m, problem, sched))
    return CheckResult(Verdict.TRUE, fast, witnesses=witnesses if want_witness else None)


def _constant_holds(pred: Predicate) -> bool:
    value = ZERO
    if pred.comparison == GT:
        return value > pred.bound
    if pred.comparison == GE:
        return value >= pred.bound
    if pred.comparison == APPROX:
        return abs(value - pred.bound) <= pred.epsilon
    return abs(value - pred.bound) > pred.epsilon
