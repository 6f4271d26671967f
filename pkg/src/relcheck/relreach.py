"""Decision procedure for single-predicate relational reachability.

Implements the four-step pipeline: collect state-scheduler combinations,
goal-unfold each with its first-visit reward structure, optimize expected
rewards per combination (max always; min additionally for the equality
comparisons), then aggregate and decide with the tolerance-aware rules.
Inconclusive is only possible with a non-zero tolerance.

Witness synthesis lifts the per-combination memoryless-deterministic
unfolding policies back to the original MDP as explicit-memory schedulers
whose modes track the set of already-visited targets; for approximate
equality the min- and max-witnesses are convex-combined. Memoryless
deterministic witnesses are emitted directly for the structurally simple
query classes where they suffice, after an exact re-evaluation check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .core import (
    ExplicitMemoryScheduler,
    MDScheduler,
    Mdp,
    convex_combine,
    ONE,
    ZERO,
)
from .errors import (
    MixedTemporalOperators,
    MultiPredicate,
    NoWitnessAvailable,
)
from .query import APPROX, GE, GT, NAPPROX, Predicate, RelationalQuery
from .rewards import expected_reward_of, max_expected_reward, min_expected_reward
from .unfolding import (
    Combination,
    UnfoldedMdp,
    collect_combinations,
    combination_rewards,
    first_visit_rewards,
    goal_unfold,
)

__all__ = [
    "Verdict",
    "CheckResult",
    "collect_combinations",
    "detect_fast_path",
    "solve_relreach",
    "synthesize_witness",
]


class Verdict(Enum):
    TRUE = "Yes"
    FALSE = "No"
    INCONCLUSIVE = "Inconclusive"

    def negated(self) -> "Verdict":
        if self is Verdict.TRUE:
            return Verdict.FALSE
        if self is Verdict.FALSE:
            return Verdict.TRUE
        return self


FAST_PATH_ABSORBING = "absorbing"
FAST_PATH_INDEPENDENT = "independent"
FAST_PATH_FIXED = "fixed-targets"
FAST_PATH_NONE = "none"

# "at most a constant" many distinct target sets; we pin the constant at 2
FIXED_TARGET_LIMIT = 2


@dataclass
class CheckResult:
    verdict: Verdict
    fast_path: str = FAST_PATH_NONE
    # aggregated per-direction bounds: (lower, upper) or None if not computed
    v_max: Optional[Tuple[Fraction, Fraction]] = None
    v_min: Optional[Tuple[Fraction, Fraction]] = None
    witnesses: Optional[Dict[str, object]] = None  # scheduler-name -> scheduler
    universal: bool = False
    note: str = ""
    # fallback for Buchi queries whose witness could not be transferred
    quotient_witnesses: Optional[Dict[str, object]] = None


def detect_fast_path(query: RelationalQuery, m: Optional[Mdp] = None) -> str:
    """Classify a query into the polynomial-time special cases: absorbing
    targets (verified against the model when given), one quantifier per
    probability operator, or at most a constant number of distinct targets."""
    ops = [op for p in query.predicates for op in p.operators if op.coefficient != 0]
    if not ops:
        return FAST_PATH_FIXED
    targets = {op.target for op in ops}
    if m is not None and all(
        all(m.is_absorbing(s) for s in t) for t in targets
    ):
        return FAST_PATH_ABSORBING
    if len(ops) == len({op.scheduler for op in ops}) and query.scheduler_count == len(ops):
        return FAST_PATH_INDEPENDENT
    if len(targets) <= FIXED_TARGET_LIMIT:
        return FAST_PATH_FIXED
    return FAST_PATH_NONE


# ---------------------------------------------------------------------------
# Per-combination analysis
# ---------------------------------------------------------------------------


@dataclass
class _Direction:
    bounds_lower: Fraction
    bounds_upper: Fraction
    witness: MDScheduler  # on the unfolding
    attained: Fraction  # exact value of the witness


@dataclass
class _ComboAnalysis:
    combo: Combination
    unfolding: UnfoldedMdp
    rewards: object
    maximum: _Direction
    minimum: Optional[_Direction] = None


def _analyze(m: Mdp, query: RelationalQuery, combos, tolerance, need_min) -> List[_ComboAnalysis]:
    # split the tolerance across combinations so the aggregated interval is
    # no wider than the requested tolerance
    if tolerance > 0 and len(combos) > 1:
        tolerance = tolerance / len(combos)
    analyses = []
    for combo in combos:
        u = goal_unfold(m, combo.targets, combo.initial_state)
        rewards = combination_rewards(u, combo, query)
        entry = u.entry_of(combo.initial_state)
        bmax, wmax = max_expected_reward(u.mdp, rewards, entry, tolerance)
        attained = (
            bmax.point()
            if tolerance == 0
            else expected_reward_of(u.mdp, rewards, wmax, entry)
        )
        maximum = _Direction(bmax.lower, bmax.upper, wmax, attained)
        minimum = None
        if need_min:
            bmin, wmin = min_expected_reward(u.mdp, rewards, entry, tolerance)
            att = (
                bmin.point()
                if tolerance == 0
                else expected_reward_of(u.mdp, rewards, wmin, entry)
            )
            minimum = _Direction(bmin.lower, bmin.upper, wmin, att)
        analyses.append(_ComboAnalysis(combo, u, rewards, maximum, minimum))
    return analyses


# ---------------------------------------------------------------------------
# Witness lifting
# ---------------------------------------------------------------------------


def _lift_explicit(
    m: Mdp, parts: List[Tuple[Combination, UnfoldedMdp, MDScheduler]]
) -> ExplicitMemoryScheduler:
    """Combine unfolding policies of the combinations sharing one scheduler
    variable into an explicit-memory scheduler on the original MDP. Modes
    are (combination id, visited targets, current state); the visited set
    absorbs the memberships of the state being left, mirroring the goal
    unfolding's transition rule."""
    modes = set()
    init = {}
    act = {}
    update = {}
    for cid, (combo, u, policy) in enumerate(parts):
        targets = u.targets

        def membership(s):
            return frozenset(t for t in targets if s in t)

        for (s, visited) in u.mdp.states:
            mode = (cid, visited, s)
            modes.add(mode)
            if (s, visited) in policy.choices:
                action = policy.choices[(s, visited)]
                act[(mode, s)] = {action: ONE}
            new_visited = visited | membership(s)
            for a in u.mdp.enabled_actions((s, visited)):
                for (t, _v2) in u.mdp.successors((s, visited), a):
                    update[(mode, a, t)] = {(cid, new_visited, t): ONE}
        entry_state = combo.initial_state
        init[entry_state] = {(cid, frozenset(), entry_state): ONE}
    return ExplicitMemoryScheduler(sorted(modes, key=str), init, update, act)


def _group_by_scheduler(analyses: List[_ComboAnalysis]):
    groups: Dict[int, List[_ComboAnalysis]] = {}
    for an in analyses:
        groups.setdefault(an.combo.scheduler, []).append(an)
    return groups


def _assignment(m: Mdp, query, analyses, direction: str) -> Dict[str, object]:
    """Per-scheduler-variable witness assembly for one direction."""
    result = {}
    for k, group in sorted(_group_by_scheduler(analyses).items()):
        parts = []
        for an in group:
            d = an.maximum if direction == "max" else an.minimum
            parts.append((an.combo, an.unfolding, d.witness))
        result[query.scheduler_name(k)] = _lift_explicit(m, parts)
    return result


def _md_case(query: RelationalQuery, m: Mdp) -> bool:
    """Query classes with polynomial MD witnesses: one quantifier per
    operator; same initial state per scheduler with absorbing targets; or
    equal-sign coefficients with a shared target per scheduler."""
    pred = query.predicates[0]
    ops = [op for op in pred.operators if op.coefficient != 0]
    if not ops:
        return True
    by_sched: Dict[int, list] = {}
    for op in ops:
        by_sched.setdefault(op.scheduler, []).append(op)
    if all(len(v) == 1 for v in by_sched.values()):
        return True
    if all(
        len({op.initial_state for op in v}) == 1 for v in by_sched.values()
    ) and all(m.is_absorbing(s) for op in ops for s in op.target):
        return True
    for v in by_sched.values():
        if len({op.target for op in v}) != 1:
            return False
        signs = {op.coefficient > 0 for op in v}
        if len(signs) != 1:
            return False
    return True


def _md_assignment(m, query, analyses, direction) -> Optional[Dict[str, object]]:
    """Try to build MD witnesses for one direction by re-optimizing each
    scheduler variable on a shared multi-entry unfolding and projecting the
    policy's not-yet-visited layer onto the original states. The candidate
    is verified by exact re-evaluation; None means fall back to explicit."""
    expected = sum(
        ((an.maximum if direction == "max" else an.minimum).attained for an in analyses),
        ZERO,
    )
    assignment: Dict[str, object] = {}
    groups = _group_by_scheduler(analyses)
    for k, group in sorted(groups.items()):
        fam = frozenset().union(*(an.combo.targets for an in group))
        entries = [an.combo.initial_state for an in group]
        u = goal_unfold(m, fam, entries)
        if len(group) == 1:
            rewards = combination_rewards(u, group[0].combo, query)
        else:
            # equal-sign, shared-target case: a unit first-visit reward
            # (sign-adjusted) has the same optimizers from every entry
            target = next(iter(fam))
            rewards = first_visit_rewards(u, target)
            positive = all(
                query.predicates[j].operators[i].coefficient > 0
                for an in group
                for i, j in an.combo.indices
            )
            if not positive:
                rewards = rewards.negated()
        opt = max_expected_reward if direction == "max" else min_expected_reward
        _, policy = opt(u.mdp, rewards, u.entry_of(entries[0]), ZERO)
        choices = {}
        for (s, visited) in u.mdp.states:
            if visited == frozenset() and (s, visited) in policy.choices:
                choices[s] = policy.choices[(s, visited)]
        for s in m.states:
            if s not in choices:
                choices[s] = m.enabled_actions(s)[0]
        assignment[query.scheduler_name(k)] = MDScheduler(choices)

    value = _evaluate_assignment(m, query, assignment)
    if value == expected:
        return assignment
    return None


def _evaluate_assignment(m: Mdp, query: RelationalQuery, assignment) -> Fraction:
    from .chains import scheduler_reach_probability

    pred = query.predicates[0]
    total = ZERO
    for op in pred.operators:
        if op.coefficient == 0:
            continue
        sched = assignment[query.scheduler_name(op.scheduler)]
        total += op.coefficient * scheduler_reach_probability(
            m, sched, op.initial_state, set(op.target)
        )
    return total


# ---------------------------------------------------------------------------
# Main solver
# ---------------------------------------------------------------------------


def solve_relreach(
    m: Mdp, query: RelationalQuery, tolerance: Fraction = ZERO, want_witness: bool = True
) -> CheckResult:
    """Decide a single-predicate reachability query; see module docstring."""
    if len(query.predicates) != 1:
        raise MultiPredicate("use solve_conjrelreach for conjunctions")
    if not query.is_reach_only():
        raise MixedTemporalOperators("solve_relreach expects eventually-operators only")
    tolerance = Fraction(tolerance)

    if query.universal:
        negated = RelationalQuery(
            (query.predicates[0].negated(),),
            query.scheduler_count,
            universal=False,
            scheduler_names=query.scheduler_names,
        )
        sub = solve_relreach(m, negated, tolerance, want_witness)
        return replace(
            sub,
            verdict=sub.verdict.negated(),
            universal=True,
            note="decided via negated existential form"
            + (f"; {sub.note}" if sub.note else ""),
        )

    pred = query.predicates[0]
    combos = collect_combinations(query)
    fast = detect_fast_path(query, m)

    if not combos:  # constant predicate
        verdict = _decide(pred, ZERO, ZERO, ZERO, ZERO, tolerance)
        return CheckResult(verdict, fast, (ZERO, ZERO), (ZERO, ZERO), {} if verdict is Verdict.TRUE else None)

    need_min = pred.comparison in (APPROX, NAPPROX)
    analyses = _analyze(m, query, combos, tolerance, need_min)

    max_lo = sum((an.maximum.bounds_lower for an in analyses), ZERO)
    max_hi = sum((an.maximum.bounds_upper for an in analyses), ZERO)
    if need_min:
        min_lo = sum((an.minimum.bounds_lower for an in analyses), ZERO)
        min_hi = sum((an.minimum.bounds_upper for an in analyses), ZERO)
    else:
        min_lo = min_hi = None

    verdict = _decide(pred, max_lo, max_hi, min_lo, min_hi, tolerance)
    result = CheckResult(
        verdict,
        fast,
        (max_lo, max_hi),
        (min_lo, min_hi) if need_min else None,
    )
    if verdict is Verdict.TRUE and want_witness:
        try:
            result.witnesses = synthesize_witness(m, query, analyses, tolerance)
        except NoWitnessAvailable as exc:
            result.note = f"no witness: {exc}"
    return result


def _decide(pred: Predicate, max_lo, max_hi, min_lo, min_hi, tolerance) -> Verdict:
    q = pred.bound
    eps = pred.epsilon
    cmp = pred.comparison
    if cmp in (GT, GE):
        holds = (max_lo > q) if cmp == GT else (max_lo >= q)
        fails = not ((max_hi > q) if cmp == GT else (max_hi >= q))
        if holds:
            return Verdict.TRUE
        if fails:
            return Verdict.FALSE
        return Verdict.INCONCLUSIVE
    if cmp == APPROX:
        if min_hi - eps <= q <= max_lo + eps:
            return Verdict.TRUE
        if not (min_lo - eps <= q <= max_hi + eps):
            return Verdict.FALSE
        return Verdict.INCONCLUSIVE
    if cmp == NAPPROX:
        # interval endpoints may invert; the two-sided membership test is
        # applied literally
        if q < max_lo - eps or q > min_hi + eps:
            return Verdict.TRUE
        if max_hi - eps <= q <= min_lo + eps:
            return Verdict.FALSE
        return Verdict.INCONCLUSIVE
    raise ValueError(cmp)


def synthesize_witness(m, query, analyses, tolerance=ZERO) -> Dict[str, object]:
    """Assemble the witness assignment from the per-combination analyses:
    maximizing schedulers for the one-sided comparisons, the separating side
    for disequality, and an exact convex combination of the minimizing and
    maximizing assignments for approximate equality."""
    pred = query.predicates[0]
    md_ok = _md_case(query, m) and tolerance == 0 and pred.comparison != APPROX

    def direction_assignment(direction: str) -> Dict[str, object]:
        if md_ok:
            md = _md_assignment(m, query, analyses, direction)
            if md is not None:
                return md
        return _assignment(m, query, analyses, direction)

    att_max = sum((an.maximum.attained for an in analyses), ZERO)
    q, eps = pred.bound, pred.epsilon

    if pred.comparison in (GT, GE):
        ok = att_max > q if pred.comparison == GT else att_max >= q
        if not ok:
            raise NoWitnessAvailable("maximizing schedulers do not certify the bound")
        return direction_assignment("max")

    att_min = sum((an.minimum.attained for an in analyses), ZERO)
    if pred.comparison == NAPPROX:
        if q < att_max - eps:
            return direction_assignment("max")
        if q > att_min + eps:
            return direction_assignment("min")
        raise NoWitnessAvailable("attained values do not separate from the bound")

    # approximate equality
    if att_min - eps <= q <= att_min:
        return direction_assignment("min")
    if att_max <= q <= att_max + eps:
        return direction_assignment("max")
    if not (att_min < q < att_max):
        raise NoWitnessAvailable("attained values do not bracket the bound")
    lam = (att_max - q) / (att_max - att_min)  # q = lam*min + (1-lam)*max
    lo = _assignment(m, query, analyses, "min")
    hi = _assignment(m, query, analyses, "max")
    combined = {}
    for name in lo:
        inits = {
            an.combo.initial_state for an in analyses
            if query.scheduler_name(an.combo.scheduler) == name
        }
        combined[name] = convex_combine(lo[name], hi[name], lam, m, inits)
    return combined
