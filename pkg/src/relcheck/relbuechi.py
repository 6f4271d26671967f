"""Decision procedure for relational Buchi queries.

Each state-scheduler combination is reduced to a reachability analysis on
the target-aware MEC quotient built for that combination: a collapsed MEC
can commit, via a fresh action, to a sink representing "stay here forever
and visit exactly this subfamily of targets infinitely often"; the success
set of a target collects the sinks whose subfamily contains it. Since all
sinks are absorbing, the downstream reachability analysis is linear in the
quotient size.

Witnesses found on a quotient transfer back to the original MDP: outside
MECs the scheduler is copied; a MEC that commits to a sink switches to a
memoryless tour of a sub-EC realizing the subfamily, and a MEC that exits
steers to the chosen exit state first.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
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
    RelcheckError,
)
from .graph import (
    Mec,
    QuotientMdp,
    mec_quotient,
    md_tour_within,
    reach_policy_within,
    reach_set_policy_within,
    stay_policy_within,
    _sub_mec_decomposition,
)
from .query import APPROX, GE, GT, NAPPROX, RelationalQuery
from .relreach import CheckResult, Verdict, _decide, detect_fast_path
from .rewards import max_expected_reward, min_expected_reward
from .unfolding import (
    Combination,
    collect_combinations,
    first_visit_rewards,
    goal_unfold,
)

__all__ = ["solve_relbuechi", "transfer_md_witness"]


class NotMemorylessDeterministic(RelcheckError):
    pass


def transfer_md_witness(quotient: QuotientMdp, sched, m: Mdp) -> MDScheduler:
    """Transfer an MD scheduler from the MEC quotient back to the MDP while
    preserving all Buchi probabilities of the query's targets.

    Raises `NoWitnessAvailable` when a committed subfamily admits no
    memoryless deterministic tour inside the realizing sub-EC (a tour
    visiting several disjoint targets infinitely often may genuinely need
    randomization or memory).
    """
    if not isinstance(sched, MDScheduler):
        raise NotMemorylessDeterministic(str(type(sched)))
    choices: Dict = {}
    for s in m.states:
        if quotient.state_map[s] == s and s in sched.choices:
            choices[s] = sched.choices[s]
    for i, mec in enumerate(quotient.mecs):
        sid = quotient.mec_state[i]
        if sid not in sched.choices:
            # unreachable under the scheduler; stay put
            choices.update(stay_policy_within(mec))
            continue
        action = sched.choices[sid]
        if action in quotient.eps_family:
            family = quotient.eps_family[action]
            sub = None
            for full in quotient.families:
                if family <= full:
                    sub = _find_sub_ec_excluding(m, mec, family, full - family)
                    if sub is not None:
                        break
            if sub is None:
                raise NoWitnessAvailable(
                    f"no sub-EC realizes a family of size {len(family)}"
                )
            tour = md_tour_within(m, sub, family)
            if tour is None:
                raise NoWitnessAvailable(
                    "no memoryless deterministic tour visits every target"
                )
            choices.update(stay_policy_within(mec))
            choices.update(reach_set_policy_within(m, mec, set(sub.states)))
            choices.update(tour)
        else:
            _, exit_state, exit_action = action  # ("out", s, a)
            choices.update(reach_policy_within(m, mec, exit_state))
            choices[exit_state] = exit_action
    for s in m.states:
        if s not in choices:
            choices[s] = m.enabled_actions(s)[0]
    return MDScheduler(choices)


def _find_sub_ec_excluding(m: Mdp, mec: Mec, family, excluded_targets) -> Optional[Mec]:
    """A sub-EC of `mec` intersecting every family target while avoiding the
    excluded ones; exists whenever the quotient attached the family's sink."""
    excluded = set()
    for t in excluded_targets:
        if frozenset(t) not in {frozenset(f) for f in family}:
            excluded |= set(t)
    remaining = set(mec.states) - excluded
    if not remaining:
        return None
    allowed = {s: set(mec.action_of(s)) for s in remaining}
    for sub in _sub_mec_decomposition(m, remaining, allowed):
        if all(set(t) & set(sub.states) for t in family):
            return sub
    return None


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------


@dataclass
class _Direction:
    bounds_lower: Fraction
    bounds_upper: Fraction
    quotient_witness: MDScheduler
    attained: Fraction


@dataclass
class _BuechiAnalysis:
    combo: Combination
    quotient: QuotientMdp
    maximum: _Direction
    minimum: Optional[_Direction] = None


def _md_on_quotient(quotient_mdp: Mdp, unfolding, policy: MDScheduler) -> MDScheduler:
    """Project an MD policy of the quotient's goal unfolding onto the
    quotient itself (the unfolding targets are absorbing sinks, so only the
    nothing-visited layer matters)."""
    choices = {}
    for (s, visited) in unfolding.mdp.states:
        if visited == frozenset() and (s, visited) in policy.choices:
            choices[s] = policy.choices[(s, visited)]
    for s in quotient_mdp.states:
        if s not in choices:
            choices[s] = quotient_mdp.enabled_actions(s)[0]
    return MDScheduler(choices)


def _weighted_reach_on_quotient(quotient: QuotientMdp, combo, query, sched) -> Fraction:
    from .chains import scheduler_reach_probability

    total = ZERO
    entry = quotient.state_map[combo.initial_state]
    for i, j in combo.indices:
        op = query.predicates[j].operators[i]
        targets = set(quotient.success_sets.get(op.target, frozenset()))
        total += op.coefficient * scheduler_reach_probability(
            quotient.mdp, sched, entry, targets
        )
    return total


def _analyze_combo(m, query, combo, tolerance, need_min) -> _BuechiAnalysis:
    quotient = mec_quotient(m, [combo.targets])
    entry = quotient.state_map[combo.initial_state]
    fam = frozenset(
        quotient.success_sets.get(t, frozenset()) for t in combo.targets
    )
    u = goal_unfold(quotient.mdp, fam, entry)
    rewards = None
    from .core import RewardStructure

    rewards = RewardStructure()
    for i, j in combo.indices:
        op = query.predicates[j].operators[i]
        succ = frozenset(quotient.success_sets.get(op.target, frozenset()))
        if op.coefficient != 0:
            rewards = rewards + first_visit_rewards(u, succ).scaled(op.coefficient)

    entry_u = u.entry_of(entry)
    bmax, wmax = max_expected_reward(u.mdp, rewards, entry_u, tolerance)
    md_max = _md_on_quotient(quotient.mdp, u, wmax)
    att_max = _weighted_reach_on_quotient(quotient, combo, query, md_max)
    maximum = _Direction(bmax.lower, bmax.upper, md_max, att_max)
    minimum = None
    if need_min:
        bmin, wmin = min_expected_reward(u.mdp, rewards, entry_u, tolerance)
        md_min = _md_on_quotient(quotient.mdp, u, wmin)
        att_min = _weighted_reach_on_quotient(quotient, combo, query, md_min)
        minimum = _Direction(bmin.lower, bmin.upper, md_min, att_min)
    return _BuechiAnalysis(combo, quotient, maximum, minimum)


def _variable_witness(m, group: List[Tuple[Combination, MDScheduler, QuotientMdp]]):
    """Build the witness for one scheduler variable from per-combination
    transferred MD schedulers: plain MD for a single combination, otherwise
    an explicit-memory scheduler whose initial mode remembers the
    combination (i.e. the initial state)."""
    transferred = []
    for combo, quotient_sched, quotient in group:
        transferred.append((combo, transfer_md_witness(quotient, quotient_sched, m)))
    if len(transferred) == 1:
        return transferred[0][1]
    modes = []
    init = {}
    act = {}
    for cid, (combo, md) in enumerate(transferred):
        mode = ("combo", cid)
        modes.append(mode)
        init[combo.initial_state] = {mode: ONE}
        for s, a in md.choices.items():
            act[(mode, s)] = {a: ONE}
    return ExplicitMemoryScheduler(modes, init, {}, act)


def solve_relbuechi(
    m: Mdp, query: RelationalQuery, tolerance: Fraction = ZERO, want_witness: bool = True
) -> CheckResult:
    """Decide a single-predicate Buchi query via per-combination reduction
    to reachability of success-set sinks on the target-aware MEC quotient."""
    if len(query.predicates) != 1:
        raise MultiPredicate("conjunctive Buchi queries are not supported")
    if not query.is_buechi_only():
        raise MixedTemporalOperators("solve_relbuechi expects infinitely-often operators")
    tolerance = Fraction(tolerance)

    if query.universal:
        negated = RelationalQuery(
            (query.predicates[0].negated(),),
            query.scheduler_count,
            universal=False,
            scheduler_names=query.scheduler_names,
        )
        sub = solve_relbuechi(m, negated, tolerance, want_witness)
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
    if not combos:
        verdict = _decide(pred, ZERO, ZERO, ZERO, ZERO, tolerance)
        return CheckResult(verdict, fast, (ZERO, ZERO), (ZERO, ZERO), {} if verdict is Verdict.TRUE else None)

    need_min = pred.comparison in (APPROX, NAPPROX)
    split = tolerance / len(combos) if tolerance > 0 and len(combos) > 1 else tolerance
    analyses = [_analyze_combo(m, query, c, split, need_min) for c in combos]

    max_lo = sum((an.maximum.bounds_lower for an in analyses), ZERO)
    max_hi = sum((an.maximum.bounds_upper for an in analyses), ZERO)
    min_lo = min_hi = None
    if need_min:
        min_lo = sum((an.minimum.bounds_lower for an in analyses), ZERO)
        min_hi = sum((an.minimum.bounds_upper for an in analyses), ZERO)

    verdict = _decide(pred, max_lo, max_hi, min_lo, min_hi, tolerance)
    result = CheckResult(
        verdict,
        fast,
        (max_lo, max_hi),
        (min_lo, min_hi) if need_min else None,
    )
    if verdict is Verdict.TRUE and want_witness:
        try:
            result.witnesses = _synthesize(m, query, analyses)
        except NoWitnessAvailable as exc:
            result.note = f"witness stays on the MEC quotient: {exc}"
            result.witnesses = None
            result.quotient_witnesses = {
                query.scheduler_name(an.combo.scheduler): an.maximum.quotient_witness
                for an in analyses
            }
    return result


def _groups(analyses):
    groups: Dict[int, List[_BuechiAnalysis]] = {}
    for an in analyses:
        groups.setdefault(an.combo.scheduler, []).append(an)
    return groups


def _direction_assignment(m, query, analyses, direction):
    assignment = {}
    for k, group in sorted(_groups(analyses).items()):
        parts = []
        for an in group:
            d = an.maximum if direction == "max" else an.minimum
            parts.append((an.combo, d.quotient_witness, an.quotient))
        assignment[query.scheduler_name(k)] = _variable_witness(m, parts)
    return assignment


def _synthesize(m, query, analyses):
    pred = query.predicates[0]
    q, eps = pred.bound, pred.epsilon
    att_max = sum((an.maximum.attained for an in analyses), ZERO)
    if pred.comparison in (GT, GE):
        ok = att_max > q if pred.comparison == GT else att_max >= q
        if not ok:
            raise NoWitnessAvailable("maximizing schedulers do not certify the bound")
        return _direction_assignment(m, query, analyses, "max")
    att_min = sum((an.minimum.attained for an in analyses), ZERO)
    if pred.comparison == NAPPROX:
        if q < att_max - eps:
            return _direction_assignment(m, query, analyses, "max")
        if q > att_min + eps:
            return _direction_assignment(m, query, analyses, "min")
        raise NoWitnessAvailable("attained values do not separate from the bound")
    # approximate equality
    if att_min - eps <= q <= att_min:
        return _direction_assignment(m, query, analyses, "min")
    if att_max <= q <= att_max + eps:
        return _direction_assignment(m, query, analyses, "max")
    if not (att_min < q < att_max):
        raise NoWitnessAvailable("attained values do not bracket the bound")
    lam = (att_max - q) / (att_max - att_min)
    lo = _direction_assignment(m, query, analyses, "min")
    hi = _direction_assignment(m, query, analyses, "max")
    combined = {}
    for name in lo:
        inits = {
            an.combo.initial_state
            for an in analyses
            if query.scheduler_name(an.combo.scheduler) == name
        }
        combined[name] = convex_combine(lo[name], hi[name], lam, m, inits)
    return combined
