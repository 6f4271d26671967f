"""Optimal expected total reward with mixed-sign state rewards.

Works on MDPs whose reward structure vanishes inside end components (the
goal unfoldings produced by this package always satisfy that). The MDP is
first collapsed to its single-sink MEC quotient, on which every scheduler
reaches the sink almost surely, so the Bellman equations have a unique
solution.

Two engines share that quotient:

* exact (`tolerance == 0`): policy iteration over rationals; each policy
  evaluation is one sparse rational linear solve, and termination follows
  from the finiteness of memoryless deterministic policies.
* approximate (`tolerance > 0`): interval iteration from a-priori safe
  bounds; lower and upper iterates are kept sound by rounding outward to
  dyadic rationals, and the returned lower bound is tightened to the exact
  value of the greedy policy, which is also the returned witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, Tuple

from .chains import expected_total_reward, product_chain
from .core import (
    ExplicitMemoryScheduler,
    MDScheduler,
    Mdp,
    RewardStructure,
    induce_dtmc,
    ONE,
    ZERO,
)
from .errors import DivergentReward, UnknownState
from .graph import (
    BOTTOM,
    STAY,
    reach_policy_within,
    reward_quotient,
    stay_policy_within,
)
from .linalg import solve_sparse

State = Hashable
Action = Hashable


@dataclass(frozen=True)
class RewardBounds:
    """Bracket for an optimal expected reward; lower == upper in exact mode."""

    lower: Fraction
    upper: Fraction
    mode: str  # "exact" | "approx"
    tolerance: Fraction

    def point(self) -> Fraction:
        if self.lower != self.upper:
            raise ValueError("bounds are not a point value")
        return self.lower


def _action_key(a) -> str:
    return str(a)


def _evaluate_policy(q: Mdp, rewards: RewardStructure, policy: Dict[State, Action]) -> Dict[State, Fraction]:
    equations = []
    for s in q.states:
        if s == BOTTOM:
            continue
        coeffs = {s: ONE}
        for t, p in q.successors(s, policy[s]).items():
            if t == BOTTOM:
                continue
            coeffs[t] = coeffs.get(t, ZERO) - p
        equations.append((coeffs, rewards.get(s)))
    values = solve_sparse(equations)
    values[BOTTOM] = ZERO
    return values


def _greedy_policy(q: Mdp, rewards: RewardStructure, values: Dict[State, Fraction]) -> Dict[State, Action]:
    policy = {}
    for s in q.states:
        if s == BOTTOM:
            policy[s] = STAY
            continue
        best_a = None
        best_v = None
        for a in q.enabled_actions(s):
            v = rewards.get(s) + sum(
                (p * values[t] for t, p in q.successors(s, a).items()), ZERO
            )
            if best_v is None or v > best_v or (v == best_v and _action_key(a) < _action_key(best_a)):
                best_a, best_v = a, v
        policy[s] = best_a
    return policy


def _policy_iteration(q: Mdp, rewards: RewardStructure) -> Tuple[Dict[State, Fraction], Dict[State, Action]]:
    policy = {
        s: (STAY if s == BOTTOM else q.enabled_actions(s)[0]) for s in q.states
    }
    while True:
        values = _evaluate_policy(q, rewards, policy)
        improved = False
        for s in q.states:
            if s == BOTTOM:
                continue
            current = rewards.get(s) + sum(
                (p * values[t] for t, p in q.successors(s, policy[s]).items()), ZERO
            )
            best_a, best_v = policy[s], current
            for a in q.enabled_actions(s):
                v = rewards.get(s) + sum(
                    (p * values[t] for t, p in q.successors(s, a).items()), ZERO
                )
                if v > best_v:
                    best_a, best_v = a, v
            if best_v > current:
                policy[s] = best_a
                improved = True
        if not improved:
            # Deterministic final witness: greedy with lowest-action-id ties.
            return values, _greedy_policy(q, rewards, values)


def _apriori_bound(q: Mdp, rewards: RewardStructure) -> Fraction:
    """|v*| <= n/p * max|R| where p is the minimum probability (over states
    and schedulers) of hitting the sink within n steps; p > 0 because the
    quotient has no end components besides the sink."""
    non_sink = [s for s in q.states if s != BOTTOM]
    n = len(non_sink)
    w = {s: (ONE if s == BOTTOM else ZERO) for s in q.states}
    for _ in range(n):
        w_new = {}
        for s in q.states:
            if s == BOTTOM:
                w_new[s] = ONE
                continue
            w_new[s] = min(
                sum((p * w[t] for t, p in q.successors(s, a).items()), ZERO)
                for a in q.enabled_actions(s)
            )
        w = w_new
    p_min = min((w[s] for s in non_sink), default=ONE)
    if p_min <= 0:
        raise DivergentReward("quotient has an end component besides the sink")
    max_r = max((abs(rewards.get(s)) for s in non_sink), default=ZERO)
    return Fraction(n, 1) / p_min * max_r


def _round_down(x: Fraction, prec: int) -> Fraction:
    scale = 1 << prec
    return Fraction((x * scale).__floor__(), scale)


def _round_up(x: Fraction, prec: int) -> Fraction:
    scale = 1 << prec
    num = x * scale
    fl = num.__floor__()
    return Fraction(fl if fl == num else fl + 1, scale)


def _bellman(q: Mdp, rewards: RewardStructure, values: Dict[State, Fraction]) -> Dict[State, Fraction]:
    out = {BOTTOM: ZERO}
    for s in q.states:
        if s == BOTTOM:
            continue
        out[s] = rewards.get(s) + max(
            sum((p * values[t] for t, p in q.successors(s, a).items()), ZERO)
            for a in q.enabled_actions(s)
        )
    return out


def _interval_iteration(
    q: Mdp, rewards: RewardStructure, start: State, tolerance: Fraction
) -> Tuple[Fraction, Fraction, Dict[State, Action]]:
    bound = _apriori_bound(q, rewards)
    lower = {s: (ZERO if s == BOTTOM else -bound) for s in q.states}
    upper = {s: (ZERO if s == BOTTOM else bound) for s in q.states}
    prec = 40
    last_gap = upper[start] - lower[start]
    stalled = 0
    while True:
        while upper[start] - lower[start] > tolerance:
            lower = {s: _round_down(v, prec) for s, v in _bellman(q, rewards, lower).items()}
            upper = {s: _round_up(v, prec) for s, v in _bellman(q, rewards, upper).items()}
            lower[BOTTOM] = upper[BOTTOM] = ZERO
            gap = upper[start] - lower[start]
            if gap >= last_gap:
                stalled += 1
                if stalled >= 20:
                    prec *= 2
                    stalled = 0
            else:
                stalled = 0
            last_gap = gap
        # The witness must achieve the reported lower bound; once the gap is
        # small enough the greedy policy w.r.t. the lower iterate is optimal,
        # so this loop terminates.
        policy = _greedy_policy(q, rewards, lower)
        exact = _evaluate_policy(q, rewards, policy)
        if exact[start] >= lower[start]:
            return exact[start], upper[start], policy
        lower = {s: _round_down(v, prec) for s, v in _bellman(q, rewards, lower).items()}
        upper = {s: _round_up(v, prec) for s, v in _bellman(q, rewards, upper).items()}
        lower[BOTTOM] = upper[BOTTOM] = ZERO


def max_expected_reward(
    m: Mdp,
    rewards: RewardStructure,
    start: State,
    tolerance: Fraction = ZERO,
) -> Tuple[RewardBounds, MDScheduler]:
    """Bracket max_sigma E_start(rewards) and return an achieving MD scheduler.

    Exact mode (`tolerance == 0`) returns a point value; approximate mode
    returns sound bounds no wider than the tolerance. The reward structure
    must vanish inside all end components.
    """
    if start not in set(m.states):
        raise UnknownState(repr(start))
    tolerance = Fraction(tolerance)
    quotient = reward_quotient(m, rewards)
    q = quotient.mdp
    q_start = quotient.collapse(start)

    if tolerance == 0:
        values, policy = _policy_iteration(q, quotient.rewards)
        lo = hi = values[q_start]
        mode = "exact"
    else:
        lo, hi, policy = _interval_iteration(q, quotient.rewards, q_start, tolerance)
        mode = "approx"

    choices: Dict[State, Action] = {}
    for s in m.states:
        if quotient.collapse(s) == s:
            choices[s] = policy[s]
    for i, mec in enumerate(quotient.mecs):
        choice = policy[quotient.mec_state[i]]
        if choice == STAY:
            choices.update(stay_policy_within(mec))
        else:
            _, exit_state, exit_action = choice
            choices.update(reach_policy_within(m, mec, exit_state))
            choices[exit_state] = exit_action
    witness = MDScheduler(choices)
    return RewardBounds(lo, hi, mode, tolerance), witness


def min_expected_reward(
    m: Mdp,
    rewards: RewardStructure,
    start: State,
    tolerance: Fraction = ZERO,
) -> Tuple[RewardBounds, MDScheduler]:
    """min_sigma E(R) = -max_sigma E(-R), bounds and witness accordingly."""
    bounds, witness = max_expected_reward(m, rewards.negated(), start, tolerance)
    return (
        RewardBounds(-bounds.upper, -bounds.lower, bounds.mode, bounds.tolerance),
        witness,
    )


def expected_reward_of(m: Mdp, rewards: RewardStructure, sched, start: State) -> Fraction:
    """Exact expected total reward of a concrete scheduler (any kind)."""
    if isinstance(sched, ExplicitMemoryScheduler):
        chain, init = product_chain(m, sched, start)
        lifted = RewardStructure(
            {ps: rewards.get(ps[1]) for ps in chain.states if rewards.get(ps[1]) != 0}
        )
        return expected_total_reward(chain, init, lifted)
    chain = induce_dtmc(m, sched)
    return expected_total_reward(chain, start, rewards)
