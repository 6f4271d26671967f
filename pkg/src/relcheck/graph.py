"""End-component machinery.

Maximal end component (MEC) decomposition by iterative SCC pruning, the
family membership test used for Buchi analysis, the target-aware MEC
quotient with per-family sinks and success sets, and the single-sink
quotient that turns expected total reward into an expected reachability
reward with a unique Bellman solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Hashable, Iterable, List, Mapping, Set, Tuple

from .chains import strongly_connected_components
from .core import Mdp, RewardStructure, ONE, ZERO
from .errors import NonzeroRewardInEC

State = Hashable
Action = Hashable

BOTTOM = ("bottom",)  # the absorbing state of the single-sink reward quotient
STAY = ("stay",)  # its fresh action


@dataclass(frozen=True)
class Mec:
    """A maximal end component: closed and strongly connected sub-MDP."""

    states: FrozenSet[State]
    actions: Mapping[State, FrozenSet[Action]]

    def action_of(self, s: State) -> FrozenSet[Action]:
        return self.actions.get(s, frozenset())


def _sub_mec_decomposition(
    m: Mdp, states: Set[State], allowed: Dict[State, Set[Action]]
) -> List[Mec]:
    """MECs of the sub-MDP spanned by `states` with per-state `allowed`
    actions (standard iterative SCC pruning)."""
    states = set(states)
    allowed = {s: set(a) for s, a in allowed.items() if s in states}
    while True:
        # Drop actions leaving the current state set, then empty states.
        changed = True
        while changed:
            changed = False
            for s in list(states):
                acts = allowed.get(s, set())
                keep = {
                    a for a in acts if all(t in states for t in m.successors(s, a))
                }
                if keep != acts:
                    allowed[s] = keep
                    changed = True
                if not allowed.get(s):
                    states.discard(s)
                    allowed.pop(s, None)
                    changed = True
        if not states:
            return []
        adj = {
            s: [t for a in allowed[s] for t in m.successors(s, a)] for s in states
        }
        sccs = strongly_connected_components(adj)
        if len(sccs) == 1:
            # a single SCC that survived pruning is closed and strongly
            # connected, i.e. a MEC of the sub-MDP
            return [
                Mec(frozenset(states), {s: frozenset(allowed[s]) for s in states})
            ]
        result: List[Mec] = []
        for comp in sccs:
            comp_set = set(comp)
            result.extend(
                _sub_mec_decomposition(
                    m, comp_set, {s: allowed.get(s, set()) for s in comp_set}
                )
            )
        return result


def mec_decomposition(m: Mdp) -> List[Mec]:
    """The unique set of maximal end components (pairwise state-disjoint)."""
    allowed = {s: set(m.enabled_actions(s)) for s in m.states}
    mecs = _sub_mec_decomposition(m, set(m.states), allowed)
    order = {s: i for i, s in enumerate(m.states)}
    mecs.sort(key=lambda c: min(order[s] for s in c.states))
    return mecs


def mec_in_family(
    m: Mdp,
    mec: Mec,
    family: Iterable[FrozenSet[State]],
    all_targets: Iterable[FrozenSet[State]],
) -> bool:
    """Does `mec` contain a sub-EC visiting every target of `family` while
    avoiding all other targets of `all_targets`?

    Decided by deleting the states of the excluded targets from the MEC and
    testing whether a MEC of the remainder intersects every family member.
    """
    family = [frozenset(t) for t in family]
    excluded: Set[State] = set()
    for t in all_targets:
        ft = frozenset(t)
        if ft not in family:
            excluded |= ft
    remaining = set(mec.states) - excluded
    if not remaining:
        return not family and False
    for t in family:
        if not (t & set(mec.states)):
            return False
    allowed = {s: set(mec.action_of(s)) for s in remaining}
    for sub in _sub_mec_decomposition(m, remaining, allowed):
        if all(sub.states & t for t in family):
            return True
    return False


@dataclass
class QuotientMdp:
    """MEC quotient with one absorbing sink per realizable target family."""

    mdp: Mdp
    state_map: Dict[State, State]  # f: original -> collapsed
    mecs: List[Mec]
    mec_state: Dict[int, State]  # MEC index -> collapsed state id
    sinks: Dict[FrozenSet[FrozenSet[State]], State]  # family -> sink state
    success_sets: Dict[FrozenSet[State], FrozenSet[State]]  # target -> sinks
    sink_states: FrozenSet[State]
    eps_family: Dict[Action, FrozenSet[FrozenSet[State]]]  # eps action -> family
    families: Tuple[FrozenSet[FrozenSet[State]], ...] = ()  # input target families

    def collapse(self, s: State) -> State:
        return self.state_map[s]


def _family_key(family: Iterable[FrozenSet[State]]) -> FrozenSet[FrozenSet[State]]:
    return frozenset(frozenset(t) for t in family)


def _canonical_family_name(family: FrozenSet[FrozenSet[State]]) -> Tuple:
    return tuple(sorted(tuple(sorted(map(str, t))) for t in family))


def mec_quotient(
    m: Mdp, families: Iterable[Iterable[FrozenSet[State]]]
) -> QuotientMdp:
    """Collapse MECs and add a sink `bot^F` reachable from a collapsed MEC
    exactly when the MEC can realize visiting precisely the targets of the
    subfamily F infinitely often.

    `families` gives, per state-scheduler combination, the target sets that
    matter for it; sinks are introduced per subfamily of each family.
    """
    families = [tuple(frozenset(t) for t in fam) for fam in families]
    mecs = mec_decomposition(m)
    state_map: Dict[State, State] = {}
    mec_state: Dict[int, State] = {}
    for i, mec in enumerate(mecs):
        sid = ("mec", i)
        mec_state[i] = sid
        for s in mec.states:
            state_map[s] = sid
    for s in m.states:
        state_map.setdefault(s, s)

    # Which subfamilies are realizable in which MEC? Only subsets of the
    # targets actually intersecting the MEC need to be enumerated.
    realizable: Dict[FrozenSet[FrozenSet[State]], List[int]] = {}
    for fam in families:
        fam_key_all = _family_key(fam)
        for i, mec in enumerate(mecs):
            present = [t for t in fam_key_all if t & mec.states]
            subsets: List[FrozenSet[FrozenSet[State]]] = [frozenset()]
            for t in sorted(present, key=lambda x: tuple(sorted(map(str, x)))):
                subsets += [sub | {t} for sub in subsets]
            for sub in subsets:
                key = frozenset(sub)
                if key in realizable and i in realizable[key]:
                    continue
                if mec_in_family(m, mec, key, fam_key_all):
                    realizable.setdefault(key, [])
                    if i not in realizable[key]:
                        realizable[key].append(i)

    sinks: Dict[FrozenSet[FrozenSet[State]], State] = {}
    for key in sorted(realizable, key=_canonical_family_name):
        sinks[key] = ("sink", _canonical_family_name(key))

    transitions: Dict[State, Dict[Action, Dict[State, Fraction]]] = {}
    actions: List[Action] = list(m.actions)

    def collapsed_row(src: State, a: Action) -> Dict[State, Fraction]:
        row: Dict[State, Fraction] = {}
        for t, p in m.successors(src, a).items():
            key = state_map[t]
            row[key] = row.get(key, ZERO) + p
        return row

    for s in m.states:
        if state_map[s] == s:  # non-MEC state: keep actions as-is
            transitions[s] = {a: collapsed_row(s, a) for a in m.enabled_actions(s)}

    for i, mec in enumerate(mecs):
        sid = mec_state[i]
        row: Dict[Action, Dict[State, Fraction]] = {}
        for s in sorted(mec.states, key=str):
            inside = mec.action_of(s)
            for a in m.enabled_actions(s):
                if a in inside:
                    continue
                tagged = ("out", s, a)
                row[tagged] = collapsed_row(s, a)
                actions.append(tagged)
        transitions[sid] = row

    eps_family: Dict[Action, FrozenSet[FrozenSet[State]]] = {}
    for key, mec_ids in sorted(
        realizable.items(), key=lambda kv: _canonical_family_name(kv[0])
    ):
        sink = sinks[key]
        eps = ("eps", _canonical_family_name(key))
        eps_family[eps] = key
        actions.append(eps)
        transitions.setdefault(sink, {})[eps] = {sink: ONE}
        for i in mec_ids:
            transitions[mec_state[i]][eps] = {sink: ONE}

    states = [state_map[s] for s in m.states if state_map[s] == s]
    states += [mec_state[i] for i in range(len(mecs))]
    states += [sinks[k] for k in sorted(sinks, key=_canonical_family_name)]

    quotient = Mdp(states, actions, transitions)

    success: Dict[FrozenSet[State], FrozenSet[State]] = {}
    all_targets = {t for fam in families for t in fam}
    for t in all_targets:
        hit = set()
        for fam in families:
            fam_key = _family_key(fam)
            if t not in fam_key:
                continue
            for key, sink in sinks.items():
                if t in key and key <= fam_key:
                    hit.add(sink)
        success[t] = frozenset(hit)

    return QuotientMdp(
        mdp=quotient,
        state_map=state_map,
        mecs=mecs,
        mec_state=mec_state,
        sinks=sinks,
        success_sets=success,
        sink_states=frozenset(sinks.values()),
        eps_family=eps_family,
        families=tuple(_family_key(fam) for fam in families),
    )


@dataclass
class RewardQuotient:
    """Single-sink MEC quotient: every scheduler reaches `BOTTOM` a.s."""

    mdp: Mdp
    state_map: Dict[State, State]
    mecs: List[Mec]
    mec_state: Dict[int, State]
    rewards: RewardStructure

    def collapse(self, s: State) -> State:
        return self.state_map[s]


def reward_quotient(m: Mdp, rewards: RewardStructure) -> RewardQuotient:
    """Collapse MECs and route them into a fresh absorbing state.

    Requires the reward structure to vanish inside every end component
    (raises `NonzeroRewardInEC` otherwise); the resulting MDP has no end
    components besides the sink, so the sink is attracting under every
    scheduler and the Bellman equations have a unique solution.
    """
    mecs = mec_decomposition(m)
    for mec in mecs:
        for s in mec.states:
            if rewards.get(s) != 0:
                raise NonzeroRewardInEC(repr(s))

    state_map: Dict[State, State] = {}
    mec_state: Dict[int, State] = {}
    for i, mec in enumerate(mecs):
        sid = ("mec", i)
        mec_state[i] = sid
        for s in mec.states:
            state_map[s] = sid
    for s in m.states:
        state_map.setdefault(s, s)

    transitions: Dict[State, Dict[Action, Dict[State, Fraction]]] = {}
    actions: List[Action] = list(m.actions) + [STAY]

    def collapsed_row(src: State, a: Action) -> Dict[State, Fraction]:
        row: Dict[State, Fraction] = {}
        for t, p in m.successors(src, a).items():
            key = state_map[t]
            row[key] = row.get(key, ZERO) + p
        return row

    for s in m.states:
        if state_map[s] == s:
            transitions[s] = {a: collapsed_row(s, a) for a in m.enabled_actions(s)}
    for i, mec in enumerate(mecs):
        sid = mec_state[i]
        row: Dict[Action, Dict[State, Fraction]] = {STAY: {BOTTOM: ONE}}
        for s in sorted(mec.states, key=str):
            inside = mec.action_of(s)
            for a in m.enabled_actions(s):
                if a in inside:
                    continue
                tagged = ("out", s, a)
                row[tagged] = collapsed_row(s, a)
                actions.append(tagged)
        transitions[sid] = row
    transitions[BOTTOM] = {STAY: {BOTTOM: ONE}}

    states = [s for s in m.states if state_map[s] == s]
    states += [mec_state[i] for i in range(len(mecs))]
    states.append(BOTTOM)

    lifted = RewardStructure(
        {
            state_map[s]: r
            for s, r in rewards.rewards.items()
            if r != 0 and state_map[s] == s
        }
    )
    return RewardQuotient(Mdp(states, actions, transitions), state_map, mecs, mec_state, lifted)


def reach_policy_within(m: Mdp, mec: Mec, goal: State) -> Dict[State, Action]:
    """MD choices inside a MEC that reach `goal` with probability 1.

    Each state picks a MEC action with a successor strictly closer to the
    goal (distance in the some-successor graph); every bottom SCC of the
    induced chain then contains the goal.
    """
    dist = {goal: 0}
    frontier = [goal]
    while frontier:
        new_frontier = []
        for v in frontier:
            for u in mec.states:
                if u in dist:
                    continue
                for a in sorted(mec.action_of(u), key=str):
                    if v in m.successors(u, a):
                        dist[u] = dist[v] + 1
                        new_frontier.append(u)
                        break
        frontier = new_frontier
    choices: Dict[State, Action] = {}
    for u in mec.states:
        if u == goal:
            choices[u] = sorted(mec.action_of(u), key=str)[0]
            continue
        for a in sorted(mec.action_of(u), key=str):
            if any(dist.get(v, None) is not None and dist[v] < dist[u] for v in m.successors(u, a)):
                choices[u] = a
                break
    return choices


def stay_policy_within(mec: Mec) -> Dict[State, Action]:
    """MD choices that never leave the MEC (lowest action id per state)."""
    return {s: sorted(mec.action_of(s), key=str)[0] for s in mec.states}


def reach_set_policy_within(m: Mdp, mec: Mec, goals: Set[State]) -> Dict[State, Action]:
    """Like `reach_policy_within` but steering towards any state of `goals`."""
    goals = set(goals) & set(mec.states)
    dist = {g: 0 for g in goals}
    frontier = list(goals)
    while frontier:
        new_frontier = []
        for v in frontier:
            for u in mec.states:
                if u in dist:
                    continue
                for a in sorted(mec.action_of(u), key=str):
                    if v in m.successors(u, a):
                        dist[u] = dist[v] + 1
                        new_frontier.append(u)
                        break
        frontier = new_frontier
    choices: Dict[State, Action] = {}
    for u in mec.states:
        if u in goals:
            continue
        for a in sorted(mec.action_of(u), key=str):
            if any(v in dist and dist[v] < dist.get(u, 0) for v in m.successors(u, a)):
                choices[u] = a
                break
    return choices


def md_tour_within(m: Mdp, sub: Mec, targets, cap: int = 200000):
    """MD choices inside the sub-EC whose induced chain visits at least one
    state of every target infinitely often from everywhere (every bottom
    SCC intersects every target). Returns None if no such selection exists
    or the exhaustive search would exceed `cap`."""
    from itertools import product

    from .chains import bottom_sccs
    from .core import Dtmc

    targets = [frozenset(t) for t in targets]
    states = sorted(sub.states, key=str)
    if not targets:
        return stay_policy_within(sub)
    if len(targets) == 1:
        goal = sorted(targets[0] & sub.states, key=str)[0]
        choices = reach_policy_within(m, sub, goal)
        return choices
    options = [sorted(sub.action_of(s), key=str) for s in states]
    total = 1
    for opts in options:
        total *= len(opts)
        if total > cap:
            return None
    for selection in product(*options):
        choices = dict(zip(states, selection))
        chain = Dtmc(states, {s: dict(m.successors(s, choices[s])) for s in states})
        if all(
            all(set(comp) & t for t in targets) for comp in bottom_sccs(chain)
        ):
            return choices
    return None
