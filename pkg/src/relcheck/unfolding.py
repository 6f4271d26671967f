"""Goal unfolding, per-combination and per-predicate reward structures,
combined MDP and its pre-processing with stay-committed sinks.

Unfolded states are pairs (original state, visited) where `visited` is the
set of relevant target sets hit by the states already left behind; the
membership of the *source* state accumulates into the successor's
component, so a target pays its first-visit reward at the state that enters
it. Unfoldings are explored forward from the entry states only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Hashable, Iterable, List, Sequence, Tuple

from .core import Mdp, RewardStructure, ONE, ZERO
from .errors import InconsistentMecAnnotation, RelcheckError
from .graph import mec_decomposition
from .query import RelationalQuery

State = Hashable
TargetSet = FrozenSet[State]
Visited = FrozenSet[TargetSet]


@dataclass(frozen=True)
class Combination:
    """A distinct (initial state, scheduler variable) pair of a query,
    together with the operator positions it covers and their target sets."""

    initial_state: State
    scheduler: int
    indices: Tuple[Tuple[int, int], ...]  # (operator position i, predicate j)
    targets: FrozenSet[TargetSet]


def collect_combinations(query: RelationalQuery) -> List[Combination]:
    """The combinations of a query in deterministic order; operators with
    coefficient 0 contribute nothing."""
    seen: Dict[Tuple[State, int], List[Tuple[int, int]]] = {}
    order: List[Tuple[State, int]] = []
    for j, pred in enumerate(query.predicates):
        for i, op in enumerate(pred.operators):
            if op.coefficient == 0:
                continue
            key = (op.initial_state, op.scheduler)
            if key not in seen:
                seen[key] = []
                order.append(key)
            seen[key].append((i, j))
    combos = []
    for key in order:
        indices = tuple(seen[key])
        targets = frozenset(
            query.predicates[j].operators[i].target for i, j in indices
        )
        combos.append(Combination(key[0], key[1], indices, targets))
    return combos


@dataclass
class UnfoldedMdp:
    mdp: Mdp
    entries: Dict[State, Tuple[State, Visited]]  # requested state -> (s, {})
    targets: FrozenSet[TargetSet]

    @property
    def entry(self) -> Tuple[State, Visited]:
        if len(self.entries) != 1:
            raise RelcheckError("unfolding has several entries")
        return next(iter(self.entries.values()))

    def entry_of(self, s: State) -> Tuple[State, Visited]:
        return self.entries[s]

    def origin(self, state) -> State:
        return state[0]


def goal_unfold(m: Mdp, targets: Iterable[TargetSet], entry) -> UnfoldedMdp:
    """Reachable fragment of the goal unfolding w.r.t. `targets`, explored
    from one entry state or a collection of them."""
    targets = frozenset(frozenset(t) for t in targets)
    if not targets:
        raise RelcheckError("goal unfolding needs a non-empty target family")

    def membership(s: State) -> Visited:
        return frozenset(t for t in targets if s in t)

    try:
        is_single = entry in set(m.states)
    except TypeError:
        is_single = False
    entry_states = [entry] if is_single else list(entry)
    starts = {s: (s, frozenset()) for s in entry_states}
    transitions: Dict[Tuple[State, Visited], Dict] = {}
    frontier = list(starts.values())
    while frontier:
        node = frontier.pop()
        if node in transitions:
            continue
        s, visited = node
        new_visited = visited | membership(s)
        row = {}
        for a in m.enabled_actions(s):
            dist = {}
            for t, p in m.successors(s, a).items():
                succ = (t, new_visited)
                dist[succ] = dist.get(succ, ZERO) + p
            row[a] = dist
        transitions[node] = row
        for a, dist in row.items():
            frontier.extend(t for t in dist if t not in transitions)
    states = list(transitions)
    return UnfoldedMdp(Mdp(states, m.actions, transitions), starts, targets)


def first_visit_rewards(u: UnfoldedMdp, target: TargetSet) -> RewardStructure:
    """Pays 1 at (s, visited) iff s is in the target and the target is not
    yet in `visited` (i.e. on the first visit)."""
    return RewardStructure(
        {
            (s, visited): ONE
            for (s, visited) in u.mdp.states
            if s in target and target not in visited
        }
    )


def combination_rewards(
    u: UnfoldedMdp, combo: Combination, query: RelationalQuery
) -> RewardStructure:
    """Aggregated reward structure of a combination: each target pays the
    sum of the coefficients of the combination's operators aiming at it."""
    total = RewardStructure()
    for target in combo.targets:
        q_t = sum(
            (
                query.predicates[j].operators[i].coefficient
                for i, j in combo.indices
                if query.predicates[j].operators[i].target == target
            ),
            ZERO,
        )
        if q_t != 0:
            total = total + first_visit_rewards(u, target).scaled(q_t)
    return total


INIT = ("combined-init",)
EPSILON = ("epsilon",)


@dataclass
class CombinedMdp:
    mdp: Mdp
    combos: Tuple[Combination, ...]
    unfoldings: Tuple[UnfoldedMdp, ...]
    entries: Dict[Combination, Tuple]  # combo -> combined entry state

    @property
    def start(self):
        return INIT


def build_combined(units: Sequence[Tuple[Combination, UnfoldedMdp]]) -> CombinedMdp:
    """Disjoint union of per-combination unfoldings behind a fresh initial
    state branching uniformly to each copy's entry."""
    if not units:
        raise RelcheckError("combined MDP needs at least one combination")
    share = Fraction(1, len(units))
    transitions: Dict = {INIT: {EPSILON: {}}}
    actions = set()
    entries = {}
    for idx, (combo, u) in enumerate(units):
        entry = (u.entry, idx)
        entries[combo] = entry
        transitions[INIT][EPSILON][entry] = share
        for s in u.mdp.states:
            row = {}
            for a in u.mdp.enabled_actions(s):
                row[a] = {
                    (t, idx): p for t, p in u.mdp.successors(s, a).items()
                }
                actions.add(a)
            transitions[(s, idx)] = row
    states = [INIT] + [s for s in transitions if s != INIT]
    all_actions = [EPSILON] + sorted(actions, key=str)
    return CombinedMdp(
        Mdp(states, all_actions, transitions),
        tuple(c for c, _ in units),
        tuple(u for _, u in units),
        entries,
    )


def predicate_rewards(cm: CombinedMdp, query: RelationalQuery, j: int) -> RewardStructure:
    """Reward structure of predicate `j` on the combined MDP, scaled by the
    number of combinations to cancel the uniform initial branch."""
    scale = Fraction(len(cm.combos))
    rewards: Dict = {}
    pred = query.predicates[j]
    for idx, (combo, u) in enumerate(zip(cm.combos, cm.unfoldings)):
        positions = [i for i, jj in combo.indices if jj == j]
        if not positions:
            continue
        for target in combo.targets:
            q_t = sum(
                (
                    pred.operators[i].coefficient
                    for i in positions
                    if pred.operators[i].target == target
                ),
                ZERO,
            )
            if q_t == 0:
                continue
            for (s, visited) in u.mdp.states:
                if s in target and target not in visited:
                    key = ((s, visited), idx)
                    rewards[key] = rewards.get(key, ZERO) + scale * q_t
    return RewardStructure({k: v for k, v in rewards.items() if v != 0})


DAGGER = ("dagger",)


def _sink_id(visited: Visited):
    return ("moa-sink", tuple(sorted(tuple(sorted(map(str, t))) for t in visited)))


@dataclass
class ProcessedMdp:
    mdp: Mdp
    sinks: Dict[Visited, Tuple]
    sink_states: FrozenSet
    mec_states: FrozenSet  # combined states that received a dagger edge
    mec_actions: Dict[Tuple, FrozenSet]  # per MEC state: its in-MEC actions


def preprocess_combined(cm: CombinedMdp) -> ProcessedMdp:
    """Add one absorbing sink per realized visited-set and a fresh action
    from every MEC state to the sink of its (constant) visited-set, so each
    witness commits to staying inside an end component."""
    base = cm.mdp
    mec_states = set()
    sink_of: Dict[Tuple, Visited] = {}
    mec_actions: Dict[Tuple, FrozenSet] = {}
    for mec in mec_decomposition(base):
        visiteds = set()
        for st in mec.states:
            if st == INIT:
                raise InconsistentMecAnnotation("initial state inside a MEC")
            (orig, visited), idx = st
            visiteds.add(visited)
        if len(visiteds) != 1:
            raise InconsistentMecAnnotation(
                f"MEC spans visited-sets {sorted(map(str, visiteds))}"
            )
        v = next(iter(visiteds))
        for st in mec.states:
            sink_of[st] = v
            mec_states.add(st)
            mec_actions[st] = mec.action_of(st)

    sinks: Dict[Visited, Tuple] = {}
    transitions = {
        s: {a: dict(base.successors(s, a)) for a in base.enabled_actions(s)}
        for s in base.states
    }
    for st in sorted(mec_states, key=str):
        v = sink_of[st]
        if v not in sinks:
            sinks[v] = _sink_id(v)
            transitions[sinks[v]] = {DAGGER: {sinks[v]: ONE}}
        transitions[st][DAGGER] = {sinks[v]: ONE}

    states = list(base.states) + [sinks[v] for v in sorted(sinks, key=str)]
    actions = list(base.actions) + [DAGGER]
    return ProcessedMdp(
        Mdp(states, actions, transitions),
        sinks,
        frozenset(sinks.values()),
        frozenset(mec_states),
        mec_actions,
    )
