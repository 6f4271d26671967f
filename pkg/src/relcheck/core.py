"""Core MDP, DTMC and scheduler data model.

States and actions are arbitrary hashable ids (strings in user-facing
models, tuples in internal constructions). All probabilities are exact
`fractions.Fraction`; nothing in this package ever leaves rational
arithmetic except the optional approximate expected-reward mode.

Objects are immutable after construction and safe to share between
concurrent analyses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, Iterable, Mapping, Tuple

from .errors import (
    IncompatibleScheduler,
    LambdaOutOfRange,
    UnknownState,
    ValidationError,
)

State = Hashable
Action = Hashable

ONE = Fraction(1)
ZERO = Fraction(0)


def _freeze_dist(dist: Mapping) -> Dict:
    return {k: Fraction(v) for k, v in dist.items() if Fraction(v) != 0}


class Mdp:
    """Finite MDP with exact rational transition probabilities.

    `transitions[s][a]` maps successor states to probabilities. An action is
    enabled in `s` iff its row sums to exactly 1; rows summing to anything
    else but 0 are rejected by `validate_mdp`.
    """

    __slots__ = ("states", "actions", "transitions", "labels", "_enabled")

    def __init__(self, states, actions, transitions, labels=None):
        self.states: Tuple[State, ...] = tuple(states)
        self.actions: Tuple[Action, ...] = tuple(actions)
        trans: Dict[State, Dict[Action, Dict[State, Fraction]]] = {}
        for s, row in transitions.items():
            trans[s] = {a: _freeze_dist(d) for a, d in row.items() if d}
        self.transitions = trans
        lab: Dict[State, frozenset] = {}
        for s in self.states:
            lab[s] = frozenset((labels or {}).get(s, ()))
        self.labels = lab
        self._enabled: Dict[State, Tuple[Action, ...]] = {}
        state_set = set(self.states)
        order = {a: i for i, a in enumerate(self.actions)}
        for s in self.states:
            row = self.transitions.get(s, {})
            enabled = [
                a
                for a in sorted(row, key=lambda a: (order.get(a, len(order)), str(a)))
                if sum(row[a].values()) == ONE and all(t in state_set for t in row[a])
            ]
            self._enabled[s] = tuple(enabled)

    def enabled_actions(self, s: State) -> Tuple[Action, ...]:
        if s not in self._enabled:
            raise UnknownState(repr(s))
        return self._enabled[s]

    def successors(self, s: State, a: Action) -> Dict[State, Fraction]:
        return self.transitions.get(s, {}).get(a, {})

    def is_absorbing(self, s: State) -> bool:
        return all(
            self.successors(s, a).get(s, ZERO) == ONE for a in self.enabled_actions(s)
        )

    def states_with_label(self, proposition: str) -> frozenset:
        return frozenset(s for s in self.states if proposition in self.labels[s])

    def __repr__(self):
        return f"Mdp(|S|={len(self.states)}, |Act|={len(self.actions)})"


def validate_mdp(m: Mdp):
    """Return the list of invariant violations (empty list when valid)."""
    issues = []
    state_set = set(m.states)
    for s in m.states:
        row = m.transitions.get(s, {})
        enabled = 0
        for a, dist in row.items():
            total = sum(dist.values(), ZERO)
            for t, p in dist.items():
                if t not in state_set:
                    issues.append(f"UnknownSuccessor({s!r},{a!r},{t!r})")
                if not (0 <= p <= 1):
                    issues.append(f"OutOfRangeProbability({s!r},{a!r},{t!r},{p})")
            if total == ONE:
                enabled += 1
            elif total != ZERO:
                issues.append(f"PartialRow({s!r},{a!r},sum={total})")
        if enabled == 0:
            issues.append(f"EmptyActionSet({s!r})")
    return issues


def check_mdp(m: Mdp) -> Mdp:
    """Validate, raising `ValidationError` listing every violation."""
    issues = validate_mdp(m)
    if issues:
        raise ValidationError(issues)
    return m


@dataclass(frozen=True)
class RewardStructure:
    """State-indexed rational rewards, default 0 outside the domain."""

    rewards: Mapping[State, Fraction] = field(default_factory=dict)

    def get(self, s: State) -> Fraction:
        return self.rewards.get(s, ZERO)

    def negated(self) -> "RewardStructure":
        return RewardStructure({s: -r for s, r in self.rewards.items()})

    def nonzero_states(self):
        return [s for s, r in self.rewards.items() if r != 0]

    def __add__(self, other: "RewardStructure") -> "RewardStructure":
        merged = dict(self.rewards)
        for s, r in other.rewards.items():
            merged[s] = merged.get(s, ZERO) + r
        return RewardStructure({s: r for s, r in merged.items() if r != 0})

    def scaled(self, factor) -> "RewardStructure":
        f = Fraction(factor)
        return RewardStructure({s: f * r for s, r in self.rewards.items() if f * r != 0})


class Dtmc:
    """Discrete-time Markov chain; rows sum to 1 exactly."""

    __slots__ = ("states", "transitions", "labels")

    def __init__(self, states, transitions, labels=None):
        self.states: Tuple[State, ...] = tuple(states)
        self.transitions: Dict[State, Dict[State, Fraction]] = {
            s: _freeze_dist(row) for s, row in transitions.items()
        }
        self.labels = {s: frozenset((labels or {}).get(s, ())) for s in self.states}

    def row(self, s: State) -> Dict[State, Fraction]:
        return self.transitions.get(s, {})


# ---------------------------------------------------------------------------
# Schedulers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MDScheduler:
    """Memoryless deterministic scheduler: one action per state."""

    choices: Mapping[State, Action]

    kind = "md"

    def action_dist(self, s: State) -> Dict[Action, Fraction]:
        return {self.choices[s]: ONE}


@dataclass(frozen=True)
class MRScheduler:
    """Memoryless randomized scheduler: a distribution per state."""

    choices: Mapping[State, Mapping[Action, Fraction]]

    kind = "mr"

    def action_dist(self, s: State) -> Dict[Action, Fraction]:
        return dict(self.choices[s])


class ExplicitMemoryScheduler:
    """Finite-mode scheduler (modes, init, mode-update, action-choice).

    * ``init`` maps each relevant initial state to a distribution over
      modes (the representation is initial-state-aware; see README).
    * ``mode_update[(q, a, s')]`` is the mode distribution after taking
      action ``a`` and landing in ``s'`` in mode ``q``; missing entries
      mean "keep the current mode".
    * ``act[(q, s)]`` is the action distribution in state ``s`` and mode
      ``q``; missing entries mean "uniform over enabled actions", which is
      only ever exercised on value-irrelevant states.
    """

    kind = "explicit"

    def __init__(self, modes, init, mode_update, act):
        self.modes = tuple(modes)
        self.init: Dict[State, Dict] = {s: _freeze_dist(d) for s, d in init.items()}
        self.mode_update = {k: _freeze_dist(d) for k, d in mode_update.items()}
        self.act = {k: _freeze_dist(d) for k, d in act.items()}

    def init_dist(self, s: State) -> Dict:
        if s in self.init:
            return self.init[s]
        if len(self.init) == 1:
            return next(iter(self.init.values()))
        raise IncompatibleScheduler(f"no initial mode distribution for state {s!r}")

    def action_dist(self, mdp: Mdp, mode, s: State) -> Dict[Action, Fraction]:
        dist = self.act.get((mode, s))
        if dist:
            return dist
        enabled = mdp.enabled_actions(s)
        share = Fraction(1, len(enabled))
        return {a: share for a in enabled}

    def next_modes(self, mode, a: Action, target: State) -> Dict:
        return self.mode_update.get((mode, a, target), {mode: ONE})


Scheduler = object  # any of the three classes above


def _memoryless_dist(mdp: Mdp, sched, s: State) -> Dict[Action, Fraction]:
    if isinstance(sched, MDScheduler):
        if s not in sched.choices:
            raise IncompatibleScheduler(f"no choice for state {s!r}")
        a = sched.choices[s]
        if a not in mdp.enabled_actions(s):
            raise IncompatibleScheduler(f"action {a!r} not enabled in {s!r}")
        return {a: ONE}
    if isinstance(sched, MRScheduler):
        if s not in sched.choices:
            raise IncompatibleScheduler(f"no choice for state {s!r}")
        dist = _freeze_dist(sched.choices[s])
        if sum(dist.values(), ZERO) != ONE:
            raise IncompatibleScheduler(f"distribution at {s!r} does not sum to 1")
        enabled = set(mdp.enabled_actions(s))
        for a in dist:
            if a not in enabled:
                raise IncompatibleScheduler(f"action {a!r} not enabled in {s!r}")
        return dist
    raise IncompatibleScheduler(f"not a memoryless scheduler: {sched!r}")


def induce_dtmc(m: Mdp, sched) -> Dtmc:
    """Apply a memoryless (MD or MR) scheduler, yielding a DTMC."""
    transitions = {}
    for s in m.states:
        row: Dict[State, Fraction] = {}
        for a, w in _memoryless_dist(m, sched, s).items():
            for t, p in m.successors(s, a).items():
                row[t] = row.get(t, ZERO) + w * p
        transitions[s] = row
    return Dtmc(m.states, transitions, labels=dict(m.labels))


def as_explicit(sched, mdp: Mdp, init_states: Iterable[State]) -> ExplicitMemoryScheduler:
    """Wrap an MD/MR scheduler as a degenerate one-mode explicit scheduler."""
    if isinstance(sched, ExplicitMemoryScheduler):
        return sched
    mode = "m0"
    act = {}
    for s in mdp.states:
        try:
            act[(mode, s)] = _memoryless_dist(mdp, sched, s)
        except IncompatibleScheduler:
            continue
    init = {s: {mode: ONE} for s in init_states}
    return ExplicitMemoryScheduler([mode], init, {}, act)


def convex_combine(s1, s2, lam, mdp: Mdp, init_states: Iterable[State]) -> ExplicitMemoryScheduler:
    """Initial coin flip: behave like `s1` forever with probability `lam`,
    otherwise like `s2`. Induced values of weighted probability sums are the
    corresponding convex combinations."""
    lam = Fraction(lam)
    if not (0 <= lam <= 1):
        raise LambdaOutOfRange(str(lam))
    init_states = list(init_states)
    e1 = as_explicit(s1, mdp, init_states)
    e2 = as_explicit(s2, mdp, init_states)

    def tag(which, q):
        return (which, q)

    modes = [tag(0, q) for q in e1.modes] + [tag(1, q) for q in e2.modes]
    init: Dict[State, Dict] = {}
    for s in init_states:
        dist = {}
        if lam > 0:
            for q, p in e1.init_dist(s).items():
                dist[tag(0, q)] = dist.get(tag(0, q), ZERO) + lam * p
        if lam < 1:
            for q, p in e2.init_dist(s).items():
                dist[tag(1, q)] = dist.get(tag(1, q), ZERO) + (1 - lam) * p
        init[s] = dist
    mode_update = {}
    act = {}
    for which, base in ((0, e1), (1, e2)):
        for (q, a, t), d in base.mode_update.items():
            mode_update[(tag(which, q), a, t)] = {tag(which, q2): p for q2, p in d.items()}
        for (q, s), d in base.act.items():
            act[(tag(which, q), s)] = dict(d)
    return ExplicitMemoryScheduler(modes, init, mode_update, act)
