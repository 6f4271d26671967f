"""Exact analyses of finite Markov chains.

Reachability probabilities, Buchi (infinitely-often) probabilities and
expected total rewards, all by sparse rational linear solving. Also builds
the product chain of an MDP with an explicit-memory scheduler, which is how
arbitrary witness schedulers are re-evaluated exactly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Mapping, Set, Tuple

from .core import Dtmc, ExplicitMemoryScheduler, Mdp, RewardStructure, ONE, ZERO
from .errors import DivergentReward
from .linalg import solve_sparse

State = Hashable


def strongly_connected_components(adj: Mapping[State, Iterable[State]]) -> List[List[State]]:
    """Tarjan's algorithm, iterative (explicit stack), reverse topological
    order reversed at the end so the result is topologically sorted."""
    index: Dict[State, int] = {}
    lowlink: Dict[State, int] = {}
    on_stack: Set[State] = set()
    stack: List[State] = []
    sccs: List[List[State]] = []
    counter = [0]

    for root in adj:
        if root in index:
            continue
        work = [(root, iter(adj.get(root, ())))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = lowlink[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(adj.get(succ, ()))))
                    advanced = True
                    break
                elif succ in on_stack:
                    lowlink[node] = min(lowlink[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)
    sccs.reverse()
    return sccs


def _chain_adjacency(chain: Dtmc) -> Dict[State, List[State]]:
    return {s: list(chain.row(s)) for s in chain.states}


def bottom_sccs(chain: Dtmc) -> List[List[State]]:
    """SCCs with no outgoing edge (the recurrent classes)."""
    result = []
    for comp in strongly_connected_components(_chain_adjacency(chain)):
        members = set(comp)
        if all(t in members for s in comp for t in chain.row(s)):
            result.append(comp)
    return result


def reachable_from(adj: Mapping[State, Iterable[State]], sources: Iterable[State]) -> Set[State]:
    seen = set()
    frontier = [s for s in sources]
    while frontier:
        s = frontier.pop()
        if s in seen:
            continue
        seen.add(s)
        frontier.extend(t for t in adj.get(s, ()) if t not in seen)
    return seen


def can_reach(adj: Mapping[State, Iterable[State]], targets: Set[State]) -> Set[State]:
    """States with a path into `targets` (targets included)."""
    rev: Dict[State, List[State]] = {}
    for s, succs in adj.items():
        for t in succs:
            rev.setdefault(t, []).append(s)
    return reachable_from(rev, targets)


def _as_distribution(init) -> Dict[State, Fraction]:
    if isinstance(init, dict):
        return {s: Fraction(p) for s, p in init.items() if Fraction(p) != 0}
    return {init: ONE}


def reach_probability(chain: Dtmc, init, targets: Set[State]) -> Fraction:
    """Exact probability of eventually visiting `targets`."""
    init_dist = _as_distribution(init)
    adj = _chain_adjacency(chain)
    able = can_reach(adj, set(targets) & set(chain.states))
    values: Dict[State, Fraction] = {}
    unknown = []
    for s in chain.states:
        if s in targets:
            values[s] = ONE
        elif s not in able:
            values[s] = ZERO
        else:
            unknown.append(s)
    relevant = reachable_from(adj, init_dist) & set(unknown)
    if relevant:
        equations = []
        for s in relevant:
            coeffs = {s: ONE}
            rhs = ZERO
            for t, p in chain.row(s).items():
                if t in relevant:
                    coeffs[t] = coeffs.get(t, ZERO) - p
                else:
                    rhs += p * values.get(t, ZERO)
            equations.append((coeffs, rhs))
        values.update(solve_sparse(equations))
    return sum((p * values.get(s, ZERO) for s, p in init_dist.items()), ZERO)


def buechi_probability(chain: Dtmc, init, targets: Set[State]) -> Fraction:
    """Probability of visiting `targets` infinitely often: reaching a bottom
    SCC that intersects them."""
    good: Set[State] = set()
    for comp in bottom_sccs(chain):
        if set(comp) & set(targets):
            good.update(comp)
    if not good:
        return ZERO
    return reach_probability(chain, init, good)


def expected_total_reward(chain: Dtmc, init, rewards: RewardStructure) -> Fraction:
    """Exact expected total (undiscounted) reward.

    Requires every rewarded state reachable from `init` to be transient;
    otherwise the expectation diverges and `DivergentReward` is raised.
    """
    init_dist = _as_distribution(init)
    adj = _chain_adjacency(chain)
    reachable = reachable_from(adj, init_dist)
    recurrent: Set[State] = set()
    for comp in bottom_sccs(chain):
        recurrent.update(comp)
    hot = [s for s in rewards.nonzero_states() if s in reachable]
    for s in hot:
        if s in recurrent:
            raise DivergentReward(f"rewarded state {s!r} is recurrent")
    if not hot:
        return ZERO
    # Expected visit counts of transient reachable states:
    # mu(s) = init(s) + sum_{s'} P(s', s) * mu(s').
    transient = [s for s in reachable if s not in recurrent]
    tset = set(transient)
    incoming: Dict[State, Dict[State, Fraction]] = {s: {} for s in transient}
    for s in transient:
        for t, p in chain.row(s).items():
            if t in tset:
                incoming[t][s] = incoming[t].get(s, ZERO) + p
    equations = []
    for s in transient:
        coeffs = {s: ONE}
        for src, p in incoming[s].items():
            coeffs[src] = coeffs.get(src, ZERO) - p
        equations.append((coeffs, init_dist.get(s, ZERO)))
    visits = solve_sparse(equations)
    return sum((visits[s] * rewards.get(s) for s in transient), ZERO)


def product_chain(
    mdp: Mdp, sched: ExplicitMemoryScheduler, start: State
) -> Tuple[Dtmc, Dict[Tuple, Fraction]]:
    """Unroll an explicit-memory scheduler against an MDP from `start`.

    Returns the reachable product chain over (mode, state) pairs and the
    initial distribution over product states.
    """
    init_dist = {(q, start): p for q, p in sched.init_dist(start).items()}
    transitions: Dict[Tuple, Dict[Tuple, Fraction]] = {}
    frontier = list(init_dist)
    while frontier:
        node = frontier.pop()
        if node in transitions:
            continue
        q, s = node
        row: Dict[Tuple, Fraction] = {}
        for a, w in sched.action_dist(mdp, q, s).items():
            for t, p in mdp.successors(s, a).items():
                for q2, u in sched.next_modes(q, a, t).items():
                    key = (q2, t)
                    row[key] = row.get(key, ZERO) + w * p * u
        transitions[node] = row
        frontier.extend(t for t in row if t not in transitions)
    states = list(transitions)
    return Dtmc(states, transitions), init_dist


def lift_targets(product_states: Iterable[Tuple], targets: Set[State]) -> Set[Tuple]:
    return {ps for ps in product_states if ps[1] in targets}


def scheduler_reach_probability(mdp: Mdp, sched, start: State, targets: Set[State]) -> Fraction:
    """Pr of reaching `targets` from `start` under any scheduler kind."""
    from .core import induce_dtmc

    if isinstance(sched, ExplicitMemoryScheduler):
        chain, init = product_chain(mdp, sched, start)
        return reach_probability(chain, init, lift_targets(chain.states, targets))
    chain = induce_dtmc(mdp, sched)
    return reach_probability(chain, start, set(targets))


def scheduler_buechi_probability(mdp: Mdp, sched, start: State, targets: Set[State]) -> Fraction:
    from .core import induce_dtmc

    if isinstance(sched, ExplicitMemoryScheduler):
        chain, init = product_chain(mdp, sched, start)
        return buechi_probability(chain, init, lift_targets(chain.states, targets))
    chain = induce_dtmc(mdp, sched)
    return buechi_probability(chain, start, set(targets))
