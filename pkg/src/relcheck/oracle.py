"""Brute-force reference semantics over memoryless deterministic schedulers
and the hardness-reduction instance generators used for testing.

The oracle enumerates MD schedulers per scheduler variable (deduplicating
the induced value vectors), evaluates reachability exactly by chain solving
and Buchi probabilities by bottom-SCC reachability, and decides the query
by exhaustive combination.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .chains import buechi_probability, reach_probability
from .core import MDScheduler, Mdp, induce_dtmc, ONE, ZERO
from .errors import MalformedClause, TooManySchedulers
from .query import (
    APPROX,
    EVENTUALLY,
    GE,
    GT,
    INF_OFTEN,
    NAPPROX,
    Operator,
    Predicate,
    RelationalQuery,
)

DEFAULT_CAP = 10**6


def md_scheduler_count(m: Mdp) -> int:
    count = 1
    for s in m.states:
        count *= len(m.enabled_actions(s))
    return count


def enumerate_md_schedulers(m: Mdp, cap: int = DEFAULT_CAP) -> Iterator[MDScheduler]:
    """All MD schedulers in deterministic order (product of the per-state
    enabled-action tuples, states in model order)."""
    total = md_scheduler_count(m)
    if total > cap:
        raise TooManySchedulers(f"{total} MD schedulers exceed the cap of {cap}")
    options = [m.enabled_actions(s) for s in m.states]
    for selection in product(*options):
        yield MDScheduler(dict(zip(m.states, selection)))


def _satisfies(pred: Predicate, value: Fraction) -> bool:
    if pred.comparison == GT:
        return value > pred.bound
    if pred.comparison == GE:
        return value >= pred.bound
    if pred.comparison == APPROX:
        return abs(value - pred.bound) <= pred.epsilon
    if pred.comparison == NAPPROX:
        return abs(value - pred.bound) > pred.epsilon
    raise ValueError(pred.comparison)


def _variable_value_vectors(
    m: Mdp, query: RelationalQuery, cap: int
) -> Tuple[List[Tuple[int, ...]], Dict[int, List[Tuple]]]:
    """For each scheduler variable, the distinct vectors of operator values
    achievable by MD schedulers, together with a representative scheduler."""
    ops_by_var: Dict[int, List[Tuple[int, int]]] = {}
    for j, pred in enumerate(query.predicates):
        for i, op in enumerate(pred.operators):
            if op.coefficient != 0:
                ops_by_var.setdefault(op.scheduler, []).append((i, j))
    vectors: Dict[int, Dict[Tuple, MDScheduler]] = {k: {} for k in ops_by_var}
    for sched in enumerate_md_schedulers(m, cap):
        chain = induce_dtmc(m, sched)
        cache: Dict[Tuple, Fraction] = {}

        def op_value(op: Operator) -> Fraction:
            key = (op.initial_state, op.temporal, op.target)
            if key not in cache:
                if op.temporal == EVENTUALLY:
                    cache[key] = reach_probability(
                        chain, op.initial_state, set(op.target)
                    )
                else:
                    cache[key] = buechi_probability(
                        chain, op.initial_state, set(op.target)
                    )
            return cache[key]

        for k, positions in ops_by_var.items():
            vec = tuple(
                op_value(query.predicates[j].operators[i]) for i, j in positions
            )
            vectors[k].setdefault(vec, sched)
    positions = {k: v for k, v in ops_by_var.items()}
    return positions, vectors


def oracle_holds_md(
    m: Mdp, query: RelationalQuery, cap: int = DEFAULT_CAP
) -> Tuple[bool, Optional[Dict[str, MDScheduler]]]:
    """Decide the query over MD schedulers by exhaustive enumeration.

    Universal queries hold iff every predicate holds under every assignment;
    existential ones iff some assignment satisfies all predicates. Returns
    the witness assignment for a satisfied existential query (respectively a
    counterexample for a violated universal one)."""
    if query.universal:
        negated = RelationalQuery(
            tuple(p.negated() for p in query.predicates),
            query.scheduler_count,
            universal=False,
            scheduler_names=query.scheduler_names,
        )
        # forall iff no predicate's negation is satisfiable (per predicate)
        for j in range(len(negated.predicates)):
            sub = RelationalQuery(
                (negated.predicates[j],),
                query.scheduler_count,
                scheduler_names=query.scheduler_names,
            )
            sat, assignment = oracle_holds_md(m, sub, cap)
            if sat:
                return False, assignment
        return True, None

    ops_by_var, vectors = _variable_value_vectors(m, query, cap)
    if not ops_by_var:
        value_ok = all(_satisfies(p, ZERO) for p in query.predicates)
        return value_ok, ({} if value_ok else None)
    variables = sorted(ops_by_var)
    choice_lists = [sorted(vectors[k].items(), key=lambda kv: str(kv[0])) for k in variables]
    for combo in product(*choice_lists):
        values: Dict[Tuple[int, int], Fraction] = {}
        for k, (vec, _sched) in zip(variables, combo):
            for pos, v in zip(ops_by_var[k], vec):
                values[pos] = v
        ok = True
        for j, pred in enumerate(query.predicates):
            total = sum(
                (
                    op.coefficient * values[(i, j)]
                    for i, op in enumerate(pred.operators)
                    if op.coefficient != 0
                ),
                ZERO,
            )
            if not _satisfies(pred, total):
                ok = False
                break
        if ok:
            assignment = {
                query.scheduler_name(k): sched
                for k, (_vec, sched) in zip(variables, combo)
            }
            return True, assignment
    return False, None


def oracle_relreach_md(m: Mdp, query: RelationalQuery, cap: int = DEFAULT_CAP) -> bool:
    assert query.is_reach_only()
    return oracle_holds_md(m, query, cap)[0]


def oracle_relbuechi_md(m: Mdp, query: RelationalQuery, cap: int = DEFAULT_CAP) -> bool:
    assert query.is_buechi_only()
    return oracle_holds_md(m, query, cap)[0]


# ---------------------------------------------------------------------------
# Hardness-reduction instance generators
# ---------------------------------------------------------------------------


def gen_hamiltonian_instance(
    edges: Iterable[Tuple[int, int]], vertex_count: int, init_vertex: int = 0, epsilon=None
) -> Tuple[Mdp, RelationalQuery]:
    """Hamiltonian-path gadget: half-probability edge moves, a give-up jump
    to one absorbing flag state, and a counting chain to the other; the
    flags' reachability probabilities (approximately) coincide for some MD
    scheduler iff the graph has a Hamiltonian path from the start vertex.
    Requires epsilon < 1/2^(V+1) (default 0)."""
    edges = sorted(set((int(u), int(v)) for u, v in edges))
    n = int(vertex_count)
    eps = Fraction(0) if epsilon is None else Fraction(epsilon)
    if eps >= Fraction(1, 2 ** (n + 1)):
        raise ValueError("epsilon must be below 1/2^(V+1)")
    half = Fraction(1, 2)

    def v(i):
        return f"v{i}"

    states = [v(i) for i in range(n)] + ["s0", "sbot", "sa", "sb"]
    states += [f"c{i}" for i in range(1, n)]
    chain_head = "c1" if n > 1 else "sb"
    trans: Dict = {
        "s0": {"tau": {v(init_vertex): half, chain_head: half}},
        "sbot": {"tau": {"sbot": ONE}},
        "sa": {"tau": {"sa": ONE}},
        "sb": {"tau": {"sb": ONE}},
    }
    actions = ["tau"] + [f"e{u}_{w}" for u, w in edges]
    for i in range(1, n):
        target = "sb" if i == n - 1 else f"c{i + 1}"
        trans[f"c{i}"] = {"tau": {target: half, "sbot": half}}
    for i in range(n):
        row = {"tau": {"sa": ONE}}
        for (u, w) in edges:
            if u == i:
                row[f"e{u}_{w}"] = {v(w): half, "sbot": half}
        trans[v(i)] = row
    mdp = Mdp(states, actions, trans, labels={"sa": {"flag_a"}, "sb": {"flag_b"}})
    query = RelationalQuery(
        (
            Predicate(
                (
                    Operator(ONE, "s0", 1, EVENTUALLY, frozenset({"sa"})),
                    Operator(-ONE, "s0", 1, EVENTUALLY, frozenset({"sb"})),
                ),
                APPROX,
                ZERO,
                eps,
            ),
        ),
        scheduler_count=1,
        scheduler_names=("sched1",),
    )
    return mdp, query


def hamiltonian_path_exists(edges, vertex_count: int, init_vertex: int = 0) -> bool:
    adj: Dict[int, List[int]] = {}
    for u, w in edges:
        adj.setdefault(int(u), []).append(int(w))

    n = int(vertex_count)

    def dfs(node, seen):
        if len(seen) == n:
            return True
        for nxt in adj.get(node, ()):
            if nxt not in seen:
                if dfs(nxt, seen | {nxt}):
                    return True
        return False

    return dfs(init_vertex, {init_vertex})


def gen_sat_relbuechi(num_vars: int, clauses: Sequence[Sequence[int]]) -> Tuple[Mdp, RelationalQuery]:
    """SAT gadget: a 2N-state ring where the scheduler commits each round to
    the positive or negative literal of the next variable; the instance is
    satisfiable iff one scheduler makes the weighted sum of
    infinitely-often probabilities hit its bound."""
    n = int(num_vars)

    def pos(i):
        return f"x{i + 1}"

    def neg(i):
        return f"nx{i + 1}"

    states = [pos(i) for i in range(n)] + [neg(i) for i in range(n)]
    trans: Dict = {}
    for i in range(n):
        nxt = (i + 1) % n
        for s in (pos(i), neg(i)):
            trans[s] = {"a": {pos(nxt): ONE}, "na": {neg(nxt): ONE}}
    mdp = Mdp(states, ["a", "na"], trans)
    operators = []
    for i in range(n):
        operators.append(Operator(-ONE, pos(0), 1, INF_OFTEN, frozenset({pos(i)})))
        operators.append(Operator(-ONE, pos(0), 1, INF_OFTEN, frozenset({neg(i)})))
    for clause in clauses:
        lits = frozenset(
            pos(abs(l) - 1) if l > 0 else neg(abs(l) - 1) for l in clause
        )
        operators.append(Operator(ONE, pos(0), 1, INF_OFTEN, lits))
    bound = Fraction(len(clauses) - n)
    query = RelationalQuery(
        (Predicate(tuple(operators), GE, bound),),
        scheduler_count=1,
        scheduler_names=("sched1",),
    )
    return mdp, query


def gen_3sat_conjrelreach(num_vars: int, clauses: Sequence[Sequence[int]]) -> Tuple[Mdp, RelationalQuery]:
    """3SAT gadget on a two-state MDP with one scheduler per variable:
    per-variable disequality predicates force near-deterministic truth
    values, and per-clause weighted sums assert at least one true literal."""
    n = int(num_vars)
    for clause in clauses:
        if len(clause) != 3:
            raise MalformedClause(f"clause {clause!r} must have exactly 3 literals")
    trans = {
        "s": {"alpha": {"s": ONE}, "beta": {"t": ONE}},
        "t": {"beta": {"t": ONE}},
    }
    mdp = Mdp(["s", "t"], ["alpha", "beta"], trans, labels={"t": {"goal"}})
    target = frozenset({"t"})
    predicates = []
    for i in range(n):
        predicates.append(
            Predicate(
                (Operator(ONE, "s", i + 1, EVENTUALLY, target),),
                NAPPROX,
                Fraction(1, 2),
                Fraction(1, 4),
            )
        )
    for clause in clauses:
        ops = []
        shift = ZERO
        for lit in clause:
            coeff = Fraction(2) if lit > 0 else Fraction(-2)
            ops.append(Operator(coeff, "s", abs(lit), EVENTUALLY, target))
            shift += coeff / 2
        predicates.append(Predicate(tuple(ops), GE, Fraction(-1) + shift))
    query = RelationalQuery(
        tuple(predicates),
        scheduler_count=n,
        scheduler_names=tuple(f"sched{i + 1}" for i in range(n)),
    )
    return mdp, query


def cnf_satisfiable(num_vars: int, clauses: Sequence[Sequence[int]]) -> bool:
    n = int(num_vars)
    for bits in range(1 << n):
        assignment = [(bits >> i) & 1 == 1 for i in range(n)]
        if all(
            any(
                assignment[abs(l) - 1] if l > 0 else not assignment[abs(l) - 1]
                for l in clause
            )
            for clause in clauses
        ):
            return True
    return False
