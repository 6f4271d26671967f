from fractions import Fraction as F

import pytest

from relcheck.chains import reach_probability
from relcheck.core import Mdp, induce_dtmc
from relcheck.errors import MalformedClause, TooManySchedulers
from relcheck.model_io import normalize, parse_property
from relcheck.moa import solve_conjrelreach
from relcheck.oracle import (
    cnf_satisfiable,
    enumerate_md_schedulers,
    gen_3sat_conjrelreach,
    gen_hamiltonian_instance,
    gen_sat_relbuechi,
    hamiltonian_path_exists,
    md_scheduler_count,
    oracle_relbuechi_md,
    oracle_relreach_md,
)
from relcheck.relbuechi import solve_relbuechi
from relcheck.relreach import Verdict


def test_enumeration_counts():
    two_by_two = Mdp(
        ["a", "b"],
        ["x", "y"],
        {
            "a": {"x": {"a": F(1)}, "y": {"b": F(1)}},
            "b": {"x": {"b": F(1)}, "y": {"a": F(1)}},
        },
    )
    assert len(list(enumerate_md_schedulers(two_by_two))) == 4
    single = Mdp(["a"], ["x"], {"a": {"x": {"a": F(1)}}})
    assert len(list(enumerate_md_schedulers(single))) == 1


def test_enumeration_cap():
    two_by_two = Mdp(
        ["a", "b"],
        ["x", "y"],
        {
            "a": {"x": {"a": F(1)}, "y": {"b": F(1)}},
            "b": {"x": {"b": F(1)}, "y": {"a": F(1)}},
        },
    )
    with pytest.raises(TooManySchedulers):
        list(enumerate_md_schedulers(two_by_two, cap=3))


def test_hamiltonian_instance_structure():
    # graph of the illustration: a Hamiltonian path exists
    edges = [(0, 1), (1, 2), (1, 3), (2, 0), (2, 3)]
    m, query = gen_hamiltonian_instance(edges, 4)
    # out-degree + 1 choices per vertex state, single action elsewhere
    assert md_scheduler_count(m) == 2 * 3 * 3 * 1
    # flag-b probability is 1/2^|V| under every scheduler
    for sched in enumerate_md_schedulers(m):
        chain = induce_dtmc(m, sched)
        assert reach_probability(chain, "s0", {"sb"}) == F(1, 2 ** 4)
    assert oracle_relreach_md(m, query) is True
    assert hamiltonian_path_exists(edges, 4) is True


def test_hamiltonian_no_edges():
    m, query = gen_hamiltonian_instance([], 3)
    assert oracle_relreach_md(m, query) is False
    assert hamiltonian_path_exists([], 3) is False


def test_hamiltonian_epsilon_guard():
    with pytest.raises(ValueError):
        gen_hamiltonian_instance([(0, 1)], 2, epsilon=F(1, 2))


def test_memory_necessary_md_equality(memory_necessary):
    query = normalize(
        parse_property("exists s1 . P[s1,i](F T1) = P[s1,i](F T2)"),
        memory_necessary.mdp,
        memory_necessary.init,
    )
    assert oracle_relreach_md(memory_necessary.mdp, query) is False


def test_one_sched_two_states_md(one_sched_two_states):
    query = normalize(
        parse_property("exists s . P[s,a](F T) != P[s,b](F T)"),
        one_sched_two_states.mdp,
        one_sched_two_states.init,
    )
    assert oracle_relreach_md(one_sched_two_states.mdp, query) is False


def test_bound_below_minimum(memory_necessary):
    query = normalize(
        parse_property("exists s1 . P[s1,i](F T1) >= 5"),
        memory_necessary.mdp,
        memory_necessary.init,
    )
    assert oracle_relreach_md(memory_necessary.mdp, query) is False


def test_sat_relbuechi_examples():
    m, q = gen_sat_relbuechi(1, [[1]])
    assert oracle_relbuechi_md(m, q) is True
    assert solve_relbuechi(m, q, want_witness=False).verdict is Verdict.TRUE
    m, q = gen_sat_relbuechi(1, [[1], [-1]])
    assert oracle_relbuechi_md(m, q) is False
    assert solve_relbuechi(m, q, want_witness=False).verdict is Verdict.FALSE
    m, q = gen_sat_relbuechi(2, [])
    assert solve_relbuechi(m, q, want_witness=False).verdict is Verdict.TRUE


def test_3sat_examples():
    m, q = gen_3sat_conjrelreach(1, [[1, 1, 1]])
    assert m.is_absorbing("t")
    assert all(
        op.target == frozenset({"t"}) for p in q.predicates for op in p.operators
    )
    assert solve_conjrelreach(m, q, want_witness=False).verdict is Verdict.TRUE
    m, q = gen_3sat_conjrelreach(1, [[1, 1, 1], [-1, -1, -1]])
    assert solve_conjrelreach(m, q, want_witness=False).verdict is Verdict.FALSE


def test_3sat_malformed_clause():
    with pytest.raises(MalformedClause):
        gen_3sat_conjrelreach(2, [[1, 2]])


def test_cnf_satisfiable():
    assert cnf_satisfiable(2, [[1, 2], [-1, 2]]) is True
    assert cnf_satisfiable(1, [[1], [-1]]) is False
    assert cnf_satisfiable(0, []) is True
