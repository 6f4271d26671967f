"""Shared example models used across the test suite."""

import json

import pytest

from relcheck.model_io import parse_model


@pytest.fixture
def running_example():
    """Four-state MDP with two labelled targets and a controllable cycle:
    the single-predicate running model (max 1/4, min -1/2)."""
    doc = {
        "states": [
            {"id": "s1", "labels": []},
            {"id": "s2", "labels": []},
            {"id": "t1", "labels": ["T"]},
            {"id": "t2", "labels": ["Tp"]},
        ],
        "actions": ["alpha", "beta", "tau"],
        "transitions": [
            {"from": "s1", "action": "alpha", "to": "s1", "prob": "1/3"},
            {"from": "s1", "action": "alpha", "to": "t1", "prob": "1/3"},
            {"from": "s1", "action": "alpha", "to": "t2", "prob": "1/3"},
            {"from": "s1", "action": "beta", "to": "s2", "prob": "1"},
            {"from": "s2", "action": "alpha", "to": "t2", "prob": "1"},
            {"from": "s2", "action": "beta", "to": "s2", "prob": "1"},
            {"from": "t1", "action": "tau", "to": "s1", "prob": "1"},
            {"from": "t2", "action": "tau", "to": "t2", "prob": "1"},
        ],
        "init": {"a": "s1", "b": "s2"},
    }
    return parse_model(json.dumps(doc))


@pytest.fixture
def memory_necessary():
    """s chooses between a revisitable target and an absorbing one; equality
    needs memoryful randomization."""
    doc = {
        "states": [
            {"id": "s", "labels": []},
            {"id": "t1", "labels": ["T1"]},
            {"id": "t2", "labels": ["T2"]},
        ],
        "actions": ["alpha", "beta", "gamma"],
        "transitions": [
            {"from": "s", "action": "alpha", "to": "t1", "prob": "1"},
            {"from": "s", "action": "beta", "to": "t2", "prob": "1"},
            {"from": "t1", "action": "gamma", "to": "s", "prob": "1"},
            {"from": "t2", "action": "gamma", "to": "t2", "prob": "1"},
        ],
        "init": {"i": "s"},
    }
    return parse_model(json.dumps(doc))


@pytest.fixture
def randomization_necessary():
    doc = {
        "states": [
            {"id": "s", "labels": []},
            {"id": "t", "labels": ["T"]},
            {"id": "sbot", "labels": []},
        ],
        "actions": ["alpha", "beta", "tau"],
        "transitions": [
            {"from": "s", "action": "alpha", "to": "t", "prob": "1"},
            {"from": "s", "action": "beta", "to": "sbot", "prob": "1"},
            {"from": "t", "action": "tau", "to": "t", "prob": "1"},
            {"from": "sbot", "action": "tau", "to": "sbot", "prob": "1"},
        ],
        "init": {"i": "s"},
    }
    return parse_model(json.dumps(doc))


@pytest.fixture
def one_sched_two_states():
    doc = {
        "states": [
            {"id": "s1", "labels": []},
            {"id": "s2", "labels": []},
            {"id": "t", "labels": ["T"]},
            {"id": "sbot", "labels": []},
        ],
        "actions": ["alpha", "beta", "tau"],
        "transitions": [
            {"from": "s1", "action": "alpha", "to": "t", "prob": "1"},
            {"from": "s1", "action": "beta", "to": "t", "prob": "1/2"},
            {"from": "s1", "action": "beta", "to": "sbot", "prob": "1/2"},
            {"from": "s2", "action": "tau", "to": "s1", "prob": "1"},
            {"from": "t", "action": "tau", "to": "t", "prob": "1"},
            {"from": "sbot", "action": "tau", "to": "sbot", "prob": "1"},
        ],
        "init": {"a": "s1", "b": "s2"},
    }
    return parse_model(json.dumps(doc))


@pytest.fixture
def buechi_running():
    """MDP whose end components include a two-state cycle with a sub-EC and
    an absorbing state also in the first target."""
    doc = {
        "states": [
            {"id": "s", "labels": []},
            {"id": "t1", "labels": ["T1"]},
            {"id": "t2", "labels": ["T2"]},
            {"id": "t1p", "labels": ["T1"]},
        ],
        "actions": ["alpha", "beta", "tau"],
        "transitions": [
            {"from": "s", "action": "alpha", "to": "t1", "prob": "1/4"},
            {"from": "s", "action": "alpha", "to": "t1p", "prob": "3/4"},
            {"from": "s", "action": "beta", "to": "t2", "prob": "3/4"},
            {"from": "s", "action": "beta", "to": "t1p", "prob": "1/4"},
            {"from": "t1", "action": "alpha", "to": "t1", "prob": "1"},
            {"from": "t1", "action": "beta", "to": "t2", "prob": "1"},
            {"from": "t2", "action": "tau", "to": "t1", "prob": "1"},
            {"from": "t1p", "action": "tau", "to": "t1p", "prob": "1"},
        ],
        "init": {"i": "s"},
    }
    return parse_model(json.dumps(doc))


@pytest.fixture
def conj_running():
    """Two-predicate running model (strict-< and strict-> conjuncts)."""
    doc = {
        "states": [
            {"id": "s1"},
            {"id": "s2"},
            {"id": "t", "labels": ["T"]},
            {"id": "sp"},
            {"id": "tp", "labels": ["Tp"]},
        ],
        "actions": ["a", "alpha", "beta", "gamma", "delta"],
        "transitions": [
            {"from": "s1", "action": "a", "to": "t", "prob": "1/3"},
            {"from": "s1", "action": "a", "to": "sp", "prob": "1/3"},
            {"from": "s1", "action": "a", "to": "s2", "prob": "1/3"},
            {"from": "s2", "action": "a", "to": "sp", "prob": "2/3"},
            {"from": "s2", "action": "a", "to": "tp", "prob": "1/3"},
            {"from": "sp", "action": "alpha", "to": "t", "prob": "1"},
            {"from": "sp", "action": "beta", "to": "tp", "prob": "1"},
            {"from": "tp", "action": "gamma", "to": "s2", "prob": "1"},
            {"from": "tp", "action": "delta", "to": "tp", "prob": "1"},
            {"from": "t", "action": "a", "to": "t", "prob": "1"},
        ],
        "init": {"i1": "s1", "i2": "s2"},
    }
    return parse_model(json.dumps(doc))
