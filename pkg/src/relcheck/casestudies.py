"""Bundled case studies: parameterized models and their properties.

* ``vn``: von Neumann's unbiased-coin trick over 2N biased bits whose bias
  is chosen adversarially from an interval each flip.
* ``israeli-jalfon`` / ``israeli-jalfon-asym``: token-ring self
  stabilization; the asymmetric variant never schedules the last process.
* ``knuth-yao-biased`` / ``fast-dice-roller-biased``: die simulation by
  biased coin flips with per-flip bias choice.
* ``robot-tag``: a grid world where a janitor tries to block a robot's
  fixed path (blocking semantics documented in the README).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

from .core import Mdp, check_mdp
from .errors import UnknownCaseStudy
from .model_io import LoadedModel, parse_rational

ONE = Fraction(1)


def _model(states, actions, transitions, labels, init) -> LoadedModel:
    return LoadedModel(check_mdp(Mdp(states, actions, transitions, labels)), init)


# ---------------------------------------------------------------------------
# Von Neumann trick
# ---------------------------------------------------------------------------


def von_neumann(n: int, p_low, p_high) -> Tuple[LoadedModel, List[str]]:
    """2N bits per round; return the first bit if zeros and ones balance,
    otherwise retry. Each flip picks one of the two interval endpoints."""
    p_low, p_high = parse_rational(p_low), parse_rational(p_high)
    rounds = 2 * n
    states = ["start", "ret0", "ret1"]
    trans: Dict = {
        "ret0": {"lo": {"ret0": ONE}},
        "ret1": {"lo": {"ret1": ONE}},
    }
    labels = {"ret0": {"return0"}, "ret1": {"return1"}}

    def sid(b, i, z):
        return f"b{b}_{i}_{z}"

    for b in (0, 1):
        for i in range(1, rounds):
            zmin = 1 if b == 0 else 0
            zmax = i if b == 0 else i - 1
            for z in range(zmin, zmax + 1):
                states.append(sid(b, i, z))

    def successor(b, i, z, zero: bool):
        nz = z + 1 if zero else z
        if i == rounds - 1:
            if nz == n:
                return f"ret{b}"
            return "start"
        return sid(b, i + 1, nz)

    trans["start"] = {}
    for action, p in (("lo", p_low), ("hi", p_high)):
        trans["start"][action] = {sid(0, 1, 1): p, sid(1, 1, 0): ONE - p}
    for b in (0, 1):
        for i in range(1, rounds):
            zmin = 1 if b == 0 else 0
            zmax = i if b == 0 else i - 1
            for z in range(zmin, zmax + 1):
                row = {}
                for action, p in (("lo", p_low), ("hi", p_high)):
                    dist: Dict = {}
                    t0, t1 = successor(b, i, z, True), successor(b, i, z, False)
                    dist[t0] = dist.get(t0, Fraction(0)) + p
                    dist[t1] = dist.get(t1, Fraction(0)) + (ONE - p)
                    row[action] = dist
                trans[sid(b, i, z)] = row
    model = _model(states, ["lo", "hi"], trans, labels, {"start": "start"})
    props = [
        "forall s1 . P[s1,start](F return0) ~eq~ P[s1,start](F return1)",
        "forall s1 . P[s1,start](F return0) ~eq(0.1)~ P[s1,start](F return1)",
    ]
    return model, props


# ---------------------------------------------------------------------------
# Israeli-Jalfon token ring
# ---------------------------------------------------------------------------


def israeli_jalfon(n: int, asymmetric: bool = False) -> Tuple[LoadedModel, List[str]]:
    """Ring of n processes passing tokens; scheduling a token holder moves
    its token to a uniformly random neighbour and merges collisions. The
    asymmetric variant cannot schedule process n; states where only process
    n holds a token become absorbing. Only states reachable from the
    all-tokens configuration are generated."""
    if n < 2:
        raise UnknownCaseStudy("israeli-jalfon needs n >= 2")
    full = frozenset(range(n))

    def sid(tokens: frozenset) -> str:
        return "".join("1" if i in tokens else "0" for i in range(n))

    half = Fraction(1, 2)
    trans: Dict = {}
    labels: Dict = {}
    frontier = [full]
    seen = {full}
    while frontier:
        tokens = frontier.pop()
        name = sid(tokens)
        labels[name] = {f"q{i + 1}" for i in sorted(tokens)}
        row = {}
        for i in sorted(tokens):
            if asymmetric and i == n - 1:
                continue
            left = frozenset((tokens - {i}) | {(i - 1) % n})
            right = frozenset((tokens - {i}) | {(i + 1) % n})
            dist: Dict = {}
            for t in (left, right):
                dist[sid(t)] = dist.get(sid(t), Fraction(0)) + half
            row[f"p{i + 1}"] = dist
            for t in (left, right):
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
        if not row:
            row = {"stall": {name: ONE}}
        trans[name] = row
    states = sorted(sid(t) for t in seen)
    actions = [f"p{i + 1}" for i in range(n)] + ["stall"]
    model = _model(states, actions, trans, {s: labels[s] for s in states}, {"full": sid(full)})
    props = [
        f"forall s1 . P[s1,full](GF q{n - 1}) = P[s1,full](GF q{n})",
    ]
    return model, props


# ---------------------------------------------------------------------------
# Die simulation by biased coins
# ---------------------------------------------------------------------------

# Successor tables: state -> (on outcome 0, on outcome 1).
_KNUTH_YAO = {
    "s0": ("s1", "s2"),
    "s1": ("s3", "s4"),
    "s2": ("s5", "s6"),
    "s3": ("d1", "s1"),
    "s4": ("d2", "d3"),
    "s5": ("d4", "d5"),
    "s6": ("d6", "s2"),
}

# Lumbroso's fast dice roller, reduced to value classes: after three bits
# the counter c is in {0..7}; c < 6 returns face c+1, c in {6,7} recycles to
# the one-bit states.
_FAST_DICE_ROLLER = {
    "s0": ("s1", "s2"),
    "s1": ("s3", "s4"),
    "s2": ("s5", "s6"),
    "s3": ("d1", "d2"),
    "s4": ("d3", "d4"),
    "s5": ("d5", "d6"),
    "s6": ("s1", "s2"),
}


def _dice_model(table, p_low, p_high, epsilon) -> Tuple[LoadedModel, List[str]]:
    p_low, p_high = parse_rational(p_low), parse_rational(p_high)
    states = list(table) + [f"d{k}" for k in range(1, 7)]
    trans: Dict = {}
    labels: Dict = {}
    for s, (on0, on1) in table.items():
        row = {}
        for action, p in (("lo", p_low), ("hi", p_high)):
            dist: Dict = {on0: p}
            dist[on1] = dist.get(on1, Fraction(0)) + (ONE - p)
            row[action] = dist
        trans[s] = row
    for k in range(1, 7):
        trans[f"d{k}"] = {"lo": {f"d{k}": ONE}}
        labels[f"d{k}"] = {f"face{k}"}
    model = _model(states, ["lo", "hi"], trans, labels, {"roll": "s0"})
    eps = parse_rational(epsilon)
    conjuncts = [
        f"P[s1,roll](F face{k}) ~eq({eps})~ P[s1,roll](F face{k % 6 + 1})"
        for k in range(1, 7)
    ]
    props = ["exists s1 . " + " & ".join(conjuncts)]
    return model, props


def knuth_yao_biased(p_low, p_high, epsilon="0.15"):
    return _dice_model(_KNUTH_YAO, p_low, p_high, epsilon)


def fast_dice_roller_biased(p_low, p_high, epsilon="0.13"):
    return _dice_model(_FAST_DICE_ROLLER, p_low, p_high, epsilon)


# ---------------------------------------------------------------------------
# Robot tag
# ---------------------------------------------------------------------------


def robot_tag(n: int, janitor_start: Tuple[int, int] = None) -> Tuple[LoadedModel, List[str]]:
    """N x N grid. The robot follows its fixed path (right along the bottom
    row, then up the right column); if the janitor occupies the next path
    cell the robot waits. The janitor (the scheduler) picks stay or a
    direction; directional moves succeed with probability 9/10 and stay put
    otherwise, and may not enter the robot's cell."""
    if n < 2:
        raise UnknownCaseStudy("robot-tag needs n >= 2")
    jx0, jy0 = janitor_start or (n, n)
    path = [(x, 1) for x in range(1, n + 1)] + [(n, y) for y in range(2, n + 1)]
    goal_index = len(path) - 1
    move_p = Fraction(9, 10)

    def sid(r, jx, jy):
        return f"r{r}_j{jx}_{jy}"

    def step(r, jpos):
        if r == goal_index:
            return r
        return r + 1 if path[r + 1] != jpos else r

    states: List[str] = ["goal"]
    trans: Dict = {"goal": {"stay": {"goal": ONE}}}
    labels: Dict = {"goal": {"goal"}}
    start = (0, jx0, jy0)
    frontier = [start]
    seen = {start}
    directions = {
        "stay": (0, 0),
        "up": (0, 1),
        "down": (0, -1),
        "left": (-1, 0),
        "right": (1, 0),
    }
    while frontier:
        r, jx, jy = frontier.pop()
        name = sid(r, jx, jy)
        states.append(name)
        r2 = step(r, (jx, jy))
        row = {}
        for action, (dx, dy) in directions.items():
            tx, ty = jx + dx, jy + dy
            if not (1 <= tx <= n and 1 <= ty <= n):
                continue
            if (tx, ty) == path[r2] and action != "stay":
                continue
            if r2 == goal_index:
                row[action] = {"goal": ONE}
                continue
            moved = (r2, tx, ty)
            stayed = (r2, jx, jy)
            if action == "stay":
                dist = {sid(*stayed): ONE}
            else:
                dist = {sid(*moved): move_p, sid(*stayed): ONE - move_p}
            row[action] = dist
            for nxt in (moved, stayed):
                if nxt not in seen and r2 != goal_index:
                    seen.add(nxt)
                    frontier.append(nxt)
        trans[name] = row
    model = _model(
        states, list(directions), trans, labels, {"init": sid(*start)}
    )
    props = [
        "forall s1 forall s2 . P[s1,init](F goal) ~eq(0.00001)~ P[s2,init](F goal)",
    ]
    return model, props


CASE_STUDIES = {
    "vn": lambda n=1, p_low="0.59", p_high="0.61", **kw: von_neumann(int(n), p_low, p_high),
    "israeli-jalfon": lambda n=3, **kw: israeli_jalfon(int(n), asymmetric=False),
    "israeli-jalfon-asym": lambda n=3, **kw: israeli_jalfon(int(n), asymmetric=True),
    "knuth-yao-biased": lambda p_low="0.59", p_high="0.61", epsilon="0.15", **kw: knuth_yao_biased(
        p_low, p_high, epsilon
    ),
    "fast-dice-roller-biased": lambda p_low="0.59", p_high="0.61", epsilon="0.13", **kw: fast_dice_roller_biased(
        p_low, p_high, epsilon
    ),
    "robot-tag": lambda n=5, jx=None, jy=None, **kw: robot_tag(
        int(n),
        (int(jx), int(jy)) if jx is not None and jy is not None else None,
    ),
}


def generate(name: str, **params) -> Tuple[LoadedModel, List[str]]:
    if name not in CASE_STUDIES:
        raise UnknownCaseStudy(
            f"unknown case study {name!r}; available: {', '.join(sorted(CASE_STUDIES))}"
        )
    return CASE_STUDIES[name](**params)
