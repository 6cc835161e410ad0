"""Brute-force baselines and random instance generators for testing.

The region oracle enumerates every bounded (r0, B, F) triple directly
against the region axioms, independently of any inequality system, so
solver and oracle cross-check each other.  Generators are deterministic per
seed; the net generator composes free-choice blocks and N-shaped asymmetric
choice blocks into token-conservative rings, keeping reachability graphs
small and the class membership guaranteed by construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from netsynth.lts import Lts, parse_lts, spanning_tree, validate
from netsynth.petri import PetriNet, classify_net
from netsynth.separation import Region, SSP, SeparationProblem


@dataclass(frozen=True)
class OracleBound:
    """Inclusive bound on r0, B and F entries during exhaustive search."""

    max_value: int = 3

    def __post_init__(self):
        if self.max_value < 1:
            raise ValueError("max_value must be at least 1")


@lru_cache(maxsize=16)
def _weight_table(lts: Lts, max_value: int):
    """All bounded weight vectors that form a region of ``lts``.

    Returns (b, f, pot, r0_min, valid, tree): per enumerated row the
    consume/produce vectors, the token offset of every state, the smallest
    admissible initial count, and whether some initial count up to the
    bound makes the row a region.
    """
    ns, nl = len(lts.states), len(lts.labels)
    if ns * nl > 64:
        raise ValueError("oracle guard: too large, |S|*|Labels| > 64")
    vals = max_value + 1
    combos = vals ** (2 * nl)
    if combos > 5_000_000:
        raise ValueError("oracle guard: weight enumeration too large")
    tree = spanning_tree(lts)

    digits = np.arange(combos, dtype=np.int64)
    bf = np.empty((combos, 2 * nl), dtype=np.int64)
    for k in range(2 * nl):
        bf[:, k] = (digits // vals ** (2 * nl - 1 - k)) % vals
    b = bf[:, :nl]
    f = bf[:, nl:]
    d = f - b

    psi = np.zeros((nl, ns), dtype=np.int64)
    for s in range(ns):
        for label, count in tree.parikh[s].counts:
            psi[label, s] = count
    pot = d @ psi  # per-row token offset of every state

    consistent = np.ones(combos, dtype=bool)
    r0_min = np.zeros(combos, dtype=np.int64)
    np.maximum(r0_min, -pot.min(axis=1), out=r0_min)
    for s, t, s2 in lts.edges:
        consistent &= pot[:, s2] == pot[:, s] + d[:, t]
        np.maximum(r0_min, b[:, t] - pot[:, s], out=r0_min)
    valid = consistent & (r0_min <= max_value)
    return b, f, pot, r0_min, valid, tree


def brute_force_region(lts: Lts, problem: SeparationProblem,
                       bound: OracleBound = OracleBound()) \
        -> Optional[Region]:
    """Exhaustively search for a region solving ``problem``.

    Enumerates all weight vectors up to the bound, keeps those consistent
    with every edge and nonnegative everywhere, and returns the first
    solving region in lexicographic (r0, B, F) order, or None.
    """
    b, f, pot, r0_min, valid, tree = _weight_table(lts, bound.max_value)
    if isinstance(problem, SSP):
        ok = valid & (pot[:, problem.s1] != pot[:, problem.s2])
    else:
        ok = valid & (r0_min < b[:, problem.label] - pot[:, problem.state])
    if not ok.any():
        return None
    rows = np.flatnonzero(ok)
    best = rows[np.lexsort((rows, r0_min[rows]))[0]]
    region = Region(r0=int(r0_min[best]),
                    b=tuple(int(x) for x in b[best]),
                    f=tuple(int(x) for x in f[best]))
    assert region.is_valid(lts, tree) and region.solves(tree, problem)
    return region


def random_lts(seed: int, max_states: int = 8, max_labels: int = 4) -> Lts:
    """Deterministic random LTS, always reachable and deterministic.

    A reachability backbone connects every state to an earlier one, then
    spare (state, label) slots get random extra edges.
    """
    rng = random.Random(seed)
    n = rng.randint(1, max_states)
    nl = rng.randint(1, max_labels)
    label_names = [chr(ord("a") + i) for i in range(nl)]
    used: dict[tuple[int, int], int] = {}
    edges: list[tuple[int, int, int]] = []
    actual = 1
    for i in range(1, n):
        slots = [(j, l) for j in range(actual) for l in range(nl)
                 if (j, l) not in used]
        if not slots:
            break
        j, l = rng.choice(slots)
        used[(j, l)] = i
        edges.append((j, l, i))
        actual += 1
    for s in range(actual):
        for l in range(nl):
            if (s, l) not in used and rng.random() < 0.3:
                target = rng.randrange(actual)
                used[(s, l)] = target
                edges.append((s, l, target))
    lines = ["initial s0"] + [f"s{s} {label_names[l]} s{t}"
                              for s, l, t in edges]
    lts = parse_lts("\n".join(lines))
    report = validate(lts)
    assert report.ok
    return lts


def random_brac_net(seed: int, max_rings: int = 2,
                    max_stages: int = 4) -> PetriNet:
    """Deterministic random block-reduced asymmetric choice net.

    Each ring circulates one token wave through free-choice and asymmetric
    choice stages; self-loop transitions idle on the shared place of a
    choice, and some producers may underfill the next stage, creating
    branches that stall.  Every output is plain, classifies as BRAC and has
    a small reachability graph.
    """
    rng = random.Random(seed)
    place_names: list[str] = []
    tokens: list[int] = []
    trans_names: list[str] = []
    consume: dict[tuple[int, int], int] = {}
    produce: dict[tuple[int, int], int] = {}

    def new_place(initial: int = 0) -> int:
        place_names.append(f"p{len(place_names)}")
        tokens.append(initial)
        return len(place_names) - 1

    def new_transition() -> int:
        trans_names.append(f"t{len(trans_names)}")
        return len(trans_names) - 1

    for _ in range(rng.randint(1, max_rings)):
        nstages = rng.randint(2, max_stages)
        stages = []
        for _ in range(nstages):
            if rng.random() < 0.4:
                q = new_place()
                x = new_place()
                stages.append(("ac", q, x))
            else:
                entry = [new_place() for _ in range(rng.randint(1, 2))]
                stages.append(("fc", entry))
        for i, stage in enumerate(stages):
            nxt = stages[(i + 1) % nstages]
            targets = [nxt[1], nxt[2]] if nxt[0] == "ac" else list(nxt[1])
            if stage[0] == "fc":
                entry = stage[1]
                ntr = rng.randint(1, 3)
                for j in range(ntr):
                    t = new_transition()
                    for p in entry:
                        consume[(p, t)] = 1
                    # occasionally underfill a following asymmetric choice
                    if nxt[0] == "ac" and ntr > 1 and j == ntr - 1 \
                            and rng.random() < 0.4:
                        produce[(t, nxt[1])] = 1
                    else:
                        for p in targets:
                            produce[(t, p)] = 1
            else:
                _, q, x = stage
                for _ in range(rng.randint(1, 2)):
                    u = new_transition()
                    consume[(q, u)] = 1
                    produce[(u, q)] = 1
                for _ in range(rng.randint(1, 2)):
                    w = new_transition()
                    consume[(q, w)] = 1
                    consume[(x, w)] = 1
                    for p in targets:
                        produce[(w, p)] = 1
        first = stages[0]
        marked = [first[1], first[2]] if first[0] == "ac" else first[1]
        for p in marked:
            tokens[p] = 1

    net = PetriNet(places=tuple(place_names), transitions=tuple(trans_names),
                   consume=consume, produce=produce, m0=tuple(tokens))
    flags = classify_net(net)
    assert flags.brac and flags.plain
    return net
