"""Petri nets: firing, bounded reachability graphs, structural class
predicates, LTS isomorphism, text format and dot rendering.

The `.pn` text format: `#` comments, `place <name> <tokens>`,
`transition <name>`, `arc <from> <to> [weight]` with the direction inferred
from the endpoint kinds and a default weight of one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from netsynth.lts import Lts
from netsynth.separation import PlaceSpec

_NAME = re.compile(r"[A-Za-z0-9_]+$")

Marking = tuple[int, ...]


class PetriNetError(Exception):
    """Malformed `.pn` input or firing precondition violation."""


class CapExceeded(Exception):
    """Reachability graph generation hit the marking cap."""

    def __init__(self, cap: int):
        super().__init__(f"more than {cap} reachable markings")
        self.cap = cap


@dataclass(frozen=True)
class PetriNet:
    """Initially marked net with weighted arcs.

    ``consume[(p, t)]`` and ``produce[(t, p)]`` hold positive arc weights
    (absent pairs weigh zero); ids are unique across places and
    transitions.
    """

    places: tuple[str, ...]
    transitions: tuple[str, ...]
    consume: dict[tuple[int, int], int]
    produce: dict[tuple[int, int], int]
    m0: Marking

    def __post_init__(self):
        if set(self.places) & set(self.transitions):
            raise PetriNetError("place and transition names overlap")
        if len(self.m0) != len(self.places):
            raise PetriNetError("initial marking size mismatch")
        for w in list(self.consume.values()) + list(self.produce.values()):
            if w <= 0:
                raise PetriNetError("arc weights must be positive")

    def w_in(self, p: int, t: int) -> int:
        return self.consume.get((p, t), 0)

    def w_out(self, t: int, p: int) -> int:
        return self.produce.get((t, p), 0)

    @cached_property
    def preset_of_transition(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in self.transitions]
        for (p, t) in self.consume:
            out[t].add(p)
        return tuple(frozenset(x) for x in out)

    @cached_property
    def postset_of_place(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in self.places]
        for (p, t) in self.consume:
            out[p].add(t)
        return tuple(frozenset(x) for x in out)

    @cached_property
    def producers_of_place(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in self.places]
        for (t, p) in self.produce:
            out[p].add(t)
        return tuple(frozenset(x) for x in out)

    def enabled(self, m: Marking, t: int) -> bool:
        return all(m[p] >= w for (p, tt), w in self.consume.items()
                   if tt == t)


def fire(net: PetriNet, m: Marking, t: int) -> Marking:
    """Fire transition ``t``; raises naming the first blocking place."""
    for p in range(len(net.places)):
        if m[p] < net.w_in(p, t):
            raise PetriNetError(
                f"transition {net.transitions[t]!r} not enabled: place "
                f"{net.places[p]!r} holds {m[p]} < {net.w_in(p, t)}")
    return tuple(m[p] - net.w_in(p, t) + net.w_out(t, p)
                 for p in range(len(net.places)))


def reachability_graph(net: PetriNet, cap: int = 100_000) -> Lts:
    """Breadth-first marking exploration up to ``cap`` distinct markings.

    States are named m0, m1, ... in discovery order, making the result
    stable for isomorphism checks; labels are the transitions that actually
    fire, in first-firing order.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    index: dict[Marking, int] = {net.m0: 0}
    order: list[Marking] = [net.m0]
    edges: list[tuple[int, int, int]] = []
    labels: dict[int, int] = {}
    head = 0
    while head < len(order):
        m = order[head]
        s = index[m]
        head += 1
        for t in range(len(net.transitions)):
            if not net.enabled(m, t):
                continue
            m2 = fire(net, m, t)
            if m2 not in index:
                if len(order) >= cap:
                    raise CapExceeded(cap)
                index[m2] = len(order)
                order.append(m2)
            if t not in labels:
                labels[t] = len(labels)
            edges.append((s, labels[t], index[m2]))
    return Lts(states=tuple(f"m{i}" for i in range(len(order))),
               labels=tuple(net.transitions[t] for t in labels),
               edges=tuple(edges),
               initial=0)


@dataclass(frozen=True)
class NetClass:
    """Structural class flags of one net."""

    plain: bool
    mg: bool
    cf: bool
    ec: bool
    efc: bool
    wpi: bool
    wac: bool
    ac: bool
    rac: bool
    brac: bool

    def flags(self) -> set[str]:
        return {name.upper() for name, val in self.__dict__.items() if val}

    def has(self, name: str) -> bool:
        return getattr(self, name.lower())


def _comparable(u: tuple[int, ...], v: tuple[int, ...]) -> bool:
    return all(a <= b for a, b in zip(u, v)) or \
        all(a >= b for a, b in zip(u, v))


def classify_net(net: PetriNet) -> NetClass:
    """Evaluate every class predicate by direct quantification.

    Marked graphs follow the standard definition: plain with at most one
    consumer and one producer per place.
    """
    np_, nt = len(net.places), len(net.transitions)
    col = [tuple(net.w_in(p, t) for p in range(np_)) for t in range(nt)]
    row = [tuple(net.w_in(p, t) for t in range(nt)) for p in range(np_)]
    tpre = net.preset_of_transition
    ppost = net.postset_of_place

    plain = all(w <= 1 for w in net.consume.values()) and \
        all(w <= 1 for w in net.produce.values())
    cf = all(len(ppost[p]) <= 1 for p in range(np_))
    mg = plain and cf and \
        all(len(net.producers_of_place[p]) <= 1 for p in range(np_))

    ec = wpi = True
    for t in range(nt):
        for u in range(t + 1, nt):
            if tpre[t] & tpre[u]:
                if col[t] != col[u]:
                    ec = False
                if not _comparable(col[t], col[u]):
                    wpi = False
    efc = ec and plain

    wac = True
    for p in range(np_):
        for q in range(p + 1, np_):
            if ppost[p] & ppost[q] and not _comparable(row[p], row[q]):
                wac = False
    ac = wac and plain

    def n_block(p: int, q: int) -> bool:
        # postset of p is t-block T1, q additionally feeds T1 and owns T2
        t1 = ppost[p]
        t2 = ppost[q] - t1
        if not t1 <= ppost[q]:
            return False
        return all(tpre[t] == {p, q} for t in t1) and \
            all(tpre[t] == {q} for t in t2)

    rac = plain
    brac = plain
    for p in range(np_):
        for q in range(p + 1, np_):
            if not ppost[p] & ppost[q]:
                continue
            a = len(ppost[p]) == 1 and len(ppost[q]) <= 2 and \
                frozenset().union(*(tpre[t] for t in ppost[q])) == {p, q}
            b = len(ppost[q]) == 1 and len(ppost[p]) <= 2 and \
                frozenset().union(*(tpre[t] for t in ppost[p])) == {p, q}
            if not (a or b):
                rac = False
            if not (ppost[p] == ppost[q] or n_block(p, q) or n_block(q, p)):
                brac = False
    rac = rac and plain
    brac = brac and plain
    return NetClass(plain=plain, mg=mg, cf=cf, ec=ec, efc=efc, wpi=wpi,
                    wac=wac, ac=ac, rac=rac, brac=brac)


@dataclass(frozen=True)
class Mismatch:
    """First divergence found while pairing two transition systems."""

    reason: str
    state_pair: Optional[tuple[int, int]] = None
    label: Optional[str] = None


def isomorphic(lts: Lts, other: Lts) -> dict[int, int] | Mismatch:
    """Forced bijection between two deterministic reachable systems.

    A parallel breadth-first walk from the initial states either yields the
    unique candidate bijection or the first divergent (state, label).
    """
    if set(lts.labels) != set(other.labels):
        return Mismatch("label sets differ")
    mapping = {lts.initial: other.initial}
    queue = [(lts.initial, other.initial)]
    head = 0
    relabel = {name: i for i, name in enumerate(other.labels)}
    while head < len(queue):
        s1, s2 = queue[head]
        head += 1
        en1 = {lts.labels[t] for t in lts.enabled[s1]}
        en2 = {other.labels[t] for t in other.enabled[s2]}
        if en1 != en2:
            diff = sorted((en1 ^ en2))[0]
            return Mismatch("enabled labels differ", (s1, s2), diff)
        for name in sorted(en1):
            t1 = lts.labels.index(name)
            n1 = lts.successor[(s1, t1)]
            n2 = other.successor[(s2, relabel[name])]
            if n1 in mapping:
                if mapping[n1] != n2:
                    return Mismatch("states identified differently",
                                    (s1, s2), name)
            elif n2 in mapping.values():
                return Mismatch("target already paired", (s1, s2), name)
            else:
                mapping[n1] = n2
                queue.append((n1, n2))
    if len(mapping) != len(lts.states) or len(mapping) != len(other.states):
        return Mismatch("state counts differ")
    return mapping


def net_from_regions(labels: tuple[str, ...],
                     places: list[PlaceSpec]) -> PetriNet:
    """Assemble a net with one transition per label and one place per spec."""
    consume: dict[tuple[int, int], int] = {}
    produce: dict[tuple[int, int], int] = {}
    names = []
    for i, spec in enumerate(places):
        names.append(f"p{i + 1}")
        for t, w in enumerate(spec.consume):
            if w > 0:
                consume[(i, t)] = w
        for t, w in enumerate(spec.produce):
            if w > 0:
                produce[(t, i)] = w
    return PetriNet(places=tuple(names), transitions=tuple(labels),
                    consume=consume, produce=produce,
                    m0=tuple(spec.tokens for spec in places))


def parse_net(text: str | bytes) -> PetriNet:
    """Parse the `.pn` line format; errors carry line numbers."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    places: dict[str, int] = {}
    tokens: list[int] = []
    transitions: dict[str, int] = {}
    consume: dict[tuple[int, int], int] = {}
    produce: dict[tuple[int, int], int] = {}

    def check_name(name: str, lineno: int) -> None:
        if not _NAME.match(name):
            raise PetriNetError(f"line {lineno}: bad name {name!r}")

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "place":
            if len(parts) != 3 or not parts[2].isdigit():
                raise PetriNetError(f"line {lineno}: expected "
                                    "'place <name> <tokens>'")
            check_name(parts[1], lineno)
            if parts[1] in places or parts[1] in transitions:
                raise PetriNetError(f"line {lineno}: duplicate id "
                                    f"{parts[1]!r}")
            places[parts[1]] = len(places)
            tokens.append(int(parts[2]))
        elif kind == "transition":
            if len(parts) != 2:
                raise PetriNetError(f"line {lineno}: expected "
                                    "'transition <name>'")
            check_name(parts[1], lineno)
            if parts[1] in places or parts[1] in transitions:
                raise PetriNetError(f"line {lineno}: duplicate id "
                                    f"{parts[1]!r}")
            transitions[parts[1]] = len(transitions)
        elif kind == "arc":
            if len(parts) not in (3, 4):
                raise PetriNetError(f"line {lineno}: expected "
                                    "'arc <from> <to> [weight]'")
            weight = 1
            if len(parts) == 4:
                if not parts[3].isdigit() or int(parts[3]) < 1:
                    raise PetriNetError(f"line {lineno}: bad weight "
                                        f"{parts[3]!r}")
                weight = int(parts[3])
            src, dst = parts[1], parts[2]
            if src in places and dst in transitions:
                key = (places[src], transitions[dst])
                if key in consume:
                    raise PetriNetError(f"line {lineno}: duplicate arc")
                consume[key] = weight
            elif src in transitions and dst in places:
                key = (transitions[src], places[dst])
                if key in produce:
                    raise PetriNetError(f"line {lineno}: duplicate arc")
                produce[key] = weight
            else:
                raise PetriNetError(f"line {lineno}: arc endpoints must be "
                                    "one known place and one known "
                                    "transition")
        else:
            raise PetriNetError(f"line {lineno}: unknown directive "
                                f"{kind!r}")
    return PetriNet(places=tuple(places), transitions=tuple(transitions),
                    consume=consume, produce=produce, m0=tuple(tokens))


def serialize_net(net: PetriNet) -> str:
    lines = []
    for p, name in enumerate(net.places):
        lines.append(f"place {name} {net.m0[p]}")
    for name in net.transitions:
        lines.append(f"transition {name}")
    for (p, t), w in sorted(net.consume.items()):
        suffix = f" {w}" if w != 1 else ""
        lines.append(f"arc {net.places[p]} {net.transitions[t]}{suffix}")
    for (t, p), w in sorted(net.produce.items()):
        suffix = f" {w}" if w != 1 else ""
        lines.append(f"arc {net.transitions[t]} {net.places[p]}{suffix}")
    return "\n".join(lines) + "\n"


def render_dot(net: PetriNet) -> str:
    """Graphviz digraph: circles for places (with token counts), boxes for
    transitions, weight labels on arcs heavier than one."""
    out = ["digraph net {", "  rankdir=LR;"]
    for p, name in enumerate(net.places):
        label = name if net.m0[p] == 0 else f"{name}\\n{net.m0[p]}"
        out.append(f'  "{name}" [shape=circle, label="{label}"];')
    for name in net.transitions:
        out.append(f'  "{name}" [shape=box];')
    for (p, t), w in sorted(net.consume.items()):
        attr = f' [label="{w}"]' if w > 1 else ""
        out.append(f'  "{net.places[p]}" -> "{net.transitions[t]}"{attr};')
    for (t, p), w in sorted(net.produce.items()):
        attr = f' [label="{w}"]' if w > 1 else ""
        out.append(f'  "{net.transitions[t]}" -> "{net.places[p]}"{attr};')
    out.append("}")
    return "\n".join(out) + "\n"
