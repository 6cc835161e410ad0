"""Labelled transition systems: parsing, validation, spanning trees,
Parikh vectors and cycle bases.

The `.lts` text format: `#` starts a comment, one `initial <state>` header,
one `<src> <label> <dst>` line per edge.  Names match ``[A-Za-z0-9_]+``;
states and labels are declared implicitly, in first-appearance order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional

_NAME = re.compile(r"[A-Za-z0-9_]+$")


class LtsError(Exception):
    """Raised for malformed `.lts` input or precondition violations."""


@dataclass(frozen=True)
class ParikhVector:
    """Label multiplicities of a word, state walk or edge.

    Entries may be negative (chords); absent labels read as zero.
    Comparisons are componentwise, `lneq` meaning "less or equal in all
    components but not equal".
    """

    counts: tuple[tuple[int, int], ...] = ()

    @staticmethod
    def of(mapping: dict[int, int]) -> "ParikhVector":
        return ParikhVector(tuple(sorted((k, v) for k, v in mapping.items()
                                         if v != 0)))

    @staticmethod
    def unit(label: int) -> "ParikhVector":
        return ParikhVector(((label, 1),))

    def to_dict(self) -> dict[int, int]:
        return dict(self.counts)

    def __getitem__(self, label: int) -> int:
        return self.to_dict().get(label, 0)

    def __add__(self, other: "ParikhVector") -> "ParikhVector":
        out = self.to_dict()
        for k, v in other.counts:
            out[k] = out.get(k, 0) + v
        return ParikhVector.of(out)

    def __sub__(self, other: "ParikhVector") -> "ParikhVector":
        out = self.to_dict()
        for k, v in other.counts:
            out[k] = out.get(k, 0) - v
        return ParikhVector.of(out)

    def is_zero(self) -> bool:
        return not self.counts

    def leq(self, other: "ParikhVector") -> bool:
        rhs = other.to_dict()
        lhs = self.to_dict()
        keys = set(lhs) | set(rhs)
        return all(lhs.get(k, 0) <= rhs.get(k, 0) for k in keys)

    def lneq(self, other: "ParikhVector") -> bool:
        return self.leq(other) and self != other


@dataclass(frozen=True)
class Lts:
    """Finite labelled transition system with an initial state.

    States, labels and edges are interned to dense indices in
    first-appearance order; all iteration is in index order.  Instances are
    immutable and safe to share.
    """

    states: tuple[str, ...]
    labels: tuple[str, ...]
    edges: tuple[tuple[int, int, int], ...]
    initial: int

    def __post_init__(self):
        n, m = len(self.states), len(self.labels)
        if not (0 <= self.initial < n):
            raise LtsError("initial state out of range")
        for s, t, s2 in self.edges:
            if not (0 <= s < n and 0 <= s2 < n and 0 <= t < m):
                raise LtsError(f"edge ({s},{t},{s2}) out of range")

    @cached_property
    def out_edges(self) -> tuple[tuple[tuple[int, int, int], ...], ...]:
        out: list[list[tuple[int, int, int]]] = [[] for _ in self.states]
        for e in self.edges:
            out[e[0]].append(e)
        return tuple(tuple(es) for es in out)

    @cached_property
    def enabled(self) -> tuple[frozenset[int], ...]:
        """Per state, the set of labels with an outgoing edge."""
        return tuple(frozenset(t for _, t, _ in es) for es in self.out_edges)

    @cached_property
    def enabled_states(self) -> tuple[frozenset[int], ...]:
        """Per label, the set of states enabling it."""
        out: list[set[int]] = [set() for _ in self.labels]
        for s, t, _ in self.edges:
            out[t].add(s)
        return tuple(frozenset(x) for x in out)

    @cached_property
    def successor(self) -> dict[tuple[int, int], int]:
        """(state, label) -> target; last edge wins if nondeterministic."""
        return {(s, t): s2 for s, t, s2 in self.edges}

    @cached_property
    def self_loop_labels(self) -> frozenset[int]:
        return frozenset(t for s, t, s2 in self.edges if s == s2)

    def state_name(self, s: int) -> str:
        return self.states[s]

    def label_name(self, t: int) -> str:
        return self.labels[t]


@dataclass(frozen=True)
class ValidationReport:
    deterministic: bool
    nondeterministic_witness: Optional[tuple[tuple[int, int, int],
                                             tuple[int, int, int]]]
    reachable: bool
    unreachable_states: tuple[int, ...]
    self_loop_labels: frozenset[int]

    @property
    def ok(self) -> bool:
        return self.deterministic and self.reachable


@dataclass(frozen=True)
class SpanningTree:
    """BFS spanning tree with per-state Parikh vectors of the tree walks.

    ``parent`` maps every non-initial state to its (parent, label) tree
    edge; following parents always reaches the initial state.
    """

    lts: Lts
    parent: dict[int, tuple[int, int]]
    parikh: tuple[ParikhVector, ...]

    def is_tree_edge(self, edge: tuple[int, int, int]) -> bool:
        s, t, s2 = edge
        return s2 != self.lts.initial and self.parent.get(s2) == (s, t)

    def chords(self) -> list[tuple[int, int, int]]:
        return [e for e in self.lts.edges if not self.is_tree_edge(e)]


def parse_lts(text: str | bytes) -> Lts:
    """Parse the `.lts` line format.

    Raises `LtsError` with a line number on syntax errors, duplicate edges
    and missing/duplicate `initial` headers.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    state_ids: dict[str, int] = {}
    label_ids: dict[str, int] = {}
    edges: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int, int]] = set()
    initial: Optional[int] = None

    def intern(table: dict[str, int], name: str, lineno: int) -> int:
        if not _NAME.match(name):
            raise LtsError(f"line {lineno}: bad name {name!r}")
        if name not in table:
            table[name] = len(table)
        return table[name]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "initial":
            if len(parts) != 2:
                raise LtsError(f"line {lineno}: malformed initial header")
            if initial is not None:
                raise LtsError(f"line {lineno}: duplicate initial header")
            initial = intern(state_ids, parts[1], lineno)
        elif len(parts) == 3:
            src = intern(state_ids, parts[0], lineno)
            lab = intern(label_ids, parts[1], lineno)
            dst = intern(state_ids, parts[2], lineno)
            edge = (src, lab, dst)
            if edge in seen:
                raise LtsError(f"line {lineno}: duplicate edge {line!r}")
            seen.add(edge)
            edges.append(edge)
        else:
            raise LtsError(f"line {lineno}: expected 'src label dst'")
    if initial is None:
        raise LtsError("missing 'initial <state>' header")
    return Lts(states=tuple(state_ids),
               labels=tuple(label_ids),
               edges=tuple(edges),
               initial=initial)


def serialize_lts(lts: Lts) -> str:
    lines = [f"initial {lts.states[lts.initial]}"]
    for s, t, s2 in lts.edges:
        lines.append(f"{lts.states[s]} {lts.labels[t]} {lts.states[s2]}")
    return "\n".join(lines) + "\n"


def validate(lts: Lts) -> ValidationReport:
    """Check determinism and reachability; collect self-loop labels.

    Findings are reported, never raised.
    """
    witness = None
    seen: dict[tuple[int, int], tuple[int, int, int]] = {}
    for e in lts.edges:
        key = (e[0], e[1])
        if key in seen and seen[key] != e:
            witness = (seen[key], e)
            break
        seen[key] = e
    reached = {lts.initial}
    frontier = [lts.initial]
    while frontier:
        s = frontier.pop()
        for _, _, s2 in lts.out_edges[s]:
            if s2 not in reached:
                reached.add(s2)
                frontier.append(s2)
    unreachable = tuple(s for s in range(len(lts.states)) if s not in reached)
    return ValidationReport(
        deterministic=witness is None,
        nondeterministic_witness=witness,
        reachable=not unreachable,
        unreachable_states=unreachable,
        self_loop_labels=lts.self_loop_labels,
    )


def spanning_tree(lts: Lts) -> SpanningTree:
    """BFS spanning tree from the initial state.

    Among candidate edges into a newly discovered state, the one with the
    smallest (source index, label index) wins, so the tree and everything
    derived from it is reproducible.
    """
    parent: dict[int, tuple[int, int]] = {}
    depth = {lts.initial: 0}
    frontier = [lts.initial]
    while frontier:
        discovered: dict[int, tuple[int, int]] = {}
        for s in sorted(frontier):
            for _, t, s2 in sorted(lts.out_edges[s], key=lambda e: e[1]):
                if s2 in depth:
                    continue
                if s2 not in discovered or (s, t) < discovered[s2]:
                    discovered[s2] = (s, t)
        for s2 in discovered:
            depth[s2] = depth[discovered[s2][0]] + 1
        parent.update(discovered)
        frontier = sorted(discovered)
    missing = [s for s in range(len(lts.states)) if s not in depth]
    if missing:
        raise LtsError(f"unreachable state {lts.states[missing[0]]!r}; "
                       "validate the LTS first")
    parikh: list[Optional[ParikhVector]] = [None] * len(lts.states)
    parikh[lts.initial] = ParikhVector()
    order = sorted(depth, key=lambda s: depth[s])
    for s in order:
        if s == lts.initial:
            continue
        p, t = parent[s]
        assert parikh[p] is not None
        parikh[s] = parikh[p] + ParikhVector.unit(t)
    return SpanningTree(lts=lts, parent=parent,
                        parikh=tuple(parikh))  # type: ignore[arg-type]


def parikh_of_state(tree: SpanningTree, state: int) -> ParikhVector:
    """Parikh vector of the unique tree walk to ``state``."""
    return tree.parikh[state]


def parikh_of_edge(tree: SpanningTree, edge: tuple[int, int, int]) -> ParikhVector:
    """``psi(s) + 1t - psi(s')`` for the edge ``s [t> s'``.

    Tree edges evaluate to the zero vector; chord entries may be negative.
    """
    s, t, s2 = edge
    return tree.parikh[s] + ParikhVector.unit(t) - tree.parikh[s2]


def _canonical_int_vector(row: list[Fraction], nlabels: int) -> ParikhVector:
    from math import gcd, lcm
    denom = lcm(*(x.denominator for x in row), 1)
    ints = [int(x * denom) for x in row]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    lead = next((v for v in ints if v != 0), 1)
    if lead < 0:
        ints = [-v for v in ints]
    return ParikhVector.of({i: v for i, v in enumerate(ints) if v != 0})


def cycle_basis(lts: Lts, tree: SpanningTree) -> list[ParikhVector]:
    """Integer basis of the span of all chord Parikh vectors.

    Computed by exact rational Gaussian elimination (reduced row echelon
    form, which is canonical for the spanned space) and scaled to coprime
    integer vectors with positive leading entry.  Size is at most the
    number of labels; every cycle of the LTS has a Parikh vector in the
    span.
    """
    nlab = len(lts.labels)
    rows: list[list[Fraction]] = []
    for chord in tree.chords():
        vec = parikh_of_edge(tree, chord)
        if vec.is_zero():
            continue
        dense = [Fraction(0)] * nlab
        for k, v in vec.counts:
            dense[k] = Fraction(v)
        rows.append(dense)
    # reduced row echelon form
    pivot_cols: list[int] = []
    r = 0
    for col in range(nlab):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0),
                     None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        factor = rows[r][col]
        rows[r] = [x / factor for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivot_cols.append(col)
        r += 1
        if r == len(rows):
            break
    return [_canonical_int_vector(rows[i], nlab) for i in range(r)]
