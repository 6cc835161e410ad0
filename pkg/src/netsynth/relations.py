"""Label relations over an LTS and the preset-relation calculus.

For every label pair the enabledness relation (equivalent / one-implies-the-
other / mutually non-implying) combines with the deactivation property into
six cases that fix the preset relation of the two transitions in any
comparable-preset net: identical, properly included, disjoint, or, for
self-loops, an unresolved "disjoint or included" (doi) edge.

Triangle rules then strengthen doi edges: some configurations force
disjointness, some force inclusion, and some are contradictory, failing the
synthesis outright.  Targeting block-reduced asymmetric choice adds rules:
no label may sit on two inclusion edges, a doi edge at an inclusion-incident
label means disjointness, and the front edge of a doi chain means
disjointness.  Residual doi edges are settled by feasibility probing plus a
maximum bipartite matching.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from netsynth.lts import Lts

# pair kinds (enabledness relation of an ordered pair)
EQUIV = "equiv"
A_GTR_B = "a_gtr_b"
B_GTR_A = "b_gtr_a"
INTERLEAVE = "interleave"

# graph edge kinds per unordered pair
EQUIVALENT = "equivalent"
DISJOINT = "disjoint"
INCLUDED = "included"   # preset of lo strictly below preset of hi
DOI = "doi"             # lo is a self-loop; disjoint from hi or below it

ORIGINAL = "original"
STRENGTHENED = "strengthened"
FORCED = "forced"

# oriented codes of a pair (x, c) as seen from x
_NONE = 0
_INC_TO = 1     # x included in c
_INC_FROM = 2   # c included in x
_DOI_TO = 3     # doi(x, c)
_DOI_FROM = 4   # doi(c, x)

_CONTRA = "contra"
_TO_DISJOINT = "disjoint"
_TO_INCLUDED = "included"

# Triangle rule table over a doi edge (lo, hi) and a third label c, keyed by
# (code of (lo, c), code of (hi, c)).  Entries: (config number, action,
# needs_original_solid).  Deactivation-based rules (17, 22, 23) only fire
# when the solid edge at lo arose from an actual merge pair; otherwise the
# conclusion re-emerges from the triangles that produced the strengthened
# edge.
_TRIANGLE: dict[tuple[int, int], tuple[int, Optional[str], bool]] = {
    (_NONE, _NONE): (1, None, False),
    (_INC_TO, _NONE): (2, _TO_DISJOINT, False),
    (_INC_FROM, _NONE): (3, _TO_DISJOINT, False),
    (_DOI_TO, _NONE): (4, None, False),
    (_DOI_FROM, _NONE): (5, None, False),
    (_NONE, _INC_TO): (6, _TO_DISJOINT, False),
    (_INC_TO, _INC_TO): (7, None, False),
    (_INC_FROM, _INC_TO): (8, _CONTRA, False),
    (_DOI_TO, _INC_TO): (9, None, False),
    (_DOI_FROM, _INC_TO): (10, _CONTRA, False),
    (_NONE, _INC_FROM): (11, None, False),
    (_INC_TO, _INC_FROM): (12, _TO_INCLUDED, False),
    (_INC_FROM, _INC_FROM): (13, _TO_INCLUDED, False),
    (_DOI_TO, _INC_FROM): (14, None, False),
    (_DOI_FROM, _INC_FROM): (15, None, False),
    (_NONE, _DOI_TO): (16, None, False),
    (_INC_TO, _DOI_TO): (17, _TO_DISJOINT, True),
    (_INC_FROM, _DOI_TO): (18, _CONTRA, False),
    (_DOI_TO, _DOI_TO): (19, None, False),
    (_DOI_FROM, _DOI_TO): (20, _CONTRA, False),
    (_NONE, _DOI_FROM): (21, None, False),
    (_INC_TO, _DOI_FROM): (22, _CONTRA, True),
    (_INC_FROM, _DOI_FROM): (23, _CONTRA, True),
    (_DOI_TO, _DOI_FROM): (24, None, False),
    (_DOI_FROM, _DOI_FROM): (25, None, False),
}


@dataclass(frozen=True)
class PairRelation:
    """Enabledness kind plus deactivation flag of an ordered label pair."""

    kind: str
    merge: bool


@dataclass(frozen=True)
class Contradiction:
    """Witness that no target-class net can solve the LTS."""

    labels: tuple[int, ...]
    rule: str
    detail: str = ""


@dataclass(frozen=True)
class Edge:
    kind: str
    lo: int
    hi: int
    origin: str = ORIGINAL
    # triangle (third label, config number) that strengthened a doi edge
    provenance: Optional[tuple[int, int]] = None


@dataclass
class RelationGraph:
    """Preset relations between (representative) labels.

    ``edges`` maps each unordered pair (i < j) to its edge; ``rep`` maps
    every original label to its equivalence-class representative and
    ``classes`` lists class members per representative.
    """

    names: tuple[str, ...]
    nodes: tuple[int, ...]
    edges: dict[tuple[int, int], Edge]
    rep: dict[int, int] = field(default_factory=dict)
    classes: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.rep:
            self.rep = {n: n for n in self.nodes}
        if not self.classes:
            self.classes = {n: (n,) for n in self.nodes}

    def copy(self) -> "RelationGraph":
        return RelationGraph(self.names, self.nodes, dict(self.edges),
                             dict(self.rep),
                             {k: tuple(v) for k, v in self.classes.items()})

    def edge(self, a: int, b: int) -> Edge:
        return self.edges[(a, b) if a < b else (b, a)]

    def set_edge(self, a: int, b: int, edge: Edge) -> None:
        self.edges[(a, b) if a < b else (b, a)] = edge

    def code_from(self, x: int, c: int) -> int:
        """Oriented relation code of the pair (x, c) as seen from x."""
        e = self.edge(x, c)
        if e.kind == DISJOINT:
            return _NONE
        if e.kind == INCLUDED:
            return _INC_TO if e.lo == x else _INC_FROM
        if e.kind == DOI:
            return _DOI_TO if e.lo == x else _DOI_FROM
        raise ValueError(f"unexpected edge kind {e.kind} between "
                         f"{self.names[x]} and {self.names[c]}")

    def doi_edges(self) -> list[tuple[int, int]]:
        """Doi edges as (lo, hi) pairs, sorted; lo is the self-loop."""
        return sorted((e.lo, e.hi) for e in self.edges.values()
                      if e.kind == DOI)

    def included_edges(self) -> list[tuple[int, int]]:
        """Inclusion edges as (lo, hi) pairs, sorted."""
        return sorted((e.lo, e.hi) for e in self.edges.values()
                      if e.kind == INCLUDED)

    def label(self, i: int) -> str:
        return self.names[i]


def pair_relation(lts: Lts, a: int, b: int) -> PairRelation:
    """Enabledness relation and deactivation flag of labels ``a`` and ``b``.

    Computed by a direct scan of the per-state enabled-label sets.
    """
    if a == b:
        raise ValueError("pair relation requires two distinct labels")
    ea, eb = lts.enabled_states[a], lts.enabled_states[b]
    if ea == eb:
        kind = EQUIV
    elif ea < eb:
        kind = A_GTR_B
    elif eb < ea:
        kind = B_GTR_A
    else:
        kind = INTERLEAVE
    merge = False
    for s in ea & eb:
        sa = lts.successor[(s, a)]
        sb = lts.successor[(s, b)]
        if a not in lts.enabled[sb] or b not in lts.enabled[sa]:
            merge = True
            break
    return PairRelation(kind, merge)


def classify_case(rel: PairRelation) -> int:
    """Map a pair relation to its case number 1..6."""
    if rel.kind == INTERLEAVE:
        return 1 if rel.merge else 2
    if rel.kind == EQUIV:
        return 3 if rel.merge else 4
    return 5 if rel.merge else 6


def build_relation_graph(lts: Lts) -> RelationGraph | Contradiction:
    """Derive the preset-relation edge for every label pair.

    Deactivating non-comparable labels (case 1) are an immediate
    contradiction.  In case 6 the more broadly enabled label must be a
    self-loop for the unresolved doi edge to exist; otherwise the presets
    are disjoint.
    """
    n = len(lts.labels)
    edges: dict[tuple[int, int], Edge] = {}
    for a in range(n):
        for b in range(a + 1, n):
            rel = pair_relation(lts, a, b)
            case = classify_case(rel)
            if case == 1:
                return Contradiction((a, b), "deactivating-interleave",
                                     f"labels {lts.labels[a]} and "
                                     f"{lts.labels[b]} deactivate each other "
                                     "but are enabled independently")
            if case == 2:
                edges[(a, b)] = Edge(DISJOINT, a, b)
            elif case in (3, 4):
                edges[(a, b)] = Edge(EQUIVALENT, a, b)
            elif case == 5:
                # x > y means x is enabled strictly less often and needs the
                # larger preset; the smaller-preset label is lo.
                lo, hi = (b, a) if rel.kind == A_GTR_B else (a, b)
                edges[(a, b)] = Edge(INCLUDED, lo, hi)
            else:
                wide = b if rel.kind == A_GTR_B else a
                narrow = a if rel.kind == A_GTR_B else b
                if wide in lts.self_loop_labels:
                    edges[(a, b)] = Edge(DOI, wide, narrow)
                else:
                    edges[(a, b)] = Edge(DISJOINT, a, b)
    return RelationGraph(lts.labels, tuple(range(n)), edges)


_COMPATIBLE = {
    frozenset({_NONE}): _NONE,
    frozenset({_NONE, _DOI_TO}): _NONE,
    frozenset({_NONE, _DOI_FROM}): _NONE,
    frozenset({_NONE, _DOI_TO, _DOI_FROM}): _NONE,
    frozenset({_INC_TO}): _INC_TO,
    frozenset({_INC_TO, _DOI_TO}): _INC_TO,
    frozenset({_INC_FROM}): _INC_FROM,
    frozenset({_INC_FROM, _DOI_FROM}): _INC_FROM,
    frozenset({_DOI_TO}): _DOI_TO,
    frozenset({_DOI_FROM}): _DOI_FROM,
}


def quotient_by_equivalence(graph: RelationGraph) \
        -> tuple[RelationGraph, dict[int, int]] | Contradiction:
    """Collapse equivalence classes to one representative each.

    Within a class, members must relate identically to every outside label
    once their doi edges are strengthened towards any resolved member edge;
    irreconcilable member edges are a contradiction.  A member carrying an
    original inclusion edge is preferred as representative so deactivation
    arguments stay applicable.
    """
    g = graph.copy()
    parent = {n: n for n in g.nodes}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (a, b), e in sorted(g.edges.items()):
        if e.kind == EQUIVALENT:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    classes: dict[int, list[int]] = {}
    for n in g.nodes:
        classes.setdefault(find(n), []).append(n)

    reps: dict[int, int] = {}
    for root, members in sorted(classes.items()):
        withinc = [m for m in members
                   if any(e.kind == INCLUDED and e.origin == ORIGINAL
                          and m in (e.lo, e.hi)
                          for key, e in g.edges.items() if m in key)]
        rep = min(withinc) if withinc else min(members)
        for m in members:
            reps[m] = rep

    # reconcile member edges towards every outside class
    roots = sorted(set(reps.values()))
    for ra in roots:
        members_a = sorted(m for m in g.nodes if reps[m] == ra)
        for rb in roots:
            if rb <= ra:
                continue
            members_b = sorted(m for m in g.nodes if reps[m] == rb)
            codes = {}
            for x in members_a:
                for y in members_b:
                    codes[(x, y)] = g.code_from(x, y)
            combo = frozenset(codes.values())
            if combo not in _COMPATIBLE:
                return Contradiction(
                    (ra, rb), "equivalence-conflict",
                    "equivalent labels relate differently to "
                    f"{graph.names[rb]}")
            target = _COMPATIBLE[combo]
            original = any(
                g.edge(x, y).origin == ORIGINAL
                and g.code_from(x, y) == target
                for (x, y) in codes)
            origin = ORIGINAL if original else STRENGTHENED
            if target == _NONE:
                edge = Edge(DISJOINT, ra, rb, origin)
            elif target == _INC_TO:
                edge = Edge(INCLUDED, ra, rb, origin)
            elif target == _INC_FROM:
                edge = Edge(INCLUDED, rb, ra, origin)
            elif target == _DOI_TO:
                edge = Edge(DOI, ra, rb, origin)
            else:
                edge = Edge(DOI, rb, ra, origin)
            g.set_edge(ra, rb, edge)

    nodes = tuple(roots)
    edges = {(a, b): g.edges[(a, b)] for a in nodes for b in nodes
             if a < b}
    members = {r: tuple(sorted(m for m in g.nodes if reps[m] == r))
               for r in roots}
    out = RelationGraph(g.names, nodes, edges, dict(reps), members)
    return out, dict(reps)


def _find_contradiction(g: RelationGraph, brac: bool) -> Optional[Contradiction]:
    if brac:
        incident: dict[int, tuple[int, int]] = {}
        for lo, hi in g.included_edges():
            for x in (lo, hi):
                if x in incident and incident[x] != (lo, hi):
                    return Contradiction(
                        (x,) + incident[x] + (lo, hi), "shared-inclusion",
                        f"label {g.names[x]} sits on two preset inclusions, "
                        "impossible with one- or two-place presets")
                incident[x] = (lo, hi)
    for lo, hi in g.doi_edges():
        for c in g.nodes:
            if c in (lo, hi):
                continue
            key = (g.code_from(lo, c), g.code_from(hi, c))
            config, action, needs_original = _TRIANGLE[key]
            if action != _CONTRA:
                continue
            if needs_original and g.edge(lo, c).origin != ORIGINAL:
                continue
            return Contradiction((lo, hi, c), f"triangle-{config}",
                                 f"doi edge {g.names[lo]}->{g.names[hi]} "
                                 f"with third label {g.names[c]}")
    return None


def _apply_one_resolution(g: RelationGraph, brac: bool) -> bool:
    for lo, hi in g.doi_edges():
        for c in g.nodes:
            if c in (lo, hi):
                continue
            key = (g.code_from(lo, c), g.code_from(hi, c))
            config, action, needs_original = _TRIANGLE[key]
            if action in (None, _CONTRA):
                continue
            if needs_original and g.edge(lo, c).origin != ORIGINAL:
                continue
            if action == _TO_DISJOINT:
                g.set_edge(lo, hi, Edge(DISJOINT, lo, hi, STRENGTHENED))
            else:
                g.set_edge(lo, hi, Edge(INCLUDED, lo, hi, STRENGTHENED,
                                        provenance=(c, config)))
            return True
    if brac:
        touched = {x for lo, hi in g.included_edges() for x in (lo, hi)}
        for lo, hi in g.doi_edges():
            if lo in touched or hi in touched:
                g.set_edge(lo, hi, Edge(DISJOINT, lo, hi, STRENGTHENED))
                return True
        has_outgoing = {lo for lo, _ in g.doi_edges()}
        for lo, hi in g.doi_edges():
            if hi in has_outgoing:  # front edge of a doi chain
                g.set_edge(lo, hi, Edge(DISJOINT, lo, hi, STRENGTHENED))
                return True
    return False


def _strengthen(graph: RelationGraph, brac: bool) -> RelationGraph | Contradiction:
    g = graph.copy()
    while True:
        contra = _find_contradiction(g, brac)
        if contra is not None:
            return contra
        if not _apply_one_resolution(g, brac):
            return g


def strengthen_wpi(graph: RelationGraph) -> RelationGraph | Contradiction:
    """Fixpoint of the triangle rules on a quotiented graph.

    Contradictory configurations are reported before any resolution is
    applied; resolutions scan doi edges, then third labels, in index order.
    Strengthened inclusion edges record their originating triangle, and the
    deactivation-based rules skip them, so indirect conclusions re-emerge
    through the recorded triangles over further iterations.
    """
    return _strengthen(graph, brac=False)


def strengthen_brac(graph: RelationGraph) -> RelationGraph | Contradiction:
    """WPI strengthening plus the block-structure rules.

    Two inclusion edges sharing a label contradict; a doi edge touching an
    inclusion-incident label resolves to disjointness, as does the front
    edge of every doi chain.
    """
    return _strengthen(graph, brac=True)


@dataclass(frozen=True)
class MatchingFailure:
    unmatched: tuple[int, ...]


def resolve_inclusion_matching(candidates: Iterable[tuple[int, int]]) \
        -> dict[int, int] | MatchingFailure:
    """Pick one inclusion target per self-loop label via maximum matching.

    ``candidates`` holds pairs (self-loop label, feasible target).  The
    assignment must cover every left label and use every node at most once;
    Hopcroft-Karp with index-ordered adjacency keeps the result
    deterministic.
    """
    pairs = sorted(set(candidates))
    adj: dict[int, list[int]] = {}
    for a, b in pairs:
        adj.setdefault(a, []).append(b)
    lefts = sorted(adj)
    match_left: dict[int, int] = {}
    match_right: dict[int, int] = {}
    INF = float("inf")

    def bfs() -> bool:
        dist = {}
        queue = deque()
        for u in lefts:
            if u not in match_left:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = INF
        while queue:
            u = queue.popleft()
            if dist[u] >= found:
                continue
            for v in adj[u]:
                w = match_right.get(v)
                if w is None:
                    found = min(found, dist[u] + 1)
                elif dist.get(w, INF) == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        bfs.dist = dist  # type: ignore[attr-defined]
        return found != INF

    def dfs(u: int) -> bool:
        dist = bfs.dist  # type: ignore[attr-defined]
        for v in adj[u]:
            w = match_right.get(v)
            if w is None or (dist.get(w, INF) == dist[u] + 1 and dfs(w)):
                match_left[u] = v
                match_right[v] = u
                return True
        dist[u] = INF
        return False

    while bfs():
        for u in lefts:
            if u not in match_left:
                dfs(u)
    unmatched = tuple(u for u in lefts if u not in match_left)
    if unmatched:
        return MatchingFailure(unmatched)
    return dict(sorted(match_left.items()))
