"""Separation problems, their inequality systems, and regions.

A region (R, B, F) assigns token counts to states and consume/produce
weights to labels such that every edge fires like a Petri net place.  State
separation demands different counts for two states, event separation
demands an insufficient count where a label is disabled.  Both become
linear systems over R(s0), B and F, expressed through spanning-tree Parikh
vectors, with one zero-effect row per cycle-basis vector.

WPI systems add, relative to one label, comparability rows from the
relation graph.  BRAC systems bound B and F to {0, 1} and pin whole blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from netsynth.linsys import LinearSystem, Row, Solution, make_row
from netsynth.lts import Lts, ParikhVector, SpanningTree
from netsynth.relations import (DISJOINT, DOI, EQUIVALENT, INCLUDED,
                                RelationGraph)


@dataclass(frozen=True)
class SSP:
    """Two distinct states that must map to different markings."""

    s1: int
    s2: int


@dataclass(frozen=True)
class ESSP:
    """A state together with a label it does not enable."""

    state: int
    label: int


SeparationProblem = SSP | ESSP


@dataclass(frozen=True)
class Region:
    """Solved separation system: initial count plus per-label weights."""

    r0: int
    b: tuple[int, ...]
    f: tuple[int, ...]

    def marking(self, tree: SpanningTree, state: int) -> int:
        total = self.r0
        for label, count in tree.parikh[state].counts:
            total += count * (self.f[label] - self.b[label])
        return total

    def markings(self, tree: SpanningTree) -> tuple[int, ...]:
        return tuple(self.marking(tree, s)
                     for s in range(len(tree.lts.states)))

    def is_valid(self, lts: Lts, tree: SpanningTree) -> bool:
        """Re-simulate every edge: counts stay consistent and nonnegative."""
        marks = self.markings(tree)
        if any(m < 0 for m in marks):
            return False
        for s, t, s2 in lts.edges:
            if marks[s] < self.b[t]:
                return False
            if marks[s2] != marks[s] - self.b[t] + self.f[t]:
                return False
        return True

    def solves(self, tree: SpanningTree, problem: SeparationProblem) -> bool:
        if isinstance(problem, SSP):
            return self.marking(tree, problem.s1) != \
                self.marking(tree, problem.s2)
        return self.marking(tree, problem.state) < self.b[problem.label]


def enumerate_separation_problems(lts: Lts) -> list[SeparationProblem]:
    """All SSPs (unordered state pairs) then all ESSPs, in index order."""
    problems: list[SeparationProblem] = []
    n = len(lts.states)
    for i in range(n):
        for j in range(i + 1, n):
            problems.append(SSP(i, j))
    for s in range(n):
        for t in range(len(lts.labels)):
            if t not in lts.enabled[s]:
                problems.append(ESSP(s, t))
    return problems


class SystemContext:
    """Shared row material for all systems over one LTS and tree."""

    def __init__(self, lts: Lts, tree: SpanningTree,
                 basis: list[ParikhVector]):
        self.lts = lts
        self.tree = tree
        self.basis = basis
        self.variables = tuple(
            ["R0"] + [f"B_{n}" for n in lts.labels]
            + [f"F_{n}" for n in lts.labels])
        self.bvar = tuple(f"B_{n}" for n in lts.labels)
        self.fvar = tuple(f"F_{n}" for n in lts.labels)
        self._base = self._build_base_rows()

    def _state_coeffs(self, state: int) -> dict[str, int]:
        coeffs: dict[str, int] = {"R0": 1}
        for label, count in self.tree.parikh[state].counts:
            coeffs[self.fvar[label]] = coeffs.get(self.fvar[label], 0) + count
            coeffs[self.bvar[label]] = coeffs.get(self.bvar[label], 0) - count
        return coeffs

    def _build_base_rows(self) -> tuple[Row, ...]:
        rows: list[Row] = []
        seen: set[tuple] = set()
        for s, t, s2 in self.lts.edges:
            coeffs = self._state_coeffs(s)
            coeffs[self.bvar[t]] = coeffs.get(self.bvar[t], 0) - 1
            row = make_row(coeffs, ">=", 0,
                           tag=f"edge:{self.lts.states[s]}:"
                               f"{self.lts.labels[t]}")
            if row.coeffs not in seen:
                seen.add(row.coeffs)
                rows.append(row)
        for i, gamma in enumerate(self.basis):
            coeffs = {}
            for label, count in gamma.counts:
                coeffs[self.fvar[label]] = count
                coeffs[self.bvar[label]] = -count
            rows.append(make_row(coeffs, "=", 0, tag=f"cycle:{i}"))
        return tuple(rows)

    def base_rows(self) -> tuple[Row, ...]:
        return self._base

    def essp_row(self, essp: ESSP) -> Row:
        coeffs = self._state_coeffs(essp.state)
        bvar = self.bvar[essp.label]
        coeffs[bvar] = coeffs.get(bvar, 0) - 1
        return make_row(coeffs, "<", 0,
                        tag=f"essp:{self.lts.states[essp.state]}:"
                            f"{self.lts.labels[essp.label]}")

    def ssp_row(self, ssp: SSP, sign: str) -> Row:
        if sign not in ("<", ">"):
            raise ValueError("sign must be '<' or '>'")
        delta = self.tree.parikh[ssp.s1] - self.tree.parikh[ssp.s2]
        coeffs: dict[str, int] = {}
        for label, count in delta.counts:
            coeffs[self.fvar[label]] = count
            coeffs[self.bvar[label]] = -count
        return make_row(coeffs, sign, 0,
                        tag=f"ssp:{self.lts.states[ssp.s1]}:"
                            f"{self.lts.states[ssp.s2]}")

    def class_tie_rows(self, graph: RelationGraph) -> list[Row]:
        """Equal consume weights inside every equivalence class.

        Equivalent labels admit identical presets in any solution, and the
        net assembly relies on it, so the tie is imposed in every system.
        """
        rows = []
        for rep, members in sorted(graph.classes.items()):
            for m in members:
                if m != rep:
                    rows.append(make_row(
                        {self.bvar[m]: 1, self.bvar[rep]: -1}, "=", 0,
                        tag=f"tie:{self.lts.labels[m]}"))
        return rows

    def relation_rows(self, graph: RelationGraph, label: int,
                      doi_choice: Mapping[tuple[int, int], str]) -> list[Row]:
        """Comparability rows of all labels against ``label``'s class.

        Disjoint classes consume nothing here, included classes compare
        consume weights towards the key, residual doi edges follow the
        supplied interpretation.
        """
        key = graph.rep[label]
        bkey = self.bvar[key]
        rows = self.class_tie_rows(graph)
        for rep in graph.nodes:
            if rep == key:
                continue
            edge = graph.edge(key, rep)
            if edge.kind == EQUIVALENT:
                raise ValueError("relation rows require a quotiented graph")
            kind, lo = edge.kind, edge.lo
            if kind == DOI:
                pair = (edge.lo, edge.hi)
                try:
                    kind = {"disjoint": DISJOINT,
                            "included": INCLUDED}[doi_choice[pair]]
                except KeyError:
                    raise KeyError(
                        f"no interpretation for doi edge "
                        f"{graph.names[edge.lo]}->{graph.names[edge.hi]}")
            brep = self.bvar[rep]
            if kind == DISJOINT:
                rows.append(make_row({brep: 1}, "=", 0,
                                     tag=f"disjoint:{self.lts.labels[rep]}"))
            elif lo == key:
                rows.append(make_row({bkey: 1, brep: -1}, "<=", 0,
                                     tag=f"below:{self.lts.labels[rep]}"))
            else:
                rows.append(make_row({brep: 1, bkey: -1}, "<=", 0,
                                     tag=f"above:{self.lts.labels[rep]}"))
        return rows

    def system(self, rows, zero_one=False) -> LinearSystem:
        flags = frozenset(self.bvar) | frozenset(self.fvar) if zero_one \
            else frozenset()
        return LinearSystem(self.variables, tuple(rows), flags)


def _context(lts, tree, basis) -> SystemContext:
    return SystemContext(lts, tree, basis)


def essp_system_wpi(lts: Lts, tree: SpanningTree, basis: list[ParikhVector],
                    graph: RelationGraph, essp: ESSP,
                    doi_choice: Mapping[tuple[int, int], str] = {},
                    ctx: Optional[SystemContext] = None) -> LinearSystem:
    """Event separation system with comparability rows at the ESSP label.

    All rows are homogeneous, so a rational solution lifts to integers.
    """
    ctx = ctx or _context(lts, tree, basis)
    rows = [ctx.essp_row(essp)]
    rows += ctx.base_rows()
    rows += ctx.relation_rows(graph, essp.label, doi_choice)
    return ctx.system(rows)


def ssp_system_wpi(lts: Lts, tree: SpanningTree, basis: list[ParikhVector],
                   graph: RelationGraph, ssp: SSP, label: int, sign: str,
                   doi_choice: Mapping[tuple[int, int], str] = {},
                   ctx: Optional[SystemContext] = None) -> LinearSystem:
    """State separation system keyed to one candidate label and sign.

    The disequality over the Parikh difference is split by the caller into
    its two strict branches.
    """
    ctx = ctx or _context(lts, tree, basis)
    rows = [ctx.ssp_row(ssp, sign)]
    rows += ctx.base_rows()
    rows += ctx.relation_rows(graph, label, doi_choice)
    return ctx.system(rows)


def _fix(ctx: SystemContext, var: str, value: int, tag: str) -> Row:
    return make_row({var: 1}, "=", value, tag=tag)


def brac_block_systems(lts: Lts, tree: SpanningTree,
                       basis: list[ParikhVector], graph: RelationGraph,
                       pair: tuple[int, int],
                       ctx: Optional[SystemContext] = None) \
        -> tuple[LinearSystem, LinearSystem]:
    """The two systems of an asymmetric choice block for ``pair=(lo, hi)``.

    The first describes the shared place: it is the whole preset of the
    ``lo`` block, so one region must solve every event separation problem of
    ``lo`` at once.  The second describes the private place of the ``hi``
    block, which must handle exactly the ``hi`` problems at states still
    enabling ``lo``.  Weights are 0/1 bounded; produce weights of a
    non-self-loop ``lo`` block are pinned to zero since its members must
    strictly consume.
    """
    ctx = ctx or _context(lts, tree, basis)
    lo, hi = pair
    lo_members = graph.classes[graph.rep[lo]]
    hi_members = graph.classes[graph.rep[hi]]
    inside = set(lo_members) | set(hi_members)

    rows1: list[Row] = []
    for m in sorted(inside):
        rows1.append(_fix(ctx, ctx.bvar[m], 1, f"block:B:{lts.labels[m]}"))
    if lo not in lts.self_loop_labels:
        for m in lo_members:
            rows1.append(_fix(ctx, ctx.fvar[m], 0,
                              f"block:F:{lts.labels[m]}"))
    for t in range(len(lts.labels)):
        if t not in inside:
            rows1.append(_fix(ctx, ctx.bvar[t], 0,
                              f"outside:{lts.labels[t]}"))
    for s in range(len(lts.states)):
        if lo not in lts.enabled[s]:
            rows1.append(ctx.essp_row(ESSP(s, lo)))
    rows1 += ctx.base_rows()
    sys1 = ctx.system(rows1, zero_one=True)

    rows2: list[Row] = []
    for m in hi_members:
        rows2.append(_fix(ctx, ctx.bvar[m], 1, f"block:B:{lts.labels[m]}"))
    for t in range(len(lts.labels)):
        if t not in set(hi_members):
            rows2.append(_fix(ctx, ctx.bvar[t], 0,
                              f"outside:{lts.labels[t]}"))
    for s in range(len(lts.states)):
        if hi not in lts.enabled[s] and lo in lts.enabled[s]:
            rows2.append(ctx.essp_row(ESSP(s, hi)))
    rows2 += ctx.base_rows()
    sys2 = ctx.system(rows2, zero_one=True)
    return sys1, sys2


def brac_ssp_system_freechoice(lts: Lts, tree: SpanningTree,
                               basis: list[ParikhVector],
                               graph: RelationGraph, ssp: SSP, label: int,
                               sign: str,
                               ctx: Optional[SystemContext] = None) \
        -> LinearSystem:
    """State separation through a free-choice place.

    The place may only be consumed by one equivalence class, and by none at
    all if that class takes part in an asymmetric choice; residual doi
    edges count as disjointness here.
    """
    ctx = ctx or _context(lts, tree, basis)
    key = graph.rep[label]
    members = set(graph.classes[key])
    involved = {x for pair in graph.included_edges() for x in pair}
    rows = [ctx.ssp_row(ssp, sign)]
    rows += ctx.class_tie_rows(graph)
    for t in range(len(lts.labels)):
        if t not in members:
            rows.append(make_row({ctx.bvar[t]: 1}, "=", 0,
                                 tag=f"outside:{lts.labels[t]}"))
    if key in involved:
        rows.append(make_row({ctx.bvar[key]: 1}, "=", 0,
                             tag=f"choice-free:{lts.labels[key]}"))
    rows += ctx.base_rows()
    return ctx.system(rows, zero_one=True)


def solution_to_region(solution: Solution, lts: Lts) -> Region:
    """Read an integral solver assignment back into a region."""
    assert solution.assignment is not None
    values = solution.assignment

    def as_int(name: str) -> int:
        v = values.get(name, Fraction(0))
        if v.denominator != 1:
            raise ValueError(f"non-integral value for {name}: {v}")
        return int(v)

    return Region(
        r0=as_int("R0"),
        b=tuple(as_int(f"B_{n}") for n in lts.labels),
        f=tuple(as_int(f"F_{n}") for n in lts.labels),
    )


def normalize_region(region: Region, lts: Lts, tree: SpanningTree) -> Region:
    """Drop surplus tokens when every edge stays enabled.

    Subtracting the minimum reachable count keeps all separation answers
    (differences and shortfalls are preserved) but may violate edge
    enabledness, in which case the region is returned unchanged.
    """
    marks = region.markings(tree)
    shift = min(marks)
    if shift <= 0:
        return region
    candidate = Region(region.r0 - shift, region.b, region.f)
    if candidate.is_valid(lts, tree):
        return candidate
    return region


@dataclass(frozen=True)
class PlaceSpec:
    """One net place: tokens plus per-label consume/produce weights."""

    tokens: int
    consume: tuple[int, ...]
    produce: tuple[int, ...]


def region_to_place(region: Region) -> PlaceSpec:
    """A region becomes a place: initial tokens ``r0``, arcs from B and F."""
    return PlaceSpec(tokens=region.r0, consume=region.b, produce=region.f)
