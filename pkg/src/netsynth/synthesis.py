"""End-to-end synthesis pipelines and result verification.

Both pipelines run: relation graph, equivalence quotient, strengthening,
then separation solving.  The comparable-preset target enumerates the
residual doi interpretations (all-disjoint first) and solves one rational
system per separation problem.  The block-reduced target solves 0/1 integer
systems: one shared and one private system per asymmetric choice block,
per-problem systems for free labels, a feasibility probe plus maximum
matching for self-loop inclusion edges, and a bounded assignment search for
state separations that no free-choice place can solve.

Every reported success has been re-verified: the reachability graph of the
output is isomorphic to the input and the net lies in the target class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from netsynth.linsys import (LinearSystem, Solution,
                             lift_homogeneous_to_integer, solve_integer,
                             solve_rational)
from netsynth.lts import Lts, spanning_tree, cycle_basis, validate
from netsynth.petri import (CapExceeded, PetriNet, classify_net, isomorphic,
                            net_from_regions, reachability_graph)
from netsynth.relations import (Contradiction, DISJOINT, DOI, Edge, INCLUDED,
                                MatchingFailure, build_relation_graph,
                                quotient_by_equivalence,
                                resolve_inclusion_matching, strengthen_brac,
                                strengthen_wpi)
from netsynth.separation import (ESSP, Region, SSP, SystemContext,
                                 brac_block_systems,
                                 brac_ssp_system_freechoice,
                                 enumerate_separation_problems,
                                 essp_system_wpi, normalize_region,
                                 region_to_place, solution_to_region,
                                 ssp_system_wpi)

WPI = "wpi"
BRAC = "brac"

SUCCESS = "success"
FAILURE = "failure"
CAP_EXCEEDED = "cap-exceeded"


@dataclass
class SynthesisConfig:
    target_class: str = WPI
    selfloop_cap: int = 12
    ssp_combo_cap: int = 4096
    rg_cap: int = 100_000
    prune: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.target_class not in (WPI, BRAC):
            raise ValueError(f"unknown target class {self.target_class!r}")
        for name in ("selfloop_cap", "ssp_combo_cap", "rg_cap", "jobs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class VerificationRecord:
    isomorphic: bool
    mismatch: Optional[str]
    classes: set[str]
    target_ok: bool

    @property
    def ok(self) -> bool:
        return self.isomorphic and self.target_ok


@dataclass
class SynthesisReport:
    outcome: str
    target_class: str
    net: Optional[PetriNet] = None
    regions: list[Region] = field(default_factory=list)
    witness: Optional[dict] = None
    interpretation: list[tuple[str, str, str]] = field(default_factory=list)
    inclusion_candidates: list[tuple[str, str]] = field(default_factory=list)
    matching: dict[str, str] = field(default_factory=dict)
    verification: Optional[VerificationRecord] = None
    cap: Optional[str] = None
    interpretations_tried: int = 0

    @property
    def ok(self) -> bool:
        return self.outcome == SUCCESS

    def to_json(self, labels: tuple[str, ...] = ()) -> dict:
        regions = [{"r0": r.r0,
                    "b": {labels[t]: w for t, w in enumerate(r.b) if w},
                    "f": {labels[t]: w for t, w in enumerate(r.f) if w}}
                   for r in self.regions]
        ver = None
        if self.verification is not None:
            ver = {"isomorphic": self.verification.isomorphic,
                   "mismatch": self.verification.mismatch,
                   "classes": sorted(self.verification.classes),
                   "target_ok": self.verification.target_ok}
        return {
            "schema": 1,
            "outcome": self.outcome,
            "target_class": self.target_class,
            "witness": self.witness,
            "interpretation": [list(x) for x in self.interpretation],
            "inclusion_candidates": [list(x)
                                     for x in self.inclusion_candidates],
            "matching": dict(sorted(self.matching.items())),
            "regions": regions,
            "places": len(self.regions),
            "verification": ver,
            "cap": self.cap,
            "interpretations_tried": self.interpretations_tried,
        }


def _contradiction_witness(c: Contradiction, names) -> dict:
    return {"kind": "contradiction",
            "rule": c.rule,
            "labels": [names[i] for i in c.labels],
            "detail": c.detail}


def _problem_witness(problem, lts: Lts, tried: list[str]) -> dict:
    if isinstance(problem, SSP):
        return {"kind": "ssp",
                "states": [lts.states[problem.s1], lts.states[problem.s2]],
                "systems_tried": tried}
    return {"kind": "essp",
            "state": lts.states[problem.state],
            "label": lts.labels[problem.label],
            "systems_tried": tried}


def verify_solution(net: PetriNet, lts: Lts, target_class: str,
                    rg_cap: int = 100_000) -> VerificationRecord:
    """Regenerate the reachability graph and re-check class membership."""
    rg = reachability_graph(net, rg_cap)
    mapping = isomorphic(lts, rg)
    iso = isinstance(mapping, dict)
    mismatch = None if iso else mapping.reason
    flags = classify_net(net).flags()
    target_ok = target_class.upper() in flags
    return VerificationRecord(isomorphic=iso, mismatch=mismatch,
                              classes=flags, target_ok=target_ok)


def _prepare(lts: Lts):
    report = validate(lts)
    if not report.ok:
        raise ValueError("LTS must be deterministic and reachable; "
                         "run validate first")
    tree = spanning_tree(lts)
    basis = cycle_basis(lts, tree)
    ctx = SystemContext(lts, tree, basis)
    return tree, basis, ctx


def _relation_stage(lts: Lts, brac: bool):
    graph = build_relation_graph(lts)
    if isinstance(graph, Contradiction):
        return graph
    quotiented = quotient_by_equivalence(graph)
    if isinstance(quotiented, Contradiction):
        return quotiented
    graph, _ = quotiented
    graph = strengthen_wpi(graph)
    if isinstance(graph, Contradiction):
        return graph
    if brac:
        graph = strengthen_brac(graph)
    return graph


def _region_from(solution: Solution, system: LinearSystem,
                 ctx: SystemContext) -> Region:
    if system.homogeneous:
        solution = lift_homogeneous_to_integer(solution, system)
    region = solution_to_region(solution, ctx.lts)
    region = normalize_region(region, ctx.lts, ctx.tree)
    assert region.is_valid(ctx.lts, ctx.tree)
    return region


class _RegionPool:
    """Ordered, deduplicated region collection."""

    def __init__(self, ctx: SystemContext):
        self.ctx = ctx
        self.regions: list[Region] = []
        self._index: dict[tuple, int] = {}

    def add(self, region: Region) -> int:
        key = (region.r0, region.b, region.f)
        if key in self._index:
            return self._index[key]
        self._index[key] = len(self.regions)
        self.regions.append(region)
        return len(self.regions) - 1

    def replace(self, index: int, region: Region) -> None:
        old = self.regions[index]
        self._index.pop((old.r0, old.b, old.f), None)
        self.regions[index] = region
        self._index.setdefault((region.r0, region.b, region.f), index)

    def solves(self, problem) -> bool:
        return any(r.solves(self.ctx.tree, problem) for r in self.regions)


def _interpretation_order(k: int) -> list[int]:
    return sorted(range(1 << k), key=lambda v: (bin(v).count("1"), v))


def synthesize_wpi(lts: Lts, cfg: Optional[SynthesisConfig] = None) \
        -> SynthesisReport:
    """Synthesis towards weighted comparable presets.

    Residual doi edges are enumerated over all disjoint/included
    interpretations, cheapest (all-disjoint) first; within one
    interpretation every separation problem gets a rational system whose
    solution lifts to an integer region.  The first interpretation whose
    regions verify wins.
    """
    cfg = cfg or SynthesisConfig(target_class=WPI)
    tree, basis, ctx = _prepare(lts)
    graph = _relation_stage(lts, brac=False)
    if isinstance(graph, Contradiction):
        return SynthesisReport(FAILURE, WPI,
                               witness=_contradiction_witness(graph,
                                                              lts.labels))
    doi_pairs = [(e.lo, e.hi) for key, e in sorted(graph.edges.items())
                 if e.kind == DOI]
    if len(doi_pairs) > cfg.selfloop_cap:
        return SynthesisReport(CAP_EXCEEDED, WPI, cap="selfloop-cap")

    reps = sorted(graph.classes)
    problems = enumerate_separation_problems(lts)
    ssps = [p for p in problems if isinstance(p, SSP)]
    essps = [p for p in problems
             if isinstance(p, ESSP) and graph.rep[p.label] == p.label]

    first_witness: Optional[dict] = None
    tried = 0
    for mask in _interpretation_order(len(doi_pairs)):
        tried += 1
        choice = {pair: ("included" if mask >> i & 1 else "disjoint")
                  for i, pair in enumerate(doi_pairs)}
        pool = _RegionPool(ctx)
        witness = None
        for essp in essps:
            if pool.solves(essp):
                continue
            system = essp_system_wpi(lts, tree, basis, graph, essp,
                                     choice, ctx=ctx)
            sol = solve_rational(system)
            if not sol.feasible:
                witness = _problem_witness(essp, lts, [system.rows[0].tag])
                break
            pool.add(_region_from(sol, system, ctx))
        if witness is None:
            for ssp in ssps:
                if pool.solves(ssp):
                    continue
                tags = []
                solved = False
                for a in reps:
                    for sign in ("<", ">"):
                        system = ssp_system_wpi(lts, tree, basis, graph,
                                                ssp, a, sign, choice,
                                                ctx=ctx)
                        tags.append(f"{system.rows[0].tag}:"
                                    f"{lts.labels[a]}:{sign}")
                        sol = solve_rational(system)
                        if sol.feasible:
                            pool.add(_region_from(sol, system, ctx))
                            solved = True
                            break
                    if solved:
                        break
                if not solved:
                    witness = _problem_witness(ssp, lts, tags)
                    break
        if witness is not None:
            if first_witness is None:
                first_witness = witness
            continue
        net = net_from_regions(lts.labels,
                               [region_to_place(r) for r in pool.regions])
        record = verify_solution(net, lts, WPI, cfg.rg_cap)
        if not record.ok:
            if first_witness is None:
                first_witness = {"kind": "verification",
                                 "detail": record.mismatch
                                 or "class check failed"}
            continue
        interp = [(lts.labels[lo], lts.labels[hi], choice[(lo, hi)])
                  for lo, hi in doi_pairs]
        report = SynthesisReport(SUCCESS, WPI, net=net,
                                 regions=list(pool.regions),
                                 interpretation=interp,
                                 verification=record,
                                 interpretations_tried=tried)
        return _maybe_prune(report, lts, cfg)
    return SynthesisReport(FAILURE, WPI, witness=first_witness,
                           interpretations_tried=tried)


def _maybe_prune(report: SynthesisReport, lts: Lts,
                 cfg: SynthesisConfig) -> SynthesisReport:
    """Greedily drop places whose removal keeps verification green."""
    if not cfg.prune or report.net is None:
        return report
    regions = list(report.regions)
    keep = list(range(len(regions)))
    # anything bigger than the input cannot be isomorphic to it
    cap = min(cfg.rg_cap, len(lts.states) + 1)
    for i in range(len(regions)):
        if len(keep) == 1:
            break
        if i not in keep:
            continue
        candidate = [j for j in keep if j != i]
        net = net_from_regions(lts.labels,
                               [region_to_place(regions[j])
                                for j in candidate])
        try:
            if verify_solution(net, lts, report.target_class, cap).ok:
                keep = candidate
        except CapExceeded:
            pass  # removal grows or unbounds the graph; keep the place
    pruned = [regions[j] for j in keep]
    net = net_from_regions(lts.labels, [region_to_place(r) for r in pruned])
    report.net = net
    report.regions = pruned
    report.verification = verify_solution(net, lts, report.target_class,
                                          cfg.rg_cap)
    return report


def _integer_cap(lts: Lts) -> int:
    # any solving region can stay below this many tokens at desk scale
    return 2 * len(lts.states)


def synthesize_brac(lts: Lts, cfg: Optional[SynthesisConfig] = None) \
        -> SynthesisReport:
    """Synthesis towards block-reduced asymmetric choice.

    Labels on an inclusion edge share an asymmetric choice block solved by
    exactly two 0/1 systems.  A self-loop label keeps all its doi edges
    disjoint when its problems stay solvable that way; otherwise one
    combined system per candidate target collects the feasible inclusion
    pairs and a maximum matching picks the interpretation.  Unsolved state
    separations are assigned to choice blocks by bounded enumeration.
    """
    cfg = cfg or SynthesisConfig(target_class=BRAC)
    tree, basis, ctx = _prepare(lts)
    icap = _integer_cap(lts)
    graph = _relation_stage(lts, brac=True)
    if isinstance(graph, Contradiction):
        return SynthesisReport(FAILURE, BRAC,
                               witness=_contradiction_witness(graph,
                                                              lts.labels))
    graph = graph.copy()
    reps = sorted(graph.classes)
    doi_pairs = [(e.lo, e.hi) for key, e in sorted(graph.edges.items())
                 if e.kind == DOI]
    solid_pairs = graph.included_edges()
    solid_labels = {x for pair in solid_pairs for x in pair}
    out_doi = {lo for lo, _ in doi_pairs}
    in_doi = {hi for _, hi in doi_pairs}
    assert not (out_doi & in_doi), "doi chains must be resolved"

    pool = _RegionPool(ctx)
    all_disjoint = {pair: "disjoint" for pair in doi_pairs}
    lam: list[tuple[int, int]] = []
    lam_solutions: dict[tuple[int, int], Region] = {}
    gate_regions: dict[int, list[Region]] = {}
    blocks: list[dict] = []

    def cap_report(sol: Solution) -> Optional[SynthesisReport]:
        if sol.status == "cap-exceeded":
            return SynthesisReport(CAP_EXCEEDED, BRAC, cap="integer-cap")
        return None

    def essps_of(label: int) -> list[ESSP]:
        return [ESSP(s, label) for s in range(len(lts.states))
                if label not in lts.enabled[s]]

    # event separation, representative label by label
    for a in reps:
        if a in solid_labels:
            continue
        if a in out_doi:
            unsolved = None
            probe_regions: list[Region] = []
            for essp in essps_of(a):
                if any(r.solves(tree, essp) for r in probe_regions):
                    continue
                base = essp_system_wpi(lts, tree, basis, graph, essp,
                                       all_disjoint, ctx=ctx)
                system = ctx.system(base.rows, zero_one=True)
                sol = solve_integer(system, cap=icap)
                if capped := cap_report(sol):
                    return capped
                if not sol.feasible:
                    unsolved = essp
                    break
                probe_regions.append(_region_from(sol, system, ctx))
            if unsolved is None:
                for r in probe_regions:
                    pool.add(r)
                continue
            # some outgoing doi edge must be a proper inclusion
            any_candidate = False
            for lo, hi in doi_pairs:
                if lo != a:
                    continue
                shared, _ = brac_block_systems(lts, tree, basis, graph,
                                               (lo, hi), ctx=ctx)
                sol = solve_integer(shared, cap=icap)
                if capped := cap_report(sol):
                    return capped
                if sol.feasible:
                    lam.append((lo, hi))
                    lam_solutions[(lo, hi)] = _region_from(sol, shared, ctx)
                    any_candidate = True
            if not any_candidate:
                return SynthesisReport(
                    FAILURE, BRAC,
                    witness=_problem_witness(
                        unsolved, lts,
                        ["all-disjoint"] +
                        [f"inclusion:{lts.labels[hi]}"
                         for lo, hi in doi_pairs if lo == a]))
        else:
            solved_by: list[Region] = []
            for essp in essps_of(a):
                if any(r.solves(tree, essp) for r in solved_by):
                    continue
                base = essp_system_wpi(lts, tree, basis, graph, essp,
                                       all_disjoint, ctx=ctx)
                system = ctx.system(base.rows, zero_one=True)
                sol = solve_integer(system, cap=icap)
                if capped := cap_report(sol):
                    return capped
                if not sol.feasible:
                    return SynthesisReport(
                        FAILURE, BRAC,
                        witness=_problem_witness(essp, lts,
                                                 [system.rows[0].tag]))
                solved_by.append(_region_from(sol, system, ctx))
            if a in in_doi:
                # a doi target may end up matched, in which case the block
                # places replace these; pooled only after the matching
                gate_regions[a] = solved_by
            else:
                for r in solved_by:
                    pool.add(r)

    # asymmetric choice blocks from strengthened inclusions
    for lo, hi in solid_pairs:
        shared_sys, private_sys = brac_block_systems(lts, tree, basis,
                                                     graph, (lo, hi),
                                                     ctx=ctx)
        entry = {"pair": (lo, hi), "systems": [shared_sys, private_sys],
                 "indices": []}
        for which, system in enumerate(entry["systems"]):
            sol = solve_integer(system, cap=icap)
            if capped := cap_report(sol):
                return capped
            if not sol.feasible:
                label = (lo, hi)[which]
                return SynthesisReport(
                    FAILURE, BRAC,
                    witness={"kind": "essp-block",
                             "pair": [lts.labels[lo], lts.labels[hi]],
                             "label": lts.labels[label],
                             "detail": "no single region covers the "
                                       "block's event separations"})
            entry["indices"].append(pool.add(_region_from(sol, system,
                                                          ctx)))
        blocks.append(entry)

    # inclusion matching for self-loop labels
    matching: dict[int, int] = {}
    lam_names = [(lts.labels[x], lts.labels[y]) for x, y in lam]
    if lam:
        result = resolve_inclusion_matching(lam)
        if isinstance(result, MatchingFailure):
            return SynthesisReport(
                FAILURE, BRAC, inclusion_candidates=lam_names,
                witness={"kind": "matching",
                         "unmatched": [lts.labels[u]
                                       for u in result.unmatched],
                         "detail": "no inclusion target assignment covers "
                                   "every self-loop needing one"})
        matching = result
    for lo, hi in doi_pairs:
        if matching.get(lo) == hi:
            graph.set_edge(lo, hi, Edge(INCLUDED, lo, hi, "strengthened"))
        else:
            graph.set_edge(lo, hi, Edge(DISJOINT, lo, hi, "strengthened"))
    for lo, hi in sorted(matching.items()):
        shared_region = lam_solutions[(lo, hi)]
        shared_sys, private_sys = brac_block_systems(lts, tree, basis,
                                                     graph, (lo, hi),
                                                     ctx=ctx)
        sol = solve_integer(private_sys, cap=icap)
        if capped := cap_report(sol):
            return capped
        if not sol.feasible:
            return SynthesisReport(
                FAILURE, BRAC, inclusion_candidates=lam_names,
                matching={lts.labels[k]: lts.labels[v]
                          for k, v in matching.items()},
                witness={"kind": "essp-block",
                         "pair": [lts.labels[lo], lts.labels[hi]],
                         "label": lts.labels[hi],
                         "detail": "no single private region covers the "
                                   "matched block"})
        # shared and private place replace the target's provisional
        # per-problem regions: its preset may hold at most two places
        gate_regions.pop(hi, None)
        i1 = pool.add(shared_region)
        i2 = pool.add(_region_from(sol, private_sys, ctx))
        blocks.append({"pair": (lo, hi),
                       "systems": [shared_sys, private_sys],
                       "indices": [i1, i2]})
    for label in sorted(gate_regions):
        for r in gate_regions[label]:
            pool.add(r)

    # state separation: free-choice first, then block assignment
    ssps = [p for p in enumerate_separation_problems(lts)
            if isinstance(p, SSP)]
    leftovers: list[SSP] = []
    for ssp in ssps:
        if pool.solves(ssp):
            continue
        solved = False
        for a in reps:
            for sign in ("<", ">"):
                system = brac_ssp_system_freechoice(lts, tree, basis,
                                                    graph, ssp, a, sign,
                                                    ctx=ctx)
                sol = solve_integer(system, cap=icap)
                if capped := cap_report(sol):
                    return capped
                if sol.feasible:
                    pool.add(_region_from(sol, system, ctx))
                    solved = True
                    break
            if solved:
                break
        if not solved:
            leftovers.append(ssp)

    if leftovers:
        if not blocks:
            return SynthesisReport(
                FAILURE, BRAC,
                witness=_problem_witness(leftovers[0], lts,
                                         ["freechoice:all-labels"]))
        failed = _assign_ssps_to_blocks(ctx, pool, blocks, leftovers, cfg,
                                        icap)
        if failed is not None:
            failed.inclusion_candidates = lam_names
            failed.matching = {lts.labels[k]: lts.labels[v]
                               for k, v in matching.items()}
            return failed

    net = net_from_regions(lts.labels,
                           [region_to_place(r) for r in pool.regions])
    record = verify_solution(net, lts, BRAC, cfg.rg_cap)
    report = SynthesisReport(
        SUCCESS if record.ok else FAILURE, BRAC,
        net=net if record.ok else None,
        regions=list(pool.regions),
        interpretation=[(lts.labels[lo], lts.labels[hi],
                         "included" if matching.get(lo) == hi
                         else "disjoint") for lo, hi in doi_pairs],
        inclusion_candidates=lam_names,
        matching={lts.labels[k]: lts.labels[v]
                  for k, v in matching.items()},
        verification=record)
    if not record.ok:
        report.witness = {"kind": "verification",
                          "detail": record.mismatch or "class check failed"}
        return report
    return _maybe_prune(report, lts, cfg)


def _assign_ssps_to_blocks(ctx: SystemContext, pool: _RegionPool,
                           blocks: list[dict], leftovers: list[SSP],
                           cfg: SynthesisConfig, icap: int) \
        -> Optional[SynthesisReport]:
    """Re-solve block systems with disequality rows, in all combinations.

    Each unsolved state separation is assigned to one block system with one
    sign branch; combinations come in index order and count against the
    combination cap.  Returns None once an assignment works, otherwise the
    failure or cap report.
    """
    lts = ctx.lts
    systems: list[tuple[int, int]] = []
    for bi in range(len(blocks)):
        systems.append((bi, 0))
        systems.append((bi, 1))
    choices = [(si, sign) for si in range(len(systems))
               for sign in ("<", ">")]
    combos = 0
    cache: dict[tuple, Solution] = {}
    for assignment in itertools.product(choices, repeat=len(leftovers)):
        combos += 1
        if combos > cfg.ssp_combo_cap:
            return SynthesisReport(CAP_EXCEEDED, BRAC, cap="ssp-combo-cap")
        grouped: dict[int, list[tuple[SSP, str]]] = {}
        for ssp, (si, sign) in zip(leftovers, assignment):
            grouped.setdefault(si, []).append((ssp, sign))
        solutions: dict[int, Region] = {}
        ok = True
        for si, extras in sorted(grouped.items()):
            bi, which = systems[si]
            system = blocks[bi]["systems"][which]
            key = (si, frozenset((ssp.s1, ssp.s2, sign)
                                 for ssp, sign in extras))
            if key in cache:
                sol = cache[key]
            else:
                rows = list(system.rows) + [ctx.ssp_row(ssp, sign)
                                            for ssp, sign in extras]
                sol = solve_integer(ctx.system(rows, zero_one=True),
                                    cap=icap)
                cache[key] = sol
            if sol.status == "cap-exceeded":
                return SynthesisReport(CAP_EXCEEDED, BRAC,
                                       cap="integer-cap")
            if not sol.feasible:
                ok = False
                break
            solutions[si] = _region_from(sol, system, ctx)
        if ok:
            for si, region in sorted(solutions.items()):
                bi, which = systems[si]
                pool.replace(blocks[bi]["indices"][which], region)
            return None
    return SynthesisReport(
        FAILURE, BRAC,
        witness=_problem_witness(
            leftovers[0], lts,
            [f"block:{lts.labels[blocks[bi]['pair'][0]]}:"
             f"{lts.labels[blocks[bi]['pair'][1]]}"
             for bi in range(len(blocks))]))
