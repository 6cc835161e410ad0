"""Command line interface.

Exit codes: 0 success, 1 synthesis impossible or a check failed (witness
printed), 2 invalid input, 3 a configured cap was exceeded.  Reports are
deterministic JSON (schema 1, no timestamps): identical invocations produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from netsynth.lts import Lts, LtsError, parse_lts, serialize_lts, validate
from netsynth.petri import (CapExceeded, PetriNetError, classify_net,
                            parse_net, reachability_graph, render_dot,
                            serialize_net)
from netsynth.relations import (Contradiction, build_relation_graph,
                                classify_case, pair_relation,
                                quotient_by_equivalence, strengthen_wpi)
from netsynth.synthesis import (SynthesisConfig, synthesize_brac,
                                synthesize_wpi, verify_solution)

OK = 0
IMPOSSIBLE = 1
INVALID = 2
CAP = 3


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fp:
            return fp.read()
    except OSError as exc:
        raise LtsError(f"cannot read {path}: {exc.strerror}")


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fp:
            fp.write(text)


def _emit_json(path: Optional[str], payload: dict) -> None:
    _write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_lts(path: str) -> Lts:
    return parse_lts(_read(path))


def _cmd_validate(args) -> int:
    lts = _load_lts(args.file)
    report = validate(lts)
    loops = sorted(lts.labels[t] for t in report.self_loop_labels)
    payload = {
        "schema": 1,
        "deterministic": report.deterministic,
        "reachable": report.reachable,
        "self_loop_labels": loops,
        "unreachable_states": [lts.states[s]
                               for s in report.unreachable_states],
    }
    if report.nondeterministic_witness:
        e1, e2 = report.nondeterministic_witness
        payload["nondeterministic_witness"] = [
            [lts.states[e1[0]], lts.labels[e1[1]], lts.states[e1[2]]],
            [lts.states[e2[0]], lts.labels[e2[1]], lts.states[e2[2]]]]
    _emit_json(args.json, payload)
    return OK if report.ok else INVALID


def _cmd_relations(args) -> int:
    lts = _load_lts(args.file)
    if not validate(lts).ok:
        print("error: LTS must be deterministic and reachable",
              file=sys.stderr)
        return INVALID
    pairs = []
    for a in range(len(lts.labels)):
        for b in range(a + 1, len(lts.labels)):
            rel = pair_relation(lts, a, b)
            pairs.append({"a": lts.labels[a], "b": lts.labels[b],
                          "kind": rel.kind, "merge": rel.merge,
                          "case": classify_case(rel)})
    contradictions = []
    graph_entries = []
    stage = build_relation_graph(lts)
    raw = None if isinstance(stage, Contradiction) else stage
    if not isinstance(stage, Contradiction):
        stage2 = quotient_by_equivalence(stage)
        if not isinstance(stage2, Contradiction):
            stage = strengthen_wpi(stage2[0])
        else:
            stage = stage2
    if isinstance(stage, Contradiction):
        contradictions.append({"rule": stage.rule,
                               "labels": [lts.labels[i]
                                          for i in stage.labels],
                               "detail": stage.detail})
    if raw is not None and not isinstance(stage, Contradiction):
        # representative pairs carry the strengthened edge; pairs inside
        # or across equivalence classes keep their raw edge
        for (a, b), edge in sorted(raw.edges.items()):
            if a in stage.nodes and b in stage.nodes:
                edge = stage.edge(a, b)
            entry = {"a": lts.labels[a], "b": lts.labels[b],
                     "edge": edge.kind, "origin": edge.origin}
            if edge.kind in ("included", "doi"):
                entry["below"] = lts.labels[edge.lo]
                entry["above"] = lts.labels[edge.hi]
            graph_entries.append(entry)
    payload = {"schema": 1, "pairs": pairs, "graph": graph_entries,
               "contradictions": contradictions}
    _emit_json(args.json, payload)
    return OK if not contradictions else IMPOSSIBLE


def _cmd_synth(args) -> int:
    lts = _load_lts(args.file)
    if not validate(lts).ok:
        print("error: LTS must be deterministic and reachable",
              file=sys.stderr)
        return INVALID
    cfg = SynthesisConfig(target_class=args.target_class,
                          selfloop_cap=args.selfloop_cap,
                          ssp_combo_cap=args.ssp_combo_cap,
                          rg_cap=args.rg_cap,
                          prune=args.prune,
                          jobs=args.jobs)
    run = synthesize_brac if args.target_class == "brac" else synthesize_wpi
    report = run(lts, cfg)
    if args.report:
        _emit_json(args.report, report.to_json(lts.labels))
    if report.ok:
        assert report.net is not None
        _write(args.output, serialize_net(report.net))
        if args.dot:
            _write(args.dot, render_dot(report.net))
        print(f"synthesised {len(report.net.places)} places, "
              f"{len(report.net.transitions)} transitions "
              f"({args.target_class})", file=sys.stderr)
        return OK
    if report.outcome == "cap-exceeded":
        print(f"cap exceeded: {report.cap}", file=sys.stderr)
        return CAP
    print(f"synthesis impossible: {json.dumps(report.witness)}",
          file=sys.stderr)
    return IMPOSSIBLE


def _cmd_check(args) -> int:
    net = parse_net(_read(args.file))
    flags = classify_net(net)
    _emit_json(args.json, {"schema": 1, "flags": sorted(flags.flags())})
    return OK if flags.has(args.target_class) else IMPOSSIBLE


def _cmd_rg(args) -> int:
    net = parse_net(_read(args.file))
    try:
        rg = reachability_graph(net, args.rg_cap)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return CAP
    _write(args.output, serialize_lts(rg))
    return OK


def _cmd_verify(args) -> int:
    net = parse_net(_read(args.net))
    lts = _load_lts(args.lts)
    if not validate(lts).ok:
        print("error: LTS must be deterministic and reachable",
              file=sys.stderr)
        return INVALID
    try:
        record = verify_solution(net, lts, args.target_class, args.rg_cap)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return CAP
    payload = {"schema": 1, "isomorphic": record.isomorphic,
               "mismatch": record.mismatch,
               "classes": sorted(record.classes),
               "target_ok": record.target_ok}
    _emit_json(args.json, payload)
    return OK if record.ok else IMPOSSIBLE


def _cmd_dot(args) -> int:
    net = parse_net(_read(args.file))
    _write(args.output, render_dot(net))
    return OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netsynth",
        description="Petri net synthesis from labelled transition systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_class(p):
        p.add_argument("--class", dest="target_class", required=True,
                       choices=["wpi", "brac"],
                       help="target net class")

    p = sub.add_parser("validate", help="check an .lts file")
    p.add_argument("file")
    p.add_argument("--json", default=None, help="write the report here")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("relations", help="label relation table and graph")
    p.add_argument("file")
    p.add_argument("--json", default=None)
    p.set_defaults(func=_cmd_relations)

    p = sub.add_parser("synth", help="synthesise a net from an .lts file")
    p.add_argument("file")
    add_class(p)
    p.add_argument("-o", "--output", default="-",
                   help="output .pn file (default stdout)")
    p.add_argument("--dot", default=None, help="also write a dot rendering")
    p.add_argument("--report", default=None, help="write a JSON report")
    p.add_argument("--selfloop-cap", type=int, default=12)
    p.add_argument("--ssp-combo-cap", type=int, default=4096)
    p.add_argument("--rg-cap", type=int, default=100_000)
    p.add_argument("--prune", action="store_true",
                   help="greedily drop redundant places")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker cap (results never depend on scheduling)")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("check", help="classify a .pn file")
    p.add_argument("file")
    add_class(p)
    p.add_argument("--json", default=None)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("rg", help="reachability graph of a .pn file")
    p.add_argument("file")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--rg-cap", type=int, default=100_000)
    p.set_defaults(func=_cmd_rg)

    p = sub.add_parser("verify", help="check a net against an .lts file")
    p.add_argument("net")
    p.add_argument("lts")
    add_class(p)
    p.add_argument("--rg-cap", type=int, default=100_000)
    p.add_argument("--json", default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("dot", help="render a .pn file as graphviz")
    p.add_argument("file")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_dot)
    return parser


def run(argv: list[str]) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INVALID if exc.code not in (0, None) else OK
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return CAP
    except (LtsError, PetriNetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INVALID


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
