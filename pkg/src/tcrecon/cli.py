"""Check and construct time-consistent gene tree / species tree reconciliations.

Exit codes: 0 success, 1 negative verdict or axiom violations, 2 input error,
3 parse error, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import __version__
from .auxgraph import AuxGraph
from .errors import InputError, InternalInvariantError, ParseError, TcReconError
from .oracle import count_candidates, enumerate_reconciliations
from .reconciliation import (
    build_initial_map,
    compute_lca_sigma,
    from_dtl,
    to_dtl,
    validate_dtl,
    validate_reconciliation,
)
from .scenario import check_observability
from .scenario_io import (
    PLANTED,
    ScenarioDocument,
    dumps_indented,
    format_fraction,
    read_scenario,
    serialize_scenario,
)
from .simulate import ScenarioParams, random_scenario
from .timing import (
    NO_RECONCILIATION,
    check_C,
    check_time_map,
    construct_time_consistent,
    exists_time_consistent,
    is_time_consistent,
)
from .trees import Edge

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_PARSE, EXIT_INTERNAL = 0, 1, 2, 3, 4

# instances whose candidate count is at most this are confirmed by enumeration
ENUMERATION_LIMIT = 10_000


class Report:
    """Collects the structured report and the human-readable lines."""

    def __init__(self, command: str, listing: bool = True):
        self.data: dict = {"command": command, "version": __version__}
        self.lines: list[str] = []
        self.document: Optional[str] = None
        # per-vertex text listings are skipped when only the JSON report is printed
        self.listing = listing

    def extend(self, lines) -> None:
        if self.listing:
            self.lines.extend(lines)

    def say(self, line: str) -> None:
        self.lines.append(line)

    def violations(self, key: str, items, title: str) -> None:
        self.data[key] = [v.to_json() for v in items]
        if items:
            self.say(f"{title}: {len(items)} violation(s)")
            for v in items:
                self.say(f"  {v}")

    def finish(self, status: str, code: int) -> int:
        self.data["status"] = status
        self.data["exit_code"] = code
        return code


def _read_text(arg: str) -> str:
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def _load(args) -> ScenarioDocument:
    if args.newick:
        from .newick import parse_newick_pair

        if not args.sigma:
            raise InputError("--newick requires --sigma")
        gene, species = args.newick
        return parse_newick_pair(_read_text(gene), _read_text(species), _read_text(args.sigma))
    if not args.input:
        raise InputError("no input: use --input FILE or --newick GENE SPECIES --sigma FILE")
    return read_scenario(args.input)


def _mu_json(doc: ScenarioDocument, mu) -> dict:
    s = doc.species
    out = {}
    for u, m in enumerate(mu):
        key = doc.gene.tree.name(u)
        if isinstance(m, Edge):
            out[key] = {"edge": [s.name(m.parent), s.name(m.child)]}
        else:
            out[key] = {"vertex": s.name(m.v)}
    return out


def _show_mu(doc: ScenarioDocument, mu) -> list[str]:
    lines = []
    for name, image in _mu_json(doc, mu).items():
        target = f"({image['edge'][0]},{image['edge'][1]})" if "edge" in image else image["vertex"]
        lines.append(f"  {name} -> {target}")
    return lines


def _times_json(doc: ScenarioDocument, times) -> dict:
    s = doc.species
    return {
        "gene": {doc.gene.tree.name(u): format_fraction(t) for u, t in enumerate(times.gene)},
        "species": {
            (PLANTED if x == s.planted_root else s.name(x)): format_fraction(t)
            for x, t in enumerate(times.species)
        },
    }


def _observability_gate(doc, report: Report, force: bool) -> bool:
    """Report O1/O2/Sigma violations; True when processing may continue."""
    bad = check_observability(doc.gene, doc.species)
    report.violations("observability", bad, "observability")
    if bad and not force:
        report.say("input is not observable; use --force to continue anyway")
        return False
    if not bad:
        report.say("observability: ok")
    return True


def _witness(report: Report, verdict_key: str, witness, graph: AuxGraph, doc) -> None:
    data = witness.to_json(graph, doc.gene, doc.species)
    report.data[verdict_key] = data
    report.say(f"cycle ({data['length']} edges): " + " -> ".join(data["cycle"]))


def _write_dot(args, graph: Optional[AuxGraph], doc) -> None:
    if args.dot and graph is not None:
        with open(args.dot, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(graph.to_dot(doc.gene, doc.species))


def _emit_document(args, doc: ScenarioDocument) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize_scenario(doc))


def cmd_check(args, report: Report) -> int:
    doc = _load(args)
    g, s = doc.gene, doc.species
    if not _observability_gate(doc, report, args.force):
        return report.finish("violations", EXIT_NEGATIVE)
    ell = compute_lca_sigma(g, s)
    status, code = "ok", EXIT_OK

    if doc.mu is not None:
        bad = validate_reconciliation(g, s, doc.mu, ell)
        report.violations("reconciliation_violations", bad, "supplied reconciliation")
        if bad:
            status, code = "violations", EXIT_NEGATIVE
        else:
            report.say("supplied reconciliation: valid")
            if doc.times is not None:
                tbad = (check_time_map(g.tree, doc.times.gene) + check_time_map(s.tree, doc.times.species)
                        + check_C(g, s, doc.mu, doc.times))
                report.violations("time_violations", tbad, "supplied times")
                if tbad:
                    status, code = "violations", EXIT_NEGATIVE
                else:
                    report.say("supplied times: time-consistent")

    initial_ok = not validate_reconciliation(g, s, build_initial_map(g, s, ell), ell)
    exists = {"exists": initial_ok, "method": "initial-map"}
    if count_candidates(g, s, ell) <= ENUMERATION_LIMIT:
        found = len(enumerate_reconciliations(g, s, ENUMERATION_LIMIT))
        if (found > 0) != initial_ok:
            raise InternalInvariantError("enumeration and initial map disagree on existence")
        exists = {"exists": found > 0, "method": "enumeration", "count": found}
    report.data["reconciliation_exists"] = exists
    if exists["exists"]:
        extra = f" ({exists['count']} map(s))" if "count" in exists else ""
        report.say(f"a valid reconciliation map exists{extra}")
    else:
        report.say("no valid reconciliation map")
        return report.finish(NO_RECONCILIATION, EXIT_NEGATIVE)
    return report.finish(status, code)


def cmd_reconcile(args, report: Report) -> int:
    doc = _load(args)
    g, s = doc.gene, doc.species
    if not _observability_gate(doc, report, args.force):
        return report.finish("violations", EXIT_NEGATIVE)
    ell = compute_lca_sigma(g, s)
    mu = build_initial_map(g, s, ell)
    bad = validate_reconciliation(g, s, mu, ell)
    if bad:
        report.violations("reconciliation_violations", bad, "lowest placement")
        report.say("no valid reconciliation map")
        return report.finish(NO_RECONCILIATION, EXIT_NEGATIVE)
    report.data["reconciliation"] = _mu_json(doc, mu)
    report.say("reconciliation (lowest placement):")
    report.extend(_show_mu(doc, mu))
    _emit_document(args, doc.with_(mu=mu, times=None))
    return report.finish("ok", EXIT_OK)


def cmd_tc_check(args, report: Report) -> int:
    doc = _load(args)
    g, s = doc.gene, doc.species
    if not _observability_gate(doc, report, args.force):
        return report.finish("violations", EXIT_NEGATIVE)
    ell = compute_lca_sigma(g, s)
    code = EXIT_OK
    status = "ok"
    mu_any = doc.mu
    if doc.mu is not None:
        bad = validate_reconciliation(g, s, doc.mu, ell)
        if bad:
            report.violations("reconciliation_violations", bad, "supplied reconciliation")
            return report.finish("violations", EXIT_NEGATIVE)
        verdict = is_time_consistent(g, s, doc.mu, ell)
        report.data["time_consistent"] = verdict.consistent
        if verdict.consistent:
            report.say("supplied reconciliation: time-consistent")
            report.data["times"] = _times_json(doc, verdict.times)
        else:
            report.say("supplied reconciliation: NOT time-consistent")
            _witness(report, "time_consistent_witness", verdict.witness, verdict.graph, doc)
            code, status = EXIT_NEGATIVE, "not-time-consistent"
    else:
        mu_any = build_initial_map(g, s, ell)
        if validate_reconciliation(g, s, mu_any, ell):
            report.say("no valid reconciliation map")
            return report.finish(NO_RECONCILIATION, EXIT_NEGATIVE)

    exists = exists_time_consistent(g, s, mu_any, ell)
    report.data["exists_time_consistent"] = exists.consistent
    if exists.consistent:
        report.say("a time-consistent reconciliation map exists")
    else:
        report.say("no time-consistent reconciliation map exists")
        _witness(report, "exists_witness", exists.witness, exists.graph, doc)
        code, status = EXIT_NEGATIVE, "not-time-consistent"
    _write_dot(args, exists.graph, doc)
    return report.finish(status, code)


def cmd_tc_construct(args, report: Report) -> int:
    doc = _load(args)
    g, s = doc.gene, doc.species
    if not _observability_gate(doc, report, args.force):
        return report.finish("violations", EXIT_NEGATIVE)
    result = construct_time_consistent(g, s)
    _write_dot(args, result.graph, doc)
    if result.status == NO_RECONCILIATION:
        report.violations("reconciliation_violations", result.violations, "lowest placement")
        report.say("no valid reconciliation map")
        return report.finish(NO_RECONCILIATION, EXIT_NEGATIVE)
    if not result.ok:
        report.say("no time-consistent reconciliation map exists")
        _witness(report, "exists_witness", result.witness, result.graph, doc)
        return report.finish(result.status, EXIT_NEGATIVE)
    report.data["reconciliation"] = _mu_json(doc, result.mu)
    report.data["times"] = _times_json(doc, result.times)
    report.say("time-consistent reconciliation:")
    times = result.times
    if report.listing:
        report.extend(
            f"{line}  at t = {times.gene[u]}" for u, line in enumerate(_show_mu(doc, result.mu))
        )
    _emit_document(args, doc.with_(mu=result.mu, times=result.times))
    return report.finish("ok", EXIT_OK)


def cmd_to_dtl(args, report: Report) -> int:
    doc = _load(args)
    g, s = doc.gene, doc.species
    if doc.mu is None:
        raise InputError("to-dtl needs a document with a reconciliation")
    bad = validate_reconciliation(g, s, doc.mu)
    if bad:
        report.violations("reconciliation_violations", bad, "supplied reconciliation")
        return report.finish("violations", EXIT_NEGATIVE)
    gamma = to_dtl(g, s, doc.mu)
    dbad = validate_dtl(g, s, gamma)
    report.violations("dtl_violations", dbad, "DTL map")
    if dbad:
        raise InternalInvariantError("converted map violates the DTL axioms")
    report.data["dtl"] = {g.tree.name(u): s.name(x) for u, x in enumerate(gamma)}
    report.say("DTL map:")
    report.extend(f"  {g.tree.name(u)} -> {s.name(x)}" for u, x in enumerate(gamma))
    _emit_document(args, doc.with_(dtl=gamma))
    return report.finish("ok", EXIT_OK)


def cmd_from_dtl(args, report: Report) -> int:
    doc = _load(args)
    g, s = doc.gene, doc.species
    if doc.dtl is None:
        raise InputError("from-dtl needs a document with a 'dtl' map")
    dbad = validate_dtl(g, s, doc.dtl)
    report.violations("dtl_violations", dbad, "DTL map")
    if dbad:
        return report.finish("violations", EXIT_NEGATIVE)
    mu = from_dtl(g, s, doc.dtl)
    bad = validate_reconciliation(g, s, mu)
    if bad:
        raise InternalInvariantError("converted map violates the reconciliation axioms")
    report.data["reconciliation"] = _mu_json(doc, mu)
    report.say("reconciliation:")
    report.extend(_show_mu(doc, mu))
    _emit_document(args, doc.with_(mu=mu, times=None))
    return report.finish("ok", EXIT_OK)


def cmd_simulate(args, report: Report) -> int:
    params = ScenarioParams(
        seed=args.seed,
        n_species=args.species,
        n_genes=args.genes,
        p_dup=args.p_dup,
        p_hgt=args.p_hgt,
        p_loss=args.p_loss,
        polytomy=args.polytomy,
        contemporary=args.contemporary,
    )
    g, s = random_scenario(params)
    doc = ScenarioDocument(g, s)
    report.data["size"] = {"gene_vertices": len(g), "species_vertices": len(s.tree) - 1}
    if args.output:
        _emit_document(args, doc)
        report.say(f"wrote scenario with {len(g)} gene and {len(s.tree) - 1} species vertices")
    else:
        report.document = serialize_scenario(doc)
    return report.finish("ok", EXIT_OK)


COMMANDS = {
    "check": (cmd_check, "observability, supplied map and existence of a valid map"),
    "reconcile": (cmd_reconcile, "compute the lowest reconciliation map"),
    "tc-check": (cmd_tc_check, "time-consistency of a supplied map and existence of one"),
    "tc-construct": (cmd_tc_construct, "construct a time-consistent map with time stamps"),
    "to-dtl": (cmd_to_dtl, "convert the supplied map to a DTL map (binary trees)"),
    "from-dtl": (cmd_from_dtl, "convert the document's DTL map to a reconciliation map"),
    "simulate": (cmd_simulate, "generate a random observable scenario"),
}


def report_schema() -> dict:
    """The JSON schema that every ``--json`` report satisfies."""
    from importlib import resources

    return json.loads(resources.files(__package__).joinpath("schemas/report.schema.json").read_text("utf-8"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcrecon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--json", action="store_true", help="print a machine-readable report")
        p.add_argument("--output", "-o", help="write the resulting scenario document here")
        if name == "simulate":
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--species", type=int, default=4, help="number of species leaves")
            p.add_argument("--genes", type=int, default=8, help="cap on gene leaves")
            p.add_argument("--p-dup", type=float, default=0.3)
            p.add_argument("--p-hgt", type=float, default=0.3)
            p.add_argument("--p-loss", type=float, default=0.1)
            p.add_argument("--polytomy", type=float, default=0.0)
            p.add_argument("--contemporary", action="store_true",
                           help="transfers only between lineages alive at the same time")
            continue
        p.add_argument("--input", "-i", help="scenario document (JSON)")
        p.add_argument("--newick", nargs=2, metavar=("GENE", "SPECIES"),
                       help="gene and species Newick (file or literal)")
        p.add_argument("--sigma", help="TSV file mapping gene leaves to species")
        p.add_argument("--force", action="store_true", help="continue past observability violations")
        if name in ("tc-check", "tc-construct"):
            p.add_argument("--dot", help="write the auxiliary graph in DOT format")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    report = Report(args.command, listing=not args.json)
    handler = COMMANDS[args.command][0]
    try:
        code = handler(args, report)
    except ParseError as exc:
        code = _error(report, "parse", exc, EXIT_PARSE)
    except InternalInvariantError as exc:
        code = _error(report, "internal", exc, EXIT_INTERNAL)
    except (TcReconError, OSError) as exc:
        code = _error(report, "input", exc, EXIT_INPUT)

    if args.json:
        sys.stdout.write(dumps_indented(report.data) + "\n")
    elif report.document is not None:
        sys.stdout.write(report.document)
    else:
        out = sys.stdout if code in (EXIT_OK, EXIT_NEGATIVE) else sys.stderr
        for line in report.lines:
            out.write(line + "\n")
    return code


def _error(report: Report, kind: str, exc: Exception, code: int) -> int:
    err = {"kind": kind, "message": str(exc)}
    if isinstance(exc, ParseError) and exc.line is not None:
        err["line"], err["column"] = exc.line, exc.column
    report.data["error"] = err
    report.say(f"error ({kind}): {exc}")
    return report.finish("error", code)


if __name__ == "__main__":
    sys.exit(main())
