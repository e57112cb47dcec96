"""Canonical JSON scenario documents.

The species tree is stored without its planted root; the planted root only
appears as ``"_root"`` inside reconciliation and time entries. Output is
deterministic: fixed key order, ids ascending, two-space indent, LF, and a
trailing newline.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Optional

from .errors import InputError, ParseError
from .reconciliation import ReconciliationMap
from .scenario import Event, GeneTree, SpeciesTree, augment_species_tree
from .timing import TimeAssignment
from .trees import Edge, RootedTree, Vertex

PLANTED = "_root"


@dataclass(frozen=True)
class ScenarioDocument:
    gene: GeneTree
    species: SpeciesTree
    mu: Optional[ReconciliationMap] = None
    times: Optional[TimeAssignment] = None
    dtl: Optional[tuple] = None

    def with_(self, **changes) -> "ScenarioDocument":
        return replace(self, **changes)


def format_fraction(q) -> str:
    if type(q) is not Fraction:
        q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(text: Any, where: str) -> Fraction:
    if not isinstance(text, str):
        raise InputError(f"{where}: time must be a 'p/q' string")
    try:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{where}: {text!r} is not a rational 'p/q'") from None


def _species_ref(s: SpeciesTree, x: int):
    return PLANTED if x == s.planted_root else x


def _species_id(s: SpeciesTree, ref: Any, where: str) -> int:
    if ref == PLANTED:
        return s.planted_root
    if isinstance(ref, bool) or not isinstance(ref, int) or not 0 <= ref < s.planted_root:
        raise InputError(f"{where}: unknown species vertex {ref!r}")
    return ref


def _gene_id(g: GeneTree, key: str, where: str) -> int:
    try:
        u = int(key)
    except ValueError:
        raise InputError(f"{where}: gene id {key!r} is not an integer") from None
    if str(u) != key or not 0 <= u < len(g):
        raise InputError(f"{where}: unknown gene vertex {key!r}")
    return u


def to_json_data(doc: ScenarioDocument) -> dict:
    g, s = doc.gene, doc.species
    raw = s.tree
    species_records = []
    for x in range(s.planted_root):
        rec = {"id": x, "parent": None if x == s.core_root else raw.parent[x]}
        if x in raw.labels:
            rec["name"] = raw.labels[x]
        species_records.append(rec)
    gene_records = []
    for u in range(len(g)):
        rec = {
            "id": u,
            "parent": g.tree.parent[u],
            "event": g.events[u].value,
            "transfer_edge": g.transfer[u],
        }
        if u in g.tree.labels:
            rec["name"] = g.tree.labels[u]
        gene_records.append(rec)
    data: dict = {
        "species_tree": species_records,
        "gene_tree": gene_records,
        "sigma": {g.tree.name(u): g.sigma[u] for u in sorted(g.sigma)},
    }
    if doc.mu is not None:
        rmap = {}
        for u, m in enumerate(doc.mu):
            if isinstance(m, Edge):
                rmap[str(u)] = {"edge": [_species_ref(s, m.parent), _species_ref(s, m.child)]}
            else:
                rmap[str(u)] = {"vertex": _species_ref(s, m.v)}
        data["reconciliation"] = rmap
    if doc.times is not None:
        species_times = {str(x): format_fraction(doc.times.species[x]) for x in range(s.planted_root)}
        species_times[PLANTED] = format_fraction(doc.times.species[s.planted_root])
        data["times"] = {
            "gene": {str(u): format_fraction(t) for u, t in enumerate(doc.times.gene)},
            "species": species_times,
        }
    if doc.dtl is not None:
        data["dtl"] = {str(u): _species_ref(s, x) for u, x in enumerate(doc.dtl)}
    return data


_encode_str = json.encoder.encode_basestring


def dumps_indented(obj: Any) -> str:
    """Same text as ``json.dumps(obj, indent=2, ensure_ascii=False)``.

    The standard encoder drops to its pure-Python path whenever ``indent`` is
    set; this writer handles the few value types documents use and is several
    times faster on large trees.
    """
    out: list[str] = []
    append = out.append

    def emit(value, pad: str) -> None:
        kind = type(value)
        if kind is str:
            append(_encode_str(value))
        elif kind is int:
            append(int.__repr__(value))
        elif value is None:
            append("null")
        elif value is True:
            append("true")
        elif value is False:
            append("false")
        elif kind is dict:
            if not value:
                append("{}")
                return
            inner = pad + "  "
            append("{")
            first = True
            for key, item in value.items():
                append("\n" + inner if first else ",\n" + inner)
                first = False
                append(_encode_str(key))
                append(": ")
                emit(item, inner)
            append("\n" + pad + "}")
        elif kind is list or kind is tuple:
            if not value:
                append("[]")
                return
            inner = pad + "  "
            append("[")
            first = True
            for item in value:
                append("\n" + inner if first else ",\n" + inner)
                first = False
                emit(item, inner)
            append("\n" + pad + "]")
        else:
            append(json.dumps(value, ensure_ascii=False))

    emit(obj, "")
    return "".join(out)


def serialize_scenario(doc: ScenarioDocument) -> str:
    return dumps_indented(to_json_data(doc)) + "\n"


def _require(obj: Any, kind, where: str):
    if not isinstance(obj, kind) or isinstance(obj, bool) and kind is not bool:
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise InputError(f"{where}: expected {name}, got {type(obj).__name__}")
    return obj


def _records(data: dict, key: str) -> list:
    recs = _require(data.get(key), list, key)
    for i, rec in enumerate(recs):
        _require(rec, dict, f"{key}[{i}]")
        if rec.get("id") != i or isinstance(rec.get("id"), bool):
            raise InputError(f"{key}[{i}]: ids must be 0..n-1 in ascending order, found {rec.get('id')!r}")
    if not recs:
        raise InputError(f"{key}: tree has no vertices")
    return recs


def _parents(recs: list, key: str) -> list:
    n = len(recs)
    parents = []
    for rec in recs:
        p = rec.get("parent", "missing")
        if p == "missing":
            raise InputError(f"{key}[{rec['id']}]: missing 'parent'")
        if p is not None and (isinstance(p, bool) or not isinstance(p, int) or not 0 <= p < n):
            raise InputError(f"{key}[{rec['id']}]: parent {p!r} is not a vertex id")
        parents.append(p)
    return parents


def _labels(recs: list, key: str) -> dict:
    out = {}
    for rec in recs:
        if "name" in rec:
            out[rec["id"]] = _require(rec["name"], str, f"{key}[{rec['id']}].name")
    return out


def from_json_data(data: Any) -> ScenarioDocument:
    _require(data, dict, "document")
    known = {"species_tree", "gene_tree", "sigma", "reconciliation", "times", "dtl"}
    extra = sorted(set(data) - known)
    if extra:
        raise InputError(f"document: unknown keys {extra}")

    srecs = _records(data, "species_tree")
    raw = RootedTree(_parents(srecs, "species_tree"), _labels(srecs, "species_tree"))
    s = augment_species_tree(raw)

    grecs = _records(data, "gene_tree")
    gparents = _parents(grecs, "gene_tree")
    glabels = _labels(grecs, "gene_tree")
    events = []
    transfer = []
    for rec in grecs:
        where = f"gene_tree[{rec['id']}]"
        try:
            events.append(Event(rec.get("event")))
        except ValueError:
            raise InputError(f"{where}: unknown event {rec.get('event')!r}") from None
        transfer.append(_require(rec.get("transfer_edge"), bool, f"{where}.transfer_edge"))
    gtree = RootedTree(gparents, glabels)
    by_name = {name: v for v, name in glabels.items()}
    sigma = {}
    for name, species in _require(data.get("sigma"), dict, "sigma").items():
        if name not in by_name:
            raise InputError(f"sigma: unknown gene {name!r}")
        sigma[by_name[name]] = _require(species, str, f"sigma[{name!r}]")
        s.vertex(species)
    g = GeneTree(gtree, events, transfer, sigma)

    mu = None
    if "reconciliation" in data:
        rmap = _require(data["reconciliation"], dict, "reconciliation")
        images: list = [None] * len(g)
        for key, entry in rmap.items():
            where = f"reconciliation[{key}]"
            u = _gene_id(g, key, where)
            _require(entry, dict, where)
            if set(entry) == {"vertex"}:
                images[u] = Vertex(_species_id(s, entry["vertex"], where))
            elif set(entry) == {"edge"}:
                pair = _require(entry["edge"], list, where)
                if len(pair) != 2:
                    raise InputError(f"{where}: an edge is a [parent, child] pair")
                x, y = (_species_id(s, ref, where) for ref in pair)
                if s.tree.parent[y] != x:
                    raise InputError(f"{where}: ({pair[0]}, {pair[1]}) is not a species-tree edge")
                images[u] = Edge(x, y)
            else:
                raise InputError(f"{where}: expected {{'vertex': id}} or {{'edge': [p, c]}}")
        missing = [u for u, m in enumerate(images) if m is None]
        if missing:
            raise InputError(f"reconciliation: no image for gene vertices {missing[:10]}")
        mu = ReconciliationMap(images)

    times = None
    if "times" in data:
        tdata = _require(data["times"], dict, "times")
        gt = _require(tdata.get("gene"), dict, "times.gene")
        st = _require(tdata.get("species"), dict, "times.species")
        gene_t: list = [None] * len(g)
        for key, value in gt.items():
            gene_t[_gene_id(g, key, "times.gene")] = parse_fraction(value, f"times.gene[{key}]")
        species_t: list = [None] * len(s.tree)
        for key, value in st.items():
            ref = PLANTED if key == PLANTED else key
            if ref != PLANTED:
                try:
                    ref = int(key)
                except ValueError:
                    raise InputError(f"times.species: bad id {key!r}") from None
            species_t[_species_id(s, ref, "times.species")] = parse_fraction(value, f"times.species[{key}]")
        if None in gene_t or None in species_t:
            raise InputError("times: every gene and species vertex needs a time")
        times = TimeAssignment(tuple(gene_t), tuple(species_t))

    dtl = None
    if "dtl" in data:
        dmap = _require(data["dtl"], dict, "dtl")
        gamma: list = [None] * len(g)
        for key, ref in dmap.items():
            gamma[_gene_id(g, key, "dtl")] = _species_id(s, ref, f"dtl[{key}]")
        if None in gamma:
            raise InputError("dtl: every gene vertex needs an image")
        dtl = tuple(gamma)
    return ScenarioDocument(g, s, mu, times, dtl)


def parse_scenario(text: str) -> ScenarioDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return from_json_data(data)


def read_scenario(path) -> ScenarioDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def write_scenario(doc: ScenarioDocument, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_scenario(doc))
