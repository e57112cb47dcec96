"""Newick import for gene/species tree pairs plus a gene-to-species TSV.

Gene trees mark internal events with a label suffix ``#S`` (speciation),
``#D`` (duplication) or ``#H`` (transfer); a ``~`` in front of a child's label
flags its incoming edge as a transfer edge. Branch lengths are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import InputError, ParseError
from .scenario import Event, GeneTree, SpeciesTree, augment_species_tree
from .scenario_io import ScenarioDocument
from .trees import RootedTree

_EVENTS = {"S": Event.SPECIATION, "D": Event.DUPLICATION, "H": Event.TRANSFER}
_DELIMS = set("(),:;")


@dataclass
class NewickNode:
    label: Optional[str]
    line: int
    column: int
    children: list = field(default_factory=list)


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        column = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, column

    def fail(self, message, pos=None):
        line, column = self.where(pos)
        raise ParseError(message, line, column)

    def skip_space(self):
        text = self.text
        while self.pos < len(text):
            if text[self.pos].isspace():
                self.pos += 1
            elif text[self.pos] == "[":
                end = text.find("]", self.pos)
                if end < 0:
                    self.fail("unterminated comment")
                self.pos = end + 1
            else:
                break

    def peek(self) -> str:
        self.skip_space()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def label(self) -> Optional[str]:
        self.skip_space()
        text = self.text
        if self.pos < len(text) and text[self.pos] == "'":
            out = []
            self.pos += 1
            while True:
                if self.pos >= len(text):
                    self.fail("unterminated quoted label")
                ch = text[self.pos]
                if ch == "'":
                    if text.startswith("''", self.pos):
                        out.append("'")
                        self.pos += 2
                        continue
                    self.pos += 1
                    return "".join(out)
                out.append(ch)
                self.pos += 1
        start = self.pos
        while self.pos < len(text) and text[self.pos] not in _DELIMS and not text[self.pos].isspace() \
                and text[self.pos] != "[":
            self.pos += 1
        return text[start:self.pos] or None

    def branch_length(self):
        if self.peek() == ":":
            self.pos += 1
            self.skip_space()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos] not in _DELIMS \
                    and not self.text[self.pos].isspace():
                self.pos += 1
            try:
                float(self.text[start:self.pos])
            except ValueError:
                self.fail("malformed branch length", start)

    def subtree(self) -> NewickNode:
        self.skip_space()
        line, column = self.where()
        node = NewickNode(None, line, column)
        if self.peek() == "(":
            self.pos += 1
            while True:
                node.children.append(self.subtree())
                ch = self.peek()
                if ch == ",":
                    self.pos += 1
                elif ch == ")":
                    self.pos += 1
                    break
                else:
                    self.fail(f"expected ',' or ')', found {ch or 'end of input'!r}")
        self.skip_space()
        node.line, node.column = self.where()
        node.label = self.label()
        self.branch_length()
        return node


def parse_newick(text: str) -> NewickNode:
    """Parse one tree; an unlabeled single-child outer wrapper is removed."""
    reader = _Reader(text)
    if not reader.peek():
        reader.fail("empty Newick string")
    root = reader.subtree()
    if reader.peek() != ";":
        reader.fail("expected ';' at end of tree")
    reader.pos += 1
    if reader.peek():
        reader.fail("trailing text after ';'")
    while root.label is None and len(root.children) == 1:
        root = root.children[0]
    return root


def _flatten(root: NewickNode):
    """Preorder ids: returns (nodes, parents)."""
    nodes, parents = [], []
    stack = [(root, None)]
    while stack:
        node, p = stack.pop()
        nodes.append(node)
        parents.append(p)
        me = len(nodes) - 1
        for c in reversed(node.children):
            stack.append((c, me))
    return nodes, parents


def species_tree_from_newick(text: str) -> SpeciesTree:
    nodes, parents = _flatten(parse_newick(text))
    labels = {}
    for v, node in enumerate(nodes):
        if node.label is not None:
            labels[v] = node.label
        elif not node.children:
            raise ParseError("species leaf without a name", node.line, node.column)
    return augment_species_tree(RootedTree(parents, labels))


def parse_sigma_tsv(text: str) -> dict[str, str]:
    out = {}
    for i, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.rstrip("\r").split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ParseError("expected 'gene<TAB>species'", i, 1)
        gene, species = parts[0].strip(), parts[1].strip()
        if gene in out:
            raise ParseError(f"gene {gene!r} listed twice", i, 1)
        out[gene] = species
    return out


def parse_newick_pair(gene_newick: str, species_newick: str, sigma_tsv: str) -> ScenarioDocument:
    s = species_tree_from_newick(species_newick)
    nodes, parents = _flatten(parse_newick(gene_newick))
    labels = {}
    events = []
    transfer = []
    for v, node in enumerate(nodes):
        label = node.label
        if label is None:
            kind = "internal vertex" if node.children else "leaf"
            raise ParseError(f"unlabeled {kind}; event labels are required", node.line, node.column)
        flagged = label.startswith("~")
        if flagged:
            label = label[1:]
        transfer.append(flagged)
        if node.children:
            name, hash_, code = label.rpartition("#")
            if not hash_ or code not in _EVENTS:
                raise ParseError(
                    f"internal label {node.label!r} needs a '#S', '#D' or '#H' suffix", node.line, node.column
                )
            events.append(_EVENTS[code])
            if name:
                labels[v] = name
        else:
            events.append(Event.LEAF)
            labels[v] = label
    by_name = {name: v for v, name in labels.items()}
    sigma = {}
    for gene, species in parse_sigma_tsv(sigma_tsv).items():
        if gene not in by_name:
            raise InputError(f"sigma names unknown gene {gene!r}")
        sigma[by_name[gene]] = species
        s.vertex(species)
    g = GeneTree(RootedTree(parents, labels), events, transfer, sigma)
    return ScenarioDocument(g, s)
