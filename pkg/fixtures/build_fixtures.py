"""Regenerate the canonical fixture documents from their Newick descriptions.

Run from the repository root: ``python3 fixtures/build_fixtures.py``.
"""
from pathlib import Path

from tcrecon.newick import parse_newick_pair
from tcrecon.scenario_io import serialize_scenario

HERE = Path(__file__).parent

FIXTURES = {
    "F1": ("((a,b)x#S);", "(A,B)r;", {"a": "A", "b": "B"}),
    "F2": ("((a,~b)u#H);", "(A,B)r;", {"a": "A", "b": "B"}),
    "F3": ("(a,(c,b)~w#S)u#H;", "((A,C)q,B)r;", {"a": "A", "b": "B", "c": "C"}),
    "F4": (
        "((c2,d2)'s2''#S',(a1,(b1,(c1,(d1,(a2,b2)'~s1''''#S')u_d#H)~s2#S)u_a#H)~s1#S)u_c#H;",
        "((A,B)p1,(C,D)p2)r;",
        {"a1": "A", "a2": "A", "b1": "B", "b2": "B", "c1": "C", "c2": "C", "d1": "D", "d2": "D"},
    ),
}


def build(name):
    gene, species, sigma = FIXTURES[name]
    tsv = "".join(f"{k}\t{v}\n" for k, v in sigma.items())
    return parse_newick_pair(gene, species, tsv), (gene, species, tsv)


if __name__ == "__main__":
    for name in FIXTURES:
        doc, (gene, species, tsv) = build(name)
        (HERE / f"{name}.json").write_text(serialize_scenario(doc), encoding="utf-8")
        (HERE / "newick" / f"{name}.gene.nwk").write_text(gene + "\n", encoding="utf-8")
        (HERE / "newick" / f"{name}.species.nwk").write_text(species + "\n", encoding="utf-8")
        (HERE / "newick" / f"{name}.sigma.tsv").write_text(tsv, encoding="utf-8")
