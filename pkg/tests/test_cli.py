import json
import subprocess
import sys

import jsonschema
import pytest

from scenarios import CROSSING, FIXTURES, load_doc
from tcrecon.cli import main, report_schema
from tcrecon.reconciliation import build_initial_map, compute_lca_sigma, to_dtl
from tcrecon.scenario_io import parse_scenario, serialize_scenario

SCHEMA = report_schema()


def fixture(name):
    return str(FIXTURES / f"{name}.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    data = json.loads(out)
    jsonschema.validate(data, SCHEMA)
    assert data["exit_code"] == code
    return code, data


def write_doc(tmp_path, doc, name="doc.json"):
    path = tmp_path / name
    path.write_text(serialize_scenario(doc), encoding="utf-8")
    return str(path)


def test_check_exit_codes(capsys):
    code, out, _ = run(capsys, "check", "--input", fixture("F1"))
    assert code == 0 and "a valid reconciliation map exists (1 map(s))" in out
    code, out, _ = run(capsys, "check", "--input", fixture("F3"))
    assert code == 1 and "no valid reconciliation map" in out
    code, data = run_json(capsys, "check", "--input", fixture("F3"))
    assert data["reconciliation_exists"] == {"exists": False, "method": "enumeration", "count": 0}


def test_check_validates_supplied_map_and_times(capsys, tmp_path):
    doc = load_doc("F2")
    code, out, _ = run(capsys, "tc-construct", "--input", fixture("F2"), "--output", str(tmp_path / "c.json"))
    assert code == 0
    code, data = run_json(capsys, "check", "--input", str(tmp_path / "c.json"))
    assert code == 0 and data["reconciliation_violations"] == [] and data["time_violations"] == []
    g, s = doc.gene, doc.species
    mu = list(build_initial_map(g, s, compute_lca_sigma(g, s)))
    mu[0], mu[1] = mu[1], mu[0]
    code, data = run_json(capsys, "check", "--input", write_doc(tmp_path, doc.with_(mu=mu)))
    assert code == 1 and data["status"] == "violations"
    assert {v["condition"] for v in data["reconciliation_violations"]} >= {"M1"}


def test_check_observability_gate(capsys, tmp_path):
    doc = load_doc("F3")
    g = doc.gene
    sigma = dict(g.sigma)
    c = next(v for v, name in g.tree.labels.items() if name == "c")
    sigma[c] = "A"
    from tcrecon.scenario import GeneTree

    bad = doc.with_(gene=GeneTree(g.tree, g.events, g.transfer, sigma))
    path = write_doc(tmp_path, bad)
    code, data = run_json(capsys, "check", "--input", path)
    assert code == 1 and data["observability"][0]["condition"] == "Sigma2"
    assert "reconciliation_exists" not in data
    code, data = run_json(capsys, "check", "--input", path, "--force")
    assert "reconciliation_exists" in data


def test_reconcile_writes_lowest_map(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    code, data = run_json(capsys, "reconcile", "--input", fixture("F2"), "--output", str(out_path))
    assert code == 0 and data["reconciliation"]["u"] == {"edge": ["r", "A"]}
    doc = parse_scenario(out_path.read_text())
    assert doc.mu is not None and doc.times is None
    code, _, _ = run(capsys, "reconcile", "--input", fixture("F3"))
    assert code == 1


def test_tc_construct_f2(capsys, tmp_path):
    out_path = tmp_path / "o.json"
    code, data = run_json(capsys, "tc-construct", "--input", fixture("F2"), "-o", str(out_path))
    assert code == 0 and data["status"] == "ok"
    assert data["reconciliation"]["u"] == {"edge": ["r", "A"]}
    assert data["times"]["gene"]["u"] == "0/1"
    assert data["times"]["species"] == {"r": "-1/2", "A": "1/2", "B": "1/1", "_root": "-1/1"}
    saved = json.loads(out_path.read_text())
    assert saved["reconciliation"]["0"] == {"edge": [0, 1]}


def test_tc_construct_f4_witness(capsys, tmp_path):
    dot = tmp_path / "a2.dot"
    code, data = run_json(capsys, "tc-construct", "--input", fixture("F4"), "--dot", str(dot))
    assert code == 1 and data["status"] == "not-time-consistent"
    witness = data["exists_witness"]
    assert witness["length"] == 4 and witness["cycle"] == ["p1", "u_a", "p2", "u_d", "p1"]
    assert [e["from"]["name"] for e in witness["edges"]] == ["p1", "u_a", "p2", "u_d"]
    assert dot.read_text().startswith("digraph")
    code, out, _ = run(capsys, "tc-construct", "--input", fixture("F4"))
    assert "cycle (4 edges): p1 -> u_a -> p2 -> u_d -> p1" in out


def test_tc_check_supplied_map(capsys, tmp_path):
    doc = load_doc("F2")
    g, s = doc.gene, doc.species
    path = write_doc(tmp_path, doc.with_(mu=build_initial_map(g, s, compute_lca_sigma(g, s))))
    code, data = run_json(capsys, "tc-check", "--input", path)
    assert code == 0 and data["time_consistent"] and data["exists_time_consistent"]
    code, data = run_json(capsys, "tc-check", "--input", fixture("F4"))
    assert code == 1 and not data["exists_time_consistent"]
    assert data["exists_witness"]["length"] == 4


def test_tc_check_inconsistent_map_but_existing(capsys, tmp_path):
    from tcrecon.newick import parse_newick_pair

    doc = parse_newick_pair(*CROSSING)
    g, s = doc.gene, doc.species
    path = write_doc(tmp_path, doc.with_(mu=build_initial_map(g, s, compute_lca_sigma(g, s))))
    code, data = run_json(capsys, "tc-check", "--input", path)
    assert code == 1 and data["time_consistent"] is False and data["exists_time_consistent"] is True
    assert set(data["time_consistent_witness"]["cycle"]) == {"p1", "g", "p2", "h"}


def test_dtl_round_trip_via_cli(capsys, tmp_path):
    r_path = tmp_path / "r.json"
    d_path = tmp_path / "d.json"
    m_path = tmp_path / "m.json"
    assert run(capsys, "reconcile", "-i", fixture("F2"), "-o", str(r_path))[0] == 0
    code, data = run_json(capsys, "to-dtl", "-i", str(r_path), "-o", str(d_path))
    assert code == 0 and data["dtl"] == {"u": "A", "a": "A", "b": "B"}
    code, data = run_json(capsys, "from-dtl", "-i", str(d_path), "-o", str(m_path))
    assert code == 0 and data["reconciliation"]["u"] == {"edge": ["r", "A"]}
    assert parse_scenario(m_path.read_text()).mu == parse_scenario(r_path.read_text()).mu


def test_dtl_errors(capsys, tmp_path):
    code, data = run_json(capsys, "to-dtl", "-i", fixture("F2"))
    assert code == 2 and data["error"]["kind"] == "input"
    code, data = run_json(capsys, "from-dtl", "-i", fixture("F2"))
    assert code == 2
    doc = load_doc("F2")
    g, s = doc.gene, doc.species
    gamma = list(to_dtl(g, s, build_initial_map(g, s, compute_lca_sigma(g, s))))
    gamma[0] = s.vertex("r")
    code, data = run_json(capsys, "from-dtl", "-i", write_doc(tmp_path, doc.with_(dtl=gamma)))
    assert code == 1 and "III" in {v["condition"] for v in data["dtl_violations"]}


def test_newick_input(capsys, tmp_path):
    base = FIXTURES / "newick" / "F4"
    code, data = run_json(
        capsys, "tc-construct", "--newick", str(base) + ".gene.nwk", str(base) + ".species.nwk",
        "--sigma", str(base) + ".sigma.tsv",
    )
    assert code == 1 and data["exists_witness"]["length"] == 4
    sigma = tmp_path / "s.tsv"
    sigma.write_text("a\tA\nb\tB\n")
    code, data = run_json(capsys, "tc-construct", "--newick", "((a,~b)u#H);", "(A,B)r;", "--sigma", str(sigma))
    assert code == 0 and data["reconciliation"]["u"] == {"edge": ["r", "A"]}
    code, data = run_json(capsys, "check", "--newick", "((a,b)x);", "(A,B)r;", "--sigma", str(sigma))
    assert code == 3 and data["error"]["kind"] == "parse" and data["error"]["line"] == 1
    code, data = run_json(capsys, "check", "--newick", "((a,b)x#S);", "(A,B)r;")
    assert code == 2


def test_input_and_parse_errors(capsys, tmp_path):
    code, out, err = run(capsys, "check", "--input", str(tmp_path / "missing.json"))
    assert code == 2 and "error (input)" in err and out == ""
    bad = tmp_path / "bad.json"
    bad.write_text('{"species_tree": [\n  }')
    code, data = run_json(capsys, "check", "--input", str(bad))
    assert code == 3 and (data["error"]["line"], data["error"]["column"]) == (2, 3)
    code, _, _ = run(capsys, "check")
    assert code == 2


def test_simulate(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "--seed", "5", "--species", "5", "--genes", "10", "--p-hgt", "0.5")
    assert code == 0
    doc = parse_scenario(out)
    assert serialize_scenario(doc) == out
    code, out2, _ = run(capsys, "simulate", "--seed", "5", "--species", "5", "--genes", "10", "--p-hgt", "0.5")
    assert out2 == out
    path = tmp_path / "sim.json"
    code, data = run_json(capsys, "simulate", "--seed", "5", "-o", str(path), "--contemporary")
    assert code == 0 and path.exists() and data["size"]["gene_vertices"] == len(parse_scenario(path.read_text()).gene)
    code, data = run_json(capsys, "simulate", "--p-dup", "2")
    assert code == 2


@pytest.mark.parametrize("name", ["F1", "F2", "F3", "F4"])
@pytest.mark.parametrize("command", ["check", "reconcile", "tc-check", "tc-construct"])
def test_reports_validate_and_repeat(capsys, name, command):
    first = run_json(capsys, command, "--input", fixture(name))
    second = run_json(capsys, command, "--input", fixture(name))
    assert first == second


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "tcrecon", "tc-construct", "--input", fixture("F4")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1 and "p1 -> u_a -> p2 -> u_d -> p1" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "tcrecon", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("tcrecon ")
