import json

import pytest

from causalid.cli import main
from causalid.estimation import random_law, sample
from causalid.joint import random_joint
from causalid.oracle import random_model

from conftest import confounded_mediation

CONFOUNDED_MEDIATION = "graph confounded_mediation { nodes: W A M Y; W -> A -> M -> Y; W -> M; A -> Y; }\n"
FRONT_DOOR = "graph fd { nodes: A M Y; A -> M -> Y; A <-> Y; }\n"
BOW = "graph bow { nodes: A Y; A -> Y; A <-> Y; }\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_identify_json(files, capsys):
    g, q = files("g.dsl", CONFOUNDED_MEDIATION), files("q.dsl", "do A=1;\noutcome Y;\n")
    code, out, _ = run(capsys, "identify", "--graph", g, "--query", q)
    assert code == 0
    res = json.loads(out)
    assert res["verdict"] == "IDENTIFIED_SWM"
    assert res["functional_text"] == "sum_{m,w} p(y|m,a) p(m|a,w) p(w)"


def test_identify_text_and_latex(files, capsys):
    g = files("g.dsl", CONFOUNDED_MEDIATION)
    q = files("q.dsl", "path A->Y = 1; path A->M->Y = 0; outcome Y;")
    code, out, _ = run(capsys, "identify", "--graph", g, "--query", q, "--format", "text")
    assert code == 0 and out == "sum_{m,w} p(y|m,a) p(m|a',w) p(w)\n"
    code, out, _ = run(capsys, "identify", "--graph", g, "--query", q, "--format", "latex")
    assert out.startswith("\\sum_{m,w}")


def test_identify_history_and_outcome_style(files, capsys):
    g, q = files("g.dsl", CONFOUNDED_MEDIATION), files("q.dsl", "do M=0; outcome Y;")
    code, out, _ = run(capsys, "identify", "--graph", g, "--query", q, "--history",
                       "--outcome-style", "variable", "--format", "text")
    assert out == "sum_{a,w} p(Y|m,a,w) p(a,w)\n"


def test_identify_not_identified_exit_code(files, capsys):
    g = files("g.dsl", CONFOUNDED_MEDIATION)
    q = files("q.dsl", "path W->A->Y = 1; path W->A->M->Y = 0; path W->M->Y = 0; outcome Y;")
    code, out, _ = run(capsys, "identify", "--graph", g, "--query", q)
    assert code == 1
    res = json.loads(out)
    assert res["verdict"] == "NOT_IDENTIFIED_MWM"
    assert res["evidence"]["failure"]["recanting_edge"] == "W->A"


def test_identify_admg(files, capsys):
    g, q = files("fd.dsl", FRONT_DOOR), files("q.dsl", "do A=1; outcome Y;")
    code, out, _ = run(capsys, "identify", "--admg", "--graph", g, "--query", q)
    assert code == 0
    res = json.loads(out)
    assert res["verdict"] == "IDENTIFIED_G_FUNCTIONAL"
    assert res["functional_text"] == "sum_{m,a'} p(y|m,a') p(m|a) p(a')"
    assert res["evidence"]["edge_intervention"] == {"A->M": 1}
    g = files("bow.dsl", BOW)
    code, out, _ = run(capsys, "identify", "--admg", "--graph", g, "--query", q)
    assert code == 1 and json.loads(out)["verdict"] == "CONDITIONS_FAIL"


def test_outcome_override_and_missing_outcome(files, capsys):
    g, q = files("g.dsl", CONFOUNDED_MEDIATION), files("q.dsl", "do A=1;")
    code, _, err = run(capsys, "identify", "--graph", g, "--query", q)
    assert code == 2 and "outcome" in err
    code, out, _ = run(capsys, "identify", "--graph", g, "--query", q, "--outcome", "M",
                       "--format", "text")
    assert code == 0 and out == "sum_{w} p(m|a,w) p(w)\n"


def test_input_errors_exit_2(files, capsys):
    g = files("g.dsl", "graph g { nodes: A; A -> B; }")
    q = files("q.dsl", "do A=1; outcome A;")
    code, _, err = run(capsys, "identify", "--graph", g, "--query", q)
    assert code == 2 and "SemanticError" in err and "line 1" in err
    code, _, err = run(capsys, "identify", "--graph", "/nonexistent.dsl", "--query", q)
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["identify"])
    assert exc.value.code == 2


def test_translate(files, capsys):
    g = files("g.dsl", CONFOUNDED_MEDIATION)
    code, out, _ = run(capsys, "translate", "pse-fixed", "--graph", g, "--treat", "A=1",
                       "--baseline", "A=0", "--outcome", "Y", "--beta", "A->Y")
    assert code == 0
    assert out == "path A->M->Y = 0;\npath A->Y = 1;\noutcome Y;\n"
    code, out, _ = run(capsys, "translate", "ett", "--graph", g, "--treat", "A=1",
                       "--outcome", "Y", "--format", "json")
    assert json.loads(out)["outcomes"] == ["A", "Y"]
    code, out, _ = run(capsys, "translate", "ace", "--graph", g, "--treat", "A=1",
                       "--outcome", "Y")
    assert out == "do A=1;\noutcome Y;\n"
    code, _, err = run(capsys, "translate", "pse-avg", "--graph", g, "--treat", "A=1",
                       "--outcome", "Y", "--beta", "W->A->Y")
    assert code == 2 and "BetaNotSubset" in err
    code, _, _ = run(capsys, "translate", "ace", "--graph", g, "--treat", "A", "--outcome", "Y")
    assert code == 2


def test_translate_output_feeds_identify(files, capsys, tmp_path):
    g = files("g.dsl", CONFOUNDED_MEDIATION)
    q = str(tmp_path / "q.dsl")
    code, _, _ = run(capsys, "translate", "pse-avg", "--graph", g, "--treat", "A=1",
                     "--outcome", "Y", "--beta", "A->Y", "--out", q)
    assert code == 0
    code, out, _ = run(capsys, "identify", "--graph", g, "--query", q)
    assert code == 0 and json.loads(out)["verdict"] == "IDENTIFIED_MWM_ONLY"


def test_evaluate(files, capsys):
    g, q = files("g.dsl", CONFOUNDED_MEDIATION), files("q.dsl", "do A=1; outcome Y;")
    m = random_model(confounded_mediation(), 0)
    scm = files("m.json", json.dumps(m.to_json()))
    code, out, _ = run(capsys, "evaluate", "--graph", g, "--query", q, "--scm", scm)
    assert code == 0
    res = json.loads(out)
    assert res["oracle_max_abs_diff"] <= 1e-12
    assert sum(res["distribution"]["table"]) == pytest.approx(1.0)
    dist = files("p.json", json.dumps(random_joint([(v, 2) for v in "WAMY"], 1).to_json()))
    code, out, _ = run(capsys, "evaluate", "--graph", g, "--query", q, "--dist", dist,
                       "--format", "text")
    assert code == 0 and out.startswith("Y=0\t")
    code, _, _ = run(capsys, "evaluate", "--graph", g, "--query", q)
    assert code == 2


def test_oracle_check(files, capsys, tmp_path):
    g, q = files("g.dsl", CONFOUNDED_MEDIATION), files("q.dsl", "do A=1; outcome Y;")
    rep = tmp_path / "rep"
    code, out, _ = run(capsys, "oracle-check", "--graph", g, "--query", q, "--seeds", "5",
                       "--report", str(rep))
    assert code == 0
    res = json.loads(out)
    assert res["models"] == 10 and res["max_abs_diff"] <= 1e-12
    assert (rep / "oracle_check.csv").read_text().startswith("semantics,seed,max_abs_diff\n")
    assert (rep / "oracle_check.png").stat().st_size > 0
    q2 = files("q2.dsl", "path W->A->Y = 1; path W->A->M->Y = 0; path W->M->Y = 0; outcome Y;")
    code, _, _ = run(capsys, "oracle-check", "--graph", g, "--query", q2, "--seeds", "2")
    assert code == 1


def test_witness(capsys, tmp_path):
    code, out, _ = run(capsys, "witness", "FORK", "--chain", "1", "1", "--out-dir",
                       str(tmp_path / "m"), "--report", str(tmp_path / "r"))
    assert code == 0
    res = json.loads(out)
    assert res["observational_max_abs_diff"] == 0.0 and res["target_total_variation"] > 0.01
    assert (tmp_path / "m" / "model_1.json").exists()
    assert (tmp_path / "r" / "witness_target.csv").read_text().startswith(
        "cell,model_1,model_2\n")
    code, _, _ = run(capsys, "witness", "SINGLE_EDGE", "--chain", "1", "2")
    assert code == 2


def test_report_files_are_reproducible(capsys, tmp_path):
    for d in ("a", "b"):
        run(capsys, "witness", "SINGLE_EDGE", "--report", str(tmp_path / d))
    for name in ("witness_target.csv", "witness_target.png"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_swig(files, capsys):
    g, q = files("g.dsl", CONFOUNDED_MEDIATION), files("q.dsl", "do A=1;")
    code, out, _ = run(capsys, "swig", "--graph", g, "--query", q, "--x", "Y", "--y", "A",
                       "--given", "W")
    res = json.loads(out)
    assert code == 0 and res["d_separated"] is True and res["fixed"] == {"a": 1}
    code, out, _ = run(capsys, "swig", "--graph", g, "--query", q, "--x", "Y", "--y", "A",
                       "--format", "text")
    assert out.endswith("d_separated: false\n")
    q = files("e.dsl", "edge A->M = 0; edge A->Y = 1;")
    code, out, _ = run(capsys, "swig", "--graph", g, "--query", q)
    assert json.loads(out)["fixed"] == {"a": 0, "a'": 1}
    q = files("p.dsl", "path A->M->Y = 1;")
    code, _, _ = run(capsys, "swig", "--graph", g, "--query", q)
    assert code == 2


def test_estimate(files, capsys, tmp_path):
    law = random_law(2)
    dist = files("law.json", json.dumps(law.joint.to_json()))
    code, out, _ = run(capsys, "estimate", "--dist", dist, "--a", "0", "--a-prime", "1")
    res = json.loads(out)
    assert code == 0 and abs(res["eif_mean"]) <= 1e-12
    data = sample(law, 20_000, seed=0)
    csv_path = tmp_path / "units.csv"
    csv_path.write_text("C,A,M,Y\n" + "".join(",".join(map(str, r)) + "\n" for r in data))
    code, out, _ = run(capsys, "estimate", "--data", str(csv_path), "--a", "0", "--a-prime",
                       "1")
    est = json.loads(out)
    assert code == 0 and est["n"] == 20_000
    assert est["estimate"] == pytest.approx(res["phi"], abs=0.03)
    code, _, _ = run(capsys, "estimate", "--a", "0", "--a-prime", "1")
    assert code == 2
