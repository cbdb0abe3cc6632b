import json
from fractions import Fraction

import pytest

from ccm_lab import cli
from ccm_lab.errors import InvariantViolation
from ccm_lab.means import KmuCheck
from ccm_lab.specfile import ParseError, SchemaError, emit_csv, emit_json, parse_spec

S3 = """
command = "dc"
[group]
builder = "symmetric"
n = 3
"""

NEUMANN = """
[group]
builder = "integers"
[params]
cosets = [
  {generators = [[[2], "0"]], rep = [[0], "0"]},
  {generators = [[[4], "0"]], rep = [[1], "0"]},
  {generators = [[[4], "0"]], rep = [[3], "0"]},
]
"""

DIHEDRAL_CHAIN = """
[group]
builder = "infinite_dihedral"
[params]
chain = [{generators = [[[3], "0"]]}, {generators = [[[%d], "0"]]}]
"""

REQUESTS = {
    "dc": S3,
    "dc-strata": '[group]\nbuilder = "mod2_symplectic"\n',
    "dc-rf": '[group]\nbuilder = "infinite_dihedral"\n[params]\nmoduli = [3, 5, 7]\n',
    "strata": '[group]\nbuilder = "infinite_dihedral"\n',
    "neumann-check": NEUMANN,
    "witness": """
[group]
builder = "infinite_dihedral"
[params]
constraints = [{generators = [[[2], "0"]], eps = "1/3"}, {generators = [[[0], "1"]], eps = "1/4"}]
""",
    "folner": """
[group]
builder = "free_abelian"
n = 2
[params]
K = [[[1, 0], "0"], [[0, 1], "0"]]
eps = "1/4"
""",
    "defect": '[group]\nbuilder = "cyclic"\nn = 2\n[params]\nmean = {"0" = "3/4", "1" = "1/4"}\n',
    "smooth": '[group]\nbuilder = "cyclic"\nn = 2\n[params]\nmean = {"0" = "3/4", "1" = "1/4"}\n',
    "kmu": '[group]\nbuilder = "symmetric"\nn = 3\n',
    "transversal": '[group]\nbuilder = "heisenberg_f2"\nn = 1\n[params]\nK = []\ng = [0, 1]\n',
    "faf-witness": '[group]\nbuilder = "integral_heisenberg"\n',
}


def run(tmp_path, capsys, command, text, *extra):
    spec = tmp_path / "req.toml"
    spec.write_text(text)
    code = cli.main([command, "--spec", str(spec), *extra])
    out = capsys.readouterr()
    return code, out.out, out.err


def result(out):
    return json.loads(out)["result"]


# ---- parse_spec ----------------------------------------------------------------------

def test_parse_dc_request():
    req = parse_spec('command = "dc"\n[group]\nbuilder = "dihedral"\nn = 4\n')
    assert req.command == "dc" and req.group.order == 8


def test_parse_error_has_location():
    with pytest.raises(ParseError) as e:
        parse_spec('command = "dc"\n[group\nbuilder = "cyclic"\n')
    assert e.value.line == 2 and e.value.column is not None
    assert "line 2" in str(e.value)


@pytest.mark.parametrize("text, fragment", [
    ('[group]\nbuilder = "cyclic"\nn = 3\n', "no command"),
    ('command = "frobnicate"\n[group]\nbuilder = "cyclic"\nn = 3\n', "unknown command"),
    ('command = "dc"\n', "missing [group]"),
    ('command = "dc"\nextra = 1\n[group]\nbuilder = "cyclic"\nn = 3\n', "unknown top-level"),
    ('command = "dc"\n[group]\nbuilder = "nonsense"\n', "bad group"),
    ('command = "dc"\n[group]\nclass = "finite"\ntable = [[0, 1], [0, 1]]\n', "bad group"),
    ('command = "dc-rf"\n[group]\nbuilder = "infinite_dihedral"\n', "exactly one of"),
    ('command = "dc-rf"\n[group]\nbuilder = "infinite_dihedral"\n[params]\nmoduli = [0]\n', "positive"),
    ('command = "folner"\n[group]\nbuilder = "integers"\n[params]\neps = "0"\n', "eps"),
    ('command = "folner"\n[group]\nbuilder = "integers"\n[params]\neps = 0.5\n', "eps"),
    ('command = "witness"\n[group]\nbuilder = "integers"\n', "constraints or atoms"),
    ('command = "defect"\n[group]\nbuilder = "integers"\n', "finite group"),
    ('command = "defect"\n[group]\nbuilder = "cyclic"\nn = 2\n[params]\nmean = {"0" = "1/3"}\n', "bad mean"),
    ('command = "transversal"\n[group]\nbuilder = "cyclic"\nn = 2\n[params]\nK = [[0]]\ng = [0, 1]\n', "pair"),
    ('command = "neumann-check"\n[group]\nbuilder = "integers"\n[params]\ncosets = [{generators = [[[1, 2], "0"]]}]\n',
     "bad generator"),
])
def test_schema_errors(text, fragment):
    with pytest.raises(SchemaError) as e:
        parse_spec(text)
    assert fragment in str(e.value)


def test_non_nested_chain_names_the_pair():
    with pytest.raises(SchemaError) as e:
        parse_spec(DIHEDRAL_CHAIN % 5, "dc-rf")
    assert "chain members 0 and 1 are not nested" in str(e.value)
    req = parse_spec(DIHEDRAL_CHAIN % 6, "dc-rf")
    assert req.command == "dc-rf"
    relaxed = (DIHEDRAL_CHAIN % 5).replace("chain =", "require_nested = false\nchain =")
    assert parse_spec(relaxed, "dc-rf").params["require_nested"] is False


def test_command_argument_must_match_file():
    with pytest.raises(SchemaError):
        parse_spec(S3, "dc-strata")


@pytest.mark.parametrize("command", sorted(REQUESTS))
def test_round_trip(command):
    req = parse_spec(REQUESTS[command], command)
    again = parse_spec(req.as_toml())
    assert (again.command, again.group_spec, again.params) == (req.command, req.group_spec, req.params)


def test_group_file_reference(tmp_path):
    (tmp_path / "g.toml").write_text('[group]\nbuilder = "dihedral"\nn = 4\n')
    req = parse_spec('command = "dc"\n[group]\nfile = "g.toml"\n', base_dir=str(tmp_path))
    assert req.group.order == 8
    with pytest.raises(OSError):
        parse_spec('command = "dc"\n[group]\nfile = "missing.toml"\n', base_dir=str(tmp_path))


# ---- dispatch examples ---------------------------------------------------------------

def test_dc_s3(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "dc", S3)
    assert code == 0 and result(out) == {"dc": "1/2"}


def test_neumann_three_cosets(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "neumann-check", NEUMANN)
    r = result(out)
    assert code == 0 and r["covers"] is True and r["sum"] == "1/1"


def test_neumann_uncovered(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "neumann-check", NEUMANN.replace("[[3], \"0\"]", "[[1], \"0\"]"))
    r = result(out)
    assert code == 0 and r["covers"] is False and r["sum"] == "1/1" and "uncovered" in r


def test_dc_rf_dihedral(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "dc-rf", REQUESTS["dc-rf"])
    r = result(out)
    assert [row["dc"] for row in r["rows"]] == ["1/2", "2/5", "5/14"]
    assert [row["order"] for row in r["rows"]] == [6, 10, 14]
    assert r["nested"] == [False, False] and r["dominates"] and r["dc_strata"] == "1/4"


def test_dc_rf_csv_rows(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "dc-rf", REQUESTS["dc-rf"], "--format", "csv")
    assert out.splitlines() == ["dc,member,order", "1/2,m=3,6", "2/5,m=5,10", "5/14,m=7,14"]


def test_strata_json(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "strata", REQUESTS["strata"])
    r = result(out)
    assert {row["m"]: row["measure"] for row in r["rows"]} == {1: "0/1", 2: "1/2", "inf": "1/2"}
    assert r["dc"] == "1/4" and r["strata"]["inf"]["measure"] == "1/2"
    assert list(json.loads(out)) == sorted(json.loads(out))


def test_witness_report_has_certificate(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "witness", REQUESTS["witness"])
    r = result(out)
    assert code == 0 and r["size"] == len(r["elements"]) and all(c["ok"] for c in r["certificate"])
    assert r["certificate"][0]["deviation"] == "0/1"


def test_folner_with_atoms(tmp_path, capsys):
    text = """
[group]
builder = "infinite_dihedral"
[params]
K = [[[1], "0"], [[0], "1"]]
eps = "1/3"
atoms = [
  {cosets = [{generators = [[[3], "0"], [[0], "1"]], rep = [[0], "0"]}], target = "1/3"},
  {cosets = [{generators = [[[3], "0"], [[0], "1"]], rep = [[1], "0"]}], target = "1/3"},
  {cosets = [{generators = [[[3], "0"], [[0], "1"]], rep = [[2], "0"]}], target = "1/3"},
]
"""
    code, out, _ = run(tmp_path, capsys, "folner", text)
    r = result(out)
    assert code == 0 and r["core_size"] == 3 and all(c["ok"] for c in r["certificate"])


def test_means_commands(tmp_path, capsys):
    _, out, _ = run(tmp_path, capsys, "defect", REQUESTS["defect"])
    assert result(out) == {"left": "1/2", "right": "1/2"}
    _, out, _ = run(tmp_path, capsys, "smooth", REQUESTS["smooth"])
    r = result(out)
    assert r["mean"] == {"0": "5/8", "1": "3/8"} and r["rows"][1]["left"] == "1/4"
    _, out, _ = run(tmp_path, capsys, "kmu", REQUESTS["kmu"])
    r = result(out)
    assert r["k_mu"] == r["k_uniform"] == "1/2" and len(r["rows"]) == 6


def test_transversal_and_faf(tmp_path, capsys):
    _, out, _ = run(tmp_path, capsys, "transversal", REQUESTS["transversal"])
    assert result(out)["found"] is True
    _, out, _ = run(tmp_path, capsys, "faf-witness", REQUESTS["faf-witness"])
    assert result(out)["is_faf"] is False
    _, out, _ = run(tmp_path, capsys, "faf-witness", REQUESTS["dc-strata"])
    r = result(out)
    assert r["is_faf"] is True and all(r["checks"].values())


@pytest.mark.parametrize("command", sorted(REQUESTS))
def test_byte_determinism(tmp_path, capsys, command):
    outs = []
    for fmt in ("json", "csv"):
        for _ in range(2):
            code, out, _ = run(tmp_path, capsys, command, REQUESTS[command], "--format", fmt)
            assert code == 0
            outs.append("\n".join(l for l in out.splitlines() if "timing_seconds" not in l))
    assert outs[0] == outs[1] and outs[2] == outs[3]


def test_rationals_round_trip():
    report = {"result": {"x": Fraction(-3, 7), "y": [Fraction(1), Fraction(0)]}}
    back = json.loads(emit_json(report))["result"]
    assert [Fraction(back["x"])] + [Fraction(v) for v in back["y"]] == [Fraction(-3, 7), 1, 0]
    assert emit_json(report) == emit_json(report)
    assert "result.x,-3/7" in emit_csv(report)


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run(tmp_path, capsys, "dc", S3, "--out", str(target))
    assert code == 0 and out == "" and json.loads(target.read_text())["result"]["dc"] == "1/2"


# ---- exit codes ---------------------------------------------------------------------

def test_exit_2_parse_and_schema(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, "dc", "[group\n")
    assert code == 2 and "ParseError" in err and "line 1" in err
    code, _, err = run(tmp_path, capsys, "dc-rf", DIHEDRAL_CHAIN % 5)
    assert code == 2 and "not nested" in err
    assert cli.main(["dc"]) == 2


def test_exit_3_unsupported_and_too_large(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, "dc", REQUESTS["faf-witness"])
    assert code == 3 and "UnsupportedForClass" in err
    code, _, err = run(tmp_path, capsys, "dc-rf", REQUESTS["dc-rf"], "--cap", "8")
    assert code == 3 and "QuotientTooLarge" in err


def test_exit_3_atom_too_small(tmp_path, capsys):
    text = """
[group]
builder = "cyclic"
n = 2
[params]
size = 5
atoms = [{cosets = [{generators = [], rep = 0}], target = "1/1"},
         {cosets = [{generators = [], rep = 1}], target = "0"}]
"""
    code, _, err = run(tmp_path, capsys, "witness", text)
    assert code == 3 and "AtomTooSmall" in err


def test_exit_1_invariant_violation(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "kmu_strata_inequality", lambda G, mu, n: KmuCheck(Fraction(2), Fraction(1), False))
    code, _, err = run(tmp_path, capsys, "kmu", REQUESTS["kmu"])
    assert code == 1 and "InvariantViolation" in err

    def broken(*a, **k):
        raise InvariantViolation("recomputed certificate disagrees")
    monkeypatch.setattr(cli, "recompute_certificate", broken)
    code, _, err = run(tmp_path, capsys, "witness", REQUESTS["witness"])
    assert code == 1


def test_exit_1_verify_all_failure(tmp_path, capsys, monkeypatch):
    import ccm_lab.verify as verify

    fake = [verify.CriterionResult(1, "x", True, 0.0, 1.0), verify.CriterionResult(2, "y", False, 0.0, 1.0, "boom")]
    monkeypatch.setattr(verify, "run_all", lambda seed=0, echo=None: fake)
    assert cli.main(["verify-all"]) == 1
    rows = json.loads(capsys.readouterr().out)["result"]["rows"]
    assert [r["passed"] for r in rows] == [True, False]


def test_exit_4_io(tmp_path, capsys):
    assert cli.main(["dc", "--spec", str(tmp_path / "missing.toml")]) == 4
    code, _, _ = run(tmp_path, capsys, "dc", S3, "--out", str(tmp_path / "no" / "dir" / "r.json"))
    assert code == 4
    code, _, err = run(tmp_path, capsys, "dc", '[group]\nfile = "nope.toml"\n')
    assert code == 4


def test_exit_0_verify_all_single_pass(capsys, monkeypatch):
    import ccm_lab.verify as verify

    monkeypatch.setattr(verify, "run_all", lambda seed=0, echo=None: [verify.run_criterion(10)])
    assert cli.main(["verify-all", "--format", "csv"]) == 0
    assert "true" in capsys.readouterr().out
