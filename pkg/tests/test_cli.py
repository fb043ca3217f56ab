import io
import json
import os
import subprocess
import sys

import pytest

from pathgeom import cli


def run(*argv):
    buf = io.StringIO()
    code = cli.run_cli(list(argv), out=buf)
    return code, buf.getvalue()


def write(tmp_path, doc, name="doc.geom"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def test_invariants_on_submax():
    code, text = run("invariants", "submax.geom")
    assert code == 0
    assert "wilczynski: vanishes, fels: nonzero" in text
    assert "seed: 314159" in text


def test_invariants_reports_torsion_without_failing(tmp_path):
    path = write(tmp_path, {"system": {"F": "Y", "G": "0"}})
    code, text = run("invariants", path)
    assert code == 0
    assert "wilczynski: nonzero" in text


def test_beta_dimension():
    code, text = run("beta-dim", "--xi", "3=-2")
    assert code == 0 and "dimension: 9" in text
    code, text = run("beta-dim", "--xi", "5=1")
    assert "dimension: 7" in text


@pytest.mark.parametrize(
    "command, doc",
    [
        ("symmetry", "submax"),
        ("symmetry", "fourdexam"),
        ("curvature", "reciprocal"),
        ("curvature", "boris"),
        ("heavenly", "submax"),
        ("from-theta", "submax"),
        ("twistor", "submax"),
        ("twistor", "boris"),
        ("finsler", "dsym"),
        ("finsler", "submax_finsler"),
        ("curvature", "gibbons_hawking"),
        ("twistor", "fourdexam"),
        ("symmetry", "ode_sym_4"),
    ],
)
def test_bundled_documents_pass(command, doc):
    code, text = run(command, f"{doc}.geom")
    assert code == 0, text


def test_json_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("curvature", "boris.geom", "--json", str(a))[0] == 0
    assert run("curvature", "boris.geom", "--json", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["seed"] == 314159


def test_missing_document_is_input_error():
    assert run("invariants", "/nonexistent/nothing.geom")[0] == 2


def test_expression_syntax_error(tmp_path, capsys):
    path = write(tmp_path, {"system": {"F": "p0 +* 1", "G": "0"}})
    code, _ = run("invariants", path)
    assert code == 2
    assert "column" in capsys.readouterr().err


def test_invalid_json(tmp_path, capsys):
    path = write(tmp_path, '{"system": ')
    assert run("invariants", path)[0] == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_unknown_block(tmp_path):
    path = write(tmp_path, {"system": {"F": "0", "G": "0"}, "frobnicate": {}})
    assert run("invariants", path)[0] == 2


def test_undeclared_variable(tmp_path):
    path = write(tmp_path, {"system": {"F": "q", "G": "0"}})
    assert run("invariants", path)[0] == 2


def test_analysis_error_exit_code(tmp_path, capsys):
    path = write(
        tmp_path,
        {"zermelo": {"h": ["1", "0", "0", "1", "0", "Y^2"], "W": ["0", "0", "1"], "box": {"Y": [0.5, 1.5]}}},
    )
    assert run("finsler", path)[0] == 1
    assert "analysis error" in capsys.readouterr().err


def test_fixtures_subset():
    code, text = run("fixtures", "--criteria", "2,3")
    assert code == 0
    assert "criterion  2 PASS" in text and "criterion  3 PASS" in text


def test_module_entry_point():
    env = dict(os.environ, PATHGEOM_NUMBA="0")
    proc = subprocess.run(
        [sys.executable, "-m", "pathgeom", "beta-dim", "--xi", "3=-2"], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0
    assert "dimension: 9" in proc.stdout
