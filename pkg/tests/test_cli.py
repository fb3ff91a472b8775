"""CLI behaviour: exit codes, JSON schema stability (golden files), CSV output.

Set ``PICFUCHS_REGEN_GOLDEN=1`` to rewrite the golden files after an
intentional format change.
"""
import csv
import io
import json
import os
from pathlib import Path

import pytest

from picfuchs.cli import main

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("PICFUCHS_REGEN_GOLDEN") == "1"

CASES = {
    "check_cubic": ["check", "--ham", "(x^3+y^3)/3 - x", "--backend", "rational"],
    "check_not_regular": ["check", "--ham", "x^2*y^2 + x"],
    "normalize_balance": ["normalize", "--ham", "(x^3+y^3)/3 + 10*x", "--backend", "rational"],
    "derive_homogeneous": ["derive", "--ham", "(x^3+y^3)/3", "--backend", "rational"],
    "derive_hyperelliptic": ["derive", "--kind", "hyperelliptic", "--poly", "x^3 - x", "--backend", "rational",
                             "--etas"],
    "derive_block": ["derive", "--kind", "hyperelliptic", "--poly", "x^2", "--backend", "rational",
                     "--block", "4"],
    "derive_unbalanced": ["derive", "--kind", "unbalanced", "--ham", "(x^2+y^2)/2 + 3*x",
                          "--backend", "rational"],
    "verify_ellipse": ["verify", "--kind", "hyperelliptic", "--poly", "x^2", "--t-min", "0.1", "--t-max", "2"],
    "critgeom_roots": ["critgeom", "roots", "--poly", "x^3 - 2*x"],
    "error_parse": ["check", "--ham", "x + z"],
    "error_not_balanced": ["derive", "--ham", "(x^3+y^3)/3 + 5*x", "--backend", "rational"],
    "error_no_oval": ["periods", "--poly", "x^3 + x"],
}

EXIT = {"error_parse": 2, "error_not_balanced": 2, "error_no_oval": 2}


def run(argv, tmp=None):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def close(a, b, path="$"):
    if isinstance(a, dict):
        assert isinstance(b, dict) and sorted(a) == sorted(b), "keys differ at %s" % path
        for k in a:
            close(a[k], b[k], "%s.%s" % (path, k))
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), "length differs at %s" % path
        for i, (x, y) in enumerate(zip(a, b)):
            close(x, y, "%s[%d]" % (path, i))
    elif isinstance(a, float) or isinstance(b, float):
        assert b == pytest.approx(a, rel=1e-9, abs=1e-12), path
    else:
        assert a == b, path


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    code, out, _ = run(CASES[name])
    assert code == EXIT.get(name, 0)
    doc = json.loads(out)
    assert doc["schema"] == "pf/1"
    path = GOLDEN / (name + ".json")
    if REGEN:
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(out, encoding="utf-8")
    close(json.loads(path.read_text(encoding="utf-8")), doc)


def test_deterministic_across_runs():
    first = run(CASES["derive_hyperelliptic"])[1]
    assert run(CASES["derive_hyperelliptic"])[1] == first


def test_parse_error_span():
    code, out, _ = run(["check", "--ham", "x+z"])
    err = json.loads(out)["error"]
    assert code == 2 and err["kind"] == "parse" and err["span"] == [2, 3]


def test_periods_flags_levels_without_oval():
    code, out, _ = run(["periods", "--poly", "x^3 + x", "--t-min", "0", "--t-max", "1", "--count", "2"])
    assert code == 0
    assert [r[-1] for r in csv.reader(io.StringIO(out))][1:] == ["no_oval", "no_oval"]


def test_periods_csv(tmp_path):
    code, out, _ = run(["periods", "--poly", "x^2", "--t-min", "0.5", "--t-max", "1", "--count", "3",
                        "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "I1_re", "I1_im", "Idot1_re", "Idot1_im", "flag"]
    assert len(rows) == 4 and all(r[-1] == "ok" for r in rows[1:])
    assert float(rows[3][1]) == pytest.approx(2 ** 0.5 * 3.141592653589793, rel=1e-10)
    assert (tmp_path / "periods.csv").read_text(encoding="utf-8") == out


def test_out_directory(tmp_path):
    code, out, _ = run(["derive", "--ham", "(x^3+y^3)/3", "--out", str(tmp_path)])
    assert code == 0
    assert json.loads((tmp_path / "derive.json").read_text()) == json.loads(out)


def test_verify_detects_success_flag():
    code, out, _ = run(["verify", "--ham", "(x^3+y^3)/3 - x/2 + y/3", "--backend", "rational"])
    doc = json.loads(out)
    assert code == 0 and doc["ok"] and doc["witness_defect"] == 0


def test_fuchsianized_via_cli():
    code, out, _ = run(["derive", "--kind", "fuchsianized", "--ham", "(x^3+y^3)/3 - x/2 + y/3",
                        "--lambdas", "10,11"])
    assert code == 0 and json.loads(out)["provenance"] == "fuchsianized"


def test_examples_via_ham():
    code, out, _ = run(["verify", "--ham", "y^2/2 + x^3 - x", "--kind", "hyperelliptic", "--samples", "20"])
    doc = json.loads(out)
    assert code == 0 and doc["ode_residual"] <= 1e-6
    code, out, _ = run(["critgeom", "roots", "--poly", "x^3 - 1.889*x"])
    assert code == 0 and json.loads(out)["root_diameter"] == pytest.approx(2.75, abs=0.01)
    code, out, _ = run(["derive", "--ham", "(x^3+y^3)/3", "--kind", "redundant"])
    doc = json.loads(out)
    assert all(v == [0.0, 0.0] for r in doc["A"] for v in r)


def test_missing_argument_is_precondition_error():
    code, out, _ = run(["periods"])
    assert code == 2 and "error" in json.loads(out)


def test_internal_error_exit_code(monkeypatch):
    import picfuchs.cli as cli

    def boom(args):
        raise RuntimeError("kaboom")
    monkeypatch.setattr(cli, "cmd_check", boom)
    code, out, err = run(["check", "--ham", "x^2"])
    assert code == 1 and out == ""
    assert json.loads(err)["error"]["message"] == "kaboom"


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["derive", "--help"])
    assert exc.value.code == 0
    assert "default: float" in capsys.readouterr().out
