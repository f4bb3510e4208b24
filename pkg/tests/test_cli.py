"""Command-line surface: exit codes, document schema, plot format, table."""

import json

from click.testing import CliRunner

from thurston import cli


def invoke(*args, env=None):
    return CliRunner().invoke(cli.main, list(args), env=env, catch_exceptions=False)


# ---------------------------------------------------------------- validate

def test_validate_pass():
    result = invoke("validate", "0,4,3,1,2,5")
    assert result.exit_code == 0
    assert "degree 3" in result.output
    assert "expansive: yes" in result.output


def test_validate_warns_on_non_expansive():
    result = invoke("validate", "0,4,3,2,1,2,0")
    assert result.exit_code == 0
    assert "edge [2,3] is not expansive" in result.output


def test_validate_hard_failure():
    assert invoke("validate", "1,2,0").exit_code == 2


def test_validate_parse_failure():
    assert invoke("validate", "0,,1").exit_code == 3


def test_validate_json():
    result = invoke("validate", "0,4,3,1,2,5", "--format", "json")
    doc = json.loads(result.output)
    assert doc["passed"] is True and doc["total_degree"] == 3


# ---------------------------------------------------------------- run

def test_run_emits_document():
    result = invoke("run", "0,3,2,1,4", "--tol", "1e-12")
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert doc["schema"] == "thurston.run.v1"
    assert doc["converged"] is True
    coeffs = [float(s) for s in doc["coefficients"]]
    for got, want in zip(coeffs, (0, 6, -15, 10)):
        assert abs(got - want) < 1e-9
    # all numbers are strings, none are binary floats
    assert all(isinstance(s, str) for s in doc["coefficients"])
    assert all(isinstance(s, str) for s in doc["marked_points"])
    # framing: coefficients sum to the image of the right endpoint
    assert abs(sum(coeffs) - 1) < 10 * float(doc["fit_error"]) + 1e-12


def test_run_document_round_trips(tmp_path):
    out = tmp_path / "result.json"
    result = invoke("run", "0,1,0", "--out", str(out))
    assert result.exit_code == 0
    text = out.read_text()
    doc = cli.parse_document(text)
    assert cli.parse_document(cli.serialize_document(doc)) == doc


def test_run_reports_collapse():
    result = invoke("run", "0,4,3,2,1,2,0")
    doc = json.loads(result.output)
    assert doc["collapse"] and doc["collapse"][0]["after"] == "0,3,2,1,2,0"
    assert doc["combinatorics"] == "0,3,2,1,2,0"


def test_run_invalid_exit_code():
    assert invoke("run", "1,2,0").exit_code == 2


def test_run_non_convergence_exit_code():
    result = invoke("run", "0,4,3,1,2,5", "--max-iter", "2")
    assert result.exit_code == 4


def test_run_env_var_controls_digits():
    result = invoke("run", "0,1,0", env={"THURSTON_DIGITS": "30"})
    doc = json.loads(result.output)
    assert doc["working_digits"] == 30


def test_run_trace():
    result = invoke("run", "0,3,2,1,4", "--trace")
    doc = json.loads(result.output)
    assert len(doc["trace"]) == doc["iterations"]
    assert doc["trace"][0]["step"] == 1


# ---------------------------------------------------------------- plot

def test_plot_samples_and_marked_block():
    result = invoke("plot", "0,1,0", "--samples", "3")
    lines = result.output.strip().splitlines()
    assert lines[0] == "x,f(x)"
    assert lines[1].startswith("0.0,")
    xs = [line.split(",") for line in lines[1:4]]
    assert abs(float(xs[1][0]) - 0.5) < 1e-15
    assert abs(float(xs[1][1]) - 0.5) < 1e-9
    assert abs(float(xs[2][1])) < 1e-9
    marked = [line for line in lines if line.startswith("# marked,")]
    # the interior marked point: x=0.5 with image index 1
    assert any(part.startswith("# marked,1,0.5") and ",1," in part for part in marked)


def test_plot_from_stored_document(tmp_path):
    out = tmp_path / "res.json"
    invoke("run", "0,3,2,1,4", "--out", str(out))
    result = invoke("plot", "--result", str(out), "--samples", "5")
    lines = result.output.strip().splitlines()
    assert lines[0] == "x,f(x)"
    samples = [line for line in lines if not line.startswith("#")][1:]
    assert len(samples) == 5
    assert abs(float(samples[-1].split(",")[1]) - 1.0) < 1e-9  # f(1) = 1


# ---------------------------------------------------------------- table

def test_table_runs_all_reference_rows():
    result = invoke("table", "--format", "json", "--jobs", "0")
    doc = json.loads(result.output)
    assert result.exit_code == 0
    rows = {r["key"]: r for r in doc["rows"]}
    assert all(r["ok"] for r in rows.values())

    def dev(key):
        return float(rows[key]["max_deviation"])

    assert dev("cubic exact") < 1e-9
    assert dev("cubic-period4") < 1e-6
    assert dev("quintic limit") < 1e-4
    assert dev("quintic step 1") < 1e-4
    assert dev("degree 6") < 1e-6
    assert dev("collapse quartic") < 1e-6
    assert dev("collapse sextic") < 1e-5
    # the flagged row: deviation is dominated by the reference misprint
    assert 19 < dev("degree 7") < 21
    assert "framing-inconsistent" in rows["degree 7"]["note"]
    assert rows["collapse quartic"]["collapse"] == ["0,3,2,1,2,0"]
    assert rows["collapse sextic"]["collapse"] == ["0,4,0,1,0,6,0"]
