import json
import subprocess
import sys

import pytest

from sppfix.cli import EXIT_BUDGET, EXIT_ERROR, EXIT_OK, main
from sppfix.families import BACK_BUTTON_TEXT, back_button_model
from sppfix.frontends import back_button_to_dict


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_solve_back_button(capsys):
    code, data = run_json(capsys, "solve", "@back-button", "--max-iters", "14")
    assert code == EXIT_OK
    assert data["iterations"] == 14 and data["method"] == "newton"
    vals = {k: float(v) for k, v in data["values"].items()}
    assert vals["X1"] == pytest.approx(0.98283, abs=1e-4)
    assert vals["X2"] == pytest.approx(0.97380, abs=1e-4)
    assert vals["X3"] == pytest.approx(0.99270, abs=1e-4)


@pytest.mark.parametrize("method", ["kleene", "newton", "tangent", "dnm"])
def test_solve_methods(capsys, method):
    code, data = run_json(capsys, "solve", "@two-dim", "--method", method, "--max-iters", "8")
    assert code == EXIT_OK and data["method"] == method


def test_solve_exact_scalar(capsys):
    code, data = run_json(capsys, "solve", "@half", "--scalar", "rational", "--max-iters", "4")
    assert code == EXIT_OK and data["values"] == {"X": "15/16"}


def test_solve_dsl_file_and_zero_components(tmp_path, capsys):
    src = tmp_path / "s.spp"
    src.write_text("X = 0.5*X*Y + 0.5\nY = 0.5*Y^2 + 0.5*Y\n")
    code, out, _ = run(capsys, "solve", str(src), "--max-iters", "5")
    assert code == EXIT_OK
    assert "removed" in out and "Y" in out


def test_solve_error_exits(capsys):
    assert run(capsys, "solve", "@worst:0")[0] == EXIT_ERROR
    assert run(capsys, "solve", "@nope")[0] == EXIT_ERROR
    assert run(capsys, "solve", "missing-file.spp")[0] == EXIT_ERROR


@pytest.mark.parametrize(
    "text,name",
    [("X = X\n", "EmptySystem"), ("X = X^2 + 1\n", "DivergenceSuspected"), ("X = 0.5*Y\n", "")],
)
def test_solve_bad_systems(tmp_path, capsys, text, name):
    src = tmp_path / "bad.spp"
    src.write_text(text)
    code, _, err = run(capsys, "solve", str(src), "--max-iters", "60")
    assert code == EXIT_ERROR
    assert name in err and err.startswith("sppfix: error:")


def test_certify_back_button(capsys):
    code, data = run_json(capsys, "certify", "@back-button", "--target-bits", "13")
    assert code == EXIT_OK and data["reached"]
    (scc,) = data["sccs"]
    assert scc["iterations"] <= 10
    cert = scc["certificate"]
    assert cert["justification"] == "Proximity2" and cert["bits"] >= 13
    assert data["global"]["certified"]


def test_certify_budget_exit(capsys):
    code, data = run_json(capsys, "certify", "@half", "--target-bits", "1000000", "--max-iters", "5")
    assert code == EXIT_BUDGET and not data["reached"]
    code, _, _ = run(capsys, "certify", "@half", "--target-bits", "1")
    assert code == EXIT_OK


def test_certify_decomposed_system_is_flagged(capsys):
    code, data = run_json(capsys, "certify", "@worst:3", "--target-bits", "4")
    assert code == EXIT_OK
    assert len(data["sccs"]) == 3
    assert not data["global"]["certified"]
    assert "UNCERTIFIED" in data["global"]["note"]


def test_certify_rejects_nonpositive_target(capsys):
    code, _, err = run(capsys, "certify", "@half", "--target-bits", "0")
    assert code == EXIT_ERROR and "target-bits" in err


def test_decompose_worst_case(capsys):
    code, data = run_json(capsys, "decompose", "@worst:3")
    assert code == EXIT_OK
    assert data["height"] == 2
    depth = {tuple(s["members"]): s["depth"] for s in data["sccs"]}
    assert depth == {("X1",): 2, ("X2",): 1, ("X3",): 0}


def test_convert_model_json(tmp_path, capsys):
    src = tmp_path / "bb.json"
    src.write_text(json.dumps(back_button_to_dict(back_button_model())))
    code, out, _ = run(capsys, "convert", str(src))
    assert code == EXIT_OK and out == BACK_BUTTON_TEXT
    code, data = run_json(capsys, "convert", str(src))
    assert "equations" in data and "legend" in data


def test_convert_ppda_has_legend_comments(tmp_path, capsys):
    src = tmp_path / "p.json"
    src.write_text(json.dumps({
        "states": ["p"], "alphabet": ["X"],
        "rules": [
            {"from": ["p", "X"], "to": ["p", "XX"], "prob": "1/2"},
            {"from": ["p", "X"], "to": ["p", ""], "prob": "1/2"},
        ],
    }))
    code, out, _ = run(capsys, "convert", str(src))
    assert code == EXIT_OK
    assert out.splitlines()[0] == "# V_p_X_p = [p X p]"
    # the converted text is itself valid input
    dsl = tmp_path / "p.spp"
    dsl.write_text(out)
    code, data = run_json(capsys, "solve", str(dsl), "--max-iters", "3", "--scalar", "rational")
    assert data["values"] == {"V_p_X_p": "7/8"}


def test_convert_system_json_round_trip(tmp_path, capsys):
    code, out, _ = run(capsys, "convert", "@two-dim", "--json")
    src = tmp_path / "sys.json"
    src.write_text(out)
    code, again, _ = run(capsys, "convert", str(src))
    code, direct, _ = run(capsys, "convert", "@two-dim")
    assert again == direct


def test_bench_small(capsys):
    code, data = run_json(capsys, "bench", "3", "--k", "3")
    assert code == EXIT_OK
    assert [r["k"] for r in data["rows"]] == [1, 2, 3]
    assert all(r["error_exceeds_2^-k"] for r in data["rows"])


def test_bench_rejects_bad_arguments(capsys):
    code, _, _ = run(capsys, "bench", "0")
    assert code == EXIT_ERROR


def test_repeated_runs_are_byte_identical(capsys):
    outs = {run(capsys, "certify", "@back-button", "--target-bits", "13")[1] for _ in range(3)}
    assert len(outs) == 1


def test_console_script_subprocess():
    out = subprocess.run(
        [sys.executable, "-m", "sppfix.cli", "solve", "@half", "--scalar", "rational", "--max-iters", "2"],
        capture_output=True, text=True,
    )
    assert out.returncode == EXIT_OK
    assert out.stdout.rstrip().endswith("X  3/4")
