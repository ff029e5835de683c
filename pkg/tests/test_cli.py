import io
import json
import subprocess
import sys
from importlib import resources

import pytest

from cqmkit.cli import main
from cqmkit.solvers.mock_server import MockSolverServer

from _support import REFERENCE_MEALS, assert_valid

MENU_CSV = resources.files("cqmkit.data").joinpath("chicken_waffle.csv").read_text("utf-8")


@pytest.fixture
def menu_csv(tmp_path):
    path = tmp_path / "menu.csv"
    path.write_text(MENU_CSV, encoding="utf-8")
    return str(path)


@pytest.fixture
def model_json(tmp_path, menu_csv, capsys):
    path = tmp_path / "model.json"
    assert main(["build", menu_csv, "--bound", "calories<=700", "-o", str(path)]) == 0
    capsys.readouterr()
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- build -----------------------------------------------------------------


def test_build_model(capsys, menu_csv):
    code, out, _ = run(capsys, "build", menu_csv, "--bound", "calories<=700")
    assert code == 0
    doc = json.loads(out)
    assert_valid("model", doc)
    assert len(doc["variables"]) == 33 and len(doc["constraints"]) == 6


def test_build_side_outputs(capsys, menu_csv, tmp_path):
    qubo, coo, cat = tmp_path / "q.json", tmp_path / "q.txt", tmp_path / "c.json"
    code, _, _ = run(capsys, "build", menu_csv, "--bound", "calories<=700",
                     "--qubo", str(qubo), "--coo", str(coo), "--export-catalog", str(cat))
    assert code == 0
    assert_valid("qubo", json.loads(qubo.read_text()))
    assert_valid("catalog", json.loads(cat.read_text()))
    assert coo.read_text().startswith("# num_vars 46\n")


def test_build_infeasible_bound_still_builds(capsys, menu_csv):
    assert run(capsys, "build", menu_csv, "--bound", "calories<=500")[0] == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["build", "/nonexistent/menu.csv"],
        ["build", "{csv}", "--bound", "calories<700"],
        ["build", "{csv}", "--minimize", "protein"],
        ["build", "{csv}", "--scale", "price=abc"],
    ],
)
def test_build_input_errors(capsys, menu_csv, argv):
    code, out, err = run(capsys, *[a.replace("{csv}", menu_csv) for a in argv])
    assert code == 2 and out == "" and err.startswith("error:")


def test_malformed_csv_reports_row(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("name,item_type,price\nA,g,1\nB,g,oops\n")
    code, _, err = run(capsys, "build", str(path))
    assert code == 2 and "row 3" in err and "price" in err


# -- solve -----------------------------------------------------------------


def test_solve_exact_table(capsys, menu_csv):
    code, out, _ = run(capsys, "solve", menu_csv, "--bound", "calories<=700")
    assert code == 0
    lines = out.splitlines()
    assert "Total Price" in lines[1]
    assert "$21.75" in lines[3]


def test_solve_exact_json(capsys, menu_csv):
    code, out, _ = run(capsys, "solve", menu_csv, "--bound", "calories<=700", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert_valid("solve_result", doc)
    assert doc["feasible"] and doc["backend"] == "exact"
    assert "wall_time" not in doc
    first = doc["samples"][0]
    assert first["energy"] == pytest.approx(21.75)
    assert first["report"]["totals"]["price"] == 21.75
    reported = {tuple(s["report"]["choices"].values()) for s in doc["samples"]}
    for names, _, _ in REFERENCE_MEALS:
        assert names in reported


def test_table_and_json_agree(capsys, menu_csv):
    args = ("solve", menu_csv, "--bound", "calories<=700", "--top-k", "3")
    _, table, _ = run(capsys, *args, "--show", "1000")
    _, js, _ = run(capsys, *args, "--format", "json")
    doc = json.loads(js)
    rows = table.splitlines()[3:]
    assert len(rows) == len(doc["samples"])
    for row, sample in zip(rows, doc["samples"]):
        totals = sample["report"]["totals"]
        assert f"${totals['price']:.2f}" in row
        assert f"{totals['calories']:.1f}" in row
        for name in sample["report"]["choices"].values():
            assert name in row


def test_solve_infeasible_exit_3(capsys, menu_csv):
    code, out, _ = run(capsys, "solve", menu_csv, "--bound", "calories<=500")
    assert code == 3
    assert "No feasible solution" in out and "542.9" in out
    code, out, _ = run(capsys, "solve", menu_csv, "--bound", "calories<=500", "--format", "json")
    doc = json.loads(out)
    assert_valid("solve_result", doc)
    assert code == 3 and not doc["feasible"]
    least = doc["least_violation"]
    assert least["report"]["totals"]["calories"] == 542.9
    assert least["violations"][0]["violation"] == pytest.approx(42.9, abs=1e-6)


def test_solve_sa_deterministic(capsys, menu_csv):
    args = ("solve", menu_csv, "--bound", "calories<=700", "--backend", "sa",
            "--seed", "7", "--format", "json")
    a, b = run(capsys, *args), run(capsys, *args)
    assert a[0] == 0 and a[1] == b[1]
    doc = json.loads(a[1])
    assert_valid("solve_result", doc)
    assert sum(s["num_occurrences"] for s in doc["samples"]) == doc["total_reads"] == 100


def test_solve_sa_flags(capsys, model_json):
    code, out, _ = run(capsys, "solve", model_json, "--backend", "sa", "--reads", "10",
                       "--sweeps", "100", "--moves", "flip", "--penalty-weight", "500",
                       "--workers", "2", "--format", "json", "--timing")
    doc = json.loads(out)
    assert code in (0, 3)
    assert doc["total_reads"] == 10 and doc["wall_time"] >= 0
    assert_valid("solve_result", doc)


def test_solve_model_json_and_stdin(capsys, model_json, monkeypatch):
    code, out, _ = run(capsys, "solve", model_json, "--format", "json")
    assert code == 0
    from_file = json.loads(out)
    assert "report" not in from_file["samples"][0]
    assert_valid("solve_result", from_file)
    with open(model_json) as fh:
        monkeypatch.setattr(sys, "stdin", io.StringIO(fh.read()))
    code, out2, _ = run(capsys, "solve", "-", "--format", "json")
    assert code == 0 and out2 == out


def test_model_json_rejects_spec_flags(capsys, model_json):
    assert run(capsys, "solve", model_json, "--bound", "calories<=1")[0] == 2


def test_invalid_sa_params(capsys, menu_csv):
    assert run(capsys, "solve", menu_csv, "--backend", "sa", "--reads", "0")[0] == 2


def test_size_limit_exit_5(capsys, tmp_path):
    lines = ["name,item_type,price"]
    for g in range(9):
        lines += [f"i{g}_{k},g{g},{k}" for k in range(8)]
    path = tmp_path / "big.csv"
    path.write_text("\n".join(lines) + "\n")
    code, _, err = run(capsys, "solve", str(path))
    assert code == 5 and "too large" in err
    assert run(capsys, "enumerate", str(path))[0] == 5


def test_remote_backend(capsys, menu_csv, monkeypatch):
    monkeypatch.setenv("CQMKIT_TOKEN", "tok")
    with MockSolverServer("exact", token="tok") as srv:
        code, out, _ = run(capsys, "solve", menu_csv, "--bound", "calories<=700",
                           "--backend", "remote", "--endpoint", srv.url, "--reads", "3",
                           "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["backend"] == "remote:mock-exact"
    assert doc["samples"][0]["energy"] == pytest.approx(21.75)


def test_remote_backend_errors(capsys, menu_csv):
    with MockSolverServer("error") as srv:
        code, _, err = run(capsys, "solve", menu_csv, "--backend", "remote", "--endpoint", srv.url)
    assert code == 4 and "RemoteStatusError" in err
    assert run(capsys, "solve", menu_csv, "--backend", "remote")[0] == 2


# -- check -----------------------------------------------------------------


def test_check_feasible_items(capsys, menu_csv):
    names = REFERENCE_MEALS[0][0]
    code, out, _ = run(capsys, "check", menu_csv, "--bound", "calories<=700", "--items", *names)
    assert code == 0
    assert "totals: price=$21.75, calories=620.4" in out
    assert out.rstrip().endswith("feasible")


def test_check_two_waffles(capsys, menu_csv):
    names = list(REFERENCE_MEALS[0][0]) + ["The Classic"]
    code, out, _ = run(capsys, "check", menu_csv, "--items", *names, "--format", "json")
    doc = json.loads(out)
    assert_valid("check_result", doc)
    assert code == 3
    violated = [c["name"] for c in doc["constraints"] if not c["satisfied"]]
    assert violated == ["one_hot:waffle"]


def test_check_tighter_bound(capsys, menu_csv, tmp_path):
    path = tmp_path / "meal.txt"
    path.write_text("\n".join(REFERENCE_MEALS[0][0]) + "\n")
    code, out, _ = run(capsys, "check", menu_csv, "--bound", "calories<=600",
                       "--assignment", str(path), "--format", "json")
    doc = json.loads(out)
    assert code == 3
    (bound,) = [c for c in doc["constraints"] if c["name"] == "bound:calories"]
    assert bound["violation"] == pytest.approx(20.4, abs=1e-6)
    assert doc["report"]["totals"] == {"price": 21.75, "calories": 620.4}


def test_check_bit_vector_file(capsys, model_json, tmp_path):
    path = tmp_path / "bits.json"
    path.write_text(json.dumps([0] * 33))
    code, out, _ = run(capsys, "check", model_json, "--assignment", str(path))
    assert code == 3 and "infeasible" in out


def test_check_unknown_label(capsys, menu_csv):
    code, _, err = run(capsys, "check", menu_csv, "--items", "Pancakes")
    assert code == 2 and "Pancakes" in err


# -- enumerate -------------------------------------------------------------


def test_enumerate_count(capsys, menu_csv):
    code, out, _ = run(capsys, "enumerate", menu_csv)
    assert code == 0 and out == "combinations: 10976\n"
    code, out, _ = run(capsys, "enumerate", menu_csv, "--format", "json")
    doc = json.loads(out)
    assert_valid("enumerate_result", doc)
    assert doc["combinations"] == 10976


def test_enumerate_single_item(capsys, tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("name,item_type,price\nA,g,1\n")
    assert run(capsys, "enumerate", str(path))[1] == "combinations: 1\n"


def test_enumerate_dump(capsys, menu_csv):
    code, out, _ = run(capsys, "enumerate", menu_csv, "--bound", "calories<=700", "--dump", "-")
    rows = out.splitlines()
    assert code == 0 and len(rows) == 10977
    assert rows[0] == "rank,waffle,smear,chicken,drizzle,side,price,calories,feasible"
    prices = [(float(r.split(",")[-3]), float(r.split(",")[-2])) for r in rows[1:]]
    assert prices == sorted(prices)
    # cheapest price, then fewest calories: 284.4 + 70 + 130 + 35 + 63
    assert rows[1].endswith(",21.75,582.4,yes")


def test_console_entry_point(menu_csv):
    proc = subprocess.run(
        [sys.executable, "-m", "cqmkit.cli", "enumerate", menu_csv],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "combinations: 10976\n"
