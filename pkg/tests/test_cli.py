"""Command-line interface tests, run in-process through cli_main."""

import json

import numpy as np
import pytest

from fbqp import QpProblem, save_problem
from fbqp.cli import cli_main

INFEASIBLE = QpProblem(H=np.eye(1), f=[0.0], G=[[1.0], [1.0]], h=[0.0, 1.0])


@pytest.fixture
def planted_file(tmp_path):
    path = tmp_path / "planted.json"
    code = cli_main(["gen", "--n", "3", "--p", "1", "--q", "3",
                     "--active-frac", "0.5", "--seed", "11", "-o", str(path)])
    assert code == 0
    return path


def test_gen_solve_check_pipeline(planted_file, capsys):
    assert cli_main(["solve", str(planted_file)]) == 0
    out = capsys.readouterr().out
    assert "status: Solved" in out

    # The generated file embeds the planted solution; check accepts it.
    assert cli_main(["check", str(planted_file)]) == 0
    assert "ok: true" in capsys.readouterr().out


def test_solve_json_report(planted_file, capsys):
    assert cli_main(["solve", str(planted_file), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "Solved"
    assert set(report["kkt"]) == {
        "stationarity_inf", "eq_infeas_inf", "ineq_infeas_inf",
        "comp_inf", "dual_neg_inf",
    }
    assert {"objective", "inner_iterations", "outer_iterations",
            "factorizations", "solution"} <= set(report)


def test_solve_output_feeds_check(planted_file, tmp_path, capsys):
    assert cli_main(["solve", str(planted_file), "--json"]) == 0
    solution_path = tmp_path / "solution.json"
    solution_path.write_text(capsys.readouterr().out)
    assert cli_main(
        ["check", str(planted_file), "--solution", str(solution_path), "--json"]
    ) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] is True


def test_solve_trace_rows_match_iteration_count(planted_file, tmp_path, capsys):
    trace_path = tmp_path / "trace.csv"
    assert cli_main(
        ["solve", str(planted_file), "--json", "--trace", str(trace_path)]
    ) == 0
    report = json.loads(capsys.readouterr().out)
    rows = trace_path.read_text().strip().split("\n")
    assert rows[0] == "outer,inner,sigma,merit,kkt_max,step_len"
    assert len(rows) - 1 == report["inner_iterations"]


def test_solve_warm_start_flag(planted_file, tmp_path, capsys):
    assert cli_main(["solve", str(planted_file), "--json"]) == 0
    warm_path = tmp_path / "warm.json"
    warm_path.write_text(capsys.readouterr().out)
    assert cli_main(
        ["solve", str(planted_file), "--warm-start", str(warm_path), "--json"]
    ) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "Solved"
    assert report["inner_iterations"] == 0


def test_solve_infeasible_exits_two(tmp_path, capsys):
    path = tmp_path / "infeasible.json"
    save_problem(path, INFEASIBLE)
    assert cli_main(["solve", str(path)]) == 2
    assert "status:" in capsys.readouterr().out


def test_solve_solver_flags_accepted(planted_file):
    assert cli_main([
        "solve", str(planted_file), "--tol", "1e-9", "--alpha", "0.9",
        "--sigma0", "1e-2", "--sigma-shrink", "0.2", "--max-outer", "40",
        "--max-inner", "60", "--prox", "zero",
    ]) == 0


def test_check_fails_on_wrong_solution(planted_file, tmp_path, capsys):
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"z": [9.0, 9.0, 9.0],
                                 "lambda": [0.0], "v": [0.0, 0.0, 0.0]}))
    assert cli_main(["check", str(planted_file), "--solution", str(wrong)]) == 2
    assert "ok: false" in capsys.readouterr().out


def test_check_without_solution_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bare.json"
    save_problem(path, QpProblem(H=[[2.0]], f=[0.0]))
    assert cli_main(["check", str(path)]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_file_exits_one(capsys):
    assert cli_main(["solve", "no-such-file.json"]) == 1
    assert "error" in capsys.readouterr().err


def test_malformed_file_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{\"version\": 1}")
    assert cli_main(["solve", str(path)]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_flag_exits_one(planted_file, capsys):
    assert cli_main(["solve", str(planted_file), "--bogus"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err


def test_no_subcommand_prints_usage(capsys):
    assert cli_main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_gen_rejects_bad_spec(tmp_path, capsys):
    out = tmp_path / "never.json"
    assert cli_main(["gen", "--n", "2", "--p", "3", "-o", str(out)]) == 1
    assert "error" in capsys.readouterr().err
    assert not out.exists()


def test_oracle_subcommand_json(planted_file, capsys):
    assert cli_main(["oracle", str(planted_file), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "Optimal"
    assert isinstance(report["active_set"], list)
    assert "solution" in report


def test_oracle_infeasible_exits_two(tmp_path, capsys):
    path = tmp_path / "infeasible.json"
    save_problem(path, INFEASIBLE)
    assert cli_main(["oracle", str(path)]) == 2
    assert "Infeasible" in capsys.readouterr().out


def test_oracle_refuses_large_problems(tmp_path, capsys):
    rng = np.random.default_rng(0)
    path = tmp_path / "large.json"
    save_problem(path, QpProblem(
        H=np.eye(2), f=np.zeros(2),
        A=rng.standard_normal((17, 2)), b=np.full(17, 5.0),
    ))
    assert cli_main(["oracle", str(path)]) == 1
    assert "16" in capsys.readouterr().err


def test_json_outputs_are_deterministic(planted_file, capsys):
    assert cli_main(["solve", str(planted_file), "--json"]) == 0
    first = capsys.readouterr().out
    assert cli_main(["solve", str(planted_file), "--json"]) == 0
    assert capsys.readouterr().out == first
