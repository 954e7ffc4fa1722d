import json

import pytest

from ssnpmm.cli import EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, main
from ssnpmm.problem import load_problem, load_solution, save_solution


def parse_kv(text):
    out = {}
    for line in text.splitlines():
        key, sep, value = line.partition(" = ")
        if sep:
            out[key.strip()] = value.strip()
    return out


@pytest.fixture
def bundle(tmp_path, capsys):
    out = tmp_path / "p"
    assert main(["generate", "poisson", "--grid", "8", "--alpha1", "1e-3", "-o", str(out)]) == EXIT_OK
    capsys.readouterr()
    return out


def solve(capsys, *args):
    code = main(["solve", *map(str, args)])
    return code, parse_kv(capsys.readouterr().out)


def test_generate_requires_grid(tmp_path, capsys):
    assert main(["generate", "poisson", "-o", str(tmp_path / "x")]) == EXIT_USAGE
    assert "--grid" in capsys.readouterr().err


def test_no_command_is_usage_error(capsys):
    assert main([]) == EXIT_USAGE


def test_unknown_flag_is_usage_error(capsys):
    assert main(["solve", "x", "--bogus"]) == EXIT_USAGE


def test_generate_poisson_n31(tmp_path, capsys):
    out = tmp_path / "p31"
    assert main(["generate", "poisson", "--grid", "31", "-o", str(out)]) == EXIT_OK
    p = load_problem(out)
    assert (p.n, p.m) == (1922, 961)


def test_generate_convdiff_and_random(tmp_path, capsys):
    assert main(["generate", "convdiff", "--grid", "5", "--eps", "0.05", "-o", str(tmp_path / "c")]) == 0
    assert load_problem(tmp_path / "c").n == 50
    assert main(["generate", "random", "--n", "12", "--m", "4", "--seed", "3", "-o", str(tmp_path / "r")]) == 0
    p = load_problem(tmp_path / "r")
    assert (p.n, p.m) == (12, 4)


def test_solve_reports_counters(bundle, capsys):
    code, kv = solve(capsys, bundle, "--tol", "1e-5")
    assert code == EXIT_OK
    assert kv["status"] == "Optimal"
    for key in ("PMM", "SSN", "MINRES_total", "factorizations"):
        assert int(kv[key]) > 0
    assert kv["warmstart"] == "on"
    assert max(float(kv[k]) for k in ("residual_dual", "residual_primal", "residual_compl")) <= 1e-5
    assert (bundle / "solution.json").exists()


def test_solve_without_warm_start(bundle, capsys):
    code, kv = solve(capsys, bundle, "--no-warmstart")
    assert code == EXIT_OK
    assert kv["warmstart"] == "skipped" and kv["warmstart_iters"] == "0"


def test_looser_tolerance_needs_fewer_outer_iterations(bundle, capsys):
    _, tight = solve(capsys, bundle, "--tol", "1e-5")
    _, loose = solve(capsys, bundle, "--tol", "1e-3")
    assert int(loose["PMM"]) < int(tight["PMM"])


def test_iteration_cap_exit_code(bundle, capsys):
    code, kv = solve(capsys, bundle, "--tol", "1e-10", "--max-pmm", "1", "--no-warmstart")
    assert code == EXIT_NOT_CONVERGED
    assert kv["status"] == "MaxIterations"


def test_check_accepts_and_rejects(bundle, capsys):
    solve(capsys, bundle, "--tol", "1e-6")
    assert main(["check", str(bundle), "--tol", "1e-6"]) == EXIT_OK
    assert parse_kv(capsys.readouterr().out)["kkt_ok"] == "True"
    sol = load_solution(bundle / "solution.json")
    sol.x[0] += 1.0
    bad = bundle / "bad.json"
    save_solution(sol, bad)
    assert main(["check", str(bundle), str(bad), "--tol", "1e-6"]) == EXIT_NOT_CONVERGED
    assert parse_kv(capsys.readouterr().out)["kkt_ok"] == "False"


def test_check_spectral(tmp_path, capsys):
    out = tmp_path / "s"
    main(["generate", "poisson", "--grid", "5", "-o", str(out)])
    solve(capsys, out)
    assert main(["check", str(out), "--spectral"]) == EXIT_OK
    kv = parse_kv(capsys.readouterr().out)
    assert kv["schur_ok"] == "True" and kv["system_ok"] == "True"


def test_check_spectral_too_large(bundle, tmp_path, capsys):
    out = tmp_path / "big"
    main(["generate", "poisson", "--grid", "20", "-o", str(out)])
    solve(capsys, out, "--tol", "1e-3")
    assert main(["check", str(out), "--spectral"]) == EXIT_USAGE


def test_unwritable_output_is_usage_error(bundle, tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = main(["solve", str(bundle), "-o", str(blocker / "sol.json")])
    assert code == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_missing_problem_is_usage_error(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nowhere")]) == EXIT_USAGE


def test_json_output(bundle, capsys):
    assert main(["solve", str(bundle), "--json"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["status"] == "Optimal" and data["warmstart"] is True
    assert data["pmm_iters"] > 0


def test_repeat_runs_identical_up_to_timing(bundle, capsys):
    runs = []
    for _ in range(2):
        _, kv = solve(capsys, bundle, "--seed", "7")
        for key in ("time_s", "warmstart_time_s"):
            kv.pop(key)
        runs.append(kv)
    assert runs[0] == runs[1]
    assert runs[0]["seed"] == "7"


def test_environment_overrides(bundle, capsys, monkeypatch):
    monkeypatch.setenv("SSNPMM_WARMSTART", "false")
    _, kv = solve(capsys, bundle)
    assert kv["warmstart"] == "skipped"
    monkeypatch.setenv("SSNPMM_TOL", "not-a-number")
    code, _ = solve(capsys, bundle)
    assert code == EXIT_USAGE
