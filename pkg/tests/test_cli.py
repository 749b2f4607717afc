"""Command line driver: every subcommand, output routing, error contract."""

import json

import pytest

from blocksched.cli import main

FIXTURES = __file__.rsplit("/", 1)[0] + "/fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- obs --------------------------------------------------------------------


def test_obs_schedules_a_uniform_block(capsys):
    code, out, err = run(
        capsys,
        "obs", "--synth", "conflict_free(n={n})", "-p", "2", "-R", "3",
        "--format", "csv",
    )
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0].startswith("problem,kind")
    assert "ordered,homogeneous,3,2,1,greedy,rounds,3,1," in lines
    assert "ordered,homogeneous,3,2,1,greedy,speedup,2.00,1," in lines


def test_obs_alias_and_long_flags_match_short_ones(capsys):
    argv = ["--synth", "conflict_free(n={n})", "--format", "csv"]
    _, short, _ = run(capsys, "obs", "-p", "2", "-R", "3", *argv)
    _, spelled, _ = run(capsys, "schedule", "--cores", "2", "--rounds", "3", *argv)
    assert short == spelled


def test_obs_text_output_is_the_matrix(capsys):
    code, out, _ = run(
        capsys, "obs", "--synth", "conflict_free(n={n})", "-p", "2", "-R", "3"
    )
    assert code == 0
    assert "ordered homogeneous greedy" in out
    assert "3/2" in out


def test_obs_methods_repeatable(capsys):
    code, out, _ = run(
        capsys,
        "obs", "--synth", "single_hot_key(n={n})", "-p", "2", "-R", "4",
        "--method", "greedy", "--method", "in-order", "--format", "csv",
    )
    assert code == 0
    methods = {line.split(",")[5] for line in out.splitlines()[1:]}
    assert methods == {"greedy", "in-order"}


def test_obs_rejects_rounds_and_budget_together(capsys):
    code, out, err = run(
        capsys,
        "obs", "--synth", "random(n=4)", "-p", "2", "-R", "2", "-B", "9",
    )
    assert code == 2 and out == ""
    payload = json.loads(err)
    assert payload["error"] == "usage"
    assert "exactly one" in payload["message"]


def test_obs_budget_axis_runs_mixed_blocks(capsys):
    code, out, _ = run(
        capsys,
        "obs", "--synth", "random(n=6, gas_range=2:4)", "-p", "2", "-B", "12",
        "--format", "csv",
    )
    assert code == 0
    assert ",makespan," in out


def test_out_file_redirects_and_prints_the_path(capsys, tmp_path):
    target = tmp_path / "table.csv"
    code, out, _ = run(
        capsys,
        "obs", "--synth", "conflict_free(n={n})", "-p", "2", "-R", "2",
        "--format", "csv", "--out", str(target),
    )
    assert code == 0
    assert out.strip() == str(target)
    assert target.read_text().startswith("problem,kind")


# --- pbc --------------------------------------------------------------------


def test_pbc_builds_from_a_pool(capsys):
    code, out, _ = run(
        capsys,
        "pbc", "--synth", "stress(cores={cores}, budget={budget})",
        "-p", "2", "-B", "4", "--format", "csv",
    )
    assert code == 0
    assert "building,homogeneous,4,2,1,greedy,reward,8,1," in out.splitlines()


def test_pbc_pool_factor_scales_the_candidate_pool(capsys):
    code, out, _ = run(
        capsys,
        "build", "--synth", "conflict_free(n={n})", "-p", "2", "-B", "3",
        "-X", "2", "--method", "greedy", "--method", "upper-bound",
        "--format", "csv",
    )
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()[1:]]
    # pool has 12 unit transactions, capacity is 6: bound and packing agree
    reward = {(r[5], r[6]): r[7] for r in rows}
    assert reward[("greedy", "reward")] == "6"
    assert reward[("upper-bound", "reward")] == "6"
    assert reward[("greedy", "percent_of_bound")] == "100.00"


def test_pbc_requires_budget(capsys):
    code, _, err = run(capsys, "pbc", "--synth", "random(n=4)", "-p", "2")
    assert code == 2
    assert json.loads(err)["error"] == "usage"


# --- exact ------------------------------------------------------------------


def test_exact_reports_solver_fields(capsys):
    code, out, _ = run(
        capsys,
        "exact", "--problem", "ordered", "--formulation", "rounds",
        "--synth", "chain(n={n})", "-p", "2", "-R", "4",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "status optimal"
    assert lines[1] == "objective 8"  # a chain of 8 needs one round each
    assert lines[2].startswith("nodes ")
    assert lines[3].startswith("elapsed ")


def test_exact_csv_layout(capsys):
    code, out, _ = run(
        capsys,
        "exact", "--problem", "building", "--synth", "conflict_free(n={n})",
        "-p", "2", "-B", "2", "--format", "csv",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "status,objective,nodes,elapsed"
    assert lines[1].split(",")[0] == "optimal"
    assert lines[1].split(",")[1] == "4"  # 4 unit rewards fit 2 cores x 2


def test_exact_refuses_oversized_instances(capsys):
    code, _, err = run(
        capsys,
        "exact", "--problem", "ordered", "--synth", "random(n=40)",
        "-p", "2", "-B", "60",
    )
    assert code == 1
    payload = json.loads(err)
    assert payload["error"] == "ValueError"
    assert "practical reach" in payload["message"]


def test_exact_round_formulation_needs_uniform_costs(capsys):
    code, _, err = run(
        capsys,
        "exact", "--problem", "ordered", "--formulation", "rounds",
        "--synth", "random(n=4)", "-p", "2", "-B", "9",
    )
    assert code == 2
    assert "uniform" in json.loads(err)["message"]


# --- export-lp --------------------------------------------------------------


def test_export_lp_to_stdout(capsys):
    code, out, _ = run(
        capsys,
        "export-lp", "--problem", "ordered", "--formulation", "rounds",
        "--synth", "chain(n={n})", "-p", "2", "-R", "3",
    )
    assert code == 0
    assert out.startswith("Minimize\n obj:")
    assert out.endswith("End\n")


def test_export_lp_to_file(capsys, tmp_path):
    target = tmp_path / "model.lp"
    code, out, _ = run(
        capsys,
        "export-lp", "--problem", "building", "--synth", "conflict_free(n={n})",
        "-p", "2", "-B", "2", "--out", str(target),
    )
    assert code == 0
    assert out.strip() == str(target)
    assert target.read_text().startswith("Maximize")


# --- bench ------------------------------------------------------------------


def _write_config(tmp_path, **extra):
    payload = {
        "problem": "ordered",
        "kind": "homogeneous",
        "methods": ["greedy", "in-order"],
        "cores": [2, 4],
        "rounds": [2, 3],
        "synth": "conflict_free(n={n})",
        "workloads": 2,
    }
    payload.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return path


def test_bench_writes_reports_and_figures(capsys, tmp_path):
    config = _write_config(tmp_path)
    out_dir = tmp_path / "out"
    code, out, _ = run(
        capsys, "bench", "--config", str(config), "--out-dir", str(out_dir)
    )
    assert code == 0
    printed = out.splitlines()
    assert str(out_dir / "report.csv") in printed
    assert str(out_dir / "report.txt") in printed
    pngs = sorted(out_dir.glob("*.png"))
    assert pngs and all(str(p) in printed for p in pngs)


def test_bench_no_figures_and_single_format(capsys, tmp_path):
    config = _write_config(tmp_path)
    out_dir = tmp_path / "csv-only"
    code, out, _ = run(
        capsys,
        "bench", "--config", str(config), "--out-dir", str(out_dir),
        "--format", "csv", "--no-figures",
    )
    assert code == 0
    assert out.splitlines() == [str(out_dir / "report.csv")]
    assert not list(out_dir.glob("*.png"))
    assert not (out_dir / "report.txt").exists()


def test_bench_jobs_override_keeps_output_identical(capsys, tmp_path):
    config = _write_config(tmp_path)
    one = tmp_path / "one"
    four = tmp_path / "four"
    for out_dir, jobs in ((one, "1"), (four, "4")):
        code, _, _ = run(
            capsys,
            "bench", "--config", str(config), "--out-dir", str(out_dir),
            "--format", "csv", "--no-figures", "--jobs", jobs,
        )
        assert code == 0
    assert (one / "report.csv").read_bytes() == (four / "report.csv").read_bytes()


def test_bench_missing_config_is_a_runtime_error(capsys, tmp_path):
    code, _, err = run(
        capsys, "bench", "--config", str(tmp_path / "absent.json")
    )
    assert code == 1
    assert json.loads(err)["error"] == "FileNotFoundError"


def test_bench_bad_config_reports_value_error(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"rounds": [1], "budgets": [1]}))
    code, _, err = run(capsys, "bench", "--config", str(path))
    assert code == 1
    payload = json.loads(err)
    assert payload["error"] == "ValueError"
    assert "rounds and budgets" in payload["message"]


# --- shared error contract ---------------------------------------------------


def test_unknown_subcommand_is_usage(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2
    assert json.loads(err)["error"] == "usage"


def test_trace_source_feeds_single_runs(capsys):
    code, out, _ = run(
        capsys,
        "obs", "--trace", f"{FIXTURES}/uniform.jsonl", "-p", "2", "-R", "2",
        "--format", "csv",
    )
    assert code == 0
    assert ",greedy,rounds," in out


def test_transfers_only_filter_applies(capsys):
    code, out, _ = run(
        capsys,
        "obs", "--trace", f"{FIXTURES}/mixed.jsonl.gz", "--transfers-only",
        "-p", "2", "-B", "50000", "--format", "csv",
    )
    assert code == 0
    assert ",makespan," in out
