"""Experiment runner: grid exactness, aggregation, rendering, config files."""

import json
from fractions import Fraction

import pytest

from blocksched.bench import (
    BUILDING_METHODS,
    CSV_COLUMNS,
    ORDERED_METHODS,
    ExperimentConfig,
    config_from_mapping,
    load_config,
    render_table,
    report,
    run_experiment,
    speedup,
)
from blocksched.model import BlockKind, Placement, Schedule, Transaction, Workload
from blocksched.ordered import run_ordered
from blocksched.workload import synth

FIXTURES = __file__.rsplit("/", 1)[0] + "/fixtures"


def _ordered_config(**overrides) -> ExperimentConfig:
    base = dict(
        problem="ordered",
        kind=BlockKind.HOMOGENEOUS,
        methods=("greedy",),
        cores=(2,),
        sizes=(3,),
        synth_spec="conflict_free(n={n})",
        workloads=2,
        seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# --- speedup ----------------------------------------------------------------


def test_speedup_is_sequential_over_makespan():
    txs = (
        Transaction(0, 2, 1, frozenset(), frozenset({"a"})),
        Transaction(1, 2, 1, frozenset(), frozenset({"b"})),
    )
    workload = Workload(txs, BlockKind.HOMOGENEOUS)
    both = Schedule(2, {0: Placement(0, 0, 2), 1: Placement(1, 0, 2)})
    assert speedup(workload, both) == 2

    serial = Schedule(1, {0: Placement(0, 0, 2), 1: Placement(0, 2, 2)})
    assert speedup(workload, serial) == 1


def test_speedup_counts_only_selected_work():
    txs = (
        Transaction(0, 3, 1, frozenset(), frozenset({"a"})),
        Transaction(1, 2, 1, frozenset(), frozenset({"b"})),
    )
    workload = Workload(txs, BlockKind.HETEROGENEOUS)
    partial = Schedule(2, {1: Placement(0, 0, 2)})
    assert speedup(workload, partial) == 1


def test_speedup_of_empty_schedule_is_one():
    workload = Workload((), BlockKind.HOMOGENEOUS)
    assert speedup(workload, Schedule(2, {})) == 1


# --- grid runs --------------------------------------------------------------


def test_conflict_free_grid_is_exact():
    config = _ordered_config(
        methods=("greedy", "in-order"), cores=(2, 4), sizes=(3, 5), workloads=2
    )
    rows = run_experiment(config)
    assert rows
    for row in rows:
        assert row.n == 2
        assert row.timeout_flag == ""
        if row.metric == "rounds":
            assert row.mean == row.size
        elif row.metric == "speedup":
            assert row.mean == row.cores


def test_stress_pool_separates_the_two_selection_orders():
    config = ExperimentConfig(
        problem="building",
        kind=BlockKind.HOMOGENEOUS,
        methods=("greedy", "reward-greedy"),
        cores=(2,),
        sizes=(4,),
        synth_spec="stress(cores={cores}, budget={budget})",
        workloads=1,
    )
    by_method = {
        (row.method, row.metric): row for row in run_experiment(config)
    }
    assert by_method[("greedy", "reward")].mean == 8  # cores * budget readers
    assert by_method[("reward-greedy", "reward")].mean == 4  # serial writers
    assert by_method[("greedy", "speedup")].mean == 2


def test_cell_mean_is_the_mean_of_independent_workloads():
    config = _ordered_config(
        kind=BlockKind.HETEROGENEOUS,
        synth_spec="random(n={n}, gas_range=2:5)",
        sizes=(3,),
        workloads=3,
        seed=5,
    )
    rows = run_experiment(config)
    base = 5 * 1_000_003 + 3 * 10_007 + 2 * 101 + 1 * 11
    manual = [synth("random(n=6, gas_range=2:5)", seed=base + rep) for rep in range(3)]
    assert all(wl.kind is BlockKind.HETEROGENEOUS for wl in manual)
    spans = [run_ordered(wl, 2).makespan for wl in manual]
    want = Fraction(sum(spans), 3)
    got = [row for row in rows if row.metric == "makespan"]
    assert len(got) == 1
    assert got[0].mean == want
    assert got[0].n == 3


def test_rows_come_back_in_canonical_order():
    config = _ordered_config(
        methods=("in-order", "greedy"), cores=(4, 2), sizes=(5, 3), workloads=1
    )
    rows = run_experiment(config)
    keys = [(row.size, row.cores) for row in rows]
    assert keys == sorted(keys)
    # within a cell, methods keep config order: in-order before greedy
    cell = [row.method for row in rows if (row.size, row.cores) == (3, 2)]
    assert cell == ["in-order", "in-order", "greedy", "greedy"]
    metrics = [row.metric for row in rows if (row.size, row.cores) == (3, 2)]
    assert metrics == ["rounds", "speedup", "rounds", "speedup"]


def test_thread_count_does_not_change_the_output():
    config = _ordered_config(
        methods=("greedy", "in-order-skip"), cores=(2, 4), sizes=(2, 3), workloads=2
    )
    wide = ExperimentConfig(**{**config.__dict__, "jobs": 4})
    text_one = render_table(run_experiment(config), "csv")
    text_four = render_table(run_experiment(wide), "csv")
    assert text_one == text_four
    assert render_table(run_experiment(config), "csv") == text_one


def test_oversized_exact_model_yields_one_flagged_placeholder_row():
    config = _ordered_config(methods=("exact-timed",), sizes=(8,), workloads=2)
    rows = run_experiment(config)
    assert len(rows) == 1
    row = rows[0]
    assert row.metric == "rounds"
    assert row.mean is None
    assert row.n == 0
    assert "n=16" in row.timeout_flag


def test_building_percent_of_bound_present_and_capped():
    config = ExperimentConfig(
        problem="building",
        kind=BlockKind.HOMOGENEOUS,
        methods=("greedy", "upper-bound"),
        cores=(2,),
        sizes=(3,),
        pool_factors=(2,),
        synth_spec="random(n={n}, gas_range=1:1)",
        workloads=2,
    )
    rows = run_experiment(config)
    percents = [row for row in rows if row.metric == "percent_of_bound"]
    assert percents and all(row.mean <= 100 for row in percents)
    bound_rows = [row for row in rows if row.method == "upper-bound"]
    assert [row.metric for row in bound_rows] == ["reward"]


def test_trace_slices_feed_the_grid():
    config = _ordered_config(
        synth_spec=None, trace=f"{FIXTURES}/uniform.jsonl", sizes=(2,), workloads=2
    )
    rows = run_experiment(config)
    assert {row.n for row in rows} == {2}
    assert all(row.mean is not None for row in rows)


# --- rendering --------------------------------------------------------------


def test_csv_has_header_and_one_line_per_row():
    config = _ordered_config(workloads=1)
    rows = run_experiment(config)
    text = render_table(rows, "csv")
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + len(rows)
    assert text.endswith("\n")
    # greedy on a 3-round conflict-free block: 3 rounds, speedup 2.00
    assert lines[1] == "ordered,homogeneous,3,2,1,greedy,rounds,3,1,"
    assert lines[2] == "ordered,homogeneous,3,2,1,greedy,speedup,2.00,1,"


def test_text_matrix_pairs_value_with_speedup():
    config = _ordered_config(cores=(2, 4), sizes=(3, 5), workloads=1)
    text = render_table(run_experiment(config), "text")
    assert "ordered homogeneous greedy" in text
    lines = text.splitlines()
    header = next(line for line in lines if "R\\p" in line)
    assert header.split() == ["R\\p", "2", "4"]
    body = [line.split() for line in lines if line.strip()[:1].isdigit()]
    assert ["3", "3/2", "3/4"] in body
    assert ["5", "5/2", "5/4"] in body


def test_text_matrix_flags_skipped_cells():
    config = _ordered_config(methods=("exact-timed",), sizes=(8,), workloads=1)
    text = render_table(run_experiment(config), "text")
    assert "-*" in text
    assert "\n* n=16 exceeds" in text


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        render_table([], "html")


def test_report_writes_the_rendered_bytes(tmp_path):
    rows = run_experiment(_ordered_config(workloads=1))
    path = report(rows, "csv", tmp_path / "table.csv")
    assert path.read_text(encoding="ascii") == render_table(rows, "csv")


# --- configuration ----------------------------------------------------------


def test_method_catalogs():
    assert "greedy" in ORDERED_METHODS and "upper-bound" in BUILDING_METHODS


def test_config_rejects_unknown_method_and_duplicates():
    with pytest.raises(ValueError, match="unknown ordered method"):
        _ordered_config(methods=("fastest",))
    with pytest.raises(ValueError, match="duplicate"):
        _ordered_config(methods=("greedy", "greedy"))


def test_config_rejects_round_model_on_mixed_costs():
    with pytest.raises(ValueError, match="uniform"):
        _ordered_config(methods=("exact-rounds",), kind=BlockKind.HETEROGENEOUS)


def test_config_rejects_pool_factors_for_ordered():
    with pytest.raises(ValueError, match="pool factors"):
        _ordered_config(pool_factors=(2,))


def test_config_rejects_empty_or_nonpositive_grids():
    with pytest.raises(ValueError, match="cores"):
        _ordered_config(cores=())
    with pytest.raises(ValueError, match="sizes"):
        _ordered_config(sizes=(0,))
    with pytest.raises(ValueError, match="workloads"):
        _ordered_config(workloads=0)
    with pytest.raises(ValueError, match="time limit"):
        _ordered_config(time_limit=0)
    with pytest.raises(ValueError, match="jobs"):
        _ordered_config(jobs=0)


def test_config_needs_exactly_one_workload_source():
    with pytest.raises(ValueError, match="synth_spec and trace"):
        _ordered_config(trace="also.jsonl")
    with pytest.raises(ValueError, match="synth_spec and trace"):
        _ordered_config(synth_spec=None)


def test_mapping_round_trip_and_spelling_of_sizes():
    payload = {
        "problem": "ordered",
        "kind": "homogeneous",
        "methods": ["greedy"],
        "cores": [2, 4],
        "rounds": [3],
        "synth": "conflict_free(n={n})",
        "workloads": 2,
    }
    config = config_from_mapping(payload)
    assert config.sizes == (3,)
    assert config.cores == (2, 4)

    building = config_from_mapping(
        {
            "problem": "building",
            "methods": ["greedy"],
            "cores": [2],
            "budgets": [4],
            "synth": "stress(cores={cores}, budget={budget})",
        }
    )
    assert building.sizes == (4,)
    assert building.workloads == 5


def test_mapping_rejects_unknown_keys_and_bad_axes():
    with pytest.raises(ValueError, match="unknown config keys"):
        config_from_mapping({"rounds": [1], "colour": "red"})
    with pytest.raises(ValueError, match="rounds and budgets"):
        config_from_mapping({"rounds": [1], "budgets": [1]})
    with pytest.raises(ValueError, match="rounds and budgets"):
        config_from_mapping({})
    with pytest.raises(ValueError, match="unknown kind"):
        config_from_mapping({"rounds": [1], "kind": "jumbo"})


def test_load_config_reads_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "problem": "ordered",
                "methods": ["greedy"],
                "cores": [2],
                "rounds": [2],
                "synth": "conflict_free(n={n})",
            }
        )
    )
    config = load_config(path)
    assert config.problem == "ordered"
    assert config.kind is BlockKind.HOMOGENEOUS

    listy = tmp_path / "list.json"
    listy.write_text("[]")
    with pytest.raises(ValueError, match="JSON object"):
        load_config(listy)
