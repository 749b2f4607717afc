"""LP text format: byte-stable layout and writer/reader round trips."""

import random

import pytest

from blocksched.conflict import conflict_graph, dependency_dag
from blocksched.exact import (
    Sense,
    building_rounds_model,
    building_timed_model,
    lp_text,
    ordered_rounds_model,
    ordered_timed_model,
    parse_lp,
    write_lp,
)
from blocksched.model import Transaction


def _pool(seed: int, n: int, unit: bool) -> list[Transaction]:
    rng = random.Random(seed)
    txs = []
    for i in range(n):
        picked = rng.sample("abcde", rng.randint(1, 2))
        txs.append(
            Transaction(
                i,
                1 if unit else rng.randint(1, 4),
                rng.randint(0, 5),
                frozenset(picked[:1]),
                frozenset(picked[1:]),
            )
        )
    return txs


def test_single_binary_skeleton():
    txs = [Transaction(0, 1, 3, frozenset(), frozenset({"a"}))]
    model = building_rounds_model(conflict_graph(txs), [3], cores=1, rounds=1)
    text = lp_text(model)
    lines = text.splitlines()
    assert lines[0] == "Maximize"
    assert lines[1] == " obj: 3 x_0_1"
    assert lines[2] == "Subject To"
    assert lines[-1] == "End"
    assert text.endswith("End\n")
    assert "Binaries" in lines
    # one transaction, one round: the only binary is x_0_1
    at = lines.index("Binaries")
    assert lines[at + 1] == " x_0_1"


def test_unit_coefficients_drop_the_one():
    txs = [Transaction(0, 1, 1, frozenset(), frozenset({"a"}))]
    model = building_rounds_model(conflict_graph(txs), [1], cores=1, rounds=1)
    assert " obj: x_0_1" in lp_text(model).splitlines()


def test_empty_expression_writes_placeholder_zero():
    model = building_rounds_model(conflict_graph([]), [], cores=1, rounds=0)
    lines = lp_text(model).splitlines()
    assert lines[1] == " obj: 0"
    parsed = parse_lp(lp_text(model))
    assert parsed.objective == {}
    assert parsed.constraints == ()


def test_negative_coefficients_spell_minus_term():
    txs = [
        Transaction(0, 1, 1, frozenset(), frozenset({"a"})),
        Transaction(1, 1, 1, frozenset({"a"}), frozenset()),
    ]
    model = ordered_rounds_model(dependency_dag(txs), cores=1)
    text = lp_text(model)
    # round-usage rows subtract the round indicator
    assert "- 2 u_1" in text or "- u_1" in text
    parsed = parse_lp(text)
    negative = [
        coeffs
        for _, coeffs, _, _ in parsed.constraints
        if any(v < 0 for v in coeffs.values())
    ]
    assert negative


def test_binaries_wrap_at_ten_names():
    txs = _pool(0, 6, unit=True)
    model = ordered_rounds_model(dependency_dag(txs), cores=2, rounds=4)
    lines = lp_text(model).splitlines()
    at = lines.index("Binaries")
    block = []
    for line in lines[at + 1 :]:
        if not line.startswith(" "):
            break
        block.append(line)
    widths = [len(line.split()) for line in block]
    assert all(w == 10 for w in widths[:-1])
    assert 1 <= widths[-1] <= 10
    assert sum(widths) == model.count_variables()


def test_integer_bounds_section_uses_plus_inf():
    txs = _pool(1, 3, unit=False)
    model = ordered_timed_model(dependency_dag(txs), txs, cores=2)
    text = lp_text(model)
    parsed = parse_lp(text)
    # start and end vars are integers; any unbounded one prints +inf
    assert parsed.generals
    if "Bounds" in text.splitlines():
        assert all(lo >= 0 for lo, _ in parsed.bounds.values())


def test_write_lp_round_trips_through_file(tmp_path):
    txs = _pool(2, 4, unit=True)
    model = building_rounds_model(
        conflict_graph(txs), [t.reward for t in txs], cores=2, rounds=2
    )
    path = write_lp(model, tmp_path / "model.lp")
    assert path.read_text(encoding="ascii") == lp_text(model)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("shape", ["ordered-rounds", "ordered-timed", "building-rounds", "building-timed"])
def test_round_trip_preserves_inventories(shape, seed):
    unit = shape.endswith("rounds")
    txs = _pool(seed, 5, unit=unit)
    if shape == "ordered-rounds":
        model = ordered_rounds_model(dependency_dag(txs), cores=2)
    elif shape == "ordered-timed":
        model = ordered_timed_model(dependency_dag(txs), txs, cores=2)
    elif shape == "building-rounds":
        model = building_rounds_model(
            conflict_graph(txs), [t.reward for t in txs], cores=2, rounds=3
        )
    else:
        model = building_timed_model(conflict_graph(txs), txs, cores=2, budget=5)

    parsed = parse_lp(lp_text(model))
    assert parsed.sense is model.objective.sense
    assert len(parsed.constraints) == model.count_constraints()
    assert parsed.variable_names() == {v.name for v in model.variables}
    assert parsed.objective == {
        k: v for k, v in model.objective.coeffs.items() if v != 0
    }
    by_name = {row.name: row for row in model.constraints}
    for name, coeffs, relation, rhs in parsed.constraints:
        row = by_name[name]
        assert relation == row.relation
        assert rhs == row.rhs
        assert coeffs == {k: v for k, v in row.coeffs.items() if v != 0}


def test_parser_rejects_foreign_dialects():
    with pytest.raises(ValueError):
        parse_lp("Foo\n obj: x\nEnd\n")
    with pytest.raises(ValueError):
        parse_lp("Minimize\n obj: x\nSubject To\n r1: x 1\nEnd\n")
    with pytest.raises(ValueError):
        parse_lp("Minimize\n obj: x\nEnd\ntrailing\n")
    with pytest.raises(ValueError):
        parse_lp("")


def test_comment_lines_are_skipped():
    parsed = parse_lp("\\ a note\nMinimize\n obj: 0\nSubject To\nEnd\n")
    assert parsed.sense is Sense.MINIMIZE
