"""Trace ingestion, transfer filtering, block/pool slicing, and generators.

The interchange format is one JSON object per line with fields ``hash``,
``gas_used``, ``tip``, ``reads``, ``writes``; a ``.gz`` suffix switches on
gzip transparently. Slicing turns a record stream into consecutive,
non-overlapping workloads whose transaction ids restart at zero, so every
slice stands alone as an ordered block or candidate pool.
"""

from __future__ import annotations

import gzip
import io
import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .model import (
    BlockKind,
    BlockParams,
    PoolParams,
    StateKey,
    Transaction,
    Workload,
)

__all__ = [
    "TRANSFER_GAS",
    "TraceError",
    "SliceError",
    "TraceRecord",
    "ingest",
    "export",
    "records_to_transactions",
    "filter_transfers",
    "slice_blocks",
    "slice_pools",
    "synth",
    "parse_synth_spec",
    "GENERATOR_NAMES",
]

TRANSFER_GAS = 21000  # flat cost of a plain value transfer

_FIELDS = ("hash", "gas_used", "tip", "reads", "writes")


class TraceError(ValueError):
    """A trace file failed validation; messages carry the line number."""


class SliceError(ValueError):
    """The record stream cannot be cut into the requested workloads."""


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """One transaction as recorded in a trace file.

    ``tip`` is the priority fee per gas unit; the absolute reward of
    including the transaction is ``gas_used * tip``. Key lists keep file
    order and are already deduplicated by ingestion.
    """

    hash: str
    gas_used: int
    tip: int
    reads: tuple[str, ...]
    writes: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.hash:
            raise ValueError("record hash must be a non-empty string")
        if self.gas_used < 1:
            raise ValueError(f"{self.hash}: gas_used must be positive, got {self.gas_used}")
        if self.tip < 0:
            raise ValueError(f"{self.hash}: tip must be non-negative, got {self.tip}")
        if not self.reads and not self.writes:
            raise ValueError(f"{self.hash}: transaction touches no state keys")


def _open_text(path: Path, mode: str):
    if path.suffix == ".gz":
        if "w" in mode:
            # fixed mtime keeps compressed exports byte-stable across runs
            raw = gzip.GzipFile(filename="", mode="wb", fileobj=path.open("wb"), mtime=0)
            return io.TextIOWrapper(raw, encoding="utf-8", newline="\n")
        return gzip.open(path, "rt", encoding="utf-8")
    return path.open(mode, encoding="utf-8", newline="\n" if "w" in mode else None)


def _record_from(payload: object, lineno: int) -> TraceRecord:
    if not isinstance(payload, dict):
        raise TraceError(f"line {lineno}: expected a JSON object")
    for name in _FIELDS:
        if name not in payload:
            raise TraceError(f"line {lineno}: missing field {name!r}")
    hash_ = payload["hash"]
    gas = payload["gas_used"]
    tip = payload["tip"]
    if not isinstance(hash_, str):
        raise TraceError(f"line {lineno}: hash must be a string")
    if isinstance(gas, bool) or not isinstance(gas, int):
        raise TraceError(f"line {lineno}: gas_used must be an integer")
    if isinstance(tip, bool) or not isinstance(tip, int):
        raise TraceError(f"line {lineno}: tip must be an integer")
    sets: dict[str, tuple[str, ...]] = {}
    for name in ("reads", "writes"):
        keys = payload[name]
        if not isinstance(keys, list) or any(not isinstance(k, str) for k in keys):
            raise TraceError(f"line {lineno}: {name} must be a list of key strings")
        sets[name] = tuple(dict.fromkeys(keys))
    try:
        return TraceRecord(hash_, gas, tip, sets["reads"], sets["writes"])
    except ValueError as err:
        raise TraceError(f"line {lineno}: {err}") from err


def ingest(path: str | Path) -> tuple[TraceRecord, ...]:
    """Read a line-delimited trace file (gzip by extension) in file order."""
    records: list[TraceRecord] = []
    seen: set[str] = set()
    with _open_text(Path(path), "r") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as err:
                raise TraceError(f"line {lineno}: invalid JSON ({err.msg})") from err
            record = _record_from(payload, lineno)
            if record.hash in seen:
                raise TraceError(f"line {lineno}: duplicate hash {record.hash}")
            seen.add(record.hash)
            records.append(record)
    return tuple(records)


def export(records: Sequence[TraceRecord], path: str | Path) -> Path:
    """Write records back out; ``ingest(export(x)) == x``."""
    target = Path(path)
    with _open_text(target, "w") as handle:
        for record in records:
            handle.write(
                json.dumps(
                    {
                        "hash": record.hash,
                        "gas_used": record.gas_used,
                        "tip": record.tip,
                        "reads": list(record.reads),
                        "writes": list(record.writes),
                    }
                )
            )
            handle.write("\n")
    return target


def records_to_transactions(
    records: Sequence[TraceRecord], *, intern_keys: bool = False
) -> tuple[Transaction, ...]:
    """Dense-id transactions in record order; gas becomes exec_time.

    ``intern_keys`` swaps key strings for first-seen integers, which makes
    the set operations in conflict detection noticeably cheaper on large
    slices. The mapping is positional, so it is collision-free and
    deterministic for a fixed record sequence.
    """
    interned: dict[str, int] = {}

    def key(raw: str) -> StateKey:
        if not intern_keys:
            return raw
        if raw not in interned:
            interned[raw] = len(interned)
        return interned[raw]

    return tuple(
        Transaction(
            pos,
            record.gas_used,
            record.tip,
            frozenset(key(k) for k in record.reads),
            frozenset(key(k) for k in record.writes),
        )
        for pos, record in enumerate(records)
    )


def filter_transfers(records: Sequence[TraceRecord]) -> tuple[TraceRecord, ...]:
    """Keep plain value transfers, in order.

    A transfer burns exactly the flat gas amount and touches at most the two
    account balances involved, never a contract storage slot (slot keys are
    written "address:slot").
    """
    kept = []
    for record in records:
        if record.gas_used != TRANSFER_GAS:
            continue
        touched = set(record.reads) | set(record.writes)
        if len(touched) > 2 or any(":" in key for key in touched):
            continue
        kept.append(record)
    return tuple(kept)


def _reid(chunk: Sequence[TraceRecord]) -> tuple[Transaction, ...]:
    return records_to_transactions(chunk)


def slice_blocks(
    records: Sequence[TraceRecord],
    kind: BlockKind,
    cores: int,
    *,
    rounds: int | None = None,
    budget: int | None = None,
    count: int = 1,
) -> list[Workload]:
    """Cut consecutive, non-overlapping ordered blocks off the record stream.

    Uniform-cost blocks take exactly rounds*cores records each; mixed-cost
    blocks take the longest prefix whose total gas stays within the budget,
    so a sliced block always fits the budget it was cut for.
    """
    if cores < 1:
        raise ValueError(f"core count must be positive, got {cores}")
    if count < 1:
        raise ValueError(f"block count must be positive, got {count}")
    if kind is BlockKind.HOMOGENEOUS:
        if rounds is None:
            raise ValueError("uniform-cost slicing needs rounds")
        size = rounds * cores
        need = size * count
        if len(records) < need:
            raise SliceError(
                f"need {need} records for {count} blocks of {size}, have {len(records)}"
            )
        return [
            Workload(
                _reid(records[at * size : (at + 1) * size]),
                kind,
                BlockParams(cores, rounds),
            )
            for at in range(count)
        ]
    if budget is None:
        raise ValueError("mixed-cost slicing needs a gas budget")
    workloads: list[Workload] = []
    pos = 0
    for built in range(count):
        total = 0
        start = pos
        while pos < len(records) and total + records[pos].gas_used <= budget:
            total += records[pos].gas_used
            pos += 1
        if pos == start:
            if pos >= len(records):
                raise SliceError(f"records ran out after {built} of {count} blocks")
            raise SliceError(
                f"record gas {records[pos].gas_used} exceeds block budget {budget}"
            )
        workloads.append(
            Workload(_reid(records[start:pos]), kind, BlockParams(cores))
        )
    return workloads


def slice_pools(
    records: Sequence[TraceRecord],
    kind: BlockKind,
    cores: int,
    *,
    rounds: int | None = None,
    budget: int | None = None,
    pool_factor: int = 1,
    count: int = 1,
) -> list[Workload]:
    """Cut candidate pools holding ``pool_factor`` blocks' worth of records.

    Uniform-cost pools hold rounds*cores*pool_factor records and carry their
    budget in time units (rounds times the shared cost); mixed-cost pools are
    the longest prefix with total gas within cores*budget*pool_factor.
    """
    if cores < 1:
        raise ValueError(f"core count must be positive, got {cores}")
    if count < 1:
        raise ValueError(f"pool count must be positive, got {count}")
    if pool_factor < 1:
        raise ValueError(f"pool factor must be positive, got {pool_factor}")
    if kind is BlockKind.HOMOGENEOUS:
        if rounds is None or rounds < 1:
            raise ValueError("uniform-cost pools need a positive round count")
        size = rounds * cores * pool_factor
        need = size * count
        if len(records) < need:
            raise SliceError(
                f"need {need} records for {count} pools of {size}, have {len(records)}"
            )
        pools = []
        for at in range(count):
            txs = _reid(records[at * size : (at + 1) * size])
            pools.append(
                Workload(
                    txs,
                    kind,
                    PoolParams(cores, rounds * txs[0].exec_time, pool_factor),
                )
            )
        return pools
    if budget is None:
        raise ValueError("mixed-cost pools need a gas budget")
    cap = cores * budget * pool_factor
    pools = []
    pos = 0
    for built in range(count):
        total = 0
        start = pos
        while pos < len(records) and total + records[pos].gas_used <= cap:
            total += records[pos].gas_used
            pos += 1
        if pos == start:
            if pos >= len(records):
                raise SliceError(f"records ran out after {built} of {count} pools")
            raise SliceError(
                f"record gas {records[pos].gas_used} exceeds pool capacity {cap}"
            )
        pools.append(
            Workload(_reid(records[start:pos]), kind, PoolParams(cores, budget, pool_factor))
        )
    return pools


# ---------------------------------------------------------------------------
# Synthetic generators. Each is a pure function of (spec, seed): the spec
# string picks the generator and its parameters, the seed feeds the only
# randomness source, so identical inputs always rebuild identical workloads.


def _conflict_free(rng: random.Random, n: int, exec_time: int = 1) -> Workload:
    txs = tuple(
        Transaction(i, exec_time, 1, frozenset(), frozenset({f"k{i}"})) for i in range(n)
    )
    return Workload(txs, BlockKind.HOMOGENEOUS)


def _single_hot_key(rng: random.Random, n: int) -> Workload:
    # pairs of adjacent writers to one hot key, padded with independent txs;
    # the adjacency is what stalls strict in-order dispatch
    txs = tuple(
        Transaction(
            i, 1, 1, frozenset(), frozenset({"hot" if i % 4 < 2 else f"k{i}"})
        )
        for i in range(n)
    )
    return Workload(txs, BlockKind.HOMOGENEOUS)


def _chain(rng: random.Random, n: int) -> Workload:
    txs = tuple(
        Transaction(
            i,
            1,
            1,
            frozenset({f"k{i - 1}"}) if i else frozenset(),
            frozenset({f"k{i}"}),
        )
        for i in range(n)
    )
    return Workload(txs, BlockKind.HOMOGENEOUS)


def _stress(rng: random.Random, cores: int, budget: int) -> Workload:
    """Low-id writers of one hot key, then cores*budget readers of that key.

    Readers conflict with every writer but not with each other. Reward-order
    selection pops the writers first and serializes a chain that starves the
    rest; density-with-degree order pops the lower-degree readers and keeps
    every core busy for the whole budget instead.
    """
    txs = [
        Transaction(i, 1, 1, frozenset(), frozenset({"hot"})) for i in range(budget)
    ]
    for q in range(cores * budget):
        txs.append(Transaction(budget + q, 1, 1, frozenset({"hot"}), frozenset()))
    return Workload(tuple(txs), BlockKind.HOMOGENEOUS, PoolParams(cores, budget))


def _random_workload(
    rng: random.Random,
    n: int,
    key_universe: int = 32,
    access_size: int = 3,
    gas_range: tuple[int, int] = (1, 5),
    tip_range: tuple[int, int] = (0, 5),
) -> Workload:
    txs = []
    for i in range(n):
        gas = rng.randint(*gas_range)
        tip = rng.randint(*tip_range)
        picks = [f"k{rng.randrange(key_universe)}" for _ in range(rng.randint(1, access_size))]
        split = rng.randint(0, len(picks))
        txs.append(
            Transaction(i, gas, tip, frozenset(picks[:split]), frozenset(picks[split:]))
        )
    kind = (
        BlockKind.HOMOGENEOUS
        if len({tx.exec_time for tx in txs}) <= 1
        else BlockKind.HETEROGENEOUS
    )
    return Workload(tuple(txs), kind)


_GENERATORS: Mapping[str, Callable[..., Workload]] = {
    "conflict_free": _conflict_free,
    "single_hot_key": _single_hot_key,
    "chain": _chain,
    "stress": _stress,
    "random": _random_workload,
}

GENERATOR_NAMES = tuple(sorted(_GENERATORS))

_SPEC_SHAPE = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*(.*?)\s*\))?\s*$")


def parse_synth_spec(spec: str) -> tuple[str, dict[str, int | tuple[int, int]]]:
    """Split "name(key=value, lo:hi ranges, ...)" into name and kwargs."""
    shape = _SPEC_SHAPE.match(spec)
    if shape is None:
        raise ValueError(f"malformed generator spec {spec!r}")
    name, arg_text = shape.group(1), shape.group(2)
    kwargs: dict[str, int | tuple[int, int]] = {}
    if arg_text:
        for piece in arg_text.split(","):
            key, eq, value = piece.partition("=")
            key = key.strip()
            value = value.strip()
            if not eq or not key or not value:
                raise ValueError(f"malformed generator argument {piece.strip()!r}")
            if ":" in value:
                lo, _, hi = value.partition(":")
                kwargs[key] = (int(lo), int(hi))
            else:
                kwargs[key] = int(value)
    return name, kwargs


def synth(spec: str, seed: int = 0) -> Workload:
    """Build the workload a spec string describes, deterministically in seed."""
    name, kwargs = parse_synth_spec(spec)
    maker = _GENERATORS.get(name)
    if maker is None:
        raise ValueError(
            f"unknown generator {name!r}; available: {', '.join(GENERATOR_NAMES)}"
        )
    try:
        return maker(random.Random(seed), **kwargs)
    except TypeError as err:
        raise ValueError(f"bad arguments for {name!r}: {err}") from err
