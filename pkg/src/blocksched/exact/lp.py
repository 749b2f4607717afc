"""CPLEX-LP text export and a matching reader.

The emitted layout is fixed so files are reproducible byte for byte:
sense line, ``obj:`` row, ``Subject To`` rows in model order, a ``Bounds``
section only when some integer variable needs one, ``Binaries`` and
``Generals`` name lists (ten names per line), then ``End``. The reader
exists for round-trip checks and accepts exactly this dialect; it returns
enough structure to compare variable and constraint inventories.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .model import LinearModel, Sense, VarKind

__all__ = ["lp_text", "write_lp", "parse_lp", "ParsedLp"]

_NAMES_PER_LINE = 10


def _expr(coeffs: Mapping[str, int]) -> str:
    parts: list[str] = []
    for name, coef in coeffs.items():
        if coef == 0:
            continue
        magnitude = abs(coef)
        term = name if magnitude == 1 else f"{magnitude} {name}"
        if not parts:
            parts.append(term if coef > 0 else f"- {term}")
        else:
            parts.append(f"+ {term}" if coef > 0 else f"- {term}")
    return " ".join(parts) if parts else "0"


def lp_text(model: LinearModel) -> str:
    lines = ["Maximize" if model.objective.sense is Sense.MAXIMIZE else "Minimize"]
    lines.append(f" obj: {_expr(model.objective.coeffs)}")
    lines.append("Subject To")
    for row in model.constraints:
        lines.append(f" {row.name}: {_expr(row.coeffs)} {row.relation} {row.rhs}")

    bound_lines = []
    for var in model.variables:
        if var.kind is VarKind.BINARY:
            continue
        if var.lower == 0 and var.upper is None:
            continue  # the format's default range
        upper = "+inf" if var.upper is None else str(var.upper)
        bound_lines.append(f" {var.lower} <= {var.name} <= {upper}")
    if bound_lines:
        lines.append("Bounds")
        lines.extend(bound_lines)

    for section, kind in (("Binaries", VarKind.BINARY), ("Generals", VarKind.INTEGER)):
        names = [v.name for v in model.variables if v.kind is kind]
        if names:
            lines.append(section)
            for at in range(0, len(names), _NAMES_PER_LINE):
                lines.append(" " + " ".join(names[at : at + _NAMES_PER_LINE]))

    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(model: LinearModel, destination: str | Path) -> Path:
    """Write the model to ``destination`` in CPLEX-LP text form."""
    path = Path(destination)
    path.write_text(lp_text(model), encoding="ascii")
    return path


@dataclass(frozen=True, slots=True)
class ParsedLp:
    sense: Sense
    objective: dict[str, int]
    constraints: tuple[tuple[str, dict[str, int], str, int], ...]
    binaries: tuple[str, ...]
    generals: tuple[str, ...]
    bounds: dict[str, tuple[int, int | None]]

    def variable_names(self) -> set[str]:
        return set(self.binaries) | set(self.generals)


def _parse_terms(text: str) -> dict[str, int]:
    coeffs: dict[str, int] = {}
    sign = 1
    pending: int | None = None
    for token in text.split():
        if token == "+":
            sign = 1
        elif token == "-":
            sign = -1
        elif token.isdigit():
            if token == "0" and pending is None:
                continue  # the writer's empty-expression placeholder
            pending = int(token)
        else:
            coeffs[token] = sign * (1 if pending is None else pending)
            sign = 1
            pending = None
    return coeffs


def parse_lp(text: str) -> ParsedLp:
    """Read the dialect ``lp_text`` writes; raises ValueError on anything else."""
    sense: Sense | None = None
    objective: dict[str, int] = {}
    constraints: list[tuple[str, dict[str, int], str, int]] = []
    binaries: list[str] = []
    generals: list[str] = []
    bounds: dict[str, tuple[int, int | None]] = {}
    section = ""

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        if line in ("Minimize", "Maximize"):
            sense = Sense.MAXIMIZE if line == "Maximize" else Sense.MINIMIZE
            section = "objective"
            continue
        if line == "Subject To":
            section = "rows"
            continue
        if line in ("Bounds", "Binaries", "Generals"):
            section = line.lower()
            continue
        if line == "End":
            section = "end"
            continue

        if section == "objective":
            _, _, expr = line.partition(":")
            objective.update(_parse_terms(expr))
        elif section == "rows":
            name, _, rest = line.partition(":")
            for relation in ("<=", ">=", "="):
                lhs, found, rhs = rest.partition(f" {relation} ")
                if found:
                    constraints.append(
                        (name.strip(), _parse_terms(lhs), relation, int(rhs))
                    )
                    break
            else:
                raise ValueError(f"constraint row without relation: {line!r}")
        elif section == "bounds":
            tokens = line.split()
            if len(tokens) != 5 or tokens[1] != "<=" or tokens[3] != "<=":
                raise ValueError(f"unsupported bounds row: {line!r}")
            upper = None if tokens[4] == "+inf" else int(tokens[4])
            bounds[tokens[2]] = (int(tokens[0]), upper)
        elif section == "binaries":
            binaries.extend(line.split())
        elif section == "generals":
            generals.extend(line.split())
        elif section == "end":
            raise ValueError(f"content after End: {line!r}")
        else:
            raise ValueError(f"line outside any section: {line!r}")

    if sense is None:
        raise ValueError("no objective sense line")
    return ParsedLp(
        sense,
        objective,
        tuple(constraints),
        tuple(binaries),
        tuple(generals),
        bounds,
    )
