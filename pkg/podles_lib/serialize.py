"""Rep documents, Report arrays and coefficient CSV."""

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable
import warnings

from scipy import sparse

from podles_lib.constants import COEFF_COLUMNS, CSV_DIGITS
from podles_lib.qrat import HalfInt, ParameterError
from podles_lib.report import Report
from podles_lib.reps import CoeffTable, ParamSet, Rep, build_rep


FORMAT_VERSION = 1

# Kinds whose labels are doubled half-integers
_DOUBLED_KINDS = {"spin", "cross2"}


def _label_to_json(kind: str, label: tuple[int, ...]) -> list:
    if kind in _DOUBLED_KINDS:
        return [str(HalfInt(value)) for value in label]
    return list(label)


def _label_from_json(kind: str, label: list) -> tuple[int, ...]:
    if kind in _DOUBLED_KINDS:
        return tuple(HalfInt.of(str(value)).doubled for value in label)
    return tuple(int(value) for value in label)


def _entries(matrix: sparse.spmatrix) -> list[list[float]]:
    coo = sparse.coo_matrix(matrix)
    triples = sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))
    return [[row, col, complex(value).real, complex(value).imag] for row, col, value in triples if value != 0]


def rep_to_json(r: Rep) -> dict[str, Any]:
    """Document for a Rep; basis order and entry order are deterministic."""
    return {
        "format_version": FORMAT_VERSION,
        "kind": r.kind,
        "params": r.params.to_dict(),
        "presentation": r.presentation_id,
        "regime": r.regime,
        "meta": dict(r.meta),
        "basis": [_label_to_json(r.kind, label) for label in r.basis],
        "operators": {name: _entries(r.matrices[name]) for name in sorted(r.matrices)},
    }


def rep_from_json(data: dict[str, Any]) -> Rep:
    """Rebuild a Rep from its document.

    Lattice metadata (shifts, star table) is re-derived from the recorded kind
    and parameters; the stored matrices then replace the computed ones.

    Raises:
        ParameterError: If the document is malformed or its basis does not match
    """
    errors = []
    for key in ("kind", "params", "basis", "operators"):
        if key not in data:
            errors.append(f"missing '{key}'")
    if errors:
        raise ParameterError(f"Invalid Rep document: {', '.join(errors)}")

    kind = data["kind"]
    meta = data.get("meta", {})
    params = ParamSet.from_dict(data["params"])
    template = build_rep(
        kind,
        params,
        sector=meta.get("sector", "+"),
        spin=meta.get("spin"),
        l_max=meta.get("l_max"),
        variant=meta.get("variant", "limit"),
    )
    basis = tuple(_label_from_json(kind, label) for label in data["basis"])
    if basis != template.basis:
        raise ParameterError(f"Basis of the stored {kind} representation does not match its parameters")

    size = len(basis)
    matrices = {}
    for name, entries in data["operators"].items():
        if name not in template.matrices:
            warnings.warn(f"Ignoring unknown operator {name!r} in Rep document", stacklevel=2)
            continue
        rows = [int(entry[0]) for entry in entries]
        cols = [int(entry[1]) for entry in entries]
        values = [complex(entry[2], entry[3]) for entry in entries]
        matrices[name] = sparse.coo_matrix((values, (rows, cols)), shape=(size, size), dtype=complex).tocsr()
    return template.with_matrices(matrices)


def write_json(data: Any, path: str | Path | None) -> str:
    """Serialize to JSON; write to path when given. Returns the text."""
    text = json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def load_rep(path: str | Path) -> Rep:
    """Read a Rep document from disk.

    Raises:
        ValueError: If the file is not valid JSON
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid JSON in {path}: {e}") from e
    return rep_from_json(data)


def reports_to_json(reports: Iterable[Report]) -> list[dict[str, Any]]:
    return [report.to_dict() for report in reports]


def _number(value: float) -> str:
    return f"{value:.{CSV_DIGITS}g}"


def coeff_table_to_csv(table: CoeffTable) -> str:
    """CSV with one row per (l, j), l and j written as fractions."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COEFF_COLUMNS)
    for (dl, dj), row in table.sorted_rows():
        writer.writerow(
            [
                str(HalfInt(dl)),
                str(HalfInt(dj)),
                _number(row.alpha_plus),
                _number(row.alpha_zero),
                _number(row.alpha_minus),
                _number(row.beta_plus),
                _number(row.beta_zero),
            ]
        )
    return buffer.getvalue()
