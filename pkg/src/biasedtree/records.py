"""Output records emitted by the command-line tool, and their validator.

A record is one JSON object::

    {"schema_version": "1", "command": "exact",
     "params": {...}, "metadata": {...}, "rows": [{...}, ...]}

The CSV rendering carries the same header fields as ``# key: <json>``
comment lines, followed by an RFC 4180 table (CRLF line endings, minimal
quoting). :func:`parse_record` reads either form back and
:func:`validate_record` checks it against :data:`RECORD_SCHEMA` plus the
per-command column list.
"""
from __future__ import annotations

import csv
import decimal
import io
import json
import math
import sys
from fractions import Fraction

import jsonschema

SCHEMA_VERSION = "1"

COLUMNS = {
    "exact": ["n", "p_exact", "f_exact", "f_catalan", "p_from_convolution"],
    "sweep": ["lambda", "rho", "regime", "return_probability"],
    "asymptote": ["n", "f_exact", "f_asym", "ratio_f"],
    "simulate": ["quantity", "step", "estimate", "std_error", "exact", "z_score"],
    "series": ["power", "u_coef", "g_coef", "f_catalan", "p_dp"],
}
# columns that asymptote adds when the n-step law applies
ASYMPTOTE_P_COLUMNS = ["p_exact", "p_asym", "ratio_p"]

_HEADER_KEYS = ("schema_version", "command", "params", "metadata")

_CELL = {"type": ["string", "number", "integer", "null"]}

RECORD_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "command", "params", "metadata", "rows"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": sorted(COLUMNS)},
        "params": {
            "type": "object",
            "required": ["d"],
            "properties": {"d": {"type": "integer", "minimum": 2}},
        },
        "metadata": {"type": "object"},
        "rows": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "object", "additionalProperties": _CELL},
        },
    },
}


class SchemaError(ValueError):
    pass


# -- value formatting --------------------------------------------------------

_DEC = decimal.Context(prec=17)


def fmt_rational(x: Fraction) -> str:
    return str(Fraction(x))


def fmt_float(x: float):
    """JSON-ready float: finite doubles pass through, non-finite become strings."""
    x = float(x) + 0.0  # folds -0.0 into 0.0
    if math.isfinite(x):
        return x
    return repr(x)


def fmt_scaled(mantissa: float, exponent: int):
    """``mantissa * 2**exponent`` as a float, or a decimal string if it underflows."""
    if mantissa == 0.0:
        return 0.0
    x = math.ldexp(mantissa, exponent)
    if abs(x) >= sys.float_info.min:
        return x
    value = _DEC.multiply(decimal.Decimal(mantissa), _DEC.power(decimal.Decimal(2), exponent))
    return format(value, ".16e")


def fmt_log(log_value: float):
    """Value whose natural log is given, as a float or a decimal string."""
    if log_value == -math.inf:
        return 0.0
    if log_value > -700.0:
        return math.exp(log_value)
    value = _DEC.exp(_DEC.create_decimal_from_float(log_value))
    return format(value, ".16e")


# -- emission ----------------------------------------------------------------


def make_record(command: str, params: dict, rows: list, metadata: dict) -> dict:
    record = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": params,
        "metadata": metadata,
        "rows": rows,
    }
    validate_record(record)
    return record


def _cell_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(record: dict) -> str:
    buf = io.StringIO(newline="")
    for key in _HEADER_KEYS:
        buf.write(f"# {key}: {json.dumps(record[key], sort_keys=True)}\r\n")
    columns = list(record["rows"][0])
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in record["rows"]:
        writer.writerow([_cell_text(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=False) + "\n"


def render(record: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(record)
    if fmt == "csv":
        return to_csv(record)
    raise ValueError(f"unknown format {fmt!r}")


# -- parsing and validation --------------------------------------------------


def parse_record(text: str) -> dict:
    """Parse CSV or JSON output back into a record dict (format is sniffed)."""
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    header = {}
    body = []
    for line in text.splitlines(keepends=True):
        if line.startswith("# ") and not body:
            key, _, payload = line[2:].partition(": ")
            try:
                header[key] = json.loads(payload)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"bad header line {line!r}") from exc
        else:
            body.append(line)
    rows = list(csv.DictReader(io.StringIO("".join(body), newline="")))
    return {**header, "rows": rows}


def validate_record(record: dict) -> None:
    try:
        jsonschema.validate(record, RECORD_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(exc.message) from exc
    required = COLUMNS[record["command"]]
    for i, row in enumerate(record["rows"]):
        missing = [c for c in required if c not in row]
        if missing:
            raise SchemaError(f"row {i} lacks columns {missing}")


def validate_text(text: str) -> dict:
    record = parse_record(text)
    validate_record(record)
    return record
