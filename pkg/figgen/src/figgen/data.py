"""CSV loading and filtering for the benchmark schema."""

import csv


class SchemaError(ValueError):
    pass


class NoDataError(ValueError):
    pass


def _to_bool(text):
    if text == "true":
        return True
    if text == "false":
        return False
    raise SchemaError(f"boolean column holds {text!r}")


# column -> parser; this is the full bench CSV schema
PARSERS = {
    "problem": str,
    "bc": str,
    "geometry": str,
    "method": str,
    "gamma": float,
    "order": int,
    "n": int,
    "h": float,
    "dofs": int,
    "cond1": float,
    "cond1_is_estimate": _to_bool,
    "err_l2": float,
    "err_h1": float,
    "solver_residual": float,
    "wall_time_ms": float,
}

COLUMNS = tuple(PARSERS)


def load_records(path):
    """Parse a benchmark CSV into typed row dicts.

    Raises SchemaError naming any column that is missing from the
    header.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"CSV is missing columns: {', '.join(missing)}")
        records = []
        for row in reader:
            records.append({c: PARSERS[c](row[c]) for c in COLUMNS})
    if not records:
        raise NoDataError(f"{path} holds no data rows")
    return records


def parse_filter_value(key, text):
    if key not in PARSERS:
        raise SchemaError(f"unknown filter column {key!r}")
    try:
        return PARSERS[key](text)
    except ValueError as exc:
        raise SchemaError(f"filter {key}={text!r}: {exc}") from exc


def apply_filter(records, filters):
    """Keep rows matching every key=value pair; reject empty results."""
    kept = records
    for key, value in filters.items():
        value = parse_filter_value(key, str(value))
        kept = [r for r in kept if r[key] == value]
    if not kept:
        parts = ", ".join(f"{k}={v}" for k, v in filters.items())
        raise NoDataError(f"no rows match filter ({parts})")
    return kept
