import csv

import pytest

from figgen.data import COLUMNS

DEFAULTS = {
    "problem": "poisson",
    "bc": "nitsche",
    "geometry": "box",
    "method": "S-Ag",
    "gamma": 1.0,
    "order": 1,
    "n": 8,
    "h": 0.125,
    "dofs": 100,
    "cond1": 1e3,
    "cond1_is_estimate": "false",
    "err_l2": 1e-3,
    "err_h1": 1e-2,
    "solver_residual": 1e-14,
    "wall_time_ms": 1.0,
}


@pytest.fixture
def write_csv(tmp_path):
    def _write(rows, name="bench.csv", columns=COLUMNS):
        path = tmp_path / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                merged = {**DEFAULTS, **row}
                writer.writerow([merged[c] for c in columns])
        return str(path)

    return _write


@pytest.fixture
def refinement_rows():
    """Exact power-law data: err_l2 = h^2, err_h1 = h, cond1 = 7 h^-2."""

    def _rows(method="S-Ag", ns=(8, 16, 32, 64)):
        rows = []
        for n in ns:
            h = 1.0 / n
            rows.append(
                {
                    "method": method,
                    "n": n,
                    "h": h,
                    "err_l2": h**2,
                    "err_h1": h,
                    "cond1": 7.0 / h**2,
                }
            )
        return rows

    return _rows
