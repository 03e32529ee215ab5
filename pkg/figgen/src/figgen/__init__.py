"""Figure generation for unfitted-bench CSV results.

Consumes the benchmark CSV schema only; it never imports the solver
package. Tests assert on extracted plotted data, not on pixels.
"""

from figgen.data import NoDataError, SchemaError, apply_filter, load_records
from figgen.figures import PANELS, FigureSpec, build_panels, render
from figgen.style import STYLE

__all__ = [
    "FigureSpec",
    "NoDataError",
    "PANELS",
    "STYLE",
    "SchemaError",
    "apply_filter",
    "build_panels",
    "load_records",
    "render",
]
