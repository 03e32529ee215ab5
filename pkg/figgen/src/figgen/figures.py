"""Panel construction and rendering.

build_panels() is pure: it maps (CSV, spec) to plotted data arrays.
render() draws those arrays and writes one image per panel, so tests
can assert on the data without touching pixels.
"""

import os
from dataclasses import dataclass, field

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from figgen.data import NoDataError, apply_filter, load_records
from figgen.style import METHOD_ORDER, style_for

KINDS = ("gamma", "refine")

# (column, axis label); one figure per panel
PANELS = (
    ("cond1", "condition number (1-norm)"),
    ("err_l2", "relative L2 error"),
    ("err_h1", "relative H1 error"),
)


@dataclass
class FigureSpec:
    csv_path: str
    kind: str
    filters: dict = field(default_factory=dict)
    # optional override: one (exponent, label) per panel, refine kind only
    guides: tuple | None = None

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if self.guides is not None and len(self.guides) != len(PANELS):
            raise ValueError("need one guide per panel")
        return self


@dataclass
class Panel:
    column: str
    y_label: str
    x_label: str
    # method -> (x, y) arrays sorted by x
    series: dict
    # (x, y, label) or None
    guide: tuple | None


def _series(records, x_column, y_column):
    out = {}
    methods = sorted({r["method"] for r in records},
                     key=lambda m: METHOD_ORDER.index(m) if m in METHOD_ORDER else 99)
    for method in methods:
        rows = [r for r in records if r["method"] == method]
        rows.sort(key=lambda r: r[x_column])
        out[method] = (
            np.array([r[x_column] for r in rows]),
            np.array([r[y_column] for r in rows]),
        )
    return out


def _unique_order(records):
    orders = {r["order"] for r in records}
    if len(orders) != 1:
        raise NoDataError(
            "refinement guides need a single element order; "
            f"found {sorted(orders)} (add an order=… filter)"
        )
    return orders.pop()


def _anchor_method(series):
    for method in METHOD_ORDER:
        if method in series:
            return method
    return next(iter(series))


def _guide(series, exponent, label):
    # anchored at the finest datum of the reduced-space series when
    # present, else of the first catalogued series
    anchor = series.get("S-Ag") or series[_anchor_method(series)]
    x_anchor = anchor[0][0]
    y_anchor = anchor[1][0]
    xs = np.concatenate([x for x, _ in series.values()])
    x = np.array([xs.min(), xs.max()])
    y = y_anchor * (x / x_anchor) ** exponent
    return x, y, label


def build_panels(spec: FigureSpec):
    spec.validate()
    records = apply_filter(load_records(spec.csv_path), spec.filters)
    if spec.kind == "gamma":
        x_column, x_label = "gamma", "penalty weight"
        guides = (None,) * len(PANELS)
    else:
        x_column, x_label = "h", "mesh size h"
        if spec.guides is not None:
            guides = spec.guides
        else:
            m = _unique_order(records)
            guides = ((-2, "h^-2"), (m + 1, f"h^{m + 1}"), (m, f"h^{m}"))

    panels = []
    for (column, y_label), guide_spec in zip(PANELS, guides):
        series = _series(records, x_column, column)
        guide = None
        if guide_spec is not None:
            guide = _guide(series, *guide_spec)
        panels.append(Panel(column, y_label, x_label, series, guide))
    return panels


def draw_panel(panel: Panel):
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    for method, (x, y) in panel.series.items():
        marker, colour = style_for(method)
        ax.plot(x, y, marker=marker, color=colour, label=method)
    if panel.guide is not None:
        gx, gy, glabel = panel.guide
        ax.plot(gx, gy, "k--", linewidth=0.9, label=glabel)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(panel.x_label)
    ax.set_ylabel(panel.y_label)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec, out_dir):
    """Write one log-log image per panel; returns the file paths."""
    panels = build_panels(spec)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for panel in panels:
        fig = draw_panel(panel)
        path = os.path.join(out_dir, f"{spec.kind}_{panel.column}.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths
